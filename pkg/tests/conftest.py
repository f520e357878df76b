import numpy as np
import pytest

from qlinsys import resources
from qlinsys.linalg import SparseHermitianMatrix


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, n, kappa=None, positive=False):
    """Dense Hermitian with spectral radius 1 and condition number exactly ``kappa``."""
    if kappa is None:
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return (m + m.conj().T) / 2
    lam = rng.uniform(1.0 / kappa, 1.0, size=n)
    lam[0], lam[-1] = 1.0, 1.0 / kappa
    if not positive:
        lam *= rng.choice([-1.0, 1.0], size=n)
    q = random_unitary(rng, n)
    h = (q * lam) @ q.conj().T
    return (h + h.conj().T) / 2


def random_state(rng, n_qubits):
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)


def unit(v):
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def laplacian8():
    """1D Dirichlet stencil on 8 interior points, unscaled."""
    n = 8
    dense = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    return SparseHermitianMatrix.from_dense(dense * 81.0)


@pytest.fixture(autouse=True)
def _fresh_global_counters():
    resources.GLOBAL.reset()
    yield
