"""Classical solvers, comparison metrics and the reference sampler.

All three solvers read the matrix only through :func:`~qlinsys.linalg.row_oracle`,
so the ``T_A`` counter reflects their matrix-access cost:

* :func:`direct_solve` reads every row once, then factors densely.
* :func:`neumann_solve` reads every row once per series term.
* :func:`iterative_solve` reads every row once per conjugate-gradient step.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, InputError, SingularMatrixError
from .linalg import SINGULAR_RTOL, SparseHermitianMatrix, row_oracle, spectral_decompose

__all__ = [
    "SampleDistribution",
    "direct_solve",
    "neumann_solve",
    "iterative_solve",
    "fidelity",
    "sample_solution",
    "tv_distance",
]


def _dim(A) -> int:
    return A.dim if isinstance(A, SparseHermitianMatrix) else A.shape[0]


def _matvec(A, v: np.ndarray) -> np.ndarray:
    """``A @ v`` assembled row by row from the oracle."""
    out = np.zeros(_dim(A), dtype=complex)
    for i in range(out.size):
        row = row_oracle(A, i)
        if row:
            cols, vals = zip(*row)
            out[i] = np.dot(vals, v[list(cols)])
    return out


def _dense_via_oracle(A) -> np.ndarray:
    n = _dim(A)
    dense = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j, v in row_oracle(A, i):
            dense[i, j] = v
    return dense


def _as_vector(b, n: int) -> np.ndarray:
    b = np.asarray(b, dtype=complex).reshape(-1)
    if b.size != n:
        raise InputError(f"right-hand side has {b.size} entries, matrix has dimension {n}")
    return b


def direct_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    ``A`` may be a :class:`SparseHermitianMatrix` or any square scipy-sparse
    or dense matrix; it need not be Hermitian.
    """
    n = _dim(A)
    b = _as_vector(b, n)
    dense = _dense_via_oracle(A)
    with warnings.catch_warnings():
        # exact singularity is reported below as SingularMatrixError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(dense, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.max(initial=0.0) == 0.0 or pivots.min() <= SINGULAR_RTOL * pivots.max():
        raise SingularMatrixError(f"numerically singular pivot ({pivots.min():.3e})")
    return scipy.linalg.lu_solve((lu, piv), b)


def neumann_solve(A: SparseHermitianMatrix, b, epsilon: float,
                  kappa: float | None = None) -> tuple[np.ndarray, int]:
    """Truncated series ``sum_{n=0}^{N} (I - A)^n b`` with ``N = ceil(kappa ln(1/eps))``.

    ``A`` must be Hermitian positive definite with spectrum inside
    ``[1/kappa, 1]``. When ``kappa`` is omitted it is taken as
    ``1 / lambda_min``, the tightest value for which that holds.
    The error is at most ``(1 - 1/kappa)^(N+1) * kappa * ||b||``.
    """
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    b = _as_vector(b, A.dim)
    lam = spectral_decompose(A).eigenvalues
    lo, hi = float(lam.min()), float(lam.max())
    if lo <= 0.0 or hi > 1.0 + 1e-12:
        raise InputError(f"Neumann series needs eigenvalues in (0, 1], got [{lo:.6g}, {hi:.6g}]")
    if kappa is None:
        kappa = 1.0 / lo
    elif lo < (1.0 / kappa) * (1 - 1e-12):
        raise InputError(f"smallest eigenvalue {lo:.6g} is below 1/kappa = {1 / kappa:.6g}")
    n_terms = math.ceil(kappa * math.log(1.0 / epsilon))
    term = b.copy()
    total = b.copy()
    for _ in range(n_terms):
        term = term - _matvec(A, term)
        total += term
    return total, n_terms


def neumann_error_bound(kappa: float, n_terms: int, b_norm: float = 1.0) -> float:
    return (1.0 - 1.0 / kappa) ** (n_terms + 1) * kappa * b_norm


def iterative_solve(A: SparseHermitianMatrix, b, epsilon: float) -> tuple[np.ndarray, int]:
    """Conjugate gradient until ``||A x - b|| <= epsilon ||b||``.

    Raises :class:`ConvergenceError` after ``10 * dim`` iterations.
    """
    b = _as_vector(b, A.dim)
    b_norm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if b_norm == 0.0:
        return x, 0
    r = b.copy()
    p = r.copy()
    rr = np.vdot(r, r).real
    target = epsilon * b_norm
    for it in range(1, 10 * A.dim + 1):
        ap = _matvec(A, p)
        curv = np.vdot(p, ap).real
        if curv <= 0.0:
            raise ConvergenceError("matrix is not positive definite along a search direction")
        alpha = rr / curv
        x += alpha * p
        r -= alpha * ap
        rr_new = np.vdot(r, r).real
        if math.sqrt(rr_new) <= target:
            return x, it
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise ConvergenceError(f"conjugate gradient did not converge in {10 * A.dim} iterations")


def fidelity(u, v, tol: float = 1e-8) -> float:
    """``|<u, v>|`` for unit vectors ``u`` and ``v``."""
    u = np.asarray(u, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if u.shape != v.shape:
        raise InputError(f"vector lengths differ: {u.size} vs {v.size}")
    for name, w in (("u", u), ("v", v)):
        if abs(np.linalg.norm(w) - 1.0) > tol:
            raise InputError(f"{name} is not a unit vector (norm {np.linalg.norm(w):.12g})")
    return float(min(abs(np.vdot(u, v)), 1.0))


class SampleDistribution(Mapping):
    """Probability distribution over integer outcomes."""

    def __init__(self, probabilities: Mapping[int, float] | np.ndarray, tol: float = 1e-10):
        if isinstance(probabilities, Mapping):
            items = {int(k): float(v) for k, v in probabilities.items()}
        else:
            arr = np.asarray(probabilities, dtype=float).reshape(-1)
            items = {i: float(p) for i, p in enumerate(arr)}
        if any(p < 0.0 for p in items.values()):
            raise InputError("probabilities must be non-negative")
        total = sum(items.values())
        if abs(total - 1.0) > tol:
            raise InputError(f"probabilities sum to {total!r}, expected 1")
        self._p = dict(sorted(items.items()))

    @classmethod
    def from_samples(cls, samples) -> "SampleDistribution":
        values, counts = np.unique(np.asarray(samples), return_counts=True)
        total = counts.sum()
        return cls({int(v): c / total for v, c in zip(values, counts)})

    @property
    def support(self) -> list[int]:
        return [k for k, p in self._p.items() if p > 0.0]

    def __getitem__(self, key):
        return self._p.get(int(key), 0.0)

    def __iter__(self):
        return iter(self._p)

    def __len__(self):
        return len(self._p)

    def __repr__(self):
        return f"SampleDistribution({self._p})"


def tv_distance(p: Mapping[int, float], q: Mapping[int, float]) -> float:
    """Un-halved l1 distance ``sum_i |p_i - q_i|`` (range ``[0, 2]``)."""
    keys = set(p) | set(q)
    return float(sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys))


def solution_distribution(A, b) -> SampleDistribution:
    """Exact ``|x_i|^2`` for ``x = A^-1 b / ||A^-1 b||``."""
    x = direct_solve(A, b)
    probs = np.abs(x) ** 2
    return SampleDistribution(probs / probs.sum())


def sample_solution(A, b=None, shots: int = 1, seed: int | None = None) -> np.ndarray:
    """Draw ``shots`` indices ``i`` with probability ``|x_i|^2``.

    ``b`` defaults to ``e_1`` (first basis vector). Returns an integer array.
    """
    n = _dim(A)
    if b is None:
        b = np.zeros(n)
        b[0] = 1.0
    dist = solution_distribution(A, b)
    probs = np.array([dist[i] for i in range(n)])
    rng = np.random.default_rng(seed)
    return rng.choice(n, size=shots, p=probs / probs.sum())
