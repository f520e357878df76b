"""Turn least squares, forward-Euler ODEs and Poisson problems into linear systems.

Each encoder returns an :class:`EncodedSystem` whose ``matrix`` is Hermitian
with spectral radius 1 and whose ``rhs`` is a unit vector, so it can go
straight into :func:`~qlinsys.hhl.hhl_solve`. The untouched source system is
kept alongside for classical solves.

Physical solutions are recovered as
``unscale * (matrix^+ rhs)[solution_slice]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .classical import direct_solve
from .errors import CapacityError, InputError, RankError
from .linalg import (
    MAX_DIM,
    RectangularMatrix,
    SparseHermitianMatrix,
    condition_number,
    hermitian_dilation,
    spectral_decompose,
    spectrum_rescale,
)

__all__ = [
    "EncodedSystem",
    "encode_least_squares",
    "encode_ode",
    "encode_poisson",
    "poisson_matrix",
    "poisson_eigenvalues",
    "kappa_scaling_probe",
    "ProbeTable",
]


@dataclass
class EncodedSystem:
    matrix: SparseHermitianMatrix
    rhs: np.ndarray
    unscale: float
    solution_slice: slice
    kappa_report: float
    provenance: dict
    source_matrix: object = field(repr=False, default=None)
    source_rhs: np.ndarray | None = field(repr=False, default=None)

    def __post_init__(self):
        if abs(np.linalg.norm(self.rhs) - 1.0) > 1e-10:
            raise InputError("encoded right-hand side must be a unit vector")
        start, stop, _ = self.solution_slice.indices(self.matrix.dim)
        if not 0 <= start < stop <= self.matrix.dim:
            raise InputError("solution slice lies outside the matrix")

    def recover(self, y) -> np.ndarray:
        """Map a solution of ``matrix y = rhs`` to the physical unknowns."""
        return self.unscale * np.asarray(y)[self.solution_slice]

    def solve_classical(self) -> np.ndarray:
        """Physical solution from the source system (least squares via ``lstsq``)."""
        src = self.source_matrix
        if self.provenance["encoder"] == "least_squares":
            dense = src.entries if isinstance(src, RectangularMatrix) else np.asarray(src)
            return np.linalg.lstsq(dense, self.source_rhs, rcond=None)[0]
        return direct_solve(src, self.source_rhs)


def _unit(v) -> tuple[np.ndarray, float]:
    v = np.asarray(v, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InputError("right-hand side is zero")
    return v / norm, norm


def encode_least_squares(M: RectangularMatrix | np.ndarray, b) -> EncodedSystem:
    """Dilate a tall full-rank ``M`` so that inverting on ``(b, 0)`` yields ``(0, M^+ b)``."""
    if not isinstance(M, RectangularMatrix):
        M = RectangularMatrix(M)
    n, p = M.n_rows, M.n_cols
    if n < p:
        raise InputError(f"least squares needs n_rows >= n_cols, got {n}x{p}")
    b = np.asarray(b, dtype=complex).reshape(-1)
    if b.size != n:
        raise InputError(f"b has {b.size} entries, M has {n} rows")
    sv = np.linalg.svd(M.entries, compute_uv=False)
    if sv.max() == 0.0 or sv.min() <= 1e-12 * sv.max():
        raise RankError("M is rank deficient")
    dilated, scale = spectrum_rescale(hermitian_dilation(M), allow_singular=True)
    rhs_top, b_norm = _unit(b)
    rhs = np.concatenate([rhs_top, np.zeros(p, dtype=complex)])
    return EncodedSystem(
        matrix=dilated, rhs=rhs, unscale=b_norm / scale, solution_slice=slice(n, n + p),
        kappa_report=float(sv.max() / sv.min()),
        provenance={"encoder": "least_squares", "n_rows": n, "n_cols": p, "scale": scale},
        source_matrix=M, source_rhs=b)


def euler_block_system(A_of_t: Callable[[float], np.ndarray], b_of_t: Callable[[float], np.ndarray],
                       x_init, time_grid: Sequence[float]) -> tuple[sp.csr_matrix, np.ndarray]:
    """Block lower-bidiagonal system whose solution stacks the forward-Euler iterates."""
    grid = np.asarray(time_grid, dtype=float)
    x0 = np.asarray(x_init, dtype=complex).reshape(-1)
    N, m = x0.size, grid.size
    if m < 2:
        raise InputError("time grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise InputError("time grid must be strictly increasing")
    eye = sp.identity(N, dtype=complex, format="csr")
    blocks = [[None] * m for _ in range(m)]
    rhs = np.zeros(N * m, dtype=complex)
    blocks[0][0] = eye
    rhs[:N] = x0
    for i in range(m - 1):
        dt = grid[i + 1] - grid[i]
        a = np.asarray(A_of_t(grid[i]), dtype=complex).reshape(N, N)
        blocks[i + 1][i] = -(eye + dt * sp.csr_matrix(a))
        blocks[i + 1][i + 1] = eye
        rhs[(i + 1) * N:(i + 2) * N] = dt * np.asarray(b_of_t(grid[i]), dtype=complex).reshape(N)
    return sp.bmat(blocks, format="csr"), rhs


def encode_ode(dim: int, A_of_t, b_of_t, x_init, time_grid: Sequence[float]) -> EncodedSystem:
    """Encode ``x' = A(t) x + b(t)`` discretised by forward Euler on ``time_grid``.

    The block system is not Hermitian, so the emitted matrix is its Hermitian
    dilation; the stacked iterates occupy the second half of the solution.
    """
    x0 = np.asarray(x_init, dtype=complex).reshape(-1)
    if x0.size != dim:
        raise InputError(f"x_init has {x0.size} entries, expected {dim}")
    K, r = euler_block_system(A_of_t, b_of_t, x0, time_grid)
    size = K.shape[0]
    if 2 * size > MAX_DIM:
        raise CapacityError(f"dilated ODE system of dimension {2 * size} exceeds {MAX_DIM}")
    dilated, scale = spectrum_rescale(hermitian_dilation(K))
    rhs_top, r_norm = _unit(r)
    rhs = np.concatenate([rhs_top, np.zeros(size, dtype=complex)])
    return EncodedSystem(
        matrix=dilated, rhs=rhs, unscale=r_norm / scale, solution_slice=slice(size, 2 * size),
        kappa_report=condition_number(dilated),
        provenance={"encoder": "ode", "dim": dim, "steps": len(time_grid), "scale": scale},
        source_matrix=K, source_rhs=r)


def laplacian_1d(L: int) -> sp.csr_matrix:
    """``(1/h^2) tridiag(-1, 2, -1)`` with ``h = 1/(L+1)``."""
    h = 1.0 / (L + 1)
    main = np.full(L, 2.0)
    off = np.full(L - 1, -1.0)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h ** 2


def poisson_matrix(d: int, L: int) -> sp.csr_matrix:
    """Dirichlet finite-difference ``-laplacian`` on ``L^d`` interior points (Kronecker sum)."""
    if d not in (1, 2, 3):
        raise InputError(f"dimension must be 1, 2 or 3, got {d}")
    if L < 2:
        raise InputError(f"need at least 2 interior points per axis, got {L}")
    t = laplacian_1d(L)
    eye = sp.identity(L, format="csr")
    out = t
    for _ in range(d - 1):
        out = sp.kron(out, eye) + sp.kron(sp.identity(out.shape[0]), t)
    return sp.csr_matrix(out)


def poisson_eigenvalues(d: int, L: int) -> np.ndarray:
    """Closed form ``sum_axes (2 - 2 cos(k pi / (L+1))) / h^2``, ascending."""
    h = 1.0 / (L + 1)
    axis = (2 - 2 * np.cos(np.arange(1, L + 1) * np.pi / (L + 1))) / h ** 2
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.sort(sum(grids).reshape(-1))


def encode_poisson(d: int, L: int, Q) -> EncodedSystem:
    """Encode ``-laplacian u = Q`` on the unit box with zero Dirichlet boundary."""
    q = np.asarray(Q, dtype=float).reshape(-1)
    if q.size != L ** d:
        raise InputError(f"Q has {q.size} samples, expected L^d = {L ** d}")
    if L ** d > MAX_DIM:
        raise CapacityError(f"grid of {L ** d} points exceeds {MAX_DIM}")
    lap = poisson_matrix(d, L)
    h = 1.0 / (L + 1)
    herm = SparseHermitianMatrix.from_sparse(lap)
    scaled, scale = spectrum_rescale(herm)
    rhs, q_norm = _unit(q)
    return EncodedSystem(
        matrix=scaled, rhs=rhs, unscale=q_norm / scale, solution_slice=slice(0, L ** d),
        kappa_report=condition_number(herm),
        provenance={"encoder": "poisson", "d": d, "L": L, "h": h,
                    "gershgorin_bound": 4 * d / h ** 2, "scale": scale},
        source_matrix=lap, source_rhs=q.astype(complex))


@dataclass
class ProbeTable:
    rows: list[tuple[int, float]]
    exponent: float | None

    def to_csv(self) -> str:
        lines = ["L,kappa"] + [f"{L},{k!r}" for L, k in self.rows]
        if self.exponent is not None:
            lines.append(f"# fitted_exponent,{self.exponent!r}")
        return "\n".join(lines) + "\n"


def kappa_scaling_probe(d: int, L_list: Sequence[int]) -> ProbeTable:
    """Exact condition number per ``L`` and the least-squares log-log slope."""
    rows = []
    for L in L_list:
        if L ** d > MAX_DIM:
            raise CapacityError(f"grid of {L ** d} points exceeds {MAX_DIM}")
        lam = spectral_decompose(SparseHermitianMatrix.from_sparse(poisson_matrix(d, L))).eigenvalues
        mags = np.abs(lam)
        rows.append((int(L), float(mags.max() / mags.min())))
    exponent = None
    if len({L for L, _ in rows}) >= 2:
        logs = np.log([[L, k] for L, k in rows])
        exponent = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    return ProbeTable(rows, exponent)


def poisson_kappa_closed_form(L: int) -> float:
    """``cot^2(pi h / 2)`` for the 1D stencil."""
    h = 1.0 / (L + 1)
    return 1.0 / math.tan(math.pi * h / 2) ** 2
