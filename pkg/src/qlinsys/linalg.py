"""Complex sparse/dense linear-algebra substrate.

The central type is :class:`SparseHermitianMatrix`, which stores only the
upper triangle and the diagonal. The lower triangle is implied by conjugate
symmetry, so a constructed instance cannot fail to be Hermitian.

Matrix access by the solvers goes through :func:`row_oracle`, which counts
every query as one ``T_A`` call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import resources
from .errors import (
    CapacityError,
    InputError,
    KappaMismatchError,
    NotHermitianError,
    SingularMatrixError,
)

__all__ = [
    "MAX_DIM",
    "SINGULAR_RTOL",
    "SparseHermitianMatrix",
    "RectangularMatrix",
    "SpectralData",
    "row_oracle",
    "spectral_decompose",
    "condition_number",
    "hermitian_dilation",
    "spectrum_rescale",
    "pad_to_power_of_two",
]

MAX_DIM = 4096
SINGULAR_RTOL = 1e-14
KAPPA_RTOL = 0.05


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise InputError(f"{what} contains NaN or Inf")


class SparseHermitianMatrix:
    """Hermitian matrix kept as upper triangle plus diagonal.

    Parameters
    ----------
    dim : int
        Matrix dimension ``N``.
    entries : iterable of (i, j, value)
        Stored entries with ``i <= j``. Diagonal values must be real.
        Explicit zeros are dropped.
    declared_kappa : float, optional
        Known condition number. Checked against the computed value (5%
        relative tolerance) when given.
    """

    def __init__(self, dim: int, entries: Iterable[tuple[int, int, complex]] = (),
                 declared_kappa: float | None = None):
        entries = list(entries)
        if entries:
            r, c, v = zip(*entries)
        else:
            r, c, v = (), (), ()
        self._build(int(dim), np.asarray(r, dtype=np.int64), np.asarray(c, dtype=np.int64),
                    np.asarray(v, dtype=complex))
        self.declared_kappa = None
        if declared_kappa is not None:
            self._validate_declared_kappa(float(declared_kappa))
            self.declared_kappa = float(declared_kappa)

    def _build(self, dim, rows, cols, vals) -> None:
        if dim < 1:
            raise InputError(f"dimension must be positive, got {dim}")
        bad = (rows < 0) | (rows >= dim) | (cols < 0) | (cols >= dim)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise InputError(f"entry ({rows[k]}, {cols[k]}) outside a {dim}x{dim} matrix")
        below = cols < rows
        if below.any():
            k = int(np.flatnonzero(below)[0])
            raise NotHermitianError(
                f"entry ({rows[k]}, {cols[k]}) lies below the diagonal; only i <= j is stored")
        keys = rows * dim + cols
        uniq, counts = np.unique(keys, return_counts=True)
        if (counts > 1).any():
            k = int(uniq[counts > 1][0])
            raise InputError(f"duplicate entry ({k // dim}, {k % dim})")
        if not np.all(np.isfinite(vals)):
            raise InputError("matrix entries contain NaN or Inf")
        on_diag = rows == cols
        if np.any(vals[on_diag].imag != 0.0):
            k = int(rows[on_diag][np.flatnonzero(vals[on_diag].imag != 0.0)[0]])
            raise NotHermitianError(f"diagonal entry ({k}, {k}) has a nonzero imaginary part")
        keep = vals != 0
        upper = sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(dim, dim))
        upper.sort_indices()
        self._init_from_upper(upper)

    def _init_from_upper(self, upper: sp.csr_matrix) -> None:
        self.dim = upper.shape[0]
        self._upper = upper
        strict = sp.triu(upper, k=1, format="csr")
        full = (upper + strict.conj().T).tocsr()
        full.eliminate_zeros()
        full.sort_indices()
        self._full = full
        counts = np.diff(full.indptr)
        self.sparsity_s = int(counts.max()) if counts.size else 0
        self._spectral: SpectralData | None = None

    @classmethod
    def _from_upper(cls, upper, declared_kappa=None) -> "SparseHermitianMatrix":
        obj = cls.__new__(cls)
        obj._init_from_upper(sp.csr_matrix(upper))
        obj.declared_kappa = declared_kappa
        return obj

    @classmethod
    def _from_arrays(cls, dim, rows, cols, vals, declared_kappa=None):
        obj = cls.__new__(cls)
        obj._build(int(dim), np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64),
                   np.asarray(vals, dtype=complex))
        obj.declared_kappa = None
        if declared_kappa is not None:
            obj._validate_declared_kappa(float(declared_kappa))
            obj.declared_kappa = float(declared_kappa)
        return obj

    @classmethod
    def from_dense(cls, matrix, declared_kappa: float | None = None,
                   atol: float = 1e-12) -> "SparseHermitianMatrix":
        """Build from a dense array, checking Hermiticity to ``atol`` (relative to max entry)."""
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError(f"expected a square matrix, got shape {m.shape}")
        _check_finite(m, "matrix")
        scale = max(np.abs(m).max(initial=0.0), 1.0)
        if np.abs(m - m.conj().T).max(initial=0.0) > atol * scale:
            raise NotHermitianError("matrix is not Hermitian")
        n = m.shape[0]
        iu = np.triu_indices(n)
        vals = m[iu].copy()
        diag = iu[0] == iu[1]
        vals[diag] = vals[diag].real
        return cls._from_arrays(n, iu[0], iu[1], vals, declared_kappa)

    @classmethod
    def from_sparse(cls, matrix, declared_kappa: float | None = None,
                    atol: float = 1e-12) -> "SparseHermitianMatrix":
        m = sp.csr_matrix(matrix, dtype=complex)
        if m.shape[0] != m.shape[1]:
            raise InputError(f"expected a square matrix, got shape {m.shape}")
        diff = m - m.conj().T
        scale = max(abs(m).max() if m.nnz else 0.0, 1.0)
        if diff.nnz and abs(diff).max() > atol * scale:
            raise NotHermitianError("matrix is not Hermitian")
        up = sp.triu(m, format="coo")
        vals = up.data.copy()
        diag = up.row == up.col
        vals[diag] = vals[diag].real
        return cls._from_arrays(m.shape[0], up.row, up.col, vals, declared_kappa)

    @classmethod
    def identity(cls, dim: int) -> "SparseHermitianMatrix":
        return cls(dim, ((i, i, 1.0) for i in range(dim)))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "SparseHermitianMatrix":
        return cls(len(values), ((i, i, float(v)) for i, v in enumerate(values)))

    def _validate_declared_kappa(self, declared: float) -> None:
        if declared < 1.0:
            raise InputError(f"declared kappa must be >= 1, got {declared}")
        computed = condition_number(self)
        if abs(computed - declared) > KAPPA_RTOL * computed:
            raise KappaMismatchError(
                f"declared kappa {declared:g} differs from computed {computed:g} by more than 5%")

    @property
    def rows(self) -> list[list[tuple[int, complex]]]:
        """Stored (upper-triangle) entries of every row."""
        u = self._upper
        return [
            [(int(c), complex(v)) for c, v in zip(u.indices[u.indptr[i]:u.indptr[i + 1]],
                                                    u.data[u.indptr[i]:u.indptr[i + 1]])]
            for i in range(self.dim)
        ]

    @property
    def nnz_stored(self) -> int:
        return int(self._upper.nnz)

    def stored_entries(self):
        coo = self._upper.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            yield int(coo.row[k]), int(coo.col[k]), complex(coo.data[k])

    def entry(self, i: int, j: int) -> complex:
        return complex(self._full[i, j])

    def to_dense(self) -> np.ndarray:
        return self._full.toarray()

    def to_csr(self) -> sp.csr_matrix:
        return self._full.copy()

    def scaled(self, factor: float) -> "SparseHermitianMatrix":
        """Return ``self * factor`` for a real ``factor``; declared kappa carries over."""
        return SparseHermitianMatrix._from_upper(self._upper * float(factor), self.declared_kappa)

    def __eq__(self, other):
        if not isinstance(other, SparseHermitianMatrix) or other.dim != self.dim:
            return NotImplemented
        return (self._full != other._full).nnz == 0

    __hash__ = None

    def __repr__(self):
        return f"SparseHermitianMatrix(dim={self.dim}, nnz={self._full.nnz}, s={self.sparsity_s})"


@dataclass(frozen=True)
class RectangularMatrix:
    """Dense complex ``n_rows x n_cols`` matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim == 1:
            m = m.reshape(-1, 1)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise InputError(f"rectangular matrix needs shape (>=1, >=1), got {m.shape}")
        _check_finite(m, "matrix")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class SpectralData:
    """Eigen-decomposition sorted by descending ``|eigenvalue|``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def function(self, f) -> np.ndarray:
        """Dense ``f(A) = V f(Lambda) V^dagger``."""
        v = self.eigenvectors
        return (v * f(self.eigenvalues)) @ v.conj().T

    def exponential(self, t: float) -> np.ndarray:
        return self.function(lambda lam: np.exp(1j * lam * t))


def row_oracle(A, i: int) -> list[tuple[int, complex]]:
    """Nonzero entries of row ``i`` as ascending ``(column, value)`` pairs.

    Works for :class:`SparseHermitianMatrix` (lower triangle materialised by
    conjugation) and for general square scipy-sparse or dense matrices. Each
    call counts as one ``T_A`` query.
    """
    if isinstance(A, SparseHermitianMatrix):
        csr, n = A._full, A.dim
    elif sp.issparse(A):
        csr, n = A.tocsr() if A.format != "csr" else A, A.shape[0]
    else:
        arr = np.asarray(A)
        n = arr.shape[0]
        if not 0 <= i < n:
            raise IndexError(f"row {i} out of range for dimension {n}")
        resources.record(resources.TA)
        cols = np.flatnonzero(arr[i])
        return [(int(c), complex(arr[i, c])) for c in cols]
    if not 0 <= i < n:
        raise IndexError(f"row {i} out of range for dimension {n}")
    resources.record(resources.TA)
    lo, hi = csr.indptr[i], csr.indptr[i + 1]
    cols = csr.indices[lo:hi]
    vals = csr.data[lo:hi]
    order = np.argsort(cols, kind="stable")
    return [(int(cols[k]), complex(vals[k])) for k in order if vals[k] != 0]


def spectral_decompose(A: SparseHermitianMatrix, max_dim: int = MAX_DIM) -> SpectralData:
    """Dense Hermitian eigensolve of ``A`` (cached on the instance)."""
    if A.dim > max_dim:
        raise CapacityError(f"dimension {A.dim} exceeds the eigensolver cap {max_dim}")
    if A._spectral is not None:
        return A._spectral
    w, v = np.linalg.eigh(A.to_dense())
    # descending |lambda|, ties broken by descending lambda
    order = np.lexsort((-w, -np.abs(w)))
    w = np.ascontiguousarray(w[order])
    v = np.ascontiguousarray(v[:, order])
    w.setflags(write=False)
    v.setflags(write=False)
    A._spectral = SpectralData(w, v)
    return A._spectral


def _abs_extremes(A: SparseHermitianMatrix) -> tuple[float, float]:
    lam = np.abs(spectral_decompose(A).eigenvalues)
    return float(lam.max()), float(lam.min())


def condition_number(A: SparseHermitianMatrix) -> float:
    """``max|lambda| / min|lambda|``; raises on a numerically singular matrix."""
    hi, lo = _abs_extremes(A)
    if hi == 0.0 or lo <= SINGULAR_RTOL * hi:
        raise SingularMatrixError(f"matrix is singular (min |lambda| = {lo:.3e}, max = {hi:.3e})")
    return hi / lo


def hermitian_dilation(M) -> SparseHermitianMatrix:
    """``[[0, M], [M^dagger, 0]]``; its spectrum is ``{+-sigma_k}`` padded with zeros.

    ``M`` may be a :class:`RectangularMatrix`, a dense array or a scipy
    sparse matrix; sparse input is never densified.
    """
    if isinstance(M, RectangularMatrix):
        M = M.entries
    if sp.issparse(M):
        coo = sp.coo_matrix(M, dtype=complex)
    else:
        coo = sp.coo_matrix(RectangularMatrix(M).entries)
    coo.sum_duplicates()
    n, p = coo.shape
    return SparseHermitianMatrix._from_arrays(n + p, coo.row, coo.col + n, coo.data)


def spectrum_rescale(A: SparseHermitianMatrix, allow_singular: bool = False
                     ) -> tuple[SparseHermitianMatrix, float]:
    """Divide ``A`` by its spectral radius.

    Returns ``(A / scale, scale)``. With ``allow_singular`` the matrix may
    have zero eigenvalues (as Hermitian dilations of tall matrices do), but
    it may not be the zero matrix.
    """
    hi, lo = _abs_extremes(A)
    if hi == 0.0 or (not allow_singular and lo <= SINGULAR_RTOL * hi):
        raise SingularMatrixError("cannot rescale a singular matrix")
    scaled = A.scaled(1.0 / hi)
    base = spectral_decompose(A)
    # reuse the eigenvectors: rescaling changes eigenvalues only
    lam = np.asarray(base.eigenvalues / hi)
    lam.setflags(write=False)
    scaled._spectral = SpectralData(lam, base.eigenvectors)
    return scaled, hi


def pad_to_power_of_two(A: SparseHermitianMatrix, fill: float = 1.0) -> SparseHermitianMatrix:
    """Extend ``A`` to the next power-of-two dimension with ``fill`` on the new diagonal."""
    n = A.dim
    target = 1 << max(0, (n - 1).bit_length())
    if target == n:
        return A
    upper = sp.block_diag([A._upper, sp.identity(target - n, dtype=complex) * fill], format="csr")
    out = SparseHermitianMatrix._from_upper(upper, A.declared_kappa)
    if A._spectral is not None:
        base = A._spectral
        vecs = np.zeros((target, target), dtype=complex)
        vecs[:n, :n] = base.eigenvectors
        vecs[n:, n:] = np.eye(target - n)
        lam = np.concatenate([base.eigenvalues, np.full(target - n, fill)])
        order = np.lexsort((-lam, -np.abs(lam)))
        lam, vecs = lam[order], vecs[:, order]
        lam.setflags(write=False)
        vecs.setflags(write=False)
        out._spectral = SpectralData(lam, vecs)
    return out


def n_qubits_for(dim: int) -> int:
    return max(0, (int(dim) - 1).bit_length())
