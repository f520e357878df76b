"""Text file formats.

``hcoo v1``: Hermitian matrix, upper triangle and diagonal only::

    hcoo v1
    N nnz
    i j re im        (nnz lines, 0-indexed, i <= j)

``coo v1``: general rectangular matrix::

    coo v1
    n_rows n_cols nnz
    i j re im

``qcirc v1``: quantum circuit::

    qcirc v1
    n T
    H q | X q | Y q | Z q | S q | T q | CNOT qc qt | CZ q1 q2
    U1 q <4 complex entries> | U2 q1 q2 <16 complex entries>

Complex entries in ``U1``/``U2`` lines are written as ``re im`` pairs in
row-major order.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import FormatError, InputError
from .linalg import SparseHermitianMatrix
from .reduction import QuantumCircuitDescription
from .statevector import GateOp

__all__ = [
    "read_hcoo", "write_hcoo", "read_coo", "write_coo", "read_qcirc", "write_qcirc",
    "read_vector", "parse_vector",
]


def _text(source) -> str:
    """File contents for a path, or the argument itself when it is multi-line text."""
    if isinstance(source, os.PathLike):
        return Path(source).read_text()
    source = str(source)
    if "\n" in source:
        return source
    try:
        return Path(source).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {source!r}: {exc.strerror}") from None


def _lines(text: str) -> list[tuple[int, str]]:
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


def _ints(tokens, line, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"expected integers for {what}, got {' '.join(tokens)!r}", line) from None


def _floats(tokens, line):
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise FormatError(f"expected numbers, got {' '.join(tokens)!r}", line) from None
    if not np.all(np.isfinite(vals)):
        raise FormatError("non-finite value", line)
    return vals


def _header(lines, magic):
    if not lines or lines[0][1].split() != magic.split():
        got = lines[0][1] if lines else "<empty>"
        raise FormatError(f"expected header {magic!r}, got {got!r}", lines[0][0] if lines else 1)


def _entries(lines, nnz, n_rows, n_cols, upper_only):
    body = lines[2:]
    if len(body) != nnz:
        raise FormatError(f"header declares {nnz} entries, found {len(body)}",
                          body[-1][0] if body else lines[1][0])
    rows, cols, vals, seen = [], [], [], set()
    for no, line in body:
        tok = line.split()
        if len(tok) != 4:
            raise FormatError("entry lines need 'i j re im'", no)
        i, j = _ints(tok[:2], no, "indices")
        re, im = _floats(tok[2:], no)
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise FormatError(f"index ({i}, {j}) out of range", no)
        if upper_only and j < i:
            raise FormatError(f"entry ({i}, {j}) is below the diagonal; only i <= j may be stored", no)
        if upper_only and i == j and im != 0.0:
            raise FormatError(f"diagonal entry ({i}, {i}) must be real", no)
        if (i, j) in seen:
            raise FormatError(f"duplicate entry ({i}, {j})", no)
        seen.add((i, j))
        rows.append(i)
        cols.append(j)
        vals.append(complex(re, im))
    return rows, cols, vals


def _complex_pair(z) -> str:
    # repr of a Python float round-trips exactly; numpy scalars would print their type
    z = complex(z)
    return f"{z.real!r} {z.imag!r}"


def _entry_line(i, j, v) -> str:
    return f"{int(i)} {int(j)} {_complex_pair(v)}"


def read_hcoo(source, declared_kappa: float | None = None) -> SparseHermitianMatrix:
    """Parse ``hcoo v1`` from a path or from the text itself."""
    lines = _lines(_text(source))
    _header(lines, "hcoo v1")
    if len(lines) < 2:
        raise FormatError("missing 'N nnz' line", 2)
    no, line = lines[1]
    tok = line.split()
    if len(tok) != 2:
        raise FormatError("size line must be 'N nnz'", no)
    n, nnz = _ints(tok, no, "size")
    if n < 1 or nnz < 0:
        raise FormatError("N must be positive and nnz non-negative", no)
    rows, cols, vals = _entries(lines, nnz, n, n, upper_only=True)
    return SparseHermitianMatrix(n, zip(rows, cols, vals), declared_kappa=declared_kappa)


def write_hcoo(A: SparseHermitianMatrix, path=None) -> str:
    entries = list(A.stored_entries())
    out = ["hcoo v1", f"{A.dim} {len(entries)}"]
    out += [_entry_line(i, j, v) for i, j, v in entries]
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_coo(source) -> np.ndarray:
    """Parse ``coo v1`` into a dense complex array."""
    lines = _lines(_text(source))
    _header(lines, "coo v1")
    if len(lines) < 2:
        raise FormatError("missing 'n_rows n_cols nnz' line", 2)
    no, line = lines[1]
    tok = line.split()
    if len(tok) != 3:
        raise FormatError("size line must be 'n_rows n_cols nnz'", no)
    n_rows, n_cols, nnz = _ints(tok, no, "size")
    if n_rows < 1 or n_cols < 1 or nnz < 0:
        raise FormatError("dimensions must be positive", no)
    rows, cols, vals = _entries(lines, nnz, n_rows, n_cols, upper_only=False)
    return sp.coo_matrix((np.asarray(vals, dtype=complex), (rows, cols)),
                         shape=(n_rows, n_cols)).toarray()


def write_coo(M, path=None) -> str:
    coo = sp.coo_matrix(np.asarray(M) if not sp.issparse(M) else M)
    order = np.lexsort((coo.col, coo.row))
    out = ["coo v1", f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}"]
    for k in order:
        out.append(_entry_line(coo.row[k], coo.col[k], coo.data[k]))
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


_ONE_QUBIT = {"H", "X", "Y", "Z", "S", "T"}
_TWO_QUBIT = {"CNOT", "CZ"}


def _parse_gate(tok, no) -> GateOp:
    name = tok[0].upper()
    try:
        if name in _ONE_QUBIT:
            if len(tok) != 2:
                raise FormatError(f"{name} takes one qubit", no)
            return GateOp(name, tuple(_ints(tok[1:], no, "qubit")))
        if name in _TWO_QUBIT:
            if len(tok) != 3:
                raise FormatError(f"{name} takes two qubits", no)
            return GateOp(name, tuple(_ints(tok[1:], no, "qubits")))
        if name == "U1":
            if len(tok) != 10:
                raise FormatError("U1 takes a qubit and 4 complex entries (8 numbers)", no)
            f = _floats(tok[2:], no)
            u = np.array(f[0::2]) + 1j * np.array(f[1::2])
            return GateOp("U1q", tuple(_ints(tok[1:2], no, "qubit")), unitary=u.reshape(2, 2))
        if name == "U2":
            if len(tok) != 35:
                raise FormatError("U2 takes two qubits and 16 complex entries (32 numbers)", no)
            f = _floats(tok[3:], no)
            u = np.array(f[0::2]) + 1j * np.array(f[1::2])
            return GateOp("U2q", tuple(_ints(tok[1:3], no, "qubits")), unitary=u.reshape(4, 4))
    except FormatError:
        raise
    except InputError as exc:
        raise FormatError(str(exc), no) from None
    raise FormatError(f"unknown gate {tok[0]!r}", no)


def read_qcirc(source) -> QuantumCircuitDescription:
    lines = _lines(_text(source))
    _header(lines, "qcirc v1")
    if len(lines) < 2:
        raise FormatError("missing 'n T' line", 2)
    no, line = lines[1]
    tok = line.split()
    if len(tok) != 2:
        raise FormatError("size line must be 'n T'", no)
    n, T = _ints(tok, no, "size")
    body = lines[2:]
    if len(body) != T:
        raise FormatError(f"header declares {T} gates, found {len(body)}",
                          body[-1][0] if body else no)
    gates = []
    for gno, gline in body:
        g = _parse_gate(gline.split(), gno)
        if max(g.targets) >= n:
            raise FormatError(f"gate acts on qubit {max(g.targets)} of a {n}-qubit circuit", gno)
        gates.append(g)
    try:
        return QuantumCircuitDescription(n, tuple(gates))
    except InputError as exc:
        raise FormatError(str(exc), no) from None


def write_qcirc(circuit: QuantumCircuitDescription, path=None) -> str:
    out = ["qcirc v1", f"{circuit.n_qubits} {circuit.T}"]
    for g in circuit.gates:
        if g.kind in _ONE_QUBIT | _TWO_QUBIT:
            out.append(" ".join([g.kind, *map(str, g.targets)]))
        else:
            nums = " ".join(_complex_pair(z) for z in g.matrix.reshape(-1))
            out.append(" ".join(["U1" if g.kind == "U1q" else "U2", *map(str, g.targets), nums]))
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_vector(text: str) -> np.ndarray:
    """Whitespace- or comma-separated values; complex literals such as ``1+2j`` are accepted."""
    try:
        return np.array([complex(t) for t in text.replace(",", " ").split()], dtype=complex)
    except ValueError as exc:
        raise FormatError(f"cannot parse vector: {exc}") from None


def read_vector(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {str(path)!r}: {exc.strerror}") from None
    return parse_vector(text)
