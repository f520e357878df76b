"""Exact statevector simulator.

Qubit ``0`` is the most significant bit of the global amplitude index, so a
basis state ``|q0 q1 ... q_{n-1}>`` sits at index ``sum_k q_k 2^(n-1-k)``.
Registers are laid out ancilla | clock | system: the ancilla (when present)
is qubit 0, the clock register follows, and the system register occupies the
least significant qubits. A clock value ``k`` is read with its first qubit
as the most significant bit.

Operations mutate the state in place and return it, so calls chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import resources
from .errors import CapacityError, ImpossibleOutcomeError, InputError, NormalizationError
from .linalg import SpectralData

__all__ = [
    "MAX_QUBITS",
    "RegisterLayout",
    "StateVector",
    "GateOp",
    "init_state",
    "apply_gate",
    "apply_unitary",
    "apply_evolution",
    "qft",
    "qft_matrix",
    "marginal_probabilities",
    "measure_distribution",
    "sample_counts",
    "sample_indices",
    "postselect",
    "condition_on",
]

MAX_QUBITS = 24
NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
IMPOSSIBLE_TOL = 1e-14


@dataclass(frozen=True)
class RegisterLayout:
    n_system: int
    n_clock: int = 0
    n_ancilla: int = 0

    def __post_init__(self):
        if self.n_system < 0 or self.n_clock < 0:
            raise InputError("register sizes must be non-negative")
        if self.n_ancilla not in (0, 1):
            raise InputError(f"n_ancilla must be 0 or 1, got {self.n_ancilla}")
        if self.total < 1:
            raise InputError("layout has no qubits")
        if self.total > MAX_QUBITS:
            raise CapacityError(
                f"{self.total} qubits requested; the simulator holds at most {MAX_QUBITS}")

    @classmethod
    def for_dimension(cls, dim: int, n_clock: int = 0, n_ancilla: int = 0) -> "RegisterLayout":
        return cls(max(1, (int(dim) - 1).bit_length()), n_clock, n_ancilla)

    @property
    def total(self) -> int:
        return self.n_system + self.n_clock + self.n_ancilla

    @property
    def ancilla_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_ancilla))

    @property
    def clock_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_ancilla, self.n_ancilla + self.n_clock))

    @property
    def system_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_ancilla + self.n_clock, self.total))


class StateVector:
    """``2**layout.total`` complex amplitudes."""

    def __init__(self, layout: RegisterLayout, amplitudes=None):
        self.layout = layout
        size = 1 << layout.total
        if amplitudes is None:
            amplitudes = np.zeros(size, dtype=complex)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.array(amplitudes, dtype=complex).reshape(-1)
            if amplitudes.size != size:
                raise InputError(f"expected {size} amplitudes, got {amplitudes.size}")
        self.amplitudes = amplitudes

    @property
    def n_qubits(self) -> int:
        return self.layout.total

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes.copy())

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def __repr__(self):
        return f"StateVector({self.layout}, norm={self.norm():.12f})"


_S2 = 1 / np.sqrt(2)
_FIXED = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
_ARITY = {"H": 1, "X": 1, "Y": 1, "Z": 1, "S": 1, "T": 1, "CNOT": 2, "CZ": 2,
          "U1q": 1, "U2q": 2}


def _is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() <= tol


@dataclass(frozen=True)
class GateOp:
    """A one- or two-qubit gate with an optional set of control qubits.

    ``CNOT`` takes ``targets=(control, target)``: its 4x4 matrix acts on both
    qubits. Extra ``controls`` add further conditioning on top.
    """

    kind: str
    targets: tuple[int, ...]
    controls: frozenset[int] = field(default_factory=frozenset)
    unitary: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise InputError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(q) for q in self.targets)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "controls", frozenset(int(q) for q in self.controls))
        if len(targets) != _ARITY[self.kind]:
            raise InputError(f"{self.kind} acts on {_ARITY[self.kind]} qubit(s), got {targets}")
        if len(set(targets)) != len(targets):
            raise InputError(f"repeated target qubit in {targets}")
        if self.controls & set(targets):
            raise InputError(f"controls {sorted(self.controls)} overlap targets {targets}")
        if self.kind in ("U1q", "U2q"):
            if self.unitary is None:
                raise InputError(f"{self.kind} needs an explicit unitary")
            u = np.array(self.unitary, dtype=complex)
            dim = 1 << len(targets)
            if u.shape != (dim, dim):
                raise InputError(f"{self.kind} needs a {dim}x{dim} matrix, got {u.shape}")
            if not _is_unitary(u):
                raise InputError(f"{self.kind} matrix is not unitary within {UNITARY_TOL}")
            u.setflags(write=False)
            object.__setattr__(self, "unitary", u)

    @property
    def matrix(self) -> np.ndarray:
        return self.unitary if self.unitary is not None else _FIXED[self.kind]

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.controls)) + self.targets

    def dagger(self) -> "GateOp":
        if self.kind in ("H", "X", "Y", "Z", "CNOT", "CZ"):
            return self
        kind = "U1q" if len(self.targets) == 1 else "U2q"
        return GateOp(kind, self.targets, self.controls, self.matrix.conj().T)


def _apply_matrix(state: StateVector, u: np.ndarray, targets: Sequence[int],
                  controls: Iterable[int] = ()) -> StateVector:
    n = state.n_qubits
    targets = list(targets)
    controls = sorted(set(controls))
    for q in targets + controls:
        if not 0 <= q < n:
            raise InputError(f"qubit {q} outside a {n}-qubit state")
    if set(targets) & set(controls):
        raise InputError("control and target qubits overlap")
    psi = state.tensor()
    index = [slice(None)] * n
    for c in controls:
        index[c] = 1
    index = tuple(index)
    sub = psi[index]
    remaining = [q for q in range(n) if q not in controls]
    positions = [remaining.index(t) for t in targets]
    k = len(targets)
    moved = np.moveaxis(sub, positions, list(range(k)))
    shape = moved.shape
    out = (u @ moved.reshape(1 << k, -1)).reshape(shape)
    psi[index] = np.moveaxis(out, list(range(k)), positions)
    return state


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    resources.record(resources.GATES)
    return _apply_matrix(state, gate.matrix, gate.targets, gate.controls)


def apply_unitary(state: StateVector, u: np.ndarray, targets: Sequence[int],
                  controls: Iterable[int] = ()) -> StateVector:
    """Apply an arbitrary dense unitary on ``targets`` (first target = most significant)."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (1 << len(targets),) * 2:
        raise InputError(f"matrix shape {u.shape} does not match {len(targets)} target qubits")
    resources.record(resources.GATES)
    return _apply_matrix(state, u, targets, controls)


def init_state(layout: RegisterLayout, basis_index: int | None = None,
               amplitudes=None) -> StateVector:
    """Prepare the system register; clock and ancilla start in ``|0>``.

    Exactly one of ``basis_index`` (a system-register basis state) or
    ``amplitudes`` (a unit vector, zero-padded to ``2**n_system``) is given.
    Loading a vector counts one ``T_B`` call.
    """
    if (basis_index is None) == (amplitudes is None):
        raise InputError("give exactly one of basis_index or amplitudes")
    sys_dim = 1 << layout.n_system
    system = np.zeros(sys_dim, dtype=complex)
    if basis_index is not None:
        if not 0 <= basis_index < sys_dim:
            raise InputError(f"basis index {basis_index} outside the system register")
        system[basis_index] = 1.0
    else:
        b = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if b.size > sys_dim:
            raise InputError(f"{b.size} amplitudes do not fit {layout.n_system} system qubits")
        if not np.all(np.isfinite(b)):
            raise InputError("amplitudes contain NaN or Inf")
        norm = np.linalg.norm(b)
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"state vector has norm {norm!r}, expected 1")
        system[: b.size] = b
        resources.record(resources.TB)
    amps = np.zeros(1 << layout.total, dtype=complex)
    amps[:sys_dim] = system
    return StateVector(layout, amps)


def apply_evolution(state: StateVector, spec: SpectralData, t: float,
                    controls: Iterable[int] = ()) -> StateVector:
    """Apply ``exp(iAt)`` to the system register, conditioned on ``controls`` all being 1.

    Counts one ``T_A`` call: the exact spectral exponential stands in for one
    invocation of a row-oracle-driven Hamiltonian simulation.
    """
    if spec.dim != 1 << state.layout.n_system:
        raise InputError(
            f"operator dimension {spec.dim} != system register size {1 << state.layout.n_system}")
    if not np.isfinite(t):
        raise InputError("evolution time must be finite")
    resources.record(resources.TA)
    resources.record(resources.GATES)
    return _apply_matrix(state, spec.exponential(t), state.layout.system_qubits, controls)


def qft_matrix(n: int, inverse: bool = False) -> np.ndarray:
    """``omega^(jk) / sqrt(2^n)`` with ``omega = exp(+-2 pi i / 2^n)``."""
    m = 1 << n
    jk = np.outer(np.arange(m), np.arange(m)) % m
    sign = -1.0 if inverse else 1.0
    return np.exp(sign * 2j * np.pi * jk / m) / np.sqrt(m)


def qft(state: StateVector, qubits: Sequence[int] | None = None,
        inverse: bool = False) -> StateVector:
    """Quantum Fourier transform on ``qubits`` (default: the clock register).

    Gate accounting uses the textbook decomposition: ``n`` Hadamards,
    ``n(n-1)/2`` controlled phases and ``n // 2`` swaps.
    """
    if qubits is None:
        qubits = state.layout.clock_qubits
    qubits = list(qubits)
    if not qubits:
        raise InputError("QFT needs a nonempty register")
    n = len(qubits)
    resources.record(resources.GATES, n * (n + 1) // 2 + n // 2)
    return _apply_matrix(state, qft_matrix(n, inverse), qubits)


def marginal_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Exact marginal over ``qubits``; entry ``k`` reads the first listed qubit as the MSB."""
    qubits = list(qubits)
    if not qubits:
        raise InputError("need at least one qubit to measure")
    if len(set(qubits)) != len(qubits):
        raise InputError("repeated qubit in measurement")
    n = state.n_qubits
    probs = np.abs(state.tensor()) ** 2
    others = tuple(q for q in range(n) if q not in qubits)
    marg = probs.sum(axis=others) if others else probs
    kept = sorted(qubits)
    marg = np.transpose(marg, [kept.index(q) for q in qubits])
    return marg.reshape(-1)


def measure_distribution(state: StateVector, qubits: Sequence[int]) -> dict[str, float]:
    """Marginal distribution keyed by bitstring (first listed qubit first).

    Outcomes of exactly zero probability are omitted.
    """
    marg = marginal_probabilities(state, qubits)
    width = len(qubits)
    return {format(k, f"0{width}b"): float(p) for k, p in enumerate(marg) if p > 0.0}


def sample_indices(state: StateVector, qubits: Sequence[int], shots: int,
                   rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Draw ``shots`` outcomes (as integers) from the marginal over ``qubits``."""
    if shots < 0:
        raise InputError("shots must be non-negative")
    rng = np.random.default_rng(rng)
    marg = marginal_probabilities(state, qubits)
    return rng.choice(marg.size, size=shots, p=marg / marg.sum())


def sample_counts(state: StateVector, qubits: Sequence[int], shots: int,
                  rng: np.random.Generator | int | None = None) -> dict[str, int]:
    rng = np.random.default_rng(rng)
    marg = marginal_probabilities(state, qubits)
    counts = rng.multinomial(shots, marg / marg.sum())
    width = len(qubits)
    return {format(k, f"0{width}b"): int(c) for k, c in enumerate(counts) if c}


def postselect(state: StateVector, qubit: int, outcome: int) -> tuple[StateVector, float]:
    """Condition on ``qubit == outcome``; returns the renormalised state and its probability."""
    if outcome not in (0, 1):
        raise InputError(f"outcome must be 0 or 1, got {outcome}")
    out = state.copy()
    psi = out.tensor()
    index = [slice(None)] * out.n_qubits
    index[qubit] = 1 - outcome
    psi[tuple(index)] = 0.0
    prob = float(np.vdot(out.amplitudes, out.amplitudes).real)
    if prob < IMPOSSIBLE_TOL:
        raise ImpossibleOutcomeError(f"outcome {outcome} on qubit {qubit} has probability {prob:.3e}")
    out.amplitudes /= np.sqrt(prob)
    return out, min(prob, 1.0)


def condition_on(state: StateVector, fixed: dict[int, int]) -> tuple[np.ndarray, float]:
    """Unnormalised amplitudes of the remaining qubits given ``fixed`` bit values.

    Returns ``(amplitudes, probability)`` where the amplitudes are ordered
    over the unfixed qubits in their original order.
    """
    psi = state.tensor()
    index = [slice(None)] * state.n_qubits
    for q, bit in fixed.items():
        index[q] = int(bit)
    sub = np.array(psi[tuple(index)]).reshape(-1)
    return sub, float(np.vdot(sub, sub).real)
