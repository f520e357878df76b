"""Compile a quantum circuit into a sparse linear system and sample it back.

For a circuit ``U_1 ... U_T`` on ``n`` qubits the clock register takes
values ``t = 1 .. 3T``. The step unitaries are

* ``V_t = U_t`` for ``1 <= t <= T`` (run the circuit),
* ``V_t = I`` for ``T < t <= 2T`` (idle; this is the accept window),
* ``V_t = U_{3T+1-t}^dagger`` for ``2T < t <= 3T`` (run it backwards),

and ``U_clk = sum_t |t mod 3T + 1><t| (x) V_t``. The system is
``(I - e^{-1/T} U_clk) x = |1>|0^n>``. Its solution is a geometric series
over clock steps, so conditioning on a clock value inside the accept window
leaves the system register in the circuit's output state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .classical import SampleDistribution, direct_solve, solution_distribution, tv_distance
from .errors import CapacityError, DecodeFailureError, InputError
from .hhl import choose_params, hhl_solve
from .linalg import MAX_DIM, hermitian_dilation, n_qubits_for
from .statevector import (
    GateOp,
    RegisterLayout,
    StateVector,
    _apply_matrix,
    apply_gate,
    marginal_probabilities,
)

__all__ = [
    "QuantumCircuitDescription",
    "ClockSystemMeta",
    "ReductionReport",
    "build_clock_system",
    "solve_clock_system",
    "decode_clock_sample",
    "reference_circuit_distribution",
    "run_reduction",
    "kappa_bound",
]

_MIN_ACCEPT_RATE = 0.05
_MIN_RAW_FOR_CHECK = 10_000


@dataclass(frozen=True)
class QuantumCircuitDescription:
    n_qubits: int
    gates: tuple[GateOp, ...]

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if self.n_qubits < 1:
            raise InputError("circuit needs at least one qubit")
        if not gates:
            raise InputError("circuit needs at least one gate")
        for g in gates:
            if g.controls:
                raise InputError("circuit gates must be plain one- or two-qubit unitaries")
            if max(g.targets) >= self.n_qubits:
                raise InputError(f"gate {g.kind} on {g.targets} exceeds {self.n_qubits} qubits")

    @property
    def T(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class ClockSystemMeta:
    T: int
    n_qubits: int

    @property
    def clock_periods(self) -> int:
        return 3 * self.T

    @property
    def dim(self) -> int:
        return 3 * self.T * (1 << self.n_qubits)

    @property
    def decay(self) -> float:
        return math.exp(-1.0 / self.T)

    @property
    def accept_window(self) -> tuple[int, int]:
        """Inclusive clock range ``(T + 1, 2T)``."""
        return self.T + 1, 2 * self.T

    def index(self, t: int, system: int) -> int:
        return (t - 1) * (1 << self.n_qubits) + system

    def split(self, i: int) -> tuple[int, int]:
        t, system = divmod(int(i), 1 << self.n_qubits)
        return t + 1, system


def kappa_bound(T: int) -> float:
    d = math.exp(-1.0 / T)
    return (1 + d) / (1 - d)


def gate_matrix(gate: GateOp, n_qubits: int) -> sp.csr_matrix:
    """Sparse ``2^n x 2^n`` matrix of ``gate`` acting inside ``n_qubits``."""
    dim = 1 << n_qubits
    # columns of the identity, pushed through the gate as a batch axis
    batch = StateVector(RegisterLayout(n_qubits), np.zeros(dim, dtype=complex))
    cols = np.eye(dim, dtype=complex)
    out = np.empty_like(cols)
    for c in range(dim):
        batch.amplitudes = cols[:, c].copy()
        _apply_matrix(batch, gate.matrix, gate.targets, gate.controls)
        out[:, c] = batch.amplitudes
    out[np.abs(out) < 1e-15] = 0.0
    return sp.csr_matrix(out)


def _step_unitaries(circuit: QuantumCircuitDescription) -> list[sp.csr_matrix]:
    n, T = circuit.n_qubits, circuit.T
    forward = [gate_matrix(g, n) for g in circuit.gates]
    ident = sp.identity(1 << n, dtype=complex, format="csr")
    steps = []
    for t in range(1, 3 * T + 1):
        if t <= T:
            steps.append(forward[t - 1])
        elif t <= 2 * T:
            steps.append(ident)
        else:
            steps.append(forward[3 * T - t].conj().T.tocsr())
    return steps


def clock_shift(circuit: QuantumCircuitDescription) -> sp.csr_matrix:
    """``U_clk`` as a sparse unitary on clock (x) system."""
    meta = ClockSystemMeta(circuit.T, circuit.n_qubits)
    periods = meta.clock_periods
    blocks = [[None] * periods for _ in range(periods)]
    for t, v in enumerate(_step_unitaries(circuit), start=1):
        blocks[t % periods][t - 1] = v
    return sp.bmat(blocks, format="csr", dtype=complex)


def build_clock_system(circuit: QuantumCircuitDescription, max_dim: int = MAX_DIM
                       ) -> tuple[sp.csr_matrix, np.ndarray, ClockSystemMeta]:
    """Return ``(A, b, meta)`` with ``A = I - e^{-1/T} U_clk`` and ``b = |t=1>|0^n>``."""
    meta = ClockSystemMeta(circuit.T, circuit.n_qubits)
    if meta.dim > max_dim:
        raise CapacityError(f"clock system dimension {meta.dim} exceeds the cap {max_dim}")
    u = clock_shift(circuit)
    A = (sp.identity(meta.dim, dtype=complex, format="csr") - meta.decay * u).tocsr()
    A.eliminate_zeros()
    A.sort_indices()
    b = np.zeros(meta.dim, dtype=complex)
    b[meta.index(1, 0)] = 1.0
    return A, b, meta


def solve_clock_system(A, b, meta: ClockSystemMeta) -> np.ndarray:
    """Normalised solution ``A^-1 b / ||A^-1 b||``."""
    x = direct_solve(A, b)
    return x / np.linalg.norm(x)


def decode_clock_sample(i: int, meta: ClockSystemMeta) -> int | None:
    """First-qubit bit for a sample inside the accept window, ``None`` otherwise."""
    if not 0 <= i < meta.dim:
        raise InputError(f"sample index {i} outside [0, {meta.dim})")
    t, system = meta.split(i)
    lo, hi = meta.accept_window
    if lo <= t <= hi:
        return system >> (meta.n_qubits - 1)
    return None


def run_circuit(circuit: QuantumCircuitDescription) -> StateVector:
    state = StateVector(RegisterLayout(circuit.n_qubits))
    for g in circuit.gates:
        apply_gate(state, g)
    return state


def reference_circuit_distribution(circuit: QuantumCircuitDescription) -> SampleDistribution:
    """Exact distribution of the first qubit after running the circuit on ``|0^n>``."""
    if circuit.n_qubits > 12:
        raise CapacityError("reference simulation is limited to 12 qubits")
    probs = marginal_probabilities(run_circuit(circuit), [0])
    return SampleDistribution({0: probs[0], 1: probs[1]})


def clock_system_kappa(A) -> float:
    s = scipy.linalg.svdvals(A.toarray() if sp.issparse(A) else np.asarray(A))
    return float(s.max() / s.min())


@dataclass
class ReductionReport:
    backend: str
    shots: int
    raw_samples: int
    accept_rate: float
    decoded: dict[int, float]
    reference: dict[int, float]
    tv_distance: float
    kappa: float
    dim: int
    T: int
    n_qubits: int
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "backend": self.backend,
            "shots": self.shots,
            "raw_samples": self.raw_samples,
            "accept_rate": self.accept_rate,
            "decoded": {str(k): v for k, v in sorted(self.decoded.items())},
            "reference": {str(k): v for k, v in sorted(self.reference.items())},
            "tv_distance": self.tv_distance,
            "kappa": self.kappa,
            "kappa_bound": kappa_bound(self.T),
            "dim": self.dim,
            "T": self.T,
            "n_qubits": self.n_qubits,
            **self.extra,
        }


def _rejection_sample(probs: np.ndarray, table: np.ndarray, shots: int,
                      rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Draw raw indices until ``shots`` decode to a bit; ``table[i]`` is -1 for a reject."""
    probs = probs / probs.sum()
    accepted: list[np.ndarray] = []
    n_accepted = raw = 0
    batch = max(shots, 1000)
    while n_accepted < shots:
        bits = table[rng.choice(probs.size, size=batch, p=probs)]
        hits = np.flatnonzero(bits >= 0)
        need = shots - n_accepted
        if hits.size >= need:
            raw += int(hits[need - 1]) + 1
            accepted.append(bits[hits[:need]])
            n_accepted = shots
        else:
            raw += batch
            accepted.append(bits[hits])
            n_accepted += hits.size
        if raw >= _MIN_RAW_FOR_CHECK and n_accepted / raw < _MIN_ACCEPT_RATE:
            raise DecodeFailureError(
                f"accept rate {n_accepted / raw:.4f} after {raw} raw samples is below "
                f"{_MIN_ACCEPT_RATE}")
    return np.concatenate(accepted), raw


def _decode_table(meta: ClockSystemMeta, size: int, offset: int = 0) -> np.ndarray:
    table = np.full(size, -1, dtype=np.int64)
    for i in range(meta.dim):
        bit = decode_clock_sample(i, meta)
        if bit is not None:
            table[offset + i] = bit
    return table


def run_reduction(circuit: QuantumCircuitDescription, epsilon: float = 0.05,
                  backend: str = "classical", shots: int = 10_000,
                  seed: int | None = None) -> ReductionReport:
    """Sample the clock system, decode accepted samples and compare to the circuit.

    ``backend`` is ``"classical"`` (exact ``|x_i|^2`` from a direct solve) or
    ``"quantum-hhl"`` (HHL on the Hermitian dilation of ``A`` with right-hand
    side ``(b, 0)``; the solution lives in the second half of the output).
    """
    if shots < 1:
        raise InputError("shots must be >= 1")
    A, b, meta = build_clock_system(circuit)
    rng = np.random.default_rng(seed)
    extra: dict = {}
    if backend == "classical":
        dist = solution_distribution(A, b)
        probs = np.array([dist[i] for i in range(meta.dim)])
        kappa = clock_system_kappa(A)
        table = _decode_table(meta, meta.dim)
    elif backend == "quantum-hhl":
        H = hermitian_dilation(A)
        kappa = clock_system_kappa(A)
        n_sys = n_qubits_for(H.dim)
        params = choose_params(kappa, epsilon, n_sys)
        rhs = np.concatenate([b, np.zeros(meta.dim, dtype=complex)])
        report = hhl_solve(H, rhs, params)
        probs = np.abs(report.output_state.amplitudes) ** 2
        extra = {"hhl_success_probability": report.success_probability,
                 "hhl_clock_bits": params.n_clock,
                 "resources": dict(sorted(report.resources.items()))}
        # the solution sits in the second half of the dilated vector
        table = _decode_table(meta, probs.size, offset=meta.dim)
    else:
        raise InputError(f"unknown backend {backend!r}")

    bits, raw = _rejection_sample(probs, table, shots, rng)
    ones = int(bits.sum())
    decoded = {0: (shots - ones) / shots, 1: ones / shots}
    reference = dict(reference_circuit_distribution(circuit))
    return ReductionReport(
        backend=backend, shots=shots, raw_samples=raw, accept_rate=shots / raw,
        decoded=decoded, reference=reference, tv_distance=tv_distance(decoded, reference),
        kappa=kappa, dim=meta.dim, T=meta.T, n_qubits=meta.n_qubits, extra=extra)

