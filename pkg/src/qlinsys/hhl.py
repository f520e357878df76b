"""HHL pipeline on the exact statevector simulator.

The circuit is the standard one: load ``|b>``, phase-estimate ``exp(iA t0)``
into a clock register, rotate an ancilla by ``C / lambda``, undo the phase
estimation and keep the ancilla-1 branch. The matrix is first divided by
its spectral radius so every eigenvalue lies in ``[-1, 1]``; the returned
norm estimate is expressed for the caller's original matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import resources
from .errors import (
    BandViolationError,
    CapacityError,
    DegeneratePostselectionError,
    InputError,
)
from .linalg import (
    SINGULAR_RTOL,
    SparseHermitianMatrix,
    pad_to_power_of_two,
    spectral_decompose,
    spectrum_rescale,
)
from .statevector import (
    MAX_QUBITS,
    GateOp,
    RegisterLayout,
    StateVector,
    apply_evolution,
    apply_gate,
    condition_on,
    init_state,
    qft,
)

__all__ = [
    "HHLParams",
    "SolveReport",
    "NormEstimate",
    "choose_params",
    "decode_eigenvalue",
    "hhl_solve",
    "estimate_norm_sampled",
    "prepare_state",
]

_PARAM_TOL = 1e-12
_MIN_SUCCESS = 1e-12
# relative slack on the eigenvalue band check, absorbs rescaling round-off
_BAND_RTOL = 1e-9


@dataclass(frozen=True)
class HHLParams:
    n_clock: int
    t0: float
    C: float
    kappa: float
    epsilon: float

    def __post_init__(self):
        if self.n_clock < 1:
            raise InputError(f"need at least one clock bit, got {self.n_clock}")
        if self.kappa < 1.0:
            raise InputError(f"kappa must be >= 1, got {self.kappa}")
        if not 0.0 < self.epsilon < 1.0:
            raise InputError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.C <= (1.0 / self.kappa) * (1 + _PARAM_TOL):
            raise InputError(f"rotation constant C={self.C} must lie in (0, 1/kappa]")
        # |lambda| t0 / 2pi <= 1/4 for |lambda| <= 1
        if not 0.0 < self.t0 <= (math.pi / 2) * (1 + _PARAM_TOL):
            raise InputError(f"t0={self.t0} must lie in (0, pi/2]")


def choose_params(kappa: float, epsilon: float, n_system: int = 0) -> HHLParams:
    """Default schedule: ``n_clock = ceil(log2(kappa/eps)) + 2``, ``t0 = pi/2``, ``C = 1/kappa``.

    ``n_system`` is only used for the qubit-capacity check (system + clock +
    one ancilla must fit the simulator).
    """
    if kappa < 1.0:
        raise InputError(f"kappa must be >= 1, got {kappa}")
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    ratio = math.log2(kappa / epsilon)
    # guard against log2 of an exact power of two landing a hair above an integer
    n_clock = math.ceil(ratio - 1e-12) + 2
    total = n_system + n_clock + 1
    if total > MAX_QUBITS:
        raise CapacityError(
            f"kappa={kappa:g}, epsilon={epsilon:g} needs {n_clock} clock bits; "
            f"{total} qubits exceed the cap of {MAX_QUBITS}")
    return HHLParams(n_clock=n_clock, t0=math.pi / 2, C=1.0 / kappa, kappa=float(kappa),
                     epsilon=float(epsilon))


def decode_eigenvalue(k: int, n_clock: int, t0: float) -> float:
    """Signed eigenvalue estimate for clock reading ``k`` (two's-complement sign)."""
    m = 1 << n_clock
    if not 0 <= k < m:
        raise InputError(f"clock value {k} outside [0, {m})")
    ks = k if k < m // 2 else k - m
    return 2 * math.pi * ks / (m * t0)


def _rotation_amplitudes(params: HHLParams) -> np.ndarray:
    """``C / lambda_tilde`` per clock value, clipped to [-1, 1]; zero for ``k = 0``."""
    m = 1 << params.n_clock
    lam = np.array([decode_eigenvalue(k, params.n_clock, params.t0) for k in range(m)])
    amp = np.zeros(m)
    nz = lam != 0.0
    amp[nz] = np.clip(params.C / lam[nz], -1.0, 1.0)
    return amp


@dataclass
class SolveReport:
    output_state: StateVector
    success_probability: float
    norm_estimate: float
    solution: np.ndarray
    scale: float
    params: HHLParams
    clock_zero_probability: float
    fidelity_vs_oracle: float | None = None
    resources: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "success_probability": self.success_probability,
            "norm_estimate": self.norm_estimate,
            "clock_zero_probability": self.clock_zero_probability,
            "fidelity_vs_oracle": self.fidelity_vs_oracle,
            "scale": self.scale,
            "solution": [[float(z.real), float(z.imag)] for z in self.solution],
            "params": {"n_clock": self.params.n_clock, "t0": self.params.t0, "C": self.params.C,
                       "kappa": self.params.kappa, "epsilon": self.params.epsilon},
            "resources": dict(sorted(self.resources.items())),
        }


@dataclass
class PreparedState:
    """Full register state just before the ancilla is measured."""

    state: StateVector
    dim: int
    scale: float
    params: HHLParams


def _check_band(eigenvalues: np.ndarray, kappa: float) -> None:
    mag = np.abs(eigenvalues)
    # exact zeros are allowed: the k = 0 branch is filtered out by postselection
    nonzero = mag > SINGULAR_RTOL * mag.max()
    low = mag[nonzero].min() if nonzero.any() else 0.0
    if low < (1.0 / kappa) * (1 - _BAND_RTOL):
        raise BandViolationError(
            f"eigenvalue magnitude {low:.6g} (after rescaling) is below 1/kappa = {1 / kappa:.6g}")


def _phase_estimation(state: StateVector, spec, params: HHLParams, inverse: bool) -> None:
    clock = state.layout.clock_qubits
    n = len(clock)
    hadamards = [GateOp("H", (q,)) for q in clock]
    # clock qubit c carries weight 2^(n-1-c)
    ladder = [(q, params.t0 * (1 << (n - 1 - c))) for c, q in enumerate(clock)]
    if not inverse:
        for g in hadamards:
            apply_gate(state, g)
        for q, t in ladder:
            apply_evolution(state, spec, t, controls=(q,))
        qft(state, clock, inverse=True)
    else:
        qft(state, clock, inverse=False)
        for q, t in reversed(ladder):
            apply_evolution(state, spec, -t, controls=(q,))
        for g in reversed(hadamards):
            apply_gate(state, g)


def _conditional_rotation(state: StateVector, params: HHLParams) -> None:
    """Clock-controlled ancilla rotation ``|0> -> sqrt(1-a^2)|0> + a|1>``, ``a = C/lambda``."""
    a = _rotation_amplitudes(params)
    c = np.sqrt(1.0 - a ** 2)
    m = 1 << params.n_clock
    psi = state.amplitudes.reshape(2, m, -1)
    lo, hi = psi[0].copy(), psi[1].copy()
    psi[0] = c[:, None] * lo - a[:, None] * hi
    psi[1] = a[:, None] * lo + c[:, None] * hi
    resources.record(resources.GATES, int(np.count_nonzero(a)))


def prepare_state(A: SparseHermitianMatrix, b, params: HHLParams) -> PreparedState:
    b = np.asarray(b, dtype=complex).reshape(-1)
    if b.size != A.dim:
        raise InputError(f"b has {b.size} entries, matrix has dimension {A.dim}")
    scaled, scale = spectrum_rescale(A, allow_singular=True)
    _check_band(spectral_decompose(scaled).eigenvalues, params.kappa)
    padded = pad_to_power_of_two(scaled)
    spec = spectral_decompose(padded)
    layout = RegisterLayout.for_dimension(padded.dim, n_clock=params.n_clock, n_ancilla=1)
    state = init_state(layout, amplitudes=b)
    _phase_estimation(state, spec, params, inverse=False)
    _conditional_rotation(state, params)
    _phase_estimation(state, spec, params, inverse=True)
    return PreparedState(state, A.dim, scale, params)


def hhl_solve(A: SparseHermitianMatrix, b, params: HHLParams) -> SolveReport:
    """Run the full pipeline and return the post-selected solution state.

    ``success_probability`` is the exact probability of the ancilla reading 1.
    The output state is the system register after post-selecting the ancilla
    on 1 and the clock on 0 (the uncomputed value); ``clock_zero_probability``
    is the conditional probability of that clock reading.
    """
    with resources.track() as tally:
        prep = prepare_state(A, b, params)
        state = prep.state
        anc = state.layout.ancilla_qubits[0]
        _, p = condition_on(state, {anc: 1})
        if p < _MIN_SUCCESS:
            raise DegeneratePostselectionError(f"ancilla success probability {p:.3e} is negligible")
        fixed = {anc: 1, **{q: 0 for q in state.layout.clock_qubits}}
        system, p_clock = condition_on(state, fixed)
        if p_clock < _MIN_SUCCESS:
            raise DegeneratePostselectionError("no amplitude left on the uncomputed clock value")
        system = system / np.sqrt(p_clock)
    out_layout = RegisterLayout(state.layout.n_system)
    counts = tally.snapshot()
    counts["clock_bits"] = params.n_clock
    # slack keeps p = 1 - 1ulp from reporting two repetitions
    counts["expected_repetitions"] = math.ceil(1.0 / p - 1e-9)
    counts["amplified_repetitions"] = math.ceil(1.0 / math.sqrt(p) - 1e-9)
    return SolveReport(
        output_state=StateVector(out_layout, system),
        success_probability=min(p, 1.0),
        norm_estimate=math.sqrt(p) / params.C / prep.scale,
        solution=system[: prep.dim].copy(),
        scale=prep.scale,
        params=params,
        clock_zero_probability=min(p_clock / p, 1.0),
        resources=counts,
    )


@dataclass(frozen=True)
class NormEstimate:
    estimate: float
    standard_error: float
    successes: int
    shots: int
    reliable: bool

    def __iter__(self):
        return iter((self.estimate, self.standard_error))


def estimate_norm_sampled(A: SparseHermitianMatrix, b, params: HHLParams, shots: int,
                          seed: int | None = None) -> NormEstimate:
    """Estimate ``||A^-1 b||`` from ``shots`` simulated ancilla measurements.

    Unpacks as ``(estimate, standard_error)``. With zero successes the
    estimate is 0 and ``reliable`` is False.
    """
    if shots < 1:
        raise InputError("shots must be >= 1")
    prep = prepare_state(A, b, params)
    anc = prep.state.layout.ancilla_qubits[0]
    _, p = condition_on(prep.state, {anc: 1})
    rng = np.random.default_rng(seed)
    hits = int(rng.binomial(shots, min(max(p, 0.0), 1.0)))
    factor = 1.0 / (params.C * prep.scale)
    if hits == 0:
        return NormEstimate(0.0, float("inf"), 0, shots, False)
    p_hat = hits / shots
    se_p = math.sqrt(p_hat * (1 - p_hat) / shots)
    return NormEstimate(math.sqrt(p_hat) * factor, se_p / (2 * math.sqrt(p_hat)) * factor,
                        hits, shots, True)
