"""Desk-scale quantum linear-systems laboratory.

HHL on an exact statevector simulator, the circuit-to-linear-system
hardness reduction, classical baseline solvers and application encoders,
each checkable against a classical oracle.
"""

__version__ = "0.1.0"

from .classical import (
    SampleDistribution,
    direct_solve,
    fidelity,
    iterative_solve,
    neumann_solve,
    sample_solution,
    tv_distance,
)
from .encoders import (
    EncodedSystem,
    encode_least_squares,
    encode_ode,
    encode_poisson,
    kappa_scaling_probe,
)
from .hhl import HHLParams, SolveReport, choose_params, decode_eigenvalue, estimate_norm_sampled, hhl_solve
from .linalg import (
    RectangularMatrix,
    SparseHermitianMatrix,
    SpectralData,
    condition_number,
    hermitian_dilation,
    row_oracle,
    spectral_decompose,
    spectrum_rescale,
)
from .reduction import (
    ClockSystemMeta,
    QuantumCircuitDescription,
    build_clock_system,
    decode_clock_sample,
    reference_circuit_distribution,
    run_reduction,
    solve_clock_system,
)
from .statevector import GateOp, RegisterLayout, StateVector
