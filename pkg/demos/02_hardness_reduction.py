"""
From a circuit to a linear system and back
==========================================

"""

# A circuit on n qubits with T gates becomes a sparse system of size 3T * 2^n.
# Its solution, restricted to the middle third of the clock, holds the
# circuit's output state.
import numpy as np

from qlinsys.reduction import (
    QuantumCircuitDescription,
    build_clock_system,
    clock_system_kappa,
    kappa_bound,
    run_reduction,
    solve_clock_system,
)
from qlinsys.statevector import GateOp

bell = QuantumCircuitDescription(2, (GateOp("H", (0,)), GateOp("CNOT", (0, 1))))
A, b, meta = build_clock_system(bell)
print("dimension", meta.dim, "clock periods", meta.clock_periods, "decay", round(meta.decay, 4))
print("nonzeros per row", np.diff(A.indptr).max())

# The solution conditioned on one accept-window clock value is the Bell state.
x = solve_clock_system(A, b, meta)
t = meta.accept_window[0]
block = x[meta.index(t, 0): meta.index(t, 0) + 4]
print("state at t =", t, np.round(block / np.linalg.norm(block), 6))

# Sampling the solution and discarding samples outside the window reproduces
# the first-qubit statistics of the circuit.
report = run_reduction(bell, backend="classical", shots=10_000, seed=7)
print("decoded  ", report.decoded)
print("reference", report.reference)
print("l1 distance", round(report.tv_distance, 4), "accept rate", round(report.accept_rate, 3))

# The condition number grows linearly with the gate count.
for T in range(1, 6):
    circ = QuantumCircuitDescription(1, tuple(GateOp("H", (0,)) for _ in range(T)))
    k = clock_system_kappa(build_clock_system(circ)[0])
    print(f"T={T}  kappa={k:7.4f}  bound={kappa_bound(T):7.4f}")

# The same round trip on the quantum path: HHL on the Hermitian dilation.
ident = QuantumCircuitDescription(1, (GateOp("U1q", (0,), unitary=np.eye(2)),))
q = run_reduction(ident, backend="quantum-hhl", shots=2_000, seed=1)
print("identity circuit via HHL:", q.decoded, "clock bits", q.extra["hhl_clock_bits"])
