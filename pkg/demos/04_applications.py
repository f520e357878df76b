"""
Least squares, ODEs and the Poisson equation
============================================

"""

# Each encoder produces a Hermitian, rescaled system that HHL can consume,
# together with the information needed to map a solution back.
import numpy as np

from qlinsys.classical import fidelity
from qlinsys.encoders import encode_least_squares, encode_ode, encode_poisson, kappa_scaling_probe
from qlinsys.hhl import choose_params, hhl_solve
from qlinsys.linalg import n_qubits_for


def via_hhl(enc, eps=0.05):
    p = choose_params(enc.kappa_report, eps, n_qubits_for(enc.matrix.dim))
    r = hhl_solve(enc.matrix, enc.rhs, p)
    part = r.solution[enc.solution_slice]
    ref = enc.solve_classical()
    return fidelity(part / np.linalg.norm(part), ref / np.linalg.norm(ref))


# Least squares: fit a line through four noisy points.
t = np.array([0.0, 1.0, 2.0, 3.0])
M = np.column_stack([np.ones_like(t), t])
y = 0.5 + 2.0 * t + np.array([0.1, -0.05, 0.02, -0.08])
enc = encode_least_squares(M, y)
print("least squares fit     ", np.round(enc.solve_classical().real, 4))
print("HHL fidelity          ", round(via_hhl(enc), 6))

# ODE: x' = -x with forward Euler, all time steps solved as one linear system.
grid = np.linspace(0.0, 1.0, 4)
enc = encode_ode(1, lambda s: -np.eye(1), lambda s: np.zeros(1), [1.0], grid)
print("Euler iterates        ", np.round(enc.solve_classical().real, 4))
print("HHL fidelity          ", round(via_hhl(enc), 6))

# Poisson: -u'' = 1 on (0, 1) with zero boundary values.
enc = encode_poisson(1, 4, np.ones(4))
print("Poisson solution      ", np.round(enc.solve_classical().real, 4))
print("HHL fidelity          ", round(via_hhl(enc), 6))

# Refining the grid makes the stencil ill-conditioned at rate L^2, which is
# what limits any speedup for this problem without preconditioning.
table = kappa_scaling_probe(1, [4, 8, 16, 32, 64])
for L, k in table.rows:
    print(f"L={L:3d}  kappa={k:10.2f}")
print("fitted exponent", round(table.exponent, 3))
