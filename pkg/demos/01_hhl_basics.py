"""
Solving a small linear system with HHL
======================================

"""

# The simulator keeps the full statevector, so every probability below is
# exact rather than estimated from shots.
import math

import numpy as np

from qlinsys import SparseHermitianMatrix, choose_params, direct_solve, hhl_solve
from qlinsys.hhl import HHLParams, estimate_norm_sampled

# A diagonal matrix whose eigenvalues 1 and 1/2 sit exactly on the clock grid
# when t0 = pi/2 and three clock bits are used.
A = SparseHermitianMatrix.diagonal([1.0, 0.5])
b = np.array([1.0, 1.0]) / math.sqrt(2)
params = HHLParams(n_clock=3, t0=math.pi / 2, C=0.5, kappa=2.0, epsilon=0.1)

report = hhl_solve(A, b, params)
print("output state       ", np.round(report.solution, 6))
print("expected (1,2)/√5  ", np.round(np.array([1, 2]) / math.sqrt(5), 6))
print("success probability", report.success_probability)   # 5/8
print("norm estimate      ", report.norm_estimate)         # sqrt(5/2)

# The resource counters mirror the cost model: oracle calls for A, for b, and gates.
print("resources          ", report.resources)

# With shots instead of exact probabilities the norm carries a standard error.
est = estimate_norm_sampled(A, b, params, shots=20_000, seed=1)
print(f"sampled norm        {est.estimate:.4f} +/- {est.standard_error:.4f}")

# A random Hermitian matrix: eigenvalues now fall between clock bins, and
# choose_params picks enough clock bits to stay within epsilon.
rng = np.random.default_rng(0)
q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
dense = (q * np.array([1.0, -0.6, 0.4, -0.25])) @ q.conj().T
A = SparseHermitianMatrix.from_dense((dense + dense.conj().T) / 2)
b = rng.normal(size=4) + 1j * rng.normal(size=4)
b /= np.linalg.norm(b)

for eps in (0.1, 0.05, 0.01):
    p = choose_params(4.0, eps, n_system=2)
    r = hhl_solve(A, b, p)
    x = direct_solve(A, b)
    fid = abs(np.vdot(r.solution, x / np.linalg.norm(x)))
    print(f"eps={eps:<5} clock bits={p.n_clock:2d}  fidelity={fid:.6f}  "
          f"norm={r.norm_estimate:.4f} vs {np.linalg.norm(x):.4f}")
