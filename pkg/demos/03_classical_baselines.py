"""
Classical solvers for the same problem
======================================

"""

# Three baselines, each reading the matrix only through the row oracle so the
# number of oracle calls can be compared.
import numpy as np

from qlinsys import resources
from qlinsys.classical import (
    SampleDistribution,
    direct_solve,
    iterative_solve,
    neumann_error_bound,
    neumann_solve,
    sample_solution,
    solution_distribution,
    tv_distance,
)
from qlinsys.linalg import SparseHermitianMatrix

rng = np.random.default_rng(3)
n, kappa = 16, 8.0
q, _ = np.linalg.qr(rng.normal(size=(n, n)))
lam = np.linspace(1 / kappa, 1, n)
A = SparseHermitianMatrix.from_dense((q * lam) @ q.T)
b = rng.normal(size=n)
b /= np.linalg.norm(b)

exact = direct_solve(A, b)
for name, solver in [("neumann", lambda: neumann_solve(A, b, 1e-3)),
                     ("cg", lambda: iterative_solve(A, b, 1e-8))]:
    with resources.track() as tally:
        x, steps = solver()
    print(f"{name:8s} steps={steps:4d}  oracle calls={tally[resources.TA]:5d}  "
          f"error={np.linalg.norm(x - exact):.2e}")

# The Neumann series comes with an explicit a priori bound.
x, n_terms = neumann_solve(A, b, 0.1)
print("terms", n_terms, "error", np.linalg.norm(x - exact),
      "bound", neumann_error_bound(kappa, n_terms))

# Sampling an index with probability |x_i|^2, the classical reference for
# the sampling problem.
samples = sample_solution(A, b, shots=50_000, seed=5)
emp = SampleDistribution.from_samples(samples)
print("l1 distance to exact |x_i|^2:", round(tv_distance(emp, solution_distribution(A, b)), 4))
