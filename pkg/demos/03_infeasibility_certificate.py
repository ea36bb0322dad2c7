"""Detect an infeasible instance through the tau/kappa dichotomy.

The constraint Tr(X) = -tau cannot hold with X >= 0 and tau > 0, so the
homogenizing variable tau collapses while kappa stays positive, and the
driver reports that no solution exists rather than diverging.
"""

import numpy as np

from sdfeas import Params, cold_start, run
from sdfeas.embed import NoOptimalSolution
from sdfeas.problem import Lsdfp

rng = np.random.default_rng(0)
n, m = 4, 3
A = np.zeros((m, n, n))
A[0] = np.eye(n)
for i in range(1, m):
    g = rng.standard_normal((n, n))
    A[i] = (g + g.T) / 2
b = rng.standard_normal(m)
b[0] = -1.0  # forces Tr(X) = -tau: impossible on the cone

p = Lsdfp(n=n, m=m, A=A, b=b)
outcome, trace = run(p, cold_start(p, 1.0), Params())
assert isinstance(outcome, NoOptimalSolution)

print(f"terminated after {len(trace)} iterations")
print(f"tau  = {outcome.tau:.3e}  (collapsed)")
print(f"kappa = {outcome.kappa:.3e}  (stayed positive)")

# kappa > 0 comes with a dual improving ray: b.y > 0 with sum y_i A_i <= 0
pt = outcome.point
ray = np.einsum("i,ijk->jk", pt.y, p.A)
print(f"certificate: b.y = {p.b @ pt.y:.3f} > 0, "
      f"max eig(sum y_i A_i) = {np.linalg.eigvalsh(ray).max():.3e}")
