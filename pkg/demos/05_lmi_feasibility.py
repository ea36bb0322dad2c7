"""Solve a linear matrix inequality through the feasibility model.

A matrix inequality sum_j z_j B_j + B0 >= 0 converts to a feasibility
instance whose constraint matrices span the orthogonal complement of
the coefficient span; any feasible X maps back to LMI variables z by
least squares.
"""

import numpy as np

from sdfeas import Params, centered_start, find_dual_interior, from_lmi, run
from sdfeas.embed import Solved
from sdfeas.problem import Lmi
from sdfeas.symcore import min_eigenvalue

rng = np.random.default_rng(7)
n, l = 4, 2
coeffs = np.stack([(g + g.T) / 2 for g in rng.standard_normal((l, n, n))])
z_known = np.array([0.8, -0.5])
g = rng.standard_normal((n, n))
slack_known = g @ g.T + 0.2 * np.eye(n)
b0 = slack_known - np.einsum("j,jkl->kl", z_known, coeffs)
b0 = (b0 + b0.T) / 2

lmi = Lmi(l=l, B0=b0, Bs=coeffs)
p, recovery = from_lmi(lmi)
print(f"LMI with {l} variables over S^{n} -> instance with m={p.m} constraints")

y0, Y0 = find_dual_interior(p)
outcome, trace = run(p, centered_start(p, y0, Y0), Params())
assert isinstance(outcome, Solved)
print(f"solved in {len(trace)} iterations")

z = recovery.recover(outcome.X)
slack = recovery.reconstruct(z)
slack = (slack + slack.T) / 2
print(f"recovered z = {np.array2string(z, precision=4)}")
print(f"min eig(sum z_j B_j + B0) = {min_eigenvalue(slack):.3e}  (>= 0 means feasible)")
print(f"known feasible z was      {z_known}  (solutions need not coincide)")
