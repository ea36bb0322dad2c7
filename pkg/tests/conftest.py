"""Shared instance pools (session scoped: generation includes phase-one runs)."""

import pytest

from sdfeas.ipm import Params, run
from sdfeas.phase1 import centered_start, find_dual_interior
from sdfeas.problem import generate

# (n, m, r) cycle used by the pools; desk scale per the acceptance setup
SIZES = [
    (3, 2, 1), (4, 3, 1), (5, 4, 2), (6, 6, 2), (7, 8, 3),
    (8, 10, 3), (6, 5, 1), (4, 4, 2), (8, 6, 2), (5, 3, 2),
]


def make_instance(seed):
    n, m, r = SIZES[seed % len(SIZES)]
    return generate(n, m, r, seed=seed)


@pytest.fixture(scope="session")
def pool50():
    """50 generated instances with witnesses."""
    return [make_instance(seed) for seed in range(50)]


@pytest.fixture(scope="session")
def pool50_warm(pool50):
    """Phase-one warm starts for the 50-instance pool."""
    out = []
    for p, w in pool50:
        y0, Y0 = find_dual_interior(p)
        out.append((p, w, centered_start(p, y0, Y0, mu0=1.0)))
    return out


@pytest.fixture(scope="session")
def warm_runs(pool50_warm):
    """Default-parameter warm runs over the full pool."""
    results = []
    for p, w, start in pool50_warm:
        outcome, trace = run(p, start, Params())
        results.append((p, w, start, outcome, trace))
    return results
