"""Semidefinite feasibility via the homogeneous model.

Library layout:

* symcore: symmetric-matrix kernel (svec/smat, Jacobi eigensolver,
  matrix square roots, cone predicates)
* problem: instance model, validation, LMI conversion, generation,
  JSON / SDPA file formats
* embed: homogeneous-model points, residuals, central-path
  neighborhood, termination classification
* sdlcp: complementarity reformulation, operator rows, structural and
  warm-start condition checkers
* newton: linearized-step solvers (dual scaling) for both formulations
* ipm: predictor-corrector drivers, algorithm-equivalence checker,
  gap-ratio instrumentation
* phase1: dual-feasible warm start and cold start
* cli: command-line front end (solve / generate / verify / compare /
  report / convert)
"""

from .embed import HPoint, NoOptimalSolution, Solved
from .ipm import IterTrace, Params, check_equivalence, run, run_sdlcp, superlinear_report
from .phase1 import centered_start, cold_start, find_dual_interior
from .problem import Lmi, Lsdfp, Witness, from_lmi, generate, validate

__all__ = [
    "HPoint",
    "IterTrace",
    "Lmi",
    "Lsdfp",
    "NoOptimalSolution",
    "Params",
    "Solved",
    "Witness",
    "centered_start",
    "check_equivalence",
    "cold_start",
    "find_dual_interior",
    "from_lmi",
    "generate",
    "run",
    "run_sdlcp",
    "superlinear_report",
    "validate",
]

__version__ = "0.1.0"
