"""Exception types shared across the package."""


class SdfeasError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(SdfeasError):
    """A matrix required to be positive definite is not."""


class NotInterior(SdfeasError):
    """An iterate left the open cone S^n_++ x R^m x S^n_++ x R_++ x R_++."""


class NotInNeighborhood(SdfeasError):
    """A point violates a required central-path neighborhood membership."""


class ZeroRhs(SdfeasError):
    """LMI conversion would produce an all-zero right-hand side."""


class DegenerateLmi(SdfeasError):
    """LMI coefficient matrices are linearly dependent."""


class GenerationFailed(SdfeasError):
    """Instance generator exhausted its retry budget."""


class NonZeroCost(SdfeasError):
    """SDPA import found a nonzero cost matrix (only feasibility problems map)."""


class NotIterateForm(SdfeasError):
    """A lifted point has non-negligible off-diagonal coupling blocks."""


class CannotSatisfyB122(SdfeasError):
    """Basis repair for the partitioned nonzero-block condition failed."""


class SingularNewtonSystem(SdfeasError):
    """The assembled Newton system is numerically singular."""

    def __init__(self, message, cond_estimate=None):
        super().__init__(message)
        self.cond_estimate = cond_estimate


class StepOrderViolation(SdfeasError):
    """Predictor found alpha2 < alpha1, contradicting the step-length theory."""


class CorrectorEscape(SdfeasError):
    """Corrector output left the narrow neighborhood, contradicting theory."""


class EquivalenceViolation(SdfeasError):
    """The two algorithm formulations diverged beyond tolerance."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class MaxIterExceeded(SdfeasError):
    """Iteration cap reached before any termination test fired."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NotDualFeasible(SdfeasError):
    """A claimed dual-feasible pair has a nonzero dual residual."""


class NotStrictlyFeasible(SdfeasError):
    """Phase one certified that no strictly feasible dual point exists."""


class Inconclusive(SdfeasError):
    """Phase one terminated without a certificate either way."""


class InsufficientTrace(SdfeasError):
    """A trace is too short for the requested tail analysis."""
