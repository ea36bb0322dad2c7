"""Predictor-corrector path-following drivers and superlinearity instrumentation.

One iteration alternates an affine-scaling predictor (sigma = 0) that
expands into the wide neighborhood of radius beta2, and a unit centering
corrector (sigma = 1 - alpha_bar) that returns into the narrow
neighborhood of radius beta1 at the reduced gap (1 - alpha_bar) * mu.
The predictor step length alpha_bar is the largest alpha for which
every point of the segment stays inside the beta2 neighborhood at gap
level (1 - alpha) * mu, located by bisection; the theory guarantees it
is at least alpha1 = 2 / (sqrt(1 + 4 delta / (beta2 - beta1)) + 1).

The same driver is provided for the lifted complementarity form; the
two produce identical iterates up to the block embedding, which
check_equivalence executes and verifies.

mu is tracked through the exact recurrence mu <- (1 - alpha_bar) * mu
(the update rule of the method); every iteration additionally audits the
recomputed gap against the tracked value, with an absolute floor that
accounts for the cancellation noise of evaluating Tr(XY) near
complementarity in double precision.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .embed import (
    Continue,
    EarlyStopped,
    HPoint,
    MuFloorReached,
    NoOptimalSolution,
    Solved,
    classify,
    neighborhood_distance,
    residuals,
)
from .errors import (
    CorrectorEscape,
    EquivalenceViolation,
    InsufficientTrace,
    MaxIterExceeded,
    NotInNeighborhood,
    NotInterior,
    NotPositiveDefinite,
    SdfeasError,
    StepOrderViolation,
)
from .newton import (
    delta_measure,
    delta_measure_hat,
    ld_sqrt_pair,
    needs_extended,
    solve_direction,
    solve_hat_direction,
)
from .sdlcp import HatPoint, apply_Ahat, apply_Bhat, embed_point
from .symcore import min_eigenvalue, psd_sqrt


@dataclass(frozen=True)
class Params:
    """Driver configuration.

    The neighborhood radii must satisfy the chain
    beta2^2 / (2 (1 - beta2)^2) <= beta1 < beta2 < beta2/(1 - beta2) < 1,
    which forces beta2 < 1/2.
    """

    beta1: float = 0.1
    beta2: float = 0.3
    eps: float = 1e-8
    eps_tau: float = 1e-8
    mu_floor: float = 1e-14
    max_iter: int = 200
    bisect_tol: float = 1e-12
    step_rule: str = "alpha2"  # greedy; "alpha1" for the conservative bound

    def __post_init__(self):
        b1, b2 = self.beta1, self.beta2
        if not (b2 ** 2 / (2.0 * (1.0 - b2) ** 2) <= b1 < b2 < b2 / (1.0 - b2) < 1.0):
            raise ValueError(
                f"neighborhood radii violate beta2^2/(2(1-beta2)^2) <= beta1 "
                f"< beta2 < beta2/(1-beta2) < 1 (beta1={b1}, beta2={b2})"
            )
        if self.step_rule not in ("alpha1", "alpha2"):
            raise ValueError("step_rule must be 'alpha1' or 'alpha2'")


TRACE_COLUMNS = (
    "k", "mu", "alpha_bar", "alpha1", "alpha2", "delta", "tau", "kappa",
    "norm_r", "norm_s", "gamma", "nbr_dist", "ratio",
)


@dataclass
class IterRecord:
    k: int
    mu: float
    alpha_bar: float
    alpha1: float
    alpha2: float
    delta: float
    tau: float
    kappa: float
    norm_r: float
    norm_s: float
    gamma: float
    nbr_dist: float
    ratio: float


class IterTrace:
    """Per-iteration convergence record with CSV round-tripping."""

    def __init__(self, records=None):
        self.records = list(records) if records else []

    def append(self, record):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def mus(self):
        return np.array([rec.mu for rec in self.records])

    @property
    def ratios(self):
        return np.array([rec.ratio for rec in self.records])

    def mu_sequence(self):
        """Tracked gap values mu_0 .. mu_K (one more entry than records)."""
        if not self.records:
            return np.array([])
        return np.append(self.mus, self.records[-1].mu * self.records[-1].ratio)

    def to_csv(self, path_or_buf):
        buf = path_or_buf if hasattr(path_or_buf, "write") else io.StringIO()
        buf.write(",".join(TRACE_COLUMNS) + "\n")
        for rec in self.records:
            vals = [getattr(rec, c) for c in TRACE_COLUMNS]
            buf.write(",".join(
                str(int(v)) if c == "k" else format(float(v), ".17g")
                for c, v in zip(TRACE_COLUMNS, vals)
            ) + "\n")
        if buf is path_or_buf:
            return None
        text = buf.getvalue()
        with open(path_or_buf, "w") as f:
            f.write(text)

    @classmethod
    def from_csv(cls, path):
        with open(path) as f:
            header = f.readline().strip().split(",")
            if tuple(header) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace columns: {header}")
            records = []
            for line in f:
                if not line.strip():
                    continue
                parts = line.strip().split(",")
                kwargs = {c: float(v) for c, v in zip(TRACE_COLUMNS, parts)}
                kwargs["k"] = int(kwargs["k"])
                records.append(IterRecord(**kwargs))
        return cls(records)


def step_point(pt, d, alpha):
    """pt + alpha * direction (componentwise; symmetry is preserved exactly)."""
    return HPoint(
        X=pt.X + alpha * d.dX,
        y=pt.y + alpha * d.dy,
        Y=pt.Y + alpha * d.dY,
        tau=pt.tau + alpha * d.dtau,
        kappa=pt.kappa + alpha * d.dkappa,
    )


# --- centrality evaluation ---------------------------------------------------
#
# For gaps far above machine precision the distance to the central path
# is evaluated through the f64 matrix square root.  Deep in the tail
# (mu below about 1e-7 times the data scale) that evaluation is
# cancellation-limited: the product Y^1/2 X Y^1/2 has O(mu) entries
# assembled from O(1) intermediates, so its absolute noise floor
# ~1e-15 would swamp the beta*mu comparison and artificially cap the
# measurable step lengths.  There the evaluation switches to extended
# precision using a Cholesky congruence: G = Ly^T X Ly is symmetric and
# cospectral with Y^1/2 X Y^1/2, hence has the same Frobenius distance
# to mu*I, and every ingredient is computed in longdouble.

_DEEP_MU_FACTOR = 1e-7


def _ld_cholesky(a):
    """Lower Cholesky factor in extended precision; None when not PD."""
    a = np.asarray(a, dtype=np.longdouble)
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if not d > 0.0:
            return None
        low[j, j] = np.sqrt(d)
        if j + 1 < n:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def _centrality_ld(x, y, tau=None, kappa=None):
    """(dist, mu) in extended precision; None when the point is not interior.

    With tau/kappa given this is the homogeneous-model measure
    (divisor n+1, corner term (tau*kappa - mu)^2); without them it is
    the lifted-form measure (divisor n, no corner term).
    """
    lx = _ld_cholesky(x)
    if lx is None:
        return None
    ly = _ld_cholesky(y)
    if ly is None:
        return None
    c = ly.T @ lx
    g = c @ c.T
    n = x.shape[0]
    t1 = np.trace(g)
    if tau is not None:
        tk = np.longdouble(tau) * np.longdouble(kappa)
        mu = (t1 + tk) / (n + 1)
    else:
        tk = None
        mu = t1 / n
    d = g - mu * np.eye(n, dtype=np.longdouble)
    d2 = np.sum(d * d)
    if tk is not None:
        d2 = d2 + (tk - mu) ** 2
    if d2 < 0.0:
        d2 = np.longdouble(0.0)
    return float(np.sqrt(d2)), float(mu)


def point_centrality(pt):
    """(dist, mu) of a homogeneous-model point, or None when not interior.

    Same quantity as embed.neighborhood_distance, with the deep-tail
    precision upgrade described above.
    """
    if not (pt.tau > 0.0 and pt.kappa > 0.0):
        return None
    scale = (np.linalg.norm(pt.X) * np.linalg.norm(pt.Y)
             + abs(pt.tau * pt.kappa))
    if pt.mu > _DEEP_MU_FACTOR * max(1.0, scale):
        try:
            return neighborhood_distance(pt)
        except NotInterior:
            return None
    return _centrality_ld(pt.X, pt.Y, pt.tau, pt.kappa)


def _member(pt, beta):
    c = point_centrality(pt)
    return c is not None and c[0] <= beta * c[1]


def hat_point_centrality(hp):
    """(dist, mu) of a lifted pair, or None when not interior."""
    scale = np.linalg.norm(hp.Xhat) * np.linalg.norm(hp.Yhat)
    if hp.mu > _DEEP_MU_FACTOR * max(1.0, scale):
        try:
            return hat_neighborhood_distance(hp)
        except NotInterior:
            return None
    return _centrality_ld(hp.Xhat, hp.Yhat)


def _member_hat(hp, beta):
    c = hat_point_centrality(hp)
    return c is not None and c[0] <= beta * c[1]


def alpha1_bound(delta, beta1, beta2):
    """Guaranteed predictor step 2 / (sqrt(1 + 4 delta/(beta2-beta1)) + 1)."""
    return 2.0 / (np.sqrt(1.0 + 4.0 * delta / (beta2 - beta1)) + 1.0)


def max_step_in_neighborhood(member, bisect_tol, samples=32, max_rounds=8):
    """Largest alpha in [0,1] with member(a) for all a in [0, alpha].

    Bisects on the first exit of the membership predicate, then honors
    the for-all quantifier by checking equally spaced interior samples;
    a violating sample triggers a conservative re-bisection on the
    violating subinterval.  member(0) must hold.
    """
    if member(1.0):
        return 1.0

    def bisect(lo, hi):
        while hi - lo > bisect_tol:
            mid = 0.5 * (lo + hi)
            if member(mid):
                lo = mid
            else:
                hi = mid
        return lo

    lo = bisect(0.0, 1.0)
    for _ in range(max_rounds):
        if lo <= 0.0:
            return 0.0
        ts = np.linspace(0.0, lo, samples + 2)[1:-1]
        bad = None
        prev = 0.0
        for t in ts:
            if not member(t):
                bad = t
                break
            prev = t
        if bad is None:
            return lo
        lo = bisect(prev, bad)
    raise SdfeasError("membership region did not stabilize to an interval")


@dataclass
class PredictorResult:
    point: HPoint
    alpha_bar: float
    alpha1: float
    alpha2: float
    delta: float
    direction: object = None


def predictor(p, pt, params, mu=None):
    """Affine-scaling step to the edge of the wide neighborhood.

    Solves the linearized system with sigma = 0 and the current
    residuals as targets, so a step of length alpha scales every
    residual and the gap by (1 - alpha).
    """
    if mu is None:
        mu = pt.mu
    if not _member(pt, params.beta1):
        raise NotInNeighborhood("predictor requires a point in the narrow "
                                "neighborhood")
    res = residuals(p, pt)
    if needs_extended(mu, pt.X, pt.Y):
        ysqrt = ld_sqrt_pair(pt.Y)
    else:
        ysqrt = psd_sqrt(pt.Y, pd_tol=0.0)
    d = solve_direction(p, pt, 0.0, res.r, res.s, res.gamma, mu=mu, ysqrt=ysqrt)
    delta = delta_measure(pt, d, mu=mu, ysqrt=ysqrt)
    a1 = alpha1_bound(delta, params.beta1, params.beta2)

    def member(alpha):
        return _member(step_point(pt, d, alpha), params.beta2)

    a2 = max_step_in_neighborhood(member, params.bisect_tol)
    if a2 < a1 - params.bisect_tol:
        raise StepOrderViolation(
            f"alpha2 = {a2:.6e} < alpha1 = {a1:.6e} (delta = {delta:.3e})"
        )
    alpha_bar = a1 if params.step_rule == "alpha1" else a2
    return PredictorResult(
        point=step_point(pt, d, alpha_bar),
        alpha_bar=alpha_bar, alpha1=a1, alpha2=a2, delta=delta, direction=d,
    )


def corrector(p, pt_bar, alpha_bar, params, mu=None):
    """Unit centering step back into the narrow neighborhood.

    mu is the normalized gap of the iterate *before* the predictor, so
    the centering target sigma * mu = (1 - alpha_bar) * mu equals the
    gap level of pt_bar.  When omitted it is reconstructed from pt_bar.
    """
    if mu is None:
        mu = pt_bar.mu / (1.0 - alpha_bar)
    zeros_r = np.zeros(p.m)
    zeros_s = np.zeros((p.n, p.n))
    d = solve_direction(p, pt_bar, 1.0 - alpha_bar, zeros_r, zeros_s, 0.0, mu=mu)
    new_pt = step_point(pt_bar, d, 1.0)
    if not _member(new_pt, params.beta1):
        raise CorrectorEscape(
            f"corrector left the beta1 neighborhood at mu = "
            f"{(1.0 - alpha_bar) * mu:.3e}"
        )
    return new_pt


def _promote(pt):
    """Carry deep-tail iterates in extended precision.

    Once mu falls well below the data scale, f64 storage of the iterate
    itself caps how closely it can track the strictly complementary
    face (isotropic rounding of order-one entries leaves ~1e-16 of
    face-normal contamination), which would floor the measurable gap
    ratios near eps/mu.  The scalars tau and kappa stay f64: they are
    relatively accurate at any magnitude.
    """
    if pt.X.dtype == np.longdouble:
        return pt
    return HPoint(X=pt.X.astype(np.longdouble), y=pt.y,
                  Y=pt.Y.astype(np.longdouble), tau=pt.tau, kappa=pt.kappa)


def _promote_hat(hp):
    if hp.Xhat.dtype == np.longdouble:
        return hp
    return HatPoint(Xhat=hp.Xhat.astype(np.longdouble),
                    Yhat=hp.Yhat.astype(np.longdouble))


def _audit_gap(pt, mu_tracked):
    """Tracked vs recomputed gap, with a cancellation-aware tolerance."""
    gap_scale = (np.linalg.norm(pt.X) * np.linalg.norm(pt.Y)
                 + abs(pt.tau * pt.kappa))
    tol = 1e-9 * mu_tracked + 1e-13 * gap_scale
    drift = abs(pt.mu - mu_tracked)
    if drift > tol:
        raise CorrectorEscape(
            f"complementarity target missed: tracked mu {mu_tracked:.6e}, "
            f"recomputed {pt.mu:.6e}"
        )


def run(p, start, params=None, stop_when=None):
    """Drive the homogeneous model from start until a termination test fires.

    Returns (outcome, trace).  Outcomes: Solved, NoOptimalSolution,
    MuFloorReached, or EarlyStopped when the stop_when(k, pt) hook
    returns True.  Raises MaxIterExceeded (trace attached) at the
    iteration cap; step-length and corrector theory breaches surface as
    exceptions rather than being repaired.
    """
    if params is None:
        params = Params()
    if not _member(start, params.beta1):
        raise NotInNeighborhood("start is outside the narrow neighborhood")
    pt = start
    mu = pt.mu
    trace = IterTrace()
    for k in range(params.max_iter):
        if stop_when is not None and stop_when(k, pt):
            return EarlyStopped(point=pt), trace
        outcome = classify(p, pt, params.eps, params.eps_tau)
        if isinstance(outcome, Solved):
            feas = np.max(np.abs(np.einsum("ijk,jk->i", p.A, outcome.X) - p.b))
            if feas > params.eps * max(1.0, np.linalg.norm(outcome.X)):
                raise SdfeasError(
                    f"solution verification failed: residual {feas:.3e}"
                )
            return outcome, trace
        if not isinstance(outcome, _ContinueType):
            return outcome, trace
        if mu <= params.mu_floor:
            return MuFloorReached(point=pt), trace
        if needs_extended(mu, pt.X, pt.Y):
            pt = _promote(pt)

        res = residuals(p, pt)
        dist = point_centrality(pt)[0]
        pred = predictor(p, pt, params, mu=mu)
        if pred.alpha_bar >= 1.0:
            # exact solve: the full predictor step has zero gap
            pt = pred.point
            mu = 0.0
            trace.append(IterRecord(
                k=k, mu=mu, alpha_bar=1.0, alpha1=pred.alpha1, alpha2=1.0,
                delta=pred.delta, tau=pt.tau, kappa=pt.kappa,
                norm_r=float(np.linalg.norm(res.r)),
                norm_s=float(np.linalg.norm(res.s)), gamma=res.gamma,
                nbr_dist=dist, ratio=0.0,
            ))
            outcome = classify(p, pt, params.eps, params.eps_tau)
            return outcome, trace
        mu_next = (1.0 - pred.alpha_bar) * mu
        trace.append(IterRecord(
            k=k, mu=mu, alpha_bar=pred.alpha_bar, alpha1=pred.alpha1,
            alpha2=pred.alpha2, delta=pred.delta, tau=pt.tau, kappa=pt.kappa,
            norm_r=float(np.linalg.norm(res.r)),
            norm_s=float(np.linalg.norm(res.s)), gamma=res.gamma,
            nbr_dist=dist, ratio=1.0 - pred.alpha_bar,
        ))
        if mu_next <= params.mu_floor:
            # the gap floor is reached at the predictor output; there is
            # no next iteration for a corrector to prepare
            outcome = classify(p, pred.point, params.eps, params.eps_tau)
            if not isinstance(outcome, _ContinueType):
                return outcome, trace
            return MuFloorReached(point=pred.point), trace
        new_pt = corrector(p, pred.point, pred.alpha_bar, params, mu=mu)
        _audit_gap(new_pt, mu_next)
        pt = new_pt
        mu = mu_next
    raise MaxIterExceeded(f"no termination in {params.max_iter} iterations",
                          trace=trace)


_ContinueType = type(Continue)


# --- lifted-form driver ------------------------------------------------------


@dataclass
class SdlcpSolved:
    """Termination pair of the lifted driver (not yet divided by tau)."""

    Xhat: np.ndarray
    Yhat: np.ndarray


def hat_neighborhood_distance(hp):
    """Centrality defect || Yhat^1/2 Xhat Yhat^1/2 - mu I ||_F and mu."""
    try:
        sq = psd_sqrt(hp.Yhat, pd_tol=0.0)
    except NotPositiveDefinite as e:
        raise NotInterior(f"Yhat is not positive definite: {e}") from e
    if min_eigenvalue(hp.Xhat) <= 0.0:
        raise NotInterior("Xhat is not positive definite")
    mu = hp.mu
    g = sq.sqrt @ hp.Xhat @ sq.sqrt
    g = (g + g.T) / 2.0
    g[np.diag_indices_from(g)] -= mu
    return float(np.linalg.norm(g)), mu


def in_hat_neighborhood(hp, beta):
    try:
        dist, mu = hat_neighborhood_distance(hp)
    except NotInterior:
        return False
    return dist <= beta * mu


def hat_step(hp, dx, dy, alpha):
    return HatPoint(Xhat=hp.Xhat + alpha * dx, Yhat=hp.Yhat + alpha * dy)


def hat_residual(ops, hp):
    return apply_Ahat(ops, hp.Xhat) + apply_Bhat(ops, hp.Yhat)


def classify_hat(ops, hp, eps, eps_tau):
    """Termination test of the lifted driver, keyed on the corner entries."""
    tau = hp.Xhat[-1, -1]
    kappa = hp.Yhat[-1, -1]
    r = hat_residual(ops, hp)
    gap = float(np.sum(hp.Xhat * hp.Yhat))
    if tau > 0.0:
        value = max(gap / tau**2, float(np.linalg.norm(r)) / tau)
        if value <= eps:
            return SdlcpSolved(Xhat=hp.Xhat, Yhat=hp.Yhat)
    if tau <= eps_tau and kappa * eps_tau >= tau:
        return NoOptimalSolution(tau=tau, kappa=kappa)
    return Continue


@dataclass
class HatPredictorResult:
    point: HatPoint
    alpha_bar: float
    alpha1: float
    alpha2: float
    delta: float
    dXhat: np.ndarray = None
    dYhat: np.ndarray = None


def predictor_hat(ops, hp, params, mu=None):
    if mu is None:
        mu = hp.mu
    if not _member_hat(hp, params.beta1):
        raise NotInNeighborhood("lifted predictor requires a point in the "
                                "narrow neighborhood")
    r = hat_residual(ops, hp)
    if needs_extended(mu, hp.Xhat, hp.Yhat):
        ysqrt = ld_sqrt_pair(hp.Yhat)
    else:
        ysqrt = psd_sqrt(hp.Yhat, pd_tol=0.0)
    dx, dy = solve_hat_direction(ops, hp, 0.0, r, mu=mu, ysqrt=ysqrt)
    delta = delta_measure_hat(hp, dx, dy, mu=mu, ysqrt=ysqrt)
    a1 = alpha1_bound(delta, params.beta1, params.beta2)

    def member(alpha):
        return _member_hat(hat_step(hp, dx, dy, alpha), params.beta2)

    a2 = max_step_in_neighborhood(member, params.bisect_tol)
    if a2 < a1 - params.bisect_tol:
        raise StepOrderViolation(
            f"alpha2 = {a2:.6e} < alpha1 = {a1:.6e} (delta = {delta:.3e})"
        )
    alpha_bar = a1 if params.step_rule == "alpha1" else a2
    return HatPredictorResult(
        point=hat_step(hp, dx, dy, alpha_bar),
        alpha_bar=alpha_bar, alpha1=a1, alpha2=a2, delta=delta,
        dXhat=dx, dYhat=dy,
    )


def corrector_hat(ops, hp_bar, alpha_bar, params, mu=None):
    if mu is None:
        mu = hp_bar.mu / (1.0 - alpha_bar)
    dx, dy = solve_hat_direction(
        ops, hp_bar, 1.0 - alpha_bar, np.zeros(ops.ntilde1), mu=mu
    )
    new_hp = hat_step(hp_bar, dx, dy, 1.0)
    if not _member_hat(new_hp, params.beta1):
        raise CorrectorEscape(
            f"lifted corrector left the beta1 neighborhood at mu = "
            f"{(1.0 - alpha_bar) * mu:.3e}"
        )
    return new_hp


def run_sdlcp(ops, start_hat, params=None, stop_when=None):
    """Lifted-form driver; mirrors run() over HatPoint iterates.

    Trace conventions: tau and kappa are the corner entries, norm_r is
    the norm of the first m residual entries, norm_s the norm of the
    tail block (rows m+n+1 onward), gamma the first tail entry.
    """
    if params is None:
        params = Params()
    if not _member_hat(start_hat, params.beta1):
        raise NotInNeighborhood("start is outside the narrow neighborhood")
    hp = start_hat
    mu = hp.mu
    trace = IterTrace()
    m, n = ops.m, ops.n
    for k in range(params.max_iter):
        if stop_when is not None and stop_when(k, hp):
            return EarlyStopped(point=hp), trace
        outcome = classify_hat(ops, hp, params.eps, params.eps_tau)
        if not isinstance(outcome, _ContinueType):
            return outcome, trace
        if mu <= params.mu_floor:
            return MuFloorReached(point=hp), trace
        if needs_extended(mu, hp.Xhat, hp.Yhat):
            hp = _promote_hat(hp)

        r = hat_residual(ops, hp)
        dist = hat_point_centrality(hp)[0]
        pred = predictor_hat(ops, hp, params, mu=mu)
        if pred.alpha_bar >= 1.0:
            hp = pred.point
            outcome = classify_hat(ops, hp, params.eps, params.eps_tau)
            return outcome, trace
        mu_next = (1.0 - pred.alpha_bar) * mu
        trace.append(IterRecord(
            k=k, mu=mu, alpha_bar=pred.alpha_bar, alpha1=pred.alpha1,
            alpha2=pred.alpha2, delta=pred.delta,
            tau=hp.Xhat[-1, -1], kappa=hp.Yhat[-1, -1],
            norm_r=float(np.linalg.norm(r[:m])),
            norm_s=float(np.linalg.norm(r[m + n:])), gamma=float(r[m + n]),
            nbr_dist=dist, ratio=1.0 - pred.alpha_bar,
        ))
        if mu_next <= params.mu_floor:
            outcome = classify_hat(ops, pred.point, params.eps, params.eps_tau)
            if not isinstance(outcome, _ContinueType):
                return outcome, trace
            return MuFloorReached(point=pred.point), trace
        new_hp = corrector_hat(ops, pred.point, pred.alpha_bar, params, mu=mu)
        hp = new_hp
        mu = mu_next
    raise MaxIterExceeded(f"no termination in {params.max_iter} iterations",
                          trace=trace)


# --- algorithm equivalence ---------------------------------------------------


@dataclass
class EquivalenceReport:
    k_checked: int
    max_block_deviation: float
    max_mu_deviation: float
    alpha_deviations: list = field(default_factory=list)


def _block_deviation(hp, pt):
    target = np.zeros_like(hp.Xhat)
    n = pt.n
    target[:n, :n] = pt.X
    target[n, n] = pt.tau
    dev_x = np.linalg.norm(hp.Xhat - target) / max(1.0, np.linalg.norm(target))
    target[:n, :n] = pt.Y
    target[n, n] = pt.kappa
    dev_y = np.linalg.norm(hp.Yhat - target) / max(1.0, np.linalg.norm(target))
    return max(dev_x, dev_y)


def check_equivalence(p, start, params=None, k_max=15, ops=None,
                      block_tol=1e-8, mu_tol=1e-10, alpha_tol=1e-6):
    """Run both formulations in lockstep and compare iterates.

    Both sides use the greedy alpha2 step rule; each computes its own
    maximal step and the two must agree (to alpha_tol), after which the
    common step from the homogeneous side is applied to both so the
    comparison is well posed through the superlinear regime.  Raises
    EquivalenceViolation at the first k where the lifted iterate departs
    from the block embedding of the homogeneous one.
    """
    if params is None:
        params = Params()
    if ops is None:
        from .sdlcp import build_orth_basis, build_ops

        ops = build_ops(p, build_orth_basis(p))
    pt = start
    hp = embed_point(start)
    mu = pt.mu
    mu_hat = hp.mu
    report = EquivalenceReport(k_checked=0, max_block_deviation=0.0,
                               max_mu_deviation=0.0)
    for k in range(k_max + 1):
        dev = _block_deviation(hp, pt)
        mu_dev = abs(mu_hat - mu) / mu
        report.k_checked = k
        report.max_block_deviation = max(report.max_block_deviation, dev)
        report.max_mu_deviation = max(report.max_mu_deviation, mu_dev)
        if dev > block_tol:
            raise EquivalenceViolation(
                f"block deviation {dev:.3e} > {block_tol:.1e} at k = {k}", k=k
            )
        if mu_dev > mu_tol:
            raise EquivalenceViolation(
                f"gap deviation {mu_dev:.3e} > {mu_tol:.1e} at k = {k}", k=k
            )
        if k == k_max:
            break
        if not isinstance(classify(p, pt, params.eps, params.eps_tau),
                          _ContinueType):
            break
        if not isinstance(classify_hat(ops, hp, params.eps, params.eps_tau),
                          _ContinueType):
            break
        if mu <= params.mu_floor:
            break
        pred = predictor(p, pt, params, mu=mu)
        pred_hat = predictor_hat(ops, hp, params, mu=mu_hat)
        a_dev = abs(pred.alpha_bar - pred_hat.alpha_bar)
        report.alpha_deviations.append(a_dev)
        if a_dev > alpha_tol:
            raise EquivalenceViolation(
                f"step lengths diverged by {a_dev:.3e} at k = {k}", k=k
            )
        # the common step keeps the comparison well posed; both sides
        # independently obtained the same value up to alpha_tol
        alpha = pred.alpha_bar
        if (1.0 - alpha) * mu <= params.mu_floor:
            # the next corrector would operate below the floor, where a
            # single refinement step can no longer certify agreement
            break
        pt = corrector(p, step_point(pt, pred.direction, alpha), alpha,
                       params, mu=mu)
        hp_bar = hat_step(hp, pred_hat.dXhat, pred_hat.dYhat, alpha)
        hp = corrector_hat(ops, hp_bar, alpha, params, mu=mu_hat)
        mu = (1.0 - alpha) * mu
        mu_hat = (1.0 - alpha) * mu_hat
    return report


# --- superlinearity ----------------------------------------------------------


@dataclass
class SuperlinearReport:
    tail_ratios: np.ndarray
    monotone_decreasing: bool
    final_ratio: float
    q_order: float


def superlinear_report(trace, tail=5):
    """Read off the tail decay of the gap-ratio sequence.

    Reports the last `tail` ratios mu_{k+1}/mu_k, whether they decrease
    monotonically, the final ratio, and a log-log regression estimate of
    the convergence order.  No pass/fail judgment is made here.
    """
    if len(trace) < tail or tail < 1:
        raise InsufficientTrace(
            f"trace has {len(trace)} steps, need at least {tail}"
        )
    ratios = trace.ratios[-tail:]
    monotone = bool(np.all(np.diff(ratios) < 0.0)) if len(ratios) > 1 else True
    mus = trace.mu_sequence()[-(tail + 1):]
    if np.all(mus > 0.0) and len(mus) >= 3:
        q = float(np.polyfit(np.log(mus[:-1]), np.log(mus[1:]), 1)[0])
    else:
        q = float("nan")
    return SuperlinearReport(
        tail_ratios=ratios,
        monotone_decreasing=monotone,
        final_ratio=float(ratios[-1]),
        q_order=q,
    )
