"""Initial iterates: the dual-feasible warm start and a generic cold start.

The warm start is the practical condition under which the driver's gap
ratios decay to zero: pick (y0, Y0) with sum_i y0_i A_i + Y0 = 0 and
Y0 positive definite, then center exactly with X0 = mu0 * Y0^-1,
tau0 = 1, kappa0 = mu0.  Such a start has zero dual residual (and keeps
it zero for the whole run, since both step types scale residuals), which
is exactly what the lifted warm-start condition checker certifies.

Finding (y0, Y0) is itself a feasibility question, answered by running
the same driver on an auxiliary instance with an extra trace-normalizing
constraint: its dual reads  max -t  s.t.  sum_i y_i A_i - t I + Y = 0,
so any auxiliary dual iterate whose leading y-block makes
sum_i y_i A_i negative definite with margin certifies strict dual
feasibility of the original instance, and the run is stopped right
there.  If instead the auxiliary run finds a feasible point, no strictly
feasible dual exists.
"""

import numpy as np

from .embed import EarlyStopped, HPoint, Solved
from .errors import (
    Inconclusive,
    MaxIterExceeded,
    NotDualFeasible,
    NotStrictlyFeasible,
)
from .ipm import Params, run
from .problem import Lsdfp
from .symcore import jacobi_eigh, min_eigenvalue, svec, sym


def _dual_slack(p, y):
    """Y0 = -sum_i y_i A_i, the exact dual slack for coefficient vector y."""
    return sym(-np.einsum("i,ijk->jk", np.asarray(y, dtype=float), p.A))


def _margin_ok(y0_mat, margin):
    nrm = np.linalg.norm(y0_mat)
    if nrm == 0.0:
        return False
    return min_eigenvalue(y0_mat) >= margin * nrm


def find_dual_interior(p, margin=1e-3, params=None, rho=1.0):
    """Search for (y0, Y0) with sum y0_i A_i + Y0 = 0 and Y0 safely definite.

    The margin is scale free: min_eig(Y0) >= margin * ||Y0||_F.  The
    returned y0 is normalized to unit Euclidean norm.  Raises
    NotStrictlyFeasible when the auxiliary run proves no such pair
    exists, and Inconclusive when it terminates without a certificate
    (iteration cap, or a margin too demanding for the final iterate).
    """
    if params is None:
        params = Params()

    # fast path: the identity in the constraint span gives y directly
    amat = p.amat
    eye_v = svec(np.eye(p.n))
    c, *_ = np.linalg.lstsq(amat.T, eye_v, rcond=None)
    if np.linalg.norm(amat.T @ c - eye_v) <= 1e-10 * np.sqrt(p.n):
        y0 = -c / np.linalg.norm(c)
        y0_mat = _dual_slack(p, y0)
        if _margin_ok(y0_mat, margin):
            return y0, y0_mat

    aux_a = np.concatenate([p.A, -np.eye(p.n)[None, :, :]], axis=0)
    aux_b = np.zeros(p.m + 1)
    aux_b[-1] = -1.0
    aux = Lsdfp(n=p.n, m=p.m + 1, A=aux_a, b=aux_b)

    def margin_hit(_k, pt):
        return _margin_ok(_dual_slack(p, pt.y[: p.m]), margin)

    start = cold_start(aux, rho)
    try:
        outcome, _ = run(aux, start, params, stop_when=margin_hit)
    except MaxIterExceeded as e:
        raise Inconclusive(
            "auxiliary run hit the iteration cap before any certificate"
        ) from e

    if isinstance(outcome, EarlyStopped):
        y = outcome.point.y[: p.m]
        y0 = y / np.linalg.norm(y)
        y0_mat = _dual_slack(p, y0)
        if not _margin_ok(y0_mat, margin):
            raise Inconclusive("margin test failed on re-validation")
        return y0, y0_mat
    if isinstance(outcome, Solved):
        raise NotStrictlyFeasible(
            "the auxiliary problem is feasible, so no strictly feasible "
            "dual point exists"
        )
    # Infeasibility of the auxiliary problem implies a strict dual
    # certificate exists; the margin just never fired during the run.
    final = getattr(outcome, "point", None)
    if final is not None:
        y = final.y[: p.m]
        nrm = np.linalg.norm(y)
        if nrm > 0.0:
            y0 = y / nrm
            y0_mat = _dual_slack(p, y0)
            if _margin_ok(y0_mat, margin):
                return y0, y0_mat
    raise Inconclusive(
        "auxiliary run terminated without satisfying the margin test; "
        "consider a smaller margin"
    )


def centered_start(p, y0, Y0, mu0=1.0):
    """Exactly centered warm start from a dual-feasible pair.

    X0 = mu0 * Y0^-1, tau0 = 1, kappa0 = mu0, so that
    Y0^1/2 X0 Y0^1/2 = mu0 I and tau0*kappa0 = mu0: the point has zero
    centrality defect and lies in every neighborhood.
    """
    y0 = np.asarray(y0, dtype=float)
    Y0 = np.asarray(Y0, dtype=float)
    resid = np.linalg.norm(np.einsum("i,ijk->jk", y0, p.A) + Y0)
    if resid > 1e-10 * max(1.0, np.linalg.norm(Y0)):
        raise NotDualFeasible(f"dual residual {resid:.3e} of the given pair")
    if mu0 <= 0.0:
        raise ValueError("mu0 must be positive")
    w, v = jacobi_eigh(Y0)
    if w[0] <= 0.0:
        raise NotDualFeasible("Y0 is not positive definite")
    x0 = sym(mu0 * (v / w) @ v.T)
    return HPoint(X=x0, y=y0.copy(), Y=sym(Y0), tau=1.0, kappa=mu0)


def cold_start(p, rho=1.0):
    """Generic exactly centered start X0 = Y0 = rho I, tau0 = kappa0 = rho."""
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    eye = np.eye(p.n)
    return HPoint(X=rho * eye, y=np.zeros(p.m), Y=rho * eye, tau=rho, kappa=rho)
