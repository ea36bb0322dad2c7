"""Homogeneous feasibility model: iterates, residuals, neighborhood, termination.

The model couples the primal and dual of a feasibility instance through
homogenizing variables tau and kappa:

    Tr(A_i X) = b_i tau,   sum_i y_i A_i + Y = 0,   kappa = b^T y,
    X, Y >= 0, tau >= 0, kappa >= 0.

Any exactly feasible point satisfies Tr(XY) + tau*kappa = 0, so interior
iterates are never feasible; the solver drives the residuals and the
complementarity gap to zero together.  Solutions with tau > 0 recover a
primal-dual solution by division by tau; solutions with kappa > 0 and
tau = 0 certify that none exists.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotInterior, NotPositiveDefinite
from .symcore import as_symmetric, min_eigenvalue, psd_sqrt


@dataclass
class HPoint:
    """Homogeneous-model point (X, y, Y, tau, kappa).

    Construction validates shapes and exact symmetry only; interior
    membership (positive definiteness, tau > 0, kappa > 0) is checked by
    the operations that require it, so residuals and identities can be
    evaluated at raw boundary points too.
    """

    X: np.ndarray
    y: np.ndarray
    Y: np.ndarray
    tau: float
    kappa: float

    def __post_init__(self):
        self.X = as_symmetric(self.X)
        self.Y = as_symmetric(self.Y)
        self.y = np.asarray(self.y, dtype=float)
        self.tau = float(self.tau)
        self.kappa = float(self.kappa)
        if self.X.shape != self.Y.shape:
            raise ValueError("X and Y must have the same dimension")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def gap(self):
        """Complementarity measure Tr(XY) + tau*kappa."""
        return float(np.sum(self.X * self.Y) + self.tau * self.kappa)

    @property
    def mu(self):
        """Normalized gap (Tr(XY) + tau*kappa) / (n + 1)."""
        return self.gap / (self.n + 1)

    def scaled(self, t):
        return HPoint(
            X=self.X * t, y=self.y * t, Y=self.Y * t, tau=self.tau * t,
            kappa=self.kappa * t,
        )

    def is_interior(self):
        return (
            self.tau > 0.0
            and self.kappa > 0.0
            and min_eigenvalue(self.X) > 0.0
            and min_eigenvalue(self.Y) > 0.0
        )


@dataclass
class Residuals:
    r: np.ndarray  # primal residuals Tr(A_i X) - b_i tau
    s: np.ndarray  # dual residual sum_i y_i A_i + Y
    gamma: float  # kappa - b^T y


def residuals(p, pt):
    """All three residual blocks of the homogeneous equations at pt."""
    r = np.einsum("ijk,jk->i", p.A, pt.X) - p.b * pt.tau
    s = np.einsum("i,ijk->jk", pt.y, p.A) + pt.Y
    gamma = pt.kappa - float(p.b @ pt.y)
    return Residuals(r=r, s=(s + s.T) / 2.0, gamma=gamma)


def gap_identity_defect(p, pt):
    """Numerical defect of the algebraic identity tying the gap to residuals.

    Tr(XY) + tau*kappa  ==  -y.r + Tr(sX) + tau*gamma  holds for every
    point; in particular the gap vanishes on exactly feasible points.
    """
    res = residuals(p, pt)
    lhs = pt.gap
    rhs = -float(pt.y @ res.r) + float(np.sum(res.s * pt.X)) + pt.tau * res.gamma
    return abs(lhs - rhs)


def neighborhood_distance(pt):
    """Centrality defect and normalized gap of an interior point.

    Returns (dist, mu) with
    dist = sqrt(||Y^1/2 X Y^1/2 - mu I||_F^2 + (tau*kappa - mu)^2);
    the point lies in the neighborhood of radius beta iff dist <= beta*mu.
    """
    try:
        sq = psd_sqrt(pt.Y, pd_tol=0.0)
    except NotPositiveDefinite as e:
        raise NotInterior(f"Y is not positive definite: {e}") from e
    if min_eigenvalue(pt.X) <= 0.0:
        raise NotInterior("X is not positive definite")
    mu = pt.mu
    g = sq.sqrt @ pt.X @ sq.sqrt
    g = (g + g.T) / 2.0
    g[np.diag_indices_from(g)] -= mu
    dist = float(np.sqrt(np.linalg.norm(g) ** 2 + (pt.tau * pt.kappa - mu) ** 2))
    return dist, mu


def in_neighborhood(pt, beta):
    """Membership test for the central-path neighborhood of radius beta."""
    if pt.tau <= 0.0 or pt.kappa <= 0.0:
        return False
    try:
        dist, mu = neighborhood_distance(pt)
    except NotInterior:
        return False
    return dist <= beta * mu


# --- termination outcomes ---------------------------------------------------


@dataclass
class Solved:
    """Approximate primal-dual solution (already divided by tau)."""

    X: np.ndarray
    y: np.ndarray
    Y: np.ndarray


@dataclass
class NoOptimalSolution:
    """tau collapsed while kappa stayed positive: no solution exists."""

    tau: float
    kappa: float
    point: HPoint = None


class _Continue:
    def __repr__(self):
        return "Continue"


Continue = _Continue()


@dataclass
class EarlyStopped:
    """A caller-supplied stopping test fired (used by the phase-one search)."""

    point: HPoint


@dataclass
class MuFloorReached:
    """The gap fell below the configured floor before a termination test fired."""

    point: HPoint


def classify(p, pt, eps, eps_tau):
    """Termination test of the homogeneous driver.

    Solved when max{gap/tau^2, |r_i|/tau, ||s||_F/tau} <= eps; the
    solution reported is (X, y, Y)/tau.  NoOptimalSolution when tau has
    collapsed (tau <= eps_tau) while kappa/tau >= 1/eps_tau, the robust
    form of the tau/kappa dichotomy.  Otherwise Continue.
    """
    res = residuals(p, pt)
    if pt.tau > 0.0:
        value = max(
            pt.gap / pt.tau**2,
            float(np.max(np.abs(res.r))) / pt.tau,
            float(np.linalg.norm(res.s)) / pt.tau,
        )
        if value <= eps:
            return Solved(
                X=np.asarray(pt.X / pt.tau, dtype=float),
                y=np.asarray(pt.y / pt.tau, dtype=float),
                Y=np.asarray(pt.Y / pt.tau, dtype=float),
            )
    if pt.tau <= eps_tau and pt.kappa * eps_tau >= pt.tau:
        return NoOptimalSolution(tau=pt.tau, kappa=pt.kappa, point=pt)
    return Continue
