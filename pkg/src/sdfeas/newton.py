"""Linearized-step solvers for the dual scaling of the complementarity equation.

Both drivers repeatedly solve one linear system.  For the homogeneous
model the unknown is (dX, dy, dY, dtau, dkappa) and the equations are

  (E1)  Y^1/2 (X dY + dX Y) Y^-1/2 + Y^-1/2 (dY X + Y dX) Y^1/2
            = 2 (sigma mu I - Y^1/2 X Y^1/2)
  (E2)  kappa dtau + tau dkappa = sigma mu - tau kappa
  (E3)  Tr(A_i dX) - b_i dtau = -rbar_i
  (E4)  sum_i dy_i A_i + dY = -sbar
  (E5)  dkappa - b^T dy = -gbar

vectorized over svec coordinates into one dense square system of
dimension 2*ntilde + m + 2 and solved by LU with partial pivoting plus
one step of iterative refinement.  Note the left side of (E1) collapses
to 2 S dX S + (W + W^T) with S = Y^1/2 and W = S X dY S^-1, which is how
the columns are assembled.

The lifted form solves the same complementarity linearization over
S^{n+1} paired with Ahat(dXhat) + Bhat(dYhat) = -rbar, a square system
of dimension 2*ntilde1.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite, SingularNewtonSystem
from .symcore import (
    SqrtPair,
    jacobi_eigh_ld,
    psd_sqrt,
    smat,
    svec,
    svec_basis,
    svec_dim,
)

# Below this normalized-gap level (relative to the data scale) the
# system is assembled in extended precision: the complementarity
# right-hand side has true entries of size mu formed from order-one
# intermediates, and f64 cancellation noise (~1e-15 absolute) would
# otherwise dominate it.
DEEP_ASSEMBLY_FACTOR = 1e-7

_BASIS_CACHE = {}


def _basis(n):
    if n not in _BASIS_CACHE:
        _BASIS_CACHE[n] = svec_basis(n)
    return _BASIS_CACHE[n]


def _svec_rows(mats):
    """svec applied along the first axis of a (k, n, n) stack."""
    k, n, _ = mats.shape
    from .symcore import _tri_indices

    rows, cols, w = _tri_indices(n)
    return mats[:, rows, cols] * w


def _complementarity_blocks(x, sq):
    """Columns of the (E1) operator for the dX and dY unknowns."""
    n = x.shape[0]
    basis = _basis(n)
    s, si = sq.sqrt, sq.inv_sqrt
    # dX part: 2 * S E_j S
    t1 = np.einsum("ab,jbc,cd->jad", s, basis, s)
    kxx = 2.0 * _svec_rows(t1).T
    # dY part: W + W^T with W = (S X) E_j S^-1
    p = s @ x
    w = np.einsum("ab,jbc,cd->jad", p, basis, si)
    kxy = _svec_rows(w + np.transpose(w, (0, 2, 1))).T
    return kxx, kxy


def ld_sqrt_pair(y):
    """Extended-precision analogue of psd_sqrt (same SqrtPair interface)."""
    w, v = jacobi_eigh_ld(y)
    if not w[0] > 0.0:
        raise NotPositiveDefinite(
            f"min eigenvalue {float(w[0]):.3e} is not positive"
        )
    rw = np.sqrt(w)
    s = (v * rw) @ v.T
    si = (v / rw) @ v.T
    return SqrtPair(sqrt=(s + s.T) / 2.0, inv_sqrt=(si + si.T) / 2.0, eigvals=w)


def needs_extended(mu, *mats):
    """True when assembly at gap mu should run in extended precision."""
    scale = 1.0
    for a in mats:
        scale *= np.linalg.norm(np.asarray(a, dtype=float))
    return mu < DEEP_ASSEMBLY_FACTOR * max(1.0, scale)


def _solve_square(mat, rhs):
    """LU solve with one mixed-precision refinement step and a singularity guard.

    mat and rhs may be extended precision (deep-tail assembly); the
    factorization always runs in f64 on the rounded system, and the
    single refinement residual is computed against the original data,
    which keeps the direction meaningful where the system's conditioning
    grows like the inverse gap.
    """
    extended = mat.dtype == np.longdouble
    mat64 = np.asarray(mat, dtype=float)
    rhs64 = np.asarray(rhs, dtype=float)
    try:
        lu, piv = scipy.linalg.lu_factor(mat64, check_finite=False)
        u0 = scipy.linalg.lu_solve((lu, piv), rhs64, check_finite=False)
        resid = np.asarray(
            rhs.astype(np.longdouble) - mat.astype(np.longdouble) @ u0,
            dtype=float,
        )
        corr = scipy.linalg.lu_solve((lu, piv), resid, check_finite=False)
        if extended:
            # keep the refined solution unrounded so deep-tail iterates
            # stay in extended precision
            u = u0.astype(np.longdouble) + corr.astype(np.longdouble)
        else:
            u = u0 + corr
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise SingularNewtonSystem(
            f"factorization failed: {e}", cond_estimate=np.linalg.cond(mat64)
        ) from e
    if not np.all(np.isfinite(u)):
        raise SingularNewtonSystem(
            "non-finite solution", cond_estimate=np.linalg.cond(mat64)
        )
    resid = float(np.linalg.norm(rhs64 - mat64 @ np.asarray(u, dtype=float)))
    if resid > 1e-6 * max(1.0, np.linalg.norm(rhs64)):
        raise SingularNewtonSystem(
            f"residual {resid:.3e} after refinement",
            cond_estimate=np.linalg.cond(mat64),
        )
    return u


@dataclass
class Direction:
    dX: np.ndarray
    dy: np.ndarray
    dY: np.ndarray
    dtau: float
    dkappa: float


def solve_direction(p, pt, sigma, rbar, sbar, gbar, mu=None, ysqrt=None):
    """Solve (E1)-(E5) at an interior point.

    mu defaults to the point's own normalized gap; the corrector passes
    the tracked iterate value instead so that sigma*mu hits its exact
    centering target.  ysqrt may carry a precomputed square-root pair of
    pt.Y, shared with the step-length measure.
    """
    n, m = p.n, p.m
    nt = svec_dim(n)
    if mu is None:
        mu = pt.mu
    if ysqrt is None:
        # precision decision keyed on the solve point's own gap: the
        # corrector solves at the predictor output, far below the
        # pre-predictor gap passed in mu
        if needs_extended(pt.mu, pt.X, pt.Y):
            ysqrt = ld_sqrt_pair(pt.Y)
        else:
            ysqrt = psd_sqrt(pt.Y, pd_tol=0.0)
    size = 2 * nt + m + 2
    ix_dx = slice(0, nt)
    ix_dy = slice(nt, nt + m)
    ix_dv = slice(nt + m, 2 * nt + m)
    ix_dtau = 2 * nt + m
    ix_dkap = 2 * nt + m + 1

    dt = ysqrt.sqrt.dtype
    mat = np.zeros((size, size), dtype=dt)
    rhs = np.zeros(size, dtype=dt)

    kxx, kxy = _complementarity_blocks(pt.X, ysqrt)
    mat[0:nt, ix_dx] = kxx
    mat[0:nt, ix_dv] = kxy
    g = ysqrt.sqrt @ pt.X @ ysqrt.sqrt
    g = (g + g.T) / 2.0
    rhs[0:nt] = svec(2.0 * (sigma * mu * np.eye(n) - g))

    row = nt
    mat[row, ix_dtau] = pt.kappa
    mat[row, ix_dkap] = pt.tau
    rhs[row] = sigma * mu - pt.tau * pt.kappa

    amat = p.amat
    mat[nt + 1:nt + 1 + m, ix_dx] = amat
    mat[nt + 1:nt + 1 + m, ix_dtau] = -p.b
    rhs[nt + 1:nt + 1 + m] = -np.asarray(rbar, dtype=float)

    r4 = slice(nt + 1 + m, 2 * nt + 1 + m)
    mat[r4, ix_dy] = amat.T
    mat[r4, ix_dv] = np.eye(nt)
    rhs[r4] = -svec(sbar)

    row = 2 * nt + m + 1
    mat[row, ix_dy] = -p.b
    mat[row, ix_dkap] = 1.0
    rhs[row] = -float(gbar)

    u = _solve_square(mat, rhs)
    return Direction(
        dX=smat(u[ix_dx]),
        dy=np.asarray(u[ix_dy], dtype=float),
        dY=smat(u[ix_dv]),
        dtau=float(u[ix_dtau]),
        dkappa=float(u[ix_dkap]),
    )


def solve_hat_direction(ops, hp, sigma, rbar, mu=None, ysqrt=None):
    """Solve the lifted pair of equations; returns (dXhat, dYhat)."""
    n1 = ops.n1
    nt1 = ops.ntilde1
    if mu is None:
        mu = hp.mu
    if ysqrt is None:
        if needs_extended(hp.mu, hp.Xhat, hp.Yhat):
            ysqrt = ld_sqrt_pair(hp.Yhat)
        else:
            ysqrt = psd_sqrt(hp.Yhat, pd_tol=0.0)
    dt = ysqrt.sqrt.dtype
    mat = np.zeros((2 * nt1, 2 * nt1), dtype=dt)
    rhs = np.zeros(2 * nt1, dtype=dt)

    kxx, kxy = _complementarity_blocks(hp.Xhat, ysqrt)
    mat[0:nt1, 0:nt1] = kxx
    mat[0:nt1, nt1:] = kxy
    g = ysqrt.sqrt @ hp.Xhat @ ysqrt.sqrt
    g = (g + g.T) / 2.0
    rhs[0:nt1] = svec(2.0 * (sigma * mu * np.eye(n1) - g))

    mat[nt1:, 0:nt1] = ops.amat
    mat[nt1:, nt1:] = ops.bmat
    rhs[nt1:] = -np.asarray(rbar, dtype=float)

    u = _solve_square(mat, rhs)
    return smat(u[:nt1]), smat(u[nt1:])


def delta_measure(pt, direction, mu=None, ysqrt=None):
    """Predictor second-order measure driving the guaranteed step length.

    delta = (1/mu) || blkdiag(Y,kappa)^1/2 blkdiag(dX,dtau)
                     blkdiag(dY,dkappa) blkdiag(Y,kappa)^-1/2 ||_F,
    evaluated blockwise.
    """
    if mu is None:
        mu = pt.mu
    if ysqrt is None:
        ysqrt = psd_sqrt(pt.Y, pd_tol=0.0)
    core = ysqrt.sqrt @ direction.dX @ direction.dY @ ysqrt.inv_sqrt
    scalar = direction.dtau * direction.dkappa
    return float(np.sqrt(np.linalg.norm(core) ** 2 + scalar**2) / mu)


def delta_measure_hat(hp, dxhat, dyhat, mu=None, ysqrt=None):
    """Lifted form of the predictor measure."""
    if mu is None:
        mu = hp.mu
    if ysqrt is None:
        ysqrt = psd_sqrt(hp.Yhat, pd_tol=0.0)
    core = ysqrt.sqrt @ dxhat @ dyhat @ ysqrt.inv_sqrt
    return float(np.linalg.norm(core) / mu)
