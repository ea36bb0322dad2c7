"""Complementarity reformulation of the homogeneous model.

The homogeneous equations in (X, tau, Y, kappa) are rewritten as a
monotone semidefinite linear complementarity problem over S^{n+1}:

    Ahat(Xhat) + Bhat(Yhat) = 0,   Xhat Yhat = 0,   Xhat, Yhat >= 0.

Row layout of the two operators (1-based, ntilde1 = (n+1)(n+2)/2 rows):

    Ahat rows 1..m        blkdiag(A_i, -b_i)
    Ahat rows m+1..m+n    E^{i,n+1}  (pins the off-diagonal block of Xhat)
    Ahat rows m+n+1..     zero
    Bhat rows 1..m+n      zero
    Bhat rows m+n+1..     blkdiag(B_j, d_j)

where [d_1; svec(B_1)] is orthogonal to every [-b_i; svec(A_i)] and
svec(B_2), ... span the orthogonal complement of span{svec(A_i)}.
Iterates of the driver correspond to block-diagonal pairs
(blkdiag(X, tau), blkdiag(Y, kappa)) with matching normalized gaps.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import CannotSatisfyB122, NotIterateForm
from .problem import rank_by_qr, validate
from .symcore import smat, svec, svec_dim


@dataclass
class OrthBasis:
    """Orthogonal-complement data (d1, B1, B_2..): see module docstring."""

    d1: float
    B1: np.ndarray
    Bs: np.ndarray  # (ntilde - m, n, n)


def build_orth_basis(p):
    """Deterministic basis choice: d1 = 1, svec(B1) the least-norm solution
    of A svec(B1) = b, and an orthonormal null-space basis for the rest."""
    report = validate(p)
    if not report.valid:
        raise ValueError(f"invalid instance: {'; '.join(report.failures)}")
    amat = p.amat
    x, *_ = np.linalg.lstsq(amat, p.b, rcond=None)
    b1 = smat(x)
    null = scipy.linalg.null_space(amat)
    bs = np.stack([smat(null[:, k]) for k in range(null.shape[1])]) if null.size \
        else np.zeros((0, p.n, p.n))
    return OrthBasis(d1=1.0, B1=b1, Bs=bs)


def _blkdiag(block, corner):
    n = block.shape[0]
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = block
    out[n, n] = corner
    return out


@dataclass
class SdlcpOps:
    """Materialized operator rows over S^{n+1} together with q = 0."""

    n: int
    m: int
    rows_A: np.ndarray  # (ntilde1, n+1, n+1)
    rows_B: np.ndarray  # (ntilde1, n+1, n+1)

    @property
    def n1(self):
        return self.n + 1

    @property
    def ntilde1(self):
        return svec_dim(self.n + 1)

    @property
    def q(self):
        return np.zeros(self.ntilde1)

    @cached_property
    def amat(self):
        """Ahat as an (ntilde1, ntilde1) matrix acting on svec(Xhat)."""
        return np.stack([svec(self.rows_A[i]) for i in range(self.ntilde1)])

    @cached_property
    def bmat(self):
        return np.stack([svec(self.rows_B[i]) for i in range(self.ntilde1)])


def build_ops(p, basis):
    """Assemble the operator rows from instance data and an OrthBasis."""
    n, m = p.n, p.m
    n1 = n + 1
    nt1 = svec_dim(n1)
    rows_a = np.zeros((nt1, n1, n1))
    rows_b = np.zeros((nt1, n1, n1))
    for i in range(m):
        rows_a[i] = _blkdiag(p.A[i], -p.b[i])
    for i in range(n):
        rows_a[m + i, i, n] = 0.5
        rows_a[m + i, n, i] = 0.5
    dvec = np.zeros(1 + basis.Bs.shape[0])
    dvec[0] = basis.d1
    bmats = np.concatenate([basis.B1[None, :, :], basis.Bs], axis=0)
    for j in range(bmats.shape[0]):
        rows_b[m + n + j] = _blkdiag(bmats[j], dvec[j])
    return SdlcpOps(n=n, m=m, rows_A=rows_a, rows_B=rows_b)


def apply_Ahat(ops, xhat):
    """Entry-wise traces of the Ahat rows against a symmetric (n+1) matrix."""
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape != (ops.n1, ops.n1):
        raise ValueError(f"expected shape {(ops.n1, ops.n1)}, got {xhat.shape}")
    return np.einsum("ijk,jk->i", ops.rows_A, xhat)


def apply_Bhat(ops, yhat):
    yhat = np.asarray(yhat, dtype=float)
    if yhat.shape != (ops.n1, ops.n1):
        raise ValueError(f"expected shape {(ops.n1, ops.n1)}, got {yhat.shape}")
    return np.einsum("ijk,jk->i", ops.rows_B, yhat)


@dataclass
class HatPoint:
    """Lifted iterate pair over S^{n+1}."""

    Xhat: np.ndarray
    Yhat: np.ndarray

    def __post_init__(self):
        self.Xhat = np.asarray(self.Xhat, dtype=float)
        self.Yhat = np.asarray(self.Yhat, dtype=float)

    @property
    def n1(self):
        return self.Xhat.shape[0]

    @property
    def mu(self):
        return float(np.sum(self.Xhat * self.Yhat)) / self.n1


def embed_point(pt):
    """Lift (X, y, Y, tau, kappa) to the block-diagonal pair over S^{n+1}."""
    return HatPoint(Xhat=_blkdiag(pt.X, pt.tau), Yhat=_blkdiag(pt.Y, pt.kappa))


def extract_point(hp, tol=1e-8):
    """Recover (X, Y, tau, kappa) from an iterate-form lifted pair.

    Raises NotIterateForm when either matrix has a coupling block larger
    than tol (relative to the matrix norm, floored at 1).
    """
    n = hp.n1 - 1
    for name, mat in (("Xhat", hp.Xhat), ("Yhat", hp.Yhat)):
        off = np.max(np.abs(mat[:n, n])) if n else 0.0
        if off > tol * max(1.0, np.linalg.norm(mat)):
            raise NotIterateForm(f"{name} has coupling block of size {off:.3e}")
    return hp.Xhat[:n, :n].copy(), hp.Yhat[:n, :n].copy(), hp.Xhat[n, n], hp.Yhat[n, n]


@dataclass
class Assumption32Report:
    monotone_max_abs_trace: float
    monotone_scale: float
    monotone_ok: bool
    existence_ok: bool
    rank: int
    ntilde1: int
    surjective_ok: bool

    @property
    def passed(self):
        return self.monotone_ok and self.existence_ok and self.surjective_ok


def check_assumption_3_2(ops, basis, trials=20, seed=0, tol=1e-10):
    """Numerically execute the structural facts behind the reformulation.

    (a) every pair with Ahat(Xhat) + Bhat(Yhat) = 0, sampled from the
        null space of [Ahat Bhat], has Tr(Xhat Yhat) = 0 up to roundoff
        (monotonicity holds with equality);
    (b) the zero pair solves the system (existence);
    (c) [Ahat Bhat] has full row rank ntilde1 (surjectivity).
    """
    nt1 = ops.ntilde1
    stack = np.concatenate([ops.amat, ops.bmat], axis=1)
    null = scipy.linalg.null_space(stack)
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_scale = 1.0
    for _ in range(trials):
        u = null @ rng.standard_normal(null.shape[1])
        xh = smat(u[:nt1])
        yh = smat(u[nt1:])
        tr = float(np.sum(xh * yh))
        scale = max(1.0, np.linalg.norm(xh) * np.linalg.norm(yh))
        if abs(tr) / scale > worst / worst_scale:
            worst, worst_scale = abs(tr), scale
    monotone_ok = worst <= tol * worst_scale
    existence_ok = bool(
        np.max(np.abs(apply_Ahat(ops, np.zeros((ops.n1, ops.n1)))
                      + apply_Bhat(ops, np.zeros((ops.n1, ops.n1))))) == 0.0
    )
    rank = rank_by_qr(stack)
    surjective_ok = rank == nt1
    return Assumption32Report(
        monotone_max_abs_trace=worst,
        monotone_scale=worst_scale,
        monotone_ok=monotone_ok,
        existence_ok=existence_ok,
        rank=rank,
        ntilde1=nt1,
        surjective_ok=surjective_ok,
    )


def check_condition_52(ops, yhat0, tol=1e-10):
    """Warm-start test: Bhat(Yhat0) must vanish except possibly entry m+n+1.

    A start built from a dual-feasible (y0, Y0) has svec(Y0) inside
    span{svec(A_i)}, which every null-space row annihilates, so only the
    B1 row can respond.  Generic cold starts fail this.
    """
    v = apply_Bhat(ops, yhat0)
    scale = np.linalg.norm(yhat0)
    mask = np.ones(ops.ntilde1, dtype=bool)
    mask[ops.m + ops.n] = False
    return bool(np.max(np.abs(v[mask]), initial=0.0) <= tol * scale)


def check_B1_22(basis, witness, seed=0, tol=1e-10, retries=20):
    """Test (and if needed repair) the nonzero-block condition on B1.

    In the eigenbasis of the witness, the block of B1 on ker(Xstar) must
    be nonzero.  If it vanishes, B1 is mixed with random small multiples
    of the null-space matrices, which preserves every basis invariant.
    Returns (original_passed, possibly_adjusted_basis).
    """
    r = witness.partition_rank
    n = basis.B1.shape[0]
    if r >= n:
        return True, basis
    kernel = witness.Q[:, r:]

    def block_norm(b1):
        return np.linalg.norm(kernel.T @ b1 @ kernel)

    if block_norm(basis.B1) > tol:
        return True, basis
    if basis.Bs.shape[0] == 0:
        raise CannotSatisfyB122("no null-space matrices available for repair")
    rng = np.random.default_rng(seed)
    scale = 0.01 * max(1.0, np.linalg.norm(basis.B1))
    for _ in range(retries):
        c = rng.standard_normal(basis.Bs.shape[0]) * scale
        b1_new = basis.B1 + np.einsum("j,jkl->kl", c, basis.Bs)
        if block_norm(b1_new) > tol:
            return False, OrthBasis(d1=basis.d1, B1=(b1_new + b1_new.T) / 2.0,
                                    Bs=basis.Bs)
    raise CannotSatisfyB122(f"adjustment failed after {retries} attempts")


def dump_ops_json(ops, path):
    """Debug dump of the operator rows in packed coordinates."""
    payload = {
        "n": ops.n,
        "m": ops.m,
        "ntilde1": ops.ntilde1,
        "rows_A_svec": ops.amat.tolist(),
        "rows_B_svec": ops.bmat.tolist(),
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
