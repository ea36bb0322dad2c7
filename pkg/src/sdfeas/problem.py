"""Feasibility-instance data model, validation, LMI conversion, generation, file IO.

An instance asks for X >= 0 (positive semidefinite) with
Tr(A_i X) = b_i, i = 1..m.  Its dual asks for (y, Y >= 0) with
sum_i y_i A_i + Y = 0.  Instances are expected to satisfy

* rank{svec(A_1), ..., svec(A_m)} = m  (independent constraints), and
* b != 0  (otherwise the problem is trivially scaled).

The generator produces instances together with a strictly complementary
primal-dual witness, the regime in which the interior point driver is
expected to converge superlinearly.
"""

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import DegenerateLmi, GenerationFailed, NonZeroCost, ZeroRhs
from .symcore import as_symmetric, min_eigenvalue, smat, svec, svec_dim

RANK_DROP_TOL = 1e-10


def rank_by_qr(rows):
    """Rank of a stack of row vectors by column-pivoted QR.

    A pivot is kept while its magnitude exceeds RANK_DROP_TOL times the
    largest pivot.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size == 0:
        return 0
    r = scipy.linalg.qr(rows.T, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.sum(diag > RANK_DROP_TOL * diag[0]))


@dataclass
class Lsdfp:
    """Instance data: m symmetric constraint matrices and a right-hand side."""

    n: int
    m: int
    A: np.ndarray  # (m, n, n)
    b: np.ndarray  # (m,)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.A.shape != (self.m, self.n, self.n):
            raise ValueError(
                f"A has shape {self.A.shape}, expected {(self.m, self.n, self.n)}"
            )
        if self.b.shape != (self.m,):
            raise ValueError(f"b has shape {self.b.shape}, expected ({self.m},)")
        for i in range(self.m):
            as_symmetric(self.A[i])
        if self.n < 1 or self.m < 1:
            raise ValueError("need n >= 1 and m >= 1")

    @cached_property
    def amat(self):
        """Constraint matrix in packed coordinates: row i is svec(A_i)."""
        return np.stack([svec(self.A[i]) for i in range(self.m)])


@dataclass
class Witness:
    """Strictly complementary primal-dual solution pair with its eigenbasis.

    Xstar has rank ``partition_rank`` and the columns of Q diagonalize
    Xstar and Ystar simultaneously: the first ``partition_rank`` columns
    span range(Xstar), the rest span range(Ystar) = ker(Xstar).
    """

    Xstar: np.ndarray
    ystar: np.ndarray
    Ystar: np.ndarray
    partition_rank: int
    Q: np.ndarray

    def __post_init__(self):
        self.Xstar = as_symmetric(self.Xstar)
        self.Ystar = as_symmetric(self.Ystar)
        self.ystar = np.asarray(self.ystar, dtype=float)
        self.Q = np.asarray(self.Q, dtype=float)


@dataclass
class Lmi:
    """Data of the matrix inequality sum_j z_j B_j + B0 >= 0 in variables z."""

    l: int
    B0: np.ndarray
    Bs: np.ndarray  # (l, n, n)

    def __post_init__(self):
        self.B0 = as_symmetric(self.B0)
        self.Bs = np.asarray(self.Bs, dtype=float)
        n = self.B0.shape[0]
        if self.Bs.shape != (self.l, n, n):
            raise ValueError("coefficient matrices must match B0's dimension")
        for j in range(self.l):
            as_symmetric(self.Bs[j])


@dataclass
class ValidationReport:
    rank: int
    m: int
    b_nonzero: bool
    failures: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.failures


def validate(p):
    """Check constraint independence (rank m) and b != 0."""
    rank = rank_by_qr(p.amat)
    b_nonzero = bool(np.max(np.abs(p.b)) > 0.0)
    failures = []
    if rank != p.m:
        failures.append(f"constraint rank {rank} < m = {p.m}")
    if not b_nonzero:
        failures.append("right-hand side b is identically zero")
    return ValidationReport(rank=rank, m=p.m, b_nonzero=b_nonzero, failures=failures)


@dataclass
class RecoveryMap:
    """Maps a feasible matrix of the converted instance back to LMI variables."""

    B0: np.ndarray
    Bs: np.ndarray

    def recover(self, X):
        """Least-squares z with X ~ B0 + sum_j z_j B_j."""
        bmat = np.stack([svec(B) for B in self.Bs])
        z, *_ = np.linalg.lstsq(bmat.T, svec(X) - svec(self.B0), rcond=None)
        return z

    def reconstruct(self, z):
        return self.B0 + np.einsum("j,jkl->kl", np.asarray(z, dtype=float), self.Bs)


def from_lmi(lmi):
    """Convert a matrix inequality into an equivalent feasibility instance.

    The constraint matrices are an orthonormal basis (in packed
    coordinates) of the orthogonal complement of span{B_1..B_l}, and
    b_k = Tr(A_k B0).  Any X feasible for the result equals
    B0 + sum_j z_j B_j for recoverable z; X >= 0 then solves the LMI.
    """
    n = lmi.B0.shape[0]
    ntilde = svec_dim(n)
    bmat = np.stack([svec(B) for B in lmi.Bs])
    if rank_by_qr(bmat) != lmi.l:
        raise DegenerateLmi("coefficient matrices are linearly dependent")
    if lmi.l >= ntilde:
        raise DegenerateLmi("coefficient matrices span all of S^n")
    comp = scipy.linalg.null_space(bmat)  # (ntilde, ntilde - l), orthonormal
    m = comp.shape[1]
    A = np.stack([smat(comp[:, k]) for k in range(m)])
    b = comp.T @ svec(lmi.B0)
    if np.max(np.abs(b)) <= 1e-12 * max(1.0, np.linalg.norm(lmi.B0)):
        raise ZeroRhs("B0 lies in the span of the coefficient matrices")
    return Lsdfp(n=n, m=m, A=A, b=b), RecoveryMap(B0=lmi.B0.copy(), Bs=lmi.Bs.copy())


def _random_orthogonal(n, rng):
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def generate(n, m, r, seed, retries=50, margin=1e-3):
    """Random instance with a known strictly complementary witness.

    Construction: draw an orthogonal Q and split its columns into a
    rank-r primal block and a rank-(n-r) dual block with eigenvalues in
    (0.5, 2); pick y* with y*_1 bounded away from zero and random
    A_2..A_m, then solve for A_1 so that sum_i y*_i A_i = -Y*; finally
    b_i = Tr(A_i X*).  Candidates are rejected until the constraints
    have full rank, b != 0, and a strictly feasible dual point exists
    (verified by the phase-one search).
    """
    if not (1 <= r <= n - 1):
        raise ValueError("need 1 <= r <= n - 1")
    if not (2 <= m <= svec_dim(n)):
        raise ValueError("need 2 <= m <= n(n+1)/2")
    from .phase1 import find_dual_interior
    from .errors import Inconclusive, NotStrictlyFeasible

    rng = np.random.default_rng(seed)
    for _ in range(retries):
        q = _random_orthogonal(n, rng)
        lam_p = rng.uniform(0.5, 2.0, size=r)
        lam_d = rng.uniform(0.5, 2.0, size=n - r)
        xstar = (q[:, :r] * lam_p) @ q[:, :r].T
        ystar_mat = (q[:, r:] * lam_d) @ q[:, r:].T
        xstar = (xstar + xstar.T) / 2.0
        ystar_mat = (ystar_mat + ystar_mat.T) / 2.0

        yvec = rng.standard_normal(m)
        while abs(yvec[0]) < 0.1:
            yvec = rng.standard_normal(m)
        A = np.zeros((m, n, n))
        for i in range(1, m):
            g = rng.standard_normal((n, n))
            A[i] = (g + g.T) / 2.0
        A[0] = -(ystar_mat + np.einsum("i,ijk->jk", yvec[1:], A[1:])) / yvec[0]
        A[0] = (A[0] + A[0].T) / 2.0
        b = np.einsum("ijk,jk->i", A, xstar)

        try:
            p = Lsdfp(n=n, m=m, A=A, b=b)
        except ValueError:
            continue
        if not validate(p).valid:
            continue
        if np.max(np.abs(b)) <= 1e-9:
            continue
        try:
            find_dual_interior(p, margin=margin)
        except (NotStrictlyFeasible, Inconclusive):
            continue
        w = Witness(
            Xstar=xstar, ystar=yvec, Ystar=ystar_mat, partition_rank=r, Q=q
        )
        return p, w
    raise GenerationFailed(
        f"no instance with a strictly feasible dual in {retries} attempts "
        f"(n={n}, m={m}, r={r}, seed={seed})"
    )


def witness_defects(p, w):
    """Max violation of each witness identity, for validation and tests."""
    feas = np.max(np.abs(np.einsum("ijk,jk->i", p.A, w.Xstar) - p.b))
    dual = np.max(np.abs(np.einsum("i,ijk->jk", w.ystar, p.A) + w.Ystar))
    comp = np.max(np.abs(w.Xstar @ w.Ystar))
    strict = -min_eigenvalue(w.Xstar + w.Ystar)  # negative means fine
    ortho = abs(p.b @ w.ystar)
    return {
        "primal_feasibility": float(feas),
        "dual_feasibility": float(dual),
        "complementarity": float(comp),
        "strict_complementarity_slack": float(strict),
        "b_dot_ystar": float(ortho),
    }


# ---------------------------------------------------------------------------
# file formats


def problem_to_dict(p):
    return {
        "n": p.n,
        "m": p.m,
        "A": [p.A[i].tolist() for i in range(p.m)],
        "b": p.b.tolist(),
    }


def problem_from_dict(d):
    return Lsdfp(
        n=int(d["n"]),
        m=int(d["m"]),
        A=np.array(d["A"], dtype=float),
        b=np.array(d["b"], dtype=float),
    )


def save_problem(path, p):
    with open(path, "w") as f:
        json.dump(problem_to_dict(p), f, indent=1)
        f.write("\n")


def witness_to_dict(w):
    return {
        "Xstar": w.Xstar.tolist(),
        "ystar": w.ystar.tolist(),
        "Ystar": w.Ystar.tolist(),
        "partition_rank": int(w.partition_rank),
        "Q": w.Q.tolist(),
    }


def witness_from_dict(d):
    return Witness(
        Xstar=np.array(d["Xstar"], dtype=float),
        ystar=np.array(d["ystar"], dtype=float),
        Ystar=np.array(d["Ystar"], dtype=float),
        partition_rank=int(d["partition_rank"]),
        Q=np.array(d["Q"], dtype=float),
    )


def save_witness(path, w):
    with open(path, "w") as f:
        json.dump(witness_to_dict(w), f, indent=1)
        f.write("\n")


def load_witness(path):
    with open(path) as f:
        return witness_from_dict(json.load(f))


def load_sdpa(path):
    """Import an SDPA sparse file restricted to a single dense block.

    The objective vector maps to b and the constraint matrices to A_i.
    The cost matrix (matrix number 0) must be identically zero, since
    only feasibility problems are representable here.
    """
    tokens_per_line = []
    with open(path) as f:
        for line in f:
            stripped = line.strip()
            if not stripped or stripped[0] in '"*':
                continue
            for ch in ",(){}":
                stripped = stripped.replace(ch, " ")
            tokens_per_line.append(stripped.split())
    if len(tokens_per_line) < 4:
        raise ValueError("truncated SDPA file")
    m = int(tokens_per_line[0][0])
    nblocks = int(tokens_per_line[1][0])
    if nblocks != 1:
        raise ValueError(f"only single-block SDPA files supported, got {nblocks}")
    size = int(tokens_per_line[2][0])
    if size <= 0:
        raise ValueError("diagonal blocks are not supported")
    b = np.array([float(t) for t in tokens_per_line[3]], dtype=float)
    if b.shape != (m,):
        raise ValueError(f"objective vector has {b.size} entries, expected {m}")
    A = np.zeros((m, size, size))
    for tok in tokens_per_line[4:]:
        matno, blkno, i, j, val = (
            int(tok[0]),
            int(tok[1]),
            int(tok[2]),
            int(tok[3]),
            float(tok[4]),
        )
        if blkno != 1:
            raise ValueError(f"entry references block {blkno} in a 1-block file")
        if matno == 0:
            if val != 0.0:
                raise NonZeroCost(
                    "cost matrix is nonzero; only feasibility problems import"
                )
            continue
        A[matno - 1, i - 1, j - 1] = val
        A[matno - 1, j - 1, i - 1] = val
    return Lsdfp(n=size, m=m, A=A, b=b)


def load_problem(path, fmt=None):
    """Load a problem from JSON or SDPA sparse format (by extension if fmt=None)."""
    if fmt is None:
        fmt = "sdpa" if str(path).endswith((".dat-s", ".sdpa")) else "json"
    if fmt == "sdpa":
        return load_sdpa(path)
    with open(path) as f:
        return problem_from_dict(json.load(f))
