"""Symmetric-matrix kernel: vectorization, eigen-based cone operations.

Every other module builds on the three primitives here:

* ``svec`` / ``smat``, the isometric identification of S^n with
  R^{n(n+1)/2}.  Off-diagonal entries are scaled by sqrt(2) so that
  ``Tr(X @ Y) == svec(X) @ svec(Y)`` and Frobenius norms map to
  Euclidean norms.  The ordering is column-major over the lower
  triangle: (X11, r2*X21, ..., r2*Xn1, X22, r2*X32, ..., Xnn).
* a cyclic Jacobi eigensolver for dense symmetric matrices, used for
  all positive-definiteness tests and matrix square roots.  Jacobi is
  unconditionally stable at the matrix sizes this package targets
  (n <= 50) and, being a fixed sequence of rotations, is deterministic.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotPositiveDefinite

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


SQRT2 = np.sqrt(2.0)

# Off-diagonal mass threshold for Jacobi convergence, relative to ||X||_F.
JACOBI_TOL = 1e-14


def as_symmetric(a):
    """Validate and return a square, exactly symmetric float array.

    Floating dtypes are preserved (extended precision flows through the
    deep-tail paths); anything else is cast to float64.
    """
    a = np.asarray(a)
    if not np.issubdtype(a.dtype, np.floating):
        a = a.astype(float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix dimension must be at least 1")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not exactly symmetric")
    return a


def sym(a):
    """Exactly symmetric part (a + a.T)/2 of a square array."""
    return (a + a.T) / 2.0


@lru_cache(maxsize=None)
def _tri_indices(n):
    """Index arrays and sqrt(2) weights for column-major lower-triangle packing."""
    rows = []
    cols = []
    for j in range(n):
        for i in range(j, n):
            rows.append(i)
            cols.append(j)
    rows = np.array(rows, dtype=np.intp)
    cols = np.array(cols, dtype=np.intp)
    w = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, w


def svec_dim(n):
    """Packed dimension n(n+1)/2."""
    return n * (n + 1) // 2


def dim_from_svec(dim):
    """Recover n from a packed dimension, or raise if dim is not triangular."""
    n = int(round((np.sqrt(8.0 * dim + 1.0) - 1.0) / 2.0))
    if n * (n + 1) // 2 != dim:
        raise ValueError(f"length {dim} is not a triangular number")
    return n


def svec(x):
    """Pack a symmetric matrix into R^{n(n+1)/2} with sqrt(2)-scaled off-diagonals."""
    x = np.asarray(x)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(float)
    n = x.shape[0]
    rows, cols, w = _tri_indices(n)
    return x[rows, cols] * w


def smat(v):
    """Inverse of :func:`svec`.

    Exact inverse for entries whose sqrt(2)-scaling is exactly
    representable (zeros, diagonals, signed powers of two); within one
    ulp per entry otherwise.
    """
    v = np.asarray(v)
    if not np.issubdtype(v.dtype, np.floating):
        v = v.astype(float)
    if v.ndim != 1:
        raise ValueError("expected a 1-d packed vector")
    n = dim_from_svec(v.shape[0])
    rows, cols, w = _tri_indices(n)
    x = np.zeros((n, n), dtype=v.dtype)
    x[rows, cols] = v / w
    x[cols, rows] = x[rows, cols]
    return x


def svec_basis(n):
    """All smat(e_k) basis matrices stacked into an (ntilde, n, n) array."""
    ntilde = svec_dim(n)
    basis = np.zeros((ntilde, n, n))
    rows, cols, w = _tri_indices(n)
    for k in range(ntilde):
        i, j = rows[k], cols[k]
        basis[k, i, j] = 1.0 / w[k]
        basis[k, j, i] = 1.0 / w[k]
    return basis


@njit(cache=True)
def _jacobi_sweeps(a, v, tol):  # pragma: no cover - exercised via jacobi_eigh
    n = a.shape[0]
    for _ in range(60):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        if np.sqrt(off) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = c * aip - s * aiq
                        a[p, i] = a[i, p]
                        a[i, q] = c * aiq + s * aip
                        a[q, i] = a[i, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip - s * viq
                    v[i, q] = c * viq + s * vip


def jacobi_eigh(x):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V) with eigenvalues ascending and V orthogonal,
    x = V @ diag(w) @ V.T.  Sweeps stop once the off-diagonal mass
    drops below JACOBI_TOL * ||x||_F.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n == 1:
        return x[0, :1].copy(), np.ones((1, 1))
    a = np.array(x, dtype=np.float64, order="C", copy=True)
    v = np.eye(n)
    tol = JACOBI_TOL * np.linalg.norm(x)
    _jacobi_sweeps(a, v, tol)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def jacobi_eigh_ld(x):
    """Cyclic Jacobi eigendecomposition carried out in extended precision.

    Used by the deep-tail paths, where quantities of size mu must be
    formed from order-one data without drowning in f64 cancellation.
    """
    x = np.asarray(x)
    n = x.shape[0]
    a = x.astype(np.longdouble)
    if n == 1:
        return a[0, :1].copy(), np.ones((1, 1), dtype=np.longdouble)
    v = np.eye(n, dtype=np.longdouble)
    # relative per-entry criterion: keeps tiny eigenvalues of definite
    # matrices accurate in a relative sense, which the deep tail needs
    tol = np.longdouble(1e-18)
    for _ in range(60):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                app, aqq = a[p, p], a[q, q]
                gate = tol * np.sqrt(abs(app * aqq))
                if abs(apq) <= gate:
                    continue
                rotated = True
                diff = aqq - app
                if abs(apq) * np.longdouble(1e20) < abs(diff):
                    t = apq / diff  # small-angle limit, avoids theta overflow
                else:
                    theta = diff / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                    else:
                        t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = c * colq + s * colp
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = c * rowq + s * rowp
                a[p, q] = 0.0
                a[q, p] = 0.0
                colp = v[:, p].copy()
                colq = v[:, q].copy()
                v[:, p] = c * colp - s * colq
                v[:, q] = c * colq + s * colp
        if not rotated:
            break
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def min_eigenvalue(x):
    """Smallest eigenvalue of a symmetric matrix (cone-membership predicate)."""
    w, _ = jacobi_eigh(x)
    return w[0]


def is_positive_definite(x, tol=0.0):
    """True when the smallest eigenvalue exceeds tol."""
    return min_eigenvalue(x) > tol


@dataclass(frozen=True)
class SqrtPair:
    """Matrix square root of a positive definite Y together with its inverse."""

    sqrt: np.ndarray
    inv_sqrt: np.ndarray
    eigvals: np.ndarray


def psd_sqrt(y, pd_tol=None):
    """Symmetric square root S of a positive definite matrix, with S^-1.

    Raises NotPositiveDefinite when the smallest eigenvalue is at or
    below pd_tol (default 1e-12 * (1 + ||Y||_F), the working
    definiteness margin).
    """
    y = np.asarray(y, dtype=float)
    if pd_tol is None:
        pd_tol = 1e-12 * (1.0 + np.linalg.norm(y))
    w, v = jacobi_eigh(y)
    if w[0] <= pd_tol:
        raise NotPositiveDefinite(
            f"min eigenvalue {w[0]:.3e} <= tolerance {pd_tol:.3e}"
        )
    rw = np.sqrt(w)
    s = sym((v * rw) @ v.T)
    s_inv = sym((v / rw) @ v.T)
    return SqrtPair(sqrt=s, inv_sqrt=s_inv, eigvals=w)


def frobenius(x):
    """Frobenius norm."""
    return np.linalg.norm(np.asarray(x))
