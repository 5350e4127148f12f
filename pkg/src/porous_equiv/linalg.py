"""Self-contained dense linear-algebra kernels.

Everything downstream (realization analysis, the star/chain transforms, the
simulator) runs on the small dense kernels in this module: a cyclic Jacobi
eigensolver for symmetric matrices, the Lanczos three-term recurrence, an
upper Cholesky factorization, singular values by one-sided Jacobi, and LU
based solve/det.  Matrices are plain float64 ``numpy`` arrays in row-major
order; every kernel validates shape and finiteness on entry.

The kernels favour robustness on small (n <= a few hundred) matrices over
large-scale performance; none of them allocates beyond O(n^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    LanczosBreakdown,
    NoConvergenceError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    SingularMatrixError,
)

#: Relative symmetry tolerance for inputs declared symmetric.
SYM_TOL = 1e-10
#: Jacobi eigensolver: stop when the off-diagonal Frobenius norm falls below
#: this fraction of the full Frobenius norm.
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
#: Lanczos residual threshold (relative to the largest matrix entry) below
#: which the recurrence is declared broken down.
BREAKDOWN_TOL = 1e-10
#: Cholesky pivot threshold, relative to the largest matrix entry.
CHOLESKY_PIVOT_TOL = 1e-13
#: LU pivot threshold, relative to the largest matrix entry.
SOLVE_PIVOT_TOL = 1e-13

_EPS = float(np.finfo(float).eps)


def as_matrix(z, square: bool = False) -> np.ndarray:
    """Coerce to a finite float64 2-D array (a fresh copy)."""
    a = np.array(z, dtype=float, order="C")
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def max_abs(z) -> float:
    """Largest entry magnitude; 0.0 for an empty array."""
    a = np.asarray(z, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _symmetric_input(z, what: str) -> np.ndarray:
    a = as_matrix(z, square=True)
    dev = max_abs(a - a.T)
    if dev > SYM_TOL * max(1.0, max_abs(a)):
        raise NotSymmetricError(
            f"{what}: input deviates from symmetry by {dev:.3e}"
        )
    return 0.5 * (a + a.T)


def sym_eigen(s, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with eigenvalues ascending and orthonormal
    eigenvectors in the columns of ``vectors``, so that
    ``s @ vectors[:, i] == values[i] * vectors[:, i]``.

    Raises:
        NotSymmetricError: input is not symmetric within ``SYM_TOL``.
        NoConvergenceError: off-diagonal mass did not vanish in
            ``max_sweeps`` cyclic sweeps.
    """
    a = _symmetric_input(s, "sym_eigen")
    n = a.shape[0]
    v = np.eye(n)
    if n <= 1:
        return np.diag(a).copy(), v

    fro = math.sqrt(float(np.sum(a * a)))
    if fro == 0.0:
        return np.zeros(n), v
    target = JACOBI_TOL * fro

    def off_norm(mat):
        # summed directly: the difference total^2 - diag^2 cancels
        # catastrophically once the off-diagonal part is small
        off_part = mat.copy()
        np.fill_diagonal(off_part, 0.0)
        return math.sqrt(float(np.sum(off_part * off_part)))

    for _ in range(max_sweeps):
        if off_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-3 * target / n:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(1.0 + theta * theta)
                )
                c = 1.0 / math.sqrt(1.0 + t * t)
                sn = t * c
                # two-sided rotation on rows/columns p and q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - sn * aq
                a[:, q] = sn * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - sn * aq
                a[q, :] = sn * ap + c * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq
    else:
        raise NoConvergenceError(
            f"Jacobi eigensolver did not converge in {max_sweeps} sweeps"
        )

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


@dataclass(frozen=True)
class LanczosResult:
    """Orthonormal basis and tridiagonal coefficients from the recurrence.

    ``q`` holds the basis vectors in its columns, ``alpha`` the diagonal and
    ``beta`` the (positive) sub/super-diagonal of ``q.T @ s @ q``.
    """

    q: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    steps_completed: int

    def tridiagonal(self) -> np.ndarray:
        t = np.diag(self.alpha)
        if self.beta.size:
            t += np.diag(self.beta, 1) + np.diag(self.beta, -1)
        return t


def lanczos(s, q1, breakdown_tol: float | None = None,
            reorthogonalize: bool | None = None) -> LanczosResult:
    """Tridiagonalize a symmetric matrix by the Lanczos recurrence.

    Starting from the unit vector ``q1``, builds orthonormal vectors
    ``q_1, q_2, ...`` satisfying

        s q_k = beta_{k-1} q_{k-1} + alpha_k q_k + beta_k q_{k+1}

    and completes all ``m`` steps exactly when the Krylov space of
    ``(s, q1)`` has full dimension.  A residual norm at or below
    ``breakdown_tol`` before the last step raises :class:`LanczosBreakdown`,
    which for the realizations built here signals a non-minimal input.

    ``reorthogonalize`` defaults to full reorthogonalization for
    m > ``REORTHOGONALIZE_ABOVE`` only; loss of orthogonality is negligible
    for the short recurrences used by the chain transform.
    """
    a = _symmetric_input(s, "lanczos")
    m = a.shape[0]
    if m == 0:
        raise ValueError("lanczos requires a non-empty matrix")
    start = np.asarray(q1, dtype=float).reshape(m)
    norm = float(np.linalg.norm(start))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"q1 must have unit norm, got {norm!r}")
    if reorthogonalize is None:
        reorthogonalize = m > REORTHOGONALIZE_ABOVE
    tol = BREAKDOWN_TOL * max_abs(a) if breakdown_tol is None else breakdown_tol

    q = np.zeros((m, m))
    alpha = np.zeros(m)
    beta = np.zeros(max(m - 1, 0))
    qk = start
    q_prev = np.zeros(m)
    b_prev = 0.0
    for k in range(m):
        q[:, k] = qk
        sq = a @ qk
        alpha[k] = float(qk @ sq)
        if k == m - 1:
            break
        r = sq - alpha[k] * qk - b_prev * q_prev
        if reorthogonalize:
            basis = q[:, : k + 1]
            r = r - basis @ (basis.T @ r)
        b = float(np.linalg.norm(r))
        if b <= tol:
            raise LanczosBreakdown(step=k + 1, residual_norm=b)
        beta[k] = b
        q_prev, qk, b_prev = qk, r / b, b
    return LanczosResult(q=q, alpha=alpha, beta=beta, steps_completed=m)


def cholesky_upper(s, pivot_tol: float | None = None) -> np.ndarray:
    """Upper-triangular Cholesky factor: ``u.T @ u == s``, diag(u) > 0.

    The factor with positive diagonal is unique for a symmetric positive
    definite input.  Raises :class:`NotPositiveDefiniteError` at the first
    pivot at or below ``pivot_tol`` (default ``CHOLESKY_PIVOT_TOL`` relative
    to the largest entry).
    """
    a = _symmetric_input(s, "cholesky_upper")
    n = a.shape[0]
    tol = CHOLESKY_PIVOT_TOL * max_abs(a) if pivot_tol is None else pivot_tol
    u = np.zeros((n, n))
    for i in range(n):
        d = a[i, i] - float(u[:i, i] @ u[:i, i])
        if d <= tol:
            raise NotPositiveDefiniteError(pivot_index=i, pivot_value=d)
        u[i, i] = math.sqrt(d)
        if i + 1 < n:
            u[i, i + 1:] = (a[i, i + 1:] - u[:i, i] @ u[:i, i + 1:]) / u[i, i]
    return u


def singular_values(z, max_sweeps: int = 60) -> np.ndarray:
    """Singular values (descending) by one-sided Jacobi column rotations."""
    a = as_matrix(z)
    if a.size == 0:
        return np.zeros(min(a.shape))
    if a.shape[0] < a.shape[1]:
        a = a.T.copy()
    n = a.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                x = a[:, p]
                y = a[:, q]
                alpha = float(x @ x)
                beta = float(y @ y)
                gamma = float(x @ y)
                limit = math.sqrt(alpha * beta)
                if limit == 0.0 or abs(gamma) <= 1e-15 * limit:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (
                    abs(zeta) + math.sqrt(1.0 + zeta * zeta)
                )
                c = 1.0 / math.sqrt(1.0 + t * t)
                sn = t * c
                xp = c * x - sn * y
                a[:, q] = sn * x + c * y
                a[:, p] = xp
        if not rotated:
            break
    sv = np.sqrt(np.sum(a * a, axis=0))
    return np.sort(sv)[::-1]


def numerical_rank(z, tol: float | None = None) -> int:
    """Rank as the number of singular values above the spectral threshold.

    The default threshold is ``max(rows, cols) * eps * sigma_max``; pass
    ``tol`` to override (rank decisions for controllability can be audited
    against the returned singular values of :func:`singular_values`).
    """
    a = as_matrix(z)
    if a.size == 0:
        return 0
    sv = singular_values(a)
    if tol is None:
        tol = max(a.shape) * _EPS * float(sv[0])
    return int(np.sum(sv > tol))


def _lu_decompose(z, pivot_tol: float | None):
    a = as_matrix(z, square=True)
    n = a.shape[0]
    tol = SOLVE_PIVOT_TOL * max_abs(a) if pivot_tol is None else pivot_tol
    perm = np.arange(n)
    sign = 1.0
    for col in range(n):
        rel = int(np.argmax(np.abs(a[col:, col])))
        piv = col + rel
        if abs(a[piv, col]) < tol or a[piv, col] == 0.0:
            raise SingularMatrixError(
                f"pivot {abs(a[piv, col]):.3e} below threshold at column {col}"
            )
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            perm[[col, piv]] = perm[[piv, col]]
            sign = -sign
        a[col + 1:, col] /= a[col, col]
        a[col + 1:, col + 1:] -= np.outer(a[col + 1:, col], a[col, col + 1:])
    return a, perm, sign


def solve(z, rhs, pivot_tol: float | None = None) -> np.ndarray:
    """Solve ``z @ x = rhs`` by LU with partial pivoting.

    ``rhs`` may be a vector or a matrix; the result has the same shape.
    Raises :class:`SingularMatrixError` when a pivot falls below
    ``SOLVE_PIVOT_TOL`` relative to the largest entry of ``z``.
    """
    lu, perm, _ = _lu_decompose(z, pivot_tol)
    n = lu.shape[0]
    b = np.asarray(rhs, dtype=float)
    vector = b.ndim == 1
    b = b.reshape(n, -1)[perm].astype(float)
    for col in range(n):  # forward: L y = P b
        b[col + 1:] -= np.outer(lu[col + 1:, col], b[col])
    for col in range(n - 1, -1, -1):  # backward: U x = y
        b[col] /= lu[col, col]
        b[:col] -= np.outer(lu[:col, col], b[col])
    return b[:, 0] if vector else b


def det(z) -> float:
    """Determinant via LU with partial pivoting (0.0 on exact singularity)."""
    try:
        lu, _, sign = _lu_decompose(z, pivot_tol=0.0)
    except SingularMatrixError:
        return 0.0
    return float(sign * np.prod(np.diag(lu)))


def solve_triangular(t, rhs, lower: bool = False) -> np.ndarray:
    """Back/forward substitution with a triangular matrix."""
    a = as_matrix(t, square=True)
    n = a.shape[0]
    b = np.asarray(rhs, dtype=float)
    vector = b.ndim == 1
    b = b.reshape(n, -1).astype(float)
    tol = SOLVE_PIVOT_TOL * max_abs(a)
    rows = range(n) if lower else range(n - 1, -1, -1)
    for i in rows:
        if abs(a[i, i]) <= tol:
            raise SingularMatrixError(f"triangular pivot ~0 at row {i}")
        if lower:
            b[i] -= a[i, :i] @ b[:i]
        else:
            b[i] -= a[i, i + 1:] @ b[i + 1:]
        b[i] /= a[i, i]
    return b[:, 0] if vector else b


def permute(z, order) -> np.ndarray:
    """Symmetric permutation ``z[order][:, order]``."""
    a = as_matrix(z, square=True)
    idx = np.asarray(order, dtype=int)
    if sorted(idx.tolist()) != list(range(a.shape[0])):
        raise ValueError("order must be a permutation of 0..n-1")
    return a[np.ix_(idx, idx)]
