"""Tridiagonal matrices: storage, products, Thomas solves, symmetrisation,
Sturm-sequence eigenvalues and leading principal minors."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class SingularMatrixError(np.linalg.LinAlgError):
    """Zero pivot in an unpivoted tridiagonal elimination."""


@dataclass(frozen=True)
class TriDiag:
    """``N x N`` tridiagonal matrix stored by diagonals.

    ``sub[p]`` is entry ``(p+1, p)``; ``sup[p]`` is entry ``(p, p+1)``.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        for name in ("sub", "diag", "sup"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.diag.shape[0]
        if n < 1:
            raise ValueError("TriDiag needs at least one row")
        if self.sub.shape != (n - 1,) or self.sup.shape != (n - 1,):
            raise ValueError(
                f"inconsistent diagonal lengths: sub {self.sub.shape}, "
                f"diag {self.diag.shape}, sup {self.sup.shape}"
            )

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @classmethod
    def identity(cls, n: int) -> "TriDiag":
        return cls(np.zeros(n - 1), np.ones(n), np.zeros(n - 1))

    @classmethod
    def from_dense(cls, M) -> "TriDiag":
        M = np.asarray(M, dtype=float)
        return cls(np.diag(M, -1), np.diag(M), np.diag(M, 1))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def shifted(self, scale: float, shift: float = 1.0) -> "TriDiag":
        """Return ``shift * I + scale * self``."""
        return TriDiag(scale * self.sub, shift + scale * self.diag, scale * self.sup)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.sub, self.sup))

    def __matmul__(self, v):
        return matvec(self, v)


def matvec(T: TriDiag, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (T.n,):
        raise ValueError(f"dimension mismatch: matrix is {T.n}x{T.n}, vector has shape {v.shape}")
    out = T.diag * v
    out[:-1] += T.sup * v[1:]
    out[1:] += T.sub * v[:-1]
    return out


class ThomasFactor:
    """LU factors of a tridiagonal matrix without pivoting, reusable across
    right-hand sides."""

    def __init__(self, T: TriDiag):
        n = T.n
        scale = float(np.max(np.abs(T.diag))) if n else 0.0
        cprime = np.zeros(max(n - 1, 0))
        inv_w = np.empty(n)
        w = T.diag[0]
        for p in range(n):
            if p > 0:
                w = T.diag[p] - T.sub[p - 1] * cprime[p - 1]
            if w == 0.0 or abs(w) <= 1e-300 or abs(w) < 1e-15 * scale:
                raise SingularMatrixError(f"zero pivot at row {p} in Thomas elimination")
            inv_w[p] = 1.0 / w
            if p < n - 1:
                cprime[p] = T.sup[p] * inv_w[p]
        self.sub = T.sub
        self.cprime = cprime
        self.inv_w = inv_w
        self.n = n

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.n,):
            raise ValueError(f"dimension mismatch: expected ({self.n},), got {rhs.shape}")
        y = np.empty(self.n)
        y[0] = rhs[0] * self.inv_w[0]
        for p in range(1, self.n):
            y[p] = (rhs[p] - self.sub[p - 1] * y[p - 1]) * self.inv_w[p]
        for p in range(self.n - 2, -1, -1):
            y[p] -= self.cprime[p] * y[p + 1]
        return y


def thomas_solve(T: TriDiag, rhs) -> np.ndarray:
    """Solve ``T x = rhs`` in O(N) by the tridiagonal matrix algorithm.

    No pivoting: raises :class:`SingularMatrixError` on a zero pivot.
    """
    return ThomasFactor(T).solve(rhs)


@dataclass(frozen=True)
class SymmetrizedPair:
    """``S = D A D^-1`` with ``D = diag(scaling)``."""

    S: TriDiag
    scaling: np.ndarray


def symmetrize(A: TriDiag) -> SymmetrizedPair:
    """Diagonal similarity transform taking ``A`` to a symmetric matrix.

    Requires ``a[p, p+1] * a[p+1, p] > 0`` for every ``p``.  The scaling is
    ``d_1 = 1``, ``d_{p+1} = d_p * sqrt(a[p, p+1] / a[p+1, p])`` (cumulative,
    so that ``S`` is exactly symmetric), and the off-diagonals of ``S`` are
    ``sign(a[p, p+1]) * sqrt(a[p, p+1] a[p+1, p])``.
    """
    prod = A.sup * A.sub
    bad = np.flatnonzero(~(prod > 0))
    if bad.size:
        raise ValueError(
            f"off-diagonal product a[p,p+1]*a[p+1,p] is not positive at p = {bad.tolist()}"
        )
    ratio = np.sqrt(A.sup / A.sub)
    scaling = np.concatenate(([1.0], np.cumprod(ratio)))
    off = np.sign(A.sup) * np.sqrt(prod)
    return SymmetrizedPair(TriDiag(off, A.diag.copy(), off), scaling)


def sturm_count(S: TriDiag, x) -> np.ndarray:
    """Number of eigenvalues of symmetric ``S`` strictly less than each ``x``.

    Counts negative pivots of the LDL^T factorisation of ``S - x I``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e2 = S.sub ** 2
    scale = max(float(np.max(np.abs(S.diag))), float(np.max(np.abs(S.sub))) if S.n > 1 else 0.0, 1e-300)
    tiny = np.finfo(float).eps * scale
    q = S.diag[0] - x
    q = np.where(q == 0.0, -tiny, q)
    count = (q < 0).astype(int)
    for k in range(1, S.n):
        q = (S.diag[k] - x) - e2[k - 1] / q
        q = np.where(q == 0.0, -tiny, q)
        count += q < 0
    return count


def eigenvalues(S: TriDiag, max_iter: int = 200) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal matrix, ascending.

    Bisection on Sturm counts, all eigenvalues bracketed simultaneously from
    the Gershgorin interval and refined to roughly machine precision relative
    to the matrix scale.
    """
    if not S.is_symmetric():
        raise ValueError("eigenvalues() needs a symmetric tridiagonal matrix; use symmetrize()")
    n = S.n
    off = np.abs(S.sub)
    radius = np.zeros(n)
    radius[:-1] += off
    radius[1:] += off
    lo = float(np.min(S.diag - radius))
    hi = float(np.max(S.diag + radius))
    scale = max(abs(lo), abs(hi), 1e-300)
    pad = 4 * np.finfo(float).eps * scale + 1e-300
    lower = np.full(n, lo - pad)
    upper = np.full(n, hi + pad)
    k = np.arange(n)
    tol = 2 * np.finfo(float).eps * scale
    for _ in range(max_iter):
        active = (upper - lower) > tol
        if not active.any():
            break
        mid = 0.5 * (lower + upper)
        below = sturm_count(S, mid[active])
        # eigenvalue k (0-based) lies below mid iff at least k+1 eigenvalues do
        left = below >= k[active] + 1
        idx = np.flatnonzero(active)
        upper[idx[left]] = mid[active][left]
        lower[idx[~left]] = mid[active][~left]
    return 0.5 * (lower + upper)


def principal_minors(S: TriDiag):
    """Leading principal minors ``det(S_k)``, ``k = 1..N``, of symmetric ``S``.

    Uses ``det(S_k) = d_k det(S_{k-1}) - e_k^2 det(S_{k-2})`` with the running
    pair rescaled every step.  Returns ``(sign, log_abs)`` arrays; ``sign`` is
    0 where the minor vanishes (``log_abs`` is then ``-inf``).
    """
    n = S.n
    sign = np.zeros(n, dtype=int)
    log_abs = np.full(n, -np.inf)
    e2 = S.sub ** 2
    prev2, prev1, log_scale = 0.0, 1.0, 0.0  # det(S_-1) unused, det(S_0) = 1
    for k in range(n):
        cur = S.diag[k] * prev1 - (e2[k - 1] * prev2 if k > 0 else 0.0)
        if cur != 0.0:
            sign[k] = 1 if cur > 0 else -1
            log_abs[k] = math.log(abs(cur)) + log_scale
        prev2, prev1 = prev1, cur
        m = max(abs(prev1), abs(prev2))
        if m > 0.0:
            prev1 /= m
            prev2 /= m
            log_scale += math.log(m)
    return sign, log_abs
