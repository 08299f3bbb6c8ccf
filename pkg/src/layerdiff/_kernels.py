"""Inner time-stepping loops, JIT-compiled with Numba when it is available.

All three schemes are written as

    (I - beta A) u_new = (I + alpha A) u + tau b

with (alpha, beta) = (tau, 0) forward Euler, (0, tau) backward Euler and
(tau/2, tau/2) Crank-Nicolson.  The implicit operator arrives pre-factored
(``cprime``, ``inv_w`` from :class:`layerdiff.tridiag.ThomasFactor`).
"""
import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _run_jit(sub, diag, sup, b, alpha, tau, implicit, lsub, cprime, inv_w, u, nsteps, limit):
    n = u.shape[0]
    cur = u.copy()
    nxt = np.empty(n)
    for step in range(nsteps):
        # explicit part: (I + alpha A) u + tau b
        for p in range(n):
            acc = cur[p] + alpha * diag[p] * cur[p] + tau * b[p]
            if p > 0:
                acc += alpha * sub[p - 1] * cur[p - 1]
            if p < n - 1:
                acc += alpha * sup[p] * cur[p + 1]
            nxt[p] = acc
        if implicit:
            nxt[0] = nxt[0] * inv_w[0]
            for p in range(1, n):
                nxt[p] = (nxt[p] - lsub[p - 1] * nxt[p - 1]) * inv_w[p]
            for p in range(n - 2, -1, -1):
                nxt[p] -= cprime[p] * nxt[p + 1]
        big = 0.0
        for p in range(n):
            a = abs(nxt[p])
            if a > big or a != a:
                big = a
        tmp = cur
        cur = nxt
        nxt = tmp
        if not big <= limit:
            return cur, step + 1, True
    return cur, nsteps, False


def _run_numpy(sub, diag, sup, b, alpha, tau, implicit, lsub, cprime, inv_w, u, nsteps, limit):
    cur = u.copy()
    n = cur.shape[0]
    for step in range(nsteps):
        nxt = cur + alpha * diag * cur + tau * b
        nxt[1:] += alpha * sub * cur[:-1]
        nxt[:-1] += alpha * sup * cur[1:]
        if implicit:
            nxt[0] *= inv_w[0]
            for p in range(1, n):
                nxt[p] = (nxt[p] - lsub[p - 1] * nxt[p - 1]) * inv_w[p]
            for p in range(n - 2, -1, -1):
                nxt[p] -= cprime[p] * nxt[p + 1]
        cur = nxt
        big = np.max(np.abs(cur))
        if not big <= limit:
            return cur, step + 1, True
    return cur, nsteps, False


run_steps = _run_jit if HAS_NUMBA else _run_numpy
