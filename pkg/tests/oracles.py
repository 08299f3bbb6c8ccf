"""Independent reference solutions used by the tests."""
import numpy as np


def exact_steady(problem):
    """Piecewise-linear steady solution ``u_i(x) = alpha_i + s_i (x - l_{i-1})``.

    Solves the 2m conditions (two boundary conditions, two per interface)
    directly as a dense linear system; the finite volume scheme should
    reproduce it at every node because it is exact for linear profiles.
    Returns a callable ``u(i, x)``.
    """
    L = problem.layers
    m = len(L)
    M = np.zeros((2 * m, 2 * m))
    rhs = np.zeros(2 * m)
    a, s = (lambda i: 2 * i), (lambda i: 2 * i + 1)
    bl, br = problem.bc_left, problem.bc_right
    # a_L u - b_L u_x = c_L at l_0
    M[0, a(0)], M[0, s(0)], rhs[0] = bl.a, -bl.b, bl.c
    # a_R u + b_R u_x = c_R at l_m
    w = L[-1].width
    M[1, a(m - 1)], M[1, s(m - 1)], rhs[1] = br.a, br.a * w + br.b, br.c
    row = 2
    for k, spec in enumerate(problem.interfaces):
        gL, gR, wL = L[k].conductivity, L[k + 1].conductivity, L[k].width
        # flux continuity
        M[row, s(k)], M[row, s(k + 1)] = gL, -gR
        row += 1
        if spec.kind == "GI":
            # alpha_k + s_k w = theta alpha_{k+1}
            M[row, a(k)], M[row, s(k)], M[row, a(k + 1)] = 1.0, wL, -spec.theta
        else:
            # gL s_k = H (theta alpha_{k+1} - alpha_k - s_k w)
            H = spec.transfer
            M[row, s(k)] = gL + H * wL
            M[row, a(k)] = H
            M[row, a(k + 1)] = -H * spec.theta
        row += 1
    coef = np.linalg.solve(M, rhs)

    def u(i, x):
        return coef[a(i)] + coef[s(i)] * (np.asarray(x) - L[i].left)

    return u


def exact_steady_nodes(problem, mesh):
    u = exact_steady(problem)
    return np.vstack([u(i, mesh.coords[i]) for i in range(problem.m)])


def case_a_series(x_left, x_right, t, k_max=200.0):
    """Eigenfunction expansion for Case A (D = 1, 0.1 on [0, .5, 1], u(0) = 1,
    u_x(1) = 0, zero initial data).

    ``u = 1 + sum c_k exp(-k^2 t) phi_k`` with ``phi_k = sin(k x / s1)`` on the
    left layer and ``C_k cos(k (1 - x) / s2)`` on the right, ``s_i = sqrt(D_i)``.
    Roots of the interface determinant are located by a fine scan plus
    bisection; all integrals are closed form.
    """
    D1, D2 = 1.0, 0.1
    s1, s2 = np.sqrt(D1), np.sqrt(D2)

    def det(k):
        return np.sin(k * 0.5 / s1) * D2 / s2 * np.sin(k * 0.5 / s2) - D1 / s1 * np.cos(k * 0.5 / s1) * np.cos(
            k * 0.5 / s2
        )

    grid = np.linspace(1e-6, k_max, 200001)
    v = det(grid)
    idx = np.flatnonzero(v[:-1] * v[1:] < 0)
    lo, hi = grid[idx], grid[idx + 1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        left = det(lo) * det(mid) <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
    x_left = np.asarray(x_left, float)
    x_right = np.asarray(x_right, float)
    u_l = np.ones_like(x_left)
    u_r = np.ones_like(x_right)
    for k in 0.5 * (lo + hi):
        cos2 = np.cos(k * 0.5 / s2)
        if abs(cos2) > 1e-3:
            C = np.sin(k * 0.5 / s1) / cos2
        else:
            C = D1 / s1 * np.cos(k * 0.5 / s1) / (D2 / s2 * np.sin(k * 0.5 / s2))
        norm = (0.25 - s1 * np.sin(k / s1) / (4 * k)) + C**2 * (0.25 + s2 * np.sin(k / s2) / (4 * k))
        proj = -(s1 * (1 - np.cos(0.5 * k / s1)) / k + C * s2 * np.sin(0.5 * k / s2) / k)
        a = proj / norm * np.exp(-k * k * t)
        u_l = u_l + a * np.sin(k * x_left / s1)
        u_r = u_r + a * C * np.cos(k * (1 - x_right) / s2)
    return u_l, u_r
