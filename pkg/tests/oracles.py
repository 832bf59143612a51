"""Independent reference computations used only by the test suite.

The exact Riemann solver follows the classical two-wave construction with a
Newton iteration on the star pressure. It shares no code with the package.
"""

import numpy as np


def _fk(p, rho_k, p_k, gamma):
    # flux function and derivative for one side
    a_k = np.sqrt(gamma * p_k / rho_k)
    if p > p_k:  # shock
        A = 2.0 / ((gamma + 1.0) * rho_k)
        B = (gamma - 1.0) / (gamma + 1.0) * p_k
        root = np.sqrt(A / (p + B))
        f = (p - p_k) * root
        df = root * (1.0 - 0.5 * (p - p_k) / (p + B))
    else:  # rarefaction
        f = 2.0 * a_k / (gamma - 1.0) * ((p / p_k) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
        df = (p / p_k) ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho_k * a_k)
    return f, df


def _star_pressure(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma):
    p = max(0.5 * (p_l + p_r), 1e-8)
    du = u_r - u_l
    for _ in range(100):
        fl, dfl = _fk(p, rho_l, p_l, gamma)
        fr, dfr = _fk(p, rho_r, p_r, gamma)
        g = fl + fr + du
        step = g / (dfl + dfr)
        p_new = p - step
        if p_new <= 0.0:
            p_new = 0.5 * p
        if abs(p_new - p) < 1e-14 * p:
            return p_new
        p = p_new
    return p


def riemann_exact(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma, xi):
    """Sample the exact Riemann solution at similarity points xi = x/t.

    Returns (rho, u, p) arrays. Transverse velocity is not handled here; it
    is constant on each side of the contact.
    """
    xi = np.asarray(xi, dtype=float)
    a_l = np.sqrt(gamma * p_l / rho_l)
    a_r = np.sqrt(gamma * p_r / rho_r)
    p_s = _star_pressure(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma)
    fl, _ = _fk(p_s, rho_l, p_l, gamma)
    fr, _ = _fk(p_s, rho_r, p_r, gamma)
    u_s = 0.5 * (u_l + u_r) + 0.5 * (fr - fl)

    gm1 = gamma - 1.0
    gp1 = gamma + 1.0

    rho = np.empty_like(xi)
    u = np.empty_like(xi)
    p = np.empty_like(xi)

    for i, x in enumerate(xi):
        if x <= u_s:  # left of contact
            if p_s > p_l:  # left shock
                rho_sl = rho_l * ((p_s / p_l + gm1 / gp1) / (gm1 / gp1 * p_s / p_l + 1.0))
                s_l = u_l - a_l * np.sqrt(gp1 / (2 * gamma) * p_s / p_l + gm1 / (2 * gamma))
                if x < s_l:
                    rho[i], u[i], p[i] = rho_l, u_l, p_l
                else:
                    rho[i], u[i], p[i] = rho_sl, u_s, p_s
            else:  # left rarefaction
                rho_sl = rho_l * (p_s / p_l) ** (1.0 / gamma)
                a_sl = a_l * (p_s / p_l) ** (gm1 / (2 * gamma))
                head = u_l - a_l
                tail = u_s - a_sl
                if x < head:
                    rho[i], u[i], p[i] = rho_l, u_l, p_l
                elif x > tail:
                    rho[i], u[i], p[i] = rho_sl, u_s, p_s
                else:
                    uf = 2.0 / gp1 * (a_l + 0.5 * gm1 * u_l + x)
                    af = 2.0 / gp1 * (a_l + 0.5 * gm1 * (u_l - x))
                    rho[i] = rho_l * (af / a_l) ** (2.0 / gm1)
                    u[i] = uf
                    p[i] = p_l * (af / a_l) ** (2.0 * gamma / gm1)
        else:  # right of contact
            if p_s > p_r:  # right shock
                rho_sr = rho_r * ((p_s / p_r + gm1 / gp1) / (gm1 / gp1 * p_s / p_r + 1.0))
                s_r = u_r + a_r * np.sqrt(gp1 / (2 * gamma) * p_s / p_r + gm1 / (2 * gamma))
                if x > s_r:
                    rho[i], u[i], p[i] = rho_r, u_r, p_r
                else:
                    rho[i], u[i], p[i] = rho_sr, u_s, p_s
            else:  # right rarefaction
                rho_sr = rho_r * (p_s / p_r) ** (1.0 / gamma)
                a_sr = a_r * (p_s / p_r) ** (gm1 / (2 * gamma))
                head = u_r + a_r
                tail = u_s + a_sr
                if x > head:
                    rho[i], u[i], p[i] = rho_r, u_r, p_r
                elif x < tail:
                    rho[i], u[i], p[i] = rho_sr, u_s, p_s
                else:
                    uf = 2.0 / gp1 * (-a_r + 0.5 * gm1 * u_r + x)
                    af = 2.0 / gp1 * (a_r - 0.5 * gm1 * (u_r - x))
                    rho[i] = rho_r * (af / a_r) ** (2.0 / gm1)
                    u[i] = uf
                    p[i] = p_r * (af / a_r) ** (2.0 * gamma / gm1)
    return rho, u, p


def dense_tridiagonal_solve(diag, sub, sup, rhs):
    """Dense LU reference for the Thomas solver (single system)."""
    n = len(diag)
    a = np.diag(diag) + np.diag(sub[1:], -1) + np.diag(sup[:-1], 1)
    return np.linalg.solve(a, rhs)
