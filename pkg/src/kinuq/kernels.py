"""Hot numeric kernels, each in a numba and a pure-numpy variant.

The module-level names exported at the bottom pick the variant according to
`kinuq._accel.USE_NUMBA`; `kinuq.benchmark` times both. Both variants of a
kernel take the same arguments and write into a caller-provided output
array so they can be swapped freely.

Conventions:
  - spectral mode arrays are flattened in natural order, flat = (k1+N/2)*N + (k2+N/2)
  - spatial fields carry two ghost cells per side along x
  - cell batches are flattened to a leading axis (samples*cells, nv, nv)
"""

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "gain_sum",
    "transport_sweep",
    "bgk_relax",
    "euler_update",
    "GAIN_VARIANTS",
    "TRANSPORT_VARIANTS",
    "RELAX_VARIANTS",
    "EULER_VARIANTS",
]


# ---------------------------------------------------------------- collision

@njit
def _gain_sum_numba(fhat, G, N, mf_idx, out):
    # Q_gain[k] = sum_{l+m=k} fhat[l] fhat[m] G[k, l], direct Galerkin sum
    # mf_idx is unused here, the loop bounds enforce m = k - l directly
    B, NM = fhat.shape
    h = N // 2
    for kf in range(NM):
        k1 = kf // N - h
        k2 = kf % N - h
        lo1 = max(-h, k1 - h + 1)
        hi1 = min(h - 1, k1 + h)
        lo2 = max(-h, k2 - h + 1)
        hi2 = min(h - 1, k2 + h)
        for b in range(B):
            s = 0.0 + 0.0j
            for l1 in range(lo1, hi1 + 1):
                rowl = (l1 + h) * N
                rowm = (k1 - l1 + h) * N
                for l2 in range(lo2, hi2 + 1):
                    lf = rowl + (l2 + h)
                    mf = rowm + (k2 - l2 + h)
                    s += G[kf, lf] * (fhat[b, lf] * fhat[b, mf])
            out[b, kf] = s
    return out


def _gain_sum_numpy(fhat, G, N, mf_idx, out):
    # mf_idx[k, l] points at m = k - l, or at the padded zero slot NM
    B, NM = fhat.shape
    pad = np.zeros((B, 1), dtype=np.complex128)
    fp = np.concatenate([fhat, pad], axis=1)
    for b in range(B):
        fm = fp[b][mf_idx]
        out[b] = (G * (fhat[b][None, :] * fm)).sum(axis=1)
    return out


def build_mf_index(N: int) -> np.ndarray:
    """Index table m = k - l for the numpy gain variant (NM marks invalid)."""
    h = N // 2
    k = np.arange(N) - h
    k1 = np.repeat(k, N)
    k2 = np.tile(k, N)
    m1 = k1[:, None] - k1[None, :]
    m2 = k2[:, None] - k2[None, :]
    valid = (m1 >= -h) & (m1 < h) & (m2 >= -h) & (m2 < h)
    idx = (m1 + h) * N + (m2 + h)
    idx[~valid] = N * N
    return idx.astype(np.int64)


# ---------------------------------------------------------------- transport

@njit(inline="always")
def _mm(a, b):
    if a * b > 0.0:
        return a if abs(a) < abs(b) else b
    return 0.0


@njit
def _transport_numba(fp, vel, dtdx, out):
    # MUSCL2 minmod upwind sweep; fp is (B, nx+4, NV), out is (B, nx, NV)
    B, nxp, NV = fp.shape
    nx = nxp - 4
    fl = np.empty(NV)
    for b in range(B):
        for j in range(NV):
            v = vel[j]
            if v >= 0.0:
                s = _mm(fp[b, 1, j] - fp[b, 0, j], fp[b, 2, j] - fp[b, 1, j])
                fl[j] = v * (fp[b, 1, j] + 0.5 * s)
            else:
                s = _mm(fp[b, 2, j] - fp[b, 1, j], fp[b, 3, j] - fp[b, 2, j])
                fl[j] = v * (fp[b, 2, j] - 0.5 * s)
        for i in range(2, nx + 2):
            for j in range(NV):
                v = vel[j]
                if v >= 0.0:
                    s = _mm(fp[b, i, j] - fp[b, i - 1, j], fp[b, i + 1, j] - fp[b, i, j])
                    fr = v * (fp[b, i, j] + 0.5 * s)
                else:
                    s = _mm(fp[b, i + 1, j] - fp[b, i, j], fp[b, i + 2, j] - fp[b, i + 1, j])
                    fr = v * (fp[b, i + 1, j] - 0.5 * s)
                out[b, i - 2, j] = fp[b, i, j] - dtdx * (fr - fl[j])
                fl[j] = fr
    return out


def _mm_np(a, b):
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def _transport_numpy(fp, vel, dtdx, out):
    d = np.diff(fp, axis=1)
    slope = _mm_np(d[:, :-1], d[:, 1:])  # slopes of cells 1 .. nxp-2
    ql = fp[:, 1:-2] + 0.5 * slope[:, :-1]
    qr = fp[:, 2:-1] - 0.5 * slope[:, 1:]
    flux = np.where(vel[None, None, :] >= 0.0, vel * ql, vel * qr)
    out[:] = fp[:, 2:-2] - dtdx * (flux[:, 1:] - flux[:, :-1])
    return out


# ---------------------------------------------------------------- BGK relaxation

@njit(inline="always")
def _solve4(A, b):
    # in-place Gaussian elimination with partial pivoting on a 4x4 system
    for col in range(4):
        piv = col
        best = abs(A[col, col])
        for r in range(col + 1, 4):
            if abs(A[r, col]) > best:
                best = abs(A[r, col])
                piv = r
        if best == 0.0:
            return False
        if piv != col:
            for c in range(4):
                A[col, c], A[piv, c] = A[piv, c], A[col, c]
            b[col], b[piv] = b[piv], b[col]
        inv = 1.0 / A[col, col]
        for r in range(col + 1, 4):
            fac = A[r, col] * inv
            if fac != 0.0:
                for c in range(col, 4):
                    A[r, c] -= fac * A[col, c]
                b[r] -= fac * b[col]
    for col in range(3, -1, -1):
        s = b[col]
        for c in range(col + 1, 4):
            s -= A[col, c] * b[c]
        b[col] = s / A[col, col]
    return True


@njit
def _bgk_relax_numba(f, nodes, dv2, nu_coeff, nu_is_rho, dt_over_eps, out):
    """Exact exponential relaxation toward a conservatively corrected Maxwellian.

    Returns 0 on success, 1 for a vacuum cell, 2 for unusable moments.
    The corrected Maxwellian matches the discrete (rho, m1, m2, E) of f to
    round-off, so the blend preserves them exactly for any dt.
    """
    C, N, _ = f.shape
    g1 = np.empty(N)
    g2 = np.empty(N)
    A = np.empty((4, 4))
    rhs = np.empty(4)
    for c in range(C):
        rho = 0.0
        m1 = 0.0
        m2 = 0.0
        ee = 0.0
        for i in range(N):
            vi = nodes[i]
            for j in range(N):
                w = f[c, i, j]
                rho += w
                m1 += vi * w
                m2 += nodes[j] * w
                ee += (vi * vi + nodes[j] * nodes[j]) * w
        rho *= dv2
        m1 *= dv2
        m2 *= dv2
        ee *= 0.5 * dv2
        if not (rho > 1e-14 and np.isfinite(rho)):
            return 1
        u1 = m1 / rho
        u2 = m2 / rho
        T = ee / rho - 0.5 * (u1 * u1 + u2 * u2)
        if not (T > 0.0 and np.isfinite(T)):
            return 2
        amp = rho / (2.0 * np.pi * T)
        inv2t = 1.0 / (2.0 * T)
        for i in range(N):
            g1[i] = np.exp(-(nodes[i] - u1) ** 2 * inv2t)
            g2[i] = np.exp(-(nodes[i] - u2) ** 2 * inv2t)
        # accumulate the monomial sums of the analytic Maxwellian
        s0 = 0.0; s1 = 0.0; s2 = 0.0
        s11 = 0.0; s22 = 0.0; s12 = 0.0
        s1s = 0.0; s2s = 0.0; sss = 0.0
        for i in range(N):
            vi = nodes[i]
            gi = amp * g1[i]
            for j in range(N):
                vj = nodes[j]
                g = gi * g2[j]
                sq = vi * vi + vj * vj
                s0 += g
                s1 += g * vi
                s2 += g * vj
                s11 += g * vi * vi
                s22 += g * vj * vj
                s12 += g * vi * vj
                s1s += g * vi * sq
                s2s += g * vj * sq
                sss += g * sq * sq
        ss = s11 + s22
        A[0, 0] = s0;  A[0, 1] = s1;   A[0, 2] = s2;   A[0, 3] = ss
        A[1, 0] = s1;  A[1, 1] = s11;  A[1, 2] = s12;  A[1, 3] = s1s
        A[2, 0] = s2;  A[2, 1] = s12;  A[2, 2] = s22;  A[2, 3] = s2s
        A[3, 0] = 0.5 * ss; A[3, 1] = 0.5 * s1s; A[3, 2] = 0.5 * s2s; A[3, 3] = 0.5 * sss
        for p in range(4):
            for q in range(4):
                A[p, q] *= dv2
        rhs[0] = rho - dv2 * s0
        rhs[1] = m1 - dv2 * s1
        rhs[2] = m2 - dv2 * s2
        rhs[3] = ee - 0.5 * dv2 * ss
        if not _solve4(A, rhs):
            return 2
        nu = nu_coeff * rho if nu_is_rho else nu_coeff
        ex = np.exp(-nu * dt_over_eps)
        for i in range(N):
            vi = nodes[i]
            gi = amp * g1[i]
            for j in range(N):
                vj = nodes[j]
                g = gi * g2[j]
                gm = g * (1.0 + rhs[0] + rhs[1] * vi + rhs[2] * vj + rhs[3] * (vi * vi + vj * vj))
                out[c, i, j] = gm + ex * (f[c, i, j] - gm)
    return 0


def _bgk_relax_numpy(f, nodes, dv2, nu_coeff, nu_is_rho, dt_over_eps, out):
    C, N, _ = f.shape
    v1 = nodes[:, None]
    v2 = nodes[None, :]
    sq = v1**2 + v2**2
    ff = f.reshape(C, -1)
    rho = ff.sum(axis=1) * dv2
    if not np.all((rho > 1e-14) & np.isfinite(rho)):
        return 1
    m1 = ff @ np.broadcast_to(v1, (N, N)).ravel() * dv2
    m2 = ff @ np.broadcast_to(v2, (N, N)).ravel() * dv2
    ee = ff @ sq.ravel() * (0.5 * dv2)
    u1 = m1 / rho
    u2 = m2 / rho
    T = ee / rho - 0.5 * (u1**2 + u2**2)
    if not np.all((T > 0.0) & np.isfinite(T)):
        return 2
    amp = rho / (2.0 * np.pi * T)
    g1 = np.exp(-((nodes[None, :] - u1[:, None]) ** 2) / (2.0 * T[:, None]))
    g2 = np.exp(-((nodes[None, :] - u2[:, None]) ** 2) / (2.0 * T[:, None]))
    g = amp[:, None, None] * g1[:, :, None] * g2[:, None, :]
    gf = g.reshape(C, -1)
    one = np.ones_like(sq)
    phi = np.stack([one, np.broadcast_to(v1, (N, N)), np.broadcast_to(v2, (N, N)), 0.5 * sq])
    psi = np.stack([one, np.broadcast_to(v1, (N, N)), np.broadcast_to(v2, (N, N)), sq])
    w = (phi[:, None] * psi[None, :]).reshape(16, -1)
    A = (gf @ w.T).reshape(C, 4, 4) * dv2
    target = np.stack([rho, m1, m2, ee], axis=1)
    have = (gf @ phi.reshape(4, -1).T) * dv2
    try:
        coef = np.linalg.solve(A, (target - have)[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return 2
    basis = psi.reshape(4, -1)
    corr = 1.0 + coef @ basis
    gm = gf * corr
    nu = nu_coeff * rho if nu_is_rho else np.full(C, nu_coeff)
    ex = np.exp(-nu * dt_over_eps)[:, None]
    out.reshape(C, -1)[:] = gm + ex * (ff - gm)
    return 0


# ---------------------------------------------------------------- Euler

GAMMA = 2.0


@njit(inline="always")
def _eflux(r, m1, m2, E, F):
    u = m1 / r
    p = (GAMMA - 1.0) * (E - 0.5 * (m1 * m1 + m2 * m2) / r)
    F[0] = m1
    F[1] = m1 * u + p
    F[2] = m2 * u
    F[3] = (E + p) * u
    return p


@njit
def _euler_update_numba(up, dtdx, out):
    # MUSCL-Hancock predictor plus Rusanov flux; up is (B, 4, nx+4)
    B, _, nxp = up.shape
    nx = nxp - 4
    for b in range(B):
        # limited slopes for cells 1..nxp-2
        slopes = np.empty((4, nxp))
        for k in range(4):
            slopes[k, 0] = 0.0
            slopes[k, nxp - 1] = 0.0
            for i in range(1, nxp - 1):
                slopes[k, i] = _mm(up[b, k, i] - up[b, k, i - 1], up[b, k, i + 1] - up[b, k, i])
        # predictor edge states for cells 1..nxp-2
        lo = np.empty((4, nxp))
        hi = np.empty((4, nxp))
        FL = np.empty(4)
        FR = np.empty(4)
        for i in range(1, nxp - 1):
            for k in range(4):
                lo[k, i] = up[b, k, i] - 0.5 * slopes[k, i]
                hi[k, i] = up[b, k, i] + 0.5 * slopes[k, i]
            _eflux(lo[0, i], lo[1, i], lo[2, i], lo[3, i], FL)
            _eflux(hi[0, i], hi[1, i], hi[2, i], hi[3, i], FR)
            for k in range(4):
                adv = 0.5 * dtdx * (FL[k] - FR[k])
                lo[k, i] += adv
                hi[k, i] += adv
        # Rusanov fluxes at interfaces between cells i and i+1, i = 1..nxp-3
        fhat = np.empty((4, nxp))
        a4 = np.empty(4)
        b4 = np.empty(4)
        for i in range(1, nxp - 2):
            for k in range(4):
                a4[k] = hi[k, i]
                b4[k] = lo[k, i + 1]
            pa = _eflux(a4[0], a4[1], a4[2], a4[3], FL)
            pb = _eflux(b4[0], b4[1], b4[2], b4[3], FR)
            ca = np.sqrt(GAMMA * pa / a4[0])
            cb = np.sqrt(GAMMA * pb / b4[0])
            smax = max(abs(a4[1] / a4[0]) + ca, abs(b4[1] / b4[0]) + cb)
            for k in range(4):
                fhat[k, i] = 0.5 * (FL[k] + FR[k]) - 0.5 * smax * (b4[k] - a4[k])
        for i in range(2, nx + 2):
            for k in range(4):
                out[b, k, i - 2] = up[b, k, i] - dtdx * (fhat[k, i] - fhat[k, i - 1])
    return out


def _eflux_np(U):
    r, m1, m2, E = U[:, 0], U[:, 1], U[:, 2], U[:, 3]
    u = m1 / r
    p = (GAMMA - 1.0) * (E - 0.5 * (m1**2 + m2**2) / r)
    F = np.empty_like(U)
    F[:, 0] = m1
    F[:, 1] = m1 * u + p
    F[:, 2] = m2 * u
    F[:, 3] = (E + p) * u
    return F, p, u


def _euler_update_numpy(up, dtdx, out):
    d = np.diff(up, axis=2)
    slope = _mm_np(d[:, :, :-1], d[:, :, 1:])  # cells 1..nxp-2
    cells = up[:, :, 1:-1]
    lo = cells - 0.5 * slope
    hi = cells + 0.5 * slope
    B, _, nc = lo.shape
    FL, _, _ = _eflux_np(lo.transpose(0, 2, 1).reshape(-1, 4))
    FR, _, _ = _eflux_np(hi.transpose(0, 2, 1).reshape(-1, 4))
    adv = 0.5 * dtdx * (FL - FR).reshape(B, nc, 4).transpose(0, 2, 1)
    lo = lo + adv
    hi = hi + adv
    a = hi[:, :, :-1].transpose(0, 2, 1).reshape(-1, 4)
    bstate = lo[:, :, 1:].transpose(0, 2, 1).reshape(-1, 4)
    Fa, pa, ua = _eflux_np(a)
    Fb, pb, ub = _eflux_np(bstate)
    smax = np.maximum(np.abs(ua) + np.sqrt(GAMMA * pa / a[:, 0]),
                      np.abs(ub) + np.sqrt(GAMMA * pb / bstate[:, 0]))
    fhat = 0.5 * (Fa + Fb) - 0.5 * smax[:, None] * (bstate - a)
    nf = nc - 1
    fhat = fhat.reshape(B, nf, 4).transpose(0, 2, 1)
    out[:] = up[:, :, 2:-2] - dtdx * (fhat[:, :, 1:] - fhat[:, :, :-1])
    return out


GAIN_VARIANTS = {"numba": _gain_sum_numba, "numpy": _gain_sum_numpy}
TRANSPORT_VARIANTS = {"numba": _transport_numba, "numpy": _transport_numpy}
RELAX_VARIANTS = {"numba": _bgk_relax_numba, "numpy": _bgk_relax_numpy}
EULER_VARIANTS = {"numba": _euler_update_numba, "numpy": _euler_update_numpy}

_MODE = "numba" if USE_NUMBA else "numpy"

gain_sum = GAIN_VARIANTS[_MODE]
transport_sweep = TRANSPORT_VARIANTS[_MODE]
bgk_relax = RELAX_VARIANTS[_MODE]
euler_update = EULER_VARIANTS[_MODE]
