"""Homogeneous and 1D Boltzmann equation, Fourier-Galerkin in velocity.

Maxwell molecules (angular-independent kernel b0) on the periodized box
[-v_max, v_max]^2, truncated relative velocity |g| < R = 4 v_max (3-sqrt 2)/7.
The gain term is the direct O(N^4)-per-field sum over kernel modes; there is
deliberately no fast transform here. Conservation of the discrete collision
invariants is enforced by orthogonal projection after each evaluation.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import j0

from .. import kernels
from ..phase_space import SpatialGrid, VelocityGrid
from .boundaries import BoundarySpec, KineticGhostFiller
from .bgk import NEGATIVE_RHO_TOL, bgk_homogeneous_exact, max_dt

__all__ = ["BoltzmannConfig", "CollisionTables", "build_tables", "to_modes",
           "from_modes", "boltzmann_collision", "homogeneous_solve",
           "boltzmann_rk4_step", "boltzmann_step_rk2"]

DEFAULT_B0 = 1.0 / (2.0 * np.pi)


@dataclass(frozen=True)
class BoltzmannConfig:
    n_modes: int = 32
    n_angles: int = 8
    n_radial: int = 32
    b0: float = DEFAULT_B0

    def __post_init__(self):
        if self.n_modes > 32:
            raise ValueError("n_modes above 32 is out of scope for the direct sum")
        if self.n_angles < 4:
            raise ValueError("need at least 4 angular directions")
        if self.n_radial < 4 or self.b0 <= 0.0:
            raise ValueError("bad quadrature or kernel constant")


@dataclass(frozen=True)
class CollisionTables:
    vgrid: VelocityGrid
    cfg: BoltzmannConfig
    G: np.ndarray        # (NM, NM) gain kernel, G[k, l] = B_hat(l, k - l)
    Gd: np.ndarray       # (NM,) loss multiplier B_hat(m, m)
    mf_idx: np.ndarray   # (NM, NM) gather table for the numpy gain variant
    phase: np.ndarray    # (N, N) checkerboard for the mode transforms
    proj_phi: np.ndarray  # (NN, 4) collision invariants on the grid
    proj_m: np.ndarray    # (NN, 4) phi (phi^T phi)^{-1}


def _build_tables_impl(n: int, v_max: float, n_angles: int, n_radial: int, b0: float):
    h = n // 2
    L = v_max
    xi = np.pi / L  # mode spacing in frequency
    R = 4.0 * L * (3.0 - np.sqrt(2.0)) / 7.0

    gl_x, gl_w = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * R * (gl_x + 1.0)
    w = 0.5 * R * gl_w

    k = np.arange(n) - h
    k1 = np.repeat(k, n).astype(np.int64)
    k2 = np.tile(k, n).astype(np.int64)
    kmag = xi * np.sqrt(k1.astype(float) ** 2 + k2.astype(float) ** 2)

    # radial factor of the gain kernel, (n_radial, NM)
    A = j0(0.5 * np.outer(r, kmag))

    # angular average of cos over the difference index d = 2l - k
    theta = (np.arange(n_angles) + 0.5) * np.pi / n_angles
    c, s = np.cos(theta), np.sin(theta)
    dr = np.arange(-2 * n + 2, 2 * n - 1)  # all reachable d components
    nd = dr.size
    proj = xi * (dr[:, None, None] * c[None, None, :] + dr[None, :, None] * s[None, None, :])
    # C[j, d1, d2] = mean_a cos(r_j * (xi d . omega_a) / 2)
    C = np.cos(0.5 * r[:, None, None, None] * proj[None]).mean(axis=3)

    # assemble G[k, l] = b0 (2pi)^2 sum_j w_j r_j A[j, k] C[j, d(k, l)]
    NM = n * n
    l1 = k1
    l2 = k2
    d1 = (2 * l1[None, :] - k1[:, None]) - dr[0]
    d2 = (2 * l2[None, :] - k2[:, None]) - dr[0]
    dmap = (d1 * nd + d2).astype(np.int64)
    del d1, d2
    G = np.zeros((NM, NM))
    pref = b0 * (2.0 * np.pi) ** 2
    for j in range(n_radial):
        G += (pref * w[j] * r[j]) * A[j][:, None] * C[j].ravel()[dmap]

    Gd = pref * ((w * r)[:, None] * j0(np.outer(r, kmag))).sum(axis=0)

    ij = np.arange(n)
    phase = ((-1.0) ** (ij[:, None] + ij[None, :]))

    vg = VelocityGrid(n, v_max)
    phi = np.stack([np.ones(NM), vg.v1.ravel(), vg.v2.ravel(), vg.speed_sq.ravel()], axis=1)
    proj_m = phi @ np.linalg.inv(phi.T @ phi)

    return G, Gd, kernels.build_mf_index(n), phase, phi, proj_m


@lru_cache(maxsize=8)
def _tables_cached(n, v_max, n_angles, n_radial, b0):
    return _build_tables_impl(n, v_max, n_angles, n_radial, b0)


def build_tables(vgrid: VelocityGrid, cfg: BoltzmannConfig = BoltzmannConfig()) -> CollisionTables:
    if cfg.n_modes != vgrid.n:
        raise ValueError("n_modes must match the velocity grid")
    G, Gd, mf_idx, phase, phi, proj_m = _tables_cached(
        vgrid.n, float(vgrid.v_max), cfg.n_angles, cfg.n_radial, float(cfg.b0))
    return CollisionTables(vgrid, cfg, G, Gd, mf_idx, phase, phi, proj_m)


def to_modes(f: np.ndarray, tables: CollisionTables) -> np.ndarray:
    """Fourier coefficients in natural order, flattened to (..., N*N)."""
    n = tables.vgrid.n
    fh = np.fft.fftshift(np.fft.fft2(f), axes=(-2, -1)) * tables.phase / n**2
    return np.ascontiguousarray(fh.reshape(f.shape[:-2] + (n * n,)))


def from_modes(fh: np.ndarray, tables: CollisionTables) -> np.ndarray:
    """Inverse of to_modes; returns the real field (..., N, N)."""
    n = tables.vgrid.n
    fm = fh.reshape(fh.shape[:-1] + (n, n)) * tables.phase
    return np.real(np.fft.ifft2(np.fft.ifftshift(fm, axes=(-2, -1)))) * n**2


def boltzmann_collision(f: np.ndarray, tables: CollisionTables) -> np.ndarray:
    """Q(f, f) for a batch (..., N, N), invariants projected out exactly."""
    n = tables.vgrid.n
    shape = f.shape
    fb = f.reshape(-1, n, n)
    B = fb.shape[0]
    fhat = to_modes(fb, tables)
    gain_hat = np.empty_like(fhat)
    kernels.gain_sum(fhat, tables.G, n, tables.mf_idx, gain_hat)
    gain = from_modes(gain_hat, tables)
    loss = from_modes(fhat * tables.Gd, tables)
    q = (gain - fb * loss).reshape(B, n * n)
    q -= (q @ tables.proj_phi) @ tables.proj_m.T
    if not np.all(np.isfinite(q)):
        raise ValueError("collision evaluation diverged")
    return q.reshape(shape)


def _rk4_step(f, tables, dt, eps):
    k1 = boltzmann_collision(f, tables)
    k2 = boltzmann_collision(f + (0.5 * dt / eps) * k1, tables)
    k3 = boltzmann_collision(f + (0.5 * dt / eps) * k2, tables)
    k4 = boltzmann_collision(f + (dt / eps) * k3, tables)
    return f + (dt / (6.0 * eps)) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def homogeneous_solve(f0: np.ndarray, model: str, t_grid, *, vgrid: VelocityGrid,
                      tables: CollisionTables = None, nu: float = 1.0,
                      dt: float = 0.05, eps: float = 1.0):
    """Trajectory of the homogeneous problem at the requested times.

    model is "bgk_exact" or "boltzmann_rk4". Output times need not be step
    multiples; each interval is split evenly into steps of at most dt.
    """
    times = [float(t) for t in t_grid]
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("output times must be nonnegative and ascending")
    if model == "bgk_exact":
        return [bgk_homogeneous_exact(f0, vgrid, nu, t) for t in times]
    if model != "boltzmann_rk4":
        raise ValueError("unknown homogeneous model %r" % model)
    if dt > 0.05 + 1e-12:
        raise ValueError("boltzmann_rk4 needs dt <= 0.05")
    if tables is None:
        tables = build_tables(vgrid)
    out = []
    f = np.array(f0, dtype=float)
    t = 0.0
    for target in times:
        span = target - t
        if span > 1e-14:
            steps = max(1, int(np.ceil(span / dt - 1e-9)))
            h = span / steps
            for _ in range(steps):
                f = _rk4_step(f, tables, h, eps)
            t = target
        out.append(f.copy())
    return out


def boltzmann_rk4_step(f: np.ndarray, tables: CollisionTables, dt: float,
                       eps: float = 1.0) -> np.ndarray:
    """Single RK4 step of the homogeneous problem, same dt cap as the solve."""
    if dt > 0.05 + 1e-12:
        raise ValueError("boltzmann_rk4 needs dt <= 0.05")
    return _rk4_step(np.asarray(f, dtype=float), tables, dt, eps)


def boltzmann_step_rk2(f: np.ndarray, tables: CollisionTables, dt: float, eps: float,
                       bc: BoundarySpec, xgrid: SpatialGrid,
                       filler: KineticGhostFiller = None) -> np.ndarray:
    """Heun step of df/dt = -v dx f + Q(f,f)/eps for fields (B, nx, N, N)."""
    vgrid = tables.vgrid
    limit = max_dt(xgrid, vgrid, eps)
    if dt > limit * (1.0 + 1e-12):
        raise ValueError("dt exceeds min(dx/(2 vmax), epsilon)")
    if filler is None:
        filler = KineticGhostFiller(bc, vgrid)
    B, nx = f.shape[:2]
    n = vgrid.n
    vel = np.repeat(vgrid.nodes, n)
    buf = np.empty((B, nx, n * n))

    def rhs(g):
        kernels.transport_sweep(filler(g), vel, 1.0 / xgrid.dx, buf)
        tr = buf.reshape(B, nx, n, n) - g
        return tr + boltzmann_collision(g, tables) / eps

    r1 = rhs(f)
    r2 = rhs(f + dt * r1)
    out = f + (0.5 * dt) * (r1 + r2)
    rho = out.reshape(B, nx, -1).sum(axis=2) * vgrid.cell_measure
    if rho.min() < NEGATIVE_RHO_TOL:
        raise ValueError("transport produced negative density")
    return out
