"""Compressible Euler solver (1D in x, 2D velocity closure, gamma = 2).

State layout is (B, 4, nx) with conserved variables (rho, rho u1, rho u2, E),
E = 0.5 rho |u|^2 + rho T and p = rho T.
"""

import numpy as np

from .. import kernels
from ..phase_space import MomentVector, SpatialGrid, VelocityGrid, maxwellian
from .boundaries import BoundarySpec, EulerGhostFiller

__all__ = ["GAMMA", "euler_from_moments", "moments_from_euler", "euler_primitives",
           "euler_step", "euler_max_dt", "euler_equilibrium", "check_euler_state"]

GAMMA = kernels.GAMMA


def euler_from_moments(mom: MomentVector) -> np.ndarray:
    """Pack (rho, u1, u2, T) arrays of shape (B, nx) into a (B, 4, nx) state."""
    rho = np.asarray(mom.rho, dtype=float)
    u1 = np.asarray(mom.u1, dtype=float)
    u2 = np.asarray(mom.u2, dtype=float)
    T = np.asarray(mom.T, dtype=float)
    U = np.stack([rho, rho * u1, rho * u2,
                  0.5 * rho * (u1**2 + u2**2) + rho * T], axis=-2)
    return np.ascontiguousarray(U)


def euler_primitives(U: np.ndarray):
    rho = U[..., 0, :]
    u1 = U[..., 1, :] / rho
    u2 = U[..., 2, :] / rho
    T = (U[..., 3, :] - 0.5 * rho * (u1**2 + u2**2)) / rho
    return rho, u1, u2, T


def moments_from_euler(U: np.ndarray) -> MomentVector:
    rho, u1, u2, T = euler_primitives(U)
    return MomentVector(rho, u1, u2, T)


def check_euler_state(U: np.ndarray):
    rho = U[..., 0, :]
    if not np.all(np.isfinite(U)):
        raise ValueError("Euler state invalid")
    if np.any(rho <= 0.0):
        raise ValueError("Euler state invalid")
    internal = U[..., 3, :] - 0.5 * (U[..., 1, :] ** 2 + U[..., 2, :] ** 2) / rho
    if np.any(internal <= 0.0):
        raise ValueError("Euler state invalid")


def euler_max_dt(U: np.ndarray, xgrid: SpatialGrid, cfl: float = 0.9) -> float:
    rho, u1, _, T = euler_primitives(U)
    smax = (np.abs(u1) + np.sqrt(GAMMA * T)).max()
    return cfl * xgrid.dx / smax


def euler_step(U: np.ndarray, dt: float, bc: BoundarySpec, xgrid: SpatialGrid,
               filler: EulerGhostFiller = None) -> np.ndarray:
    """One MUSCL-Hancock step with the Rusanov flux."""
    if filler is None:
        filler = EulerGhostFiller(bc)
    check_euler_state(U)
    out = np.empty_like(U)
    kernels.euler_update(filler(U), dt / xgrid.dx, out)
    check_euler_state(out)
    return out


def euler_equilibrium(U: np.ndarray, vgrid: VelocityGrid) -> np.ndarray:
    """Per-cell Maxwellian of the Euler state, shape (B, nx, N, N)."""
    return maxwellian(moments_from_euler(U), vgrid)
