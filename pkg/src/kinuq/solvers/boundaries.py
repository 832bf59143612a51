"""Boundary handling for the 1D transport solvers.

Kinetic fields are (B, nx, N, N); the fill routines return a padded
(B, nx+4, N*N) array with two ghost cells per side, ready for the MUSCL
sweep. Euler states are (B, 4, nx) and get the same padding along x.
"""

from dataclasses import dataclass

import numpy as np

from ..phase_space import VelocityGrid

__all__ = ["BoundarySpec", "KineticGhostFiller", "EulerGhostFiller", "diffusive_wall_bc"]

WALL_FLUX_FLOOR = 1e-300


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary kinds for the two ends of the x interval.

    kind is one of "periodic", "transmissive", "wall"; periodic must be used
    on both sides at once. wall_temp may be a scalar or a per-sample array.
    """

    left: str = "periodic"
    right: str = "periodic"
    wall_temp: object = None

    def __post_init__(self):
        kinds = {"periodic", "transmissive", "wall"}
        if self.left not in kinds or self.right not in kinds:
            raise ValueError("unknown boundary kind")
        if ("periodic" in (self.left, self.right)) and self.left != self.right:
            raise ValueError("periodic boundaries must pair up")
        if "wall" in (self.left, self.right) and self.wall_temp is None:
            raise ValueError("wall boundary needs wall_temp")


def _wall_maxwellian(vgrid: VelocityGrid, temps: np.ndarray) -> np.ndarray:
    # unit-density wall Maxwellian per sample, flattened over velocity
    sq = vgrid.speed_sq.ravel()
    t = temps[:, None]
    return np.exp(-sq[None, :] / (2.0 * t)) / (2.0 * np.pi * t)


def diffusive_wall_bc(f_wall: np.ndarray, wall_temp, vgrid: VelocityGrid, side: str = "left") -> np.ndarray:
    """Ghost values for a diffusive wall next to the given wall-adjacent cells.

    f_wall is (B, N, N). Outgoing (into the domain) velocities carry the wall
    Maxwellian scaled to balance the incoming mass flux; incoming velocities
    keep the interior value so the limiter sees a zero gradient.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be left or right")
    B = f_wall.shape[0]
    temps = np.broadcast_to(np.asarray(wall_temp, dtype=float), (B,)).copy()
    if np.any(temps <= 0.0):
        raise ValueError("wall temperature must be positive")
    vx = np.repeat(vgrid.nodes, vgrid.n)
    out_mask = vx > 0.0 if side == "left" else vx < 0.0
    in_mask = ~out_mask & (vx != 0.0)
    mw = _wall_maxwellian(vgrid, temps)
    denom = (np.abs(vx)[None, :] * mw * out_mask[None, :]).sum(axis=1) * vgrid.cell_measure
    if not np.all(denom > WALL_FLUX_FLOOR):
        raise ValueError("degenerate wall quadrature")
    fw = f_wall.reshape(B, -1)
    influx = (np.abs(vx)[None, :] * fw * in_mask[None, :]).sum(axis=1) * vgrid.cell_measure
    rho_w = influx / denom
    ghost = fw.copy()
    ghost[:, out_mask] = rho_w[:, None] * mw[:, out_mask]
    return ghost.reshape(f_wall.shape)


class KineticGhostFiller:
    """Prebuilt ghost-cell filler for a batch of kinetic fields."""

    def __init__(self, spec: BoundarySpec, vgrid: VelocityGrid):
        self.spec = spec
        self.vgrid = vgrid

    def __call__(self, f: np.ndarray) -> np.ndarray:
        B, nx = f.shape[:2]
        nn = self.vgrid.n * self.vgrid.n
        ff = f.reshape(B, nx, nn)
        fp = np.empty((B, nx + 4, nn))
        fp[:, 2:-2] = ff
        if self.spec.left == "periodic":
            fp[:, :2] = ff[:, -2:]
            fp[:, -2:] = ff[:, :2]
            return fp
        for side, kind in (("left", self.spec.left), ("right", self.spec.right)):
            edge = ff[:, 0] if side == "left" else ff[:, -1]
            if kind == "transmissive":
                ghost = edge
            else:
                ghost = diffusive_wall_bc(
                    edge.reshape(B, self.vgrid.n, self.vgrid.n),
                    self.spec.wall_temp, self.vgrid, side,
                ).reshape(B, nn)
            if side == "left":
                fp[:, 0] = ghost
                fp[:, 1] = ghost
            else:
                fp[:, -1] = ghost
                fp[:, -2] = ghost
        return fp


def _euler_temperature(U: np.ndarray) -> np.ndarray:
    # U is (B, 4, cells)
    rho = U[:, 0]
    ke = 0.5 * (U[:, 1] ** 2 + U[:, 2] ** 2) / rho
    return (U[:, 3] - ke) / rho


class EulerGhostFiller:
    """Ghost-cell filler for Euler states (B, 4, nx).

    The wall variant mirrors the velocity and rescales density so the ghost
    pressure matches the interior while the ghost temperature is wall_temp.
    """

    def __init__(self, spec: BoundarySpec):
        self.spec = spec

    def _wall_ghost(self, cells: np.ndarray, B: int) -> np.ndarray:
        tw = np.broadcast_to(np.asarray(self.spec.wall_temp, dtype=float), (B,))
        if np.any(tw <= 0.0):
            raise ValueError("wall temperature must be positive")
        rho = cells[:, 0]
        u1 = cells[:, 1] / rho
        u2 = cells[:, 2] / rho
        t = _euler_temperature(cells[:, :, None])[:, 0]
        rho_g = rho * t / tw
        ghost = np.empty_like(cells)
        ghost[:, 0] = rho_g
        ghost[:, 1] = -rho_g * u1
        ghost[:, 2] = rho_g * u2
        ghost[:, 3] = 0.5 * rho_g * (u1**2 + u2**2) + rho_g * tw
        return ghost

    def __call__(self, U: np.ndarray) -> np.ndarray:
        B, _, nx = U.shape
        up = np.empty((B, 4, nx + 4))
        up[:, :, 2:-2] = U
        if self.spec.left == "periodic":
            up[:, :, :2] = U[:, :, -2:]
            up[:, :, -2:] = U[:, :, :2]
            return up
        for side, kind in (("left", self.spec.left), ("right", self.spec.right)):
            if kind == "transmissive":
                edge = U[:, :, 0] if side == "left" else U[:, :, -1]
                if side == "left":
                    up[:, :, 0] = edge
                    up[:, :, 1] = edge
                else:
                    up[:, :, -1] = edge
                    up[:, :, -2] = edge
            else:
                # mirror the two interior cells with flipped normal velocity
                for j in (0, 1):
                    cell = U[:, :, j] if side == "left" else U[:, :, -1 - j]
                    ghost = self._wall_ghost(cell, B)
                    if side == "left":
                        up[:, :, 1 - j] = ghost
                    else:
                        up[:, :, nx + 2 + j] = ghost
        return up
