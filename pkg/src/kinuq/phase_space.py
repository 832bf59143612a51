"""Velocity/space grids, distribution fields, moments and norms.

Velocity space is a uniform 2D grid on [-v_max, v_max)^2 without endpoint
duplication (FFT layout), so rectangle-rule moments are consistent with the
spectral collision solver. Space is a 1D cell-centered grid.
"""

import csv
import struct
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "VelocityGrid",
    "SpatialGrid",
    "DistributionField",
    "MomentVector",
    "moments",
    "maxwellian",
    "weighted_norm",
    "l2_error",
    "write_field_binary",
    "read_field_binary",
    "write_moment_csv",
]

VACUUM_RHO = 1e-14


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform N x N velocity grid, nodes v_i = -v_max + i*dv, dv = 2*v_max/N."""

    n: int
    v_max: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError("velocity grid needs an even node count >= 4")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")

    @property
    def dv(self) -> float:
        return 2.0 * self.v_max / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.v_max + self.dv * np.arange(self.n)

    @cached_property
    def v1(self) -> np.ndarray:
        return np.broadcast_to(self.nodes[:, None], (self.n, self.n))

    @cached_property
    def v2(self) -> np.ndarray:
        return np.broadcast_to(self.nodes[None, :], (self.n, self.n))

    @cached_property
    def speed_sq(self) -> np.ndarray:
        return self.v1**2 + self.v2**2

    @property
    def cell_measure(self) -> float:
        return self.dv**2


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform cell-centered 1D grid on [0, length]."""

    n: int
    length: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("spatial grid needs at least one cell")
        if self.length <= 0:
            raise ValueError("domain length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dx


@dataclass
class DistributionField:
    """Distribution values on a velocity grid, optionally along a spatial grid.

    values has shape (..., nx, nv, nv) when xgrid is set and (..., nv, nv)
    when homogeneous. Leading axes are free (sample batches).
    """

    values: np.ndarray
    vgrid: VelocityGrid
    xgrid: SpatialGrid | None = None

    def __post_init__(self):
        expect = (self.xgrid.n, self.vgrid.n, self.vgrid.n) if self.xgrid else (self.vgrid.n, self.vgrid.n)
        if self.values.shape[-len(expect):] != expect:
            raise ValueError(f"field shape {self.values.shape} does not end in {expect}")

    @property
    def homogeneous(self) -> bool:
        return self.xgrid is None


@dataclass
class MomentVector:
    """Density, bulk velocity and temperature (arrays share a common shape)."""

    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    T: np.ndarray

    @property
    def energy(self) -> np.ndarray:
        # total energy density for d_v = 2: E = 0.5*rho*|u|^2 + rho*T
        return 0.5 * self.rho * (self.u1**2 + self.u2**2) + self.rho * self.T


def moments(values: np.ndarray, vgrid: VelocityGrid) -> MomentVector:
    """Rectangle-rule moments over the last two (velocity) axes.

    Raises on vacuum cells (rho <= 1e-14); upstream solvers treat that as a
    corrupted state rather than a value to propagate.
    """
    w = vgrid.cell_measure
    rho = values.sum(axis=(-2, -1)) * w
    if np.any(rho <= VACUUM_RHO) or not np.all(np.isfinite(rho)):
        raise ValueError("vacuum cell in moment evaluation")
    u1 = (values * vgrid.v1).sum(axis=(-2, -1)) * w / rho
    u2 = (values * vgrid.v2).sum(axis=(-2, -1)) * w / rho
    e2 = (values * vgrid.speed_sq).sum(axis=(-2, -1)) * w
    T = (e2 / rho - (u1**2 + u2**2)) / 2.0
    return MomentVector(rho=rho, u1=u1, u2=u2, T=T)


def maxwellian(mom: MomentVector, vgrid: VelocityGrid) -> np.ndarray:
    """Pointwise Maxwellian rho/(2 pi T) * exp(-|v-u|^2 / (2T)).

    Broadcasts over any common moment shape. Warns (does not raise) when the
    grid clips off more than 0.1% of the intended mass.
    """
    rho = np.asarray(mom.rho, dtype=float)
    u1 = np.asarray(mom.u1, dtype=float)
    u2 = np.asarray(mom.u2, dtype=float)
    T = np.asarray(mom.T, dtype=float)
    if np.any(rho <= 0) or np.any(T <= 0) or not (
        np.all(np.isfinite(rho)) and np.all(np.isfinite(T))
        and np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))
    ):
        raise ValueError("invalid Maxwellian moments")
    r = rho[..., None, None]
    t = T[..., None, None]
    arg = (vgrid.v1 - u1[..., None, None]) ** 2 + (vgrid.v2 - u2[..., None, None]) ** 2
    out = r / (2.0 * np.pi * t) * np.exp(-arg / (2.0 * t))
    recovered = out.sum(axis=(-2, -1)) * vgrid.cell_measure
    if np.any(recovered < 0.999 * rho):
        worst = float(np.min(recovered / rho))
        warnings.warn(
            f"Maxwellian mass loss: grid recovers only {worst:.4f} of the requested density",
            RuntimeWarning,
            stacklevel=2,
        )
    return out


def weighted_norm(values: np.ndarray, vgrid: VelocityGrid, p: int = 2, s: float = 0.0,
                  xgrid: SpatialGrid | None = None) -> float:
    """Discrete L^p_s norm (sum |f|^p (1+|v|)^s dv^2 [dx])^(1/p), p in {1,2}."""
    if p not in (1, 2):
        raise ValueError("weighted_norm supports p in {1, 2}")
    weight = (1.0 + np.sqrt(vgrid.speed_sq)) ** s if s != 0.0 else 1.0
    total = (np.abs(values) ** p * weight).sum() * vgrid.cell_measure
    if xgrid is not None:
        total *= xgrid.dx
    return float(total ** (1.0 / p))


def l2_error(estimate: np.ndarray, reference: np.ndarray) -> float:
    """Relative discrete L2 error over all nodes of the field."""
    ref = np.linalg.norm(np.asarray(reference, dtype=float).ravel())
    if ref == 0.0 or not np.isfinite(ref):
        raise ValueError("degenerate reference in error evaluation")
    diff = np.linalg.norm((np.asarray(estimate, dtype=float) - reference).ravel())
    return float(diff / ref)


def write_field_binary(path, values: np.ndarray) -> None:
    """Flat dump: uint32 ndim, uint32 dims, then float64 payload, little endian."""
    arr = np.ascontiguousarray(values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.tobytes())


def read_field_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (ndim,) = struct.unpack("<I", fh.read(4))
        if ndim < 1 or ndim > 8:
            raise ValueError(f"binary field header reports {ndim} dimensions")
        dims = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
        payload = fh.read()
    arr = np.frombuffer(payload, dtype="<f8")
    if arr.size != int(np.prod(dims)):
        raise ValueError("binary field payload does not match header dims")
    return arr.reshape(dims).copy()


def write_moment_csv(path, xgrid: SpatialGrid, mom: MomentVector) -> None:
    """Moment profiles as CSV columns x,rho,u1,u2,T at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "rho", "u1", "u2", "T"])
        for i, x in enumerate(xgrid.centers):
            writer.writerow([
                format(v, ".17g")
                for v in (x, mom.rho[i], mom.u1[i], mom.u2[i], mom.T[i])
            ])
