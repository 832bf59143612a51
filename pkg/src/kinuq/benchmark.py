"""Time each numba kernel against its numpy fallback: python -m kinuq.benchmark"""

import time

import numpy as np

from ._accel import HAS_NUMBA
from . import kernels
from .phase_space import MomentVector, SpatialGrid, VelocityGrid, maxwellian
from .solvers import (BoltzmannConfig, BoundarySpec, EulerGhostFiller,
                      KineticGhostFiller, NuLaw, build_tables,
                      euler_from_moments, to_modes)


def _timeit(fn, *args, min_time=0.2):
    fn(*args)  # warm up (JIT compile for the numba variants)
    n, total = 0, 0.0
    while total < min_time:
        t0 = time.perf_counter()
        fn(*args)
        total += time.perf_counter() - t0
        n += 1
    return total / n


def _moment_batch(rng, b, nx):
    rho = 1.0 + 0.2 * rng.random((b, nx))
    u1, u2 = 0.3 * rng.standard_normal((2, b, nx))
    T = 0.8 + 0.3 * rng.random((b, nx))
    return MomentVector(rho=rho, u1=u1, u2=u2, T=T)


def _workloads():
    rng = np.random.default_rng(0)
    vgrid = VelocityGrid(32, 8.0)
    xgrid = SpatialGrid(100)
    f = maxwellian(_moment_batch(rng, 4, xgrid.n), vgrid)

    tables = build_tables(vgrid, BoltzmannConfig(n_modes=32))
    fhat = to_modes(f[:, 0], tables)
    gain_out = np.empty_like(fhat)
    yield ("gain_sum", kernels.GAIN_VARIANTS,
           (fhat, tables.G, vgrid.n, tables.mf_idx, gain_out), gain_out)

    filler = KineticGhostFiller(BoundarySpec("transmissive", "transmissive"),
                                vgrid)
    vel = np.repeat(vgrid.nodes, vgrid.n)
    sweep_out = np.empty((f.shape[0], xgrid.n, vgrid.n * vgrid.n))
    yield ("transport_sweep", kernels.TRANSPORT_VARIANTS,
           (filler(f), vel, 0.1, sweep_out), sweep_out)

    cells = np.ascontiguousarray(f.reshape(-1, vgrid.n, vgrid.n))
    relax_out = np.empty_like(cells)
    law = NuLaw(1.0, True)
    yield ("bgk_relax", kernels.RELAX_VARIANTS,
           (cells, vgrid.nodes, vgrid.cell_measure, law.coeff,
            law.proportional, 0.5, relax_out), relax_out)

    U = euler_from_moments(_moment_batch(rng, 2000, xgrid.n))
    euler_out = np.empty_like(U)
    yield ("euler_update", kernels.EULER_VARIANTS,
           (EulerGhostFiller(BoundarySpec("transmissive", "transmissive"))(U),
            0.01, euler_out), euler_out)


def main() -> int:
    if not HAS_NUMBA:
        print("numba not importable; timing the numpy fallbacks only")
    print("%-16s %12s %12s %9s" % ("kernel", "numpy [ms]", "numba [ms]",
                                   "speedup"))
    for name, variants, args, out in _workloads():
        t_np = _timeit(variants["numpy"], *args)
        ref = out.copy()
        if not HAS_NUMBA:
            print("%-16s %12.3f %12s %9s" % (name, 1e3 * t_np, "-", "-"))
            continue
        t_nb = _timeit(variants["numba"], *args)
        if not np.allclose(out, ref, rtol=1e-10, atol=1e-12):
            raise RuntimeError("variant outputs disagree for %s" % name)
        print("%-16s %12.3f %12.3f %8.1fx" % (name, 1e3 * t_np, 1e3 * t_nb,
                                              t_np / t_nb))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
