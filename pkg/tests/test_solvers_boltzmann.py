import numpy as np
import pytest

from kinuq.phase_space import (MomentVector, SpatialGrid, VelocityGrid,
                               maxwellian, moments)
from kinuq.solvers import (BoltzmannConfig, BoundarySpec, bgk_homogeneous_exact,
                           boltzmann_collision, boltzmann_step_rk2, build_tables,
                           from_modes, homogeneous_solve, to_modes)

S, RHO0, SIGMA = 0.2, 0.125, 0.5


def two_bumps(vgrid, z=0.0):
    c1 = 2.0 + S * z
    c2 = -(1.0 + S * z)
    g1 = np.exp(-((vgrid.v1 - c1) ** 2 + (vgrid.v2 - c1) ** 2) / SIGMA)
    g2 = np.exp(-((vgrid.v1 - c2) ** 2 + (vgrid.v2 - c2) ** 2) / SIGMA)
    return RHO0 / (2.0 * np.pi) * (g1 + g2)


@pytest.fixture(scope="module")
def vg32():
    return VelocityGrid(32, 8.0)


@pytest.fixture(scope="module")
def tables32(vg32):
    return build_tables(vg32, BoltzmannConfig(n_modes=32))


@pytest.fixture(scope="module")
def tables32_fast(vg32):
    # kernel constant scaled so the loss rate is about 1 for the bump datum
    b0 = 1.0 / (2.0 * np.pi * 0.0625)
    return build_tables(vg32, BoltzmannConfig(n_modes=32, b0=b0))


def test_mode_transform_round_trip(vg32, tables32):
    rng = np.random.default_rng(3)
    f = rng.random((2, 32, 32))
    back = from_modes(to_modes(f, tables32), tables32)
    assert np.abs(back - f).max() < 1e-12


def test_equilibrium_annihilation_calibrated_by_mode_doubling(vg32, tables32):
    mom = MomentVector(np.array(1.0), np.array(0.3), np.array(-0.2), np.array(1.5))
    f32 = maxwellian(mom, vg32)[None]
    q32 = boltzmann_collision(f32, tables32)
    r32 = np.linalg.norm(q32) / np.linalg.norm(f32)
    assert r32 < 1e-6

    vg16 = VelocityGrid(16, 8.0)
    tb16 = build_tables(vg16, BoltzmannConfig(n_modes=16))
    f16 = maxwellian(mom, vg16)[None]
    q16 = boltzmann_collision(f16, tb16)
    r16 = np.linalg.norm(q16) / np.linalg.norm(f16)
    assert r32 < r16 / 50.0  # spectral accuracy in the mode count


def test_collision_invariants_vanish(vg32, tables32):
    f = two_bumps(vg32)[None] + 1e-3 * np.exp(-vg32.speed_sq / 3.0)
    q = boltzmann_collision(f, tables32)[0]
    w = vg32.cell_measure
    l1 = np.abs(f).sum() * w
    assert abs(q.sum() * w) < 1e-10 * l1
    assert abs((q * vg32.v1).sum() * w) < 1e-10 * l1
    assert abs((q * vg32.v2).sum() * w) < 1e-10 * l1
    assert abs((q * vg32.speed_sq).sum() * w) < 1e-10 * l1


def test_collision_diverged_detection(vg32, tables32):
    f = two_bumps(vg32)[None].copy()
    f[0, 3, 3] = np.nan
    with pytest.raises(ValueError, match="collision evaluation diverged"):
        boltzmann_collision(f, tables32)


def test_rk4_conserves_moments_over_full_run(vg32, tables32):
    f0 = two_bumps(vg32)[None]
    m0 = moments(f0, vg32)
    (fT,) = homogeneous_solve(f0, "boltzmann_rk4", [10.0], vgrid=vg32,
                              tables=tables32, dt=0.05)
    mT = moments(fT, vg32)
    assert abs(mT.rho[0] - m0.rho[0]) < 1e-8 * m0.rho[0]
    assert abs(mT.u1[0] - m0.u1[0]) < 1e-8
    assert abs(mT.u2[0] - m0.u2[0]) < 1e-8
    assert abs(mT.T[0] - m0.T[0]) < 1e-6 * m0.T[0]


def test_rk4_fourth_order_richardson(vg32, tables32_fast):
    f0 = two_bumps(vg32)[None]
    ref = homogeneous_solve(f0, "boltzmann_rk4", [0.8], vgrid=vg32,
                            tables=tables32_fast, dt=0.00625)[0]
    coarse = homogeneous_solve(f0, "boltzmann_rk4", [0.8], vgrid=vg32,
                               tables=tables32_fast, dt=0.05)[0]
    fine = homogeneous_solve(f0, "boltzmann_rk4", [0.8], vgrid=vg32,
                             tables=tables32_fast, dt=0.025)[0]
    ratio = np.linalg.norm(coarse - ref) / np.linalg.norm(fine - ref)
    assert 12.0 < ratio < 20.0


def test_trajectory_approaches_equilibrium(vg32, tables32_fast):
    f0 = two_bumps(vg32)[None]
    finf = maxwellian(moments(f0, vg32), vg32)
    f5, f10 = homogeneous_solve(f0, "boltzmann_rk4", [5.0, 10.0], vgrid=vg32,
                                tables=tables32_fast, dt=0.05)
    d5 = np.linalg.norm(f5 - finf)
    d10 = np.linalg.norm(f10 - finf)
    assert d10 < d5 < np.linalg.norm(f0 - finf)


def test_bgk_exact_path_matches_closed_form(vg32):
    f0 = two_bumps(vg32)[None]
    got = homogeneous_solve(f0, "bgk_exact", [0.0, 0.7, 3.0], vgrid=vg32, nu=0.8)
    for t, g in zip([0.0, 0.7, 3.0], got):
        assert np.array_equal(g, bgk_homogeneous_exact(f0, vg32, 0.8, t))


def test_homogeneous_solve_rejects_bad_input(vg32, tables32):
    f0 = two_bumps(vg32)[None]
    with pytest.raises(ValueError, match="dt <= 0.05"):
        homogeneous_solve(f0, "boltzmann_rk4", [1.0], vgrid=vg32,
                          tables=tables32, dt=0.1)
    with pytest.raises(ValueError, match="unknown homogeneous model"):
        homogeneous_solve(f0, "euler", [1.0], vgrid=vg32)
    with pytest.raises(ValueError, match="ascending"):
        homogeneous_solve(f0, "bgk_exact", [1.0, 0.5], vgrid=vg32)


def test_rk2_step_conserves_totals_periodic(vg32, tables32):
    xg = SpatialGrid(20, 1.0)
    x = xg.centers
    rho = 1.0 + 0.2 * np.sin(2 * np.pi * x)
    mom = MomentVector(rho[None], np.zeros((1, 20)), np.zeros((1, 20)),
                       np.full((1, 20), 1.2))
    f = maxwellian(mom, vg32)
    bc = BoundarySpec("periodic", "periodic")
    w = vg32.cell_measure * xg.dx
    mass0 = f.sum() * w
    en0 = (f * vg32.speed_sq).sum() * w
    dt = min(xg.dx / (2 * vg32.v_max), 1e-2)
    g = f
    for _ in range(5):
        g = boltzmann_step_rk2(g, tables32, dt, 1e-2, bc, xg)
    assert abs(g.sum() * w - mass0) < 1e-10 * mass0
    assert abs((g * vg32.speed_sq).sum() * w - en0) < 1e-10 * en0


def test_rk2_step_rejects_large_dt(vg32, tables32):
    xg = SpatialGrid(20, 1.0)
    f = np.broadcast_to(two_bumps(vg32), (1, 20, 32, 32)).copy()
    bc = BoundarySpec("periodic", "periodic")
    with pytest.raises(ValueError, match="dt exceeds"):
        boltzmann_step_rk2(f, tables32, 1.0, 1e-2, bc, xg)
