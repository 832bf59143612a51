import numpy as np
import pytest

from kinuq import (
    MomentVector,
    SpatialGrid,
    VelocityGrid,
    l2_error,
    maxwellian,
    moments,
    read_field_binary,
    weighted_norm,
    write_field_binary,
    write_moment_csv,
)


@pytest.fixture
def grid():
    return VelocityGrid(n=64, v_max=8.0)


def scalar_moments(rho, u1, u2, T):
    return MomentVector(rho=np.float64(rho), u1=np.float64(u1), u2=np.float64(u2), T=np.float64(T))


def test_grid_layout_is_fft_style(grid):
    assert grid.nodes[0] == -8.0
    assert grid.nodes[-1] == 8.0 - grid.dv
    assert 0.0 in grid.nodes
    assert abs(grid.dv - 0.25) < 1e-15


def test_maxwellian_peak_value(grid):
    f = maxwellian(scalar_moments(1.0, 0.0, 0.0, 1.0), grid)
    i0 = np.where(grid.nodes == 0.0)[0][0]
    assert abs(f[i0, i0] - 1.0 / (2.0 * np.pi)) < 1e-15


def test_moment_round_trip(grid):
    mom = scalar_moments(0.7, 0.5, -0.25, 1.3)
    f = maxwellian(mom, grid)
    rec = moments(f, grid)
    assert abs(rec.rho - 0.7) < 1e-8
    assert abs(rec.u1 - 0.5) < 1e-8
    assert abs(rec.u2 + 0.25) < 1e-8
    assert abs(rec.T - 1.3) < 1e-8


def test_mass_loss_warns_not_raises(grid):
    with pytest.warns(RuntimeWarning, match="mass loss"):
        f = maxwellian(scalar_moments(1.0, 16.0, 16.0, 1.0), grid)
    assert np.all(np.isfinite(f))


def test_invalid_moments_rejected(grid):
    with pytest.raises(ValueError, match="invalid Maxwellian moments"):
        maxwellian(scalar_moments(1.0, 0.0, 0.0, -1.0), grid)
    with pytest.raises(ValueError, match="invalid Maxwellian moments"):
        maxwellian(scalar_moments(-0.5, 0.0, 0.0, 1.0), grid)


def test_vacuum_cell_rejected(grid):
    f = np.zeros((grid.n, grid.n))
    with pytest.raises(ValueError, match="vacuum cell"):
        moments(f, grid)


def test_moments_batch_shapes(grid):
    mom = MomentVector(
        rho=np.array([1.0, 0.5]),
        u1=np.array([0.0, 1.0]),
        u2=np.array([0.0, -1.0]),
        T=np.array([1.0, 2.0]),
    )
    f = maxwellian(mom, grid)
    assert f.shape == (2, grid.n, grid.n)
    rec = moments(f, grid)
    assert rec.rho.shape == (2,)
    assert np.allclose(rec.T, mom.T, atol=1e-7)


def test_weighted_norm_homogeneity(grid):
    f = maxwellian(scalar_moments(1.0, 0.0, 0.0, 1.0), grid)
    for p in (1, 2):
        n1 = weighted_norm(f, grid, p=p, s=1.0)
        n3 = weighted_norm(3.0 * f, grid, p=p, s=1.0)
        assert abs(n3 - 3.0 * n1) < 1e-12 * n1
    with pytest.raises(ValueError):
        weighted_norm(f, grid, p=3)


def test_weighted_norm_matches_direct_sum(grid):
    f = maxwellian(scalar_moments(1.0, 0.0, 0.0, 1.0), grid)
    s = 2.0
    direct = (f**2 * (1.0 + np.sqrt(grid.speed_sq)) ** s).sum() * grid.dv**2
    assert abs(weighted_norm(f, grid, p=2, s=s) - np.sqrt(direct)) < 1e-14


def test_l2_error_basic(grid):
    f = maxwellian(scalar_moments(1.0, 0.0, 0.0, 1.0), grid)
    assert l2_error(f, f) == 0.0
    assert abs(l2_error(1.1 * f, f) - 0.1) < 1e-12
    with pytest.raises(ValueError, match="degenerate reference"):
        l2_error(f, np.zeros_like(f))


def test_binary_round_trip(tmp_path, grid):
    f = maxwellian(scalar_moments(1.0, 0.3, -0.2, 1.1), grid)
    path = tmp_path / "field.bin"
    write_field_binary(path, f)
    g = read_field_binary(path)
    assert g.shape == f.shape
    assert np.array_equal(f, g)


def test_binary_header_is_little_endian(tmp_path):
    path = tmp_path / "tiny.bin"
    write_field_binary(path, np.arange(6.0).reshape(2, 3))
    raw = path.read_bytes()
    assert raw[:4] == (2).to_bytes(4, "little")
    assert raw[4:8] == (2).to_bytes(4, "little")
    assert raw[8:12] == (3).to_bytes(4, "little")
    assert len(raw) == 12 + 6 * 8


def test_moment_csv_round_trip(tmp_path):
    xg = SpatialGrid(n=5, length=1.0)
    mom = MomentVector(
        rho=np.linspace(1.0, 0.125, 5),
        u1=np.linspace(-0.1, 0.1, 5),
        u2=np.zeros(5),
        T=np.linspace(1.0, 0.8, 5),
    )
    path = tmp_path / "profile.csv"
    write_moment_csv(path, xg, mom)
    rows = path.read_text().strip().split("\n")
    assert rows[0] == "x,rho,u1,u2,T"
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    assert np.array_equal(data[:, 1], mom.rho)
    assert np.array_equal(data[:, 4], mom.T)
    assert np.array_equal(data[:, 0], xg.centers)


def test_bad_grids_rejected():
    with pytest.raises(ValueError):
        VelocityGrid(n=5, v_max=8.0)
    with pytest.raises(ValueError):
        VelocityGrid(n=32, v_max=-1.0)
    with pytest.raises(ValueError):
        SpatialGrid(n=0)
