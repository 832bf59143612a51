"""The numba and numpy kernel variants must agree on identical inputs."""

import numpy as np
import pytest

from kinuq import kernels
from kinuq._accel import HAS_NUMBA

pytestmark = pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")


def test_gain_variants_agree():
    n = 8
    rng = np.random.default_rng(0)
    nm = n * n
    fhat = rng.normal(size=(3, nm)) + 1j * rng.normal(size=(3, nm))
    G = rng.normal(size=(nm, nm))
    idx = kernels.build_mf_index(n)
    out_a = np.empty_like(fhat)
    out_b = np.empty_like(fhat)
    kernels.GAIN_VARIANTS["numba"](np.ascontiguousarray(fhat), G, n, idx, out_a)
    kernels.GAIN_VARIANTS["numpy"](fhat, G, n, idx, out_b)
    assert np.abs(out_a - out_b).max() < 1e-11 * np.abs(out_a).max()


def test_transport_variants_agree():
    rng = np.random.default_rng(1)
    B, nx, nv = 2, 12, 20
    fp = rng.random((B, nx + 4, nv))
    vel = rng.normal(size=nv)
    out_a = np.empty((B, nx, nv))
    out_b = np.empty((B, nx, nv))
    kernels.TRANSPORT_VARIANTS["numba"](fp, vel, 0.3, out_a)
    kernels.TRANSPORT_VARIANTS["numpy"](fp, vel, 0.3, out_b)
    assert np.abs(out_a - out_b).max() < 1e-14


def test_relax_variants_agree():
    rng = np.random.default_rng(2)
    n = 16
    nodes = -6.0 + (12.0 / n) * np.arange(n)
    f = rng.random((4, n, n)) + 0.05
    out_a = np.empty_like(f)
    out_b = np.empty_like(f)
    ca = kernels.RELAX_VARIANTS["numba"](f, nodes, (12.0 / n) ** 2, 1.0, True, 0.7, out_a)
    cb = kernels.RELAX_VARIANTS["numpy"](f, nodes, (12.0 / n) ** 2, 1.0, True, 0.7, out_b)
    assert ca == 0 and cb == 0
    assert np.abs(out_a - out_b).max() < 1e-10 * np.abs(out_a).max()


def test_euler_variants_agree():
    rng = np.random.default_rng(3)
    B, nx = 2, 25
    rho = 0.5 + rng.random((B, nx + 4))
    u1 = 0.3 * rng.normal(size=(B, nx + 4))
    u2 = 0.3 * rng.normal(size=(B, nx + 4))
    T = 0.8 + rng.random((B, nx + 4))
    up = np.stack([rho, rho * u1, rho * u2,
                   0.5 * rho * (u1**2 + u2**2) + rho * T], axis=1)
    out_a = np.empty((B, 4, nx))
    out_b = np.empty((B, 4, nx))
    kernels.EULER_VARIANTS["numba"](up, 0.01, out_a)
    kernels.EULER_VARIANTS["numpy"](up, 0.01, out_b)
    assert np.abs(out_a - out_b).max() < 1e-12 * np.abs(out_a).max()
