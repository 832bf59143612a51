import numpy as np
import pytest

from kinuq import SeededStream, draw_uniform, gauss_legendre


def test_draws_are_deterministic_per_seed_and_stream():
    a = SeededStream(42, 3).uniform(1000)
    b = SeededStream(42, 3).uniform(1000)
    assert np.array_equal(a, b)


def test_different_streams_differ():
    a = SeededStream(42, 0).uniform(100)
    b = SeededStream(42, 1).uniform(100)
    c = SeededStream(43, 0).uniform(100)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_values_in_unit_interval():
    x = SeededStream(7, 0).uniform(10**4)
    assert x.dtype == np.float64
    assert x.min() >= 0.0 and x.max() < 1.0


def test_stream_independence_correlation():
    # frozen seed; |corr| stays below 3/sqrt(M) at M = 1e4
    m = 10**4
    a = SeededStream(42, 0).uniform(m)
    b = SeededStream(42, 1).uniform(m)
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 0.03


def test_empty_request_rejected():
    with pytest.raises(ValueError, match="empty sample request"):
        SeededStream(1, 0).uniform(0)
    with pytest.raises(ValueError, match="empty sample request"):
        draw_uniform(SeededStream(1, 0), -5)


def test_sample_set_pairing_identity():
    s = draw_uniform(SeededStream(42, 5), 64)
    t = draw_uniform(SeededStream(42, 5), 64)
    u = draw_uniform(SeededStream(42, 6), 64)
    assert s.same_draws(t)
    assert not s.same_draws(u)
    assert len(s) == 64


def test_gauss_legendre_two_point_rule():
    x, w = gauss_legendre(2)
    half = 1.0 / (2.0 * np.sqrt(3.0))
    assert np.allclose(x, [0.5 - half, 0.5 + half], atol=1e-15)
    assert np.allclose(w, [0.5, 0.5], atol=1e-15)


def test_gauss_legendre_integrates_z_squared_exactly():
    for order in (2, 8, 32):
        x, w = gauss_legendre(order)
        assert abs(np.dot(w, x**2) - 1.0 / 3.0) < 1e-15
        assert abs(w.sum() - 1.0) < 1e-14


def test_gauss_legendre_polynomial_exactness_degree():
    # order n integrates degree 2n-1 exactly
    for order in (3, 5, 11):
        x, w = gauss_legendre(order)
        for k in range(2 * order):
            assert abs(np.dot(w, x**k) - 1.0 / (k + 1)) < 1e-13


def test_gauss_legendre_rejects_bad_orders():
    for order in (0, -1, 65, 1000):
        with pytest.raises(ValueError, match="unsupported quadrature order"):
            gauss_legendre(order)
