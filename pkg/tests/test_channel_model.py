import itertools

import numpy as np
import pytest

from irspilot.channel_model import (
    ChannelRealization,
    GeometryConfig,
    SystemDims,
    circle_center,
    complex_normal,
    dbm_to_watts,
    effective_channels,
    make_rng,
    path_loss_linear,
    place_users,
    sample_channels,
    true_lambdas,
    user_positions,
)
from irspilot.numerics import numerical_rank

GEO = GeometryConfig()


def test_path_loss_reference_distance():
    assert path_loss_linear(1.0, 4.2, GEO) == pytest.approx(0.01, rel=1e-15)


@pytest.mark.parametrize(
    "distance, alpha, expected",
    [(100.0, 2.2, 3.981071705534969e-07), (10.0, 2.1, 7.943282347242822e-05)],
)
def test_path_loss_values(distance, alpha, expected):
    assert path_loss_linear(distance, alpha, GEO) == pytest.approx(expected, rel=1e-12)


def test_path_loss_monotone():
    d = np.linspace(1, 200, 500)
    for alpha in (2.1, 2.2, 4.2):
        assert np.all(np.diff(path_loss_linear(d, alpha, GEO)) < 0)


@pytest.mark.parametrize("d", [0.0, -3.0])
def test_path_loss_domain(d):
    with pytest.raises(ValueError):
        path_loss_linear(d, 2.0, GEO)


def test_dbm_conversion():
    assert dbm_to_watts(23.0) == pytest.approx(0.19952623149688797, rel=1e-12)


def test_circle_center_defaults():
    x, y = circle_center(GEO)
    assert x == pytest.approx(104.625, abs=1e-12)
    assert y == pytest.approx(8.866192813152667, abs=1e-12)


def test_place_users_zero_radius():
    geo = GeometryConfig(circle_radius=0.0)
    d_bs, d_irs = place_users(SystemDims(5, 1, 1), geo, make_rng(3))
    np.testing.assert_allclose(d_bs, 105.0, rtol=1e-12)
    np.testing.assert_allclose(d_irs, 10.0, rtol=1e-12)


def test_place_users_uniform_disk_moment():
    # E|u - c| = 2R/3 for a uniform disk of radius R
    dims = SystemDims(10_000, 1, 1)
    ux, uy = user_positions(dims, GEO, make_rng(11))
    cx, cy = circle_center(GEO)
    assert np.mean(np.hypot(ux - cx, uy - cy)) == pytest.approx(2 / 3 * 5, rel=0.02)
    d_bs, d_irs = place_users(dims, GEO, make_rng(11))
    np.testing.assert_allclose(d_bs, np.hypot(ux, uy))
    assert np.all(np.abs(d_irs - 10.0) <= 5.0 + 1e-9)
    assert np.all(np.abs(d_bs - 105.0) <= 5.0 + 1e-9)


def test_infeasible_geometry():
    geo = GeometryConfig(d_bs_irs=100.0, d_center_bs=50.0, d_center_irs=10.0)
    with pytest.raises(ValueError):
        circle_center(geo)


def test_triangle_invariant():
    with pytest.raises(ValueError):
        GeometryConfig(d_bs_irs=10.0, d_center_bs=30.0, d_center_irs=10.0)


def test_sample_deterministic():
    dims = SystemDims(3, 4, 5)
    a = sample_channels(dims, GEO, make_rng(42, 7))
    b = sample_channels(dims, GEO, make_rng(42, 7))
    for name in ("h", "t", "r", "g"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = sample_channels(dims, GEO, make_rng(42, 8))
    assert not np.array_equal(a.h, c.h)


def test_sample_minimal_dims():
    ch = sample_channels(SystemDims(1, 1, 1), GEO, make_rng(0))
    assert ch.h.shape == (1, 1) and ch.t.shape == (1, 1) and ch.r.shape == (1, 1)
    # vectorized complex products may differ from scalar ones in the last bit
    assert ch.g[0, 0, 0] == pytest.approx(ch.t[0, 0] * ch.r[0, 0], rel=1e-15)


def test_complex_normal_variance():
    x = complex_normal(make_rng(5), 0.01, 100_000)
    assert np.mean(np.abs(x) ** 2) == pytest.approx(0.01, rel=0.03)
    assert np.var(x.real) == pytest.approx(0.005, rel=0.03)
    assert np.var(x.imag) == pytest.approx(0.005, rel=0.03)


def test_effective_channels_ones():
    r = np.arange(6).reshape(2, 3) + 1j
    g = effective_channels(np.ones((3, 4)), r)
    for k in range(4):
        np.testing.assert_array_equal(g[k], r)


def test_effective_channels_zero_entry(rng):
    t = rng.standard_normal((3, 2)) + 0j
    t[1, 0] = 0
    g = effective_channels(t, rng.standard_normal((4, 3)) + 0j)
    assert np.all(g[0][:, 1] == 0)


def test_effective_channels_loop_oracle(rng):
    t = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    r = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    g = effective_channels(t, r)
    for k in range(3):
        for n in range(4):
            for m in range(5):
                assert g[k, m, n] == pytest.approx(t[n, k] * r[m, n], rel=1e-15)


def test_effective_channels_shape_mismatch():
    with pytest.raises(ValueError):
        effective_channels(np.ones((3, 2)), np.ones((4, 2)))


def test_realization_rejects_bad_shapes():
    with pytest.raises(ValueError):
        ChannelRealization(h=np.ones((2, 2)), t=np.ones((3, 3)), r=np.ones((2, 3)))


def test_lambdas_constant_rows():
    t = np.tile(np.array([[1 + 1j], [2.0], [-3j]]), (1, 4))
    np.testing.assert_allclose(true_lambdas(t), np.ones((3, 3)))


def test_lambdas_scaled_user(rng):
    t = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    t[:, 1] = 2 * t[:, 0]
    np.testing.assert_allclose(true_lambdas(t), 2.0)


def test_lambdas_scaling_identity(rng):
    ch = sample_channels(SystemDims(4, 3, 5), GEO, make_rng(9))
    lam = true_lambdas(ch.t)
    for k in range(2, 5):
        for n in range(5):
            np.testing.assert_allclose(
                lam[k - 2, n] * ch.g[0][:, n], ch.g[k - 1][:, n], rtol=1e-12
            )


def test_lambdas_degenerate():
    t = np.ones((3, 2), dtype=complex)
    t[2, 0] = 0
    with pytest.raises(ValueError):
        true_lambdas(t)


@pytest.mark.parametrize("M, N", [(2, 5), (4, 4), (6, 3), (1, 3)])
def test_reflected_columns_generic_rank(M, N):
    # any min(M, N) columns of user 1's reflected channels are independent
    for seed in range(100):
        g1 = sample_channels(SystemDims(1, M, N), GEO, make_rng(seed)).g[0]
        if M >= N:
            assert numerical_rank(g1) == N
        else:
            for cols in itertools.islice(itertools.combinations(range(N), M), 10):
                assert numerical_rank(g1[:, cols]) == M
