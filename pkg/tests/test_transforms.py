import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import spherical_jn

from app.core.exceptions import InvalidParametersError
from app.schemas.grid import GridMode, GridSpec
from app.utils import transforms as tr


def _radial(n: int, points: int = 2048) -> GridSpec:
    return GridSpec(mode=GridMode.RADIAL, n=n, points=points, extent=tr.self_reciprocal_extent(points))


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_radial_transform_of_gaussian(n):
    spec = _radial(n)
    g = tr.gaussian_field(spec)
    g_hat = tr.to_spectral(g)
    rho = g_hat.grid.rho
    expected = (2 * math.pi) ** (n / 2) * np.exp(-rho ** 2 / 2)
    np.testing.assert_allclose(g_hat.values, expected, atol=1e-8 * (2 * math.pi) ** (n / 2))


@pytest.mark.parametrize("n", [1, 3, 7])
def test_radial_round_trip(n):
    spec = _radial(n)
    g = tr.gaussian_field(spec, width=1.5)
    back = tr.to_physical(tr.to_spectral(g))
    np.testing.assert_allclose(back.values, g.values, atol=1e-8)


@pytest.mark.parametrize("n, points, extent", [(1, 256, 20.0), (2, 128, 16.0)])
def test_full_grid_transform_of_gaussian(n, points, extent):
    spec = GridSpec(mode=GridMode.FULL, n=n, points=points, extent=extent)
    g_hat = tr.to_spectral(tr.gaussian_field(spec))
    expected = (2 * math.pi) ** (n / 2) * np.exp(-g_hat.grid.rho ** 2 / 2)
    np.testing.assert_allclose(g_hat.values.real, expected, atol=1e-10)
    assert np.max(np.abs(g_hat.values.imag)) < 1e-10
    back = tr.to_physical(g_hat)
    np.testing.assert_allclose(back.values, tr.gaussian_field(spec).values, atol=1e-12)


def test_plancherel_on_full_grid():
    spec = GridSpec(mode=GridMode.FULL, n=2, points=64, extent=8.0)
    rng = np.random.default_rng(7)
    f = tr.SpatialField(spec, rng.standard_normal((64, 64)))
    assert tr.spectral_l2_norm(tr.to_spectral(f)) == pytest.approx(tr.lq_norm(f, 2.0), rel=1e-12)


def test_plancherel_on_radial_grid():
    g = tr.gaussian_field(_radial(5))
    assert tr.spectral_l2_norm(tr.to_spectral(g)) == pytest.approx(tr.lq_norm(g, 2.0), rel=1e-8)


@pytest.mark.parametrize("n", [1, 3])
def test_gaussian_norms(n):
    g = tr.gaussian_field(_radial(n))
    assert tr.lq_norm(g, 1.0) == pytest.approx((2 * math.pi) ** (n / 2), rel=1e-8)
    assert tr.lq_norm(g, 2.0) == pytest.approx(math.pi ** (n / 4), rel=1e-8)
    assert tr.lq_norm(g, math.inf) == 1.0
    assert tr.lq_norm(tr.zeros(g.spec), 3.0) == 0.0


def test_lq_norm_stays_finite_for_large_exponents():
    spec = GridSpec(mode=GridMode.RADIAL, n=3, points=512, extent=10.0)
    g = tr.gaussian_field(spec, amplitude=1e3)
    # ||c G||_q = c (2 pi / q)^{3/(2q)}
    q_exp = 200.0
    assert tr.lq_norm(g, q_exp) == pytest.approx(1e3 * (2 * math.pi / q_exp) ** (1.5 / q_exp), rel=1e-6)


def test_lq_norm_rejects_small_exponent():
    with pytest.raises(InvalidParametersError):
        tr.lq_norm(tr.gaussian_field(_radial(3, 64)), 0.5)


def test_riesz_symbol():
    rho = np.array([0.0, 0.5, 2.0])
    np.testing.assert_array_equal(tr.riesz_symbol(0)(rho), [1.0, 1.0, 1.0])
    np.testing.assert_allclose(tr.riesz_symbol(2)(rho), [0.0, 0.25, 4.0])
    np.testing.assert_allclose(tr.riesz_symbol(0.5)(rho), [0.0, math.sqrt(0.5), math.sqrt(2.0)])


@pytest.mark.parametrize(
    "spec",
    [
        GridSpec(mode=GridMode.RADIAL, n=3, points=2048, extent=tr.self_reciprocal_extent(2048)),
        GridSpec(mode=GridMode.FULL, n=1, points=256, extent=20.0),
    ],
)
def test_laplacian_of_gaussian(spec):
    g = tr.gaussian_field(spec)
    lap = tr.to_physical(tr.apply_multiplier(tr.to_spectral(g), tr.riesz_symbol(2.0)))
    r = g.grid.radius
    np.testing.assert_allclose(lap.values, (spec.n - r ** 2) * np.exp(-r ** 2 / 2), atol=1e-7)


def test_shape_mismatch_is_rejected():
    spec = _radial(3, 64)
    with pytest.raises(InvalidParametersError):
        tr.to_spectral(tr.SpatialField(spec, np.zeros(10)))
    with pytest.raises(InvalidParametersError):
        tr.gaussian_field(spec) + tr.gaussian_field(_radial(5, 64))


def test_grid_spec_validation():
    with pytest.raises(ValidationError):
        GridSpec(mode=GridMode.FULL, n=3, points=64, extent=10.0)
    with pytest.raises(ValidationError):
        GridSpec(mode=GridMode.FULL, n=1, points=100, extent=10.0)
    with pytest.raises(ValidationError):
        GridSpec(mode=GridMode.RADIAL, n=4, points=64, extent=10.0)
    with pytest.raises(ValidationError):
        GridSpec(mode=GridMode.RADIAL, n=9, points=64, extent=10.0)


def test_dealias_mask():
    full = tr.get_grid(GridSpec(mode=GridMode.FULL, n=1, points=256, extent=20.0))
    mask = full.dealias_mask()
    assert 0.6 < mask.mean() < 0.7
    assert mask[0]
    radial = tr.get_grid(_radial(3, 64))
    assert radial.dealias_mask().all()


def test_boundary_mass():
    spec = GridSpec(mode=GridMode.RADIAL, n=3, points=256, extent=60.0)
    assert tr.boundary_mass(tr.gaussian_field(spec)) < 1e-100
    assert tr.boundary_mass(tr.SpatialField(spec, np.ones(256))) == 1.0
    assert tr.boundary_mass(tr.zeros(spec)) == 0.0


def test_self_reciprocal_grid():
    grid = tr.get_grid(_radial(3, 512))
    np.testing.assert_allclose(grid.rho, grid.radius, rtol=1e-12)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_radial_kernel_matches_spherical_bessel(n):
    x = np.linspace(0.01, 50.0, 500)
    k = (n - 3) // 2
    double_factorial = float(np.prod(np.arange(2 * k + 1, 0, -2)))
    expected = double_factorial * spherical_jn(k, x) / x ** k
    np.testing.assert_allclose(tr.radial_kernel(n, x), expected, rtol=1e-8, atol=1e-12)
    assert tr.radial_kernel(n, np.array([0.0]))[0] == 1.0


def test_sphere_area():
    assert tr.sphere_area(1) == pytest.approx(2.0)
    assert tr.sphere_area(2) == pytest.approx(2 * math.pi)
    assert tr.sphere_area(3) == pytest.approx(4 * math.pi)


def test_data_norm_of_zero_data():
    blank = tr.zeros(_radial(3, 256))
    assert tr.data_norm((blank, blank), 1.0, 2.0, 1.0) == 0.0


def test_data_norm_is_homogeneous():
    spec = _radial(3, 512)
    g = tr.gaussian_field(spec)
    b = tr.bump_field(spec, width=2.0)
    base = tr.data_norm((g, b), 1.5, 4.0, 2.0)
    assert tr.data_norm((g.scaled(3.0), b.scaled(3.0)), 1.5, 4.0, 2.0) == pytest.approx(3.0 * base, rel=1e-12)


def test_data_norm_of_gaussian_position():
    # ||G||_{L^1} = (2 pi)^{3/2};  ||<D>^2 G||_{L^2}^2 = 4 pi int (1+rho^2)^2 rho^2 e^{-rho^2} = 31 pi^{3/2} / 4
    spec = _radial(3)
    g = tr.gaussian_field(spec)
    expected = (2 * math.pi) ** 1.5 + math.sqrt(31.0 / 4.0) * math.pi ** 0.75
    assert tr.data_norm((g, tr.zeros(spec)), 1.0, 2.0, 1.0) == pytest.approx(expected, rel=1e-6)


def test_data_norm_of_gaussian_velocity():
    spec = _radial(3)
    g = tr.gaussian_field(spec)
    expected = (2 * math.pi) ** 1.5 + math.pi ** 0.75
    assert tr.data_norm((tr.zeros(spec), g), 1.0, 2.0, 1.0) == pytest.approx(expected, rel=1e-8)


def test_cutoff_split_is_a_partition_of_unity():
    spec = _radial(3, 512)
    g_hat = tr.to_spectral(tr.gaussian_field(spec))
    low = tr.apply_multiplier(g_hat, tr.chi_symbol(1.0))
    high = tr.apply_multiplier(g_hat, lambda rho: 1.0 - tr.chi_symbol(1.0)(rho))
    np.testing.assert_allclose((low + high).values, g_hat.values, rtol=1e-14, atol=1e-300)
    # sigma = 1: support of chi ends at 2 rho_0 = 1
    assert np.all(low.values[g_hat.grid.rho >= 1.0] == 0.0)
