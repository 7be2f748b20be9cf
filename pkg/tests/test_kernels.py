import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from app.utils import kernels


RHOS = [0.05, 0.3, 1.0, 1.9, 2.1, 3.0]


@pytest.fixture
def random_pairs():
    rng = np.random.default_rng(20240611)
    return list(zip(rng.uniform(0.0, 5.0, 1000), rng.uniform(1.0, 3.0, 1000)))


def test_kernels_at_time_zero(random_pairs):
    for rho, sigma in random_pairs:
        ev = kernels.kernel_eval(0.0, rho, sigma)
        assert abs(ev.k0 - 1.0) <= 1e-12
        assert abs(ev.k1) <= 1e-12
        assert abs(ev.k0dot) <= 1e-12
        assert abs(ev.k1dot - 1.0) <= 1e-12


def test_k0_velocity_is_minus_symbol_times_k1(random_pairs):
    t = np.array([0.01, 0.3, 1.0, 4.0, 25.0])
    for rho, sigma in random_pairs:
        ev = kernels.kernel_eval(t, rho, sigma)
        a = rho ** (2.0 * sigma)
        np.testing.assert_allclose(ev.k0dot, -a * ev.k1, rtol=1e-10, atol=1e-300)


def _ode_residual(value: str, t: np.ndarray, rho: float, sigma: float, h: float) -> float:
    """sup_t |K'' + A K' + A K| with second-order central differences."""
    a = rho ** (2.0 * sigma)
    at = getattr(kernels.kernel_eval(t, rho, sigma), value).real
    ahead = getattr(kernels.kernel_eval(t + h, rho, sigma), value).real
    behind = getattr(kernels.kernel_eval(t - h, rho, sigma), value).real
    second = (ahead - 2.0 * at + behind) / h ** 2
    first = (ahead - behind) / (2.0 * h)
    return float(np.max(np.abs(second + a * first + a * at)))


def test_ode_residual_converges_at_second_order():
    rng = np.random.default_rng(7)
    t = np.linspace(0.5, 2.0, 16)
    steps = np.array([0.04, 0.02, 0.01, 0.005])
    orders = []
    for _ in range(100):
        sigma = rng.uniform(1.0, 2.5)
        # symbol A in [0.25, 6] keeps h |lambda| small and the residual above roundoff
        rho = rng.uniform(0.25, 6.0) ** (1.0 / (2.0 * sigma))
        for value in ("k0", "k1"):
            residuals = [_ode_residual(value, t, rho, sigma, h) for h in steps]
            orders.append(np.polyfit(np.log(steps), np.log(residuals), 1)[0])
    assert min(orders) > 1.8
    assert max(orders) < 2.2


def test_kernels_are_real():
    t = np.linspace(0.0, 20.0, 41)[:, None]
    rho = np.logspace(-3, 1.5, 60)[None, :]
    for sigma in (1.0, 1.5, 2.0):
        ev = kernels.kernel_eval(t, rho, sigma)
        for part in (ev.k0, ev.k1, ev.k0dot, ev.k1dot):
            assert np.max(np.abs(part.imag)) < 1e-10


@pytest.mark.parametrize("rho", RHOS)
def test_kernels_match_ode_solver(rho):
    a = rho ** 2.0
    t_eval = np.linspace(0.0, 5.0, 26)

    def rhs(_, y):
        return [y[1], -a * y[1] - a * y[0]]

    for start, value, derivative in (((1.0, 0.0), "k0", "k0dot"), ((0.0, 1.0), "k1", "k1dot")):
        sol = solve_ivp(rhs, (0.0, 5.0), start, t_eval=t_eval, method="DOP853", rtol=1e-12, atol=1e-14)
        ev = kernels.kernel_eval(t_eval, rho, 1.0)
        np.testing.assert_allclose(getattr(ev, value).real, sol.y[0], atol=1e-8)
        np.testing.assert_allclose(getattr(ev, derivative).real, sol.y[1], atol=1e-8)


@pytest.mark.parametrize("sigma", [1.0, 2.0])
def test_time_derivatives_match_central_differences(sigma):
    t = np.linspace(0.2, 6.0, 30)
    rho = np.array([0.1, 0.7, 1.2, 1.6])[:, None]
    delta = 1e-5
    a = kernels.symbol(rho, sigma)
    ev = kernels.kernel_eval(t, rho, sigma)
    forward = kernels.kernel_eval(t + delta, rho, sigma)
    backward = kernels.kernel_eval(t - delta, rho, sigma)

    np.testing.assert_allclose(((forward.k1 - backward.k1) / (2 * delta)).real, ev.k1dot.real, atol=1e-7)
    np.testing.assert_allclose(((forward.k0 - backward.k0) / (2 * delta)).real, ev.k0dot.real, atol=1e-7)
    # K'' = -A K' - A K
    second = ((forward.k1dot - backward.k1dot) / (2 * delta)).real
    np.testing.assert_allclose(second, (-a * (ev.k1dot + ev.k1)).real, atol=1e-6)


def test_double_root_closed_form():
    t = np.array([0.5, 1.0, 3.0])
    ev = kernels.kernel_eval(t, 2.0, 1.0)
    np.testing.assert_allclose(ev.k1.real, t * np.exp(-2 * t), rtol=1e-12)
    np.testing.assert_allclose(ev.k0.real, np.exp(-2 * t) * (1 + 2 * t), rtol=1e-12)


def test_kernels_are_continuous_across_the_double_root():
    t = np.array([0.5, 1.0, 3.0])
    at_root = kernels.kernel_eval(t, 2.0, 1.0)
    for rho in (2.0 * (1 - 1e-7), 2.0 * (1 + 1e-7)):
        nearby = kernels.kernel_eval(t, rho, 1.0)
        np.testing.assert_allclose(nearby.k0.real, at_root.k0.real, atol=1e-6)
        np.testing.assert_allclose(nearby.k1.real, at_root.k1.real, atol=1e-6)


def test_root_sum_and_product():
    rho = np.logspace(-3, 2, 200)
    for sigma in (1.0, 1.5, 2.0):
        roots = kernels.char_roots(sigma, rho)
        a = kernels.symbol(rho, sigma)
        np.testing.assert_allclose((roots.lambda1 + roots.lambda2).real, -a, rtol=1e-10)
        np.testing.assert_allclose((roots.lambda1 * roots.lambda2).real, a, rtol=1e-10)


def test_small_frequency_roots():
    rho = 1e-2
    roots = kernels.char_roots(1.0, rho)
    lam1 = complex(roots.lambda1)
    assert lam1.real == pytest.approx(-rho ** 2 / 2, rel=1e-12)
    assert lam1.imag - rho == pytest.approx(-rho ** 3 / 8, rel=1e-3)

    ref1, _ = kernels.small_freq_reference(rho, 1.0)
    assert abs(complex(ref1).imag - lam1.imag) < rho ** 3


def test_large_frequency_roots():
    roots = kernels.char_roots(1.0, 10.0)
    lam1, lam2 = complex(roots.lambda1), complex(roots.lambda2)
    assert 0.01 < abs(lam1 + 1.0) < 0.011
    ref1, ref2 = kernels.large_freq_reference(10.0, 1.0)
    assert abs(lam1 - complex(ref1)) < 0.011
    assert abs(lam2 - complex(ref2)) / 100.0 < 0.02


@pytest.mark.parametrize("h", [0.1, 2.0])
@pytest.mark.parametrize("rho", [0.0, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0])
def test_integrated_k1_matches_quadrature(h, rho):
    expected, _ = quad(lambda tau: kernels.kernel_eval(tau, rho, 1.0).k1.real.item(), 0.0, h, epsabs=1e-14, epsrel=1e-12)
    got = kernels.integrated_k1(h, np.array([rho]), 1.0)
    assert got[0] == pytest.approx(expected, rel=1e-8, abs=1e-14)


def test_cutoff_profile():
    sigma = 1.0
    rho0 = kernels.cutoff_radius(sigma)
    assert rho0 == pytest.approx(0.5)
    rho = np.linspace(0.0, 3 * rho0, 301)
    chi = kernels.cutoff_chi(rho, sigma)
    assert np.all(chi[rho <= rho0] == 1.0)
    assert np.all(chi[rho >= 2 * rho0] == 0.0)
    assert np.all(np.diff(chi) <= 0.0)
    assert kernels.cutoff_radius(2.0) == pytest.approx(np.sqrt(2.0) / 4)
