"""Decay-rate verification: envelope checks, rate fits, kernel and linear suites.

Every estimate verified here is a one-sided bound norm <= C (1+t)^e with an
unspecified C. A series passes when value / (1+t)^e stops growing: its sup
over the late half of the window exceeds the sup over the early half by
less than ENVELOPE_GROWTH.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..core.exceptions import FitError, InvalidParametersError
from ..schemas.grid import GridMode, GridSpec
from ..schemas.harness import EnvelopeResult, KernelSuiteResult, RateFit, WeightSpec
from ..schemas.params import DerivedConstants, EpsilonVariant, ProblemParams, Scenario, TheoremVerdict
from ..schemas.run import DataKind
from ..schemas.series import NormSeries
from ..utils.kernels import cutoff_chi, cutoff_radius, kernel_eval
from ..utils.transforms import (
    SpectralField,
    apply_multiplier,
    bump_field,
    chi_symbol,
    data_norm,
    gaussian_field,
    get_grid,
    lq_norm,
    riesz_symbol,
    sphere_area,
    to_physical,
    to_spectral,
    zeros,
)
from . import exponent_service
from .evolution_service import ComponentState, linear_evolve

logger = logging.getLogger(__name__)

ENVELOPE_GROWTH = 1.10
MIN_FIT_SAMPLES = 8
WEIGHTED_COLUMNS = ("u_lq", "u_dsigma", "u_t", "u_d2sigma", "v_lq", "v_dsigma", "v_t", "v_d2sigma")
KERNEL_COLUMN = "kernel_norm"


def build_weights(
    params: ProblemParams,
    verdict: TheoremVerdict,
    consts: DerivedConstants,
    variant: EpsilonVariant = EpsilonVariant.PAPER,
) -> WeightSpec:
    table = exponent_service.predicted_rates(params, verdict, consts, variant)
    exponents: Dict[str, float] = {}
    for name, rates in (("u", table.u), ("v", table.v)):
        exponents[f"{name}_lq"] = rates.rate_lq
        exponents[f"{name}_dsigma"] = rates.rate_mid
        exponents[f"{name}_t"] = rates.rate_mid
        exponents[f"{name}_d2sigma"] = rates.rate_top
    return WeightSpec(scenario=verdict.scenario, exponents=exponents)


def weighted_sum(series: NormSeries, w: WeightSpec) -> np.ndarray:
    """Sum over columns of value(t) / (1+t)^e at every recorded time."""
    times = series.t()
    total = np.zeros_like(times)
    for column, exponent in w.exponents.items():
        total = total + series.column(column) * (1.0 + times) ** (-exponent)
    return total


def x_norm(series: NormSeries, w: WeightSpec, until: Optional[float] = None) -> float:
    """Discrete X(t) norm: sup over recorded times <= until of the weighted sum."""
    if len(series) == 0:
        return 0.0
    values = weighted_sum(series, w)
    if until is not None:
        values = values[series.t() <= until]
    return float(values.max()) if values.size else 0.0


def _window(series: NormSeries, window: Optional[Tuple[float, float]], default_fraction: float) -> Tuple[float, float]:
    if window is not None:
        return float(window[0]), float(window[1])
    horizon = series.times[-1]
    return horizon * default_fraction, horizon


def fit_rate(series: NormSeries, column: str, window: Optional[Tuple[float, float]] = None) -> RateFit:
    """Least-squares slope of log(value) against log(1+t) over the window (default [T/10, T])."""
    if len(series) == 0:
        raise FitError("cannot fit an empty series")
    lo, hi = _window(series, window, 0.1)
    times = series.t()
    values = series.column(column)
    inside = (times >= lo) & (times <= hi)
    t_win, v_win = times[inside], values[inside]
    if t_win.size < MIN_FIT_SAMPLES:
        raise FitError(f"{column}: {t_win.size} samples in [{lo:g}, {hi:g}], need {MIN_FIT_SAMPLES}")
    if np.any(v_win <= 0) or not np.all(np.isfinite(v_win)):
        raise FitError(f"{column}: non-positive or non-finite values in [{lo:g}, {hi:g}]")

    fit = stats.linregress(np.log1p(t_win), np.log(v_win))
    return RateFit(column=column, slope=float(fit.slope), stderr=float(fit.stderr), samples=int(t_win.size), window=(lo, hi))


def envelope_check(
    series: NormSeries,
    column: str,
    exponent: float,
    window: Optional[Tuple[float, float]] = None,
) -> EnvelopeResult:
    """Compare value / (1+t)^e on the two geometric halves of the window (default [T/4, T])."""
    if len(series) == 0:
        return EnvelopeResult(column=column, exponent=exponent, passed=False, note="no data")
    values = series.column(column)
    lo, hi = _window(series, window, 0.25)
    split = math.sqrt(lo * hi) if lo > 0 else 0.5 * hi
    times = series.t()
    ratio = values * (1.0 + times) ** (-exponent)
    early = ratio[(times >= lo) & (times <= split)]
    late = ratio[(times >= split) & (times <= hi)]

    note = "blow-up: series truncated" if series.blow_up else ""
    if early.size == 0 or late.size == 0:
        return EnvelopeResult(
            column=column, exponent=exponent, passed=False, note=(note + "; " if note else "") + "window has no samples"
        )

    early_sup, late_sup = float(early.max()), float(late.max())
    constant = max(early_sup, late_sup)
    passed = bool(math.isfinite(constant) and late_sup <= ENVELOPE_GROWTH * early_sup)

    slope = stderr = None
    try:
        fit = fit_rate(series, column, (lo, hi))
        slope, stderr = fit.slope, fit.stderr
    except FitError:
        pass

    return EnvelopeResult(
        column=column,
        exponent=exponent,
        constant=constant,
        early_sup=early_sup,
        late_sup=late_sup,
        slope=slope,
        slope_stderr=stderr,
        passed=passed,
        note=note,
    )


def check_weighted_envelopes(series: NormSeries, w: WeightSpec, window=None) -> List[EnvelopeResult]:
    return [envelope_check(series, column, w.exponents[column], window) for column in w.exponents]


def gn_envelope_check(
    series: NormSeries,
    params: ProblemParams,
    consts: DerivedConstants,
    scenario: Scenario,
    window: Optional[Tuple[float, float]] = None,
) -> List[EnvelopeResult]:
    """||v||^p1 in L^{m p1}, L^{q p1} and ||u||^p2 in L^{m p2}, L^{q p2} against their source envelopes."""
    exponents = exponent_service.gn_envelope_exponents(params, consts, scenario)
    powers = {"v_lmp1": params.p1, "v_lqp1": params.p1, "u_lmp2": params.p2, "u_lqp2": params.p2}
    results = []
    for column, exponent in exponents.items():
        powered = NormSeries(
            times=list(series.times),
            columns={column: list(series.column(column) ** powers[column])},
            blow_up=series.blow_up,
            blow_up_time=series.blow_up_time,
        )
        results.append(envelope_check(powered, column, exponent, window))
    return results


def kernel_exponent(n: int, sigma: float, a: float, r_exp: float, kernel: str = "k1") -> float:
    """Growth/decay exponent of || F^-1(chi |xi|^a K(t)) ||_{L^r} for t >= 1."""
    inv_r = 0.0 if math.isinf(r_exp) else 1.0 / r_exp
    half_n = n // 2
    value = 0.5 * (2 + half_n) * inv_r - n / (2.0 * sigma) * (1.0 - inv_r) - a / (2.0 * sigma)
    return value + 0.5 if kernel == "k1" else value


def kernel_grid(n: int, sigma: float, t_max: float, points: int = 2048) -> GridSpec:
    """Radial grid wide enough that the low-frequency wave front stays inside up to t_max."""
    extent = 1.4 * t_max + 50.0
    needed = int(math.ceil(3.0 * cutoff_radius(sigma) * extent / math.pi)) + 1
    return GridSpec(mode=GridMode.RADIAL, n=n, points=max(points, needed), extent=extent)


def _require_lemma_range(n: int, sigma: float) -> None:
    if n <= sigma:
        raise InvalidParametersError(f"kernel estimates need n > sigma (got n={n}, sigma={sigma})")
    if n % 2 == 0:
        raise InvalidParametersError(f"kernel suite evaluates radially and needs odd n (got {n})")


def kernel_profile(spec: GridSpec, sigma: float, a: float, t: float, kernel: str = "k1") -> SpectralField:
    """chi(|xi|) |xi|^a K(t, xi) on the frequency nodes of spec."""
    evaluated = kernel_eval(t, get_grid(spec).rho, sigma).real()
    propagator = SpectralField(spec, evaluated.k1 if kernel == "k1" else evaluated.k0)
    return apply_multiplier(apply_multiplier(propagator, riesz_symbol(a)), chi_symbol(sigma))


def kernel_majorant(n: int, sigma: float, a: float, t: float, kernel: str = "k1", points: int = 20001) -> float:
    """(2 pi)^-n int chi(|xi|) |xi|^a |K(t, xi)| d xi, the frequency-side bound of the L^inf norm."""
    reach = 2.0 * cutoff_radius(sigma)
    if t > 0:
        # e^{-rho^(2 sigma) t / 2} < e^-20 beyond this radius
        reach = min(reach, (40.0 / t) ** (1.0 / (2.0 * sigma)))
    rho = np.linspace(0.0, reach, points)
    evaluated = kernel_eval(t, rho, sigma).real()
    values = np.abs(evaluated.k1 if kernel == "k1" else evaluated.k0)
    integrand = cutoff_chi(rho, sigma) * rho ** a * values * rho ** (n - 1)
    return float(sphere_area(n) * np.trapezoid(integrand, rho) / (2.0 * np.pi) ** n)


def majorant_slope(n: int, sigma: float, a: float, times: Sequence[float], kernel: str = "k1") -> RateFit:
    series = NormSeries()
    for t in times:
        series.append(t, {KERNEL_COLUMN: kernel_majorant(n, sigma, a, t, kernel)})
    return fit_rate(series, KERNEL_COLUMN, (times[0], times[-1]))


def geometric_times(t_min: float, t_max: float, samples: int) -> List[float]:
    return [float(x) for x in np.geomspace(t_min, t_max, samples)]


def kernel_norm_suite(
    n: int,
    sigma: float,
    a: float,
    r_exp: float,
    times: Sequence[float],
    kernel: str = "k1",
    spec: Optional[GridSpec] = None,
    majorant_times: Optional[Sequence[float]] = None,
) -> KernelSuiteResult:
    """L^r norms of the low-frequency kernel at each time, with envelope and slope."""
    _require_lemma_range(n, sigma)
    times = [float(t) for t in times]
    spec = spec or kernel_grid(n, sigma, max(times))
    exponent = kernel_exponent(n, sigma, a, r_exp, kernel)
    logger.info("Kernel suite: n=%s sigma=%s a=%s r=%s kernel=%s on %d points", n, sigma, a, r_exp, kernel, spec.points)

    series = NormSeries()
    for t in times:
        physical = to_physical(kernel_profile(spec, sigma, a, t, kernel))
        series.append(t, {KERNEL_COLUMN: lq_norm(physical, r_exp)})
    envelope = envelope_check(series, KERNEL_COLUMN, exponent, (times[0], times[-1]))

    majorant_fit = None
    if math.isinf(r_exp) and kernel == "k1":
        sample_times = majorant_times or geometric_times(1e2, 1e4, 17)
        majorant_fit = majorant_slope(n, sigma, a, sample_times, kernel).slope

    return KernelSuiteResult(
        n=n,
        sigma=sigma,
        a=a,
        r=r_exp,
        kernel=kernel,
        times=times,
        norms=series.columns[KERNEL_COLUMN],
        envelope=envelope,
        majorant_slope=majorant_fit,
        majorant_exponent=exponent if majorant_fit is not None else None,
    )


def profile_field(spec: GridSpec, kind: DataKind, amplitude: float = 1.0, width: float = 1.0):
    if DataKind(kind) is DataKind.BUMP:
        return bump_field(spec, amplitude, width)
    return gaussian_field(spec, amplitude, width)


LINEAR_QUANTITIES = (("w", 0.0), ("w", 1.0), ("w", 2.0), ("wt", 0.0))


def linear_series(state: ComponentState, times: Sequence[float], q: float) -> NormSeries:
    """||  |D|^a w ||_{L^q} for a = 0, sigma, 2 sigma and ||w_t||_{L^q} along the exact linear flow."""
    series = NormSeries()
    sigma = state.sigma
    for t in times:
        evolved = linear_evolve(state, t)
        row = {}
        for quantity, multiple in LINEAR_QUANTITIES:
            if quantity == "w":
                shaped = apply_multiplier(evolved.field_hat, riesz_symbol(multiple * sigma))
                row[f"w_d{multiple:g}sigma"] = lq_norm(to_physical(shaped), q)
            else:
                row["w_t"] = lq_norm(to_physical(evolved.velocity_hat), q)
        series.append(t, row)
    return series


def linear_rate_suite(
    n: int,
    sigma: float,
    q: float,
    m: float,
    kind: DataKind = DataKind.GAUSSIAN,
    spec: Optional[GridSpec] = None,
    horizon: float = 100.0,
    times: Optional[Sequence[float]] = None,
    collect: Optional[Dict[str, NormSeries]] = None,
) -> List[EnvelopeResult]:
    """Envelope checks of the linear (L^m cap L^q) -> L^q estimates, data in w0 then in w1.

    Each result carries the data norm of its slot and the envelope constant divided by it.
    When collect is given, the measured series are stored in it under "w0" and "w1".
    """
    _require_lemma_range(n, sigma)
    spec = spec or GridSpec(mode=GridMode.RADIAL, n=n, points=512, extent=160.0)
    times = list(times) if times is not None else [0.0] + geometric_times(0.1, horizon, 49)
    profile = profile_field(spec, kind)
    blank = zeros(spec)
    results: List[EnvelopeResult] = []

    for slot in (0, 1):
        w0, w1 = (profile, blank) if slot == 0 else (blank, profile)
        size = data_norm((w0, w1), sigma, q, m)
        state = ComponentState(to_spectral(w0), to_spectral(w1), sigma)
        series = linear_series(state, times, q)
        if collect is not None:
            collect[f"w{slot}"] = series
        for quantity, multiple in LINEAR_QUANTITIES:
            column = f"w_d{multiple:g}sigma" if quantity == "w" else "w_t"
            exponent = exponent_service.reference_linear_exponent(
                n, sigma, q, m, quantity=quantity, slot=slot, a=multiple * sigma
            )
            result = envelope_check(series, column, exponent)
            result.column = f"{column}[w{slot}]"
            result.data_norm = size
            if result.constant is not None and size > 0:
                result.relative_constant = result.constant / size
            results.append(result)
        logger.info("Linear suite sigma=%s slot=w%d: %d/4 envelopes pass", sigma, slot, sum(r.passed for r in results[-4:]))
    return results
