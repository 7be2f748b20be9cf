"""Time integration of the linear flow and of the weakly coupled semilinear system.

Linear propagation is exact per mode. The coupled system advances by
exponential (Duhamel) steps: over [t, t+h] each component receives

    w_hat(t+h)  = K0 w_hat + K1 w_t_hat + W S
    w_t_hat(t+h) = dK0 w_hat + dK1 w_t_hat + K1 S

with S the partner nonlinearity (plus optional forcing) held constant over
the step and W = int_0^h K1. "frozen" takes S at the step start,
"midpoint_etd" at the half step after a frozen predictor.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import get_settings
from ..core.exceptions import BlowUpDetected, InvalidParametersError
from ..schemas.grid import GridSpec
from ..schemas.harness import PicardResult
from ..schemas.params import ProblemParams
from ..schemas.run import Scheme, StepperConfig
from ..schemas.series import RUN_COLUMNS, NormSeries
from ..utils.kernels import integrated_k1, kernel_eval
from ..utils.transforms import (
    SpatialField,
    SpectralField,
    apply_multiplier,
    boundary_mass,
    get_grid,
    lq_norm,
    riesz_symbol,
    to_physical,
    to_spectral,
)

logger = logging.getLogger(__name__)

# t -> (forcing of the u equation, forcing of the v equation), spectral
Forcing = Callable[[float], Tuple[np.ndarray, np.ndarray]]

PICARD_DIVERGENCE_RUN = 3


@dataclass(frozen=True)
class ComponentState:
    field_hat: SpectralField
    velocity_hat: SpectralField
    sigma: float

    @property
    def spec(self) -> GridSpec:
        return self.field_hat.spec

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.field_hat.values)) and np.all(np.isfinite(self.velocity_hat.values)))


@dataclass(frozen=True)
class CoupledState:
    u: ComponentState
    v: ComponentState
    t: float = 0.0


@dataclass
class RunResult:
    series: NormSeries
    final_state: CoupledState
    max_boundary_mass: float = 0.0
    steps: int = 0
    warnings: List[str] = field(default_factory=list)


class Propagator:
    """Kernel values of one (grid, sigma, dt) triple, applied mode by mode."""

    def __init__(self, spec: GridSpec, sigma: float, dt: float) -> None:
        rho = get_grid(spec).rho
        kernels = kernel_eval(dt, rho, sigma).real()
        self.dt = dt
        self.k0 = kernels.k0
        self.k1 = kernels.k1
        self.k0dot = kernels.k0dot
        self.k1dot = kernels.k1dot
        self.field_weight = integrated_k1(dt, rho, sigma, kernels.k0)

    def free(self, field_hat: np.ndarray, velocity_hat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return (
            self.k0 * field_hat + self.k1 * velocity_hat,
            self.k0dot * field_hat + self.k1dot * velocity_hat,
        )

    def forced(
        self, field_hat: np.ndarray, velocity_hat: np.ndarray, source_hat: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        new_field, new_velocity = self.free(field_hat, velocity_hat)
        return new_field + self.field_weight * source_hat, new_velocity + self.k1 * source_hat


@lru_cache(maxsize=128)
def get_propagator(spec: GridSpec, sigma: float, dt: float) -> Propagator:
    return Propagator(spec, sigma, dt)


def linear_evolve(s: ComponentState, dt: float) -> ComponentState:
    if dt < 0:
        raise InvalidParametersError(f"dt must be non-negative (got {dt})")
    propagator = get_propagator(s.spec, s.sigma, float(dt))
    field_hat, velocity_hat = propagator.free(s.field_hat.values, s.velocity_hat.values)
    return ComponentState(SpectralField(s.spec, field_hat), SpectralField(s.spec, velocity_hat), s.sigma)


def nonlinearity(f: SpatialField, p_exp: float, dealias: bool = False) -> SpatialField:
    """|f|^p pointwise; on full grids with dealias the result is cut by the 2/3 rule."""
    if p_exp <= 1:
        raise InvalidParametersError(f"nonlinearity exponent must exceed 1 (got {p_exp})")
    values = np.abs(f.values) ** p_exp
    grid = get_grid(f.spec)
    if dealias and not grid.is_radial:
        spectral = to_spectral(SpatialField(f.spec, values))
        truncated = SpectralField(f.spec, spectral.values * grid.dealias_mask())
        return to_physical(truncated)
    return SpatialField(f.spec, values)


def initial_state(
    data: Sequence[SpatialField], sigma1: float, sigma2: float
) -> CoupledState:
    """(u0, u1, v0, v1) in physical space -> spectral state at t = 0."""
    u0, u1, v0, v1 = data
    spec = u0.spec
    for item in (u1, v0, v1):
        if item.spec != spec:
            raise InvalidParametersError("initial data live on different grids")
    return CoupledState(
        u=ComponentState(to_spectral(u0), to_spectral(u1), sigma1),
        v=ComponentState(to_spectral(v0), to_spectral(v1), sigma2),
        t=0.0,
    )


def _check_dimension(params: ProblemParams, spec: GridSpec) -> None:
    if params.n != spec.n:
        raise InvalidParametersError(f"params n={params.n} does not match grid n={spec.n}")


class CoupledStepper:
    """Duhamel steps of the coupled system for one parameter tuple and grid."""

    def __init__(
        self,
        params: ProblemParams,
        spec: GridSpec,
        cfg: StepperConfig,
        forcing: Optional[Forcing] = None,
    ) -> None:
        _check_dimension(params, spec)
        self.params = params
        self.spec = spec
        self.cfg = cfg
        self.forcing = forcing
        grid = get_grid(spec)
        self.mask = grid.dealias_mask() if cfg.dealias and not grid.is_radial else None

    def _power_hat(self, field_hat: np.ndarray, p_exp: float) -> np.ndarray:
        physical = to_physical(SpectralField(self.spec, field_hat))
        source = to_spectral(SpatialField(self.spec, np.abs(physical.values) ** p_exp)).values
        if self.mask is not None:
            source = source * self.mask
        return source

    def sources(self, u_hat: np.ndarray, v_hat: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Spectral right-hand sides (of the u and v equations) at time t."""
        if self.cfg.nonlinear:
            source_u = self._power_hat(v_hat, self.params.p1)
            source_v = self._power_hat(u_hat, self.params.p2)
        else:
            source_u = np.zeros_like(u_hat)
            source_v = np.zeros_like(v_hat)
        if self.forcing is not None:
            force_u, force_v = self.forcing(t)
            source_u = source_u + force_u
            source_v = source_v + force_v
        return source_u, source_v

    def _advance(self, state: CoupledState, dt: float, source_u, source_v) -> CoupledState:
        prop_u = get_propagator(self.spec, state.u.sigma, dt)
        prop_v = get_propagator(self.spec, state.v.sigma, dt)
        u_field, u_velocity = prop_u.forced(state.u.field_hat.values, state.u.velocity_hat.values, source_u)
        v_field, v_velocity = prop_v.forced(state.v.field_hat.values, state.v.velocity_hat.values, source_v)
        return CoupledState(
            u=ComponentState(SpectralField(self.spec, u_field), SpectralField(self.spec, u_velocity), state.u.sigma),
            v=ComponentState(SpectralField(self.spec, v_field), SpectralField(self.spec, v_velocity), state.v.sigma),
            t=state.t + dt,
        )

    def step(self, state: CoupledState, dt: Optional[float] = None) -> CoupledState:
        dt = self.cfg.h if dt is None else dt
        start_sources = self.sources(state.u.field_hat.values, state.v.field_hat.values, state.t)
        if self.cfg.scheme is Scheme.FROZEN:
            new_state = self._advance(state, dt, *start_sources)
        else:
            predicted = self._advance(state, dt / 2.0, *start_sources)
            mid_sources = self.sources(
                predicted.u.field_hat.values, predicted.v.field_hat.values, state.t + dt / 2.0
            )
            new_state = self._advance(state, dt, *mid_sources)
        if not (new_state.u.is_finite() and new_state.v.is_finite()):
            raise BlowUpDetected(new_state.t)
        return new_state


def duhamel_step(
    state: CoupledState,
    cfg: StepperConfig,
    params: ProblemParams,
    forcing: Optional[Forcing] = None,
    dt: Optional[float] = None,
) -> CoupledState:
    return CoupledStepper(params, state.u.spec, cfg, forcing).step(state, dt)


def output_times(horizon: float, first: float, per_decade: int) -> List[float]:
    """0, then first * g^k (g = 10^(1/per_decade)) below the horizon, then the horizon."""
    if horizon <= 0:
        raise InvalidParametersError(f"horizon must be positive (got {horizon})")
    times = [0.0]
    ratio = 10.0 ** (1.0 / per_decade)
    k = 0
    while True:
        t = first * ratio ** k
        if t >= horizon * (1.0 - 1e-12):
            break
        times.append(t)
        k += 1
    times.append(float(horizon))
    return times


def _substeps(span: float, h: float) -> Tuple[int, float]:
    count = max(1, int(math.ceil(span / h - 1e-9)))
    return count, span / count


def record_norms(state: CoupledState, params: ProblemParams) -> Dict[str, float]:
    """The twelve norms of one output time, keyed as in RUN_COLUMNS."""
    row: Dict[str, float] = {}
    physical = {}
    for name, component in (("u", state.u), ("v", state.v)):
        field_hat = component.field_hat
        w = to_physical(field_hat)
        physical[name] = w
        row[f"{name}_lq"] = lq_norm(w, params.q)
        row[f"{name}_dsigma"] = lq_norm(to_physical(apply_multiplier(field_hat, riesz_symbol(component.sigma))), params.q)
        row[f"{name}_d2sigma"] = lq_norm(
            to_physical(apply_multiplier(field_hat, riesz_symbol(2.0 * component.sigma))), params.q
        )
        row[f"{name}_t"] = lq_norm(to_physical(component.velocity_hat), params.q)
    row["v_lmp1"] = lq_norm(physical["v"], params.m * params.p1)
    row["v_lqp1"] = lq_norm(physical["v"], params.q * params.p1)
    row["u_lmp2"] = lq_norm(physical["u"], params.m * params.p2)
    row["u_lqp2"] = lq_norm(physical["u"], params.q * params.p2)
    return {name: row[name] for name in RUN_COLUMNS}


def _state_boundary_mass(state: CoupledState) -> float:
    return max(boundary_mass(to_physical(state.u.field_hat)), boundary_mass(to_physical(state.v.field_hat)))


def run_coupled(
    params: ProblemParams,
    data: Sequence[SpatialField],
    horizon: float,
    cfg: StepperConfig,
    forcing: Optional[Forcing] = None,
    times: Optional[Sequence[float]] = None,
) -> RunResult:
    """Advance (u, v) to the horizon, recording norms at geometric output times.

    Non-finite values end the run early with series.blow_up set; that is a
    finding, not an error.
    """
    settings = get_settings()
    state = initial_state(data, params.sigma1, params.sigma2)
    _check_dimension(params, state.u.spec)
    stepper = CoupledStepper(params, state.u.spec, cfg, forcing)
    times = list(times) if times is not None else output_times(
        horizon, settings.first_output_time, settings.samples_per_decade
    )

    logger.info(
        "Running coupled system: n=%s sigma=(%s, %s) p=(%s, %s) T=%s h=%s scheme=%s",
        params.n, params.sigma1, params.sigma2, params.p1, params.p2, horizon, cfg.h, cfg.scheme.value,
    )

    series = NormSeries()
    result = RunResult(series=series, final_state=state)
    series.append(times[0], record_norms(state, params))
    result.max_boundary_mass = _state_boundary_mass(state)

    for target in times[1:]:
        count, dt = _substeps(target - state.t, cfg.h)
        try:
            for _ in range(count):
                state = stepper.step(state, dt)
                result.steps += 1
        except BlowUpDetected as exc:
            logger.warning("Blow-up detected: %s; truncating series", exc)
            series.blow_up = True
            series.blow_up_time = exc.t
            result.warnings.append(str(exc))
            break
        # land exactly on the output time despite accumulated rounding
        state = CoupledState(u=state.u, v=state.v, t=float(target))
        series.append(target, record_norms(state, params))
        mass = _state_boundary_mass(state)
        if mass > result.max_boundary_mass:
            result.max_boundary_mass = mass

    if result.max_boundary_mass > settings.boundary_mass_tol:
        message = (
            f"boundary mass {result.max_boundary_mass:.3e} exceeds {settings.boundary_mass_tol:.1e}; "
            "enlarge the domain"
        )
        logger.warning(message)
        result.warnings.append(message)

    result.final_state = state
    logger.info("Run finished: %d steps, %d output times", result.steps, len(series))
    return result


def _time_grid(horizon: float, h: float) -> np.ndarray:
    count, dt = _substeps(horizon, h)
    return dt * np.arange(count + 1)


def picard_solve(
    params: ProblemParams,
    data: Sequence[SpatialField],
    horizon: float,
    cfg: StepperConfig,
    forcing: Optional[Forcing] = None,
) -> PicardResult:
    """Successive substitution w^{k+1} = w_lin + Duhamel[w^k] on a fixed time grid.

    The nonlinear parts z^k = w^k - w_lin are propagated separately so the
    distance d_k = sup_t (||z_u^{k+1} - z_u^k||_{L^q} + ||z_v^{k+1} - z_v^k||_{L^q})
    is not swamped by the linear part.
    """
    state0 = initial_state(data, params.sigma1, params.sigma2)
    spec = state0.u.spec
    stepper = CoupledStepper(params, spec, cfg, forcing)
    times = _time_grid(horizon, cfg.h)
    dt = float(times[1] - times[0])
    prop_u = get_propagator(spec, params.sigma1, dt)
    prop_v = get_propagator(spec, params.sigma2, dt)

    linear_u = [state0.u.field_hat.values]
    linear_v = [state0.v.field_hat.values]
    u_field, u_velocity = state0.u.field_hat.values, state0.u.velocity_hat.values
    v_field, v_velocity = state0.v.field_hat.values, state0.v.velocity_hat.values
    for _ in times[1:]:
        u_field, u_velocity = prop_u.free(u_field, u_velocity)
        v_field, v_velocity = prop_v.free(v_field, v_velocity)
        linear_u.append(u_field)
        linear_v.append(v_field)

    zero = np.zeros_like(state0.u.field_hat.values)
    z_u = [zero] * len(times)
    z_v = [zero] * len(times)
    result = PicardResult()
    rising = 0

    logger.info("Picard iteration: %d time steps, up to %d iterates", len(times) - 1, cfg.picard_max_iters)
    for k in range(cfg.picard_max_iters):
        sources = [
            stepper.sources(linear_u[j] + z_u[j], linear_v[j] + z_v[j], float(times[j]))
            for j in range(len(times))
        ]
        new_u, new_v = [zero], [zero]
        zu_field, zu_velocity = zero, zero
        zv_field, zv_velocity = zero, zero
        for j in range(len(times) - 1):
            if cfg.scheme is Scheme.FROZEN:
                source_u, source_v = sources[j]
            else:
                source_u = 0.5 * (sources[j][0] + sources[j + 1][0])
                source_v = 0.5 * (sources[j][1] + sources[j + 1][1])
            zu_field, zu_velocity = prop_u.forced(zu_field, zu_velocity, source_u)
            zv_field, zv_velocity = prop_v.forced(zv_field, zv_velocity, source_v)
            new_u.append(zu_field)
            new_v.append(zv_field)

        distance = u_size = v_size = 0.0
        for j in range(len(times)):
            du = to_physical(SpectralField(spec, new_u[j] - z_u[j]))
            dv = to_physical(SpectralField(spec, new_v[j] - z_v[j]))
            distance = max(distance, lq_norm(du, params.q) + lq_norm(dv, params.q))
            u_size = max(u_size, lq_norm(to_physical(SpectralField(spec, new_u[j])), params.q))
            v_size = max(v_size, lq_norm(to_physical(SpectralField(spec, new_v[j])), params.q))
        if not math.isfinite(distance):
            logger.warning("Picard iterate %d is not finite", k + 1)
            result.diverged = True
            break

        previous = result.distances[-1] if result.distances else None
        result.distances.append(distance)
        result.ratios.append(distance / previous if previous else None)
        result.u_correction.append(u_size)
        result.v_correction.append(v_size)
        result.iterations = k + 1
        z_u, z_v = new_u, new_v
        logger.info("Picard iterate %d: d=%.3e", k + 1, distance)

        if distance <= cfg.picard_tol:
            result.converged = True
            break
        rising = rising + 1 if previous is not None and distance > previous else 0
        if rising >= PICARD_DIVERGENCE_RUN:
            logger.warning("Picard distances grew %d times in a row; reporting divergence", rising)
            result.diverged = True
            break
    return result
