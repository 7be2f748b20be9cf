"""Physical <-> spectral transforms and norms on full grids (n = 1, 2) and radial grids (odd n <= 7).

Convention: f_hat(xi) = int f(x) e^{-i x.xi} dx, f(x) = (2 pi)^{-n} int f_hat(xi) e^{i x.xi} d xi.

Radial fields are sampled at r_j = j r_max / (N-1); their transforms at
rho_k = k pi / r_max. The radial transform is

    f_hat(rho) = omega_{n-1} int_0^inf Phi_n(rho r) f(r) r^{n-1} dr

with Phi_n(x) = Gamma(n/2) (2/x)^{n/2-1} J_{n/2-1}(x) the normalized
spherical-mean kernel (Phi_n(0) = 1), applied as a dense trapezoid matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from ..core.exceptions import InvalidParametersError
from ..schemas.grid import GridMode, GridSpec
from .kernels import cutoff_chi

_SERIES_SWITCH = 0.5
_SERIES_TERMS = 14
BOUNDARY_SHELL = 0.05


def sphere_area(n: int) -> float:
    """Surface measure omega_{n-1} = 2 pi^{n/2} / Gamma(n/2) of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _double_factorial(k: int) -> float:
    return float(np.prod(np.arange(k, 0, -2))) if k > 0 else 1.0


def radial_kernel(n: int, x: np.ndarray) -> np.ndarray:
    """Phi_n(x) for odd n, from spherical Bessel functions of order (n-3)/2.

    Phi_n = (2k+1)!! x^{-k} j_k(x) with k = (n-3)/2 (Phi_1 = cos). Upward
    recurrence from j_{-1} = cos x / x, j_0 = sin x / x is used away from
    the origin, the power series near it.
    """
    x = np.asarray(x, dtype=float)
    if n == 1:
        return np.cos(x)
    order = (n - 3) // 2
    out = np.empty_like(x)

    small = np.abs(x) < _SERIES_SWITCH
    if np.any(small):
        xs = x[small]
        half_sq = (xs / 2.0) ** 2
        term = np.ones_like(xs)
        total = np.ones_like(xs)
        for k in range(1, _SERIES_TERMS):
            term = -term * half_sq / (k * (k - 1 + n / 2.0))
            total = total + term
        out[small] = total

    big = ~small
    if np.any(big):
        xb = x[big]
        j_prev = np.cos(xb) / xb
        j_cur = np.sin(xb) / xb
        for k in range(order):
            j_prev, j_cur = j_cur, (2 * k + 1) / xb * j_cur - j_prev
        out[big] = _double_factorial(2 * order + 1) * j_cur / xb ** order
    return out


class Grid:
    """Sample points, frequency magnitudes and quadrature measures of one GridSpec."""

    def __init__(self, spec: GridSpec) -> None:
        self.spec = spec
        self.n = spec.n
        if spec.mode is GridMode.FULL:
            self._build_full()
        else:
            self._build_radial()

    @property
    def is_radial(self) -> bool:
        return self.spec.mode is GridMode.RADIAL

    def _build_full(self) -> None:
        points, half_width = self.spec.points, self.spec.extent
        self.dx = 2.0 * half_width / points
        axis = -half_width + self.dx * np.arange(points)
        freq_axis = 2.0 * np.pi * np.fft.fftfreq(points, self.dx)
        if self.n == 1:
            self.coords: Tuple[np.ndarray, ...] = (axis,)
            self.radius = np.abs(axis)
            self.rho = np.abs(freq_axis)
            self.freq_axes = (freq_axis,)
        else:
            xx, yy = np.meshgrid(axis, axis, indexing="ij")
            kx, ky = np.meshgrid(freq_axis, freq_axis, indexing="ij")
            self.coords = (xx, yy)
            self.radius = np.sqrt(xx * xx + yy * yy)
            self.rho = np.sqrt(kx * kx + ky * ky)
            self.freq_axes = (kx, ky)
        self.shape = self.radius.shape
        self.measure = np.full(self.shape, self.dx ** self.n)
        d_xi = 2.0 * np.pi / (points * self.dx)
        self.freq_measure = np.full(self.shape, (d_xi / (2.0 * np.pi)) ** self.n)
        self.outer_shell = np.zeros(self.shape, dtype=bool)
        for c in self.coords:
            self.outer_shell |= np.abs(c) >= (1.0 - BOUNDARY_SHELL) * half_width

    def _build_radial(self) -> None:
        points, r_max = self.spec.points, self.spec.extent
        self.radius = np.linspace(0.0, r_max, points)
        self.dr = self.radius[1] - self.radius[0]
        self.rho = np.arange(points) * np.pi / r_max
        self.d_rho = np.pi / r_max
        self.coords = (self.radius,)
        self.shape = self.radius.shape
        omega = sphere_area(self.n)

        trap_r = np.full(points, self.dr)
        trap_r[[0, -1]] *= 0.5
        trap_rho = np.full(points, self.d_rho)
        trap_rho[[0, -1]] *= 0.5

        self.measure = omega * trap_r * self.radius ** (self.n - 1)
        self.freq_measure = omega * trap_rho * self.rho ** (self.n - 1) / (2.0 * np.pi) ** self.n

        phase = np.outer(self.rho, self.radius)
        kernel = radial_kernel(self.n, phase)
        self.forward_matrix = kernel * self.measure[None, :]
        self.inverse_matrix = kernel.T * self.freq_measure[None, :]
        self.outer_shell = self.radius >= (1.0 - BOUNDARY_SHELL) * r_max

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask on the full-grid lattice (all ones on radial grids)."""
        if self.is_radial:
            return np.ones(self.shape, dtype=bool)
        cutoff = (2.0 / 3.0) * np.pi / self.dx
        mask = np.ones(self.shape, dtype=bool)
        for k in self.freq_axes:
            mask &= np.abs(k) < cutoff
        return mask


@lru_cache(maxsize=16)
def get_grid(spec: GridSpec) -> Grid:
    return Grid(spec)


@dataclass(frozen=True)
class SpatialField:
    spec: GridSpec
    values: np.ndarray

    @property
    def grid(self) -> Grid:
        return get_grid(self.spec)

    def __add__(self, other: "SpatialField") -> "SpatialField":
        _require_same_grid(self.spec, other.spec)
        return SpatialField(self.spec, self.values + other.values)

    def scaled(self, factor: float) -> "SpatialField":
        return SpatialField(self.spec, factor * self.values)


@dataclass(frozen=True)
class SpectralField:
    spec: GridSpec
    values: np.ndarray

    @property
    def grid(self) -> Grid:
        return get_grid(self.spec)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _require_same_grid(self.spec, other.spec)
        return SpectralField(self.spec, self.values + other.values)

    def scaled(self, factor: complex) -> "SpectralField":
        return SpectralField(self.spec, factor * self.values)


def _require_same_grid(a: GridSpec, b: GridSpec) -> None:
    if a != b:
        raise InvalidParametersError(f"grid mismatch: {a} vs {b}")


def _require_shape(spec: GridSpec, values: np.ndarray) -> Grid:
    grid = get_grid(spec)
    if values.shape != grid.shape:
        raise InvalidParametersError(
            f"field of shape {values.shape} does not match {spec.mode.value} grid of shape {grid.shape}"
        )
    return grid


def zeros(spec: GridSpec) -> SpatialField:
    return SpatialField(spec, np.zeros(get_grid(spec).shape))


def to_spectral(f: SpatialField) -> SpectralField:
    grid = _require_shape(f.spec, f.values)
    if grid.is_radial:
        return SpectralField(f.spec, grid.forward_matrix @ f.values)
    hat = grid.dx ** grid.n * np.fft.fftn(np.fft.ifftshift(f.values))
    return SpectralField(f.spec, hat)


def to_physical(f_hat: SpectralField, real: bool = True) -> SpatialField:
    grid = _require_shape(f_hat.spec, f_hat.values)
    if grid.is_radial:
        values = grid.inverse_matrix @ f_hat.values
    else:
        values = np.fft.fftshift(np.fft.ifftn(f_hat.values)) / grid.dx ** grid.n
    return SpatialField(f_hat.spec, values.real if real else values)


Symbol = Callable[[np.ndarray], np.ndarray]


def apply_multiplier(f_hat: SpectralField, symbol) -> SpectralField:
    """Pointwise product with a symbol given as a function of |xi| or as an array on the lattice."""
    rho = f_hat.grid.rho
    values = symbol(rho) if callable(symbol) else np.asarray(symbol)
    return SpectralField(f_hat.spec, f_hat.values * values)


def riesz_symbol(a: float) -> Symbol:
    """|xi|^a, defined as 0 at xi = 0 when a > 0."""

    def _symbol(rho: np.ndarray) -> np.ndarray:
        if a == 0:
            return np.ones_like(rho)
        with np.errstate(divide="ignore"):
            out = np.where(rho > 0, rho ** a, 0.0)
        return out

    return _symbol


def bessel_symbol(a: float) -> Symbol:
    """<xi>^a = (1 + |xi|^2)^{a/2}."""
    return lambda rho: (1.0 + rho * rho) ** (a / 2.0)


def chi_symbol(sigma: float) -> Symbol:
    return lambda rho: cutoff_chi(rho, sigma)


def lq_norm(f: SpatialField, q_exp: float) -> float:
    grid = _require_shape(f.spec, f.values)
    magnitude = np.abs(f.values)
    if math.isinf(q_exp):
        return float(magnitude.max()) if magnitude.size else 0.0
    if q_exp < 1:
        raise InvalidParametersError(f"Lebesgue exponent must be >= 1 (got {q_exp})")
    peak = magnitude.max()
    if peak == 0:
        return 0.0
    # scale by the peak so |f|^q stays representable for large q
    integral = np.sum(grid.measure * (magnitude / peak) ** q_exp)
    return float(peak * integral ** (1.0 / q_exp))


def spectral_l2_norm(f_hat: SpectralField) -> float:
    """((2 pi)^{-n} int |f_hat|^2 d xi)^{1/2}, equal to the L^2 norm by Plancherel."""
    grid = _require_shape(f_hat.spec, f_hat.values)
    return float(np.sqrt(np.sum(grid.freq_measure * np.abs(f_hat.values) ** 2)))


def riesz_norm(f_hat: SpectralField, a: float, q_exp: float) -> float:
    """||  |D|^a f ||_{L^q} from spectral data."""
    return lq_norm(to_physical(apply_multiplier(f_hat, riesz_symbol(a))), q_exp)


def data_norm(pair: Tuple[SpatialField, SpatialField], sigma_j: float, q: float, m: float) -> float:
    """Norm of initial data (w0, w1) in (L^m cap H^{2 sigma_j, q}) x (L^m cap L^q)."""
    w0, w1 = pair
    _require_same_grid(w0.spec, w1.spec)
    sobolev = to_physical(apply_multiplier(to_spectral(w0), bessel_symbol(2.0 * sigma_j)))
    return lq_norm(w0, m) + lq_norm(sobolev, q) + lq_norm(w1, m) + lq_norm(w1, q)


def gaussian_field(spec: GridSpec, amplitude: float = 1.0, width: float = 1.0) -> SpatialField:
    radius = get_grid(spec).radius
    return SpatialField(spec, amplitude * np.exp(-0.5 * (radius / width) ** 2))


def bump_field(spec: GridSpec, amplitude: float = 1.0, width: float = 1.0) -> SpatialField:
    """Smooth compactly supported profile exp(1 - 1/(1 - s^2)), s = |x| / (3 width)."""
    s = get_grid(spec).radius / (3.0 * width)
    inside = s < 1.0
    values = np.zeros_like(s)
    values[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return SpatialField(spec, amplitude * values)


def boundary_mass(f: SpatialField) -> float:
    """max |f| on the outer shell of the domain relative to max |f| overall."""
    grid = _require_shape(f.spec, f.values)
    magnitude = np.abs(f.values)
    peak = magnitude.max()
    if peak == 0:
        return 0.0
    return float(magnitude[grid.outer_shell].max() / peak)


def self_reciprocal_extent(points: int) -> float:
    """r_max for which the radial and frequency nodes coincide (rho_k = r_k)."""
    return math.sqrt(math.pi * (points - 1))
