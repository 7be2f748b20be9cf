"""Fourier-side propagators of w_tt + (-Delta)^sigma w + (-Delta)^sigma w_t = 0.

Each frequency |xi| = rho solves w'' + A w' + A w = 0 with A = rho^(2 sigma).
The solution operator is w(t) = K0(t) w(0) + K1(t) w'(0) where

    K0 = (l1 e^{l2 t} - l2 e^{l1 t}) / (l1 - l2),   K1 = (e^{l1 t} - e^{l2 t}) / (l1 - l2)

and l1, l2 are the roots of l^2 + A l + A = 0. Near the double root (A = 4)
and for small t the divided differences are rewritten through
phi1(z) = (e^z - 1) / z so no branch depends on l1 != l2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

PHI1_SERIES_RADIUS = 1e-4
SEPARATED_RADIUS = 1.0
DOUBLE_ROOT_SYMBOL = 4.0
_INTEGRAL_SERIES_TERMS = 40


@dataclass(frozen=True)
class RootPair:
    lambda1: np.ndarray
    lambda2: np.ndarray
    rho: np.ndarray
    sigma: float


@dataclass(frozen=True)
class KernelEval:
    k0: np.ndarray
    k1: np.ndarray
    k0dot: np.ndarray
    k1dot: np.ndarray

    def real(self) -> "KernelEval":
        return KernelEval(self.k0.real, self.k1.real, self.k0dot.real, self.k1dot.real)


def symbol(rho: ArrayLike, sigma: float) -> np.ndarray:
    """A = rho^(2 sigma), the common symbol of the elastic and damping terms."""
    return np.asarray(rho, dtype=float) ** (2.0 * sigma)


def char_roots(sigma: float, rho: ArrayLike) -> RootPair:
    """Roots of l^2 + A l + A = 0, the "+sqrt" branch labelled lambda1.

    For A < 4 the pair is complex conjugate with positive imaginary part
    first; for A > 4 lambda1 comes from Vieta (A / lambda2) to avoid the
    cancellation in (-A + sqrt(A^2 - 4A)) / 2.
    """
    rho_arr = np.asarray(rho, dtype=float)
    a = symbol(rho_arr, sigma)
    root = np.sqrt((a * (a - DOUBLE_ROOT_SYMBOL)).astype(complex))
    lam2 = -(a + root) / 2.0
    lam1 = (-a + root) / 2.0
    real_pair = a > DOUBLE_ROOT_SYMBOL
    if np.any(real_pair):
        lam1 = np.where(real_pair, a / np.where(real_pair, lam2, 1.0), lam1)
    return RootPair(lambda1=lam1, lambda2=lam2, rho=rho_arr, sigma=sigma)


def phi1(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    out = np.empty_like(z, dtype=complex)
    small = np.abs(z) < PHI1_SERIES_RADIUS
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs * zs / 6.0 + zs * zs * zs / 24.0
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def kernel_eval(t: ArrayLike, rho: ArrayLike, sigma: float) -> KernelEval:
    """K0, K1 and their time derivatives at (t, rho); t and rho broadcast."""
    t_arr, rho_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(rho, dtype=float))
    shape = t_arr.shape
    tf = t_arr.ravel()
    roots = char_roots(sigma, rho_arr.ravel())
    lam1, lam2 = roots.lambda1, roots.lambda2
    a = symbol(roots.rho, sigma)
    delta = lam1 - lam2
    z = delta * tf

    k0 = np.empty(tf.shape, dtype=complex)
    k1 = np.empty(tf.shape, dtype=complex)
    k1dot = np.empty(tf.shape, dtype=complex)

    sep = np.abs(z) >= SEPARATED_RADIUS
    near = ~sep

    if np.any(near):
        tn = tf[near]
        e2 = np.exp(lam2[near] * tn)
        ph = phi1(z[near])
        k1[near] = tn * e2 * ph
        k0[near] = e2 * (1.0 - lam2[near] * tn * ph)
        k1dot[near] = k0[near] - a[near] * k1[near]

    if np.any(sep):
        ts = tf[sep]
        l1, l2, d = lam1[sep], lam2[sep], delta[sep]
        e1 = np.exp(l1 * ts)
        e2 = np.exp(l2 * ts)
        k1[sep] = (e1 - e2) / d
        k0[sep] = (l1 * e2 - l2 * e1) / d
        k1dot[sep] = (l1 * e1 - l2 * e2) / d

    k0dot = -a * k1
    return KernelEval(
        k0=k0.reshape(shape),
        k1=k1.reshape(shape),
        k0dot=k0dot.reshape(shape),
        k1dot=k1dot.reshape(shape),
    )


def integrated_k1(h: float, rho: ArrayLike, sigma: float, k0: np.ndarray | None = None) -> np.ndarray:
    """int_0^h K1(tau) d tau, the response of the field to a unit constant source.

    Equals (1 - K0(h)) / A; a Taylor series in h replaces the quotient where
    A h or A h^2 is small and the subtraction would cancel.
    """
    rho_arr = np.asarray(rho, dtype=float)
    a = symbol(rho_arr, sigma)
    if k0 is None:
        k0 = kernel_eval(h, rho_arr, sigma).k0.real
    out = np.empty(a.shape, dtype=float)
    series = (a * h < 0.5) & (a * h * h < 0.5)

    if np.any(series):
        ap = a[series]
        e_prev = np.ones_like(ap)
        e_cur = -ap
        term_scale = h * h / 2.0
        total = e_prev * term_scale
        term_scale = term_scale * h / 3.0
        total = total + e_cur * term_scale
        for j in range(4, _INTEGRAL_SERIES_TERMS):
            e_prev, e_cur = e_cur, -ap * (e_cur + e_prev)
            term_scale = term_scale * h / j
            total = total + e_cur * term_scale
        out[series] = total

    rest = ~series
    if np.any(rest):
        out[rest] = (1.0 - np.asarray(k0)[rest]) / a[rest]
    return out


def cutoff_chi(rho: ArrayLike, sigma: float) -> np.ndarray:
    """Smooth cut-off: 1 below rho0 = 2^(1/sigma)/4, 0 above 2 rho0, cosine taper between."""
    rho_arr = np.asarray(rho, dtype=float)
    rho0 = cutoff_radius(sigma)
    s = np.clip((rho_arr - rho0) / rho0, 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * s))


def cutoff_radius(sigma: float) -> float:
    return 2.0 ** (1.0 / sigma) / 4.0


def small_freq_reference(rho: ArrayLike, sigma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Leading-order roots for small |xi|: -rho^(2 sigma) +/- i rho^sigma.

    Asymptotically equivalent to the exact pair; the exact real part is
    -rho^(2 sigma) / 2, so only the imaginary parts agree to O(rho^(3 sigma)).
    """
    rho_arr = np.asarray(rho, dtype=float)
    re = -symbol(rho_arr, sigma)
    im = rho_arr ** sigma
    return re + 1j * im, re - 1j * im


def large_freq_reference(rho: ArrayLike, sigma: float) -> Tuple[np.ndarray, np.ndarray]:
    rho_arr = np.asarray(rho, dtype=float)
    return -np.ones_like(rho_arr, dtype=complex), (-symbol(rho_arr, sigma)).astype(complex)
