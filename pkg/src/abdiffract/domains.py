"""Friedrichs-extension boundary machinery and the commutator pairing.

Mode projections, the boundary functionals L_0 and L_{-1}, deficiency
solutions K_nu(beta r) e^{ik theta}, and two independent evaluations of the
pairing whose value is -4 pi alpha (1 - alpha).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, AliasingError, ConfigError, NonFriedrichsError
from .mode_sum import Flux, _alpha
from .numerics import panel_nodes

SQRT_2PI = math.sqrt(2.0 * math.pi)


def _flux(alpha) -> float:
    return Flux(_alpha(alpha)).alpha


@dataclass(frozen=True)
class CutoffProfile:
    """Quintic smoothstep: 1 for r <= r_on, 0 for r >= r_off."""

    r_on: float = 0.5
    r_off: float = 1.0

    def __post_init__(self):
        if not (0 < self.r_on < self.r_off):
            raise ConfigError("cutoff needs 0 < r_on < r_off")

    def _x(self, r):
        return np.clip((self.r_off - np.asarray(r, dtype=float)) / (self.r_off - self.r_on), 0.0, 1.0)

    def __call__(self, r):
        x = self._x(r)
        return x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)

    def derivative(self, r, n: int = 1):
        """First or second radial derivative."""
        x = self._x(r)
        d = self.r_off - self.r_on
        if n == 1:
            return -30.0 * x * x * (1.0 - x) ** 2 / d
        if n == 2:
            return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / d ** 2
        raise ConfigError("only first and second derivatives are provided")


@dataclass(frozen=True)
class DeficiencyFrequency:
    """beta = e^{-i pi/4} for sign '+', e^{+i pi/4} for sign '-'."""

    sign: str = "+"

    def __post_init__(self):
        if self.sign not in ("+", "-"):
            raise ConfigError("sign must be '+' or '-'")

    @property
    def beta(self) -> complex:
        s = -1.0 if self.sign == "+" else 1.0
        return complex(math.cos(math.pi / 4), s * math.sin(math.pi / 4))


@dataclass(frozen=True)
class BoundaryCoefficients:
    """c0 multiplies r^alpha, c_minus1 multiplies r^{1-alpha} e^{-i theta}."""

    c0: complex
    c_minus1: complex


@dataclass(frozen=True)
class RadialModeFunction:
    """Angular mode k of a function, evaluated on demand at radii r > 0."""

    k: int
    func: Callable
    alpha: float | None = None

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class BoundaryLimit:
    """Extrapolated boundary value with the scaled samples it came from."""

    value: complex
    residual: float
    radii: tuple
    scaled: tuple


_NOISE_FLOOR = 1e-13


def _theta_grid(n: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n) / n


def mode_project(u: Callable, j: int, n_theta: int = 64) -> RadialModeFunction:
    """[Pi_j u](r) = (1/sqrt(2 pi)) int_0^{2pi} u(r, theta) e^{-ij theta} dtheta by the trapezoid rule.

    ``u(r, theta)`` must broadcast over arrays.

    Raises
    ------
    AliasingError
        If ``n_theta < 8 (|j| + 1)``.
    """
    if n_theta < 8 * (abs(j) + 1):
        raise AliasingError(f"{n_theta} angular points cannot resolve mode {j}; need {8 * (abs(j) + 1)}")
    th = _theta_grid(n_theta)
    phase = np.exp(-1j * j * th) * (2.0 * math.pi / n_theta) / SQRT_2PI

    def proj(r):
        vals = np.asarray(u(r[..., None], th), dtype=complex)
        return vals @ phase

    return RadialModeFunction(j, proj)


def mode_project_samples(samples, j: int) -> np.ndarray:
    """Projection of samples on a uniform theta grid (last axis)."""
    samples = np.asarray(samples, dtype=complex)
    n = samples.shape[-1]
    if n < 8 * (abs(j) + 1):
        raise AliasingError(f"{n} angular points cannot resolve mode {j}")
    phase = np.exp(-1j * j * _theta_grid(n)) * (2.0 * math.pi / n) / SQRT_2PI
    return samples @ phase


def _richardson(radii: np.ndarray, scaled: np.ndarray, exponents: np.ndarray) -> complex:
    x = radii / radii[0]
    A = np.column_stack([np.ones_like(x)] + [x ** p for p in exponents])
    coef = np.linalg.solve(A, scaled) if A.shape[0] == A.shape[1] else np.linalg.lstsq(A, scaled, rcond=None)[0]
    return complex(coef[0])


def boundary_L(j: int, u_mode: RadialModeFunction, alpha, r0: float = 0.1, levels: int = 6) -> BoundaryLimit:
    """(1/sqrt(2 pi)) lim_{r -> 0} r^{-beta} [Pi_j u](r), beta = alpha (j = 0) or 1 - alpha (j = -1).

    Generalized Richardson extrapolation on r_n = r0 2^{-n}, n = 0..levels,
    removing the powers r^{2 - beta + m}, m = 0..levels-1, that Friedrichs
    data carries after scaling.  The residual is the change when the
    smallest radius is dropped.

    Raises
    ------
    NonFriedrichsError
        If the scaled values grow by more than 10x over the ladder, or grow
        steadily at the smallest radii.
    """
    a = _flux(alpha)
    if j not in (0, -1):
        raise ConfigError("boundary functionals exist for j = 0 and j = -1 only")
    beta = a if j == 0 else 1.0 - a
    radii = r0 * 2.0 ** -np.arange(levels + 1)
    proj = np.asarray(u_mode(radii), dtype=complex)
    scaled = proj / (SQRT_2PI * radii ** beta)
    mags = np.abs(scaled)
    # values at the round-off floor carry no growth information
    noise = mags[-1] < _NOISE_FLOOR
    if not noise and mags[0] > 0 and mags[-1] > 10.0 * mags[0]:
        raise NonFriedrichsError(f"scaled boundary values grew {mags[-1] / mags[0]:.3g}x")
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = np.log2(mags[1:] / mags[:-1])
    if not noise and np.all(steps[-3:] > 0.05):
        raise NonFriedrichsError("scaled boundary values grow steadily as r -> 0")
    exps = (2.0 - beta) + np.arange(levels)
    full = _richardson(radii, scaled, exps)
    fewer = _richardson(radii[:-1], scaled[:-1], exps[:-1])
    return BoundaryLimit(full, float(abs(full - fewer)), tuple(radii), tuple(scaled))


def boundary_coefficients(u: Callable, alpha, n_theta: int = 64) -> BoundaryCoefficients:
    """(L_0 u, L_{-1} u) for u(r, theta)."""
    c0 = boundary_L(0, mode_project(u, 0, n_theta), alpha).value
    cm1 = boundary_L(-1, mode_project(u, -1, n_theta), alpha).value
    return BoundaryCoefficients(c0, cm1)


def deficiency_solution(alpha, freq: DeficiencyFrequency, k: int) -> Callable:
    """u(r, theta) = K_nu(beta r) e^{ik theta}, nu = alpha (k = 0) or 1 - alpha (k = -1)."""
    a = _flux(alpha)
    if k not in (0, -1):
        raise ConfigError("deficiency solutions live on modes k = 0 and k = -1")
    nu = a if k == 0 else 1.0 - a
    beta = freq.beta

    def u(r, theta=0.0):
        r = np.asarray(r, dtype=float)
        return special.kv(nu, beta * r) * np.exp(1j * k * np.asarray(theta, dtype=float))

    return u


def ode_residual(alpha, k: int, beta: complex, u_mode: Callable, r: float, h: float = 1e-3) -> complex:
    """-u'' - u'/r + ((k + alpha)^2 / r^2) u + beta^2 u with centered differences of step h."""
    a = _alpha(alpha)
    if not (r > h > 0):
        raise ConfigError("need r > h > 0")
    um, u0, up = (complex(u_mode(x)) for x in (r - h, r, r + h))
    d2 = (up - 2.0 * u0 + um) / (h * h)
    d1 = (up - um) / (2.0 * h)
    return complex(-d2 - d1 / r + ((k + a) ** 2 / r ** 2) * u0 + beta * beta * u0)


def _k_abs2_r(nu: float, beta: complex):
    def f(x):
        r = math.exp(x)
        return abs(special.kv(nu, beta * r)) ** 2 * r * r

    return f


def l2_partial_norm(alpha, freq: DeficiencyFrequency, k: int, delta: float, r_max: float = 60.0) -> float:
    """int_delta^r_max |K_{|k+alpha|}(beta r)|^2 r dr (log-variable quadrature)."""
    nu = abs(k + _alpha(alpha))
    f = _k_abs2_r(nu, freq.beta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, math.log(delta), math.log(r_max), epsabs=0.0, epsrel=1e-11, limit=400)
    return val


@dataclass(frozen=True)
class L2Classification:
    """Small-r behavior of the partial L^2 integral of K_{|k+alpha|}(beta r)."""

    k: int
    nu: float
    exponent: float
    integrable: bool


def classify_l2(alpha, k: int, freq: DeficiencyFrequency | None = None, decades=(4, 5, 6, 7, 8)) -> L2Classification:
    """Measure the exponent e in int_{delta'}^{delta} |K|^2 r dr ~ delta^e.

    Contributions from successive decades scale by 10^{-e}; e = 2 - 2 nu.
    The mode is square integrable at the origin iff e > 0.
    """
    freq = freq or DeficiencyFrequency("+")
    nu = abs(k + _alpha(alpha))
    f = _k_abs2_r(nu, freq.beta)
    pieces = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for d in decades:
            v, _ = integrate.quad(f, -(d + 1) * math.log(10.0), -d * math.log(10.0), epsabs=0.0, epsrel=1e-12)
            pieces.append(v)
    pieces = np.array(pieces)
    slopes = -np.log10(pieces[1:] / pieces[:-1])
    e = float(slopes[-1])
    return L2Classification(k, nu, e, bool(e > 1e-3))


def _zbar_power(x, y, p, ref_arg):
    """zbar^p on the branch continuous near the node with arg(zbar) = ref_arg."""
    zb = x - 1j * y
    local = ref_arg + np.angle(zb * np.exp(-1j * ref_arg))
    return np.abs(zb) ** p * np.exp(1j * p * local)


def _dzbar(f, x, y, h):
    """Centered (1/2)(d/dx + i d/dy) f."""
    return 0.5 * ((f(x + h, y) - f(x - h, y)) / (2 * h) + 1j * (f(x, y + h) - f(x, y - h)) / (2 * h))


def _laplacian(f, x, y, h):
    return (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h)


def commutator_pairing_contour(alpha, epsilon: float = 1e-3, n_quad: int = 64, h: float | None = None) -> complex:
    """(2/i) oint_{|z|=eps} d_zbar(vbar_0) d_zbar(v_{-1}) dzbar with vbar_0 = zbar^alpha, v_{-1} = zbar^{1-alpha}.

    Periodic trapezoid on the circle; d_zbar by centered differences with
    step h = 1e-3 eps on the branch local to each node.
    """
    a = _flux(alpha)
    h = epsilon * 1e-3 if h is None else h
    phi = 2.0 * math.pi * np.arange(n_quad) / n_quad
    x, y = epsilon * np.cos(phi), epsilon * np.sin(phi)
    ref = -phi
    d0 = _dzbar(lambda X, Y: _zbar_power(X, Y, a, ref), x, y, h)
    d1 = _dzbar(lambda X, Y: _zbar_power(X, Y, 1.0 - a, ref), x, y, h)
    dzbar = -1j * epsilon * np.exp(-1j * phi) * (2.0 * math.pi / n_quad)
    return complex((2.0 / 1j) * np.sum(d0 * d1 * dzbar))


@dataclass(frozen=True)
class PairingArea:
    """Area evaluation with the resolution study behind it."""

    value: complex
    error: float
    order: float
    n_r: int


def _area_integral(a: float, cutoff: CutoffProfile, n_r: int, n_theta: int, h: float) -> complex:
    r, wr = panel_nodes(np.array([cutoff.r_on, cutoff.r_off]), n_r)
    th = 2.0 * math.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(r, th, indexing="ij")
    x, y = R * np.cos(TH), R * np.sin(TH)
    ref = -TH

    def v0bar(X, Y):
        return _zbar_power(X, Y, a, ref) * cutoff(np.hypot(X, Y))

    def vm1(X, Y):
        return _zbar_power(X, Y, 1.0 - a, ref) * cutoff(np.hypot(X, Y))

    integrand = (_laplacian(v0bar, x, y, h) * _dzbar(vm1, x, y, h)
                 + _dzbar(v0bar, x, y, h) * _laplacian(vm1, x, y, h))
    w = (wr * r)[:, None] * (2.0 * math.pi / n_theta)
    return complex(-np.sum(integrand * w))


def commutator_pairing_area(alpha, cutoff: CutoffProfile | None = None, n_r: int = 24, n_theta: int = 32,
                            h: float = 1e-4, tol: float = 1e-6) -> PairingArea:
    """-int (Lap vbar_0 d_zbar v_{-1} + d_zbar vbar_0 Lap v_{-1}) dx dy with the cutoff applied.

    vbar_0 = zbar^alpha rho and v_{-1} = zbar^{1-alpha} rho.  Where rho = 1 both
    factors are antiholomorphic and the integrand vanishes, so the inner disk
    r < r_on contributes exactly 0 and quadrature covers [r_on, r_off]:
    Gauss-Legendre in r, trapezoid in theta, finite differences of step h.

    Raises
    ------
    AccuracyError
        If successive radial resolutions differ by more than ``tol``; the
        error carries the observed convergence order.
    """
    a = _flux(alpha)
    cutoff = cutoff or CutoffProfile()
    vals = [_area_integral(a, cutoff, n, n_theta, h) for n in (n_r // 4, n_r // 2, n_r)]
    d1, d2 = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
    order = float(math.log2(d1 / d2)) if d2 > 0 and d1 > 0 else float("inf")
    err = d2
    if err > tol:
        raise AccuracyError(f"area pairing not resolved (observed order {order:.2f})", estimate=vals[2],
                            error_bound=err)
    return PairingArea(vals[2], float(err), order, n_r)
