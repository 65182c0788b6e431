"""Moving-solenoid geometry, l-kernels, the differentiated propagator and the
diffraction coefficient.

Amplitudes here use the kernel normalization without the 1/(2 pi) of the
angular Fourier series (multiply physical kernel values by
``SERIES_KERNEL_SCALE``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, ConfigError, ExcludedDirectionError
from .mode_sum import (TWO_PI, Flux, FrequencyWindow, PolarPoint, _alpha, reduce_angle)
from .numerics import panel_nodes, refined_breaks, uniform_breaks
from .special_fn import AccuracyBudget, gamma_real, pq_partial_sums

SIGMA_GUARD = 0.2
_SIGMA_TOL = 1e-7


def _flux(alpha) -> float:
    return Flux(_alpha(alpha)).alpha


def _check_admissible(q1: PolarPoint, q2: PolarPoint) -> float:
    d = reduce_angle(q1.theta - q2.theta)
    if abs(abs(d) - math.pi) < _SIGMA_TOL:
        raise ExcludedDirectionError("excluded direction |theta1 - theta2| = pi")
    return d


@dataclass(frozen=True)
class NormalizedConfiguration:
    """Rotated pair with both angles in (-pi/2, pi/2)."""

    rotation: float
    q1: PolarPoint
    q2: PolarPoint
    near_sigma: bool


def normalize_configuration(q1: PolarPoint, q2: PolarPoint, guard: float = SIGMA_GUARD) -> NormalizedConfiguration:
    """Rotate so the angular midpoint of the reduced pair lies on theta = 0.

    Raises
    ------
    ExcludedDirectionError
        If |theta1 - theta2| = pi.
    """
    d = _check_admissible(q1, q2)
    mid = q2.theta + d / 2.0
    rot = reduce_angle(-mid)
    n1 = PolarPoint(q1.r, d / 2.0)
    n2 = PolarPoint(q2.r, -d / 2.0)
    return NormalizedConfiguration(rot, n1, n2, abs(abs(d) - math.pi) < guard)


@dataclass(frozen=True)
class TranslationState:
    """Points after translating the solenoid frame by s along +x."""

    s: float
    q1s: PolarPoint
    q2s: PolarPoint
    dtheta_total: float
    phase: complex


def translate(q1: PolarPoint, q2: PolarPoint, s: float, alpha) -> TranslationState:
    """Translated configuration with its U(1) phase e^{i alpha dTheta(s)}.

    dTheta(s) = (theta1(s) - theta1) - (theta2(s) - theta2), with
    theta_i(s) = arctan(y_i / (x_i + s)).
    """
    a = _flux(alpha)
    if s < 0:
        raise ConfigError("translation parameter must be non-negative")
    pts = []
    dth = []
    for q in (q1, q2):
        xs, y = q.x + s, q.y
        if xs <= 0:
            raise ConfigError("configuration not normalized: translation meets the points")
        th = math.atan2(y, xs)
        pts.append(PolarPoint(math.hypot(xs, y), th))
        dth.append(th - math.atan2(q.y, q.x))
    total = dth[0] - dth[1]
    return TranslationState(float(s), pts[0], pts[1], total, complex(math.cos(a * total), math.sin(a * total)))


def diffraction_coefficient(alpha, q1: PolarPoint, q2: PolarPoint) -> complex:
    """Closed-form lam^{-1} coefficient a0 as stated in the two-angle form.

    a0 = -(sin pi alpha / (2 sqrt(r1 r2))) (e^{-i theta1} + e^{i theta2}) / (cos theta1 + cos theta2).
    """
    a = _flux(alpha)
    _check_admissible(q1, q2)
    den = math.cos(q1.theta) + math.cos(q2.theta)
    num = complex(math.cos(q1.theta), -math.sin(q1.theta)) + complex(math.cos(q2.theta), math.sin(q2.theta))
    if abs(den) < 1e-14:
        # same direction set, reached through the half-angle form
        d = reduce_angle(q1.theta - q2.theta)
        return -math.sin(math.pi * a) * complex(math.cos(d / 2), -math.sin(d / 2)) / (
            2.0 * math.sqrt(q1.r * q2.r) * math.cos(d / 2))
    return -math.sin(math.pi * a) / (2.0 * math.sqrt(q1.r * q2.r)) * num / den


def upsilon0_principal(q1: PolarPoint, q2: PolarPoint, alpha) -> complex:
    """Principal amplitude (sin pi alpha / (4 pi sqrt(r1 r2))) (e^{-i theta1} + e^{i theta2})."""
    a = _flux(alpha)
    num = complex(math.cos(q1.theta), -math.sin(q1.theta)) + complex(math.cos(q2.theta), math.sin(q2.theta))
    return math.sin(math.pi * a) / (4.0 * math.pi * math.sqrt(q1.r * q2.r)) * num


def assemble_from_stationary_phase(alpha, q1: PolarPoint, q2: PolarPoint) -> complex:
    """Integrate the principal amplitude over s with the stationary-phase factor 2 pi / mu.

    mu = r1'(0) + r2'(0) = cos theta1 + cos theta2, and E_D = -int Upsilon_s ds.
    The result is checked against ``diffraction_coefficient``.
    """
    _check_admissible(q1, q2)
    mu = math.cos(q1.theta) + math.cos(q2.theta)
    val = -upsilon0_principal(q1, q2, alpha) * TWO_PI / mu
    ref = diffraction_coefficient(alpha, q1, q2)
    if abs(val - ref) > 1e-14 * max(1.0, abs(ref)):
        raise AccuracyError("stationary-phase assembly disagrees with the closed form",
                            estimate=val, error_bound=abs(val - ref))
    return val


def assemble_from_endpoint(alpha, q1: PolarPoint, q2: PolarPoint) -> complex:
    """Same assembly with the endpoint integral int_0^inf e^{-i lam mu s} ds = 1/(i lam mu).

    This is the lam^{-1} coefficient of the exact kernel's diffracted wave,
    equal to ``diffraction_coefficient / (2 pi i)``.
    """
    _check_admissible(q1, q2)
    mu = math.cos(q1.theta) + math.cos(q2.theta)
    return -upsilon0_principal(q1, q2, alpha) / (1j * mu)


def sommerfeld_weight(u, alpha, dtheta: float):
    """S(u) in the diffracted spectral density -(1/pi) int_0^inf J_0(lam rho_u) S(u) du.

    S(u) = sin(pi alpha) [e^{-alpha u} / (1 + e^{-u + i dtheta})
                          + e^{(alpha - 1) u - i dtheta} / (1 + e^{-u - i dtheta})].
    """
    a = _alpha(alpha)
    u = np.asarray(u, dtype=float)
    e = np.exp(1j * dtheta)
    return math.sin(math.pi * a) * (np.exp(-a * u) / (1.0 + np.exp(-u) * e)
                                    + np.exp((a - 1.0) * u) / e / (1.0 + np.exp(-u) / e))


def diffracted_wave_jump(alpha, q1: PolarPoint, q2: PolarPoint) -> complex:
    """Jump of the physical diffracted wave across t = r1 + r2: -S(0) / (4 pi sqrt(r1 r2))."""
    d = _check_admissible(q1, q2)
    return complex(-sommerfeld_weight(0.0, alpha, d) / (4.0 * math.pi * math.sqrt(q1.r * q2.r)))


def kernel_diffraction_coefficient(alpha, q1: PolarPoint, q2: PolarPoint) -> complex:
    """lam^{-1} coefficient of the exact diffracted wave (jump / (2 pi i)), series normalization."""
    return TWO_PI * diffracted_wave_jump(_flux(alpha), q1, q2) / (2j * math.pi)


def diffracted_wave_exact(t: float, q1: PolarPoint, q2: PolarPoint, alpha) -> complex:
    """Unwindowed diffracted wave (physical normalization), for t != r1 + r2.

    E_D(t) = -(1/(2 pi^2)) int_{rho_u < t} S(u) / sqrt(t^2 - rho_u^2) du,
    rho_u^2 = r1^2 + r2^2 + 2 r1 r2 cosh u.  Zero for t < r1 + r2.
    """
    a = _flux(alpha)
    d = _check_admissible(q1, q2)
    r1, r2 = q1.r, q2.r
    if t <= r1 + r2:
        return 0.0j
    c = (t * t - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
    u_star = math.acosh(c)

    def smooth(u):
        # S(u) / sqrt(t^2 - rho_u^2) * sqrt(u* - u)
        gap = 2.0 * r1 * r2 * (c - math.cosh(u))
        if u_star - u < 1e-12 * max(1.0, u_star):
            fac = 1.0 / math.sqrt(2.0 * r1 * r2 * math.sinh(u_star)) if u_star > 0 else 0.0
        else:
            fac = math.sqrt((u_star - u) / gap)
        return sommerfeld_weight(u, a, d) * fac

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, _ = integrate.quad(lambda u: smooth(u).real, 0.0, u_star, weight="alg", wvar=(0.0, -0.5),
                               epsabs=1e-14, epsrel=1e-12, limit=200)
        im, _ = integrate.quad(lambda u: smooth(u).imag, 0.0, u_star, weight="alg", wvar=(0.0, -0.5),
                               epsabs=1e-14, epsrel=1e-12, limit=200)
    return -(re + 1j * im) / (2.0 * math.pi ** 2)


@dataclass(frozen=True)
class LKernelSpec:
    """Which l-kernel, its symbol depth and representation."""

    j: int
    N: int = 3
    representation: str = "exact-bessel-limit"

    def __post_init__(self):
        if self.j not in (0, -1):
            raise ConfigError("j must be 0 or -1")
        if self.N < 0:
            raise ConfigError("N must be non-negative")
        if self.representation not in ("conormal-symbol", "exact-bessel-limit"):
            raise ConfigError(f"unknown representation {self.representation!r}")


@dataclass(frozen=True)
class LKernelValue:
    """l-kernel value; the angular factor is e^{i * angular_mode * theta}."""

    value: complex
    angular_mode: int


def l_order(j: int, alpha) -> float:
    """nu = 1 - alpha for j = -1 and alpha for j = 0."""
    a = _alpha(alpha)
    return 1.0 - a if j == -1 else a


def _l_nodes(g: FrequencyWindow, rate: float):
    lo, hi = g.support()
    return panel_nodes(uniform_breaks(lo, hi, min((hi - lo) / 8.0, TWO_PI / max(rate, 1e-12))), 20)


def l_kernel_values(spec: LKernelSpec, ts, r: float, alpha, g: FrequencyWindow) -> np.ndarray:
    """Real l-kernel values on an array of times.

    exact-bessel-limit:
        (1 / (2^nu Gamma(nu+1))) int g sin(lam t) lam^nu J_nu(lam r) dlam.
    conormal-symbol:
        2 Re of (1 / (i 2^nu Gamma(nu+1) sqrt(8 pi r))) int_{lam>0} g e^{i lam (t-r)}
        e^{i(pi nu/2 + pi/4)} lam^{nu - 1/2} (P_N - i Q_N)(lam r) dlam.
        The positive-frequency half of sin(lam t) J_nu(lam r) carries the
        H^(2) symbol P - i Q; the negative half is its conjugate.
    """
    a = _flux(alpha)
    if not r > 0:
        raise ConfigError("r must be positive")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    nu = l_order(spec.j, a)
    pref = 1.0 / (2.0 ** nu * gamma_real(nu + 1.0))
    lam, w = _l_nodes(g, float(np.max(np.abs(ts))) + r)
    wg = w * g(lam)
    if spec.representation == "exact-bessel-limit":
        coef = wg * lam ** nu * special.jv(nu, lam * r)
        return pref * (np.sin(np.outer(ts, lam)) @ coef)
    if g.support()[0] <= 0:
        raise ConfigError("conormal-symbol mode needs a window supported away from lam = 0")
    P, Q = pq_partial_sums(nu, lam * r, spec.N)
    phase = np.exp(1j * (math.pi * nu / 2.0 + math.pi / 4.0))
    coef = wg * phase * lam ** (nu - 0.5) * (P - 1j * Q)
    half = (np.exp(1j * np.outer(ts - r, lam)) @ coef) * pref / (1j * math.sqrt(8.0 * math.pi * r))
    return 2.0 * half.real


def l_kernel(spec: LKernelSpec, t: float, r: float, alpha, g: FrequencyWindow,
             budget: AccuracyBudget | None = None) -> LKernelValue:
    """Windowed l-kernel at one time.

    The panel rule is compared with a coarser rule on the same panels; the
    difference must meet ``budget``.
    """
    budget = budget or AccuracyBudget(abs_tol=1e-11, rel_tol=1e-9)
    val = float(l_kernel_values(spec, [t], r, alpha, g)[0])
    a = _flux(alpha)
    nu = l_order(spec.j, a)
    lam, w = panel_nodes(uniform_breaks(*g.support(), min((g.support()[1] - g.support()[0]) / 8.0,
                                                            TWO_PI / (abs(t) + r))), 12)
    if spec.representation == "exact-bessel-limit":
        coarse = np.sum(w * g(lam) * np.sin(lam * t) * lam ** nu * special.jv(nu, lam * r))
        coarse /= 2.0 ** nu * gamma_real(nu + 1.0)
        err = abs(coarse - val)
        if not budget.accepts(val, err):
            raise AccuracyError("l-kernel quadrature above budget", estimate=val, error_bound=err)
    return LKernelValue(complex(val), 1 if spec.j == -1 else 0)


class _LProfile:
    """Exact-bessel-limit l-kernel as a function of tau for one (j, r)."""

    def __init__(self, j: int, r: float, alpha: float, g: FrequencyWindow, tau_max: float):
        nu = l_order(j, alpha)
        self.lam, w = _l_nodes(g, tau_max + r)
        self.coef = w * g(self.lam) * self.lam ** nu * special.jv(nu, self.lam * r) / (
            2.0 ** nu * gamma_real(nu + 1.0))

    def __call__(self, tau: np.ndarray) -> np.ndarray:
        return np.sin(np.multiply.outer(tau, self.lam)) @ self.coef


def _duhamel_s_nodes(t: float, r2: float, g: FrequencyWindow):
    hi = g.support()[1]
    step = TWO_PI / hi
    focus = 6.0 / g.lambda_halfwidth
    breaks = refined_breaks(0.0, t, 2.0 * step, r2, focus, step)
    return panel_nodes(breaks, 20)


def _duhamel_profiles(q1: PolarPoint, q2: PolarPoint, a: float, g: FrequencyWindow, t_max: float):
    return (_LProfile(-1, q1.r, a, g, t_max), _LProfile(0, q2.r, a, g, t_max),
            _LProfile(0, q1.r, a, g, t_max), _LProfile(-1, q2.r, a, g, t_max))


def _duhamel_sum(t: float, profiles, q1: PolarPoint, q2: PolarPoint, s, w) -> complex:
    lm1_r1, l0_r2, l0_r1, lm1_r2 = profiles
    e1 = complex(math.cos(q1.theta), -math.sin(q1.theta))
    e2 = complex(math.cos(q2.theta), math.sin(q2.theta))
    return complex(np.sum(w * (lm1_r1(t - s) * e1 * l0_r2(s) + l0_r1(t - s) * lm1_r2(s) * e2)))


def upsilon0_duhamel_values(ts, q1: PolarPoint, q2: PolarPoint, alpha, g: FrequencyWindow) -> np.ndarray:
    """Windowed Upsilon_0 by s-quadrature of the composition of l-kernels.

    Upsilon_0(t) = 2 alpha (1 - alpha) int_0^t [ l_{-1}(t-s, r1) e^{-i theta1} l_0(s, r2)
                                              + l_0(t-s, r1) l_{-1}(s, r2) e^{i theta2} ] ds.

    The l_j use the series normalization of the propagator, which carries an
    extra 2 pi per factor relative to the physical kernel; the commutator
    constant -4 pi alpha (1 - alpha) therefore enters as 2 alpha (1 - alpha).
    The s-panels are refined to width 2 pi / lam_hi within 6 / sigma of s = r2.
    """
    a = _flux(alpha)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    profiles = _duhamel_profiles(q1, q2, a, g, float(np.max(ts)))
    out = np.array([_duhamel_sum(t, profiles, q1, q2, *_duhamel_s_nodes(t, q2.r, g)) for t in ts])
    return 2.0 * a * (1.0 - a) * out


def upsilon0_duhamel(t: float, q1: PolarPoint, q2: PolarPoint, alpha, g: FrequencyWindow,
                     budget: AccuracyBudget | None = None) -> complex:
    """Windowed Upsilon_0 at one time (see ``upsilon0_duhamel_values``).

    The refined s-rule is checked against uniform panels of half the width.
    """
    budget = budget or AccuracyBudget(abs_tol=1e-10, rel_tol=1e-8)
    if not t > 0:
        raise ConfigError("t must be positive")
    a = _flux(alpha)
    profiles = _duhamel_profiles(q1, q2, a, g, t)
    scale = 2.0 * a * (1.0 - a)
    val = scale * _duhamel_sum(t, profiles, q1, q2, *_duhamel_s_nodes(t, q2.r, g))
    s, w = panel_nodes(uniform_breaks(0.0, t, TWO_PI / g.support()[1] / 2.0), 20)
    fine = scale * _duhamel_sum(t, profiles, q1, q2, s, w)
    err = abs(fine - val)
    if not budget.accepts(val, err):
        raise AccuracyError("Duhamel s-quadrature above budget", estimate=val, error_bound=err)
    return val
