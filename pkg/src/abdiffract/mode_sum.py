"""Windowed, mode-truncated Aharonov-Bohm sine-propagator kernel.

The kernel is

    E^g(t, q1, q2) = sum_k e^{ik dtheta} (1/2pi) int g(lam) sin(t lam)
                     J_{|k+alpha|}(lam r1) J_{|k+alpha|}(lam r2) dlam,

normalized so that alpha -> 0 reproduces the free 2-D sine kernel
H(t - rho) / (2 pi sqrt(t^2 - rho^2)).  ``SERIES_KERNEL_SCALE`` converts to
the series normalization, without the 1/(2 pi).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, ConfigError, DomainError, ExcludedDirectionError, TailOverflowError
from .numerics import panel_nodes, uniform_breaks
from .special_fn import AccuracyBudget, bessel_j_ladder

TWO_PI = 2.0 * math.pi
SERIES_KERNEL_SCALE = TWO_PI
KERNEL_BUDGET = AccuracyBudget(abs_tol=1e-11, rel_tol=1e-9)
_SIGMA_ANGLE_TOL = 1e-7


def reduce_angle(a):
    """Reduce an angle (or array) to (-pi, pi]."""
    r = np.mod(np.asarray(a, dtype=float) + math.pi, TWO_PI) - math.pi
    r = np.where(r <= -math.pi, r + TWO_PI, r)
    if np.ndim(r) == 0:
        return float(r)
    return r


def _alpha(alpha) -> float:
    return alpha.alpha if isinstance(alpha, Flux) else float(alpha)


@dataclass(frozen=True)
class Flux:
    """Flux parameter in the open interval (0, 1)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 1.0):
            raise ConfigError(f"flux alpha must lie in (0, 1), got {a}")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class PolarPoint:
    """Point (r, theta) with r > 0; theta is stored reduced to (-pi, pi]."""

    r: float
    theta: float

    def __post_init__(self):
        r = float(self.r)
        if not (r > 0 and math.isfinite(r)):
            raise ConfigError(f"radius must be positive and finite, got {r}")
        th = float(self.theta)
        if not math.isfinite(th):
            raise ConfigError("angle must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", reduce_angle(th))

    @property
    def x(self) -> float:
        return self.r * math.cos(self.theta)

    @property
    def y(self) -> float:
        return self.r * math.sin(self.theta)

    @classmethod
    def from_cartesian(cls, x: float, y: float) -> "PolarPoint":
        return cls(math.hypot(x, y), math.atan2(y, x))


def separation(q1: PolarPoint, q2: PolarPoint) -> float:
    """Euclidean distance |q1 - q2|."""
    return math.hypot(q1.x - q2.x, q1.y - q2.y)


@dataclass(frozen=True)
class SpacetimeQuery:
    """Time t > 0 and the two points of the kernel."""

    t: float
    q1: PolarPoint
    q2: PolarPoint

    def __post_init__(self):
        if not (float(self.t) > 0 and math.isfinite(self.t)):
            raise ConfigError(f"query time must be positive, got {self.t}")

    @property
    def dtheta(self) -> float:
        return reduce_angle(self.q1.theta - self.q2.theta)


@dataclass(frozen=True)
class FrequencyWindow:
    """Smooth non-negative frequency cutoff g(lam) <= 1, zero for lam <= 0.

    Parameters
    ----------
    lambda_center : float
        Center of the window.
    lambda_halfwidth : float
        sigma of the Gaussian, or half the support of the bump.
    shape : {"gaussian", "bump"}
        The Gaussian needs ``lambda_center >= 6 * lambda_halfwidth``.
    """

    lambda_center: float
    lambda_halfwidth: float
    shape: str = "gaussian"

    def __post_init__(self):
        c, h = float(self.lambda_center), float(self.lambda_halfwidth)
        if not (c > 0 and h > 0 and math.isfinite(c) and math.isfinite(h)):
            raise ConfigError("window center and halfwidth must be positive")
        if self.shape == "gaussian":
            if c < 6.0 * h * (1.0 - 1e-12):
                raise ConfigError("gaussian window needs lambda_center >= 6 * lambda_halfwidth")
        elif self.shape == "bump":
            if c <= h:
                raise ConfigError("bump window must be supported in lambda > 0")
        else:
            raise ConfigError(f"unknown window shape {self.shape!r}")
        object.__setattr__(self, "lambda_center", c)
        object.__setattr__(self, "lambda_halfwidth", h)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        u = (lam - self.lambda_center) / self.lambda_halfwidth
        if self.shape == "gaussian":
            val = np.exp(-0.5 * u * u)
        else:
            inside = np.abs(u) < 1.0
            us = np.where(inside, u, 0.0)
            val = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - us * us)), 0.0)
        return np.where(lam > 0, val, 0.0)

    def support(self) -> tuple:
        """Interval outside which g is below ~1e-14 (Gaussian) or zero (bump)."""
        c, h = self.lambda_center, self.lambda_halfwidth
        if self.shape == "gaussian":
            return max(0.0, c - 8.0 * h), c + 8.0 * h
        return c - h, c + h

    @property
    def width(self) -> float:
        """Time-domain width scale 1/lambda_halfwidth."""
        return 1.0 / self.lambda_halfwidth

    def nodes(self, rate: float = 0.0, order: int = 20):
        """Panel Gauss-Legendre nodes over the support resolving oscillation ``rate``."""
        lo, hi = self.support()
        width = (hi - lo) / 8.0
        if rate > 0:
            width = min(width, TWO_PI / rate)
        return panel_nodes(uniform_breaks(lo, hi, width), order)

    def mass(self) -> float:
        lam, w = self.nodes()
        return float(np.sum(w * self(lam)))

    def time_profile(self, tau):
        """h(tau) = (1/pi) int_0^inf g(lam) cos(lam tau) dlam."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        lam, w = self.nodes(rate=float(np.max(np.abs(tau))) if tau.size else 0.0)
        wg = w * self(lam)
        out = np.cos(np.outer(tau, lam)) @ wg / math.pi
        return out

    def time_extent(self, rel: float = 1e-16) -> float:
        """|tau| beyond which |h(tau)| < rel * h(0)."""
        if self.shape == "gaussian":
            return math.sqrt(-2.0 * math.log(rel)) / self.lambda_halfwidth
        taus = np.linspace(0.0, 400.0 / self.lambda_halfwidth, 8001)
        env = np.abs(self.time_profile(taus))
        big = np.nonzero(env > rel * env[0])[0]
        return float(taus[min(big[-1] + 1, taus.size - 1)])


@dataclass(frozen=True)
class ModeSpec:
    """Mode truncation |k| <= k_max with a certified tail tolerance."""

    k_max: int
    tail_tol: float = 1e-12

    def __post_init__(self):
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise ConfigError("k_max must be an integer >= 1")
        if not self.tail_tol > 0:
            raise ConfigError("tail_tol must be positive")


@dataclass(frozen=True)
class KernelSample:
    """One windowed kernel value with its error estimates."""

    t: float
    value: complex
    est_mode_tail: float
    est_quad_err: float


def mode_order(k: int, alpha) -> float:
    """nu_k = |k + alpha|."""
    return abs(k + _alpha(alpha))


def per_mode_windowed_integral(nu: float, r1: float, r2: float, t: float, g: FrequencyWindow,
                               budget: AccuracyBudget | None = None) -> float:
    """int_0^inf g(lam) sin(t lam) J_nu(lam r1) J_nu(lam r2) dlam by adaptive quadrature.

    Raises
    ------
    AccuracyError
        If the adaptive rule does not reach the budget; carries the estimate.
    """
    if not (r1 > 0 and r2 > 0 and t > 0):
        raise ConfigError("r1, r2 and t must be positive")
    budget = budget or AccuracyBudget(abs_tol=1e-13, rel_tol=1e-11)
    lo, hi = g.support()
    rate = t + r1 + r2
    breaks = uniform_breaks(lo, hi, max(TWO_PI / rate, (hi - lo) / 400.0))

    def f(lam):
        return float(g(lam)) * math.sin(t * lam) * special.jv(nu, lam * r1) * special.jv(nu, lam * r2)

    total, err = 0.0, 0.0
    per_panel = max(50, budget.max_evals // max(1, len(breaks) - 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(breaks[:-1], breaks[1:]):
            v, e = integrate.quad(f, a, b, epsabs=budget.abs_tol / len(breaks), epsrel=budget.rel_tol,
                                  limit=per_panel)
            total += v
            err += e
    if not budget.accepts(total, err):
        raise AccuracyError("per-mode quadrature did not converge", estimate=total, error_bound=err)
    return total


def _log_envelope(nu, x1: float, x2: float):
    """log of (x1/2)^nu (x2/2)^nu / Gamma(nu+1)^2."""
    nu = np.asarray(nu, dtype=float)
    return nu * (math.log(x1 / 2.0) + math.log(x2 / 2.0)) - 2.0 * special.gammaln(nu + 1.0)


def _tail_sum(log_terms: np.ndarray) -> float:
    m = np.max(log_terms)
    if m < -700:
        return 0.0
    return float(math.exp(m) * np.sum(np.exp(log_terms - m)))


def mode_tail_bound(alpha, k_max: int, g: FrequencyWindow, r1: float, r2: float) -> float:
    """Envelope bound on the modes |k| > k_max for a specific alpha."""
    a = _alpha(alpha)
    lam_hi = g.support()[1]
    x1, x2 = lam_hi * r1, lam_hi * r2
    n_end = int(k_max + 2 * max(x1, x2) + 200)
    k = np.arange(k_max + 1, n_end + 1, dtype=float)
    logs = np.concatenate([_log_envelope(k + a, x1, x2), _log_envelope(k - a, x1, x2)])
    return g.mass() / TWO_PI * _tail_sum(logs)


def mode_truncation_bound(g: FrequencyWindow, r1: float, r2: float, tail_tol: float) -> ModeSpec:
    """Smallest k_max whose excluded modes are certified below ``tail_tol``.

    Every excluded order exceeds k_max, and the log-concave envelope
    (x1/2)^nu (x2/2)^nu / Gamma(nu+1)^2 decreases past its peak, so the
    tail is at most 2 (int g) / (2 pi) sum_{n >= k_max} envelope(n) for any
    alpha once k_max is past the peak.
    """
    if not tail_tol > 0:
        raise ConfigError("tail_tol must be positive")
    if math.isinf(tail_tol):
        return ModeSpec(1, tail_tol)
    lam_hi = g.support()[1]
    x1, x2 = lam_hi * r1, lam_hi * r2
    n_end = int(2 * max(x1, x2) + 400)
    n = np.arange(0, n_end + 1, dtype=float)
    logs = _log_envelope(n, x1, x2)
    peak = int(np.argmax(logs))
    scale = 2.0 * g.mass() / TWO_PI
    # suffix sums in log space
    tails = np.empty_like(logs)
    acc = -np.inf
    for i in range(logs.size - 1, -1, -1):
        acc = np.logaddexp(acc, logs[i])
        tails[i] = acc
    for k in range(max(1, peak), n_end):
        if scale * math.exp(tails[k]) < tail_tol:
            return ModeSpec(k, tail_tol)
    raise TailOverflowError("no k_max found; the window reaches too high a frequency")


def _mode_phases(alpha: float, dtheta: float, k_max: int):
    pos = np.exp(1j * np.arange(0, k_max + 1) * dtheta)
    neg = np.exp(-1j * np.arange(1, k_max + 1) * dtheta)
    return pos, neg


def spectral_density(lam, r1: float, r2: float, dtheta: float, alpha, k_max: int) -> np.ndarray:
    """K(lam) = (1/2pi) sum_{|k|<=k_max} e^{ik dtheta} J_nu(lam r1) J_nu(lam r2).

    Orders k + alpha (k >= 0) and |k| - alpha (k < 0) come from two
    downward-recurrence ladders.
    """
    a = _alpha(alpha)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    pos_ph, neg_ph = _mode_phases(a, dtheta, k_max)
    jp1 = bessel_j_ladder(a, k_max, lam * r1)
    jp2 = jp1 if r2 == r1 else bessel_j_ladder(a, k_max, lam * r2)
    out = pos_ph @ (jp1 * jp2)
    if k_max >= 1:
        jn1 = bessel_j_ladder(1.0 - a, k_max - 1, lam * r1)
        jn2 = jn1 if r2 == r1 else bessel_j_ladder(1.0 - a, k_max - 1, lam * r2)
        out = out + neg_ph @ (jn1 * jn2)
    return out / TWO_PI


def _sine_transform(ts: np.ndarray, lam: np.ndarray, wgk: np.ndarray) -> np.ndarray:
    return np.sin(np.outer(ts, lam)) @ wgk


def _series_two_rules(ts, r1, r2, dtheta, alpha, g, k_max, density=None, t_ref=None):
    """Kernel values with a 20-point and a 14-point panel rule on the same panels."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    rate = max(float(np.max(np.abs(ts))), t_ref or 0.0) + r1 + r2
    lo, hi = g.support()
    width = min((hi - lo) / 8.0, TWO_PI / rate)
    breaks = uniform_breaks(lo, hi, width)
    vals = []
    for order in (20, 14):
        lam, w = panel_nodes(breaks, order)
        dens = density(lam) if density else spectral_density(lam, r1, r2, dtheta, alpha, k_max)
        vals.append(_sine_transform(ts, lam, w * g(lam) * dens))
    return vals[0], np.abs(vals[0] - vals[1])


def kernel_values(ts, q1: PolarPoint, q2: PolarPoint, alpha, g: FrequencyWindow,
                  modes: ModeSpec | None = None, budget: AccuracyBudget | None = None,
                  subtract_geometric: bool = False, t_ref: float | None = None) -> list:
    """Windowed kernel at each time in ``ts`` (any real t; the kernel is odd in t).

    Parameters
    ----------
    subtract_geometric : bool
        Remove e^{-i alpha dtheta} times the windowed free kernel on the same
        nodes, leaving the diffracted part.
    t_ref : float, optional
        Size the frequency panels for |t| up to ``t_ref`` so separate calls
        share nodes.

    Returns
    -------
    list of KernelSample
    """
    a = Flux(_alpha(alpha)).alpha
    budget = budget or KERNEL_BUDGET
    if modes is None:
        modes = mode_truncation_bound(g, q1.r, q2.r, 1e-12)
    tail = mode_tail_bound(a, modes.k_max, g, q1.r, q2.r)
    if tail > modes.tail_tol:
        raise TailOverflowError(
            f"mode tail bound {tail:.3e} exceeds tail_tol {modes.tail_tol:.3e}; increase k_max",
            error_bound=tail)
    dth = reduce_angle(q1.theta - q2.theta)
    rho = separation(q1, q2)

    density = None
    if subtract_geometric:
        geo = np.exp(-1j * a * dth) / TWO_PI

        def density(lam):
            return (spectral_density(lam, q1.r, q2.r, dth, a, modes.k_max)
                    - geo * special.j0(lam * rho))

    vals, errs = _series_two_rules(ts, q1.r, q2.r, dth, a, g, modes.k_max, density, t_ref)
    for v, e in zip(vals, errs):
        if not budget.accepts(v, e):
            raise AccuracyError("kernel quadrature error above budget", estimate=complex(v), error_bound=float(e))
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    return [KernelSample(float(t), complex(v), tail, float(e)) for t, v, e in zip(ts, vals, errs)]


def windowed_kernel(query: SpacetimeQuery, alpha, g: FrequencyWindow, modes: ModeSpec | None = None,
                    budget: AccuracyBudget | None = None) -> KernelSample:
    """Windowed kernel at one spacetime query.

    Raises
    ------
    TailOverflowError
        If ``modes.k_max`` cannot certify ``modes.tail_tol``.
    """
    return kernel_values([query.t], query.q1, query.q2, alpha, g, modes, budget)[0]


def kernel_from_modes(ts, r1: float, r2: float, dtheta: float, alpha: float, k_lo: int, k_hi: int,
                      g: FrequencyWindow) -> np.ndarray:
    """Brute-force sum over k_lo <= k <= k_hi for any real alpha (library Bessel calls).

    Used for the gauge-shift and flux-reflection identities, which leave (0, 1).
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    rate = float(np.max(np.abs(ts))) + r1 + r2
    lo, hi = g.support()
    lam, w = panel_nodes(uniform_breaks(lo, hi, min((hi - lo) / 8.0, TWO_PI / rate)), 20)
    k = np.arange(k_lo, k_hi + 1)
    nu = np.abs(k + alpha)[:, None]
    prod = special.jv(nu, lam[None, :] * r1) * special.jv(nu, lam[None, :] * r2)
    dens = np.exp(1j * k * dtheta) @ prod / TWO_PI
    return _sine_transform(ts, lam, w * g(lam) * dens)


def free_kernel_closed(t: float, rho: float) -> float:
    """Free 2-D sine kernel H(t - rho) / (2 pi sqrt(t^2 - rho^2))."""
    if not (t > 0 and rho > 0):
        raise ConfigError("t and rho must be positive")
    if t == rho:
        raise DomainError("free kernel is singular at t = rho")
    if t < rho:
        return 0.0
    return 1.0 / (TWO_PI * math.sqrt(t * t - rho * rho))


def windowed_free_kernel(ts, rho: float, g: FrequencyWindow) -> np.ndarray:
    """(1/2pi) int g(lam) sin(t lam) J_0(lam rho) dlam on panel nodes."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    lam, w = g.nodes(rate=float(np.max(np.abs(ts))) + rho, order=20)
    return _sine_transform(ts, lam, w * g(lam) * special.j0(lam * rho)) / TWO_PI


def windowed_free_kernel_convolved(t: float, rho: float, g: FrequencyWindow, tol: float = 1e-15) -> float:
    """Free kernel convolved in time with the window profile h (oracle).

    With s = rho cosh u on each branch of the odd extension,
    E^g(t) = (1/2pi) [int_0^inf h(t - rho cosh u) du - int_0^inf h(t + rho cosh u) du].
    """
    T = g.time_extent()
    lam, w = g.nodes(rate=T + abs(t) + rho, order=20)
    wg = w * g(lam) / math.pi

    def h(tau):
        return float(np.cos(lam * tau) @ wg)

    def branch(sign):
        # |t - sign * rho cosh u| <= T
        if sign > 0:
            c_lo, c_hi = max(1.0, (t - T) / rho), (t + T) / rho
        else:
            c_lo, c_hi = 1.0, (T - t) / rho
        if c_hi <= c_lo:
            return 0.0
        u_lo, u_hi = math.acosh(c_lo), math.acosh(c_hi)
        n_osc = (lam[-1] * rho * (c_hi - c_lo)) / math.pi
        breaks = np.linspace(u_lo, u_hi, int(8 + 2 * n_osc) + 1)
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for a, b in zip(breaks[:-1], breaks[1:]):
                v, _ = integrate.quad(lambda u: h(t - sign * rho * math.cosh(u)), a, b,
                                      epsabs=tol, epsrel=1e-13, limit=200)
                total += v
        return total

    return (branch(+1) - branch(-1)) / TWO_PI


def _check_direction(dtheta: float) -> float:
    d = reduce_angle(dtheta)
    if abs(abs(d) - math.pi) < _SIGMA_ANGLE_TOL:
        raise ExcludedDirectionError("excluded direction |dtheta| = pi")
    return d


def abel_diffraction_series(alpha, dtheta: float, eps: float, k_max: int) -> complex:
    """-i sum_{|k|<=k_max} e^{-i pi |k+alpha|} e^{ik dtheta} eps^{|k|}."""
    a = Flux(_alpha(alpha)).alpha
    d = _check_direction(dtheta)
    if not (0.0 < eps < 1.0):
        raise ConfigError("eps must lie in (0, 1)")
    k = np.arange(-k_max, k_max + 1, dtype=float)
    phase = -math.pi * np.abs(k + a) + k * d
    terms = np.exp(1j * phase + np.abs(k) * math.log(eps))
    return complex(-1j * np.sum(terms))


def diffraction_series_closed(alpha, dtheta: float) -> complex:
    """-sin(pi alpha) e^{-i dtheta/2} / cos(dtheta/2), the Abel limit."""
    a = Flux(_alpha(alpha)).alpha
    d = _check_direction(dtheta)
    return -math.sin(math.pi * a) * complex(math.cos(d / 2), -math.sin(d / 2)) / math.cos(d / 2)


def abel_series_limit(alpha, dtheta: float, h0: float = 1e-3, levels: int = 4,
                      k_factor: float = 60.0) -> complex:
    """Abel limit eps -> 1 by Richardson extrapolation in h = 1 - eps.

    The regularized sum is analytic in h, so Neville extrapolation to h = 0 over
    h0, h0/2, ... removes the O(h) bias of any single eps.
    """
    hs = h0 / 2.0 ** np.arange(levels)
    vals = [abel_diffraction_series(alpha, dtheta, 1.0 - h, int(k_factor / h)) for h in hs]
    table = list(vals)
    for m in range(1, levels):
        for i in range(levels - m):
            table[i] = (table[i + 1] * hs[i] - table[i] * hs[i + m]) / (hs[i] - hs[i + m])
    return complex(table[0])
