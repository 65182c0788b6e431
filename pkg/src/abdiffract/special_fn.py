"""Gamma and Bessel functions of real fractional order.

The fast paths (power series, Hankel expansion, downward order recurrence)
are checked against integral-representation quadrature oracles that share no
code with them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special

from .errors import AccuracyError, ConfigError, DomainError

_EPS = np.finfo(float).eps
_LOG_TINY = math.log(1e-18)


@dataclass(frozen=True)
class AccuracyBudget:
    """Error budget for a numeric evaluation.

    Parameters
    ----------
    abs_tol, rel_tol : float
        Accept when ``error <= max(abs_tol, rel_tol * |value|)``.
    max_evals : int
        Cap on integrand evaluations (adaptive subdivisions for quadrature).
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_evals: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ConfigError("tolerances must be positive")
        if self.max_evals < 1:
            raise ConfigError("max_evals must be at least 1")

    def accepts(self, value, error: float) -> bool:
        return error <= max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_BUDGET = AccuracyBudget()


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or nu < 0:
        raise DomainError(f"Bessel order must be finite and non-negative, got {nu}")
    return nu


def gamma_real(x: float) -> float:
    """Gamma function of a real argument.

    Raises
    ------
    DomainError
        At the poles x = 0, -1, -2, ...
    """
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def asym_coeff(nu: float, k: int) -> float:
    """Hankel-expansion coefficient a_k(nu) with a_0 = 1.

    a_k = a_{k-1} (4 nu^2 - (2k-1)^2) / (8k).
    """
    if k < 0:
        raise ConfigError("k must be non-negative")
    mu = 4.0 * float(nu) ** 2
    a = 1.0
    for j in range(1, k + 1):
        a = a * (mu - (2 * j - 1) ** 2) / (8.0 * j)
    return a


@dataclass(frozen=True)
class SymbolSeries:
    """Truncated ladder a_0(nu) .. a_N(nu)."""

    nu: float
    coeffs: tuple = field(default_factory=tuple)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def build(cls, nu: float, N: int) -> "SymbolSeries":
        nu = _check_order(nu)
        mu = 4.0 * nu * nu
        coeffs = [1.0]
        for j in range(1, N + 1):
            coeffs.append(coeffs[-1] * (mu - (2 * j - 1) ** 2) / (8.0 * j))
        return cls(nu, tuple(coeffs))


def pq_partial_sums(nu: float, x, N: int):
    """Partial sums of the Hankel P and Q series.

    P_N = sum_{k=0}^{N} (-1)^k a_{2k} / x^{2k},
    Q_N = sum_{k=0}^{N-1} (-1)^k a_{2k+1} / x^{2k+1}.

    ``x`` may be an array.  Depth 0 gives (1, 0).
    """
    if N < 0:
        raise ConfigError("N must be non-negative")
    ser = SymbolSeries.build(nu, 2 * N)
    x = np.asarray(x, dtype=float)
    P = np.zeros_like(x)
    Q = np.zeros_like(x)
    for k in range(N + 1):
        P = P + (-1) ** k * ser.coeffs[2 * k] / x ** (2 * k)
    for k in range(N):
        Q = Q + (-1) ** k * ser.coeffs[2 * k + 1] / x ** (2 * k + 1)
    if P.ndim == 0:
        return float(P), float(Q)
    return P, Q


def _j_series(nu: float, x: float):
    """Power series with a truncation plus rounding bound."""
    log_t0 = nu * math.log(x / 2.0) - math.lgamma(nu + 1.0)
    if log_t0 < -740.0:
        return 0.0, math.exp(max(log_t0, -745.0)) + 1e-300
    t = math.exp(log_t0)
    s = t
    abs_sum = abs(t)
    q = x * x / 4.0
    m = 0
    while True:
        m += 1
        t = -t * q / (m * (m + nu))
        s += t
        abs_sum += abs(t)
        ratio = q / ((m + 1) * (m + 1 + nu))
        if m > q and ratio < 0.5 and abs(t) <= _EPS * abs(s) * 0.1:
            trunc = abs(t) * ratio / (1.0 - ratio)
            break
        if m > 10000:
            trunc = abs(t)
            break
    return s, trunc + 4.0 * _EPS * abs_sum * math.sqrt(m)


def _j_hankel(nu: float, x: float):
    """Hankel expansion at optimal truncation; bound is the first omitted term."""
    mu = 4.0 * nu * nu
    amp = math.sqrt(2.0 / (math.pi * x))
    P, Q = 1.0, 0.0
    term = 1.0
    k = 0
    omitted = 0.0
    while True:
        k += 1
        nxt = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if nxt == 0.0:
            omitted = 0.0
            break
        if abs(nxt) >= abs(term) or abs(nxt) < _EPS * 1e-3:
            omitted = abs(nxt)
            break
        term = nxt
        sign = (-1) ** (k // 2)
        if k % 2 == 0:
            P += sign * term
        else:
            Q += sign * term
    # angle addition keeps the phase exact for large x
    phi = (nu / 2.0 + 0.25) * math.pi
    cx, sx, cp, sp = math.cos(x), math.sin(x), math.cos(phi), math.sin(phi)
    cos_w = cx * cp + sx * sp
    sin_w = sx * cp - cx * sp
    val = amp * (cos_w * P - sin_w * Q)
    rounding = amp * _EPS * (8.0 + phi)
    return val, amp * omitted + rounding


def bessel_j_quad(nu: float, x: float, tol: float = 1e-14, full_output: bool = False):
    """J_nu(x) from its integral representation (oracle).

    J_nu(x) = (1/pi) int_0^pi cos(nu t - x sin t) dt
              - (sin nu pi / pi) int_0^inf exp(-nu t - x sinh t) dt.

    The second integral is truncated where the integrand drops below 1e-18.
    """
    nu = _check_order(nu)
    x = float(x)
    if not x > 0:
        raise DomainError("x must be positive")
    limit = max(200, int(4 * (x + nu)))
    with warnings.catch_warnings():
        # roundoff warnings at the 1e-14 level are expected and folded into err
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v1, e1 = integrate.quad(lambda s: math.cos(nu * s - x * math.sin(s)), 0.0, math.pi,
                                epsabs=tol, epsrel=0.0, limit=limit)
    val = v1 / math.pi
    err = e1 / math.pi
    snp = math.sin(nu * math.pi)
    if snp != 0.0:
        expo = lambda s: nu * s + x * math.sinh(s) + _LOG_TINY
        tau = optimize.brentq(expo, 0.0, 1.0 + math.asinh(-_LOG_TINY / x))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            v2, e2 = integrate.quad(lambda s: math.exp(-nu * s - x * math.sinh(s)), 0.0, tau,
                                    epsabs=tol, epsrel=0.0, limit=limit)
        tail = 1e-18 / (nu + x)
        val -= snp / math.pi * v2
        err += abs(snp) / math.pi * (e2 + tail)
    if full_output:
        return val, err
    return val


def bessel_j(nu: float, x: float, budget: AccuracyBudget | None = None,
             method: str = "auto") -> float:
    """Bessel function J_nu(x) for real nu >= 0, x > 0.

    Parameters
    ----------
    nu : float
        Order.
    x : float
        Argument.
    budget : AccuracyBudget, optional
        Accuracy target.
    method : {"auto", "series", "hankel", "library", "quad"}
        Force a path; "auto" tries series or Hankel where certified and
        falls back to the library routine and then to quadrature.

    Raises
    ------
    AccuracyError
        When no path certifies the budget; carries the best estimate.
    """
    nu = _check_order(nu)
    x = float(x)
    if not x > 0:
        raise DomainError("x must be positive")
    budget = budget or DEFAULT_BUDGET

    candidates = []
    if method in ("auto", "series") and (x <= max(8.0, nu) or method == "series"):
        candidates.append(_j_series(nu, x))
    if method in ("auto", "hankel") and (x >= max(30.0, 2.0 * nu) or method == "hankel"):
        candidates.append(_j_hankel(nu, x))
    for val, bound in candidates:
        if budget.accepts(val, bound):
            return float(val)
    if method in ("auto", "library"):
        val = float(special.jv(nu, x))
        if math.isfinite(val):
            bound = 1e-14 * max(abs(val), min(1.0, math.sqrt(2.0 / (math.pi * x))) * 1e-2)
            candidates.append((val, bound))
            if budget.accepts(val, bound) or method == "library":
                return val
    if method in ("auto", "quad"):
        val, bound = bessel_j_quad(nu, x, tol=min(budget.abs_tol, 1e-14), full_output=True)
        candidates.append((val, bound))
        if budget.accepts(val, bound) or method == "quad":
            return float(val)
    if not candidates:
        raise AccuracyError(f"method {method!r} not applicable at nu={nu}, x={x}")
    best = min(candidates, key=lambda c: c[1])
    raise AccuracyError(f"J_{nu}({x}) budget not met", estimate=best[0], error_bound=best[1])


def bessel_k(nu: float, z: complex, budget: AccuracyBudget | None = None) -> complex:
    """Modified Bessel function K_nu(z) for real nu >= 0 and Re z > 0."""
    nu = _check_order(nu)
    z = complex(z)
    if not z.real > 0:
        raise DomainError("bessel_k requires Re z > 0")
    val = complex(special.kv(nu, z))
    if np.isfinite(val.real) and np.isfinite(val.imag):
        return val
    budget = budget or DEFAULT_BUDGET
    val, err = bessel_k_quad(nu, z, full_output=True)
    if not budget.accepts(val, err):
        raise AccuracyError(f"K_{nu}({z}) budget not met", estimate=val, error_bound=err)
    return val


def bessel_k_quad(nu: float, z: complex, tol: float = 1e-13, full_output: bool = False):
    """K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt (oracle, Re z > 0).

    The integrand is scaled by exp(z) so the quadrature is relative.
    """
    nu = _check_order(nu)
    z = complex(z)
    if not z.real > 0:
        raise DomainError("bessel_k_quad requires Re z > 0")
    a = z.real

    def mag(t):
        return -a * (math.cosh(t) - 1.0) + nu * t - math.log(2.0)

    upper = 1.0
    while mag(upper) > _LOG_TINY:
        upper *= 1.5

    def f(t):
        return np.exp(-z * (np.cosh(t) - 1.0)) * np.cosh(nu * t)

    limit = 500
    re, e_re = integrate.quad(lambda t: f(t).real, 0.0, upper, epsabs=0.0, epsrel=tol, limit=limit)
    im, e_im = integrate.quad(lambda t: f(t).imag, 0.0, upper, epsabs=0.0, epsrel=tol, limit=limit)
    scale = np.exp(-z)
    val = complex((re + 1j * im) * scale)
    err = float((e_re + e_im + 1e-18 * upper) * abs(scale))
    if full_output:
        return val, err
    return val


def small_argument_j(nu: float, x):
    """Leading small-argument law (x/2)^nu / Gamma(nu+1)."""
    return np.exp(nu * np.log(np.asarray(x, dtype=float) / 2.0) - math.lgamma(nu + 1.0))


def ladder_start(x) -> np.ndarray:
    """Starting order for the downward recurrence; J beyond it is below ~1e-20."""
    x = np.asarray(x, dtype=float)
    return np.ceil(x + 10.0 * np.cbrt(x) + 40.0).astype(int)


def bessel_j_ladder(beta: float, n_max: int, x) -> np.ndarray:
    """J_{n+beta}(x) for n = 0..n_max on an array of arguments.

    Downward three-term recurrence seeded at two exact orders per argument.
    Values above the seed order are set to zero (they are below ~1e-20).
    Arguments below 1e-2 use the library routine directly.

    Returns
    -------
    ndarray, shape (n_max + 1, len(x))
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if n_max < 0:
        raise ConfigError("n_max must be non-negative")
    out = np.zeros((n_max + 1, x.size))
    orders = np.arange(n_max + 1) + beta
    small = x < 1e-2
    if np.any(small):
        out[:, small] = special.jv(orders[:, None], x[None, small])
    big = ~small
    if not np.any(big) or n_max == 0:
        if n_max == 0 and np.any(big):
            out[0, big] = special.jv(beta, x[big])
        return out
    xb = x[big]
    top = np.minimum(n_max, ladder_start(xb))
    cols = np.nonzero(big)[0]
    sub = np.zeros((n_max + 1, xb.size))
    idx = np.arange(xb.size)
    sub[top, idx] = special.jv(top + beta, xb)
    sub[top - 1, idx] = special.jv(top - 1 + beta, xb)
    for n in range(n_max - 1, 0, -1):
        act = top > n
        if not np.any(act):
            continue
        sub[n - 1, act] = 2.0 * (n + beta) / xb[act] * sub[n, act] - sub[n + 1, act]
    out[:, cols] = sub
    return out
