"""Acceptance criteria as runnable checks.

Each check returns a :class:`CriterionResult`; ``measured`` and ``tolerance``
are dicts keyed by sub-check so criteria with several parts report each one.
Wall-clock time is kept in ``elapsed_s`` and left out of the JSON summary so
repeated runs produce identical output.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .diffraction import (diffraction_coefficient, kernel_diffraction_coefficient, upsilon0_duhamel_values,
                          upsilon0_principal)
from .domains import (CutoffProfile, DeficiencyFrequency, boundary_coefficients, classify_l2,
                      commutator_pairing_area, commutator_pairing_contour, deficiency_solution, ode_residual)
from .mode_sum import (FrequencyWindow, PolarPoint, abel_diffraction_series, abel_series_limit,
                       diffraction_series_closed, kernel_from_modes, kernel_values, mode_truncation_bound,
                       separation, windowed_free_kernel_convolved)
from .probe import TimeGrid, extract_conormal_amplitude, geometric_front_check, run_probe
from .special_fn import asym_coeff, bessel_j, bessel_j_quad, bessel_k, bessel_k_quad

SEED = 20240611


@dataclass(frozen=True)
class CriterionResult:
    """One acceptance criterion: measured values against tolerances."""

    criterion_id: str
    description: str
    paper_anchor: str
    measured: dict
    tolerance: dict
    passed: bool
    runtime_limit_s: float | None = None
    elapsed_s: float = 0.0
    details: dict = field(default_factory=dict)

    def to_json_dict(self, include_timing: bool = False) -> dict:
        d = {"criterion_id": self.criterion_id, "description": self.description,
             "paper_anchor": self.paper_anchor, "measured": self.measured, "tolerance": self.tolerance,
             "pass": self.passed, "details": self.details}
        if include_timing:
            d["elapsed_s"] = self.elapsed_s
            d["runtime_limit_s"] = self.runtime_limit_s
        return d

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_fmt(v)} (tol {_fmt(self.tolerance.get(k))})" for k, v in self.measured.items())
        return f"[{status}] criterion {self.criterion_id}: {self.description} | {parts} | {self.elapsed_s:.1f}s"


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.3e}"
    return str(v)


def _result(cid, desc, anchor, measured, tolerance, limit, t0, details=None, checks=None) -> CriterionResult:
    measured = {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in measured.items()}
    if checks is None:
        checks = [measured[k] <= tolerance[k] for k in measured]
    return CriterionResult(cid, desc, anchor, measured, tolerance, bool(all(checks)), limit,
                           time.perf_counter() - t0, details or {})


def _pair(dtheta: float, r1: float = 1.0, r2: float = 1.0):
    return PolarPoint(r1, dtheta / 2.0), PolarPoint(r2, -dtheta / 2.0)


# -- 1 ---------------------------------------------------------------------

ABEL_ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)
ABEL_DTHETAS = (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0)


def criterion_1() -> CriterionResult:
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for a in ABEL_ALPHAS:
        for d in ABEL_DTHETAS:
            err = abs(abel_diffraction_series(a, d, 1.0 - 1e-4, 10 ** 6) - diffraction_series_closed(a, d))
            if err > worst:
                worst, where = err, (a, d)
    return _result("1", "Abel-regularized diffraction series at eps = 1 - 1e-4 vs closed form",
                   "diffraction series remark", {"max_abs_err": worst}, {"max_abs_err": 1e-5}, 10.0, t0,
                   {"worst_alpha_dtheta": list(where)})


def supplementary_abel_limit() -> CriterionResult:
    t0 = time.perf_counter()
    worst = max(abs(abel_series_limit(a, d) - diffraction_series_closed(a, d))
                for a in ABEL_ALPHAS for d in ABEL_DTHETAS)
    return _result("S1", "Abel series extrapolated to eps -> 1 vs closed form", "diffraction series remark",
                   {"max_abs_err": worst}, {"max_abs_err": 1e-5}, 60.0, t0)


# -- 2 ---------------------------------------------------------------------

def criterion_2() -> CriterionResult:
    t0 = time.perf_counter()
    c_err, a_err, rows = 0.0, 0.0, []
    for a in (0.1, 0.25, 0.5, 0.75, 0.9):
        exact = -4.0 * math.pi * a * (1.0 - a)
        c = commutator_pairing_contour(a, 1e-3, 64)
        ar = commutator_pairing_area(a, CutoffProfile()).value
        c_err = max(c_err, abs(c - exact))
        a_err = max(a_err, abs(ar - c))
        rows.append({"alpha": a, "contour": [c.real, c.imag], "area": [ar.real, ar.imag]})
    return _result("2", "commutator pairing: contour vs -4 pi alpha (1 - alpha), area vs contour",
                   "commutator constant", {"contour_abs_err": c_err, "area_vs_contour": a_err},
                   {"contour_abs_err": 1e-6, "area_vs_contour": 1e-3}, 30.0, t0, {"values": rows})


# -- 3 ---------------------------------------------------------------------

PROBE_ALPHAS = (0.25, 0.5, 0.75)
PROBE_DTHETAS = (math.pi / 6, math.pi / 3, 2 * math.pi / 3)
PROBE_RADII = ((1.0, 1.0), (1.0, 2.0))
PROBE_WINDOW = FrequencyWindow(30.0, 5.0)
PROBE_BAND = (20.0, 40.0)

_probe_cache: dict = {}


def probe_grid() -> list:
    """Probe reports over the flagship grid (computed once per process)."""
    if "reports" not in _probe_cache:
        reports = []
        for a in PROBE_ALPHAS:
            for d in PROBE_DTHETAS:
                for r1, r2 in PROBE_RADII:
                    q1, q2 = _pair(d, r1, r2)
                    reports.append(((a, d, r1, r2), run_probe(a, q1, q2, PROBE_WINDOW, PROBE_BAND)))
        _probe_cache["reports"] = reports
    return _probe_cache["reports"]


def criterion_3() -> CriterionResult:
    t0 = time.perf_counter()
    reports = probe_grid()
    worst = max(rep.rel_mag_err for _, rep in reports)
    gate = max(rep.diagnostics["manufactured_gate_rel_err"] for _, rep in reports)
    rows = [{"alpha": k[0], "dtheta": k[1], "r1": k[2], "r2": k[3], "rel_mag_err": rep.rel_mag_err,
             "phase_err": rep.phase_err} for k, rep in reports]
    return _result("3", "probe |a_hat| vs closed-form diffraction coefficient over the flagship grid",
                   "diffraction coefficient closed form", {"max_rel_mag_err": worst, "gate_rel_err": gate},
                   {"max_rel_mag_err": 0.10, "gate_rel_err": 0.01}, 900.0, t0, {"grid": rows})


def supplementary_probe_kernel() -> CriterionResult:
    t0 = time.perf_counter()
    reports = probe_grid()
    worst = max(rep.rel_mag_err_kernel for _, rep in reports)
    phase = max(abs(rep.phase_err_kernel) for _, rep in reports)
    return _result("S3", "probe |a_hat| vs the jump coefficient of the exact diffracted wave",
                   "diffraction coefficient closed form", {"max_rel_mag_err": worst, "max_phase_err": phase},
                   {"max_rel_mag_err": 0.10, "max_phase_err": 0.05}, 900.0, t0)


# -- 4 ---------------------------------------------------------------------

def criterion_4(n: int = 200) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 4)
    scale_err = angle_err = refl_err = 0.0
    for _ in range(n):
        a = rng.uniform(0.01, 0.99)
        d = rng.uniform(-2.8, 2.8)
        th2 = rng.uniform(-math.pi, math.pi)
        r1, r2, s1, s2 = rng.uniform(0.2, 5.0, 4)
        base = diffraction_coefficient(a, PolarPoint(r1, th2 + d), PolarPoint(r2, th2))
        moved = diffraction_coefficient(a, PolarPoint(s1, th2 + d), PolarPoint(s2, th2))
        scale_err = max(scale_err, abs(base * math.sqrt(r1 * r2) - moved * math.sqrt(s1 * s2))
                        / abs(base * math.sqrt(r1 * r2)))
        phi = rng.uniform(-math.pi, math.pi)
        rot = diffraction_coefficient(a, PolarPoint(r1, th2 + d + phi), PolarPoint(r2, th2 + phi))
        angle_err = max(angle_err, abs(rot - base) / abs(base))
        flip = diffraction_coefficient(1.0 - a, PolarPoint(r1, th2 + d), PolarPoint(r2, th2))
        refl_err = max(refl_err, abs(abs(flip) - abs(base)) / abs(base))
    tol = {"sqrt_r1r2_invariance": 1e-14, "dtheta_only": 1e-14, "alpha_reflection": 1e-14}
    return _result("4", "scaling laws of the closed-form diffraction coefficient", "diffraction coefficient closed form",
                   {"sqrt_r1r2_invariance": scale_err, "dtheta_only": angle_err, "alpha_reflection": refl_err},
                   tol, None, t0)


# -- 5 ---------------------------------------------------------------------

FREE_WINDOW = FrequencyWindow(30.0, 3.0)
FREE_Q1, FREE_Q2 = PolarPoint(4.0, 0.0), PolarPoint(4.0, 1.0)


def free_field_times() -> np.ndarray:
    """Ten points 4-5.5 window widths before the geometric front and ten between the fronts."""
    w = 1.0 / FREE_WINDOW.lambda_halfwidth
    rho = separation(FREE_Q1, FREE_Q2)
    offs = np.linspace(4.0, 5.5, 10) * w
    return np.concatenate([rho - offs[::-1], rho + offs])


def criterion_5() -> CriterionResult:
    t0 = time.perf_counter()
    a = 1e-6
    rho, R = separation(FREE_Q1, FREE_Q2), FREE_Q1.r + FREE_Q2.r
    guard = 8.0 / FREE_WINDOW.lambda_halfwidth
    ts = free_field_times()
    samples = kernel_values(ts, FREE_Q1, FREE_Q2, a, FREE_WINDOW)
    ref = np.array([windowed_free_kernel_convolved(t, rho, FREE_WINDOW) for t in ts])
    vals = np.array([s.value for s in samples])
    rel = float(np.max(np.abs(vals - ref) / np.abs(ref)))
    return _result("5", "mode sum at alpha = 1e-6 vs windowed free kernel at 20 guarded points",
                   "free-space limit", {"max_rel_err": rel, "guard_minus_separation": guard - abs(R - rho)},
                   {"max_rel_err": 1e-3, "guard_minus_separation": 0.0}, 60.0, t0,
                   {"times": ts.tolist()})


# -- 6 ---------------------------------------------------------------------

def _half_integer_closed(n: int, x: float) -> float:
    """J_{n+1/2}(x) by upward recurrence from the elementary J_{1/2}, J_{-1/2}."""
    c = math.sqrt(2.0 / (math.pi * x))
    jm, j = c * math.cos(x), c * math.sin(x)
    for k in range(n):
        jm, j = j, (2.0 * (k + 0.5) / x) * j - jm
    return j


def _asym_exact(nu: Fraction, k: int) -> Fraction:
    num = Fraction(1)
    for j in range(1, k + 1):
        num *= 4 * nu * nu - (2 * j - 1) ** 2
    return num / (math.factorial(k) * 8 ** k)


def criterion_6() -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 6)
    nus = rng.uniform(0.0, 20.0, 200)
    xs = rng.uniform(1e-9, 100.0, 200)
    j_abs = j_rel = 0.0
    for nu, x in zip(nus, xs):
        ref, ref_err = bessel_j_quad(float(nu), float(x), full_output=True)
        diff = abs(bessel_j(float(nu), float(x)) - ref)
        j_abs = max(j_abs, diff)
        # relative error only where the oracle's own bound is below a tenth of the tolerance
        if ref_err <= 1e-11 * abs(ref):
            j_rel = max(j_rel, diff / abs(ref))
    h_err = 0.0
    for n in range(4):
        for x in (0.5, 1.0, 3.0, 7.5, 12.0, 40.0):
            if x < 2 * n:
                continue
            ref = _half_integer_closed(n, x)
            h_err = max(h_err, abs(bessel_j(n + 0.5, x) - ref) / max(abs(ref), 1e-3))
    a_err = 0.0
    for nu in (Fraction(0), Fraction(1, 3), Fraction(7, 4), Fraction(5, 2), Fraction(19, 2)):
        for k in range(12):
            exact = _asym_exact(nu, k)
            got = asym_coeff(float(nu), k)
            a_err = max(a_err, abs(Fraction(got) - exact) / max(abs(exact), Fraction(1, 10 ** 30)))
    k_err = 0.0
    beta = DeficiencyFrequency("+").beta
    for nu in (0.1, 0.3, 0.7, 0.9):
        for z in (1e-4, 1e-3, 1e-2, 0.1):
            ref = bessel_k_quad(nu, beta * z)
            k_err = max(k_err, abs(bessel_k(nu, beta * z) - ref) / abs(ref))
    l2_ok = True
    for a in (0.1, 0.3, 0.5, 0.7, 0.9):
        for k in (-3, -2, -1, 0, 1, 2):
            cls = classify_l2(a, k)
            l2_ok &= cls.integrable == (k in (0, -1))
    measured = {"bessel_j_abs": j_abs, "bessel_j_rel": j_rel, "half_integer_rel": h_err, "asym_coeff_rel": float(a_err),
                "bessel_k_small_z_rel": k_err, "l2_classification": bool(l2_ok)}
    tol = {"bessel_j_abs": 1e-10, "bessel_j_rel": 1e-10, "half_integer_rel": 1e-12, "asym_coeff_rel": 1e-15,
           "bessel_k_small_z_rel": 1e-10, "l2_classification": True}
    checks = [measured[k] <= tol[k] for k in ("bessel_j_abs", "bessel_j_rel", "half_integer_rel", "asym_coeff_rel",
                                               "bessel_k_small_z_rel")] + [l2_ok]
    return _result("6", "special-function accuracy and L2 classification of deficiency modes",
                   "deficiency modes and symbol coefficients", measured, tol, None, t0, checks=checks)


# -- 7 ---------------------------------------------------------------------

SYM_WINDOW = FrequencyWindow(9.0, 1.5)


def criterion_7(n: int = 100) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 7)
    herm = gauge = refl = 0.0
    for _ in range(n):
        a = rng.uniform(0.05, 0.95)
        r1, r2 = rng.uniform(0.5, 2.0, 2)
        th1, th2 = rng.uniform(-math.pi, math.pi, 2)
        t = rng.uniform(0.3, 5.0)
        q1, q2 = PolarPoint(r1, th1), PolarPoint(r2, th2)
        modes = mode_truncation_bound(SYM_WINDOW, r1, r2, 1e-14)
        K = modes.k_max + 2
        e12 = kernel_values([t], q1, q2, a, SYM_WINDOW, modes)[0].value
        e21 = kernel_values([t], q2, q1, a, SYM_WINDOW, modes)[0].value
        scale = max(abs(e12), 1e-3)
        herm = max(herm, abs(e12 - e21.conjugate()) / scale)
        d = float(q1.theta - q2.theta)
        shifted = kernel_from_modes([t], r1, r2, d, a + 1.0, -K - 1, K - 1, SYM_WINDOW)[0]
        gauge = max(gauge, abs(shifted - np.exp(-1j * d) * e12) / scale)
        neg = kernel_from_modes([t], r1, r2, d, -a, -K, K, SYM_WINDOW)[0]
        e_m = kernel_values([t], q2, q1, a, SYM_WINDOW, modes)[0].value
        refl = max(refl, abs(neg - e_m) / scale)
    return _result("7", "Hermitian, gauge-shift and flux-reflection identities on random windowed queries",
                   "mode-sum kernel", {"hermitian": herm, "gauge_shift": gauge, "flux_reflection": refl},
                   {"hermitian": 1e-10, "gauge_shift": 1e-10, "flux_reflection": 1e-10}, None, t0, {"queries": n})


# -- 8 ---------------------------------------------------------------------

UPSILON_WINDOW = FrequencyWindow(30.0, 5.0)
UPSILON_BAND = (20.0, 40.0)


def criterion_8() -> CriterionResult:
    t0 = time.perf_counter()
    worst, rows = 0.0, []
    for a in (0.3, 0.5):
        for d in (math.pi / 6, math.pi / 3):
            q1, q2 = _pair(d)
            grid = TimeGrid.for_window(q1.r + q2.r, 1.2, UPSILON_WINDOW)
            vals = upsilon0_duhamel_values(grid.times, q1, q2, a, UPSILON_WINDOW)
            est = extract_conormal_amplitude(vals, grid, UPSILON_WINDOW, UPSILON_BAND, order=0, window_power=2)
            theory = upsilon0_principal(q1, q2, a)
            rel = abs(abs(est.a0) - abs(theory)) / abs(theory)
            worst = max(worst, rel)
            rows.append({"alpha": a, "dtheta": d, "rel_mag_err": rel,
                         "phase_err": math.atan2((est.a0 / theory).imag, (est.a0 / theory).real),
                         "residual": est.residual})
    return _result("8", "lam^0 amplitude of the Duhamel composition vs its principal symbol",
                   "stationary-phase principal symbol", {"max_rel_mag_err": worst}, {"max_rel_mag_err": 0.15},
                   600.0, t0, {"configs": rows})


# -- 9 ---------------------------------------------------------------------

def criterion_9(n: int = 50) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 9)
    rho = CutoffProfile()
    worst = 0.0
    for _ in range(n):
        a = rng.uniform(0.05, 0.95)
        c0, cm = rng.normal(size=2) + 1j * rng.normal(size=2)
        co = rng.normal(size=6) + 1j * rng.normal(size=6)

        def u(r, th, a=a, c0=c0, cm=cm, co=co):
            x, y = r * np.cos(th), r * np.sin(th)
            smooth = co[0] + co[1] * x + co[2] * y + co[3] * x * x + co[4] * x * y + co[5] * np.exp(x) * np.cos(y)
            return c0 * r ** a * rho(r) + cm * r ** (1 - a) * np.exp(-1j * th) * rho(r) + r ** 2 * smooth

        bc = boundary_coefficients(u, a)
        worst = max(worst, abs(bc.c0 - c0), abs(bc.c_minus1 - cm))
    orders = []
    for sign in ("+", "-"):
        f = DeficiencyFrequency(sign)
        for k in (0, -1):
            sol = deficiency_solution(0.3, f, k)
            res = [abs(ode_residual(0.3, k, f.beta, sol, 1.0, h)) for h in (4e-2, 2e-2, 1e-2)]
            orders += [math.log2(res[0] / res[1]), math.log2(res[1] / res[2])]
    order_dev = max(abs(o - 2.0) for o in orders)
    return _result("9", "boundary functionals recover planted coefficients; deficiency ODE residual is second order",
                   "boundary functionals", {"max_coeff_err": worst, "fd_order_deviation": order_dev},
                   {"max_coeff_err": 1e-8, "fd_order_deviation": 0.2}, None, t0,
                   {"observed_orders": orders})


# -- 10 --------------------------------------------------------------------

GEO_WINDOW = FrequencyWindow(30.0, 5.0)


def criterion_10() -> CriterionResult:
    t0 = time.perf_counter()
    mag = phase = 0.0
    rows = []
    for a in (0.3, 0.7):
        for d in (0.5, 1.0):
            q1, q2 = _pair(d, 2.0, 2.0)
            rep = geometric_front_check(a, q1, q2, GEO_WINDOW)
            mag, phase = max(mag, rep.magnitude_rel_err), max(phase, rep.phase_err)
            rows.append({"alpha": a, "dtheta": d, "magnitude_rel_err": rep.magnitude_rel_err,
                         "phase_shift": rep.phase_shift, "expected": rep.expected_phase_shift})
    return _result("10", "geometric front: free amplitude times the unimodular gauge factor",
                   "conjugation identity", {"magnitude_rel_err": mag, "phase_err": phase},
                   {"magnitude_rel_err": 0.05, "phase_err": 0.05}, None, t0, {"configs": rows})


CRITERIA = {"1": criterion_1, "2": criterion_2, "3": criterion_3, "4": criterion_4, "5": criterion_5,
            "6": criterion_6, "7": criterion_7, "8": criterion_8, "9": criterion_9, "10": criterion_10,
            "S1": supplementary_abel_limit, "S3": supplementary_probe_kernel}
SUITES = {"fast": ("1", "4", "5", "6"),
          "full": ("1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "S1", "S3")}


def run_suite(name: str = "fast") -> list:
    """Run every check in a suite, in order."""
    return [CRITERIA[cid]() for cid in SUITES[name]]


def suite_summary(results: list, include_timing: bool = False) -> dict:
    return {"suite_pass": all(r.passed for r in results),
            "criteria": [r.to_json_dict(include_timing) for r in results]}
