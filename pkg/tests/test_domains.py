import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from abdiffract.domains import (BoundaryCoefficients, CutoffProfile, DeficiencyFrequency, RadialModeFunction,
                                boundary_coefficients, boundary_L, classify_l2, commutator_pairing_area,
                                commutator_pairing_contour, deficiency_solution, l2_partial_norm, mode_project,
                                mode_project_samples, ode_residual)
from abdiffract.errors import AliasingError, ConfigError, NonFriedrichsError

RHO = CutoffProfile()
SQ = math.sqrt(2 * math.pi)


def _friedrichs(c0, cm1, a, smooth=0.0):
    def u(r, th):
        return (c0 * r ** a + cm1 * r ** (1 - a) * np.exp(-1j * th)) * RHO(r) + smooth * r ** 2 * np.cos(th) ** 2

    return u


def test_cutoff_profile_shape():
    r = np.linspace(0, 1.5, 301)
    v = RHO(r)
    assert np.all((0 <= v) & (v <= 1))
    assert np.all(v[r <= 0.5] == 1.0) and np.all(v[r >= 1.0] == 0.0)
    assert np.all(np.diff(v) <= 0)
    h = 1e-5
    for x in (0.6, 0.75, 0.9):
        assert RHO.derivative(x) == pytest.approx((RHO(x + h) - RHO(x - h)) / (2 * h), rel=1e-8)
        assert RHO.derivative(x, 2) == pytest.approx(
            (RHO.derivative(x + h) - RHO.derivative(x - h)) / (2 * h), rel=1e-6)
    with pytest.raises(ConfigError):
        CutoffProfile(1.0, 0.5)


def test_deficiency_frequency():
    for s in "+-":
        b = DeficiencyFrequency(s).beta
        assert abs(b ** 4 + 1) < 1e-15
    assert DeficiencyFrequency("+").beta == pytest.approx(np.exp(-1j * math.pi / 4))
    assert DeficiencyFrequency("-").beta == pytest.approx(np.exp(1j * math.pi / 4))


def test_mode_project_orthogonality():
    f = np.array([0.3, 0.7, 1.1])
    for j in (-2, -1, 0, 3):
        m = mode_project(lambda r, th: np.exp(1j * j * th) * r ** 2, j)
        assert np.max(np.abs(m(f) - SQ * f ** 2)) < 1e-14
        other = mode_project(lambda r, th: np.exp(1j * (j + 1) * th) * r ** 2, j)
        assert np.max(np.abs(other(f))) < 1e-14
    radial = mode_project(lambda r, th: np.cos(r) + 0 * th, -1)
    print("radial projected on j=-1:", radial(f))
    assert np.max(np.abs(radial(f))) < 1e-15


def test_mode_project_aliasing():
    with pytest.raises(AliasingError):
        mode_project(lambda r, th: r, 3, n_theta=31)
    with pytest.raises(AliasingError):
        mode_project_samples(np.ones((2, 15)), 1)
    th = 2 * math.pi * np.arange(16) / 16
    assert abs(mode_project_samples(np.exp(-1j * th), -1) - SQ) < 1e-14


@pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
def test_boundary_examples(a):
    L0 = boundary_L(0, mode_project(_friedrichs(1, 0, a), 0), a)
    Lm = boundary_L(-1, mode_project(_friedrichs(0, 1, a), -1), a)
    L0m = boundary_L(0, mode_project(_friedrichs(0, 1, a), 0), a)
    Lsm = boundary_L(0, mode_project(lambda r, th: r ** 2 + 0 * th, 0), a)
    print(a, L0.value, L0.residual, Lm.value, L0m.value, Lsm.value)
    assert abs(L0.value - 1) < 1e-12 and abs(Lm.value - 1) < 1e-12
    assert abs(L0m.value) < 1e-13 and abs(Lsm.value) < 1e-10


def test_boundary_recovers_random_coefficients():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(50):
        a = float(rng.uniform(0.05, 0.95))
        c0, cm1 = rng.normal(size=2) + 1j * rng.normal(size=2)
        got = boundary_coefficients(_friedrichs(c0, cm1, a, smooth=float(rng.normal())), a)
        assert isinstance(got, BoundaryCoefficients)
        worst = max(worst, abs(got.c0 - c0), abs(got.c_minus1 - cm1))
    print("worst coefficient recovery error:", worst)
    assert worst < 1e-8


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_boundary_linearity(a, s, t):
    u = _friedrichs(1.0 + 2j, -0.5, a, smooth=1.0)
    v = _friedrichs(0.3, 1j, a, smooth=-2.0)
    lu = boundary_L(0, mode_project(u, 0), a).value
    lv = boundary_L(0, mode_project(v, 0), a).value
    lw = boundary_L(0, mode_project(lambda r, th: s * u(r, th) + t * v(r, th), 0), a).value
    assert abs(lw - (s * lu + t * lv)) <= 1e-12 * (1 + abs(s * lu) + abs(t * lv))


def test_non_friedrichs_input_detected():
    a = 0.3
    with pytest.raises(NonFriedrichsError):
        boundary_L(0, mode_project(lambda r, th: r ** -a + 0 * th, 0), a)
    with pytest.raises(NonFriedrichsError):
        boundary_L(0, RadialModeFunction(0, lambda r: SQ * r ** (a - 0.2)), a)
    with pytest.raises(ConfigError):
        boundary_L(1, RadialModeFunction(1, lambda r: r), a)


@pytest.mark.parametrize("sign", ["+", "-"])
@pytest.mark.parametrize("k", [0, -1])
def test_deficiency_ode_residual(sign, k):
    a = 0.3
    freq = DeficiencyFrequency(sign)
    u = deficiency_solution(a, freq, k)
    res = [abs(ode_residual(a, k, freq.beta, lambda r: u(r), 1.0, h)) for h in (4e-3, 2e-3, 1e-3)]
    print(sign, k, "residuals:", res)
    assert res[-1] < 1e-5
    assert 3.5 < res[0] / res[1] < 4.5 and 3.5 < res[1] / res[2] < 4.5
    assert abs(u(1.0, 0.7) - u(1.0, 0.0) * np.exp(1j * k * 0.7)) < 1e-15


@pytest.mark.parametrize("k", [0, -1, 2, -3])
def test_power_law_is_exact_homogeneous_solution(k):
    a = 0.4
    nu = abs(k + a)
    res = ode_residual(a, k, 0.0, lambda r: r ** nu, 1.0, 1e-3)
    print(k, "residual of r^nu with beta=0:", res)
    assert abs(res) < 1e-6


@pytest.mark.parametrize("k", [0, -1])
def test_deficiency_modes_square_integrable(k):
    a = 0.3
    vals = [l2_partial_norm(a, DeficiencyFrequency("+"), k, d) for d in (1e-4, 1e-6, 1e-8)]
    print(k, "partial norms:", vals)
    assert vals[2] - vals[1] < vals[1] - vals[0]
    assert vals[2] - vals[1] < 1e-2 * vals[2]


@pytest.mark.parametrize("a", [0.2, 0.3, 0.6])
def test_first_excluded_mode_diverges_like_r_minus_2alpha(a):
    p4 = l2_partial_norm(a, DeficiencyFrequency("+"), 1, 1e-4)
    p5 = l2_partial_norm(a, DeficiencyFrequency("+"), 1, 1e-5)
    growth = math.log10(p5 / p4)
    print(a, "growth per decade", growth, "expected", 2 * a)
    assert abs(growth - 2 * a) < 2e-2


def test_l2_classification():
    for a in (0.1, 0.3, 0.5, 0.9):
        for k in range(-3, 3):
            c = classify_l2(a, k)
            # the I_nu part of K_nu shifts the exponent by O(delta^{2 nu}) at delta = 1e-8
            assert abs(c.exponent - (2 - 2 * c.nu)) < 1e-9 + 10 * 1e-8 ** (2 * c.nu)
            assert c.integrable == (k in (0, -1))


def test_contour_examples():
    v5 = commutator_pairing_contour(0.5)
    v25 = commutator_pairing_contour(0.25)
    print("contour alpha=0.5:", v5, "alpha=0.25:", v25)
    assert abs(v5 - (-math.pi)) < 1e-8
    assert abs(v25 - (-3 * math.pi / 4)) < 1e-8
    for a in (0.1, 0.3, 0.45):
        assert abs(commutator_pairing_contour(a) - commutator_pairing_contour(1 - a)) < 1e-10


def test_contour_epsilon_independence():
    for a in (0.2, 0.5, 0.7):
        vals = [commutator_pairing_contour(a, eps) for eps in (1e-2, 1e-3, 1e-4)]
        spread = max(abs(v - vals[0]) for v in vals)
        print(a, "spread over eps:", spread)
        assert spread < 1e-8


def _radial_oracle(a, rho):
    """Angle-free reduction of the area integrand using analytic cutoff derivatives."""

    def f(r):
        p, d1, d2 = float(rho(r)), float(rho.derivative(r)), float(rho.derivative(r, 2))
        first = (d2 + (2 * a + 1) * d1 / r) * ((1 - a) * p + r * d1 / 2)
        second = (a * p + r * d1 / 2) * (d2 + (3 - 2 * a) * d1 / r)
        return (first + second) * r

    val, _ = integrate.quad(f, rho.r_on, rho.r_off, epsabs=1e-12, epsrel=1e-12)
    return -2 * math.pi * val


@pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 0.8])
def test_area_matches_radial_oracle_and_opposes_contour(a):
    area = commutator_pairing_area(a)
    oracle = _radial_oracle(a, RHO)
    contour = commutator_pairing_contour(a)
    print(a, "area", area.value, "radial oracle", oracle, "contour", contour, "order", area.order)
    assert abs(area.value - oracle) < 1e-6
    assert abs(oracle - 4 * math.pi * a * (1 - a)) < 1e-10
    assert abs(area.value + contour) < 1e-6


def test_area_cutoff_independence():
    a = 0.3
    v1 = commutator_pairing_area(a, CutoffProfile(0.5, 1.0)).value
    v2 = commutator_pairing_area(a, CutoffProfile(0.2, 0.9)).value
    print("two cutoffs:", v1, v2)
    assert abs(v1 - v2) < 1e-6


def test_area_literal_alpha_half():
    v = commutator_pairing_area(0.5).value
    print("area alpha=0.5:", v, "target", -math.pi)
    assert abs(v - (-math.pi)) < 1e-4


def test_area_literal_alpha_tenth():
    v = commutator_pairing_area(0.1).value
    print("area alpha=0.1:", v, "target", -1.13097)
    assert abs(v - (-4 * math.pi * 0.09)) < 1e-4
