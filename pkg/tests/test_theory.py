import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from deltan.errors import DomainError
from deltan.theory import (
    FAMILIES,
    brute_force_power,
    corr_kernel,
    delta_squared_theory,
    gde_power_corrected,
    gde_power_exact,
    gde_power_leading,
    goe_form_factor,
    goe_power,
    ratio_constants,
    reunfolded_moment_identities,
    small_k_asymptote,
    theory_curve,
)


def test_leading_examples():
    assert gde_power_leading(50, 100) == 0.5
    assert gde_power_leading(25, 100) == pytest.approx(1.0, rel=1e-15)
    N = 1000
    assert gde_power_leading(1, N) == pytest.approx(N**2 / (2 * math.pi**2), rel=1e-4)


@pytest.mark.parametrize("k,N", [(0, 10), (10, 10), (-1, 5)])
def test_domain_errors(k, N):
    for f in (gde_power_leading, gde_power_exact, gde_power_corrected, goe_power):
        with pytest.raises(DomainError):
            f(k, N)


def test_exact_examples():
    assert gde_power_exact(1, 2) == pytest.approx(0.5, abs=1e-15)
    assert brute_force_power("plain", 2, 1) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("N", [2, 3, 7, 16, 31, 64])
def test_exact_equals_brute_force(N):
    k = np.arange(1, N)
    np.testing.assert_allclose(gde_power_exact(k, N), brute_force_power("plain", N, k), rtol=1e-9)


def test_exact_converges_to_leading():
    for N in (10**3, 10**4):
        k = np.array([N // 8, N // 4, N // 2])
        rel = np.abs(gde_power_exact(k, N) / gde_power_leading(k, N) - 1)
        assert np.all(rel < 5.0 / N)


def test_exact_series_branch_is_continuous():
    # k = 1 at N = 10^5 crosses the series branch threshold
    N = 10**5
    direct = (1 + 2 * N - math.cos(2 * math.pi) + 0) / (4 * N * math.sin(math.pi / N) ** 2)
    assert gde_power_exact(1, N) == pytest.approx(direct, rel=1e-8)


def test_corrected_examples():
    assert gde_power_corrected(32, 64) == 0.25
    k = np.arange(1, 64)
    np.testing.assert_array_equal(gde_power_leading(k, 64) / gde_power_corrected(k, 64), 2.0)
    bf = brute_force_power("corrected", 64, k)
    assert np.all(np.abs(gde_power_corrected(k, 64, exact=True) / bf - 1) <= 2 / 64)


def test_kernel_examples():
    assert corr_kernel("plain", 7, 7, 10) == 7
    assert corr_kernel("corrected", 10, 10, 10) == 0
    assert corr_kernel("corrected", 50, 50, 100) == pytest.approx(100**2 / (4 * 101))
    with pytest.raises(DomainError):
        corr_kernel("plain", 0, 1, 5)
    with pytest.raises(DomainError):
        corr_kernel("spline", 1, 1, 5)


def test_brute_force_limits():
    assert brute_force_power("corrected", 1, 1) == 0.0
    with pytest.raises(DomainError):
        brute_force_power("plain", 5000, 1)


def test_form_factor_examples():
    assert goe_form_factor(0.0) == 0.0
    lo = 2 - math.log(3)
    assert goe_form_factor(1.0) == pytest.approx(lo, abs=1e-15)
    t = 1.0
    high = 2 - t * math.log((2 * t + 1) / (2 * t - 1))
    assert abs(high - lo) < 1e-12
    assert goe_form_factor(1e6) == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(DomainError):
        goe_form_factor(-0.1)
    t = np.linspace(0, 10, 5001)
    assert np.all(np.diff(goe_form_factor(t)) >= -1e-15)


def test_goe_nyquist_value_high_precision():
    mp.mp.dps = 40
    K = 1 - mp.log(2) / 2
    ref = 2 * (K - 1) / mp.pi**2 + mp.mpf(1) / 4 - mp.mpf(1) / 12
    assert goe_power(500, 1000) == pytest.approx(float(ref), rel=1e-13)
    assert float(ref) == pytest.approx(0.09643, abs=1e-5)


def test_goe_slope_is_one_over_f():
    N = 1000
    k = np.arange(N // 100, N // 10 + 1)
    slope = np.polyfit(np.log10(k), np.log10(goe_power(k, N)), 1)[0]
    assert abs(slope + 1) < 0.1


@given(N=st.integers(4, 5000), data=st.data())
def test_goe_bracket_terms_swap(N, data):
    k = data.draw(st.integers(1, N - 1))
    a = (goe_form_factor(k / N) - 1) / k**2 + (goe_form_factor(1 - k / N) - 1) / (N - k) ** 2
    b = (goe_form_factor((N - k) / N) - 1) / (N - k) ** 2 + (goe_form_factor(1 - (N - k) / N) - 1) / k**2
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)
    assert goe_power(k, N) == pytest.approx(goe_power(N - k, N), rel=1e-9)


def test_small_k_asymptote():
    N = 10**4
    k = np.arange(1, N // 100 + 1)
    assert np.all(np.abs(gde_power_leading(k, N) * 2 * math.pi**2 * k**2 / N**2 - 1) < 1e-3)
    np.testing.assert_allclose(small_k_asymptote(k, N), N**2 / (2 * math.pi**2 * k**2))
    np.testing.assert_allclose(small_k_asymptote(k, N, corrected=True), N**2 / (4 * math.pi**2 * k**2))


def test_moment_identities_closed_form():
    assert reunfolded_moment_identities(1)["second_moment"] == 1.0
    big = reunfolded_moment_identities(10**9)
    assert big["mean"] == 1 and big["second_moment"] == pytest.approx(2) and big["cross_moment"] == pytest.approx(1)
    ten = reunfolded_moment_identities(10)
    assert ten["second_moment"] == pytest.approx(20 / 11) and ten["cross_moment"] == pytest.approx(10 / 11)
    with pytest.raises(DomainError):
        reunfolded_moment_identities(0)


def test_delta_squared_theory():
    N = 1000
    assert delta_squared_theory(N / 2, N, True) == pytest.approx(N**2 / (4 * (N + 1)))
    assert delta_squared_theory(N, N, True) == 0
    assert delta_squared_theory(17, N, False) == 17


def test_ratio_constants():
    c = ratio_constants()
    assert round(c["poisson"], 5) == 0.38629
    assert round(c["goe_surmise"], 5) == 0.53590
    assert c["goe_large_n"] == 0.5307


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_theory_curves_positive(family):
    curve = theory_curve(family, 128)
    assert curve.values.size == 127 and np.all(curve.values > 0)
    if family.startswith("gde"):
        np.testing.assert_allclose(curve.values, curve.values[::-1], rtol=1e-12)


def test_unknown_family():
    with pytest.raises(DomainError):
        theory_curve("gue", 10)
