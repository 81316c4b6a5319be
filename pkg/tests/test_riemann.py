import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from asymptoscope import riemann as R
from asymptoscope.errors import ValidationError
from asymptoscope.kernels import get_kernel

GAUSS = get_kernel("gaussian")


def reduced_rationals(qmax: int):
    for q in range(1, qmax + 1):
        for p in range(-2 * q, 2 * q + 1):
            if math.gcd(p, q) == 1:
                yield p, q


def test_classification_examples():
    assert R.classify_rational(1, 3).parity_class == "S1"
    assert R.classify_rational(1, 2).parity_class == "S0"
    r = R.classify_rational(4, 6)
    assert (r.p, r.q, r.parity_class) == (2, 3, "S0")
    assert R.classify_rational(0, 5).value == 0


@given(p=st.integers(-200, 200), q=st.integers(1, 50))
def test_theta_word_reproduces_rational(p, q):
    r = R.classify_rational(p, q)
    assert r.theta_word.apply(r.base) == Fraction(p, q)
    assert list(r.denominators) == sorted(set(r.denominators), reverse=True)
    both_odd = r.p % 2 == 1 and r.q % 2 == 1
    assert r.parity_class == ("S1" if both_odd else "S0")


def test_random_rationals_orbit(rng):
    for _ in range(200):
        q = int(rng.integers(1, 51))
        p = int(rng.integers(-5 * q, 5 * q + 1))
        r = R.classify_rational(p, q)
        assert r.theta_word.apply(r.base) == Fraction(p, q)


def test_theta_word_rejects_unknown_letter():
    with pytest.raises(ValidationError):
        R.ThetaWord(("K3",))


def test_p_constant_examples():
    assert R.p_constant(0).value == 1
    assert R.p_constant(Fraction(1, 2)).value == pytest.approx((1 + 1j) / 2, abs=1e-15)
    assert R.p_constant(Fraction(3, 2)).value == pytest.approx((1 - 1j) / 2, abs=1e-15)
    s1 = R.p_constant(Fraction(1, 3))
    assert not s1.defined and s1.value == 0


def test_gauss_mean_examples():
    assert R.gauss_mean(0) == 1
    assert R.gauss_mean(Fraction(1, 3)) == 0
    assert R.gauss_mean(Fraction(1, 2)) == pytest.approx((1 + 1j) / 2, abs=1e-15)


def test_gauss_mean_is_long_run_average():
    n = np.arange(1, 600_001)
    for r in (Fraction(1, 2), Fraction(2, 5), Fraction(3, 4)):
        ph = np.exp(1j * math.pi * ((r.numerator * n * n) % (2 * r.denominator)) / r.denominator)
        assert ph.mean() == pytest.approx(R.gauss_mean(r), abs=1e-5)


def test_folding_matches_gauss_mean_up_to_q20():
    for p, q in reduced_rationals(20):
        r = R.classify_rational(p, q)
        if r.parity_class == "S0":
            assert R.p_constant(r).mismatch <= 1e-10
        else:
            assert R.gauss_mean(r) == 0


def test_transformation_law_on_orbit_pairs():
    count = 0
    for p, q in reduced_rationals(9):
        r = Fraction(p, q)
        if r == 0 or R.classify_rational(p, q).parity_class != "S0":
            continue
        lhs = R.gauss_mean(-1 / r)
        rhs = cmath.sqrt(-1j / float(r)) * R.gauss_mean(r)
        assert abs(lhs - rhs) < 1e-12
        count += 1
        if count == 20:
            break
    assert count == 20


def test_gamma_constant_euler():
    g = R.gamma_constant(0)
    assert g.value == pytest.approx(0.5772156649015329, abs=1e-9)
    assert R.gamma_constant(2).value == pytest.approx(g.value, abs=1e-12)


def test_gamma_constant_half_series_self_consistency():
    g = R.gamma_constant(Fraction(1, 2))
    assert abs(g.value - g.closed_form) < 1e-6
    # direct partial sums at two sizes agree with the extrapolated value
    a = R.period_coefficients(R.classify_rational(1, 2))
    pr = a.mean()
    for N in (4_000_000, 8_000_000):
        n = np.arange(1, N + 1, dtype=float)
        s = np.sum(a[np.arange(N) % a.size] / n) - pr * math.log(N)
        assert abs(s - g.value) < 1e-6


def test_gamma_rejects_s1():
    with pytest.raises(ValidationError):
        R.gamma_constant(Fraction(1, 3))


def test_zeta_at_two_for_r0():
    assert R.zeta_r(0, 2).value == pytest.approx(math.pi ** 2 / 6, abs=1e-9)


@pytest.mark.parametrize("r", [Fraction(1, 2), Fraction(1, 3), Fraction(3, 2), Fraction(2, 5), Fraction(0)])
def test_trivial_values_via_cesaro(r):
    assert R.zeta_r(r, 0, "cesaro").value == pytest.approx(-0.5, abs=1e-3)
    assert abs(R.zeta_r(r, -2, "cesaro").value) < 1e-3


def test_zeta_third_at_two_against_direct_sum():
    n = np.arange(1, 1_000_001, dtype=float)
    ph = np.exp(1j * math.pi * ((n.astype(np.int64) ** 2) % 6) / 3)
    direct = np.sum((ph / n ** 2)[::-1])
    assert R.zeta_r(Fraction(1, 3), 2).value == pytest.approx(direct, abs=1e-6)


@pytest.mark.parametrize("z", [1.1, 1.5, 2 + 1j, 3.0])
@pytest.mark.parametrize("r", [Fraction(1, 3), Fraction(1, 2)])
def test_cesaro_agrees_with_direct(r, z):
    a = R.zeta_r(r, z, "direct").value
    b = R.zeta_r(r, z, "cesaro").value
    assert abs(a - b) < 1e-6


def test_hurwitz_agrees_with_cesaro_in_the_strip():
    for z in (0.5, -0.5 + 2j, -1.5):
        a = R.zeta_r(Fraction(2, 5), z, "hurwitz").value
        b = R.zeta_r(Fraction(2, 5), z, "cesaro").value
        assert abs(a - b) < 1e-5


def test_zeta_method_region_checks():
    with pytest.raises(ValidationError):
        R.zeta_r(Fraction(1, 3), 0.5, "direct")
    with pytest.raises(ValidationError):
        R.zeta_r(Fraction(1, 2), 1.0, "cesaro")
    with pytest.raises(ValidationError):
        R.zeta_r(Fraction(1, 2), -6.0, "cesaro")


def test_pole_subtracted_at_one_is_gamma():
    ev = R.zeta_r(Fraction(1, 2), 1.0, "pole-subtracted")
    assert ev.value == pytest.approx(R.gamma_constant(Fraction(1, 2)).value, abs=1e-9)


def test_weak_expansion_examples():
    e = R.weak_expansion(1, 0.3, 2)
    assert e.taylor[0] == pytest.approx(R.zeta_r(1, 0.6, "hurwitz").value, abs=1e-12)
    e0 = R.weak_expansion(0, 0, 1)
    assert e0.singular_coefficient == pytest.approx(cmath.sqrt(1j) / 2, abs=1e-12)
    assert e0.taylor[0] == pytest.approx(-0.5, abs=1e-12)
    assert R.weak_expansion(Fraction(1, 3), 0.2, 2).singular_coefficient == 0


def test_weak_expansion_log_case():
    e = R.weak_expansion(Fraction(1, 2), 0.5, 2)
    assert e.log_coefficient == pytest.approx(-e.p_r / 2)
    assert e.gamma_r is not None
    assert set(e.constant_groupings) >= {"gamma_r"}


def test_weak_expansion_gamma_pole():
    with pytest.raises(ValidationError):
        R.weak_expansion(Fraction(1, 2), 1.5, 2)


def test_verify_expansion_r1():
    rep = R.verify_expansion(1, 0, GAUSS, np.geomspace(1e-3, 1e-1, 9))
    assert rep.slope >= 6 and rep.passed


def test_verify_expansion_r0():
    rep = R.verify_expansion(0, 0, GAUSS, np.geomspace(1e-3, 1e-1, 9), predicted=5)
    assert rep.slope >= 5 and rep.passed


def test_taylor_check_riemann_third():
    for coeff, smoothed in R.taylor_check(Fraction(1, 3), 1, 3):
        assert abs(coeff - smoothed) < 1e-4


def test_cyclotomic_polynomials():
    assert R.cyclotomic_poly(1) == (-1, 1)
    assert R.cyclotomic_poly(8) == (1, 0, 0, 0, 1)
    assert R.cyclotomic_poly(12) == (1, 0, -1, 0, 1)
    # 1 + zeta + zeta^2 = 0 for a primitive cube root; 1 + zeta = 0 only for n = 2
    assert R.cyclotomic_is_zero([1, 1, 1], 3)
    assert R.cyclotomic_is_zero([1, 1], 2)
    assert not R.cyclotomic_is_zero([1, 1], 6)


def test_branch_consistency_is_exact_up_to_q20():
    for p, q in reduced_rationals(20):
        assert R.branch_consistent(R.classify_rational(p, q))


@pytest.mark.parametrize("p,q", [(1, 2), (3, 4), (2, 5), (7, 10)])
def test_exact_check_rejects_perturbed_folds(p, q):
    r = R.classify_rational(p, q)
    k, m = R.folded_phase(r)
    assert R.gauss_matches(r, k, m)
    assert cmath.isclose(cmath.exp(1j * math.pi * k / 4) * math.sqrt(m), R.gauss_mean(r), abs_tol=1e-12)
    assert not any(R.gauss_matches(r, k + j, m) for j in range(1, 8))
    assert not R.gauss_matches(r, k, 2 * m)
