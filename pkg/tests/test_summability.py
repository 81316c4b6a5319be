import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from asymptoscope import summability as SM
from asymptoscope import transform as T
from asymptoscope.errors import ValidationError
from asymptoscope.kernels import get_kernel

CS = SM.CoefficientSeries

# convergent series whose (rho)-sums are analytic at y = 0, with their sums
REGULARITY_CORPUS = [
    ("half", CS(lambda n: 0.5 ** n), 2.0),
    ("minus_half", CS(lambda n: (-0.5) ** n), 2 / 3),
    ("alt_harmonic", CS(lambda n: (-1.0) ** (n + 1) / n, 1), math.log(2)),
    ("leibniz", CS(lambda n: (-1.0) ** n / (2 * n + 1)), math.pi / 4),
    ("alt_squares", CS(lambda n: (-1.0) ** n / (n + 1) ** 2), math.pi ** 2 / 12),
    ("exp", CS(lambda n: 1 / special.factorial(n)), math.e),
    ("exp_minus", CS(lambda n: (-1.0) ** n / special.factorial(n)), 1 / math.e),
    ("log_ratio", CS(lambda n: 0.9 ** n / (n + 1)), 10 * math.log(10) / 9),
    ("alt_cubes", CS(lambda n: (-1.0) ** (n + 1) / n ** 3, 1), 0.75 * special.zeta(3)),
    ("weighted_half", CS(lambda n: n * 0.5 ** n), 2.0),
]


@pytest.mark.parametrize("kernel", [SM.abel(), SM.lambert()], ids=["abel", "lambert"])
def test_kernel_invariants(kernel):
    assert kernel(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-12)
    u = np.array([10.0, 100.0])
    assert np.all(np.abs(kernel(u)) <= (1 + u) ** -3)


def test_lambert_small_argument_branch_is_continuous():
    lam = SM.lambert()
    u = np.array([1e-4 * (1 - 1e-9), 1e-4 * (1 + 1e-9)])
    a, b = lam(u)
    assert abs(a - b) < 1e-12
    assert lam(np.array([1e-8]))[0] == pytest.approx(1 - 5e-9, abs=1e-15)


def test_rho_sum_geometric():
    y = 0.3
    got = SM.rho_sum(CS(lambda n: 0.5 ** n), SM.abel(), y)
    assert got == pytest.approx(1 / (1 - 0.5 * math.exp(-y)), rel=1e-14)


@given(y=st.floats(0.01, 3.0))
def test_rho_sum_alternating_harmonic_closed_form(y):
    got = SM.rho_sum(SM.series("alt-harmonic"), SM.abel(), y)
    assert got == pytest.approx(math.log1p(math.exp(-y)), abs=1e-12)


def test_rho_sum_lambert_of_ones():
    y = 0.01
    got = SM.rho_sum(SM.series("ones"), SM.lambert(), y).real
    assert got == pytest.approx(math.pi ** 2 / (6 * y), rel=1e-2)


def test_rho_sum_rejects_bad_arguments():
    with pytest.raises(ValidationError):
        SM.rho_sum(SM.series("ones"), SM.abel(), 0.0)
    with pytest.raises(ValidationError):
        SM.rho_sum(CS(lambda n: n ** 60.0, q=60.0), SM.abel(), 0.1)


def test_abel_limit_examples():
    assert SM.abel_limit(SM.series("alt-harmonic")).beta == pytest.approx(0.6931472, abs=1e-7)
    assert SM.abel_limit(SM.series("grandi")).beta == pytest.approx(0.5, abs=1e-9)
    assert not SM.abel_limit(SM.series("ones")).converged


def test_cesaro_mean_examples():
    s = SM.series("grandi").partial_sums(4001)
    assert np.array_equal(SM.cesaro_mean(s, 0), s)
    assert SM.cesaro_mean(s, 1)[-1] == pytest.approx(0.5, abs=1e-3)
    assert SM.cesaro_limit(SM.series("alt-linear"), 2).beta == pytest.approx(-0.25, abs=1e-9)
    with pytest.raises(ValidationError):
        SM.cesaro_mean([], 1)
    with pytest.raises(ValidationError):
        SM.cesaro_mean([1.0], 5)


def test_binomial_means_order_one_is_arithmetic_mean():
    s = np.random.default_rng(3).normal(size=50)
    assert np.allclose(SM.cesaro_binomial_mean(s, 1), SM.cesaro_mean(s, 1), atol=1e-14)


@pytest.mark.parametrize("item", REGULARITY_CORPUS, ids=[c[0] for c in REGULARITY_CORPUS])
@pytest.mark.parametrize("kernel", [SM.abel(), SM.lambert()], ids=["abel", "lambert"])
def test_regularity(item, kernel):
    _, coeffs, total = item
    rep = SM.rho_limit(coeffs, kernel, tol=1e-8)
    assert rep.converged
    assert abs(rep.beta - total) < 1e-8


@pytest.mark.parametrize("name", ["grandi", "alt-harmonic", "leibniz", "geometric", "alt-linear"])
def test_cesaro_consistency(name):
    c = SM.series(name)
    reps = [SM.cesaro_limit(c, k) for k in range(1, 5)]
    first = next(i for i, r in enumerate(reps) if r.converged)
    for r in reps[first + 1:]:
        assert r.converged
        assert abs(r.beta - reps[first].beta) < 1e-6


@pytest.mark.parametrize("name", ["grandi", "alt-harmonic", "leibniz", "geometric"])
def test_abel_dominates_cesaro(name):
    c = SM.series(name)
    ces = SM.cesaro_limit(c, 1)
    assert ces.converged
    ab = SM.abel_limit(c)
    assert ab.converged and abs(ab.beta - ces.beta) < 1e-6


def test_littlewood_alternating_harmonic():
    rep = SM.littlewood_check(SM.series("alt-harmonic"), math.log(2))
    assert rep.abel_ok and rep.tauberian_ok and rep.partial_ok
    assert rep.tauberian_constant == pytest.approx(1.0)


def test_littlewood_grandi_fails_tauberian_condition():
    rep = SM.littlewood_check(SM.series("grandi"), 0.5)
    assert rep.abel_ok
    assert not rep.tauberian_ok and not rep.partial_ok
    assert rep.verdict.startswith("no claim")


def test_littlewood_slow_divergence_makes_no_claim():
    rep = SM.littlewood_check(SM.series("loglog"), 0.0)
    assert rep.tauberian_ok
    assert not rep.abel.converged and not rep.partial_ok
    assert rep.verdict == "no claim: not Abel summable"


def test_laplace_profile_heaviside():
    prof = SM.laplace_profile(SM.PowerDensity(0.0), 0.0, kappa=0.0, k=1)
    assert prof.bounded
    assert np.all(prof.S <= 1 + 1e-12)


def test_laplace_profile_dirac():
    prof = SM.laplace_profile(SM.HalfLineAtoms([0.0], [1.0]), -1.0, k=0)
    assert prof.bounded
    assert np.allclose(prof.S, 1.0)


def test_laplace_profile_half_power_density():
    h = SM.PowerDensity(0.5)
    assert SM.laplace_profile(h, 0.5, k=2).bounded
    assert not SM.laplace_profile(h, 0.0, k=2).bounded


def test_power_density_closed_form_against_quadrature():
    z = 0.3 + 0.8j
    re, _ = integrate.quad(lambda u: (u ** 0.5 * np.exp(1j * z * u)).real, 0, np.inf, limit=400)
    im, _ = integrate.quad(lambda u: (u ** 0.5 * np.exp(1j * z * u)).imag, 0, np.inf, limit=400)
    assert SM.PowerDensity(0.5).laplace(z) == pytest.approx(re + 1j * im, abs=1e-8)


def test_laplace_support_violation():
    with pytest.raises(ValidationError):
        SM.HalfLineAtoms([-1.0, 2.0], [1.0, 1.0])
    with pytest.raises(ValidationError):
        SM.laplace_transform(T.AtomicSpectrum([-1.0], [1.0]), [1j])


def test_laplace_is_a_phi_transform():
    h = SM.HalfLineAtoms([0.0, 0.7, 2.5], [1.0, -0.4j, 0.25])
    x = np.array([-1.0, 0.0, 0.4, 2.0])
    sig = np.array([0.05, 0.3, 1.0, 4.0])
    lap = SM.laplace_transform(h, x + 1j * sig)
    phi = T.evaluate(h.as_spectrum(), get_kernel("laplace"), x, sig, "phi")[:, 0]
    assert np.allclose(lap, phi, atol=1e-14)
