import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from asymptoscope import transform as T
from asymptoscope import tauberian as TB
from asymptoscope.errors import ValidationError
from asymptoscope.kernels import get_kernel

WEIERSTRASS_ALPHA = -math.log(0.6) / math.log(2)
H2 = get_kernel("hermite:2")
GAUSS = get_kernel("gaussian")
LIZ = get_kernel("lizorkin_exp")

# (label, distribution, x0, degree at x0, kernel) for the profile-form agreement check
PROFILE_CORPUS = [
    ("heaviside", T.heaviside(), 0.0, 0.0, H2),
    ("abs_half", T.homogeneous(0.5), 0.0, 0.5, H2),
    ("abs_minus_half", T.homogeneous(-0.5), 0.0, -0.5, H2),
    ("dirac", T.dirac(), 0.0, -1.0, H2),
    ("abs_1.7", T.homogeneous(1.7), 0.0, 1.7, H2),
    ("weierstrass", T.weierstrass(0.6), 0.3, WEIERSTRASS_ALPHA, LIZ),
    ("cosine", T.cosine(1.0), 0.0, 0.0, GAUSS),
    ("constant", T.constant(1.0), 0.0, 0.0, GAUSS),
    ("riemann_r1", T.r_beta(0, 1).plus_constant(0.5), 0.0, 3.0, GAUSS),
    ("exponential", T.exponential(2.0), 0.5, 0.0, GAUSS),
]


def test_angle_count_floor():
    with pytest.raises(ValidationError):
        TB.half_circle_angles(16)
    th = TB.half_circle_angles(32)
    assert np.all((th > 0) & (th < math.pi))


@pytest.mark.parametrize("alpha", [-0.5, 0.5, 1.7])
def test_profile_scale_equivariance(alpha):
    eps = np.geomspace(1e-3, 1.0, 7)
    profs = TB.tauberian_profiles(T.homogeneous(alpha, 1.0, 0.3), H2, 0.0, range(4), eps=eps, n_angles=32)
    for k, p in profs.items():
        assert np.allclose(p.S, eps ** alpha * p.S[-1], rtol=1e-10, atol=0), k


def test_dirac_profile():
    eps = np.geomspace(1e-4, 1.0, 9)
    p = TB.tauberian_profile(T.dirac(), H2, 0.0, 0, eps=eps, n_angles=64)
    assert np.allclose(p.S, p.S[-1] / eps, rtol=1e-12)


@given(x0=st.floats(-1, 1), a=st.sampled_from([0.5, 0.6, 0.8]))
def test_k_monotonicity(x0, a):
    eps = np.geomspace(1e-3, 1.0, 6)
    profs = TB.tauberian_profiles(T.weierstrass(a), LIZ, x0, range(5), eps=eps, n_angles=32)
    for k in range(1, 5):
        assert np.all(profs[k].S <= profs[k - 1].S)


def test_riemann_r1_profile_decays_faster_than_eps5():
    eps = np.geomspace(1e-3, 1e-1, 12)
    p = TB.tauberian_profile(T.r_beta(0, 1).plus_constant(0.5), GAUSS, 0.0, 4, eps=eps, n_angles=64)
    ratio = p.S / eps ** 5
    assert np.all(np.isfinite(ratio))
    # no growth towards eps -> 0: the small-eps decade stays below the large-eps one
    assert ratio[eps <= 1e-2].max() <= ratio[eps > 1e-2].max()
    assert ratio[0] <= 1e-3 * ratio.max()


@pytest.mark.parametrize("item", PROFILE_CORPUS, ids=[c[0] for c in PROFILE_CORPUS])
def test_profile_forms_agree(item):
    _, f, x0, alpha, kernel = item
    for a in (alpha, alpha + 0.5):
        k_half, k_bdry = TB.first_bounded_k(f, kernel, x0, a)
        assert (k_half is None) == (k_bdry is None)
    # the true degree is always attained
    assert TB.first_bounded_k(f, kernel, x0, alpha)[0] is not None


@pytest.mark.parametrize("alpha", [-0.5, 0.3, 1.7])
@pytest.mark.parametrize("gamma", [0, 1])
def test_exponent_consistency_table(alpha, gamma):
    factor = (lambda s: 1 + np.abs(np.log(s))) if gamma else None
    f = T.homogeneous(alpha, factor=factor)
    rep = TB.estimate_weak_exponent(f, H2, 0.0, eps=np.geomspace(1e-4, 0.05, 24), n_angles=32, k_max=1)
    assert rep.alpha == pytest.approx(alpha, abs=0.03)
    if gamma:
        assert rep.L_model.family == "log"
        assert rep.L_model.gamma == pytest.approx(1.0, abs=0.1)
    else:
        assert rep.L_model.family == "constant"


def test_fit_scaling_recovers_power():
    eps = np.geomspace(1e-4, 0.05, 30)
    fit = TB.fit_scaling(eps, 3.0 * eps ** 0.8)
    assert fit.alpha == pytest.approx(0.8, abs=1e-10)
    assert fit.model.family == "constant"
    assert np.allclose(fit.predict(eps), 3.0 * eps ** 0.8, rtol=1e-8)


@given(alpha=st.floats(-1.0, 3.0), c=st.floats(0.1, 10.0))
def test_fit_scaling_power_property(alpha, c):
    eps = np.geomspace(1e-4, 0.05, 20)
    fit = TB.fit_scaling(eps, c * eps ** alpha)
    assert fit.alpha == pytest.approx(alpha, abs=1e-8)


def test_weak_exponent_half_power():
    rep = TB.estimate_weak_exponent(T.homogeneous(0.5), H2, 0.0)
    assert rep.alpha == pytest.approx(0.5, abs=1e-3)
    assert rep.L_model.family == "constant"
    json.dumps(rep.to_dict())


def test_weak_exponent_weierstrass():
    rep = TB.estimate_weak_exponent(T.weierstrass(0.6), LIZ, 0.3)
    assert rep.alpha == pytest.approx(0.737, abs=0.05)


def test_holder_half_power_is_cusp():
    rep = TB.holder_exponent(T.homogeneous(0.5), H2, 0.0)
    assert rep.holder_alpha == pytest.approx(0.5, abs=1e-3)
    assert rep.classification == "cusp"


@pytest.mark.parametrize("name", ["lizorkin_exp", "hermite:3"])
def test_weierstrass_classification_kernel_independent(name):
    rep = TB.holder_exponent(T.weierstrass(0.6), get_kernel(name), 0.3)
    assert rep.classification == "cusp"
    assert rep.holder_alpha == pytest.approx(WEIERSTRASS_ALPHA, abs=0.05)


@pytest.mark.parametrize("name", ["lizorkin_exp", "hermite:4"])
def test_riemann_classification_kernel_independent(name):
    rep = TB.holder_exponent(T.riemann_w(), get_kernel(name), 1 / 3, s_min=1e-4)
    assert rep.classification == "oscillating"
    assert rep.holder_alpha == pytest.approx(1.5, abs=0.1)
    assert rep.alpha >= rep.holder_alpha + 1


def test_angular_limit_homogeneous_is_exact():
    f = T.homogeneous(0.5)
    lim = TB.angular_limit(f, H2, 0.0, 0.5)
    ref = T.evaluate(f, H2, np.cos(lim.theta), np.sin(lim.theta))[:, 0]
    assert np.max(np.abs(lim.limits - ref)) < 1e-12
    assert not lim.divergent.any()
    assert lim.defect < 1e-12


def test_angular_limit_riemann_at_zero():
    lim = TB.angular_limit(T.r_beta(0), GAUSS, 0.0, -0.5)
    top = int(np.argmin(np.abs(lim.theta - math.pi / 2)))
    assert lim.theta[top] == pytest.approx(math.pi / 2)
    assert abs(lim.limits[top]) == pytest.approx(special.gamma(0.25) / (4 * math.sqrt(math.pi)), abs=1e-4)
    assert not lim.divergent.any()


def test_angular_limit_flags_oscillating_phase():
    # |t|^(5i) is homogeneous of imaginary degree: M(hx, hy) carries h^(5i), which has no limit
    f = T.homogeneous(0.0, factor=lambda s: np.exp(5j * np.log(s)))
    assert TB.angular_limit(f, H2, 0.0, 0.0).divergent.all()


def test_class_estimate_constant():
    rep = TB.class_estimate_fit(T.constant(1.0), GAUSS, "global", nx=51, ny=21)
    assert (rep.k, rep.l) == (0, 0)
    assert rep.C == pytest.approx(1.0, abs=1e-12)
    assert rep.passed and rep.max_violation <= 0


def test_class_estimate_dirac():
    rep = TB.class_estimate_fit(T.dirac(), H2, "global", X=20.0, nx=101, ny=31)
    assert (rep.k, rep.l) == (1, 0)
    t = np.linspace(-10, 10, 200001)
    assert rep.C == pytest.approx(np.max(np.abs(H2.time(t))), rel=2e-3)


def test_class_estimate_band_limited_comb_is_trivial_locally():
    # frequencies inside |w| < 1 never reach the support |u| > 1 of the wavelet at scales y < 1
    w = np.linspace(-0.95, 0.95, 9)
    f = T.AtomicSpectrum(w, np.ones(w.size))
    rep = TB.class_estimate_fit(f, get_kernel("shifted_lizorkin:1"), "local", nx=51, ny=21)
    assert rep.passed and (rep.k, rep.l) == (0, 0)
    assert rep.C == 0.0


def test_global_holder_weierstrass_passes():
    rep = TB.global_holder_check(T.weierstrass(0.6), LIZ, 0.737)
    assert rep.passed
    assert math.isfinite(rep.C)


def test_global_holder_heaviside_fails_at_jump():
    rep = TB.global_holder_check(T.heaviside(), H2, 0.5)
    assert not rep.passed
    assert abs(rep.worst_point[0]) < 1e-3


def test_global_holder_sine_passes():
    sine = T.AtomicSpectrum([1.0, -1.0], [math.pi / 1j, -math.pi / 1j])
    assert TB.global_holder_check(sine, get_kernel("hermite:3"), 2.5, y0=0.1).passed


def test_stabilization_heaviside():
    rep = TB.stabilization_check(T.heaviside(), 2)
    assert rep.stabilizes
    assert rep.alpha == 0.0 and rep.T_power == 0.0
    assert rep.ell[0] == pytest.approx(0.5, abs=1e-6)
    # off the origin U(x, t) - 1/2 decays like x / sqrt(t), so the node spread is larger
    off = TB.stabilization_check(T.heaviside(), 2, x=[1.0, -3.0], tol=1e-4)
    assert off.stabilizes
    assert np.allclose(off.ell, 0.5, atol=1e-4)


def test_stabilization_constant():
    rep = TB.stabilization_check(T.constant(1.0), 2, x=[-2.0, 0.0, 5.0])
    assert rep.stabilizes
    assert np.allclose(rep.ell, 1.0, atol=1e-12)


def test_stabilization_half_power():
    oracle, _ = integrate.quad(lambda s: abs(s) ** 0.5 * math.exp(-s * s / 4) / (2 * math.sqrt(math.pi)),
                               -np.inf, np.inf)
    assert oracle == pytest.approx(math.sqrt(2) * special.gamma(0.75) / math.sqrt(math.pi), rel=1e-9)
    rep = TB.stabilization_check(T.homogeneous(0.5), 2, x=[0.0, 1.0])
    assert rep.stabilizes
    assert rep.T_power == pytest.approx(0.25, abs=1e-12)
    assert rep.ell[0] == pytest.approx(oracle, abs=1e-4)
    assert rep.ell[0].real == pytest.approx(0.97774, abs=1e-4)
