import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from asymptoscope import transform as T
from asymptoscope.errors import NumericalError, ValidationError
from asymptoscope.kernels import KernelSpec, get_kernel, make_reconstruction_wavelet, moment

THETA_I = math.pi ** 0.25 / special.gamma(0.75)


def theta(z: complex) -> complex:
    """Jacobi theta via the transform of the comb with the Laplace kernel."""
    return complex(T.evaluate(T.theta_comb(), get_kernel("laplace"), [z.real], [z.imag], "phi")[0, 0])


def test_single_atom_closed_form():
    psi = get_kernel("lizorkin_exp")
    w = 1.7
    f = T.exponential(w)
    x = np.array([-0.3, 0.0, 1.1])
    y = np.array([0.2, 0.5, 2.0])
    got = T.evaluate(f, psi, x, y, "wavelet")[:, 0]
    assert np.allclose(got, np.exp(1j * w * x) * np.conj(psi(y * w)), atol=1e-15)


def test_theta_at_i():
    assert theta(1j) == pytest.approx(THETA_I, abs=1e-10)
    direct = 1 + 2 * sum(math.exp(-math.pi * n * n) for n in range(1, 20))
    assert THETA_I == pytest.approx(direct, abs=1e-14)


@pytest.mark.parametrize("z", [0.3 + 0.8j, -0.45 + 1.3j, 0.1 + 0.6j])
def test_theta_modular_law(z):
    lhs = theta(-1 / z)
    rhs = np.sqrt(-1j * z) * theta(z)
    assert abs(lhs - rhs) < 1e-10


def test_theta_period_two():
    z = 0.27 + 0.9j
    assert abs(theta(z + 2) - theta(z)) < 1e-12


def test_homogeneous_ratio():
    f = T.homogeneous(0.5)
    g = get_kernel("gaussian")
    a = T.evaluate(f, g, [0.7], [0.3], "phi")[0, 0]
    b = T.evaluate(f, g, [1.4], [0.6], "phi")[0, 0]
    assert b / a == pytest.approx(math.sqrt(2), rel=1e-10)


@given(lam=st.floats(0.05, 20.0), x=st.floats(-3, 3), y=st.floats(0.05, 3.0),
       alpha=st.sampled_from([-0.5, 0.0, 0.3, 1.7]))
def test_dilation_covariance(lam, x, y, alpha):
    f = T.homogeneous(alpha, 1.0, 0.4)
    k = get_kernel("hermite:2")
    a = T.evaluate(f, k, [x], [y], "wavelet")[0, 0]
    b = T.evaluate(f, k, [lam * x], [lam * y], "wavelet")[0, 0]
    assert abs(b - lam ** alpha * a) <= 1e-10 * max(abs(b), 1e-300)


@given(a=st.floats(-5, 5), x=st.floats(-2, 2), y=st.floats(0.01, 2.0))
def test_shift_covariance(a, x, y):
    rng = np.random.default_rng(7)
    w = rng.normal(size=12) * 4
    c = rng.normal(size=12) + 1j * rng.normal(size=12)
    f = T.AtomicSpectrum(w, c)
    k = get_kernel("lizorkin_exp")
    shifted = T.evaluate(f.shifted(a), k, [x], [y])[0, 0]
    direct = T.evaluate(f, k, [x + a], [y])[0, 0]
    assert abs(shifted - direct) <= 1e-12 * (1 + abs(direct))


def test_point_evaluate_constant_gives_mass():
    for name in ("gaussian", "laplace", "lp_phi1"):
        k = get_kernel(name)
        for eps in (1e-3, 0.5, 7.0):
            val = T.point_evaluate(T.constant(1.0), 0.4, eps, k)[0]
            assert val == pytest.approx(moment(k, 0), abs=1e-12)


def test_point_evaluate_r0_at_one():
    got = T.point_evaluate(T.r_beta(0, 1), 0.0, 0.01, get_kernel("gaussian"))[0]
    n = np.arange(1, 200)
    oracle = np.sum((-1.0) ** n * np.exp(-(0.01 * math.pi * n * n) ** 2))
    assert got == pytest.approx(oracle, abs=1e-12)
    assert got.real == pytest.approx(-0.4999, abs=1e-4)


def test_point_evaluate_r0_at_zero_leading_term():
    lead, _ = integrate.quad(lambda u: u ** -0.5 * math.exp(-u * u), 0, np.inf)
    lead /= 2 * math.sqrt(math.pi)
    assert lead == pytest.approx(special.gamma(0.25) / (4 * math.sqrt(math.pi)), rel=1e-10)
    eps = 1e-4
    val = T.point_evaluate(T.r_beta(0), 0.0, eps, get_kernel("gaussian"))[0]
    scaled = math.sqrt(eps) * (val + 0.5)
    # the sqrt(i) branch factor and the pairing of (t + i0)^(-1/2) with an even kernel combine to a real value
    assert abs(scaled) == pytest.approx(0.51139, abs=1e-5)
    assert scaled == pytest.approx(lead, abs=1e-6)


def test_point_evaluate_rejects_bad_eps():
    with pytest.raises(ValidationError):
        T.point_evaluate(T.constant(), 0.0, 0.0, get_kernel("gaussian"))


def _lizorkin_field(rho, psi, x, y, du=0.01, U=40.0):
    # W_psi rho by a trapezoid sum in frequency, independent of evaluate()
    u = np.arange(-U, U, du) + du / 2
    E = np.exp(1j * np.outer(x, u))
    rows = [E @ (rho(u) * np.conj(psi(yy * u))) * du / (2 * math.pi) for yy in y]
    return np.array(rows)[:, :, None], u


def test_synthesis_round_trip():
    psi = get_kernel("lizorkin_exp")
    eta = make_reconstruction_wavelet(psi)
    rho = get_kernel("lizorkin_exp")
    x = np.linspace(-40, 40, 256, endpoint=False)
    y = np.geomspace(1e-2, 1e2, 48)
    vals, u = _lizorkin_field(rho, psi, x, y)
    field = T.TransformField(vals, T.ScaleGrid(x, y), psi.label, "rho", "wavelet")
    t = np.linspace(-2, 2, 9)
    ref = np.exp(1j * np.outer(t, u)) @ rho(u) * (u[1] - u[0]) / (2 * math.pi)
    got = T.synthesize(field, eta, t)[:, 0]
    assert np.max(np.abs(got - ref)) < 1e-4
    assert np.max(np.abs(T.synthesize(2 * field, eta, t)[:, 0] - 2 * got)) < 1e-14


def test_synthesis_of_zero_field():
    grid = T.ScaleGrid(np.linspace(-1, 1, 16, endpoint=False), np.geomspace(0.1, 1, 5))
    field = T.TransformField(np.zeros((5, 16, 1)), grid, "k", "zero", "wavelet")
    assert np.all(T.synthesize(field, get_kernel("lizorkin_exp"), [0.0, 0.5]) == 0)


def test_synthesis_flags_coarse_grid():
    psi = get_kernel("lizorkin_exp")
    x = np.linspace(-40, 40, 256, endpoint=False)
    y = np.geomspace(1e-2, 1e2, 6)
    vals, _ = _lizorkin_field(psi, psi, x, y)
    field = T.TransformField(vals, T.ScaleGrid(x, y), psi.label, "rho", "wavelet")
    with pytest.raises(NumericalError):
        T.synthesize(field, make_reconstruction_wavelet(psi), [0.0], tol=1e-6)


def test_desingularize_single_atom():
    psi = get_kernel("lizorkin_exp")
    eta = make_reconstruction_wavelet(psi)
    rho = get_kernel("shifted_lizorkin:0.5")
    w = -1.3
    got = T.desingularize(T.exponential(w), psi, eta, rho).value[0]
    oracle = rho(np.array([-w]))[0]  # the atom of exp(iwt) carries mass 2 pi
    assert T.direct_pairing(T.exponential(w), rho)[0] == pytest.approx(oracle, rel=1e-14)
    assert abs(got - oracle) <= 1e-6 * abs(oracle)


def test_desingularize_zero_test_function():
    psi = get_kernel("lizorkin_exp")
    zero = KernelSpec(lambda u: np.zeros(np.shape(u), complex), "zero", "all",
                      moment_window=psi.moment_window)
    res = T.desingularize(T.cosine(1.0), psi, make_reconstruction_wavelet(psi), zero)
    assert np.all(res.value == 0)


def test_desingularize_scale_of_eta_cancels():
    psi = get_kernel("lizorkin_exp")
    eta = make_reconstruction_wavelet(psi)
    eta2 = KernelSpec(lambda u: 2 * eta(u), "2eta", "all", moment_window=psi.moment_window)
    rho = get_kernel("lizorkin_exp")
    f = T.weierstrass(0.6)
    a = T.desingularize(f, psi, eta, rho)
    b = T.desingularize(f, psi, eta2, rho)
    assert b.calibration == pytest.approx(2 * a.calibration, rel=1e-12)
    assert b.value[0] == pytest.approx(a.value[0], rel=1e-10)


def test_desingularize_rejects_non_lizorkin_test():
    psi = get_kernel("lizorkin_exp")
    with pytest.raises(ValidationError):
        T.desingularize(T.cosine(), psi, make_reconstruction_wavelet(psi), get_kernel("gaussian"))


@pytest.mark.parametrize("x", [0.0, 0.4, -2.1])
def test_lp_reconstruct_cosine(x):
    assert T.littlewood_paley_reconstruct(T.cosine(1.0), x)[0] == pytest.approx(math.cos(x), abs=1e-6)


def test_lp_reconstruct_constant():
    assert T.littlewood_paley_reconstruct(T.constant(1.0), 0.3)[0] == pytest.approx(1.0, abs=1e-12)


def test_lp_reconstruct_weierstrass():
    assert abs(T.littlewood_paley_reconstruct(T.weierstrass(0.6), 0.0, 1.0)[0]) < 1e-4


def test_evolve_cauchy_examples():
    assert T.evolve_cauchy(T.constant(1.0), 2, 0.3, 2.5)[0] == pytest.approx(1.0, abs=1e-12)
    for t in (0.01, 1.0, 30.0):
        assert T.evolve_cauchy(T.heaviside(), 2, 0.0, t)[0] == pytest.approx(0.5, abs=1e-10)
    assert T.evolve_cauchy(T.heaviside(), 2, 1.0, 1.0)[0] == pytest.approx(0.5 * (1 + math.erf(0.5)), abs=1e-9)
    assert T.evolve_cauchy(T.heaviside(), 2, 1.0, 1.0)[0].real == pytest.approx(0.760250, abs=1e-6)


def test_evolve_cauchy_rejects_odd_order():
    with pytest.raises(ValidationError):
        T.evolve_cauchy(T.heaviside(), 3, 0.0, 1.0)


def test_boundary_recovery_for_sampled_signal():
    dt = 2 * math.pi / 256
    t = np.arange(256) * dt
    vals = np.exp(np.sin(t)) + 0.2 * np.cos(3 * t)
    f = T.SampledSignal(vals, dt)
    g = get_kernel("gaussian")
    xs = t[::16]
    errs = []
    for y in (0.1, 0.03, 0.01, 0.003):
        m = T.evaluate(f, g, xs, np.full(xs.size, y), "phi")[:, 0]
        errs.append(np.max(np.abs(m - vals[::16])))
    assert np.all(np.diff(errs) < 0)
    assert errs[-1] < 1e-4


def test_localization_decay():
    # a smooth bump on [0.5, 2.5], sampled over a long period; the field on [-0.5, 0] must vanish fast
    dt = 1 / 256
    t = np.arange(-8, 8, dt)
    s = np.clip(1 - (t - 1.5) ** 2, 0, None)
    bump = np.where(s > 0, np.exp(-1 / np.maximum(s, 1e-300)), 0.0)
    f = T.SampledSignal(bump, dt, origin=-8.0).to_spectrum()
    g = get_kernel("gaussian")
    K = np.linspace(-0.5, 0.0, 11)
    ys = np.geomspace(1e-3, 1e-1, 7)
    sup = np.array([np.max(np.abs(T.evaluate(f, g, K, np.full(K.size, y), "phi"))) for y in ys])
    assert sup[-1] > 0
    assert np.all(sup <= sup[-1] * (ys / ys[-1]) ** 3 + 1e-13)
    assert sup[0] < 1e-12


def test_field_shape_checked():
    grid = T.ScaleGrid([0.0, 1.0], [1.0])
    with pytest.raises(ValidationError):
        T.TransformField(np.zeros((2, 2, 1)), grid, "k", "f", "phi")


def test_scale_grid_rejects_unsorted():
    with pytest.raises(ValidationError):
        T.ScaleGrid([0.0], [1.0, 0.5])


def test_field_serialization_round_trip():
    grid = T.ScaleGrid.log(-1, 1, 5, 0.1, 1, 3)
    fld = T.analyze(T.cosine(2.0), get_kernel("lizorkin_exp"), grid)
    back = T.TransformField.from_dict(fld.to_dict())
    assert np.array_equal(back.values, fld.values)
    assert back.convention == "wavelet"
    assert fld.to_columns().splitlines()[0].startswith("# convention=wavelet")
