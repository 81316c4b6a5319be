"""Regularizing transforms ``M_phi f(x, y)`` of one-dimensional distributions.

Three conventions share one spectral formula.  For ``f_hat`` the Fourier
transform of ``f``,

    value(x, y) = (1/2pi) int f_hat(u) exp(ixu) K(yu) du

with ``K = phi_hat`` for the plain transform ``(f * phi_y)(x)``,
``K(u) = phi_hat(-u)`` for the phi-transform ``<f(x + yt), phi(t)>`` and
``K = conj(psi_hat)`` for the wavelet transform ``<f(x + yt), conj(psi(t))>``.
On the time side the same values are ``int f(x + yt) k(t) dt`` with ``k(t)``
equal to ``phi(-t)``, ``phi(t)`` and ``conj(psi(t))`` respectively.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, special

from .errors import NumericalError, ValidationError
from .kernels import KernelSpec, gaussian, lp_phi1, lp_psi1, moment

CONVENTIONS = ("M", "phi", "wavelet")
TWO_PI = 2.0 * math.pi
MAX_ATOMS = 4_000_000


def multiplier(kernel: KernelSpec, convention: str) -> Callable[[np.ndarray], np.ndarray]:
    """The Fourier multiplier ``K`` for ``convention``."""
    if convention == "M":
        return kernel.fourier_eval
    if convention == "phi":
        return lambda u: kernel.fourier_eval(-np.asarray(u))
    if convention == "wavelet":
        return lambda u: np.conj(kernel.fourier_eval(u))
    raise ValidationError(f"unknown convention {convention!r}")


def time_weight(kernel: KernelSpec, convention: str) -> Callable[[np.ndarray], np.ndarray]:
    """The time-side weight ``k`` with value ``int f(x + yt) k(t) dt``."""
    if convention == "M":
        return lambda t: kernel.time(-np.asarray(t))
    if convention == "phi":
        return kernel.time
    if convention == "wavelet":
        return lambda t: np.conj(kernel.time(t))
    raise ValidationError(f"unknown convention {convention!r}")


# ---------------------------------------------------------------------------
# distributions

@dataclass(frozen=True, eq=False)
class AtomicSpectrum:
    """``f_hat = sum_n c_n delta(u - w_n)``, i.e. ``f(t) = (1/2pi) sum_n c_n exp(i w_n t)``.

    ``amplitudes`` has shape ``(N, channels)``.  ``q`` is the growth exponent
    in ``|c_n| <= C (1 + |w_n|)^q``.
    """

    frequencies: np.ndarray
    amplitudes: np.ndarray
    q: float = 0.0
    label: str = "atomic"

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        c = np.asarray(self.amplitudes, dtype=complex)
        if c.ndim == 1:
            c = c[:, None]
        if c.shape[0] != w.shape[0]:
            raise ValidationError("frequencies and amplitudes disagree in length")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(c))):
            raise ValidationError("non-finite spectrum")
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "amplitudes", c)

    @property
    def channels(self) -> int:
        return self.amplitudes.shape[1]

    def atoms(self, w_max: float = math.inf):
        return self.frequencies, self.amplitudes

    def shifted(self, x0) -> "AtomicSpectrum":
        """Spectrum of ``f(x0 + .)``."""
        ph = np.exp(1j * float(x0) * self.frequencies)[:, None]
        return replace(self, amplitudes=self.amplitudes * ph, label=f"{self.label}@{x0}")

    def temperedness(self):
        """Fitted ``(C, q)`` with ``|c_n| <= C (1 + |w_n|)^q`` (least-squares slope of the envelope)."""
        a = np.max(np.abs(self.amplitudes), axis=1)
        m = a > 0
        if m.sum() < 2:
            return (float(a.max(initial=0.0)), 0.0)
        lw, la = np.log1p(np.abs(self.frequencies[m])), np.log(a[m])
        q = max(0.0, float(np.polyfit(lw, la, 1)[0]))
        return (float(np.max(la - q * lw)), q)

    def direct_value(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(1j * np.outer(t, self.frequencies)) @ self.amplitudes / TWO_PI


@dataclass(frozen=True, eq=False)
class SeriesSpectrum:
    """A lazily generated atomic spectrum with infinitely many atoms.

    ``atoms_fn(W)`` returns ``(frequencies, amplitudes, n)`` for all atoms with
    ``|w| <= W``, where ``n`` is the series index.  When ``quadratic`` is set
    the frequencies are ``+-pi n^2`` and rational shifts use exact phases.
    """

    atoms_fn: Callable[[float], tuple]
    q: float = 0.0
    label: str = "series"
    quadratic: bool = False
    shift: Union[Fraction, float, None] = None
    channels: int = 1

    def atoms(self, w_max: float):
        if not np.isfinite(w_max):
            raise NumericalError(f"{self.label}: infinite series needs a decaying multiplier")
        w, c, n = self.atoms_fn(w_max)
        c = np.asarray(c, dtype=complex)
        if c.ndim == 1:
            c = c[:, None]
        if w.size > MAX_ATOMS:
            raise NumericalError(f"{self.label}: {w.size} atoms needed below |w| = {w_max:g}; cap is {MAX_ATOMS}")
        if self.shift is not None and self.shift != 0:
            c = c * self._phase(w, n)[:, None]
        return w, c

    def _phase(self, w, n):
        s = self.shift
        if self.quadratic and isinstance(s, Fraction):
            p, q = s.numerator, s.denominator
            m = 2 * q
            r = np.asarray(n, dtype=np.int64) % m
            idx = ((p % m) * ((r * r) % m)) % m
            return np.exp(1j * math.pi * np.sign(w) * idx.astype(float) / q)
        return np.exp(1j * float(s) * w)

    def shifted(self, x0) -> "SeriesSpectrum":
        if isinstance(x0, float) and self.quadratic:
            fr = Fraction(x0).limit_denominator(10_000)
            if abs(float(fr) - x0) < 1e-14:
                x0 = fr
        base = self.shift if self.shift is not None else 0
        if isinstance(base, Fraction) and isinstance(x0, Fraction):
            new = base + x0
        elif isinstance(x0, int) and isinstance(base, Fraction):
            new = base + x0
        else:
            new = float(base) + float(x0)
        return replace(self, shift=new, label=f"{self.label}@{x0}")

    def plus_constant(self, value: complex) -> "SeriesSpectrum":
        """``f + value`` (one extra atom at frequency 0)."""
        fn = self.atoms_fn

        def atoms_fn(W):
            w, c, n = fn(W)
            c = np.asarray(c, dtype=complex)
            extra = np.full((1,) + c.shape[1:], TWO_PI * value, complex)
            return np.concatenate([[0.0], w]), np.concatenate([extra, c]), np.concatenate([[0], n])
        return replace(self, atoms_fn=atoms_fn, label=f"{self.label}+{value}")

    def direct_value(self, t, w_max: float) -> np.ndarray:
        w, c = self.atoms(w_max)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(1j * np.outer(t, w)) @ c / TWO_PI


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Uniform samples of a function; analysed through its trigonometric interpolant."""

    samples: np.ndarray
    spacing: float
    origin: float = 0.0
    boundary: str = "periodic"
    label: str = "sampled"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim == 1:
            s = s[:, None]
        if s.shape[0] < 2 or not np.all(np.isfinite(s)):
            raise ValidationError("need at least two finite samples")
        if not self.spacing > 0:
            raise ValidationError("spacing must be positive")
        if self.boundary not in ("periodic", "zero-pad"):
            raise ValidationError(f"unknown boundary {self.boundary!r}")
        object.__setattr__(self, "samples", s)

    @property
    def channels(self) -> int:
        return self.samples.shape[1]

    def to_spectrum(self) -> AtomicSpectrum:
        s = self.samples
        if self.boundary == "zero-pad":
            s = np.concatenate([s, np.zeros((3 * s.shape[0], s.shape[1]), complex)])
        n = s.shape[0]
        F = np.fft.fft(s, axis=0) / n
        k = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            # split the Nyquist bin symmetrically so real data stay real
            ny = n // 2
            F = np.concatenate([F, F[ny:ny + 1] / 2.0])
            F[ny] /= 2.0
            k = np.concatenate([k, [n // 2]])
            k[ny] = -n // 2
        w = TWO_PI * k / (n * self.spacing)
        amps = TWO_PI * F * np.exp(-1j * w * self.origin)[:, None]
        return AtomicSpectrum(w, amps, 0.0, label=self.label)

    def atoms(self, w_max: float = math.inf):
        return self.to_spectrum().atoms()


@dataclass(frozen=True, eq=False)
class HomogeneousModel:
    """``f(t) = c_plus t_+^alpha + c_minus t_-^alpha`` (times an optional factor ``L(|t|)``).

    Fourier side: ``f_hat(u) = A_plus u^(-alpha-1)`` for ``u > 0`` and
    ``A_minus |u|^(-alpha-1)`` for ``u < 0``, up to terms supported at ``u = 0``
    that Lizorkin kernels annihilate.  ``from_fourier`` builds models such as
    the Dirac delta (``alpha = -1``, ``A = 1``) with no time-side formula.
    """

    alpha: float
    c_plus: complex = 1.0
    c_minus: complex = 1.0
    factor: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "homogeneous"
    fourier_coeffs: Optional[tuple] = None
    time_form: Optional[Callable[[np.ndarray], np.ndarray]] = None

    channels = 1

    @classmethod
    def from_fourier(cls, alpha: float, a_plus: complex, a_minus: complex, label: str,
                     time_form=None) -> "HomogeneousModel":
        return cls(alpha, float("nan"), float("nan"), None, label, (complex(a_plus), complex(a_minus)),
                   time_form)

    @property
    def has_time_form(self) -> bool:
        return self.time_form is not None or (self.alpha > -1 and not np.isnan(complex(self.c_plus).real))

    def coefficients(self):
        if self.fourier_coeffs is not None:
            return self.fourier_coeffs
        a = self.alpha
        if a <= -1 or float(a).is_integer() and a < 0:
            raise ValidationError("time coefficients define a transform only for alpha > -1")
        g = special.gamma(a + 1.0)
        e = np.exp(-1j * math.pi * (a + 1.0) / 2.0)
        cp, cm = complex(self.c_plus), complex(self.c_minus)
        return (g * (cp * e + cm * np.conj(e)), g * (cp * np.conj(e) + cm * e))

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.time_form is not None:
            return np.asarray(self.time_form(t), dtype=complex)
        a = abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(a > 0, a ** self.alpha, 0.0 if self.alpha > 0 else (1.0 if self.alpha == 0 else np.inf))
            out = np.where(t > 0, complex(self.c_plus) * p,
                           np.where(t < 0, complex(self.c_minus) * p,
                                    0.5 * (complex(self.c_plus) + complex(self.c_minus)) * p))
            if self.factor is not None:
                out = out * np.where(a > 0, self.factor(np.where(a > 0, a, 1.0)), 0.0)
        return out

    def fourier(self, u):
        u = np.asarray(u, dtype=float)
        ap, am = self.coefficients()
        a = np.abs(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(a > 0, a ** (-self.alpha - 1.0), 0.0)
        return np.where(u > 0, ap * p, am * p)


@dataclass(frozen=True, eq=False)
class FourierDensity:
    """A distribution with locally integrable transform ``f_hat = density(u)`` away from ``u = 0``."""

    density: Callable[[np.ndarray], np.ndarray]
    label: str = "density"
    bandwidth: float = math.inf
    channels = 1

    @classmethod
    def from_kernel(cls, kernel: KernelSpec) -> "FourierDensity":
        return cls(kernel.fourier_eval, label=kernel.label, bandwidth=kernel.effective_bandwidth())


SpectralDistribution = Union[AtomicSpectrum, SeriesSpectrum, SampledSignal, HomogeneousModel, FourierDensity]


# ---------------------------------------------------------------------------
# built-in signals

def constant(value: complex = 1.0) -> AtomicSpectrum:
    return AtomicSpectrum([0.0], [TWO_PI * value], label="constant")


def exponential(omega: float, amplitude: complex = 1.0) -> AtomicSpectrum:
    return AtomicSpectrum([omega], [TWO_PI * amplitude], label=f"exp(i{omega:g}t)")


def cosine(omega: float = 1.0) -> AtomicSpectrum:
    return AtomicSpectrum([omega, -omega], [math.pi, math.pi], label=f"cos({omega:g}t)")


def weierstrass(a: float, base: float = 2.0) -> SeriesSpectrum:
    """``sum_{j>=0} a^j sin(base^j t)``, continuous for ``0 < a < 1``."""
    if not 0 < a < 1:
        raise ValidationError("weierstrass parameter must lie in (0, 1)")

    def atoms_fn(W):
        J = int(math.floor(math.log(max(W, 1.0)) / math.log(base) + 1e-12)) + 1
        j = np.arange(J)
        w = base ** j.astype(float)
        c = TWO_PI * a ** j / 2j
        return np.concatenate([w, -w]), np.concatenate([c, -c]), np.concatenate([j, j])

    return SeriesSpectrum(atoms_fn, q=0.0, label=f"weierstrass:{a:g}")


def _quadratic_atoms(weight: Callable[[np.ndarray], np.ndarray], both_signs: bool, odd: bool):
    def atoms_fn(W):
        N = int(math.floor(math.sqrt(max(W, 0.0) / math.pi))) + 1
        n = np.arange(1, N + 1)
        w = math.pi * n.astype(float) ** 2
        c = weight(n)
        if not both_signs:
            return w, c, n
        cm = -c if odd else c
        return np.concatenate([w, -w]), np.concatenate([c, cm]), np.concatenate([n, n])
    return atoms_fn


def riemann_w() -> SeriesSpectrum:
    """Riemann's function ``sum_{n>=1} sin(pi n^2 t) / n^2``."""
    fn = _quadratic_atoms(lambda n: TWO_PI / (2j * n.astype(float) ** 2), True, True)
    return SeriesSpectrum(fn, q=0.0, label="riemann_w", quadratic=True)


def r_beta(beta: complex, r: Union[Fraction, float, int] = 0) -> SeriesSpectrum:
    """``R_beta(t) = sum_{n>=1} n^(-2 beta) exp(i pi n^2 t)``, centred at ``r`` (so ``x`` is ``t - r``)."""
    b = complex(beta)
    fn = _quadratic_atoms(lambda n: TWO_PI * n.astype(float) ** (-2.0 * b), False, False)
    s = SeriesSpectrum(fn, q=max(0.0, -2.0 * b.real), label=f"R_beta:{beta}", quadratic=True)
    if r != 0:
        s = s.shifted(Fraction(r) if isinstance(r, (int, Fraction)) else r)
    return s


def theta_comb() -> SeriesSpectrum:
    """``theta(t) = sum_{n in Z} exp(i pi n^2 t)``: atom ``2pi`` at 0 plus ``4pi`` at each ``pi n^2``."""
    def atoms_fn(W):
        w, c, n = _quadratic_atoms(lambda n: np.full(n.shape, 2 * TWO_PI, complex), False, False)(W)
        return np.concatenate([[0.0], w]), np.concatenate([[TWO_PI], c]), np.concatenate([[0], n])
    return SeriesSpectrum(atoms_fn, label="theta", quadratic=True)


def heaviside() -> HomogeneousModel:
    return HomogeneousModel(0.0, 1.0, 0.0, label="heaviside")


def homogeneous(alpha: float, c_plus: complex = 1.0, c_minus: complex = 1.0, factor=None,
                label: Optional[str] = None) -> HomogeneousModel:
    return HomogeneousModel(alpha, c_plus, c_minus, factor, label or f"homogeneous:{alpha:g}")


def dirac() -> HomogeneousModel:
    return HomogeneousModel.from_fourier(-1.0, 1.0, 1.0, "delta")


def dirac_comb(period: float = 2048.0, max_atoms: int = 2 ** 22) -> SeriesSpectrum:
    """``sum_k delta(t - k period)``, which equals ``delta`` on ``|t| < period/2``."""
    step = TWO_PI / period

    def atoms_fn(W):
        K = int(math.floor(W / step))
        k = np.arange(-K, K + 1)
        if k.size > max_atoms:
            raise NumericalError("dirac comb needs too many atoms at this scale")
        return step * k, np.full(k.size, step, complex), k
    return SeriesSpectrum(atoms_fn, label=f"dirac_comb:{period:g}")


# ---------------------------------------------------------------------------
# grids and fields

@dataclass(frozen=True)
class ScaleGrid:
    x: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if x.size == 0 or y.size == 0:
            raise ValidationError("empty grid")
        if np.any(y <= 0) or np.any(np.diff(y) <= 0):
            raise ValidationError("y values must be positive and strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def log(cls, x_lo, x_hi, nx, y_lo, y_hi, ny) -> "ScaleGrid":
        return cls(np.linspace(x_lo, x_hi, nx), np.geomspace(y_lo, y_hi, ny),
                   {"x": [x_lo, x_hi, nx], "y": [y_lo, y_hi, ny], "spacing": "log-y"})


@dataclass(frozen=True, eq=False)
class TransformField:
    """Values on ``grid`` with shape ``(ny, nx, channels)``."""

    values: np.ndarray
    grid: ScaleGrid
    kernel_label: str
    distribution_label: str
    convention: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape[:2] != (self.grid.y.size, self.grid.x.size):
            raise ValidationError("field shape does not match its grid")
        if not np.all(np.isfinite(v)):
            raise NumericalError("non-finite transform values")
        object.__setattr__(self, "values", v)

    def __mul__(self, c):
        return replace(self, values=self.values * c)

    __rmul__ = __mul__

    def to_columns(self) -> str:
        """Plain text, one row per ``(x, y)``: ``x y re0 im0 re1 im1 ...``."""
        rows = [f"# convention={self.convention} kernel={self.kernel_label} f={self.distribution_label}"]
        for j, yv in enumerate(self.grid.y):
            for i, xv in enumerate(self.grid.x):
                parts = [f"{xv:.17g}", f"{yv:.17g}"]
                for z in self.values[j, i]:
                    parts += [f"{z.real:.17g}", f"{z.imag:.17g}"]
                rows.append(" ".join(parts))
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "schema": "asymptoscope/1", "type": "TransformField", "convention": self.convention,
            "kernel": self.kernel_label, "distribution": self.distribution_label,
            "x": self.grid.x.tolist(), "y": self.grid.y.tolist(),
            "re": self.values.real.tolist(), "im": self.values.imag.tolist(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransformField":
        if d.get("schema") != "asymptoscope/1":
            raise ValidationError("unsupported schema")
        vals = np.asarray(d["re"]) + 1j * np.asarray(d["im"])
        return cls(vals, ScaleGrid(d["x"], d["y"]), d["kernel"], d["distribution"], d["convention"],
                   d.get("provenance", {}))


# ---------------------------------------------------------------------------
# evaluation

@dataclass
class EvalInfo:
    atoms_used: int = 0
    truncation_bound: float = 0.0
    method: str = ""


def _atomic_eval(freqs, amps, K, x, y, info: EvalInfo, tail_ref=None):
    P = x.size
    out = np.zeros((P, amps.shape[1]), complex)
    if freqs.size == 0:
        return out
    chunk = max(1, int(4_000_000 // max(freqs.size, 1)))
    for s in range(0, P, chunk):
        xs, ys = x[s:s + chunk], y[s:s + chunk]
        arg = np.outer(ys, freqs)
        mat = K(arg) * np.exp(1j * np.outer(xs, freqs))
        out[s:s + chunk] = mat @ amps
    return out / TWO_PI


def _series_eval(f: SeriesSpectrum, kernel_bw: float, K, x, y, info: EvalInfo):
    order = np.argsort(-y, kind="stable")
    out = np.zeros((x.size, f.channels), complex)
    # group points into blocks of comparable y so each block pulls only the atoms it needs
    ys = y[order]
    edges = [0]
    for i in range(1, ys.size):
        if ys[edges[-1]] / ys[i] > 4.0 or i - edges[-1] >= 2048:
            edges.append(i)
    edges.append(ys.size)
    for a, b in zip(edges[:-1], edges[1:]):
        idx = order[a:b]
        W = kernel_bw / y[idx].min()
        w, c = f.atoms(W)
        info.atoms_used = max(info.atoms_used, w.size)
        out[idx] = _atomic_eval(w, c, K, x[idx], y[idx], info)
        if w.size:
            last = np.abs(c).max(axis=1) * np.abs(K(y[idx].min() * w))
            info.truncation_bound = max(info.truncation_bound, float(last[-min(8, last.size):].max()) / TWO_PI)
    return out


_T_CACHE: dict = {}


def _time_extent(kernel: KernelSpec, weight) -> float:
    key = id(kernel)
    if key not in _T_CACHE:
        t = np.linspace(0, 400, 8001)
        v = np.maximum(np.abs(weight(t)), np.abs(weight(-t)))
        big = np.nonzero(v > 1e-16 * v.max())[0]
        _T_CACHE[key] = float(t[min(big[-1] + 1, t.size - 1)])
    return _T_CACHE[key]


def _quad_c(fn, a, b, points=None, **kw):
    opts = dict(limit=400, epsabs=kw.get("epsabs", 1e-13), epsrel=kw.get("epsrel", 1e-11))
    if points is not None:
        opts["points"] = points
    re, e1 = integrate.quad(lambda t: fn(t).real, a, b, **opts)
    im, e2 = integrate.quad(lambda t: fn(t).imag, a, b, **opts)
    return complex(re, im), math.hypot(e1, e2)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
GRADING_LEVELS = 80


def _graded_offsets(t0: float, T: float) -> np.ndarray:
    """Panel ends on ``[-T, T]`` written as offsets ``t - t0``.

    Unit panels away from ``t0``; geometric grading towards it when it is inside.
    Offsets keep ``x + y t = y (t - t0)`` exact near the singular point.
    """
    base = np.arange(-T, T + 0.5, 1.0)
    base[-1] = T
    if not -T < t0 < T:
        return base - t0
    d = 2.0 ** -np.arange(GRADING_LEVELS + 1)
    far = base[(base < t0 - 1) | (base > t0 + 1)] - t0
    s = np.concatenate([far, -d, [0.0], d])
    return np.unique(np.clip(s, -T - t0, T - t0))


def _time_side_point(f: HomogeneousModel, weight, T, x, y):
    """``int f(x + yt) k(t) dt`` by 16-point Gauss-Legendre panels graded towards ``t = -x/y``."""
    t0 = -x / y
    br = _graded_offsets(t0, T)
    a, b = br[:-1], br[1:]
    mid, half = (a + b) / 2, (b - a) / 2
    s = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return complex(np.sum(w * f.value(y * s) * weight(t0 + s)))


def _fourier_side_point(density, K, x, U, eps=1e-14):
    """``(1/2pi) int density(u) exp(ixu) K(u) du`` over ``0 < |u| < U`` (weighted QAWO rules)."""
    total = 0j
    for sgn in (1.0, -1.0):
        def g(u, sgn=sgn):
            uu = np.array([sgn * u])
            return complex(density(uu)[0] * K(uu)[0])
        opts = dict(limit=800, epsabs=eps, epsrel=1e-12)
        if abs(x) < 1e-14:
            v, _ = _quad_c(g, 0.0, U)
            total += v
            continue
        wx = sgn * x
        rc, _ = integrate.quad(lambda u: g(u).real, 0.0, U, weight="cos", wvar=wx, **opts)
        rs, _ = integrate.quad(lambda u: g(u).real, 0.0, U, weight="sin", wvar=wx, **opts)
        ic, _ = integrate.quad(lambda u: g(u).imag, 0.0, U, weight="cos", wvar=wx, **opts)
        is_, _ = integrate.quad(lambda u: g(u).imag, 0.0, U, weight="sin", wvar=wx, **opts)
        total += complex(rc - is_, rs + ic)
    return total / TWO_PI


def _homogeneous_method(f: HomogeneousModel, kernel: KernelSpec) -> str:
    if f.factor is not None or (kernel.time_eval is not None and f.has_time_form and not kernel.is_lizorkin):
        return "time"
    if kernel.is_lizorkin:
        return "fourier"
    if f.has_time_form:
        return "time"
    raise ValidationError(f"{f.label} needs a Lizorkin kernel (no time-side form)")


def _is_dirac(f: HomogeneousModel) -> bool:
    return f.alpha == -1.0 and f.fourier_coeffs is not None and f.fourier_coeffs == (1 + 0j, 1 + 0j)


def _homogeneous_eval(f: HomogeneousModel, kernel, convention, x, y, info: EvalInfo):
    if _is_dirac(f):
        # int delta(x + yt) k(t) dt = k(-x/y) / y
        info.method = "closed-form"
        return (time_weight(kernel, convention)(-x / y) / y)[:, None]
    method = _homogeneous_method(f, kernel)
    info.method = method
    K = multiplier(kernel, convention)
    out = np.empty(x.size, complex)
    if method == "time":
        w = time_weight(kernel, convention)
        T = _time_extent(kernel, w)
        if f.factor is not None:
            for i in range(x.size):
                out[i] = _time_side_point(f, w, T, x[i], y[i])
            return out[:, None]
        cache = {}
        for i in range(x.size):
            xi = x[i] / y[i]
            if xi not in cache:
                cache[xi] = _time_side_point(f, w, T, xi, 1.0)
            out[i] = y[i] ** f.alpha * cache[xi]
        return out[:, None]
    U = kernel.effective_bandwidth()
    cache = {}
    for i in range(x.size):
        xi = x[i] / y[i]
        if xi not in cache:
            cache[xi] = _fourier_side_point(f.fourier, K, xi, U)
        out[i] = y[i] ** f.alpha * cache[xi]
    return out[:, None]


def _density_eval(f: FourierDensity, kernel, convention, x, y, info: EvalInfo):
    K = multiplier(kernel, convention)
    U = kernel.effective_bandwidth()
    out = np.empty(x.size, complex)
    for i in range(x.size):
        Ky = lambda u, yy=y[i]: K(yy * np.asarray(u))
        out[i] = _fourier_side_point(f.density, Ky, x[i], min(U / y[i], f.bandwidth))
    info.method = "fourier"
    return out[:, None]


def evaluate(f: SpectralDistribution, kernel: KernelSpec, x, y, convention: str = "wavelet",
             info: Optional[EvalInfo] = None) -> np.ndarray:
    """Transform values at the points ``(x[i], y[i])``; shape ``(P, channels)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x, y = np.broadcast_arrays(x, y)
    x, y = x.ravel(), y.ravel()
    if np.any(y <= 0):
        raise ValidationError("scales must be positive")
    info = info if info is not None else EvalInfo()
    if convention == "wavelet" and abs(moment(kernel, 0)) > 1e-10:
        warnings.warn(f"wavelet convention with non-wavelet kernel {kernel.label}", stacklevel=2)
    K = multiplier(kernel, convention)
    if isinstance(f, SampledSignal):
        f = f.to_spectrum()
    if isinstance(f, AtomicSpectrum):
        info.method = "atomic"
        info.atoms_used = f.frequencies.size
        return _atomic_eval(f.frequencies, f.amplitudes, K, x, y, info)
    if isinstance(f, SeriesSpectrum):
        info.method = "series"
        return _series_eval(f, kernel.effective_bandwidth(), K, x, y, info)
    if isinstance(f, HomogeneousModel):
        return _homogeneous_eval(f, kernel, convention, x, y, info)
    if isinstance(f, FourierDensity):
        return _density_eval(f, kernel, convention, x, y, info)
    raise ValidationError(f"unsupported distribution type {type(f).__name__}")


def analyze(f: SpectralDistribution, kernel: KernelSpec, grid: ScaleGrid,
            convention: str = "wavelet") -> TransformField:
    """``M_phi f``, ``F_phi f`` or ``W_psi f`` on ``grid`` (``convention`` = M / phi / wavelet)."""
    if convention not in CONVENTIONS:
        raise ValidationError(f"unknown convention {convention!r}")
    X, Y = np.meshgrid(grid.x, grid.y)
    info = EvalInfo()
    vals = evaluate(f, kernel, X.ravel(), Y.ravel(), convention, info)
    vals = vals.reshape(grid.y.size, grid.x.size, -1)
    prov = {"method": info.method, "atoms": info.atoms_used, "truncation_bound": info.truncation_bound}
    return TransformField(vals, grid, kernel.label, getattr(f, "label", "f"), convention, prov)


def point_evaluate(f: SpectralDistribution, x0: float, eps: float, test: KernelSpec) -> np.ndarray:
    """``<f(x0 + eps t), test(t)>`` per channel."""
    if not eps > 0:
        raise ValidationError("eps must be positive")
    return evaluate(f, test, [x0], [eps], "phi")[0]


def direct_pairing(f: SpectralDistribution, rho: KernelSpec) -> np.ndarray:
    """``<f, rho> = (1/2pi) int f_hat(u) rho_hat(-u) du`` (sum over atoms for atomic spectra)."""
    if isinstance(f, SampledSignal):
        f = f.to_spectrum()
    if isinstance(f, (AtomicSpectrum, SeriesSpectrum)):
        W = rho.effective_bandwidth()
        w, c = f.atoms(W)
        return (rho(-w)[None, :] @ c)[0] / TWO_PI
    if isinstance(f, HomogeneousModel):
        dens = f.fourier
    elif isinstance(f, FourierDensity):
        dens = f.density
    else:
        raise ValidationError("unsupported distribution")
    return np.array([_fourier_side_point(dens, lambda u: rho(-np.asarray(u)), 0.0, rho.effective_bandwidth())])


# ---------------------------------------------------------------------------
# synthesis, desingularization, reconstruction

def _log_trapezoid_weights(y: np.ndarray) -> np.ndarray:
    s = np.log(y)
    w = np.zeros_like(s)
    d = np.diff(s)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def synthesize(field: TransformField, eta: KernelSpec, t, tol: float = 1e-3) -> np.ndarray:
    """``M_eta Phi(t) = int int Phi(x, y) eta_y(t - x) dx dy / y`` on the field's grid.

    The ``x``-convolution of each row is done spectrally (the row is treated
    as periodic on the uniform ``x`` grid, which must cover the support) and
    the ``dy/y`` integral uses the trapezoid rule in ``log y``.  The estimated
    quadrature error compares the full rule with the rule on every other
    ``y`` node and raises above ``tol`` (relative to the result scale).
    """
    x, y = field.grid.x, field.grid.y
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if x.size < 8 or not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9, atol=0):
        raise ValidationError("synthesis needs a uniform x grid")
    if not np.any(field.values):
        return np.zeros((t.size, field.values.shape[2]), complex)
    dx = x[1] - x[0]
    n = x.size
    u = TWO_PI * np.fft.fftfreq(n, d=dx)
    rows = np.empty((y.size, t.size, field.values.shape[2]), complex)
    phase = np.exp(1j * np.outer(t - x[0], u)) / n
    for j, yv in enumerate(y):
        F = np.fft.fft(field.values[j], axis=0)
        rows[j] = phase @ (F * eta(yv * u)[:, None])
    w = _log_trapezoid_weights(y)
    full = np.tensordot(w, rows, axes=(0, 0))
    if y.size >= 5:
        half = np.tensordot(_log_trapezoid_weights(y[::2]), rows[::2], axes=(0, 0))
        err = float(np.max(np.abs(full - half)))
        scale = max(float(np.max(np.abs(full))), 1e-300)
        if err > tol * max(scale, 1.0):
            raise NumericalError(f"synthesis quadrature error {err:.2e} exceeds tolerance; refine the y grid")
    return full


@dataclass(frozen=True)
class PairingResult:
    value: np.ndarray
    error: float
    calibration: complex


def _scale_window(psi: KernelSpec, rho: KernelSpec, tol: float = 1e-17):
    """Scales ``y`` at which ``|rho_hat(u) psi_hat(y u)|`` can exceed ``tol`` times its maximum."""
    u = np.geomspace(1e-4, rho.effective_bandwidth(), 1500)
    ru = np.maximum(np.abs(rho(u)), np.abs(rho(-u)))
    r = np.geomspace(1e-4, psi.effective_bandwidth(), 1500)
    pr = np.maximum(np.abs(psi(r)), np.abs(psi(-r)))
    ys = np.geomspace(1e-8, 1e8, 1601)
    best = np.array([np.max(ru * np.interp(np.log(yv * u), np.log(r), pr, left=0.0, right=0.0)) for yv in ys])
    if not best.max() > 0:
        return None
    live = np.nonzero(best > tol * best.max())[0]
    return float(ys[max(live[0] - 1, 0)]), float(ys[min(live[-1] + 1, ys.size - 1)])


def desingularize(f: SpectralDistribution, psi: KernelSpec, eta: KernelSpec, rho: KernelSpec,
                  epsabs: float = 1e-15, epsrel: float = 1e-11) -> PairingResult:
    """``(1/c) int int W_psi f(x, y) W_{conj eta} rho(x, y) dx dy / y``, which recovers ``<f, rho>``.

    The ``dx`` integral is evaluated in closed form by Parseval's identity:
    it equals ``(1/2pi) int f_hat(u) conj(psi_hat(yu)) eta_hat(yu) rho_hat(-u) du``
    (a sum over atoms for atomic spectra).  The ``dy/y`` integral is adaptive
    Gauss-Kronrod quadrature in ``log y`` over the scales where
    ``rho_hat(u) psi_hat(yu)`` is not negligible.
    """
    from .kernels import calibration_constant

    if not rho.is_lizorkin:
        raise ValidationError("desingularization needs a Lizorkin test function rho")
    if not psi.is_lizorkin:
        raise ValidationError("desingularization needs a Lizorkin wavelet psi")
    c = calibration_constant(psi, eta, 1)
    c_minus = calibration_constant(psi, eta, -1)
    if abs(c - c_minus) > 1e-8 * abs(c):
        raise ValidationError("calibration constant depends on the direction")
    window = _scale_window(psi, rho)
    if window is None:
        return PairingResult(np.zeros(getattr(f, "channels", 1), complex), 0.0, c)
    y_lo, y_hi = window
    if isinstance(f, SampledSignal):
        f = f.to_spectrum()
    if isinstance(f, (AtomicSpectrum, SeriesSpectrum)):
        w, amps = f.atoms(rho.effective_bandwidth())
        keep = np.abs(rho(-w)) > 0
        w, amps = w[keep], amps[keep]
        weights = (rho(-w)[:, None] * amps) / TWO_PI

        def inner(y):
            return (np.conj(psi(y * w)) * eta(y * w)) @ weights
        channels = amps.shape[1]
    elif isinstance(f, (HomogeneousModel, FourierDensity)):
        dens = f.fourier if isinstance(f, HomogeneousModel) else f.density
        U = rho.effective_bandwidth()
        uu = np.geomspace(1e-4, U, 3000)
        uu = np.concatenate([-uu[::-1], uu])
        du = np.gradient(uu)
        g = dens(uu) * rho(-uu) * du / TWO_PI

        def inner(y):
            return np.array([np.sum(g * np.conj(psi(y * uu)) * eta(y * uu))])
        channels = 1
    else:
        raise ValidationError("unsupported distribution")
    s0, s1 = math.log(y_lo), math.log(y_hi)
    total = np.zeros(channels, complex)
    err = 0.0
    for ch in range(channels):
        for part in (np.real, np.imag):
            v, e = integrate.quad(lambda s: float(part(inner(math.exp(s))[ch])), s0, s1,
                                  limit=500, epsabs=epsabs, epsrel=epsrel)
            total[ch] += v if part is np.real else 1j * v
            err += e
    return PairingResult(total / c, err / abs(c), c)


def littlewood_paley_reconstruct(f: SpectralDistribution, x: float, b: float = 1.0,
                                 tol: float = 1e-10, r_floor: float = 1e-14) -> np.ndarray:
    """``F_{phi1} f(x, b) + int_0^b W_{psi1} f(x, r) dr / r`` with the Littlewood-Paley pair.

    The ``r`` integral runs over octaves ``[r/2, r]`` (Gauss-Legendre in
    ``log r``) downward from ``b`` until two consecutive octaves contribute
    less than ``tol``; octaves whose contribution grows for ten steps raise.
    """
    if not b > 0:
        raise ValidationError("b must be positive")
    phi1, psi1 = lp_phi1(), lp_psi1()
    total = evaluate(f, phi1, [x], [b], "phi")[0]
    nodes, weights = np.polynomial.legendre.leggauss(32)
    r_hi = b
    small = 0
    growth = 0
    prev = math.inf
    while r_hi > r_floor:
        s_hi, s_lo = math.log(r_hi), math.log(r_hi / 2)
        s = 0.5 * (s_hi + s_lo) + 0.5 * (s_hi - s_lo) * nodes
        r = np.exp(s)
        vals = evaluate(f, psi1, np.full(r.size, x), r, "wavelet")
        part = (weights[:, None] * vals).sum(axis=0) * 0.5 * (s_hi - s_lo)
        total = total + part
        mag = float(np.max(np.abs(part)))
        small = small + 1 if mag < tol else 0
        growth = growth + 1 if mag > prev * 1.0001 and mag > tol else 0
        if growth >= 10:
            raise NumericalError(f"Littlewood-Paley tail diverges near scale r = {r_hi:.3g}")
        if small >= 2 and isinstance(f, (AtomicSpectrum, SampledSignal, HomogeneousModel, FourierDensity)):
            break
        if small >= 6:
            break
        prev = mag
        r_hi /= 2
    return total


def evolve_cauchy(f: SpectralDistribution, d: int, x: float, t: float) -> np.ndarray:
    """Heat evolution ``U(x, t) = F_phi f(x, t^(1/d))`` with the Gaussian heat kernel (``d = 2``)."""
    if d != 2:
        raise ValidationError("only d = 2 (the heat equation) is supported")
    if not t > 0:
        raise ValidationError("t must be positive")
    return evaluate(f, gaussian(), [x], [math.sqrt(t)], "phi")[0]
