"""Test functions and wavelets described by their Fourier transforms.

Convention: ``phi_hat(u) = int phi(t) exp(-i u t) dt`` and the moments are
``mu_m = int t^m phi(t) dt = i^m phi_hat^(m)(0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import integrate

from .errors import DegeneracyError, NumericalError, ValidationError

ZERO_TOL = 1e-12
INDEX_TOL = 1e-300
MAX_MOMENT = 12


def _as_complex(fn):
    def wrapped(u):
        u = np.asarray(u, dtype=float)
        return np.asarray(fn(u), dtype=complex) * np.ones_like(u)
    return wrapped


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A Schwartz kernel given by ``fourier_eval(u) = phi_hat(u)``.

    ``vanishing_order`` is the number of leading moments known to vanish
    (``"all"`` for Lizorkin kernels).  ``moment_window`` is a half-width around
    ``u = 0`` on which ``phi_hat`` is real-analytic; moments are read off a
    Chebyshev interpolant there.  ``time_eval`` is an optional closed form of
    ``phi(t)``; otherwise the inverse transform is computed numerically.
    """

    fourier_eval: Callable[[np.ndarray], np.ndarray]
    label: str
    vanishing_order: Union[int, str] = 0
    symmetry: str = "none"
    support_hint: Optional[tuple] = None
    time_eval: Optional[Callable[[np.ndarray], np.ndarray]] = None
    moment_window: float = 0.5
    bandwidth: Optional[float] = None

    def __call__(self, u):
        return np.asarray(self.fourier_eval(np.asarray(u, dtype=float)), dtype=complex)

    @property
    def is_lizorkin(self) -> bool:
        return self.vanishing_order == "all"

    @property
    def is_wavelet(self) -> bool:
        return self.is_lizorkin or int(self.vanishing_order) >= 1

    def vanishes_through(self, m: int) -> bool:
        """True when ``mu_0 = ... = mu_m = 0`` by declaration."""
        return self.is_lizorkin or int(self.vanishing_order) > m

    def effective_bandwidth(self, tol: float = 1e-17) -> float:
        """A frequency ``U`` beyond which ``|phi_hat| < tol`` (both directions)."""
        return _bandwidth(self, tol)

    def time(self, t):
        """``phi(t) = (1/2pi) int phi_hat(u) exp(iut) du``."""
        t = np.asarray(t, dtype=float)
        if self.time_eval is not None:
            return np.asarray(self.time_eval(t), dtype=complex)
        return _time_by_trapezoid(self, t)

    def scaled(self, c: complex, label: Optional[str] = None) -> "KernelSpec":
        fe = self.fourier_eval
        te = self.time_eval
        return replace(self, fourier_eval=lambda u: c * fe(u),
                       time_eval=None if te is None else (lambda t: c * te(t)),
                       label=label or f"{c}*{self.label}")

    def reflected(self) -> "KernelSpec":
        """The kernel ``phi(-t)``, whose transform is ``phi_hat(-u)``."""
        fe = self.fourier_eval
        te = self.time_eval
        return replace(self, fourier_eval=lambda u: fe(-np.asarray(u)),
                       time_eval=None if te is None else (lambda t: te(-np.asarray(t))),
                       label=f"reflect({self.label})")

    def conjugated(self) -> "KernelSpec":
        """The kernel ``conj(phi(t))``, whose transform is ``conj(phi_hat(-u))``."""
        fe = self.fourier_eval
        te = self.time_eval
        return replace(self, fourier_eval=lambda u: np.conj(fe(-np.asarray(u))),
                       time_eval=None if te is None else (lambda t: np.conj(te(t))),
                       label=f"conj({self.label})")

    def __repr__(self):
        return f"KernelSpec({self.label!r}, vanishing_order={self.vanishing_order!r})"


# ---------------------------------------------------------------------------
# smooth building blocks

def _h(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = np.exp(-1.0 / v[pos])
    return out


def smooth_step(v):
    """C-infinity step: 0 for ``v <= 0``, 1 for ``v >= 1``."""
    a, b = _h(v), _h(1.0 - np.asarray(v, dtype=float))
    return a / (a + b)


def smooth_step_deriv(v):
    v = np.asarray(v, dtype=float)
    a, b = _h(v), _h(1.0 - v)
    da = np.zeros_like(v)
    db = np.zeros_like(v)
    m = (v > 0) & (v < 1)
    da[m] = a[m] / v[m] ** 2
    db[m] = b[m] / (1.0 - v[m]) ** 2
    out = np.zeros_like(v)
    out[m] = (da[m] * b[m] + a[m] * db[m]) / (a[m] + b[m]) ** 2
    return out


# ---------------------------------------------------------------------------
# atlas

def gaussian() -> KernelSpec:
    return KernelSpec(
        fourier_eval=lambda u: np.exp(-np.asarray(u) ** 2) + 0j,
        time_eval=lambda t: np.exp(-np.asarray(t) ** 2 / 4.0) / (2.0 * math.sqrt(math.pi)) + 0j,
        label="gaussian", vanishing_order=0, symmetry="even", moment_window=1.0,
        bandwidth=7.0)


def laplace() -> KernelSpec:
    """``phi_hat(-u) = exp(-u)`` for ``u >= -1``, smoothly cut off on ``u in [-2, -1]``.

    As a phi-transform kernel it maps a spectrum on ``[0, inf)`` to its
    Laplace transform: ``F f(x, y) = (1/2pi) int f_hat(u) exp(i(x+iy)u) du``.
    """
    def fe(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        m = u < 2.0
        out[m] = np.exp(np.minimum(u[m], 2.0)) * (1.0 - smooth_step(u[m] - 1.0))
        return out + 0j
    return KernelSpec(fourier_eval=fe, label="laplace", vanishing_order=0, symmetry="none",
                      moment_window=0.9, bandwidth=None)


def lizorkin_exp() -> KernelSpec:
    def fe(u):
        a = np.abs(np.asarray(u, dtype=float))
        out = np.zeros_like(a)
        m = a > 0
        out[m] = np.exp(-a[m] - 1.0 / a[m])
        return out + 0j
    return KernelSpec(fourier_eval=fe, label="lizorkin_exp", vanishing_order="all",
                      symmetry="even", support_hint=(0.0, math.inf), bandwidth=45.0)


def shifted_lizorkin(tau0: float) -> KernelSpec:
    if tau0 < 0:
        raise ValueError("tau0 must be non-negative")

    def fe(u):
        a = np.abs(np.asarray(u, dtype=float))
        out = np.zeros_like(a)
        m = a > tau0
        out[m] = np.exp(-a[m] - 1.0 / (a[m] - tau0))
        return out + 0j
    return KernelSpec(fourier_eval=fe, label=f"shifted_lizorkin:{tau0:g}", vanishing_order="all",
                      symmetry="even", support_hint=(tau0, math.inf), bandwidth=45.0 + tau0)


def lp_phi1() -> KernelSpec:
    """Smooth cutoff, 1 on ``|u| <= 1/2`` and 0 on ``|u| >= 1``."""
    return KernelSpec(
        fourier_eval=lambda u: 1.0 - smooth_step(2.0 * np.abs(np.asarray(u, dtype=float)) - 1.0) + 0j,
        label="lp_phi1", vanishing_order=0, symmetry="even", support_hint=(0.0, 1.0),
        moment_window=0.45, bandwidth=1.0)


def lp_psi1() -> KernelSpec:
    """``psi1_hat(u) = -u phi1_hat'(u)``, supported on ``1/2 <= |u| <= 1``."""
    def fe(u):
        a = np.abs(np.asarray(u, dtype=float))
        return 2.0 * a * smooth_step_deriv(2.0 * a - 1.0) + 0j
    return KernelSpec(fourier_eval=fe, label="lp_psi1", vanishing_order="all", symmetry="even",
                      support_hint=(0.5, 1.0), bandwidth=1.0)


def hermite(n: int) -> KernelSpec:
    """``psi_hat(u) = (iu)^n exp(-u^2)``: the n-th derivative of the Gaussian kernel.

    Moments ``0..n-1`` vanish and ``mu_n = (-1)^n n!``.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    from scipy.special import eval_hermite

    phase = 1j ** n

    def fe(u):
        u = np.asarray(u, dtype=float)
        return phase * (u ** n * np.exp(-u * u))

    def te(t):
        t = np.asarray(t, dtype=float)
        return ((-0.5) ** n * eval_hermite(n, t / 2.0) * np.exp(-t ** 2 / 4.0)
                / (2.0 * math.sqrt(math.pi)) + 0j)

    return KernelSpec(fourier_eval=fe, time_eval=te, label=f"hermite:{n}", vanishing_order=n,
                      symmetry="even" if n % 2 == 0 else "none", moment_window=1.0,
                      bandwidth=8.0)


def one_sided_gaussian() -> KernelSpec:
    """Degenerate example: ``exp(-u^2)`` on ``u > 0`` and zero on the negative ray."""
    def fe(u):
        u = np.asarray(u, dtype=float)
        return np.where(u > 0, np.exp(-u ** 2), 0.0) + 0j
    return KernelSpec(fourier_eval=fe, label="one_sided_gaussian", vanishing_order=0,
                      bandwidth=7.0)


ATLAS = {
    "gaussian": gaussian,
    "heat": laplace,
    "laplace": laplace,
    "lizorkin_exp": lizorkin_exp,
    "lp_phi1": lp_phi1,
    "lp_psi1": lp_psi1,
    "one_sided_gaussian": one_sided_gaussian,
}


@lru_cache(maxsize=None)
def get_kernel(name: str) -> KernelSpec:
    """Look up ``name`` in the atlas; ``shifted_lizorkin:tau`` and ``hermite:n`` take a parameter."""
    base, _, arg = name.partition(":")
    if base == "shifted_lizorkin":
        return shifted_lizorkin(float(arg or 1.0))
    if base == "hermite":
        return hermite(int(arg or 2))
    if base == "lp_pair":
        return lp_psi1()
    if base not in ATLAS:
        raise ValidationError(f"unknown kernel {name!r}; known: {sorted(ATLAS)}, shifted_lizorkin:tau, hermite:n")
    return ATLAS[base]()


# ---------------------------------------------------------------------------
# numerics shared by the operations

_BW_CACHE: dict = {}


def _bandwidth(kernel: KernelSpec, tol: float) -> float:
    key = (id(kernel), tol)
    if key in _BW_CACHE:
        return _BW_CACHE[key]
    if kernel.bandwidth is not None and tol >= 1e-17:
        U = kernel.bandwidth
    else:
        u = np.geomspace(1e-3, 1e4, 4000)
        vals = np.maximum(np.abs(kernel(u)), np.abs(kernel(-u)))
        above = np.nonzero(vals > tol)[0]
        U = float(u[above[-1] + 1]) if above.size and above[-1] + 1 < u.size else float(u[-1])
    _BW_CACHE[key] = U
    return U


_TIME_CACHE: dict = {}


def _time_by_trapezoid(kernel: KernelSpec, t: np.ndarray) -> np.ndarray:
    """Inverse transform by the trapezoid rule, spectrally accurate for smooth ``phi_hat``."""
    key = id(kernel)
    if key not in _TIME_CACHE:
        U = kernel.effective_bandwidth(1e-18)
        du = min(0.01, U / 4000.0)
        u = np.arange(-U, U + du, du)
        _TIME_CACHE[key] = (u, kernel(u) * du / (2 * math.pi))
    u, w = _TIME_CACHE[key]
    flat = t.ravel()
    out = np.empty(flat.size, dtype=complex)
    for s in range(0, flat.size, 256):
        blk = flat[s:s + 256]
        out[s:s + 256] = np.exp(1j * np.outer(blk, u)) @ w
    return out.reshape(t.shape)


# ---------------------------------------------------------------------------
# operations

def moment(kernel: KernelSpec, m: int) -> complex:
    """``mu_m = i^m phi_hat^(m)(0)`` from a Chebyshev interpolant around the origin."""
    if m < 0 or m > MAX_MOMENT:
        raise ValueError(f"moment order {m} unsupported (0..{MAX_MOMENT})")
    if kernel.vanishes_through(m):
        return 0j
    if kernel.symmetry == "even" and m % 2 == 1:
        return 0j
    h = kernel.moment_window
    deg = 30
    re = C.Chebyshev.interpolate(lambda u: kernel(u).real, deg, domain=[-h, h])
    im = C.Chebyshev.interpolate(lambda u: kernel(u).imag, deg, domain=[-h, h])
    d = complex(re.deriv(m)(0.0), im.deriv(m)(0.0)) if m else complex(re(0.0), im(0.0))
    return (1j ** m) * d


@dataclass(frozen=True)
class NondegeneracyReport:
    verdict: bool
    witness: dict
    tol: float
    grid_size: int


def _default_radial_grid(n: int = 256) -> np.ndarray:
    return np.geomspace(1e-3, 1e3, n)


def is_nondegenerate(kernel: KernelSpec, radial_grid=None, tol: float = ZERO_TOL) -> NondegeneracyReport:
    """Per-direction maximum of ``|phi_hat(r w)|``; the grid is doubled until the verdict repeats twice."""
    grid = _default_radial_grid() if radial_grid is None else np.asarray(radial_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 128 or np.any(grid <= 0):
        raise ValueError("radial grid must hold at least 128 positive radii")
    lo, hi = grid.min(), grid.max()
    verdicts = []
    n = grid.size
    g = grid
    while True:
        witness = {d: float(np.max(np.abs(kernel(d * g)))) for d in (1, -1)}
        verdicts.append(all(w > tol for w in witness.values()))
        if len(verdicts) >= 3 and verdicts[-1] == verdicts[-2] == verdicts[-3]:
            break
        n *= 2
        g = np.geomspace(lo, hi, n)
    return NondegeneracyReport(verdicts[-1], witness, tol, n)


@dataclass(frozen=True)
class IndexResult:
    tau: float
    resolution: float
    per_direction: dict


def nondegeneracy_index(kernel: KernelSpec, tol: float = INDEX_TOL, r_max: float = 1e3) -> IndexResult:
    """Largest radius up to which ``phi_hat`` vanishes identically along some ray.

    A coarse scan brackets the first radius with ``|phi_hat| > tol``; bisection
    then shrinks the bracket to ``resolution``.
    """
    if not is_nondegenerate(kernel).verdict:
        raise DegeneracyError(f"{kernel.label} is degenerate")
    per = {}
    res = 0.0
    for d in (1, -1):
        r = np.concatenate([[0.0], np.geomspace(1e-6, r_max, 2000)])
        a = np.abs(kernel(d * r))
        hit = np.nonzero(a > tol)[0]
        if hit.size == 0:
            raise DegeneracyError(f"{kernel.label} vanishes on direction {d}")
        j = hit[0]
        if j == 0:
            per[d] = 0.0
            continue
        lo, hi = r[j - 1], r[j]
        while hi - lo > 1e-9 * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if abs(complex(kernel(np.array([d * mid]))[0])) > tol:
                hi = mid
            else:
                lo = mid
        per[d] = float(lo)
        res = max(res, hi - lo)
    return IndexResult(max(per.values()), res, per)


@dataclass(frozen=True)
class StrongNondegeneracy:
    N: int
    r: float
    C: float


def strong_nondegeneracy(kernel: KernelSpec, r: float = 0.5, n_max: int = 12):
    """Smallest ``N`` with ``C |u|^N <= |phi_hat(u)|`` on ``0 < |u| <= r``, or ``None``.

    ``C`` is the minimum of ``|phi_hat(u)|/|u|^N`` on a grid reaching down to
    ``1e-8 r``; a candidate is rejected when that minimum keeps shrinking as
    the grid approaches the origin (so the bound is not uniform).
    """
    inner = np.geomspace(1e-8 * r, r, 4000)
    outer = inner[inner >= 1e-3 * r]
    vals = {d: np.abs(kernel(d * inner)) for d in (1, -1)}
    at0 = abs(complex(kernel(np.array([0.0]))[0]))
    for N in range(n_max + 1):
        mins_in, mins_out = [], []
        for d in (1, -1):
            q = vals[d] / inner ** N
            mins_in.append(q.min())
            mins_out.append(q[inner >= 1e-3 * r].min())
        c_in, c_out = min(mins_in), min(mins_out)
        if N == 0:
            c_in = min(c_in, at0)
        if c_in > 1e-300 and c_in >= 0.5 * c_out:
            return StrongNondegeneracy(N, r, float(c_in))
    return None


def _log_integral(fn, lo: float, hi: float, epsabs: float, epsrel: float):
    s0, s1 = math.log(lo), math.log(hi)
    opts = dict(limit=500, epsabs=epsabs, epsrel=epsrel)
    re, ere = integrate.quad(lambda s: fn(math.exp(s)).real, s0, s1, **opts)
    im, eim = integrate.quad(lambda s: fn(math.exp(s)).imag, s0, s1, **opts)
    return complex(re, im), math.hypot(ere, eim)


def calibration_constant(psi: KernelSpec, eta: KernelSpec, direction: int = 1,
                         epsabs: float = 1e-15, epsrel: float = 1e-12) -> complex:
    """``c(w) = int_0^inf conj(psi_hat(r w)) eta_hat(r w) dr / r`` by quadrature in ``log r``."""
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    for k in (psi, eta):
        if abs(moment(k, 0)) > 1e-10:
            raise ValueError(f"{k.label} is not a wavelet (mu_0 != 0)")
    U = max(psi.effective_bandwidth(), eta.effective_bandwidth())

    def g(r):
        u = np.array([direction * r])
        return complex(np.conj(psi(u)[0]) * eta(u)[0])

    lo = 1e-12
    pieces = [lo]
    for k in (psi, eta):
        if k.support_hint is not None:
            pieces += [v for v in k.support_hint if lo < v < U]
    pieces = sorted(set(pieces + [U]))
    total, err = 0j, 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        v, e = _log_integral(g, a, b, epsabs, epsrel)
        total += v
        err += e
    if not np.isfinite(total.real) or err > 1e-6 * max(abs(total), 1e-12) + 1e-12:
        raise NumericalError(f"calibration quadrature did not converge (value {total}, error {err})")
    return total


def make_reconstruction_wavelet(psi: KernelSpec) -> KernelSpec:
    """``eta_hat(r w) = psi_hat(r w) / c_{psi,psi}(w)`` so that ``c_{psi,eta} = 1`` on both rays."""
    if not is_nondegenerate(psi).verdict:
        raise DegeneracyError(f"{psi.label} is degenerate; no reconstruction wavelet exists")
    cp = calibration_constant(psi, psi, 1).real
    cm = calibration_constant(psi, psi, -1).real
    base = psi.fourier_eval
    base_t = psi.time_eval

    if abs(cp - cm) <= 1e-12 * max(abs(cp), abs(cm)):
        te = None if base_t is None else (lambda t: base_t(t) / cp)
        fe = lambda u: base(u) / cp
    else:
        te = None

        def fe(u):
            u = np.asarray(u, dtype=float)
            return base(u) / np.where(u >= 0, cp, cm)
    return replace(psi, fourier_eval=fe, time_eval=te, label=f"recon({psi.label})")
