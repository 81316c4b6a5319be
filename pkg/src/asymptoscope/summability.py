"""(rho)-summability, Cesaro means, the Littlewood Tauberian harness and Laplace profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import special

from .asymptotics import CONSTANT, SlowVariationModel, eval_sv
from .errors import NumericalError, ValidationError
from .transform import AtomicSpectrum, TWO_PI


@dataclass(frozen=True, eq=False)
class SummabilityKernel:
    """``rho`` on ``[0, inf)`` with ``rho(0) = 1`` and (at least) exponential decay ``exp(-decay u)``."""

    rho: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    decay: float = 1.0

    def __call__(self, u):
        return self.rho(np.asarray(u, dtype=float))

    def cutoff(self, y: float, q: float, tol: float = 1e-18) -> int:
        """Index beyond which ``sum_n n^q rho(y n)`` is below ``tol`` (integral tail bound)."""
        # tail <= int_N^inf t^q (1 + y t) exp(-decay y t) dt; solve on a doubling search
        N = max(16, int(1.0 / y))
        while True:
            u = self.decay * y * N
            bound = (N ** q) * (1 + y * N) * math.exp(-u) / (self.decay * y) * (1 + q / max(u, 1e-300))
            if bound < tol or N > 10 ** 9:
                return N
            N *= 2


def abel() -> SummabilityKernel:
    return SummabilityKernel(lambda u: np.exp(-u), "abel", 1.0)


def lambert() -> SummabilityKernel:
    def rho(u):
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        small = u < 1e-4
        s = u[small]
        out[small] = 1.0 - s / 2.0 + s ** 2 / 12.0 - s ** 4 / 720.0
        big = ~small
        out[big] = u[big] / np.expm1(u[big])
        return out
    return SummabilityKernel(rho, "lambert", 0.999)


KERNELS = {"abel": abel, "lambert": lambert}


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """``c_n`` for ``n >= start`` with caller-certified growth ``|c_n| <= C n^q``."""

    fn: Callable[[np.ndarray], np.ndarray]
    start: int = 0
    q: float = 0.0
    label: str = "series"

    def __call__(self, n):
        return np.asarray(self.fn(np.asarray(n, dtype=float)), dtype=complex) * np.ones(np.shape(n))

    def block(self, a: int, b: int) -> np.ndarray:
        return self(np.arange(a, b, dtype=np.int64))

    def partial_sums(self, N: int) -> np.ndarray:
        """``S_m = sum_{start <= n <= start + m} c_n`` for ``m = 0..N-1``."""
        return np.cumsum(self.block(self.start, self.start + N))


def series(name: str) -> CoefficientSeries:
    """Built-in coefficient streams used by the harness and the CLI."""
    table = {
        "alt-harmonic": CoefficientSeries(lambda n: (-1.0) ** (n + 1) / n, 1, 0.0, "alt-harmonic"),
        "grandi": CoefficientSeries(lambda n: (-1.0) ** n, 0, 0.0, "grandi"),
        "alt-linear": CoefficientSeries(lambda n: (-1.0) ** n * n, 0, 1.0, "alt-linear"),
        "ones": CoefficientSeries(lambda n: np.ones_like(n), 0, 0.0, "ones"),
        "geometric": CoefficientSeries(lambda n: 0.5 ** n, 0, 0.0, "geometric"),
        "loglog": CoefficientSeries(lambda n: 1.0 / ((n + 1) * np.log(n + 2)), 0, 0.0, "loglog"),
        "leibniz": CoefficientSeries(lambda n: (-1.0) ** n / (2 * n + 1), 0, 0.0, "leibniz"),
    }
    if name not in table:
        raise ValidationError(f"unknown series {name!r}; known: {sorted(table)}")
    return table[name]


def rho_sum(coeffs: CoefficientSeries, kernel: SummabilityKernel, y: float, block: int = 1 << 20) -> complex:
    """``sum_{n >= start} c_n rho(y n)``, truncated where the certified tail drops below ``1e-18``."""
    if not y > 0:
        raise ValidationError("y must be positive")
    if coeffs.q > 50:
        raise ValidationError("growth exponent incompatible with the kernel's decay")
    N = kernel.cutoff(y, coeffs.q)
    total = 0j
    parts = []
    for a in range(coeffs.start, coeffs.start + N, block):
        b = min(a + block, coeffs.start + N)
        n = np.arange(a, b, dtype=np.int64)
        parts.append(np.sum(coeffs.block(a, b) * kernel(y * n)))
    # add small (tail) blocks first
    for p in reversed(parts):
        total += p
    return complex(total)


def _neville_zero(ys: Sequence[float], vals: Sequence[complex]) -> complex:
    """Polynomial extrapolation of ``vals(y)`` to ``y = 0``."""
    ys = list(ys)
    P = list(vals)
    n = len(ys)
    for m in range(1, n):
        for i in range(n - m):
            P[i] = (ys[i] * P[i + 1] - ys[i + m] * P[i]) / (ys[i] - ys[i + m])
    return P[0]


@dataclass(frozen=True)
class LimitReport:
    beta: complex
    converged: bool
    spread: float
    samples: tuple = ()


def rho_limit(coeffs: CoefficientSeries, kernel: SummabilityKernel, y_grid: Optional[Sequence[float]] = None,
              tol: float = 1e-6, order: int = 5) -> LimitReport:
    """Extrapolate ``rho_sum`` to ``y = 0``; converged when the last two extrapolants agree within ``tol``."""
    ys = np.asarray(y_grid if y_grid is not None else 2.0 ** -np.arange(3, 17), dtype=float)
    if np.any(np.diff(ys) >= 0):
        raise ValidationError("y grid must decrease to 0")
    vals = [rho_sum(coeffs, kernel, float(y)) for y in ys]
    ex = []
    for i in range(order, len(ys) + 1):
        ex.append(_neville_zero(ys[i - order:i], vals[i - order:i]))
    if len(ex) < 2:
        raise ValidationError("y grid too short for extrapolation")
    spread = abs(ex[-1] - ex[-2])
    ok = bool(np.isfinite(spread) and spread < tol and abs(ex[-1]) < 1e12)
    return LimitReport(complex(ex[-1]), ok, float(spread), tuple(zip(ys.tolist(), vals)))


def abel_limit(coeffs: CoefficientSeries, y_grid: Optional[Sequence[float]] = None, tol: float = 1e-6) -> LimitReport:
    return rho_limit(coeffs, abel(), y_grid, tol)


def cesaro_mean(partial_sums: Sequence[complex], k: int) -> np.ndarray:
    """``k``-fold iterated arithmetic means of the partial sums (``k = 0`` returns them unchanged)."""
    s = np.asarray(partial_sums, dtype=complex)
    if s.size == 0:
        raise ValidationError("no partial sums")
    if k < 0 or k > 4:
        raise ValidationError("Cesaro order must lie in 0..4")
    for _ in range(k):
        s = np.cumsum(s) / np.arange(1, s.size + 1)
    return s


def cesaro_binomial_mean(partial_sums: Sequence[complex], k: int) -> np.ndarray:
    """Cesaro ``(C, k)`` means ``sum_j binom(n - j + k - 1, k - 1) S_j / binom(n + k, k)``.

    They sum the same series as the iterated means, but their error has a
    plain expansion in ``1/n`` (no ``log n / n`` terms), which Richardson
    extrapolation needs.
    """
    s = np.asarray(partial_sums, dtype=complex)
    if s.size == 0:
        raise ValidationError("no partial sums")
    if k < 0 or k > 4:
        raise ValidationError("Cesaro order must lie in 0..4")
    n = np.arange(s.size, dtype=float)
    for _ in range(k):
        s = np.cumsum(s)
    return s / special.binom(n + k, k)


def cesaro_limit(coeffs: CoefficientSeries, k: int, N: int = 1 << 18, tol: float = 1e-6) -> LimitReport:
    """Limit of the ``(C, k)`` means, with Richardson in ``1/N`` over ``N, N/2, N/4, N/8``."""
    means = cesaro_binomial_mean(coeffs.partial_sums(N), k)
    idx = [N // 8 - 1, N // 4 - 1, N // 2 - 1, N - 1]
    v = [means[i] for i in idx]
    r1 = [2 * v[i + 1] - v[i] for i in range(3)]
    r2 = [(4 * r1[i + 1] - r1[i]) / 3 for i in range(2)]
    spread = abs(r2[1] - r2[0])
    tail = means[N // 2:]
    wobble = float(np.max(np.abs(tail - tail[-1])))
    ok = bool(spread < tol and wobble < 1e3 * max(tol, 1.0 / N))
    return LimitReport(complex(r2[-1]), ok, float(spread))


@dataclass(frozen=True)
class LittlewoodReport:
    abel: LimitReport
    abel_ok: bool
    tauberian_constant: float
    tauberian_ok: bool
    partial_limit: complex
    partial_ok: bool
    verdict: str

    def to_dict(self) -> dict:
        c = lambda z: [z.real, z.imag]
        return {"abel_limit": c(self.abel.beta), "abel_converged": self.abel.converged,
                "abel_ok": self.abel_ok, "tauberian_constant": self.tauberian_constant,
                "tauberian_ok": self.tauberian_ok, "partial_limit": c(self.partial_limit),
                "partial_ok": self.partial_ok, "verdict": self.verdict}


def littlewood_check(coeffs: CoefficientSeries, beta: complex, tol: float = 1e-6,
                     N: int = 1 << 20) -> LittlewoodReport:
    """(a) Abel limit equals ``beta``; (b) ``sup n |c_n|`` stays bounded; (c) partial sums tend to ``beta``.

    (b) compares the supremum over ``n <= N`` with that over ``n <= N/64``.
    (c) extrapolates the even-indexed partial sums in ``1/N`` and requires
    the tail ``max_{N/2 <= n <= N} |S_n - limit|`` to shrink with ``N``.
    """
    ab = abel_limit(coeffs, tol=tol)
    abel_ok = ab.converged and abs(ab.beta - beta) < tol
    n = np.arange(max(coeffs.start, 1), N + 1)
    nc = n * np.abs(coeffs(n))
    sup_all, sup_early = float(nc.max()), float(nc[: max(1, n.size // 64)].max())
    taub_ok = bool(np.isfinite(sup_all) and sup_all <= 1.05 * sup_early)
    S = coeffs.partial_sums(N)
    Ns = [N // 8, N // 4, N // 2, N]
    ev = [S[m - 1] if (m - 1) % 2 == 0 else S[m - 2] for m in Ns]
    r1 = [2 * ev[i + 1] - ev[i] for i in range(3)]
    r2 = [(4 * r1[i + 1] - r1[i]) / 3 for i in range(2)]
    lim = complex(r2[-1])
    tail_hi = float(np.max(np.abs(S[N // 2:] - lim)))
    tail_lo = float(np.max(np.abs(S[N // 4:N // 2] - lim)))
    partial_ok = bool(tail_hi < 0.75 * tail_lo + 1e-15 and tail_hi < 1e-3 and abs(lim - beta) < tol)
    if abel_ok and taub_ok:
        verdict = "tauberian: convergence follows" + ("" if partial_ok else " (partial sums disagree!)")
    elif not ab.converged:
        verdict = "no claim: not Abel summable"
    elif not taub_ok:
        verdict = "no claim: Tauberian condition fails"
    else:
        verdict = "no claim: Abel limit differs from beta"
    return LittlewoodReport(ab, bool(abel_ok), sup_all, taub_ok, lim, partial_ok, verdict)


# ---------------------------------------------------------------------------
# Laplace profiles on the half line

@dataclass(frozen=True)
class PowerDensity:
    """``h(u) = coefficient * u^a`` on ``u > 0`` (``a = 0`` is the Heaviside measure)."""

    a: float
    coefficient: complex = 1.0
    label: str = "power"

    def laplace(self, z):
        z = np.asarray(z, dtype=complex)
        return self.coefficient * special.gamma(self.a + 1.0) / (-1j * z) ** (self.a + 1.0)


@dataclass(frozen=True)
class HalfLineAtoms:
    """``h = sum_n w_n delta(u - u_n)`` with all ``u_n >= 0``."""

    points: np.ndarray
    weights: np.ndarray
    label: str = "atoms"

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.points, dtype=float))
        if np.any(p < 0):
            raise ValidationError("support must lie in [0, inf)")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", np.atleast_1d(np.asarray(self.weights, dtype=complex)))

    def laplace(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.exp(1j * np.outer(z, self.points)) @ self.weights

    def as_spectrum(self) -> AtomicSpectrum:
        """The distribution whose Fourier transform is ``2 pi h`` (so its phi-transform is ``L{h}``)."""
        return AtomicSpectrum(self.points, TWO_PI * self.weights, label=self.label)


def laplace_transform(h, z):
    """``L{h; z} = <h(u), exp(izu)>`` for ``Im z > 0``."""
    if isinstance(h, AtomicSpectrum):
        if np.any(h.frequencies < 0):
            raise ValidationError("support must lie in [0, inf)")
        h = HalfLineAtoms(h.frequencies, h.amplitudes[:, 0] / TWO_PI, h.label)
    return h.laplace(z)


def boundary_points(kappa: float, n_sigma: int = 200, n_top: int = 101, sigma_min: float = 1e-6):
    """Sample of the boundary of ``{|x| < sigma^kappa, 0 < sigma < 1}``: two side curves plus the top edge."""
    if not 0 <= kappa < 1:
        raise ValidationError("kappa must lie in [0, 1)")
    s = np.geomspace(sigma_min, 1.0, n_sigma)
    side = s ** kappa
    xt = np.linspace(-1.0, 1.0, n_top)
    x = np.concatenate([side, -side, xt])
    sig = np.concatenate([s, s, np.ones_like(xt)])
    return x, sig


@dataclass(frozen=True)
class LaplaceProfile:
    eps: np.ndarray
    S: np.ndarray
    k: int
    alpha: float
    kappa: float
    omega: float
    slope: float
    bounded: bool

    def to_dict(self) -> dict:
        return {"eps": self.eps.tolist(), "S": self.S.tolist(), "k": self.k, "alpha": self.alpha,
                "kappa": self.kappa, "omega": self.omega, "slope": self.slope, "bounded": self.bounded}


def laplace_profile(h, alpha: float, kappa: float = 0.0, k: int = 0, eps_grid=None, omega: float = 1.0,
                    L_model: SlowVariationModel = CONSTANT) -> LaplaceProfile:
    """``S(eps) = sup sigma^k eps^(1+alpha) |L{h; eps(x + i sigma omega)}| / L(1/eps)`` over the boundary.

    Bounded means the fitted log-log slope of ``S`` is not negative beyond
    ``0.05`` (no growth as ``eps -> 0``).
    """
    if not omega > 0:
        raise ValidationError("omega must be positive")
    eps = np.asarray(eps_grid if eps_grid is not None else np.geomspace(1e-4, 1.0, 17), dtype=float)
    x, sig = boundary_points(kappa)
    S = []
    for e in eps:
        z = e * (x + 1j * sig * omega)
        Lval = 1.0 if L_model.family == "constant" else eval_sv(L_model, 1.0 / e)
        vals = np.abs(laplace_transform(h, z)).ravel()
        S.append(float(np.max(sig ** k * e ** (1 + alpha) * vals) / Lval))
    S = np.array(S)
    slope = float(np.polyfit(np.log(eps), np.log(S), 1)[0])
    return LaplaceProfile(eps, S, k, alpha, kappa, omega, slope, bool(slope > -0.05))
