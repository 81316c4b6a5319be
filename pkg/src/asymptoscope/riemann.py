"""Riemann distributions ``R_beta(t) = sum n^(-2 beta) exp(i pi n^2 t)`` at rational points.

Rationals are split by the theta group (generated by ``z -> z + 2`` and
``z -> -1/z``) into the orbit of 0 (``S0``: one of ``p, q`` even) and the
orbit of 1 (``S1``: both odd).  With ``a_n = exp(i pi r n^2)``, which has
period ``P = 2q``, the module computes the mean ``p_r`` of ``a_n``, the
generalized Euler constant ``gamma_r``, the Dirichlet series
``zeta_r(z) = sum a_n n^(-z)`` and the weak expansion of ``R_beta(r + eps t)``.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd
from typing import Optional, Sequence

import mpmath as mp
import numpy as np

from .errors import BranchConflictError, NumericalError, ValidationError
from .kernels import KernelSpec, moment

LETTERS = ("K2", "K-2", "U")


@dataclass(frozen=True)
class ThetaWord:
    """Letters applied left to right to the base point (0 or 1).

    ``K2: z -> z + 2``, ``K-2: z -> z - 2``, ``U: z -> -1/z``.
    """

    letters: tuple = ()

    def __post_init__(self):
        for a in self.letters:
            if a not in LETTERS:
                raise ValidationError(f"unknown theta-group letter {a!r}")

    def apply(self, z: Fraction) -> Fraction:
        z = Fraction(z)
        for a in self.letters:
            if a == "K2":
                z += 2
            elif a == "K-2":
                z -= 2
            else:
                if z == 0:
                    raise ValidationError("U is undefined at 0")
                z = -1 / z
        return z

    def compressed(self) -> str:
        out, prev, count = [], None, 0
        for a in list(self.letters) + [None]:
            if a == prev:
                count += 1
                continue
            if prev is not None:
                out.append(prev if count == 1 else f"{prev}^{count}")
            prev, count = a, 1
        return " ".join(out) or "id"

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class RationalPoint:
    p: int
    q: int
    parity_class: str
    theta_word: ThetaWord
    denominators: tuple = ()

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def base(self) -> Fraction:
        return Fraction(0 if self.parity_class == "S0" else 1)

    @property
    def period(self) -> int:
        return 2 * self.q

    def __str__(self):
        return f"{self.p}/{self.q}"

    def to_dict(self) -> dict:
        return {"r": f"{self.p}/{self.q}", "class": self.parity_class,
                "theta_word": list(self.theta_word.letters), "word": self.theta_word.compressed()}


def classify_rational(p: int, q: int = 1) -> RationalPoint:
    """Reduce ``p/q``, assign its parity class and a theta-group word from the base point.

    Reduction: translate by ``K^(+-2)`` into ``(-1, 1]``, stop at 0 or 1,
    otherwise apply ``U``; every ``U`` step strictly lowers the denominator.
    """
    if q < 1:
        raise ValidationError("q must be positive")
    g = gcd(p, q)
    p, q = p // g, q // g
    r = Fraction(p, q)
    steps = []
    dens = [q]
    z = r
    while True:
        k = 0
        while z > 1:
            z -= 2
            k -= 1
        while z <= -1:
            z += 2
            k += 1
        steps += ["K2"] * k if k > 0 else ["K-2"] * (-k)
        if z == 0 or z == 1:
            break
        z = -1 / z
        steps.append("U")
        if z.denominator >= dens[-1]:
            raise NumericalError("theta reduction failed to lower the denominator")
        dens.append(z.denominator)
    inverse = {"K2": "K-2", "K-2": "K2", "U": "U"}
    word = ThetaWord(tuple(inverse[a] for a in reversed(steps)))
    cls = "S1" if (p % 2 == 1 and q % 2 == 1) else "S0"
    base = Fraction(0 if z == 0 else 1)
    if (cls == "S0") != (base == 0):
        raise NumericalError(f"orbit of {r} disagrees with its parity class")
    if word.apply(base) != r:
        raise NumericalError("theta word does not reproduce the rational")
    return RationalPoint(p, q, cls, word, tuple(dens))


def _as_point(r) -> RationalPoint:
    if isinstance(r, RationalPoint):
        return r
    fr = Fraction(r)
    return classify_rational(fr.numerator, fr.denominator)


def phase_indices(r: RationalPoint) -> np.ndarray:
    """Exact exponents ``k_n = p n^2 mod 2q`` for ``n = 1..2q``; ``a_n = exp(i pi k_n / q)``."""
    return np.array([(r.p * n * n) % (2 * r.q) for n in range(1, 2 * r.q + 1)], dtype=np.int64)


def period_coefficients(r: RationalPoint) -> np.ndarray:
    k = phase_indices(r)
    return np.exp(1j * math.pi * k / r.q)


def gauss_mean(r) -> complex:
    """Mean of ``exp(i pi r n^2)`` over one period, summed by exact root-of-unity counts."""
    r = _as_point(r)
    counts = np.bincount(phase_indices(r), minlength=2 * r.q)
    roots = [cmath.exp(1j * math.pi * k / r.q) for k in range(2 * r.q)]
    total = complex(math.fsum(c * z.real for c, z in zip(counts, roots)),
                    math.fsum(c * z.imag for c, z in zip(counts, roots)))
    out = total / (2 * r.q)
    return complex(0.0 if abs(out.real) < 1e-15 else out.real, 0.0 if abs(out.imag) < 1e-15 else out.imag)


@dataclass(frozen=True)
class PConstant:
    value: complex
    defined: bool
    oracle: complex
    mismatch: float


def p_constant(r, tol: float = 1e-10) -> PConstant:
    """Fold the theta word through ``p_0 = 1``, ``p_{z+2} = p_z``, ``p_{-1/z} = sqrt(-i/z) p_z``.

    Principal square roots throughout; the result is checked against
    ``gauss_mean`` and a disagreement raises ``BranchConflictError``.
    """
    r = _as_point(r)
    oracle = gauss_mean(r)
    if r.parity_class == "S1":
        return PConstant(0j, False, oracle, abs(oracle))
    val = 1 + 0j
    z = Fraction(0)
    for a in r.theta_word.letters:
        if a == "K2":
            z += 2
        elif a == "K-2":
            z -= 2
        else:
            val *= cmath.sqrt(-1j / float(z))
            z = -1 / z
    mism = abs(val - oracle)
    if mism > tol:
        raise BranchConflictError(f"p_r at {r}: folded {val} vs Gauss mean {oracle}", val, oracle)
    return PConstant(val, True, oracle, mism)


# ---------------------------------------------------------------------------
# exact branch check in cyclotomic arithmetic

def _poly_divmod(num: list, den: list) -> tuple:
    """Integer polynomial division by a monic ``den``; coefficients low degree first."""
    num = list(num)
    out = [0] * max(len(num) - len(den) + 1, 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    return out, num[:len(den) - 1]


@functools.lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple:
    """Integer coefficients of the n-th cyclotomic polynomial, low degree first."""
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num, rem = _poly_divmod(num, list(cyclotomic_poly(d)))
            if any(rem):
                raise NumericalError(f"cyclotomic division left a remainder at n = {n}")
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return tuple(num)


def cyclotomic_is_zero(coeffs: Sequence[int], n: int) -> bool:
    """Whether ``sum_k coeffs[k] zeta^k`` vanishes for a primitive n-th root of unity ``zeta``."""
    reduced = [0] * n
    for k, c in enumerate(coeffs):
        reduced[k % n] += int(c)
    phi = list(cyclotomic_poly(n))
    if len(reduced) < len(phi):
        return not any(reduced)
    _, rem = _poly_divmod(reduced, phi)
    return not any(rem)


def folded_phase(r) -> tuple:
    """The theta-word fold of ``p_r`` in exact form ``(k, m)`` with ``p_r = exp(i pi k / 4) sqrt(m)``.

    Each ``U`` step at a real rational ``z`` multiplies by ``sqrt(-i/z)``,
    whose argument is ``-pi/4`` for ``z > 0`` and ``+pi/4`` for ``z < 0``.
    """
    r = _as_point(r)
    if r.parity_class == "S1":
        raise ValidationError(f"{r} lies in S1, where the fold is not defined")
    k, m, z = 0, Fraction(1), Fraction(0)
    for a in r.theta_word.letters:
        if a == "K2":
            z += 2
        elif a == "K-2":
            z -= 2
        else:
            k += -1 if z > 0 else 1
            m /= abs(z)
            z = -1 / z
    return k % 8, m


def gauss_matches(r, k: int, m: Fraction) -> bool:
    """Exact test of ``gauss_mean(r) == exp(i pi k / 4) sqrt(m)``.

    With ``G = sum_{n=1}^{2q} zeta_{2q}^(p n^2)`` the claim reads
    ``G exp(-i pi k / 4) = 2q sqrt(m)``.  Its square ``G^2 i^(-k) = 4 q^2 m``
    is an identity in the integers of the N-th cyclotomic field
    (``N = lcm(2q, 4)``) and is decided by reduction modulo the cyclotomic
    polynomial.  The square fixes the value up to sign; the sign is read off
    the real part of ``G exp(-i pi k / 4)``, which is ``2q sqrt(m)`` in size.
    """
    r = _as_point(r)
    P = 2 * r.q
    N = P * 4 // gcd(P, 4)
    target = 4 * r.q * r.q * Fraction(m)
    if target.denominator != 1:
        return False  # G^2 i^(-k) is an algebraic integer
    g = np.bincount(phase_indices(r) * (N // P), minlength=N).astype(object)
    sq = [0] * N
    for a, ca in enumerate(g):
        if ca:
            for b, cb in enumerate(g):
                if cb:
                    sq[(a + b) % N] += ca * cb
    shift = (-k * (N // 4)) % N
    coeffs = [0] * N
    for a, c in enumerate(sq):
        coeffs[(a + shift) % N] += c
    coeffs[0] -= int(target)
    if not cyclotomic_is_zero(coeffs, N):
        return False
    G = sum(c * cmath.exp(1j * math.pi * a / r.q) for a, c in enumerate(np.bincount(phase_indices(r), minlength=P)))
    return (G * cmath.exp(-1j * math.pi * k / 4)).real > 0


def gauss_mean_vanishes(r) -> bool:
    """Exact test of ``gauss_mean(r) == 0`` in the 2q-th cyclotomic field."""
    r = _as_point(r)
    return cyclotomic_is_zero(np.bincount(phase_indices(r), minlength=2 * r.q).tolist(), 2 * r.q)


def branch_consistent(r) -> bool:
    """Exact agreement of the theta-word fold with the Gauss mean (``S0``), or a vanishing mean (``S1``)."""
    r = _as_point(r)
    if r.parity_class == "S1":
        return gauss_mean_vanishes(r)
    return gauss_matches(r, *folded_phase(r))


# ---------------------------------------------------------------------------
# generalized Euler constant

@dataclass(frozen=True)
class GammaEstimate:
    value: complex
    error: float
    closed_form: complex
    levels: tuple


def _partial_harmonic(coeff: np.ndarray, N: int) -> complex:
    P = coeff.size
    n = np.arange(1, N + 1, dtype=np.float64)
    a = coeff[(np.arange(N)) % P]
    # sum block-wise in reverse (small terms first) to limit round-off
    terms = (a / n)[::-1]
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def gamma_closed_form(r) -> complex:
    """``gamma_r = p gamma - (1/P) sum_j (a_j - p) digamma(j/P)`` (periodic-coefficient identity)."""
    r = _as_point(r)
    a = period_coefficients(r)
    P = a.size
    pr = a.mean()
    with mp.workdps(30):
        s = mp.fsum((complex(a[j - 1]) - complex(pr)) * mp.digamma(mp.mpf(j) / P) for j in range(1, P + 1))
        val = complex(pr) * mp.euler - s / P
    return complex(val)


def gamma_constant(r, n_periods: int = 2 ** 12, levels: int = 4) -> GammaEstimate:
    """``gamma_r = lim (sum_{n<=N} a_n / n - p_r log N)`` by partial sums and Richardson in ``1/N``.

    ``N`` runs over whole periods ``N = m P`` with ``m = n_periods * 2^j``;
    the error estimate is the spread of the last two extrapolants.
    """
    r = _as_point(r)
    if r.parity_class != "S0":
        raise ValidationError("gamma_r is defined for S0 points")
    a = period_coefficients(r)
    pr = a.mean()
    P = a.size
    Ns = [P * n_periods * 2 ** j for j in range(levels)]
    raw = []
    for N in Ns:
        raw.append(_partial_harmonic(a, N) - pr * math.log(N))
    table = [raw]
    for k in range(1, levels):
        prev = table[-1]
        fac = 2.0 ** k
        table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1) for i in range(len(prev) - 1)])
    best = table[-1][-1]
    err = abs(table[-1][-1] - table[-2][-1])
    if not np.isfinite(best.real) or err > 1e-6:
        raise NumericalError(f"gamma_r extrapolation did not settle (spread {err:.2e})")
    return GammaEstimate(best, err, gamma_closed_form(r), tuple(Ns))


# ---------------------------------------------------------------------------
# zeta_r

@dataclass(frozen=True)
class ZetaEvaluation:
    r: RationalPoint
    z: complex
    value: complex
    method: str
    error_estimate: float
    order: Optional[int] = None

    def to_dict(self) -> dict:
        return {"r": str(self.r), "z": [self.z.real, self.z.imag],
                "value": [self.value.real, self.value.imag], "method": self.method,
                "order": self.order, "error_estimate": self.error_estimate}


def _zeta_hurwitz_mp(r: RationalPoint, z, dps: int = 30):
    """``P^-z sum_j a_j zeta(z, j/P)`` as an mpmath number at ``dps`` digits (call inside ``workdps``)."""
    k = phase_indices(r)
    P = k.size
    a = [mp.expjpi(mp.mpf(int(kk)) / r.q) for kk in k]
    pr = mp.fsum(a) / P
    zz = mp.mpc(z)
    if abs(complex(z) - 1) < 1e-300:
        if abs(complex(pr)) > 1e-12:
            raise ValidationError("zeta_r has a pole at z = 1 for S0 points")
        return -mp.fsum(a[j - 1] * mp.digamma(mp.mpf(j) / P) for j in range(1, P + 1)) / P
    s = mp.fsum(a[j - 1] * mp.zeta(zz, mp.mpf(j) / P) for j in range(1, P + 1))
    return mp.power(P, -zz) * s


def _zeta_hurwitz(r: RationalPoint, z: complex, dps: int = 30) -> complex:
    with mp.workdps(dps):
        return complex(_zeta_hurwitz_mp(r, z, dps))


def _p_constant_mp(r: RationalPoint):
    """The folded ``p_r`` at the current mpmath precision."""
    if r.parity_class == "S1":
        return mp.mpc(0)
    val = mp.mpc(1)
    z = Fraction(0)
    for a in r.theta_word.letters:
        if a == "K2":
            z += 2
        elif a == "K-2":
            z -= 2
        else:
            val *= mp.sqrt(mp.mpc(0, -1) / mp.mpf(z.numerator) * z.denominator)
            z = -1 / z
    return val


def _moment_mp(kernel: KernelSpec, m: int):
    if kernel.label == "gaussian":
        return mp.mpf(0) if m % 2 else mp.factorial(m) / mp.factorial(m // 2)
    return mp.mpc(complex(moment(kernel, m)))


def _zeta_direct(r: RationalPoint, z: complex, n_periods: int = 2 ** 13, levels: int = 3):
    """Partial sums over whole periods plus the tail term ``p N^(1-z)/(z-1)``, Richardson in ``1/N``."""
    a = period_coefficients(r)
    P = a.size
    pr = a.mean()
    vals = []
    Ns = [P * n_periods * 2 ** j for j in range(levels)]
    for N in Ns:
        n = np.arange(1, N + 1, dtype=float)
        t = (a[np.arange(N) % P] * n ** (-z))[::-1]
        s = complex(math.fsum(t.real), math.fsum(t.imag))
        vals.append(s + pr * N ** (1 - z) / (z - 1))
    table = [vals]
    for k in range(1, levels):
        prev = table[-1]
        fac = 2.0 ** k
        table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1) for i in range(len(prev) - 1)])
    return table[-1][-1], abs(table[-1][-1] - table[-2][-1]) + abs(vals[-1] - vals[-2]) * 1e-3


def _mp_to_ld(v) -> np.longdouble:
    """Round an mpmath real to extended precision (head plus tail doubles)."""
    head = float(v)
    return np.longdouble(head) + np.longdouble(float(v - head))


def _riesz_mean(r: RationalPoint, z: complex, k: int, x: float) -> complex:
    """Order-``k`` Riesz mean ``sum_{n<x} a_n n^-z (1-n/x)^k`` continued to ``Re z > -k``.

    The coefficients are split into their period mean ``p`` and a zero-mean
    remainder.  Only the remainder is summed; its partial sums stay bounded
    by one period, so extended precision suffices.  The mean part
    contributes ``p zeta(z)`` (the limit of its own Riesz means).
    """
    LD = np.longdouble
    kidx = phase_indices(r)
    P = kidx.size
    with mp.workdps(30):
        ph_mp = [mp.expjpi(mp.mpf(int(j)) / r.q) for j in kidx]
        pm = mp.fsum(ph_mp) / P
        br = np.array([_mp_to_ld(mp.re(c - pm)) for c in ph_mp], dtype=LD)
        bi = np.array([_mp_to_ld(mp.im(c - pm)) for c in ph_mp], dtype=LD)
    n = np.arange(1, int(math.ceil(x)), dtype=np.int64)
    n = n[n < x]
    nl = n.astype(LD)
    zr, zi = LD(z.real), LD(z.imag)
    mag = (1 - nl / LD(x)) ** k * np.exp(-zr * np.log(nl))
    ph = -zi * np.log(nl)
    wr, wi = mag * np.cos(ph), mag * np.sin(ph)
    cr, ci = br[(n - 1) % P], bi[(n - 1) % P]
    total = complex(float((wr * cr - wi * ci).sum()), float((wr * ci + wi * cr).sum()))
    if abs(complex(pm)) > 1e-15:
        total += complex(pm * mp.zeta(mp.mpc(z)))
    return total


def _zeta_cesaro(r: RationalPoint, z: complex, k: int, m0: int = 2000, levels: int = 4):
    P = 2 * r.q
    xs = [P * m0 * 2 ** j for j in range(levels)]
    vals = [_riesz_mean(r, z, k, x) for x in xs]
    rich = [2 * vals[i + 1] - vals[i] for i in range(levels - 1)]
    err_raw = abs(vals[-1] - vals[-2])
    err_rich = abs(rich[-1] - rich[-2])
    if err_rich < err_raw:
        return rich[-1], err_rich
    return vals[-1], err_raw


def zeta_r(r, z: complex, method: str = "auto", order: Optional[int] = None,
           tol: float = 1e-4) -> ZetaEvaluation:
    """``zeta_r(z) = sum_{n>=1} exp(i pi r n^2) n^-z`` and its continuation.

    Methods: ``direct`` (partial sums, ``Re z > 1``), ``cesaro`` (Riesz
    typical means of order ``k <= 4``, ``Re z > 1 - k``; the smallest
    admissible order meeting ``tol`` is used unless ``order`` is given),
    ``pole-subtracted`` (``A_r(z) = zeta_r(z) - p_r/(z - 1)`` via the same
    means) and ``hurwitz`` (exact: ``P^-z sum_j a_j zeta(z, j/P)``).
    """
    r = _as_point(r)
    z = complex(z)
    if method == "auto":
        method = "direct" if z.real > 1 else "cesaro"
    if method == "direct":
        if z.real <= 1:
            raise ValidationError("direct summation needs Re z > 1")
        v, e = _zeta_direct(r, z)
        return ZetaEvaluation(r, z, v, "direct", float(e))
    if method == "hurwitz":
        v = _zeta_hurwitz(r, z)
        return ZetaEvaluation(r, z, v, "hurwitz", 1e-25 * max(1.0, abs(v)))
    if method in ("cesaro", "pole-subtracted"):
        if abs(z - 1) < 1e-14 and abs(gauss_mean(r)) > 1e-12 and method == "cesaro":
            raise ValidationError("zeta_r has a pole at z = 1 on S0; use pole-subtracted")
        k_min = max(1, math.floor(1 - z.real) + 1)
        orders = [order] if order is not None else list(range(k_min, 5))
        if not orders or orders[0] > 4:
            raise ValidationError(f"Cesaro orders above 4 would be needed at Re z = {z.real}")
        if order is not None and z.real <= 1 - order:
            raise ValidationError(f"order {order} does not reach Re z = {z.real}")
        best = None
        for k in orders:
            if method == "pole-subtracted" and abs(z - 1) < 1e-14:
                # A_r(1) = gamma_r (limit of the pole-subtracted means)
                g = gamma_constant(r) if r.parity_class == "S0" else None
                v = g.value if g else _zeta_hurwitz(r, 1.0)
                return ZetaEvaluation(r, z, v, "pole-subtracted", g.error if g else 1e-12, k)
            v, e = _zeta_cesaro(r, z, k)
            if method == "pole-subtracted":
                v -= gauss_mean(r) / (z - 1)
            best = ZetaEvaluation(r, z, v, method if method == "pole-subtracted" else f"cesaro({k})",
                                  float(e), k)
            if e < tol:
                break
        return best
    raise ValidationError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# weak expansion

@dataclass(frozen=True)
class ExpansionCoefficients:
    r: RationalPoint
    beta: complex
    singular_coefficient: complex
    log_coefficient: Optional[complex]
    taylor: tuple
    p_r: complex
    gamma_r: Optional[complex]
    constant_groupings: Optional[dict] = None

    def to_dict(self) -> dict:
        c = lambda v: None if v is None else [v.real, v.imag]
        return {"r": str(self.r), "class": self.r.parity_class, "beta": c(complex(self.beta)),
                "singular_coefficient": c(self.singular_coefficient),
                "log_coefficient": c(self.log_coefficient),
                "taylor": [c(t) for t in self.taylor], "p_r": c(self.p_r), "gamma_r": c(self.gamma_r),
                "constant_groupings": None if self.constant_groupings is None else
                {k: c(v) for k, v in self.constant_groupings.items()}}


def weak_expansion(r, beta: complex, M: int = 4) -> ExpansionCoefficients:
    """Coefficients of ``R_beta(r + eps t)`` as ``eps -> 0+``.

    Singular part (S0, ``beta != 1/2``): ``(-i pi)^(beta-1/2) Gamma(1/2-beta) p_r/2``
    times ``(eps t + i0)^(beta-1/2)``.  At ``beta = 1/2`` the singular part is
    ``gamma_r + (p_r/2)(-log(eps|t|/pi) + (i pi/2) sgn t - gamma)``; the
    log coefficient ``-p_r/2`` and both groupings of the constant are returned.
    Taylor part: ``zeta_r(2 beta - 2m) (i pi)^m / m!`` times ``(eps t)^m``, ``m < M``.
    """
    r = _as_point(r)
    b = complex(beta)
    if M < 0 or M > 12:
        raise ValidationError("M must lie in 0..12")
    pr = p_constant(r).value if r.parity_class == "S0" else 0j
    lam = b - 0.5
    singular, log_c, g_r, groups = 0j, None, None, None
    is_half = abs(lam) < 1e-14
    if r.parity_class == "S0" and not is_half:
        if abs(lam.imag) < 1e-14 and lam.real > 0 and abs(lam.real - round(lam.real)) < 1e-14:
            raise ValidationError(
                f"Gamma(1/2 - beta) has a pole at beta = {beta}; only the Taylor branch exists there")
        singular = complex((-1j * math.pi) ** lam * complex(mp.gamma(-lam)) * pr / 2)
    if is_half and r.parity_class == "S0":
        g_r = gamma_constant(r).value
        log_c = -pr / 2
        groups = {"gamma_r": g_r, "gamma_r + (p_r/2)(log pi - gamma)": g_r + pr / 2 * (math.log(math.pi) - float(mp.euler)),
                  "b = (p_r/2) log pi + gamma_r": pr / 2 * math.log(math.pi) + g_r}
    taylor = []
    for m in range(M):
        zz = 2 * b - 2 * m
        if is_half and m == 0 and r.parity_class == "S0":
            taylor.append(0j)
            continue
        zv = _zeta_hurwitz(r, zz)
        taylor.append(complex(zv * (1j * math.pi) ** m / math.factorial(m)))
    return ExpansionCoefficients(r, b, singular, log_c, tuple(taylor), pr, g_r, groups)


def _mellin_minus(kernel: KernelSpec, s: complex, dps: int) -> mp.mpc:
    """``int_0^inf v^(s-1) phi_hat(-v) dv`` continued to ``Re s > -12`` by Taylor subtraction."""
    if kernel.label == "gaussian":
        return mp.gamma(mp.mpc(s) / 2) / 2
    M = max(0, int(math.ceil(-complex(s).real)) + 1)
    coeffs = [complex(moment(kernel, m)) * (1j ** m) / math.factorial(m) for m in range(M)]
    f = lambda v: complex(kernel(np.array([-float(v)]))[0])
    with mp.workdps(dps):
        ss = mp.mpc(s)
        head = mp.quad(lambda v: v ** (ss - 1) * (f(v) - sum(c * v ** m for m, c in enumerate(coeffs))), [0, 1])
        head += sum(c / (ss + m) for m, c in enumerate(coeffs))
        tail = mp.quad(lambda v: v ** (ss - 1) * f(v), [1, kernel.effective_bandwidth()])
        return head + tail


@dataclass(frozen=True)
class ExpansionReport:
    eps: np.ndarray
    residual: np.ndarray
    envelope: np.ndarray
    slope: float
    bound_flags: np.ndarray
    predicted: float
    passed: bool
    coefficients: ExpansionCoefficients

    def to_dict(self) -> dict:
        return {"eps": self.eps.tolist(), "residual": [float(v) for v in self.residual],
                "envelope": [float(v) for v in self.envelope], "slope": self.slope,
                "predicted": self.predicted, "passed": self.passed,
                "below_precision": self.bound_flags.tolist(),
                "coefficients": self.coefficients.to_dict()}


def pairing_series(r: RationalPoint, beta: complex, kernel: KernelSpec, eps, dps: int = 50):
    """``<R_beta(r + eps t), phi> = sum n^(-2 beta) exp(i pi r n^2) phi_hat(-pi n^2 eps)`` at ``dps`` digits."""
    U = kernel.effective_bandwidth(1e-30) if kernel.label != "gaussian" else None
    kidx = None
    with mp.workdps(dps):
        eps = mp.mpf(eps)
        b = mp.mpc(beta)
        total = mp.mpc(0)
        n = 1
        gauss = kernel.label == "gaussian"
        cutoff = mp.mpf(10) ** (-dps - 5)
        while True:
            w = mp.pi * n * n * eps
            if gauss:
                kv = mp.exp(-w * w)
            else:
                if w > U:
                    break
                kv = mp.mpc(complex(kernel(np.array([-float(w)]))[0]))
            ph = mp.expjpi(mp.mpf((r.p * n * n) % (2 * r.q)) / r.q)
            term = mp.power(n, -2 * b) * ph * kv
            total += term
            if gauss and w * w > (dps + 10) * 2.31 + 5:
                break
            n += 1
        return total


def expansion_terms(r: RationalPoint, beta: complex, kernel: KernelSpec, eps, M: int, dps: int = 50):
    """The truncated expansion applied to the test function at scale ``eps``, at ``dps`` digits."""
    with mp.workdps(dps):
        e = mp.mpf(eps)
        b = mp.mpc(beta)
        lam = b - mp.mpf(1) / 2
        total = mp.mpc(0)
        if r.parity_class == "S0":
            # (p_r/2) pi^lam eps^lam int_0^inf v^(-lam-1) phi_hat(-v) dv, the singular term paired with phi
            total += _p_constant_mp(r) / 2 * mp.power(mp.pi, lam) * mp.power(e, lam) * _mellin_minus(kernel, -lam, dps)
        for m in range(M):
            mu = _moment_mp(kernel, m)
            if mu == 0:
                continue
            zv = _zeta_hurwitz_mp(r, 2 * b - 2 * m, dps)
            total += zv * mp.power(mp.mpc(0, mp.pi) * e, m) / mp.factorial(m) * mu
        return total


def verify_expansion(r, beta: complex, kernel: KernelSpec, eps_grid: Sequence[float], M: int = 1,
                     predicted: Optional[float] = None, max_dps: int = 1200) -> ExpansionReport:
    """Residual ``pairing - expansion`` on ``eps_grid`` and its log-log decay slope.

    Residuals are computed in multiprecision; when a residual sinks below the
    working precision the precision is raised, and past ``max_dps`` the
    precision floor is recorded as an upper bound (flagged).  The slope is the
    least-squares slope of the monotone upper envelope of ``|residual|``.
    """
    r = _as_point(r)
    coeffs = weak_expansion(r, beta, M)
    if abs(complex(beta) - 0.5) < 1e-14 and r.parity_class == "S0":
        raise ValidationError("verification of the logarithmic case is not implemented")
    eps = np.sort(np.asarray(eps_grid, dtype=float))
    exact = kernel.label == "gaussian"
    res, flags = [], []
    for e in eps:
        dps = 40
        while True:
            pair = pairing_series(r, beta, kernel, e, dps)
            exp_ = expansion_terms(r, beta, kernel, e, M, dps)
            with mp.workdps(dps):
                val = abs(pair - exp_)
                floor = mp.mpf(10) ** (-dps + 8) if exact else mp.mpf(10) ** -13
                if val > floor * 1e3 or dps >= max_dps or not exact:
                    res.append(max(float(mp.log10(val)) if val > 0 else -dps, float(mp.log10(floor))))
                    flags.append(bool(val <= floor * 1e3))
                    break
            dps = min(2 * dps, max_dps)
    logres = np.array(res)
    env = np.maximum.accumulate(logres)
    slope = float(np.polyfit(np.log10(eps), env, 1)[0])
    pred = predicted if predicted is not None else 6.0
    return ExpansionReport(eps, 10.0 ** logres, 10.0 ** env, slope, np.array(flags), pred,
                           slope >= min(pred, 6.0), coeffs)


def taylor_check(r, beta: complex, M: int = 3, delta: float = 2e-4, n_max: int = 4000):
    """Compare Taylor coefficients with Gaussian-smoothed termwise derivatives of the series.

    Returns ``[(coefficient, smoothed value)]`` with the smoothed value
    ``(1/m!) sum (i pi n^2)^m n^(-2 beta) exp(i pi r n^2) exp(-(delta pi n^2)^2)``.
    """
    r = _as_point(r)
    coeffs = weak_expansion(r, beta, M)
    n = np.arange(1, n_max + 1, dtype=float)
    ph = np.exp(1j * math.pi * np.array([(r.p * int(k) * int(k)) % (2 * r.q) for k in n]) / r.q)
    damp = np.exp(-(delta * math.pi * n ** 2) ** 2)
    out = []
    for m, c in enumerate(coeffs.taylor):
        terms = (1j * math.pi * n ** 2) ** m * n ** (-2 * complex(beta)) * ph * damp / math.factorial(m)
        out.append((c, complex(math.fsum(terms.real[::-1]), math.fsum(terms.imag[::-1]))))
    return out
