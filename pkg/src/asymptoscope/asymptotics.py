"""Slowly varying models, Potter bounds, drift functions and power-index regression.

Every model is normalised to live at the origin: a model declared at infinity is
evaluated through ``h -> 1/h``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

FAMILIES = ("constant", "log", "loglog", "product")
LOCI = ("origin", "infinity")


@dataclass(frozen=True)
class SlowVariationModel:
    """``L(h) = |log h|^gamma * |log|log h||^gamma2`` restricted by ``family``.

    ``gamma`` is the log exponent, ``gamma2`` the log-log exponent; the
    ``product`` family uses both.  At the origin the log family lives on
    ``(0, 1)`` and the log-log family on ``(0, 1/e)``; at infinity the mirrored
    intervals ``(1, inf)`` and ``(e, inf)``.
    """

    family: str = "constant"
    gamma: float = 0.0
    gamma2: float = 0.0
    locus: str = "origin"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.locus not in LOCI:
            raise ValueError(f"unknown locus {self.locus!r}")

    @classmethod
    def log_power(cls, gamma: float, locus: str = "origin") -> "SlowVariationModel":
        return cls("log", gamma=gamma, locus=locus)

    @classmethod
    def loglog_power(cls, gamma: float, locus: str = "origin") -> "SlowVariationModel":
        return cls("loglog", gamma2=gamma, locus=locus)

    @property
    def uses_log(self) -> bool:
        return self.family in ("log", "product")

    @property
    def uses_loglog(self) -> bool:
        return self.family in ("loglog", "product")

    @property
    def upper(self) -> float:
        """Right end of the domain after folding to the origin (open unless constant)."""
        if self.uses_loglog:
            return math.exp(-1.0)
        if self.uses_log:
            return 1.0
        return 1.0

    def to_origin(self, h):
        h = np.asarray(h, dtype=float)
        return 1.0 / h if self.locus == "infinity" else h

    def in_domain(self, h) -> np.ndarray:
        s = self.to_origin(h)
        if self.family == "constant":
            return (s > 0) & (s <= 1.0)
        return (s > 0) & (s < self.upper)

    def __call__(self, h):
        return eval_sv(self, h)

    def describe(self) -> str:
        if self.family == "constant":
            return "1"
        parts = []
        if self.uses_log:
            parts.append(f"|log h|^{self.gamma:g}")
        if self.uses_loglog:
            parts.append(f"|log|log h||^{self.gamma2:g}")
        return " * ".join(parts)

    def to_dict(self) -> dict:
        return {"family": self.family, "gamma": self.gamma, "gamma2": self.gamma2,
                "locus": self.locus}

    @classmethod
    def from_dict(cls, d: dict) -> "SlowVariationModel":
        return cls(d["family"], float(d.get("gamma", 0.0)), float(d.get("gamma2", 0.0)),
                   d.get("locus", "origin"))


CONSTANT = SlowVariationModel()


def eval_sv(model: SlowVariationModel, h):
    """Evaluate ``L(h)``; raises ``ValueError`` outside the model's domain."""
    scalar = np.ndim(h) == 0
    h_arr = np.asarray(h, dtype=float)
    if not np.all(model.in_domain(h_arr)):
        raise ValueError(f"h outside the domain of L = {model.describe()} at {model.locus}")
    s = model.to_origin(h_arr)
    out = np.ones_like(s)
    if model.uses_log:
        out = out * np.abs(np.log(s)) ** model.gamma
    if model.uses_loglog:
        out = out * np.abs(np.log(np.abs(np.log(s)))) ** model.gamma2
    return float(out) if scalar else out


@dataclass(frozen=True)
class PotterReport:
    C: float
    worst_ratio: float
    worst_pair: tuple
    passed: bool
    refined_C: float


def _potter_constant(model, delta, grid):
    h = np.asarray(grid, dtype=float)
    s = model.to_origin(h)
    L = eval_sv(model, h)
    ratio = L[None, :] / L[:, None]
    r = s[None, :] / s[:, None]
    cushion = np.maximum(r ** delta, r ** (-delta))
    q = ratio / cushion
    i, j = np.unravel_index(np.argmax(q), q.shape)
    return float(q[i, j]), (float(h[i]), float(h[j])), float(ratio[i, j])


def potter_check(model: SlowVariationModel, delta: float, grid: Sequence[float]) -> PotterReport:
    """Smallest ``C`` with ``L(hr)/L(h) <= C max(r^delta, r^-delta)`` on the sampled pairs.

    The verdict requires ``C`` to stay put (within 5 %) when the grid is
    extended one decade further toward the locus at the same density; an
    unbounded ratio keeps growing and fails.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    C, pair, worst = _potter_constant(model, delta, grid)
    s = np.sort(model.to_origin(grid))
    lo, hi = s[0], s[-1]
    decades = max(np.log10(hi / lo), 1.0)
    n = max(grid.size, 16)
    ext = np.geomspace(lo / 10.0 ** decades, hi, int(2 * n))
    if model.locus == "infinity":
        ext = 1.0 / ext
    C2, _, _ = _potter_constant(model, delta, ext)
    passed = bool(np.isfinite(C) and C2 <= 1.05 * C)
    return PotterReport(C=C, worst_ratio=worst, worst_pair=pair, passed=passed, refined_C=C2)


@dataclass(frozen=True)
class DriftFunction:
    """``c(h) = base + v * integral_h^1 L(t) dt/t`` (log-drift at integer degrees).

    With ``L`` constant this is ``base + v log(1/h)``, so
    ``c(a h) - c(h) = -v L log a``: the associate homogeneous form with the
    vector ``-v``.  ``base`` and ``v`` may be complex arrays (one per channel).
    """

    base: np.ndarray
    v: np.ndarray
    model: SlowVariationModel = CONSTANT

    def __call__(self, h):
        h = np.atleast_1d(np.asarray(h, dtype=float))
        acc = np.array([_log_accumulate(self.model, t) for t in h])
        base = np.atleast_1d(np.asarray(self.base, dtype=complex))
        v = np.atleast_1d(np.asarray(self.v, dtype=complex))
        return base[None, :] + acc[:, None] * v[None, :]

    def to_dict(self) -> dict:
        b = np.atleast_1d(np.asarray(self.base, dtype=complex))
        v = np.atleast_1d(np.asarray(self.v, dtype=complex))
        return {"base": [[z.real, z.imag] for z in b], "v": [[z.real, z.imag] for z in v],
                "model": self.model.to_dict()}


def _log_accumulate(model: SlowVariationModel, h: float) -> float:
    """``int_h^{h1} L(t) dt/t`` in ``u = -log t``, with ``h1`` the domain's top."""
    from scipy.integrate import quad

    s = float(model.to_origin(h))
    top = min(model.upper, 1.0)
    if model.family == "constant":
        return math.log(top / s)
    u0, u1 = -math.log(top), -math.log(s)
    if u1 <= u0:
        return 0.0
    g1, g2 = model.gamma, model.gamma2

    def integrand(u):
        val = 1.0
        if model.uses_log:
            val *= u ** g1
        if model.uses_loglog:
            val *= abs(math.log(u)) ** g2
        return val

    val, _ = quad(integrand, u0, u1, limit=200)
    return val


@dataclass(frozen=True)
class IndexReport:
    alpha: float | None
    beta: float | None
    alpha_stderr: float | None = None
    beta_stderr: float | None = None
    n_low: int = 0
    n_high: int = 0


def _slope(logt, logR, nuisance: bool = False):
    """Least-squares slope of ``log R`` on ``log t``.

    With ``nuisance`` the design also carries ``log(1 + |log t|)``, which
    absorbs a slowly varying factor of log-power type instead of letting
    it bias the slope over a finite window.
    """
    cols = [logt, np.ones_like(logt)]
    if nuisance:
        cols.append(np.log1p(np.abs(logt)))
    A = np.column_stack(cols)
    coef, res, *_ = np.linalg.lstsq(A, logR, rcond=None)
    n = logt.size
    if n > 2:
        resid = logR - A @ coef
        s2 = resid @ resid / max(n - A.shape[1], 1)
        cov = s2 * np.linalg.inv(A.T @ A)
        err = float(np.sqrt(cov[0, 0]))
    else:
        err = float("nan")
    return float(coef[0]), err


def submultiplicative_index(samples: Iterable[tuple[float, float]]) -> IndexReport:
    """Regression estimates of ``lim log R(t)/log t`` at ``0`` and at ``infinity``.

    Samples with ``t < 1`` feed the origin index, ``t > 1`` the one at
    infinity; ``t == 1`` is dropped.  A side with fewer than two samples
    reports ``None``.  A side with at least 8 samples over four or more
    decades also fits a ``log(1 + |log t|)`` nuisance term.
    """
    data = np.array(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("no samples")
    t, R = data[:, 0], data[:, 1]
    if np.any(t <= 0) or np.any(R <= 0):
        raise ValueError("samples must be positive")
    lo, hi = t < 1, t > 1
    alpha = beta = a_err = b_err = None
    def side(m):
        lt = np.log(t[m])
        rich = m.sum() >= 8 and np.ptp(lt) >= 4 * math.log(10)
        return _slope(lt, np.log(R[m]), nuisance=rich)

    if lo.sum() >= 2:
        alpha, a_err = side(lo)
    if hi.sum() >= 2:
        beta, b_err = side(hi)
    return IndexReport(alpha, beta, a_err, b_err, int(lo.sum()), int(hi.sum()))


def ratio_decay(model: SlowVariationModel, a: float, grid: Sequence[float]) -> np.ndarray:
    """``|L(a h)/L(h) - 1|`` along ``grid`` (points whose image leaves the domain are skipped)."""
    h = np.asarray(grid, dtype=float)
    ah = a * h if model.locus == "origin" else h * a
    ok = model.in_domain(h) & model.in_domain(ah)
    return np.abs(eval_sv(model, ah[ok]) / eval_sv(model, h[ok]) - 1.0)
