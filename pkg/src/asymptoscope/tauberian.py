"""Half-circle profiles, scaling-exponent fits, angular limits, class estimates and stabilization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .asymptotics import CONSTANT, DriftFunction, SlowVariationModel, eval_sv
from .errors import ValidationError
from .kernels import KernelSpec, moment
from .transform import (AtomicSpectrum, HomogeneousModel, SampledSignal, SeriesSpectrum, TWO_PI,
                        evaluate, evolve_cauchy, multiplier)

FIT_EPS_MAX = 0.05
DEFAULT_ANGLES = 128
K_MAX = 8
FAMILIES = ("constant", "log", "loglog")


def default_eps(n: int = 64, lo: float = 1e-4, hi: float = 1.0) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def _convention(kernel: KernelSpec, convention: Optional[str]) -> str:
    if convention is not None:
        return convention
    return "wavelet" if kernel.is_wavelet else "phi"


def _norm(vals: np.ndarray) -> np.ndarray:
    """Channel max-norm of ``(P, C)`` values."""
    return np.max(np.abs(vals), axis=1)


def noise_floor(f, kernel: KernelSpec, y: float, convention: str) -> float:
    """Roundoff level of a spectral sum at scale ``y`` (zero for quadrature-based models)."""
    if isinstance(f, SampledSignal):
        f = f.to_spectrum()
    if isinstance(f, (AtomicSpectrum, SeriesSpectrum)):
        K = multiplier(kernel, convention)
        w, c = f.atoms(kernel.effective_bandwidth() / y) if isinstance(f, SeriesSpectrum) else f.atoms()
        if w.size == 0:
            return 0.0
        mag = np.abs(K(y * w))[:, None] * np.abs(c)
        return float(4e-16 * math.sqrt(w.size) * mag.sum(axis=0).max() / TWO_PI)
    return 0.0


# ---------------------------------------------------------------------------
# profiles

@dataclass(frozen=True)
class TauberianProfile:
    """``S(eps) = sup_theta sin(theta)^k |M(x0 + eps cos theta, eps sin theta)|``."""

    eps: np.ndarray
    S: np.ndarray
    k: int
    x0: float
    theta_max: np.ndarray
    floor: np.ndarray
    n_angles: int
    kernel_label: str = ""
    convention: str = "wavelet"

    def __post_init__(self):
        if len(self.eps) != len(self.S):
            raise ValidationError("profile lengths differ")

    def resolved(self, eps_max: float = FIT_EPS_MAX) -> np.ndarray:
        """Mask of grid points inside the fit window and well above the roundoff floor."""
        return (self.eps <= eps_max * (1 + 1e-12)) & (self.S > 100.0 * self.floor) & (self.S > 0)

    def to_dict(self) -> dict:
        return {"eps": self.eps.tolist(), "S": self.S.tolist(), "k": self.k, "x0": self.x0,
                "theta_max": self.theta_max.tolist(), "floor": self.floor.tolist(),
                "n_angles": self.n_angles, "kernel": self.kernel_label, "convention": self.convention}

    def to_columns(self, fit: Optional[np.ndarray] = None) -> str:
        lines = ["# eps S fit"]
        for i, (e, s) in enumerate(zip(self.eps, self.S)):
            lines.append(f"{e:.12e} {s:.12e} {fit[i] if fit is not None else float('nan'):.12e}")
        return "\n".join(lines) + "\n"


def half_circle_angles(n: int) -> np.ndarray:
    if n < 32:
        raise ValidationError("angle count must be at least 32")
    return math.pi * (np.arange(n) + 0.5) / n


def tauberian_profiles(f, kernel: KernelSpec, x0: float, ks: Sequence[int], eps=None,
                       n_angles: int = DEFAULT_ANGLES, convention: Optional[str] = None,
                       refine: bool = True) -> dict:
    """Profiles for several ``k`` from one shared sample set (so ``S_k`` is monotone in ``k``).

    Each ``k`` contributes one refinement pass of 16 angles around its
    argmax; every profile is then the maximum over the pooled samples.
    """
    conv = _convention(kernel, convention)
    eps = np.asarray(eps if eps is not None else default_eps(), dtype=float)
    if np.any(eps <= 0):
        raise ValidationError("eps values must be positive")
    ks = sorted(set(int(k) for k in ks))
    if ks and (ks[0] < 0 or ks[-1] > 64):
        raise ValidationError("k must be a natural number")
    th = half_circle_angles(n_angles)
    X = x0 + np.outer(eps, np.cos(th))
    Y = np.outer(eps, np.sin(th))
    V = _norm(evaluate(f, kernel, X.ravel(), Y.ravel(), conv)).reshape(eps.size, th.size)
    thetas = [th] * eps.size
    values = [V[i] for i in range(eps.size)]
    if refine:
        h = math.pi / n_angles
        extra_t, extra_e = [], []
        for i in range(eps.size):
            cand = {int(np.argmax(np.sin(th) ** k * V[i])) for k in ks}
            loc = np.unique(np.concatenate([np.clip(th[j] + np.linspace(-h, h, 18)[1:-1], th[0] / 2, math.pi - th[0] / 2)
                                            for j in sorted(cand)]))
            extra_t.append(loc)
            extra_e.append(np.full(loc.size, eps[i]))
        et, ee = np.concatenate(extra_t), np.concatenate(extra_e)
        EV = _norm(evaluate(f, kernel, x0 + ee * np.cos(et), ee * np.sin(et), conv))
        pos = 0
        for i in range(eps.size):
            n = extra_t[i].size
            thetas[i] = np.concatenate([th, extra_t[i]])
            values[i] = np.concatenate([V[i], EV[pos:pos + n]])
            pos += n
    floor = np.array([noise_floor(f, kernel, float(e), conv) for e in eps])
    out = {}
    for k in ks:
        S = np.empty(eps.size)
        tm = np.empty(eps.size)
        for i in range(eps.size):
            w = np.sin(thetas[i]) ** k * values[i]
            j = int(np.argmax(w))
            S[i], tm[i] = w[j], thetas[i][j]
        out[k] = TauberianProfile(eps, S, k, float(x0), tm, floor, n_angles, kernel.label, conv)
    return out


def tauberian_profile(f, kernel: KernelSpec, x0: float, k: int, eps=None, n_angles: int = DEFAULT_ANGLES,
                      convention: Optional[str] = None, refine: bool = True) -> TauberianProfile:
    """The half-circle profile for one ``k``."""
    return tauberian_profiles(f, kernel, x0, [k], eps, n_angles, convention, refine)[k]


def boundary_profile(f, kernel: KernelSpec, x0: float, k: int, eps=None, kappa: float = 0.5,
                     n_sigma: int = 96, n_top: int = 65, convention: Optional[str] = None) -> TauberianProfile:
    """``sup sigma^k |M(x0 + eps x, eps sigma)|`` over the boundary of ``{|x| < sigma^kappa, sigma < 1}``."""
    from .summability import boundary_points

    conv = _convention(kernel, convention)
    eps = np.asarray(eps if eps is not None else default_eps(), dtype=float)
    bx, bs = boundary_points(kappa, n_sigma, n_top, sigma_min=1e-4)
    X = x0 + np.outer(eps, bx)
    Y = np.outer(eps, bs)
    V = _norm(evaluate(f, kernel, X.ravel(), Y.ravel(), conv)).reshape(eps.size, bx.size)
    W = bs[None, :] ** k * V
    j = np.argmax(W, axis=1)
    floor = np.array([noise_floor(f, kernel, float(e), conv) for e in eps])
    return TauberianProfile(eps, W[np.arange(eps.size), j], k, float(x0), np.arctan2(bs[j], bx[j]), floor,
                            bx.size, kernel.label, conv)


def profile_bounded(profile: TauberianProfile, alpha: float, tol: float = 0.05) -> bool:
    """``S(eps) / eps^alpha`` does not grow as ``eps -> 0`` (log-log slope above ``-tol``)."""
    m = profile.resolved()
    if m.sum() < 4:
        # a field that vanishes below the floor everywhere is trivially bounded
        return bool(np.all(profile.S[profile.eps <= FIT_EPS_MAX] <= 100.0 * profile.floor[profile.eps <= FIT_EPS_MAX]))
    le = np.log(profile.eps[m])
    r = np.log(profile.S[m]) - alpha * le
    slope = np.polyfit(le, r, 1)[0]
    return bool(slope > -tol)


def first_bounded_k(f, kernel: KernelSpec, x0: float, alpha: float, eps=None, k_max: int = K_MAX,
                    n_angles: int = 64, kappa: float = 0.5, tol: float = 0.05) -> tuple:
    """Smallest ``k`` bounding the half-circle profile and the ``kappa``-boundary profile (``None`` if none).

    The two profile forms should agree on whether some ``k`` works.
    """
    eps = np.asarray(eps if eps is not None else np.geomspace(1e-3, FIT_EPS_MAX, 16), dtype=float)
    half = tauberian_profiles(f, kernel, x0, range(k_max + 1), eps=eps, n_angles=n_angles)
    k_half = next((k for k in range(k_max + 1) if profile_bounded(half[k], alpha, tol)), None)
    k_bdry = next((k for k in range(k_max + 1)
                   if profile_bounded(boundary_profile(f, kernel, x0, k, eps=eps, kappa=kappa), alpha, tol)), None)
    return k_half, k_bdry

# ---------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class ScalingFit:
    alpha: float
    model: SlowVariationModel
    log_constant: float
    residual: float
    stderr: float
    bic: dict
    n: int
    offset: float = 0.0

    def predict(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        out = np.exp(self.log_constant) * eps ** self.alpha
        v = _slow_variable(np.log(eps), self.model.family)
        if v is None:
            return out
        g = self.model.gamma if self.model.family == "log" else self.model.gamma2
        return out * (v + self.offset) ** g


def _slow_variable(le: np.ndarray, family: str):
    if family == "log":
        return np.abs(le)
    if family == "loglog":
        return np.log(np.abs(le))
    return None


def _lstsq(le, ls, family: str, offset: float):
    cols = [le, np.ones_like(le)]
    v = _slow_variable(le, family)
    if v is not None:
        cols.insert(1, np.log(v + offset))
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, ls, rcond=None)
    res = ls - A @ coef
    return coef, float(res @ res), A, res


def _fit_family(le, ls, family: str):
    """Best fit of one family; non-constant families scan the nuisance offset ``c`` in ``(v + c)^gamma``."""
    v = _slow_variable(le, family)
    if v is None:
        return _lstsq(le, ls, family, 0.0) + (0.0,)
    lo, hi = -0.95 * float(v.min()), 20.0 * float(v.max())
    grid = np.concatenate([[0.0], np.linspace(lo, hi, 241)])
    rss = [_lstsq(le, ls, family, c)[1] for c in grid]
    c0 = float(grid[int(np.argmin(rss))])
    step = (hi - lo) / 240
    r = optimize.minimize_scalar(lambda c: _lstsq(le, ls, family, c)[1],
                                 bounds=(max(lo, c0 - step), min(hi, c0 + step)), method="bounded",
                                 options={"xatol": 1e-10})
    c = float(r.x) if r.fun < min(rss) else c0
    return _lstsq(le, ls, family, c) + (c,)


def fit_scaling(eps, S, families: Sequence[str] = FAMILIES, sigma: float = 1e-4,
                max_residual: float = 0.05) -> ScalingFit:
    """Least squares ``log S = alpha log eps + gamma log(v + c) + const`` per family, chosen by BIC.

    ``v`` is ``|log eps|`` (log family) or ``log|log eps|`` (loglog family).
    The offset ``c`` is a nuisance parameter: ``(v + c)^gamma`` and ``v^gamma``
    are asymptotically equivalent, so the reported model is ``v^gamma``, but
    fitting ``c`` keeps lower-order slowly varying terms out of ``alpha``.

    The noise variance in the criterion is the largest of ``sigma**2``, a
    roughness estimate from second differences of the pure-power residuals
    and the best family's own mean squared residual, so oscillating data
    cannot buy an extra slowly varying factor.  A non-constant family is
    admitted only when its RMS log residual is at most ``max_residual``.
    """
    eps = np.asarray(eps, dtype=float)
    S = np.asarray(S, dtype=float)
    if eps.size < 4:
        raise ValidationError("need at least four resolved samples to fit an exponent")
    if np.any(eps >= 1.0 / math.e) and any(fam != "constant" for fam in families):
        families = [fam for fam in families if fam == "constant"] or ["constant"]
    order = np.argsort(eps)
    le, ls = np.log(eps[order]), np.log(S[order])
    n = eps.size
    fits = {fam: _fit_family(le, ls, fam) for fam in families}
    n_par = {fam: fits[fam][2].shape[1] + (0 if fam == "constant" else 1) for fam in fits}
    ref = fits["constant"][3] if "constant" in fits else next(iter(fits.values()))[3]
    rough = float(np.mean(np.diff(ref, 2) ** 2) / 6.0) if n >= 5 else 0.0
    best_rss = min(f[1] for f in fits.values())
    var = max(sigma ** 2, rough, best_rss / n)
    table = {fam: f[1] / var + n_par[fam] * math.log(n) for fam, f in fits.items()}
    for q in list(table):
        if q != "constant" and "constant" in table and math.sqrt(fits[q][1] / n) > max_residual:
            table[q] = math.inf
    fam = min(table, key=lambda q: (table[q], FAMILIES.index(q) if q in FAMILIES else 0))
    coef, rss, A, _, offset = fits[fam]
    dof = max(n - n_par[fam], 1)
    cov = max(rss / dof, sigma ** 2) * np.linalg.pinv(A.T @ A)
    if fam == "constant":
        model = CONSTANT
    elif fam == "log":
        model = SlowVariationModel.log_power(float(coef[1]))
    else:
        model = SlowVariationModel.loglog_power(float(coef[1]))
    return ScalingFit(float(coef[0]), model, float(coef[-1]), math.sqrt(rss / n), float(math.sqrt(cov[0, 0])),
                      table, n, offset)


def _slope(le, ls) -> float:
    return float(np.polyfit(le, ls, 1)[0])


@dataclass
class ExponentReport:
    alpha: float
    L_model: SlowVariationModel
    k: int
    residual: float
    drift: Optional[DriftFunction] = None
    polynomial_correction: Optional[list] = None
    classification: str = "undetermined"
    holder_alpha: Optional[float] = None
    bounded: bool = True
    rapid_decay: bool = False
    per_k: list = field(default_factory=list)
    fit_window: tuple = ()
    moment_check: dict = field(default_factory=dict)
    status: str = "ok"

    @property
    def alpha_lower_bound(self) -> float:
        return self.alpha

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "L_model": self.L_model.to_dict(), "L": self.L_model.describe(),
                "k": self.k, "residual": self.residual,
                "drift": self.drift.to_dict() if self.drift is not None else None,
                "polynomial_correction": ([[complex(c).real, complex(c).imag] for c in self.polynomial_correction]
                                          if self.polynomial_correction is not None else None),
                # at n = 1 the annihilation condition P_q(d)P = 0 only excludes degrees the fit already omits
                "polynomial_constraint": ("recorded, not enforced" if self.polynomial_correction is not None
                                          else None),
                "classification": self.classification, "holder_alpha": self.holder_alpha,
                "bounded": self.bounded, "rapid_decay": self.rapid_decay, "per_k": self.per_k,
                "fit_window": list(self.fit_window), "moment_check": self.moment_check, "status": self.status}


def _moment_check(kernel: KernelSpec, alpha: float) -> dict:
    need = int(math.floor(alpha)) if math.isfinite(alpha) and alpha >= 0 else -1
    vo = kernel.vanishing_order
    ok = vo == "all" or need < 0 or int(vo) > need
    return {"required_through": need, "kernel_vanishing_order": vo, "ok": bool(ok)}


def _profile_exponent(p: TauberianProfile, families, jump: float = 1.0) -> dict:
    m = p.resolved()
    if m.sum() < 4:
        return {"k": p.k, "alpha": math.inf if np.all(p.S[p.eps <= FIT_EPS_MAX] <= 100 * p.floor[p.eps <= FIT_EPS_MAX])
                else math.nan, "rapid": True, "fit": None, "n": int(m.sum())}
    e, s = p.eps[m], p.S[m]
    fit = fit_scaling(e, s, families)
    le, ls = np.log(e), np.log(s)
    rapid = False
    lower = math.nan
    if e.size >= 8:
        order = np.argsort(le)
        half = e.size // 2
        lo, hi = order[:half], order[half:]
        s_lo, s_hi = _slope(le[lo], ls[lo]), _slope(le[hi], ls[hi])
        rapid = s_lo - s_hi > jump
        lower = s_lo
    alpha = lower if rapid else fit.alpha
    return {"k": p.k, "alpha": float(alpha), "rapid": bool(rapid), "fit": fit, "n": int(m.sum()),
            "window": (float(e.min()), float(e.max()))}


def _drift_refit(f, kernel, x0, eps, m: int, conv: str):
    """``M(x0, eps) = sum_{j<m} p_j eps^j + eps^m (base + v log(1/eps))`` by least squares."""
    e = eps[eps <= FIT_EPS_MAX]
    vals = evaluate(f, kernel, np.full(e.size, x0), e, conv)
    cols = [e ** j for j in range(max(m, 0))] + [e ** m, e ** m * np.log(1.0 / e)]
    A = np.column_stack(cols).astype(complex)
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    poly = [complex(c) for c in coef[:max(m, 0), 0]]
    return DriftFunction(coef[-2], coef[-1], CONSTANT), poly


def estimate_weak_exponent(f, kernel: KernelSpec, x0: float, eps=None, n_angles: int = DEFAULT_ANGLES,
                           k_max: int = K_MAX, convention: Optional[str] = None,
                           families: Sequence[str] = FAMILIES, tol: float = 0.05) -> ExponentReport:
    """Sweep ``k = 0..k_max`` and fit the decay exponent of each half-circle profile.

    The exponent saturates at the smallest ``k`` beyond which the fitted
    ``alpha_k`` no longer increases by more than ``tol``; without saturation
    the report is "unbounded at k_max" and ``alpha`` is the largest
    ``alpha_k`` (a lower bound).  A profile whose log-log slope steepens by
    more than one unit between the upper and lower halves of the fit window
    decays faster than any power; its lower-half slope is reported as a lower
    bound and flagged ``rapid_decay``.
    """
    conv = _convention(kernel, convention)
    eps = np.asarray(eps if eps is not None else default_eps(), dtype=float)
    profs = tauberian_profiles(f, kernel, x0, range(k_max + 1), eps, n_angles, conv)
    per = [_profile_exponent(profs[k], families) for k in range(k_max + 1)]
    alphas = np.array([d["alpha"] for d in per], dtype=float)
    finite = np.where(np.isfinite(alphas), alphas, np.inf)
    k_star = None
    for k in range(k_max + 1):
        with np.errstate(invalid="ignore"):
            gain = np.where(np.isinf(finite[k:]) & np.isinf(finite[k]), 0.0, finite[k:] - finite[k])
        if np.all(gain <= tol + 2 * _stderr(per[k])):
            k_star = k
            break
    rapid_all = all(d["rapid"] for d in per)
    if k_star is None:
        k_sel = k_max
        bounded = False
        status = f"unbounded at k_max={k_max}"
    else:
        k_sel = k_star
        bounded = True
        status = "ok"
    d = per[k_sel]
    fit = d["fit"]
    alpha = float(d["alpha"]) if k_star is not None else float(np.nanmax(np.where(np.isfinite(alphas), alphas, np.nan))
                                                              if np.any(np.isfinite(alphas)) else math.inf)
    L = fit.model if (fit is not None and not d["rapid"]) else CONSTANT
    residual = fit.residual if fit is not None else 0.0
    rep = ExponentReport(alpha, L, k_sel, float(residual), bounded=bounded, rapid_decay=bool(d["rapid"] or rapid_all),
                         per_k=[{"k": q["k"], "alpha": q["alpha"], "rapid": q["rapid"], "n": q["n"]} for q in per],
                         fit_window=d.get("window", ()), moment_check=_moment_check(kernel, alpha), status=status)
    if rep.rapid_decay:
        rep.status = (rep.status + "; " if rep.status != "ok" else "") + "faster than any fitted power (lower bound)"
    if bounded and not rep.rapid_decay and math.isfinite(alpha) and alpha >= 0 and abs(alpha - round(alpha)) < tol:
        rep.drift, rep.polynomial_correction = _drift_refit(f, kernel, x0, eps, int(round(alpha)), conv)
    return rep


def _stderr(d: dict) -> float:
    return d["fit"].stderr if d.get("fit") is not None and not d["rapid"] else 0.0


# ---------------------------------------------------------------------------
# Hoelder exponents and classification

@dataclass(frozen=True)
class ShellProfile:
    rho: np.ndarray
    H: np.ndarray
    floor: np.ndarray


def shell_profile(f, kernel: KernelSpec, x0: float, rho=None, n_s: int = 64, s_min: float = 1e-6,
                  convention: Optional[str] = None) -> ShellProfile:
    """``H(rho) = sup |M(x0 + x, y)|`` over the shell ``|x| + y = rho``, ``y >= s_min rho``."""
    conv = _convention(kernel, convention)
    rho = np.asarray(rho if rho is not None else np.geomspace(1e-5, 1e-2, 19), dtype=float)
    s = np.geomspace(s_min, 1.0, n_s)
    xs = np.concatenate([1 - s, -(1 - s)])
    ys = np.concatenate([s, s])
    X = x0 + np.outer(rho, xs)
    Y = np.outer(rho, ys)
    V = _norm(evaluate(f, kernel, X.ravel(), Y.ravel(), conv)).reshape(rho.size, xs.size)
    floor = np.array([noise_floor(f, kernel, float(r) * s_min, conv) for r in rho])
    return ShellProfile(rho, V.max(axis=1), floor)


def holder_exponent(f, kernel: KernelSpec, x0: float, rho=None, weak: Optional[ExponentReport] = None,
                    tol: float = 0.1, convention: Optional[str] = None, s_min: float = 1e-6,
                    **weak_opts) -> ExponentReport:
    """Largest ``alpha`` with ``|W(x0 + x, y)| <= C (|x| + y)^alpha`` from shell suprema.

    The weak exponent (computed unless ``weak`` is given) decides the
    classification: cusp when both agree within ``tol``, oscillating when
    the weak exponent is larger by more than ``tol``.  ``s_min`` is the
    smallest ``y / rho`` sampled on each shell; quadratic series need
    ``s_min <= 1e-4`` to see the chirp at rational points.
    """
    sp = shell_profile(f, kernel, x0, rho, s_min=s_min, convention=convention)
    m = (sp.H > 100 * sp.floor) & (sp.H > 0)
    if weak is None:
        weak = estimate_weak_exponent(f, kernel, x0, convention=convention, **weak_opts)
    rep = ExponentReport(weak.alpha, weak.L_model, weak.k, weak.residual, weak.drift, weak.polynomial_correction,
                         bounded=weak.bounded, rapid_decay=weak.rapid_decay, per_k=weak.per_k,
                         fit_window=weak.fit_window, moment_check=weak.moment_check, status=weak.status)
    if m.sum() < 4 or sp.rho[m].max() / sp.rho[m].min() < 100:
        rep.classification = "undetermined"
        rep.status += "; shell range below two decades"
        return rep
    fit = fit_scaling(sp.rho[m], sp.H[m], ("constant",))
    rep.holder_alpha = fit.alpha
    weak_alpha = weak.alpha if math.isfinite(weak.alpha) else math.inf
    if abs(weak_alpha - fit.alpha) <= tol and not weak.rapid_decay:
        rep.classification = "cusp"
    elif weak_alpha - fit.alpha > tol or weak.rapid_decay or not weak.bounded:
        rep.classification = "oscillating"
    else:
        rep.classification = "undetermined"
    return rep


@dataclass(frozen=True)
class GlobalHolderReport:
    passed: bool
    C: float
    worst_point: tuple
    slope: float

    def to_dict(self) -> dict:
        return {"pass": self.passed, "C": self.C, "worst_point": list(self.worst_point), "slope": self.slope}


def global_holder_check(f, kernel: KernelSpec, alpha: float, L_model: SlowVariationModel = CONSTANT,
                        y0: float = 0.1, x=None, y=None, convention: Optional[str] = None,
                        tol: float = 0.05) -> GlobalHolderReport:
    """``sup_x |W(x, y)| <= C y^alpha L(y)`` on ``y in (0, y0]``.

    ``C`` is the grid maximum of the ratio; the check passes when the
    per-scale ratio shows no growth as ``y -> 0`` (log-log slope above
    ``-tol``).
    """
    conv = _convention(kernel, convention)
    # 2003 points: the spacing 2 pi / 2002 has an odd denominator, so dyadic
    # frequencies never alias onto zeros of the grid.
    x = np.asarray(x if x is not None else np.linspace(-math.pi, math.pi, 2003), dtype=float)
    y = np.sort(np.asarray(y if y is not None else np.geomspace(y0 * 1e-4, y0, 25), dtype=float))[::-1]
    Ly = eval_sv(L_model, y) if L_model.family != "constant" else np.ones_like(y)
    lo, hi = float(x.min()), float(x.max())
    per = np.empty(y.size)
    best = (-np.inf, (float("nan"), float("nan")))
    seeds = np.empty(0)
    prev = None
    for n, (yy, ll) in enumerate(zip(y, Ly)):
        xs = x
        if seeds.size and prev is not None:
            # track the maximizers from the coarser scale down to this one
            local = (seeds[:, None] + prev * np.linspace(-4.0, 4.0, 33)[None, :]).ravel()
            xs = np.concatenate([x, np.clip(local, lo, hi)])
        r = _norm(evaluate(f, kernel, xs, np.full(xs.size, yy), conv)) / (yy ** alpha * ll)
        r = np.where(np.isfinite(r), r, np.inf)
        per[n] = float(r.max())
        j = int(np.argmax(r))
        if per[n] > best[0]:
            best = (per[n], (float(xs[j]), float(yy)))
        seeds = xs[np.argsort(r)[-8:]]
        prev = yy
    slope = float(np.polyfit(np.log(y), np.log(np.maximum(per, 1e-300)), 1)[0])
    ok = bool(np.isfinite(best[0]) and slope > -tol)
    return GlobalHolderReport(ok, float(best[0]), best[1], slope)


# ---------------------------------------------------------------------------
# angular limits

@dataclass(frozen=True)
class AngularLimit:
    theta: np.ndarray
    limits: np.ndarray
    exponent_s: np.ndarray
    divergent: np.ndarray
    defect: float

    def to_dict(self) -> dict:
        return {"theta": self.theta.tolist(), "limits": [[complex(z).real, complex(z).imag] for z in self.limits],
                "s": self.exponent_s.tolist(), "divergent": self.divergent.tolist(), "defect": self.defect}


def _extrapolate(eps: np.ndarray, v: np.ndarray, floor: float):
    """Fit ``v = A + B eps^s``; returns ``(A, s, residual)`` minimizing the residual over ``s``."""
    best = None
    for s in np.linspace(0.05, 4.0, 80):
        A = np.column_stack([np.ones_like(eps), eps ** s]).astype(complex)
        coef, *_ = np.linalg.lstsq(A, v, rcond=None)
        r = float(np.max(np.abs(A @ coef - v)))
        if best is None or r < best[2]:
            best = (coef[0], s, r)
    return best


def angular_limit(f, kernel: KernelSpec, x0: float, alpha: float, L_model: SlowVariationModel = CONSTANT,
                  theta_bar: float = math.pi / 4, eps=None, n_arc: int = 9,
                  convention: Optional[str] = None) -> AngularLimit:
    """``lim M(x0 + h x, h y) / (h^alpha L(h))`` on the arc ``theta in [theta_bar, pi - theta_bar]``.

    Extrapolation fits ``A + B eps^s`` over the last decade of ``eps``;
    a point is flagged divergent when the fit residual exceeds ten times
    the noise floor (``1e-9`` relative to the data scale).
    """
    conv = _convention(kernel, convention)
    eps = np.asarray(eps if eps is not None else np.geomspace(1e-4, 1e-3, 12), dtype=float)
    eps = np.sort(eps)
    eps = eps[eps <= eps.min() * 10 * (1 + 1e-12)]
    th = np.linspace(theta_bar, math.pi - theta_bar, n_arc)
    X = x0 + np.outer(eps, np.cos(th))
    Y = np.outer(eps, np.sin(th))
    V = evaluate(f, kernel, X.ravel(), Y.ravel(), conv)[:, 0].reshape(eps.size, th.size)
    Le = eval_sv(L_model, eps) if L_model.family != "constant" else np.ones_like(eps)
    V = V / (eps ** alpha * Le)[:, None]
    lim = np.empty(th.size, complex)
    ss = np.empty(th.size)
    div = np.zeros(th.size, bool)
    defect = 0.0
    for j in range(th.size):
        scale = float(np.max(np.abs(V[:, j]))) or 1.0
        A, s, r = _extrapolate(eps, V[:, j], 0.0)
        floor = 1e-9 * scale
        lim[j], ss[j] = A, s
        div[j] = r > 10 * floor and r > 1e-6 * scale
        defect = max(defect, float(np.max(np.abs(V[:, j] - A))))
    return AngularLimit(th, lim, ss, div, defect)


# ---------------------------------------------------------------------------
# class estimates

@dataclass(frozen=True)
class ClassEstimateReport:
    k: Optional[int]
    l: Optional[int]
    C: float
    scope: str
    max_violation: float
    passed: bool

    def to_dict(self) -> dict:
        return {"k": self.k, "l": self.l, "C": self.C, "scope": self.scope,
                "max_violation": self.max_violation, "pass": self.passed}


def _class_values(f, kernel, conv, X: float, y_lo: float, y_hi: float, nx: int, ny: int):
    x = np.linspace(-X, X, nx)
    y = np.geomspace(y_lo, y_hi, ny)
    XX, YY = np.meshgrid(x, y)
    V = _norm(evaluate(f, kernel, XX.ravel(), YY.ravel(), conv)).reshape(y.size, x.size)
    return x, y, V


def class_estimate_fit(f, kernel: KernelSpec, scope: str = "global", X: float = 50.0, y_range=None,
                       nx: int = 201, ny: int = 41, convention: Optional[str] = None,
                       stability: float = 1.05) -> ClassEstimateReport:
    """Smallest ``(k, l)`` in ``0..8 x 0..8`` with ``|M| <= C (1 + y)^k (1 + |x|)^l / y^k``.

    ``C`` is measured on the grid and must stay within ``stability`` times
    itself when the grid is extended (``x`` range doubled, one more decade
    of ``y`` on each open end).
    """
    if scope not in ("global", "local"):
        raise ValidationError("scope must be global or local")
    conv = _convention(kernel, convention)
    lo, hi = y_range if y_range is not None else ((1e-3, 1e3) if scope == "global" else (1e-3, 1.0))
    base = _class_values(f, kernel, conv, X, lo, hi, nx, ny)
    ext = _class_values(f, kernel, conv, 2 * X, lo / 10, hi * 10 if scope == "global" else hi, 2 * nx - 1,
                        ny + (20 if scope == "global" else 10))

    def C_of(data, k, l):
        x, y, V = data
        w = (y / (1 + y))[:, None] ** k / (1 + np.abs(x))[None, :] ** l
        return float(np.max(V * w))

    for k in range(9):
        for l in range(9):
            c0, c1 = C_of(base, k, l), C_of(ext, k, l)
            if c1 <= stability * c0 + 1e-14:
                return ClassEstimateReport(k, l, max(c0, c1), scope, c1 - stability * c0 - 1e-14, True)
    c0, c1 = C_of(base, 8, 8), C_of(ext, 8, 8)
    return ClassEstimateReport(None, None, c1, scope, c1 - stability * c0, False)


# ---------------------------------------------------------------------------
# stabilization of the heat evolution

@dataclass(frozen=True)
class StabilizationReport:
    stabilizes: bool
    alpha: float
    T_power: float
    L_model: SlowVariationModel
    x: np.ndarray
    ell: np.ndarray
    spread: float

    def T(self, t):
        t = np.asarray(t, dtype=float)
        return t ** self.T_power

    def to_dict(self) -> dict:
        return {"stabilizes": self.stabilizes, "alpha": self.alpha, "T_power": self.T_power,
                "L_model": self.L_model.to_dict(), "x": self.x.tolist(),
                "ell": [[complex(z).real, complex(z).imag] for z in self.ell], "spread": self.spread}


def stabilization_check(f, d: int = 2, x=None, alpha: Optional[float] = None,
                        t_grid=None, tol: float = 1e-6, digits: int = 6) -> StabilizationReport:
    """Long-time behaviour of ``U(x, t) = (f * heat_t)(x)``.

    ``alpha`` (if not supplied) is the log-log slope of ``|U(0, t)|`` times
    ``d``, rounded to ``digits`` decimals.  ``ell(x)`` is ``U(x, t)/T(t)``
    at the largest ``t``; stabilization requires the values over the last
    two ``t`` nodes to agree within ``tol`` (relative) at every ``x``.
    """
    x = np.atleast_1d(np.asarray(x if x is not None else [0.0], dtype=float))
    t = np.asarray(t_grid if t_grid is not None else np.geomspace(1e4, 1e10, 7), dtype=float)
    if alpha is None:
        u0 = np.array([abs(evolve_cauchy(f, d, 0.0, float(tt))[0]) for tt in t])
        if np.any(u0 <= 0):
            raise ValidationError("U(0, t) vanishes; supply alpha explicitly")
        alpha = round(float(np.polyfit(np.log(t), np.log(u0), 1)[0]) * d, digits) + 0.0
    p = alpha / d + 0.0
    U = np.array([[evolve_cauchy(f, d, float(xx), float(tt))[0] for tt in t] for xx in x])
    R = U / t[None, :] ** p
    ell = R[:, -1]
    spread = float(np.max(np.abs(R[:, -1] - R[:, -2]) / np.maximum(np.abs(R[:, -1]), 1e-300)))
    return StabilizationReport(bool(spread < tol), float(alpha), float(p), CONSTANT, x, ell, spread)
