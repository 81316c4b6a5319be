"""Command-line front end that parses inputs and writes deterministic JSON reports."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kernels as K
from . import riemann as R
from . import summability as SM
from . import tauberian as TB
from . import transform as T
from .asymptotics import CONSTANT, SlowVariationModel
from .errors import DegeneracyError, NumericalError, ValidationError

SCHEMA_VERSION = "asymptoscope/1"
CSV_SPACING_TOL = 1e-9

SIGNAL_GENERATORS = ("weierstrass:a[,base]", "riemann_w", "R_beta:r,beta", "heaviside",
                     "homogeneous:alpha", "dirac", "constant:c", "cosine:omega", "exponential:omega",
                     "theta")


# ---------------------------------------------------------------------------
# request / report types

@dataclass(frozen=True)
class AnalysisRequest:
    subcommand: str
    options: dict

    def echo(self) -> dict:
        return {"subcommand": self.subcommand, "options": _jsonable(self.options)}


@dataclass
class AnalysisReport:
    request: AnalysisRequest
    result: dict
    provenance: dict = field(default_factory=dict)
    run_info: dict = field(default_factory=dict)

    def to_dict(self, with_run_info: bool = True) -> dict:
        out = {"schema_version": SCHEMA_VERSION, "request": self.request.echo(),
               "result": _jsonable(self.result), "provenance": _jsonable(self.provenance)}
        if with_run_info:
            out["run_info"] = _jsonable(self.run_info)
        return out

    def dumps(self, with_run_info: bool = True) -> str:
        return json.dumps(self.to_dict(with_run_info), sort_keys=True, indent=2) + "\n"

    @staticmethod
    def loads(text: str) -> dict:
        data = json.loads(text)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValidationError(f"unsupported schema {data.get('schema_version')!r}")
        return data


def _jsonable(obj):
    """Plain JSON types; complex numbers become ``[re, im]`` and non-finite floats strings."""
    if hasattr(obj, "to_dict") and not isinstance(obj, type):
        return _jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(float(obj.real)), _jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


# ---------------------------------------------------------------------------
# input parsing

def _split_generator(text: str):
    name, _, params = text.partition(":")
    args = [p for p in params.split(",") if p.strip()] if params else []
    return name.strip(), args


def _num(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a number: {text!r}") from exc


def make_signal(text: str):
    """Build a spectral distribution from ``name[:p1,p2]``."""
    name, args = _split_generator(text)
    try:
        if name == "weierstrass":
            a = _num(args[0])
            if not 0 < a < 1:
                raise ValidationError("weierstrass amplitude a must lie in (0, 1)")
            return T.weierstrass(a, _num(args[1]) if len(args) > 1 else 2.0)
        if name == "riemann_w":
            return T.riemann_w()
        if name in ("R_beta", "r_beta"):
            r = Fraction(args[0].strip()) if args else Fraction(0)
            beta = complex(args[1]) if len(args) > 1 else 0.0
            return T.r_beta(beta, r)
        if name == "heaviside":
            return T.heaviside()
        if name == "homogeneous":
            alpha = _num(args[0])
            if alpha <= -1:
                raise ValidationError("homogeneous degree must exceed -1 (use dirac for -1)")
            return T.homogeneous(alpha)
        if name == "dirac":
            return T.dirac()
        if name == "constant":
            return T.constant(_num(args[0]) if args else 1.0)
        if name == "cosine":
            return T.cosine(_num(args[0]) if args else 1.0)
        if name == "exponential":
            return T.exponential(_num(args[0]) if args else 1.0)
        if name == "theta":
            return T.theta_comb()
    except IndexError as exc:
        raise ValidationError(f"generator {name!r} needs parameters") from exc
    raise ValidationError(f"unknown generator {name!r}; known: {', '.join(SIGNAL_GENERATORS)}")


def ingest_csv(path) -> T.SampledSignal:
    """Read ``(t, value)`` column pairs into a sampled signal.

    A single pair is a real channel.  An even number of pairs is read as
    complex channels, each from a real-part pair followed by an
    imaginary-part pair (so ``t, re, t, im`` is one complex channel); an odd
    number above one gives real channels.  All time columns must agree and
    be uniformly spaced.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    rows = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row if c.strip()]
            if not cells or cells[0].startswith("#"):
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if not rows:
                    continue  # header line
                raise ValidationError(f"non-numeric row in {path}: {row}")
    if not rows:
        raise ValidationError(f"{path} contains no data rows")
    width = len(rows[0])
    if width < 2 or width % 2 or any(len(r) != width for r in rows):
        raise ValidationError("rows need the same even number of columns: (t, value) pairs")
    data = np.array(rows)
    if data.shape[0] < 2:
        raise ValidationError("need at least two samples")
    t = data[:, 0]
    if width > 2 and np.any(np.abs(data[:, 2::2] - t[:, None]) > CSV_SPACING_TOL * max(1.0, np.abs(t).max())):
        raise ValidationError("time columns of the pairs disagree")
    gaps = np.diff(t)
    h = float(np.mean(gaps))
    if not h > 0:
        raise ValidationError("sample times must increase")
    dev = np.abs(gaps - h) / h
    if dev.max() > CSV_SPACING_TOL:
        j = int(np.argmax(dev))
        raise ValidationError(f"non-uniform spacing: worst gap {float(gaps[j])!r} between rows {j} and {j + 1} "
                              f"(relative deviation {dev[j]:.3g})")
    vals = data[:, 1::2]
    if vals.shape[1] == 1:
        samples = vals[:, 0]
    elif vals.shape[1] % 2 == 0:
        samples = vals[:, 0::2] + 1j * vals[:, 1::2]
    else:
        samples = vals
    return T.SampledSignal(samples, h, float(t[0]), label=path.name)


def ingest_coefficients(path) -> SM.CoefficientSeries:
    """One value per row (``re`` or ``re, im``), indexed from ``n = 0``; zero beyond the file."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    vals = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row if c.strip()]
            if not cells or cells[0].startswith("#"):
                continue
            try:
                nums = [float(c) for c in cells]
            except ValueError:
                raise ValidationError(f"non-numeric row in {path}: {row}")
            vals.append(complex(nums[0], nums[1] if len(nums) > 1 else 0.0))
    if not vals:
        raise ValidationError(f"{path} contains no data rows")
    arr = np.array(vals, dtype=complex)

    def fn(n):
        n = np.asarray(n).astype(np.int64)
        out = np.zeros(n.shape, dtype=complex)
        m = (n >= 0) & (n < arr.size)
        out[m] = arr[n[m]]
        return out
    return SM.CoefficientSeries(fn, 0, 0.0, path.name)


def parse_grid(text: Optional[str], default=None) -> Optional[np.ndarray]:
    """``lo:hi:n`` to a geometric grid."""
    if text is None:
        return default
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError("grid must be lo:hi:n")
    lo, hi, n = _num(parts[0]), _num(parts[1]), int(parts[2])
    if not (0 < lo < hi) or n < 2:
        raise ValidationError("grid needs 0 < lo < hi and n >= 2")
    return np.geomspace(lo, hi, n)


def parse_linear(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError("range must be lo:hi:n")
    lo, hi, n = _num(parts[0]), _num(parts[1]), int(parts[2])
    if n < 1 or hi < lo:
        raise ValidationError("range needs lo <= hi and n >= 1")
    return np.linspace(lo, hi, n)


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ValidationError(f"not a complex number: {text!r}") from exc


def _signal_from(args):
    if args.csv:
        return ingest_csv(args.csv)
    if not args.generator:
        raise ValidationError("give --generator or --csv")
    return make_signal(args.generator)


def _coeffs_from(args):
    if args.csv:
        return ingest_coefficients(args.csv)
    if not args.generator:
        raise ValidationError("give --generator or --csv")
    return SM.series(args.generator)


def _sv_model(text: Optional[str]) -> SlowVariationModel:
    if not text or text == "constant":
        return CONSTANT
    name, args = _split_generator(text)
    gamma = _num(args[0]) if args else 1.0
    if name == "loglog":
        return SlowVariationModel(family=name, gamma2=gamma)
    return SlowVariationModel(family=name, gamma=gamma)


def _point(text: str) -> R.RationalPoint:
    try:
        fr = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a rational: {text!r}") from exc
    return R.classify_rational(fr.numerator, fr.denominator)


# ---------------------------------------------------------------------------
# subcommands; each returns (result dict, provenance dict, plot text or None)

def cmd_transform(a):
    f = _signal_from(a)
    kern = K.get_kernel(a.kernel)
    x = parse_linear(a.x)
    y = parse_grid(a.y)
    conv = a.convention or ("wavelet" if kern.is_wavelet else "phi")
    fld = T.analyze(f, kern, T.ScaleGrid(x, np.sort(y)), conv)
    return fld.to_dict(), dict(fld.provenance), fld.to_columns()


def cmd_exponent(a):
    f = _signal_from(a)
    kern = K.get_kernel(a.kernel)
    eps = parse_grid(a.grid_eps, TB.default_eps())
    rep = TB.estimate_weak_exponent(f, kern, a.at, eps=eps, n_angles=a.angles, k_max=a.k_max, tol=a.tol)
    plot = None
    if a.plot:
        prof = TB.tauberian_profile(f, kern, a.at, rep.k, eps=eps, n_angles=a.angles)
        m = prof.resolved()
        fit = TB.fit_scaling(prof.eps[m], prof.S[m]).predict(prof.eps) if m.sum() >= 4 else None
        plot = prof.to_columns(fit)
    return rep.to_dict(), {"eps": [float(eps.min()), float(eps.max()), int(eps.size)], "angles": a.angles,
                           "k_max": a.k_max, "tol": a.tol}, plot


def cmd_holder(a):
    f = _signal_from(a)
    kern = K.get_kernel(a.kernel)
    eps = parse_grid(a.grid_eps, TB.default_eps())
    rep = TB.holder_exponent(f, kern, a.at, eps=eps, n_angles=a.angles, k_max=a.k_max)
    prov = {"eps": [float(eps.min()), float(eps.max()), int(eps.size)], "angles": a.angles, "tol": 0.1,
            "shell_rho": [1e-5, 1e-2, 19]}
    plot = None
    if a.plot:
        sp = TB.shell_profile(f, kern, a.at)
        plot = "# rho H floor\n" + "".join(f"{r:.17g} {h:.17g} {fl:.17g}\n" for r, h, fl in zip(sp.rho, sp.H, sp.floor))
    return rep.to_dict(), prov, plot


def cmd_global_holder(a):
    f = _signal_from(a)
    kern = K.get_kernel(a.kernel)
    rep = TB.global_holder_check(f, kern, a.alpha, _sv_model(a.L), y0=a.y0, tol=a.tol)
    return rep.to_dict(), {"y0": a.y0, "tol": a.tol}, None


def cmd_class_estimate(a):
    f = _signal_from(a)
    kern = K.get_kernel(a.kernel)
    rep = TB.class_estimate_fit(f, kern, a.scope, X=a.X)
    return rep.to_dict(), {"X": a.X, "scope": a.scope}, None


def cmd_stabilize(a):
    f = _signal_from(a)
    xs = [_num(v) for v in a.x.split(",")] if a.x else [0.0]
    rep = TB.stabilization_check(f, 2, xs, a.alpha, tol=a.tol)
    return rep.to_dict(), {"d": 2, "tol": a.tol}, None


def cmd_riemann(a):
    if a.action == "classify":
        r = _point(a.r)
        return r.to_dict(), {}, None
    if a.action == "constants":
        r = _point(a.r)
        pc = R.p_constant(r)
        out = {"r": str(r), "parity_class": r.parity_class, "p_r": pc.value, "p_r_defined": pc.defined,
               "gauss_mean": pc.oracle}
        if r.parity_class == "S0":
            g = R.gamma_constant(r)
            out.update({"gamma_r": g.value, "gamma_r_error": g.error, "gamma_r_closed_form": g.closed_form})
        else:
            out["gamma_r"] = R.zeta_r(r, 1.0, method="hurwitz").value
        return out, {}, None
    if a.action == "zeta":
        z = parse_complex(a.z)
        ev = R.zeta_r(_point(a.r), z, method=a.method, order=a.order, tol=a.tol)
        return ev.to_dict(), {"tol": a.tol}, None
    if a.action == "expand":
        return R.weak_expansion(_point(a.r), parse_complex(a.beta), a.M).to_dict(), {}, None
    if a.action == "verify":
        eps = parse_grid(a.grid_eps, np.geomspace(1e-3, 1e-1, 9))
        rep = R.verify_expansion(_point(a.r), parse_complex(a.beta), K.get_kernel(a.kernel), eps, a.M)
        return rep.to_dict(), {"eps": [float(eps.min()), float(eps.max()), int(eps.size)]}, None
    raise ValidationError(f"unknown riemann action {a.action!r}")


def cmd_sum(a):
    if a.action == "laplace":
        h = _laplace_source(a)
        eps = parse_grid(a.grid_eps, None)
        rep = SM.laplace_profile(h, a.alpha, a.kappa, a.k, eps, a.omega)
        return rep.to_dict(), {"kappa": a.kappa, "omega": a.omega}, None
    c = _coeffs_from(a)
    if a.action in ("abel", "lambert"):
        rep = SM.rho_limit(c, SM.KERNELS[a.action](), tol=a.tol)
        return {"method": a.action, **_jsonable(rep)}, {"tol": a.tol}, None
    if a.action == "cesaro":
        rep = SM.cesaro_limit(c, a.order, tol=a.tol)
        return {"method": f"cesaro({a.order})", **_jsonable(rep)}, {"tol": a.tol}, None
    if a.action == "littlewood":
        if a.beta is None:
            raise ValidationError("littlewood needs --beta")
        rep = SM.littlewood_check(c, parse_complex(a.beta), tol=a.tol)
        return rep.to_dict(), {"tol": a.tol}, None
    raise ValidationError(f"unknown sum action {a.action!r}")


def _laplace_source(a):
    if a.csv:
        rows = np.loadtxt(a.csv, delimiter=",", ndmin=2)
        if rows.size == 0:
            raise ValidationError(f"{a.csv} contains no data rows")
        w = rows[:, 1] + (1j * rows[:, 2] if rows.shape[1] > 2 else 0.0)
        return SM.HalfLineAtoms(rows[:, 0], w)
    name, args = _split_generator(a.generator or "")
    if name == "power":
        return SM.PowerDensity(_num(args[0]) if args else 0.0)
    if name == "heaviside":
        return SM.PowerDensity(0.0)
    if name == "dirac":
        return SM.HalfLineAtoms([0.0], [1.0])
    raise ValidationError("laplace sources: power:a, heaviside, dirac or --csv u,w[,w_im]")


def cmd_kernel(a):
    kern = K.get_kernel(a.kernel)
    if a.action == "moments":
        return {"kernel": kern.label, "moments": [K.moment(kern, m) for m in range(a.max_order + 1)],
                "vanishing_order": kern.vanishing_order}, {}, None
    if a.action == "nondegeneracy":
        nd = K.is_nondegenerate(kern)
        idx = K.nondegeneracy_index(kern)
        strong = K.strong_nondegeneracy(kern)
        return {"kernel": kern.label, "nondegenerate": nd, "index": idx, "strong": strong}, {}, None
    if a.action == "reconstruct":
        eta = K.make_reconstruction_wavelet(kern)
        out = {"kernel": kern.label, "c_psi_psi_plus": K.calibration_constant(kern, kern, 1),
               "c_psi_psi_minus": K.calibration_constant(kern, kern, -1),
               "c_psi_eta_plus": K.calibration_constant(kern, eta, 1),
               "c_psi_eta_minus": K.calibration_constant(kern, eta, -1), "eta": eta.label}
        return out, {}, None
    raise ValidationError(f"unknown kernel action {a.action!r}")


# ---------------------------------------------------------------------------
# argument parser

def _common(p, kernel_default="lizorkin_exp", source=True):
    if source:
        p.add_argument("--generator", help="built-in source, e.g. weierstrass:0.6")
        p.add_argument("--csv", help="CSV input file")
    p.add_argument("--kernel", default=kernel_default)
    p.add_argument("--grid-eps", dest="grid_eps", help="eps grid lo:hi:n (geometric)")
    p.add_argument("--angles", type=int, default=TB.DEFAULT_ANGLES)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--json", help="write the report to this path")
    p.add_argument("--plot", help="write plot columns to this path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="asymptoscope", description="Regularizing transforms, Tauberian "
                                 "profiles, Riemann distributions and summability.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("transform", help="transform field on an (x, y) grid")
    _common(p)
    p.add_argument("--x", default="-1:1:5", help="linear x range lo:hi:n")
    p.add_argument("--y", default="0.01:1:5", help="geometric y range lo:hi:n")
    p.add_argument("--convention", choices=T.CONVENTIONS)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("exponent", help="weak scaling exponent at a point")
    _common(p)
    p.add_argument("--at", type=float, default=0.0)
    p.add_argument("--k-max", dest="k_max", type=int, default=TB.K_MAX)
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("holder", help="pointwise Holder exponent and classification")
    _common(p)
    p.add_argument("--at", type=float, default=0.0)
    p.add_argument("--k-max", dest="k_max", type=int, default=TB.K_MAX)
    p.set_defaults(func=cmd_holder)

    p = sub.add_parser("global-holder", help="uniform bound sup_x |W(x, y)| <= C y^alpha L(y)")
    _common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--L", help="slow-variation model, e.g. log:1")
    p.add_argument("--y0", type=float, default=0.1)
    p.set_defaults(func=cmd_global_holder)

    p = sub.add_parser("class-estimate", help="smallest (k, l) growth bound of the field")
    _common(p)
    p.add_argument("--scope", choices=("global", "local"), default="global")
    p.add_argument("--X", type=float, default=50.0)
    p.set_defaults(func=cmd_class_estimate)

    p = sub.add_parser("stabilize", help="long-time heat evolution")
    _common(p, kernel_default="gaussian")
    p.add_argument("--x", help="comma-separated evaluation points")
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_stabilize, tol=1e-6)

    p = sub.add_parser("riemann", help="Riemann distributions and generalized zeta")
    p.add_argument("action", choices=("classify", "constants", "zeta", "expand", "verify"))
    p.add_argument("--r", default="0", help="rational point p/q")
    p.add_argument("--z", default="0")
    p.add_argument("--beta", default="0")
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--method", default="auto", choices=("auto", "direct", "cesaro", "pole-subtracted", "hurwitz"))
    p.add_argument("--order", type=int)
    _common(p, kernel_default="gaussian", source=False)
    p.set_defaults(func=cmd_riemann, tol=1e-4)

    p = sub.add_parser("sum", help="summability of coefficient series")
    p.add_argument("action", choices=("abel", "lambert", "cesaro", "littlewood", "laplace"))
    p.add_argument("--beta")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--omega", type=float, default=1.0)
    _common(p)
    p.set_defaults(func=cmd_sum, tol=1e-6)

    p = sub.add_parser("kernel", help="kernel diagnostics")
    p.add_argument("action", choices=("moments", "nondegeneracy", "reconstruct"))
    p.add_argument("--max-order", dest="max_order", type=int, default=4)
    _common(p, source=False)
    p.set_defaults(func=cmd_kernel)
    return ap


def _options(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "json", "plot", "subcommand")}


def run(argv: Sequence[str]) -> tuple:
    """Parse and dispatch; returns ``(exit_code, report or None, message)``."""
    ap = build_parser()
    args = ap.parse_args(list(argv))
    req = AnalysisRequest(args.subcommand + (f" {args.action}" if hasattr(args, "action") else ""), _options(args))
    t0 = time.time()
    try:
        result, prov, plot = args.func(args)
    except (ValueError, DegeneracyError) as exc:
        return 2, None, f"validation error: {exc}"
    except NumericalError as exc:
        return 3, None, f"numerical error: {exc}"
    rep = AnalysisReport(req, result, prov, {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t0)),
                                             "elapsed_s": round(time.time() - t0, 3)})
    if args.json:
        Path(args.json).write_text(rep.dumps())
    if args.plot and plot is not None:
        Path(args.plot).write_text(plot)
    return 0, rep, ""


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, rep, msg = run(sys.argv[1:] if argv is None else argv)
    if rep is not None:
        sys.stdout.write(rep.dumps())
    if msg:
        sys.stderr.write(msg + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
