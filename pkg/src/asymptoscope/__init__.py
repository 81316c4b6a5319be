"""Regularizing transforms of distributions and numerical Tauberian analysis."""

from .asymptotics import CONSTANT, DriftFunction, SlowVariationModel, eval_sv, potter_check
from .errors import BranchConflictError, DegeneracyError, NumericalError, ValidationError
from .kernels import KernelSpec, get_kernel
from .riemann import classify_rational, gamma_constant, gauss_mean, p_constant, verify_expansion, weak_expansion, zeta_r
from .summability import abel_limit, cesaro_limit, littlewood_check, laplace_profile, rho_sum
from .tauberian import (angular_limit, class_estimate_fit, estimate_weak_exponent, global_holder_check,
                        holder_exponent, stabilization_check, tauberian_profile)
from .transform import (AtomicSpectrum, HomogeneousModel, SampledSignal, ScaleGrid, SeriesSpectrum, analyze,
                        evaluate)

__version__ = "0.1.0"
SCHEMA_VERSION = "asymptoscope/1"

__all__ = [
    "CONSTANT", "DriftFunction", "SlowVariationModel", "eval_sv", "potter_check",
    "BranchConflictError", "DegeneracyError", "NumericalError", "ValidationError",
    "KernelSpec", "get_kernel",
    "classify_rational", "gamma_constant", "gauss_mean", "p_constant", "verify_expansion", "weak_expansion",
    "zeta_r",
    "abel_limit", "cesaro_limit", "littlewood_check", "laplace_profile", "rho_sum",
    "angular_limit", "class_estimate_fit", "estimate_weak_exponent", "global_holder_check", "holder_exponent",
    "stabilization_check", "tauberian_profile",
    "AtomicSpectrum", "HomogeneousModel", "SampledSignal", "ScaleGrid", "SeriesSpectrum", "analyze", "evaluate",
]
