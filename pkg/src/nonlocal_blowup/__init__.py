"""Simulation and analysis of the nonlocal system u_t = alpha u v, v_t = beta H(u^2)."""
from .analysis import (BlowupFit, FitWindow, SelfSimilarFrame, bkm_monitor,
                       collapse_profiles, estimate_lambda, extract_profile, fit_blowup)
from .config import PRESETS, RunConfig, build_initial_condition, get_preset
from .dynamics import ModelSpec, ScalingParams, Variant, normalize_scaling, rhs
from .grid import (Field, Grid, NormRecord, SolutionState, derivative, line_grid,
                   make_grid, norms, periodic_grid, spectral_derivative)
from .hilbert import (TestWeight, hilbert, hilbert_alternating_trapezoidal,
                      hilbert_periodic, weighted_bilinear_lhs, weighted_bilinear_rhs)
from .integrator import (NonFiniteState, RunResult, StepPolicy, StopReason, StopSpec,
                         integrating_factor_rk4_step, rk4_step, run)
from .theory import (BlowupCertificate, RegularityCertificate, blowup_certificate,
                     check_global_regularity, incomplete_blowup_integral, verify_bound,
                     verify_decay)

__all__ = [
    "BlowupCertificate", "BlowupFit", "Field", "FitWindow", "Grid", "ModelSpec",
    "NonFiniteState", "NormRecord", "PRESETS", "RegularityCertificate", "RunConfig",
    "RunResult", "ScalingParams", "SelfSimilarFrame", "SolutionState", "StepPolicy",
    "StopReason", "StopSpec", "TestWeight", "Variant", "bkm_monitor", "blowup_certificate",
    "build_initial_condition", "check_global_regularity", "collapse_profiles", "derivative",
    "estimate_lambda", "extract_profile", "fit_blowup", "get_preset", "hilbert",
    "hilbert_alternating_trapezoidal", "hilbert_periodic", "incomplete_blowup_integral",
    "integrating_factor_rk4_step", "line_grid", "make_grid", "normalize_scaling", "norms",
    "periodic_grid", "rhs", "rk4_step", "run", "spectral_derivative", "verify_bound",
    "verify_decay", "weighted_bilinear_lhs", "weighted_bilinear_rhs",
]

__version__ = "0.1.0"
