"""Spectral laboratory for time-periodic evolution operators.

Solves the mode equations D_t u_j + lam_j c(t) u_j = f_j by explicit
periodic formulas, classifies coefficient fields by eigencoefficient
decay, decides global hypoellipticity with certificates, and constructs
the explicit witness families for sign-changing Im(c).
"""

from .diophantine import (DiophantineReport, check_condition_A,
                          construct_liouville, nearest_integer_gap, parse_alpha)
from .engine import (OperatorSpec, SignAnalysis, Verdict, Witness,
                     analyze_sign, build_counterexample, gh_experiment,
                     verdict, verify_counterexample)
from .modes import (FieldSolution, ModeSolution, mode_residual_sup,
                    resonant_set, solve_constant_mode, solve_field,
                    solve_variable_mode, stable_one_minus_exp)
from .regularity import (CoefficientField, condition_star, condition_star_star,
                         distribution_order_fit, seminorm_decay, sk_norm,
                         synthesis_membership)
from .spectral import (EigenvalueSequence, GrowthCertificate, WeylModel,
                       counting_function, generate_weyl, tilde, verify_growth)
from .torus import (PeriodicFunction, bump, gevrey_norm, power_exp_peak_log,
                    quadrature, quadrature_to_tolerance)

__version__ = "0.1.0"

__all__ = [
    "CoefficientField", "DiophantineReport", "EigenvalueSequence",
    "FieldSolution", "GrowthCertificate", "ModeSolution", "OperatorSpec",
    "PeriodicFunction", "SignAnalysis", "Verdict", "WeylModel", "Witness",
    "analyze_sign", "bump", "build_counterexample", "check_condition_A",
    "condition_star", "condition_star_star", "construct_liouville",
    "counting_function", "distribution_order_fit", "generate_weyl",
    "gevrey_norm", "gh_experiment", "mode_residual_sup",
    "nearest_integer_gap", "parse_alpha", "power_exp_peak_log", "quadrature",
    "quadrature_to_tolerance", "resonant_set", "seminorm_decay", "sk_norm",
    "solve_constant_mode", "solve_field", "solve_variable_mode",
    "stable_one_minus_exp", "synthesis_membership", "tilde", "verdict",
    "verify_counterexample", "verify_growth",
]
