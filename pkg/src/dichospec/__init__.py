"""dichospec: dichotomy spectra of discrete nonautonomous linear systems.

Systems ``x(k+1) = A(k) x(k)`` are handled in log-scaled form; dichotomy
parameters are fitted by small linear programs over a finite window of
``(k, n)`` pairs, and spectra are the gammas where the weighted system
fails to admit a dichotomy of the chosen class.
"""

__version__ = "0.1.0"

from .growth import GrowthRate, GrowthRateError, make_rate, rate_from_csv, rate_from_table
from .system import (EvolutionOperator, LinearSystem, ProjectorFamily, WeightedSystem,
                     coordinate_projector, diagonal_system, identity_projector, pair_log_norms,
                     system_from_csv, transition, weighted, zero_projector)
from .dichotomy_fit import (DEFAULT_CAPS, DichotomyParams, FitCaps, FitInfeasible, FitReport,
                            GrowthFit, feasible_projectors, fit_stable, fit_unstable, growth_fit,
                            upp_check, usp_check, verify)
from .spectrum import (NotInResolvent, SpectrumEstimate, dimension_map, estimate_spectrum,
                       resolvent_test, upp_spectrum)
from .ratio_maps import boundary_locator, divergence_check, ratio_at, sweep_gap, sweep_ratios
from .kinematics import (SimilarityMap, check_weakly_nondegenerate, exp_scaling, identity_map,
                         invariance_experiment, near_spectrum_breakdown, transform,
                         transported_params)
from .corpus import Interval, diagonal_compose, get_example, list_examples

__all__ = [
    "GrowthRate", "GrowthRateError", "make_rate", "rate_from_csv", "rate_from_table",
    "LinearSystem", "WeightedSystem", "ProjectorFamily", "EvolutionOperator", "transition",
    "coordinate_projector", "identity_projector", "zero_projector", "diagonal_system",
    "system_from_csv", "weighted", "pair_log_norms",
    "FitCaps", "DEFAULT_CAPS", "DichotomyParams", "FitReport", "GrowthFit", "FitInfeasible",
    "fit_stable", "fit_unstable", "verify", "growth_fit", "feasible_projectors", "usp_check",
    "upp_check",
    "SpectrumEstimate", "NotInResolvent", "resolvent_test", "estimate_spectrum", "upp_spectrum",
    "dimension_map",
    "ratio_at", "sweep_ratios", "sweep_gap", "boundary_locator", "divergence_check",
    "SimilarityMap", "exp_scaling", "identity_map", "check_weakly_nondegenerate", "transform",
    "transported_params", "near_spectrum_breakdown", "invariance_experiment",
    "Interval", "get_example", "list_examples", "diagonal_compose",
]
