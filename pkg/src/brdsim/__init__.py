"""Best-response dynamics on random two-player games with correlated payoffs."""

from ._backend import NAME as BACKEND
from .brd import (BrdTrace, ConvergedToPne, StoppingTimes, Trapped, classify_outcome,
                  max_tau_ne, r_formula, revealed_set_size, run_brd)
from .equilibrium import PneReport, enumerate_pne, expected_pne, is_pne, pne_probability_at_profile
from .exact import (beta_compare, beta_max_cdf, dominance_cdf, hazard, iid_c0, iid_c1,
                    iid_convergence_bound, limit_constants, tau_distribution)
from .game import (DenseGame, GameParams, LazyGame, ParameterError, densify, generate_dense,
                   load_dense, reveal, save_dense)
from .harness import (ExperimentSpec, PointStats, SummaryStats, compare_empirical_exact,
                      load_spec, phase_sweep, run_experiment)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BrdTrace", "ConvergedToPne", "DenseGame", "ExperimentSpec", "GameParams",
    "LazyGame", "ParameterError", "PneReport", "PointStats", "StoppingTimes", "SummaryStats",
    "Trapped", "beta_compare", "beta_max_cdf", "classify_outcome", "compare_empirical_exact",
    "densify", "dominance_cdf", "enumerate_pne", "expected_pne", "generate_dense", "hazard",
    "iid_c0", "iid_c1", "iid_convergence_bound", "is_pne", "limit_constants", "load_dense",
    "load_spec", "max_tau_ne", "phase_sweep", "pne_probability_at_profile", "r_formula",
    "reveal", "revealed_set_size", "run_brd", "run_experiment", "save_dense", "tau_distribution",
]
