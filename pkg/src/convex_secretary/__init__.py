"""Secretary algorithms for profit maximisation under convex costs."""

from .constrained import (
    G_gamma,
    H_gamma,
    decompose,
    is_bounded,
    offline_matroid,
    run_matroid,
)
from .core import CostFunction, Element, FractionalSet, Instance, Kind, classify, density, profit, single_dim
from .errors import ConfigError, InternalConsistencyError, InvariantViolation
from .harness import ExperimentConfig, TrialRecord, audit_trace, estimate_cr, event_report, generate_instance
from .matroid import Matroid, SumOfValuesSecretary, is_independent, matroid_greedy
from .multidim import (
    find_density,
    find_proper_density,
    offline_matroid_multi,
    offline_unconstrained_multi,
    run_multi_unconstrained,
    run_multi_matroid,
)
from .offline import fractional_opt, greedy_offline
from .online import choose_tau, dynkin, run_unconstrained
from .oracle import brute_force_fractional, brute_force_opt
from .sampling import beta_of_c, sample_split, verify_concentration
from .trace import OnlineTrace

__version__ = "0.1.0"

__all__ = [
    "audit_trace",
    "beta_of_c",
    "brute_force_fractional",
    "brute_force_opt",
    "choose_tau",
    "classify",
    "ConfigError",
    "CostFunction",
    "decompose",
    "density",
    "dynkin",
    "Element",
    "estimate_cr",
    "event_report",
    "ExperimentConfig",
    "find_density",
    "find_proper_density",
    "fractional_opt",
    "FractionalSet",
    "G_gamma",
    "generate_instance",
    "greedy_offline",
    "H_gamma",
    "Instance",
    "InternalConsistencyError",
    "InvariantViolation",
    "is_bounded",
    "is_independent",
    "Kind",
    "Matroid",
    "matroid_greedy",
    "offline_matroid",
    "offline_matroid_multi",
    "offline_unconstrained_multi",
    "OnlineTrace",
    "profit",
    "run_unconstrained",
    "run_matroid",
    "run_multi_unconstrained",
    "run_multi_matroid",
    "sample_split",
    "single_dim",
    "SumOfValuesSecretary",
    "TrialRecord",
    "verify_concentration",
]
