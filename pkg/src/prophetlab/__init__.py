"""Threshold stopping rules with conservative predictions of the maximum:
exact evaluators, threshold constructions, worst-case instances, and
verification of the guarantee curves."""

from .core import (
    BernoulliInstance,
    BernoulliVar,
    Exponential,
    GeneralInstance,
    InstanceFormatError,
    PointMass,
    Realization,
    TruncatedExponential,
    Uniform,
    instance,
    load_instance,
    max_law,
    prefix,
    save_instance,
    sort_instance,
    to_general,
    validate,
)
from .exact_eval import (
    EvalReport,
    max_tail,
    opt_value,
    tal,
    tal_alpha,
    tal_alpha_randomized,
    tal_realized,
)
from .thresholds import (
    ThresholdPolicy,
    effective_threshold,
    policy_value,
    sc_threshold,
    tail_threshold,
    tau_star,
)
from .reductions import DiscretizationConfig, bernoullify, discretize, full_reduction
from .oracle import best_threshold, dp_optimal_online, enumerate_opt, enumerate_tal_alpha
from .montecarlo import McConfig, SweepResult, mc_evaluate, mc_ratio_sweep, sample_values

__version__ = "0.1.0"
