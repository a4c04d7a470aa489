"""Conformal calibration of warning systems to a false-negative-rate budget.

The library calibrates a warn/no-warn monitor on the surrogate scores of
unsafe examples only, adjusts the target miss rate for the finite sample
size, and certifies the resulting false negative rate without any
distributional assumption beyond exchangeability.  A synthetic data
generator and a Monte-Carlo harness verify the guarantee and measure the
false-positive cost.
"""

__version__ = "0.1.0"

from .core import (
    CalibrationScores,
    EpsilonBudget,
    QuantileResult,
    SafetySample,
    WarningDecision,
    adjusted_epsilon,
    build_calibration,
    conformal_quantile,
    decision_stream,
    fnr_upper_bound,
    fpr_lower_bound,
    min_unsafe_samples,
    warn,
    warn_deterministic,
)
from .errors import (
    ConformalGuardError,
    ConsistencyError,
    ParameterError,
    ParseError,
    ValidationError,
)
from .generate import (
    GRASP_THRESHOLD,
    GeneratorConfig,
    generate_exchangeable_pairs,
    generate_grasp_dataset,
    generate_scene_sequence,
)
from .harness import (
    EvalReport,
    PacConformalComparison,
    TrialResult,
    pac_sample_complexity,
    pac_vs_conformal_report,
    run_trial,
    run_trials,
    summarize_trials,
    sweep,
)
from .scores import (
    EgoState,
    ScoreDegradation,
    classifier_prob_score,
    degrade_samples,
    degrade_score,
    mahalanobis_safety,
    squash_distance_score,
)

__all__ = [
    "__version__",
    "CalibrationScores",
    "EpsilonBudget",
    "QuantileResult",
    "SafetySample",
    "WarningDecision",
    "adjusted_epsilon",
    "build_calibration",
    "conformal_quantile",
    "decision_stream",
    "fnr_upper_bound",
    "fpr_lower_bound",
    "min_unsafe_samples",
    "warn",
    "warn_deterministic",
    "ConformalGuardError",
    "ConsistencyError",
    "ParameterError",
    "ParseError",
    "ValidationError",
    "GRASP_THRESHOLD",
    "GeneratorConfig",
    "generate_exchangeable_pairs",
    "generate_grasp_dataset",
    "generate_scene_sequence",
    "EvalReport",
    "PacConformalComparison",
    "TrialResult",
    "pac_sample_complexity",
    "pac_vs_conformal_report",
    "run_trial",
    "run_trials",
    "summarize_trials",
    "sweep",
    "EgoState",
    "ScoreDegradation",
    "classifier_prob_score",
    "degrade_samples",
    "degrade_score",
    "mahalanobis_safety",
    "squash_distance_score",
]
