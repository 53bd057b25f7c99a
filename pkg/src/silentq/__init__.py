"""silentq: patience estimation and queueing analysis under silent abandonment.

Contact-center data often cannot tell a short served conversation from a
customer who left without a word.  This package estimates the patience
distribution from such censored-and-missing data (EM plus two baseline
estimators), simulates the corresponding queueing system, and quantifies the
operational cost of the silent leavers.
"""

from .analytics import EffortInputs, Segment, effort, q_from_proportions, rmse_compare
from .domain import (
    ClassWeights,
    CompleteClass,
    MissingClass,
    Observation,
    ParamSet,
    classify_complete,
    mask,
    scope_report,
)
from .errors import IdentifiabilityError, NumericsError, SilentQError, ValidationError
from .estimators import (
    EmConfig,
    EmTrace,
    M1Policy,
    M2Policy,
    e_step,
    em_fit,
    loglik_complete,
    m_step,
    method1_fit,
    method2_fit,
    resolve_m0,
    solve_theta,
)
from .runners import (
    ExperimentSpec,
    derive_seed,
    run_accuracy,
    run_queuefit,
    run_robustness,
    run_scenario,
    run_sensitivity,
)
from .simulator import (
    BACKEND,
    CustomerRecord,
    Outcome,
    PerfMeasures,
    SimConfig,
    erlang_a_oracle,
    extract_labeled,
    extract_observations,
    sample_iid,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClassWeights",
    "CompleteClass",
    "CustomerRecord",
    "EffortInputs",
    "EmConfig",
    "EmTrace",
    "ExperimentSpec",
    "IdentifiabilityError",
    "M1Policy",
    "M2Policy",
    "MissingClass",
    "NumericsError",
    "Observation",
    "Outcome",
    "ParamSet",
    "PerfMeasures",
    "Segment",
    "SilentQError",
    "SimConfig",
    "ValidationError",
    "classify_complete",
    "derive_seed",
    "e_step",
    "effort",
    "em_fit",
    "erlang_a_oracle",
    "extract_labeled",
    "extract_observations",
    "loglik_complete",
    "m_step",
    "mask",
    "method1_fit",
    "method2_fit",
    "q_from_proportions",
    "resolve_m0",
    "rmse_compare",
    "run_accuracy",
    "run_queuefit",
    "run_robustness",
    "run_scenario",
    "run_sensitivity",
    "sample_iid",
    "scope_report",
    "simulate",
    "solve_theta",
    "__version__",
]
