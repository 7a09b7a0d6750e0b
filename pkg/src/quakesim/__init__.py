"""quakesim: exact simulation and verification toolkit for a hybrid
stress-release / self-exciting earthquake point process."""

from .analysis import (
    ConvergencePoint,
    ConvergenceReport,
    DominanceReport,
    GrowthReport,
    InsufficientDataError,
    LemmaRow,
    Regime,
    RegimeError,
    SummaryStats,
    convergence_diagnostic,
    dominance_test,
    estimate_rates,
    lemma_l2_check,
    regime,
    supercritical_probe,
    theoretical_rate,
)
from .chain import (
    EventLog,
    EventRecord,
    StopRule,
    flow,
    integrated_phi_x,
    integrated_y,
    simulate,
    state_at,
    step_natural,
    step_truncated,
    window_integrals,
)
from .foster import (
    ConstraintCheck,
    ConstraintReport,
    DriftEstimate,
    FosterInfeasibleError,
    ReturnTimeStats,
    WeightConstraintError,
    estimate_drift,
    foster_params,
    return_times,
    validate_foster,
)
from .foster_config import FosterConfig
from .model import (
    DeterministicZ,
    ExponentialPhi,
    ExponentialZ,
    ModelParams,
    State,
    ThresholdLinearPhi,
    UniformZ,
    cumulative_hazard_numeric,
    cumulative_hazard_primary,
    intensity,
    intensity_saturated,
    phi_eval,
    z_mean,
    z_sample,
    z_samples,
)
from .sampler import (
    TruncatedDraw,
    sample_interevent,
    sample_interevent_truncated,
    sample_primary_time,
    sample_primary_times,
    sample_secondary_time,
    sample_secondary_times,
)
from .streams import master, substream
from .thinning import simulate_thinning

__version__ = "0.1.0"

__all__ = [
    "ConvergencePoint",
    "ConvergenceReport",
    "DominanceReport",
    "GrowthReport",
    "InsufficientDataError",
    "LemmaRow",
    "Regime",
    "RegimeError",
    "SummaryStats",
    "convergence_diagnostic",
    "dominance_test",
    "estimate_rates",
    "lemma_l2_check",
    "regime",
    "supercritical_probe",
    "theoretical_rate",
    "EventLog",
    "EventRecord",
    "StopRule",
    "flow",
    "integrated_phi_x",
    "integrated_y",
    "simulate",
    "state_at",
    "step_natural",
    "step_truncated",
    "window_integrals",
    "ConstraintCheck",
    "ConstraintReport",
    "DriftEstimate",
    "FosterConfig",
    "FosterInfeasibleError",
    "ReturnTimeStats",
    "WeightConstraintError",
    "estimate_drift",
    "foster_params",
    "return_times",
    "validate_foster",
    "DeterministicZ",
    "ExponentialPhi",
    "ExponentialZ",
    "ModelParams",
    "State",
    "ThresholdLinearPhi",
    "UniformZ",
    "cumulative_hazard_numeric",
    "cumulative_hazard_primary",
    "intensity",
    "intensity_saturated",
    "phi_eval",
    "z_mean",
    "z_sample",
    "z_samples",
    "TruncatedDraw",
    "sample_interevent",
    "sample_interevent_truncated",
    "sample_primary_time",
    "sample_primary_times",
    "sample_secondary_time",
    "sample_secondary_times",
    "master",
    "substream",
    "simulate_thinning",
    "__version__",
]
