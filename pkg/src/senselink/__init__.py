"""senselink: inference-oriented design of sensing-and-communication links.

Feature models, discriminant-gain and MSE water-filling transceiver
designs, closed-form error analysis, and a deterministic Monte Carlo
engine, with a small CLI for sweep experiments.
"""

__version__ = "0.1.0"

from .model import (
    DEFAULT_MODEL_SEED,
    FeatureModel,
    PowerBudget,
    SensingConfig,
    effective_variances,
    feature_second_moments,
    load_model,
    pairwise_mean_gaps,
    sample_features,
    save_model,
    synthesize_model,
)
from .transceiver import (
    ChannelRealization,
    TransceiverDesign,
    WaterfillError,
    achieved_dg,
    mmse_scaling,
    single_carrier_dg,
    single_carrier_mse_design,
    waterfill_dg,
    waterfill_mse,
)
from .analysis import (
    ErrorBound,
    average_dg_closed_form,
    binary_error_probability,
    exp_integral_e1,
    multivariate_dg,
    q_function,
    union_lower_bound,
)
from .sim import (
    ChannelModel,
    SimConfig,
    SweepResult,
    SweepRow,
    estimate_error,
    ml_classify,
    paired_design_draws,
    sample_channel,
    sweep_beta,
    sweep_power,
    transmit_and_receive,
)

__all__ = [
    "DEFAULT_MODEL_SEED",
    "FeatureModel",
    "PowerBudget",
    "SensingConfig",
    "effective_variances",
    "feature_second_moments",
    "load_model",
    "pairwise_mean_gaps",
    "sample_features",
    "save_model",
    "synthesize_model",
    "ChannelRealization",
    "TransceiverDesign",
    "WaterfillError",
    "achieved_dg",
    "mmse_scaling",
    "single_carrier_dg",
    "single_carrier_mse_design",
    "waterfill_dg",
    "waterfill_mse",
    "ErrorBound",
    "average_dg_closed_form",
    "binary_error_probability",
    "exp_integral_e1",
    "multivariate_dg",
    "q_function",
    "union_lower_bound",
    "ChannelModel",
    "SimConfig",
    "SweepResult",
    "SweepRow",
    "estimate_error",
    "ml_classify",
    "paired_design_draws",
    "sample_channel",
    "sweep_beta",
    "sweep_power",
    "transmit_and_receive",
]
