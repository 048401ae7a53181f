"""Group-banded Bayesian regression with interpretable group importances."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Dataset,
    EmBandedConfig,
    GroupPartition,
    MultiClass,
    MultiLabel,
    Regression,
    Standardization,
    build_prior_covariance,
    standardize,
    validate_partition,
)
from .em import FitResult, e_step, fit, group_importances, log_posterior, m_step, predict  # noqa: E402
from .ridge import RidgeConfig, ridge_fit  # noqa: E402
from .tagging import TaggingModel, aggregate_importances, classify, fit_tagger, score  # noqa: E402
