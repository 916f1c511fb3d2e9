"""P-value combination methods with Monte Carlo calibration."""

from ._core import (
    DataError,
    GuardError,
    Session,
    UsageError,
    __version__,
    association_measure,
    bh_qvalues,
    cauchy_sf,
    chi2_sf,
    fit_feature_regression,
    method_names,
    normal_quantile,
)

__all__ = [
    "DataError",
    "GuardError",
    "Session",
    "UsageError",
    "__version__",
    "association_measure",
    "bh_qvalues",
    "cauchy_sf",
    "chi2_sf",
    "fit_feature_regression",
    "method_names",
    "normal_quantile",
]
