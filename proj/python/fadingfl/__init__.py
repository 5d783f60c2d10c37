"""Python bindings for the fading-channel federated learning simulator."""

import json as _json

from ._core import (
    ConfigError,
    FadingModel,
    NumericFailure,
    ParseError,
    default_config,
    expected_min_rate,
    fixed_rate,
    grid_labels,
    min_gain_cdf,
    min_gain_pdf,
    normalize_config,
    outage_probability,
    rates_csv,
    run_replicate,
    train_csv,
    validate,
)

__all__ = [
    "ConfigError",
    "FadingModel",
    "NumericFailure",
    "ParseError",
    "config_json",
    "default_config",
    "expected_min_rate",
    "fixed_rate",
    "grid_labels",
    "min_gain_cdf",
    "min_gain_pdf",
    "normalize_config",
    "outage_probability",
    "rates_csv",
    "run_replicate",
    "train_csv",
    "validate",
]


def config_json(config=None, **overrides):
    """Builds a configuration string from a dict and/or keyword overrides."""
    doc = dict(config or {})
    doc.update(overrides)
    return _json.dumps(doc)
