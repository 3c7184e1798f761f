"""Kernel feature learning (IRKM / RFM) with Fourier-Walsh ground-truth tools."""

from ._irkm import (  # noqa: F401
    ConfigError,
    Error,
    ParseError,
    coordinate_weight,
    gram,
    hermite_eval,
    krr_fit,
    leap_complexity,
    max_leap_component,
    median_bandwidth,
    parse_target,
    run_config,
    train,
    verify,
    version,
)

__version__ = version()
