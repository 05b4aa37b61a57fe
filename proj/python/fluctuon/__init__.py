"""Dean-Kawasaki fluctuation laboratory."""

from ._core import (
    Coefficients,
    ConfigError,
    Error,
    GridMismatch,
    InvalidArgument,
    QuadratureError,
    RegimeViolation,
    ReportMismatch,
    ResolutionTooSmall,
    RunConfig,
    dft,
    f3_closed_form_1d,
    h_neg_norm,
    linear_case,
    make_schedule,
    model_case,
    moser_remainder,
    moser_series,
    parse_config,
    run,
    simulate_path,
    smooth_near_zero,
    structure_sums,
    theta_phi_q,
    validate_assumptions,
)

__all__ = [
    "Coefficients",
    "ConfigError",
    "Error",
    "GridMismatch",
    "InvalidArgument",
    "QuadratureError",
    "RegimeViolation",
    "ReportMismatch",
    "ResolutionTooSmall",
    "RunConfig",
    "dft",
    "f3_closed_form_1d",
    "h_neg_norm",
    "linear_case",
    "make_schedule",
    "model_case",
    "moser_remainder",
    "moser_series",
    "parse_config",
    "run",
    "simulate_path",
    "smooth_near_zero",
    "structure_sums",
    "theta_phi_q",
    "validate_assumptions",
]
