"""Geometry of general Dirichlet series: evaluation, level-set tracing, zeros, domains."""

from .series import (
    AbscissaEstimate,
    CallableSpec,
    EvalResult,
    SeriesSpec,
    combination_preset,
    estimate_abscissae,
    euler_product_eval,
    eval_derivative,
    evaluate,
    evaluate_grid,
    make_preset,
    parse_spec_ref,
    uniform_limit_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "AbscissaEstimate",
    "CallableSpec",
    "EvalResult",
    "SeriesSpec",
    "combination_preset",
    "estimate_abscissae",
    "euler_product_eval",
    "eval_derivative",
    "evaluate",
    "evaluate_grid",
    "make_preset",
    "parse_spec_ref",
    "uniform_limit_threshold",
]
