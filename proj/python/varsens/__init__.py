"""Variance-based sensitivity analysis by numerical quadrature."""

from ._varsens import (
    BudgetExceeded,
    Error,
    Expression,
    InputError,
    NumericalError,
    ParameterSpec,
    QuadratureConfig,
    SampleConfig,
    analyze,
    evaluate,
    free_variables,
    grouped_variance,
    mc_sobol_first_order,
    mc_variance_contribution,
    pair_interaction,
    parse,
    parse_legacy_params,
    sobol_first_order,
    total_variance,
    variance_contributions,
)

__all__ = [
    "BudgetExceeded",
    "Error",
    "Expression",
    "InputError",
    "NumericalError",
    "ParameterSpec",
    "QuadratureConfig",
    "SampleConfig",
    "analyze",
    "evaluate",
    "free_variables",
    "grouped_variance",
    "mc_sobol_first_order",
    "mc_variance_contribution",
    "pair_interaction",
    "parse",
    "parse_legacy_params",
    "sobol_first_order",
    "total_variance",
    "variance_contributions",
]
