"""Online reserve price learning: Conv-OGA, V-Conv-OGA and ERM baselines."""

from ._rtreserve import (
    BidDistribution,
    ConfigError,
    GaussianKernel,
    Learner,
    convolved_expected_revenue,
    convolved_gradient,
    convolved_payoff,
    make_learner,
    monopoly_price,
    monopoly_revenue,
    run_config,
)

__all__ = [
    "BidDistribution",
    "ConfigError",
    "GaussianKernel",
    "Learner",
    "convolved_expected_revenue",
    "convolved_gradient",
    "convolved_payoff",
    "make_learner",
    "monopoly_price",
    "monopoly_revenue",
    "run_config",
]
