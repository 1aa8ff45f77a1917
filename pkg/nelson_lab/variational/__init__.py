"""Time-symmetric stochastic action over trajectory bundles and its Euler-Lagrange output."""

from variational.action import (
    BUMP_SHAPES,
    DEFAULT_EPSILONS,
    ActionEstimate,
    Bump,
    PartsCheck,
    SeriesSampler,
    VariationCurve,
    discretized_action,
    fit_slope,
    integration_by_parts_check,
    mirrored_bundle,
    particle_bump,
    perturb_and_measure,
    smooth_bump,
)
from variational.newton import EulerLagrangeResidual, euler_lagrange_residual, time_reversed

__all__ = [
    "Bump",
    "BUMP_SHAPES",
    "smooth_bump",
    "particle_bump",
    "mirrored_bundle",
    "SeriesSampler",
    "ActionEstimate",
    "discretized_action",
    "VariationCurve",
    "DEFAULT_EPSILONS",
    "fit_slope",
    "perturb_and_measure",
    "PartsCheck",
    "integration_by_parts_check",
    "EulerLagrangeResidual",
    "euler_lagrange_residual",
    "time_reversed",
]
