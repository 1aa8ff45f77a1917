"""Madelung decomposition and the hydrodynamic identities it satisfies."""

from madelung.fields import (
    MadelungFields,
    MadelungSeries,
    canonical_momentum,
    decompose,
    density_floor,
    probability_current,
    quantum_kinetic,
)
from madelung.identities import (
    continuity_residual,
    density_rate,
    fokker_planck_residual,
    force_acceleration,
    mean_acceleration,
    mean_derivative,
    quantum_hamilton_jacobi_residual,
    residual_summary,
    series_residuals,
)
from madelung.osmotic import osmotic_potential_accumulate, reported_osmotic_source

__all__ = [
    "MadelungFields",
    "MadelungSeries",
    "decompose",
    "density_floor",
    "quantum_kinetic",
    "probability_current",
    "canonical_momentum",
    "continuity_residual",
    "density_rate",
    "fokker_planck_residual",
    "series_residuals",
    "mean_derivative",
    "mean_acceleration",
    "force_acceleration",
    "quantum_hamilton_jacobi_residual",
    "residual_summary",
    "osmotic_potential_accumulate",
    "reported_osmotic_source",
]
