"""Conditional wavefunctions of a two-particle state and the identities they satisfy."""

from conditional.slices import (
    ConditionalSeries,
    ConditionalSlice,
    apply_hamiltonian,
    conditioning_path,
    cut_state,
    pair_axes,
    sample_along,
    slice_conditional,
)
from conditional.identities import (
    ConditionalResidual,
    conditional_circulation,
    conditional_continuity_residual,
    conditional_osmotic,
    conditional_qhj_residual,
    conditional_schrodinger_residual,
    osmotic_deviation,
    residual_table,
)
from conditional.pairs import (
    PairState,
    ReducedMass,
    circulation_sectors,
    entangled_pair_state,
    exchange_asymmetry,
    reduced_mass_transform,
    relative_phase_lock,
    softened_interaction,
)

__all__ = [
    "ConditionalSlice",
    "ConditionalSeries",
    "slice_conditional",
    "conditioning_path",
    "cut_state",
    "pair_axes",
    "sample_along",
    "apply_hamiltonian",
    "ConditionalResidual",
    "conditional_continuity_residual",
    "conditional_qhj_residual",
    "conditional_schrodinger_residual",
    "conditional_osmotic",
    "osmotic_deviation",
    "conditional_circulation",
    "residual_table",
    "PairState",
    "entangled_pair_state",
    "exchange_asymmetry",
    "ReducedMass",
    "reduced_mass_transform",
    "softened_interaction",
    "relative_phase_lock",
    "circulation_sectors",
]
