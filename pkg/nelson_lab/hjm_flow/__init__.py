"""Direct integration of the hydrodynamic (density, velocity) equations."""

from hjm_flow.state import HydroState, bounded, from_wavefunction, vortex_initializer
from hjm_flow.flow import (
    COURANT_LIMIT,
    HydroRun,
    bernoulli_energy,
    courant_number,
    curl_ratio,
    flow_energy,
    integrate_hydrodynamic,
    run_hydrodynamic,
)
from hjm_flow.experiments import (
    CirculationDrift,
    circulation_drift_experiment,
    compare_to_schrodinger,
    measure_circulation,
    trapped_vortex,
)

__all__ = [
    "HydroState",
    "bounded",
    "from_wavefunction",
    "vortex_initializer",
    "COURANT_LIMIT",
    "HydroRun",
    "bernoulli_energy",
    "courant_number",
    "curl_ratio",
    "flow_energy",
    "integrate_hydrodynamic",
    "run_hydrodynamic",
    "CirculationDrift",
    "circulation_drift_experiment",
    "compare_to_schrodinger",
    "measure_circulation",
    "trapped_vortex",
]
