"""Walker ensembles for the forward and backward diffusions and their statistics."""

from diffusion_ensemble.walkers import (
    Ensemble,
    NoiseSpec,
    backward_step,
    default_clamp,
    euler_maruyama_step,
    noise_block,
    sample_initial,
)
from diffusion_ensemble.trajectories import (
    TrajectoryBundle,
    decode_trajectories,
    encode_trajectories,
    propagate_ensemble,
    read_trajectories,
    series_drift,
    write_trajectories,
)
from diffusion_ensemble.statistics import (
    DriftEstimate,
    EquilibriumReport,
    bin_probabilities,
    equilibrium_test,
    estimate_mean_forward_derivative,
    fokker_planck_reference,
    histogram_counts,
    histogram_density,
)
from diffusion_ensemble.paths import CurrentPath, current_trajectory, field_velocity, series_velocity

__all__ = [
    "Ensemble",
    "NoiseSpec",
    "sample_initial",
    "euler_maruyama_step",
    "backward_step",
    "default_clamp",
    "noise_block",
    "TrajectoryBundle",
    "propagate_ensemble",
    "series_drift",
    "encode_trajectories",
    "decode_trajectories",
    "write_trajectories",
    "read_trajectories",
    "EquilibriumReport",
    "equilibrium_test",
    "histogram_counts",
    "histogram_density",
    "bin_probabilities",
    "DriftEstimate",
    "estimate_mean_forward_derivative",
    "fokker_planck_reference",
    "CurrentPath",
    "current_trajectory",
    "field_velocity",
    "series_velocity",
]
