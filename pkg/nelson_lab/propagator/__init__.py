"""Wavefunction propagation in quantum and classical modes."""

from propagator.hamiltonian import SPEED_OF_LIGHT, Hamiltonian, Particle, hamiltonian_matrix
from propagator.stepping import (
    DENSITY_FLOOR,
    CrankNicolsonStepper,
    classical_correction,
    classical_energy,
    crank_nicolson,
    energy,
    imaginary_time_ground_state,
    make_stepper,
    split_step,
)
from propagator.evolution import Evolution, EvolutionSchedule, evolve

__all__ = [
    "SPEED_OF_LIGHT",
    "DENSITY_FLOOR",
    "Hamiltonian",
    "Particle",
    "hamiltonian_matrix",
    "split_step",
    "crank_nicolson",
    "CrankNicolsonStepper",
    "classical_correction",
    "classical_energy",
    "energy",
    "imaginary_time_ground_state",
    "make_stepper",
    "Evolution",
    "EvolutionSchedule",
    "evolve",
]
