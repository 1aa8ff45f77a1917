"""Grid, Hamiltonian and initial state of a scenario config."""

import logging
from typing import List, Optional, Tuple

import numpy as np

from conditional import entangled_pair_state
from lattice import ComplexField, Grid
from propagator import Hamiltonian, Particle, imaginary_time_ground_state
from propagator.potentials import electric_ramp, harmonic, softened_coulomb, uniform_vector_potential
from propagator.states import coherent_state, free_gaussian, gaussian_packet, harmonic_eigenstate, product_state, vortex_phase, vortex_state
from scenario_cli.darwin import darwin_correct
from scenario_cli.schema import ScenarioConfig

logger = logging.getLogger(__name__)


def build_grid(cfg: ScenarioConfig) -> Grid:
    return Grid.uniform(cfg.dims, cfg.grid.points, tuple(cfg.grid.extent), periodic=cfg.grid.periodic)


def build_particles(cfg: ScenarioConfig) -> Tuple[Particle, ...]:
    return tuple(Particle(p.mass, p.charge, axes) for p, axes in zip(cfg.particles, cfg.particle_axes))


def axis_compton_lengths(cfg: ScenarioConfig) -> np.ndarray:
    """Compton length of the particle owning each axis, or the ``darwin.lambda_c`` override."""
    if cfg.darwin.lambda_c is not None:
        return np.full(cfg.dims, cfg.darwin.lambda_c)
    lengths = np.empty(cfg.dims)
    for length, axes in zip(cfg.compton_lengths, cfg.particle_axes):
        lengths[list(axes)] = length
    return lengths


def pair_interaction(cfg: ScenarioConfig, grid: Grid, softening: Optional[float] = None) -> Optional[np.ndarray]:
    """Softened Coulomb energy of a 2x1D pair, Darwin-smeared when requested."""
    softening = softening if softening is not None else cfg.potentials.coulomb_softening
    if softening is None:
        return None
    e1, e2 = (p.charge for p in cfg.particles)
    V = softened_coulomb(grid, e1, e2, softening)
    if cfg.potentials.darwin:
        V = darwin_correct(V, grid, axis_compton_lengths(cfg))
    return V


def build_hamiltonian(cfg: ScenarioConfig, grid: Optional[Grid] = None) -> Hamiltonian:
    grid = grid or build_grid(cfg)
    particles = build_particles(cfg)
    pot = cfg.potentials
    external = None
    if pot.harmonic_omega is not None:
        masses = np.empty(grid.dims)
        for p in particles:
            masses[list(p.axes)] = p.mass
        external = harmonic(grid, masses, pot.harmonic_omega)
    vector_potential = None
    if pot.vector_potential:
        vector_potential = uniform_vector_potential(pot.vector_potential)
    elif pot.electric_field:
        vector_potential = electric_ramp(pot.electric_field, cfg.constants.c)
    return Hamiltonian(
        grid,
        particles,
        hbar=cfg.constants.hbar,
        c=cfg.constants.c,
        external=external,
        interaction=pair_interaction(cfg, grid),
        vector_potential=vector_potential,
        include_rest_energy=cfg.evolution.include_rest_energy,
    )


def _per_axis(values: Tuple[float, ...], default: float, count: int) -> List[float]:
    return list(values) if values else [default] * count


def initial_state(cfg: ScenarioConfig, H: Hamiltonian) -> ComplexField:
    """The requested initial wavefunction, normalized."""
    init, grid, hbar = cfg.initial, H.grid, cfg.constants.hbar
    masses = H.axis_masses
    omega = cfg.potentials.harmonic_omega or 1.0
    packets = 2 if init.kind == "entangled_pair" else grid.dims
    centers = _per_axis(init.centers, 0.0, packets)
    widths = _per_axis(init.widths, 1.0, packets)
    boosts = _per_axis(init.boosts, 0.0, packets)
    logger.info("preparing %s initial state on a %s grid", init.kind, "x".join(str(n) for n in grid.points))

    if init.kind == "gaussian":
        psi = gaussian_packet(grid, centers, widths, boosts)
    elif init.kind == "eigenstate":
        factors = [harmonic_eigenstate(grid.axis(a) - centers[a], init.n, omega, hbar, masses[a]) for a in range(grid.dims)]
        psi = product_state(grid, factors)
    elif init.kind == "coherent":
        factors = [coherent_state(grid.axis(a), 0.0, centers[a], boosts[a], omega, hbar, masses[a]) for a in range(grid.dims)]
        psi = product_state(grid, factors)
    elif init.kind == "entangled_pair":
        x = grid.axis(0)
        a = free_gaussian(x, 0.0, centers[0], widths[0], boosts[0], hbar, masses[0])
        b = free_gaussian(x, 0.0, centers[1], widths[1], boosts[1], hbar, masses[1])
        psi = entangled_pair_state(grid, a, b).psi
    elif init.kind == "vortex":
        center = tuple(centers)
        psi = vortex_state(grid, init.ell, omega, hbar, masses[0], center)
        if init.relax:
            psi, energy = imaginary_time_ground_state(H, psi0=psi, phase_lock=vortex_phase(grid, init.ell, center))
            logger.info("relaxed l=%d vortex to E=%.10f", init.ell, energy)
    else:
        psi, energy = imaginary_time_ground_state(H)
        logger.info("relaxed ground state to E=%.10f", energy)

    phase = float(np.sum(init.phases))
    if phase:
        psi = ComplexField(grid, psi.values * np.exp(1j * phase))
    return psi
