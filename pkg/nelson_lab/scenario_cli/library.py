"""Ready-made scenarios, sized to finish on one laptop core."""

from dataclasses import replace
from typing import Callable, Dict

from errors import ParseError
from scenario_cli.schema import (
    CirculationSpec,
    DarwinSpec,
    EnsembleSpec,
    EvolutionSpec,
    GridSpec,
    HjmSpec,
    InitialSpec,
    ParticleSpec,
    PotentialSpec,
    ScenarioConfig,
    VariationalSpec,
)

PAIR_GRID = GridSpec(points=128, extent=(-12.0, 12.0))
# Coulomb softening of two grid spacings on PAIR_GRID
PAIR_SOFTENING = 2.0 * 24.0 / 128


def free_gaussian(mode: str = "quantum") -> ScenarioConfig:
    return ScenarioConfig(
        name="free_gaussian" if mode == "quantum" else "free_gaussian_classical",
        grid=GridSpec(points=1024, extent=(-16.0, 16.0)),
        initial=InitialSpec(kind="gaussian", widths=(1.0,)),
        evolution=EvolutionSpec(mode=mode, dt=1e-3, T=1.0, stride=50),
    )


def harmonic_ground() -> ScenarioConfig:
    return ScenarioConfig(
        name="harmonic_ground",
        grid=GridSpec(points=128, extent=(-10.0, 10.0)),
        initial=InitialSpec(kind="eigenstate", n=0),
        potentials=PotentialSpec(harmonic_omega=1.0),
        evolution=EvolutionSpec(dt=1e-3, T=5.0, stride=100),
        ensemble=EnsembleSpec(walkers=50_000, seed=20240611, stride=100),
    )


def harmonic_coherent() -> ScenarioConfig:
    return ScenarioConfig(
        name="harmonic_coherent",
        grid=GridSpec(points=128, extent=(-10.0, 10.0)),
        initial=InitialSpec(kind="coherent", centers=(2.0,)),
        potentials=PotentialSpec(harmonic_omega=1.0),
        evolution=EvolutionSpec(dt=1e-3, T=3.0, stride=10),
        ensemble=EnsembleSpec(walkers=10_000, seed=20240611, stride=10),
    )


def harmonic_excited() -> ScenarioConfig:
    return replace(harmonic_ground(), name="harmonic_excited", initial=InitialSpec(kind="eigenstate", n=1))


def central_vortex(ell: int) -> ScenarioConfig:
    return ScenarioConfig(
        name=f"central_vortex_l{ell}",
        layout="1x2D",
        grid=GridSpec(points=256, extent=(-8.0, 8.0)),
        initial=InitialSpec(kind="vortex", ell=ell),
        potentials=PotentialSpec(harmonic_omega=1.0),
        evolution=EvolutionSpec(dt=1e-3, T=0.5, stride=100),
    )


def hydro_vortex() -> ScenarioConfig:
    return ScenarioConfig(
        name="hydro_vortex",
        layout="1x2D",
        grid=GridSpec(points=256, extent=(-8.0, 8.0)),
        potentials=PotentialSpec(harmonic_omega=1.0),
        hjm=HjmSpec(alpha=0.37, T=1.0, dt=2e-3, stride=50),
    )


def entangled_pair(coulomb: bool = False) -> ScenarioConfig:
    charge = 0.5 if coulomb else 0.0
    return ScenarioConfig(
        name="coulomb_pair" if coulomb else "entangled_pair",
        layout="2x1D",
        grid=PAIR_GRID,
        particles=(ParticleSpec(charge=charge), ParticleSpec(charge=charge)),
        initial=InitialSpec(kind="entangled_pair", centers=(-2.0, 2.0), widths=(1.0, 1.0), boosts=(0.5, -0.5)),
        potentials=PotentialSpec(coulomb_softening=PAIR_SOFTENING if coulomb else None),
        evolution=EvolutionSpec(dt=2e-3, T=1.0, stride=5),
    )


def reduced_mass_dual() -> ScenarioConfig:
    return ScenarioConfig(
        name="reduced_mass_dual",
        layout="2x1D",
        grid=GridSpec(points=128, extent=(-8.0, 8.0)),
        initial=InitialSpec(kind="vortex", ell=1, relax=False),
        potentials=PotentialSpec(harmonic_omega=1.0),
        evolution=EvolutionSpec(dt=1e-3, T=0.1, stride=50),
        circulation=CirculationSpec(radii=(1.5,)),
    )


def uniform_a_drive() -> ScenarioConfig:
    return ScenarioConfig(
        name="uniform_a_drive",
        grid=GridSpec(points=1024, extent=(-16.0, 16.0)),
        particles=(ParticleSpec(charge=1.0),),
        initial=InitialSpec(kind="gaussian", centers=(-2.0,)),
        potentials=PotentialSpec(electric_field=(0.5,)),
        evolution=EvolutionSpec(dt=1e-3, T=1.0, stride=10),
    )


def corrupted_coherent() -> ScenarioConfig:
    """Coherent state with a shift bump; the scaled control arm moves the mean off the classical orbit."""
    return replace(harmonic_coherent(), name="corrupted_coherent", variational=VariationalSpec(corrupt=1.5))


def stationary_ground() -> ScenarioConfig:
    """Harmonic ground state under a dilation bump, with the drift scaled by 1.5 as control."""
    return replace(
        harmonic_ground(),
        name="stationary_ground",
        grid=GridSpec(points=256, extent=(-8.0, 8.0)),
        evolution=EvolutionSpec(dt=1e-3, T=3.0, stride=10),
        ensemble=EnsembleSpec(walkers=10_000, seed=20240611, stride=10),
        variational=VariationalSpec(corrupt=1.5, shape="dilation"),
    )


def coulomb_darwin() -> ScenarioConfig:
    cfg = entangled_pair(coulomb=True)
    return replace(cfg, name="coulomb_darwin", potentials=replace(cfg.potentials, darwin=True), darwin=DarwinSpec(softening=1.0))


SCENARIOS: Dict[str, Callable[[], ScenarioConfig]] = {
    "free_gaussian": free_gaussian,
    "free_gaussian_classical": lambda: free_gaussian("classical"),
    "harmonic_ground": harmonic_ground,
    "harmonic_coherent": harmonic_coherent,
    "harmonic_excited": harmonic_excited,
    "central_vortex_l0": lambda: central_vortex(0),
    "central_vortex_l1": lambda: central_vortex(1),
    "central_vortex_l2": lambda: central_vortex(2),
    "central_vortex_l3": lambda: central_vortex(3),
    "hydro_vortex": hydro_vortex,
    "entangled_pair": entangled_pair,
    "coulomb_pair": lambda: entangled_pair(coulomb=True),
    "coulomb_darwin": coulomb_darwin,
    "reduced_mass_dual": reduced_mass_dual,
    "uniform_a_drive": uniform_a_drive,
    "stationary_ground": stationary_ground,
    "corrupted_coherent": corrupted_coherent,
}


def scenario(name: str) -> ScenarioConfig:
    """Library scenario by name.

    Raises:
        ParseError: for an unknown name.
    """
    if name not in SCENARIOS:
        raise ParseError("scenario", f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    return SCENARIOS[name]()
