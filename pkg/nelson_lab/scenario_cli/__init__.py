"""Scenario documents, the scenario library, potential builders and the ``nelson-lab`` command line."""

from scenario_cli.schema import ScenarioConfig, config_hash, parse_config, require_seed, serialize_config, validate
from scenario_cli.darwin import darwin_correct
from scenario_cli.builders import build_grid, build_hamiltonian, build_particles, initial_state
from scenario_cli.library import SCENARIOS, scenario
from scenario_cli.commands import COMMANDS, RunContext, evolve_scenario
from scenario_cli.runner import run

__all__ = [
    "ScenarioConfig",
    "parse_config",
    "validate",
    "require_seed",
    "serialize_config",
    "config_hash",
    "darwin_correct",
    "build_grid",
    "build_particles",
    "build_hamiltonian",
    "initial_state",
    "SCENARIOS",
    "scenario",
    "COMMANDS",
    "RunContext",
    "evolve_scenario",
    "run",
]
