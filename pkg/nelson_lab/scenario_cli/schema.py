"""Scenario documents: typed sections, validation with dotted paths, canonical form and hash."""

import hashlib
import json
import tomllib
import types
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from typing import Any, Dict, Optional, Tuple, Union, get_args, get_origin, get_type_hints

import numpy as np

from errors import ParseError
from propagator import SPEED_OF_LIGHT

LAYOUTS = {"1x1D": (1, 1), "2x1D": (2, 1), "1x2D": (1, 2), "1x3D": (1, 3)}
INITIAL_KINDS = ("gaussian", "eigenstate", "coherent", "entangled_pair", "vortex", "ground")
MODES = ("quantum", "classical")
METHODS = ("split_step", "crank_nicolson")
BUMP_SHAPES = ("shift", "dilation")
FIELD_OUTPUTS = ("none", "final", "all")


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0
    c: float = SPEED_OF_LIGHT


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid shared by every axis; the axis count follows the particle layout."""

    points: int = 256
    extent: Tuple[float, ...] = (-16.0, 16.0)
    periodic: bool = True


@dataclass(frozen=True)
class ParticleSpec:
    mass: float = 1.0
    charge: float = 0.0


@dataclass(frozen=True)
class InitialSpec:
    """Initial wavefunction request.

    ``centers``, ``widths`` and ``boosts`` are per axis (per packet for
    ``entangled_pair``); empty tuples mean 0, 1 and 0. ``phases`` holds one
    additive phase per particle.
    """

    kind: str = "gaussian"
    centers: Tuple[float, ...] = ()
    widths: Tuple[float, ...] = ()
    boosts: Tuple[float, ...] = ()
    phases: Tuple[float, ...] = ()
    n: int = 0
    ell: int = 0
    relax: bool = True


@dataclass(frozen=True)
class PotentialSpec:
    harmonic_omega: Optional[float] = None
    vector_potential: Tuple[float, ...] = ()
    electric_field: Tuple[float, ...] = ()
    coulomb_softening: Optional[float] = None
    darwin: bool = False


@dataclass(frozen=True)
class EvolutionSpec:
    mode: str = "quantum"
    method: str = "split_step"
    dt: float = 1e-3
    T: float = 1.0
    stride: int = 10
    include_rest_energy: bool = False

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass(frozen=True)
class EnsembleSpec:
    """Walker ensemble; ``dt`` and ``T`` default to the evolution's."""

    walkers: int = 10_000
    seed: Optional[int] = None
    dt: Optional[float] = None
    T: Optional[float] = None
    stride: int = 10
    coarsen: Optional[int] = None


@dataclass(frozen=True)
class OutputSpec:
    fields: str = "final"
    trajectories: bool = True


@dataclass(frozen=True)
class CirculationSpec:
    """Circle radii in units of the trap length ``sqrt(hbar / m omega)``."""

    radii: Tuple[float, ...] = (0.5, 1.0, 1.5, 2.0)
    center: Tuple[float, ...] = (0.0, 0.0)
    tolerance: float = 5e-3


@dataclass(frozen=True)
class HjmSpec:
    alpha: float = 0.37
    T: float = 1.0
    dt: float = 1e-3
    stride: int = 10
    quantum_kinetic: bool = True
    loop_radius: Optional[float] = None
    tolerance: float = 1e-2


@dataclass(frozen=True)
class ConditionalSpec:
    start: Tuple[float, ...] = (-2.0, 2.0)
    tolerance: float = 1e-2


@dataclass(frozen=True)
class VariationalSpec:
    """Solution arm along the true drift and a control arm along ``corrupt`` times it; ``corrupt = 1`` skips the control."""

    corrupt: float = 1.5
    shape: str = "shift"
    bumps: int = 1
    mirrored: bool = False
    particle: int = 0
    epsilons: Tuple[float, ...] = tuple(float(e) for e in np.geomspace(1e-3, 1e-1, 7))
    tolerance: float = 0.1


@dataclass(frozen=True)
class DarwinSpec:
    softening: Optional[float] = None
    lambda_c: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully defaulted scenario; two configs with equal canonical form hash equally."""

    name: str = "custom"
    layout: str = "1x1D"
    constants: Constants = field(default_factory=Constants)
    grid: GridSpec = field(default_factory=GridSpec)
    particles: Tuple[ParticleSpec, ...] = ()
    initial: InitialSpec = field(default_factory=InitialSpec)
    potentials: PotentialSpec = field(default_factory=PotentialSpec)
    evolution: EvolutionSpec = field(default_factory=EvolutionSpec)
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    circulation: CirculationSpec = field(default_factory=CirculationSpec)
    hjm: HjmSpec = field(default_factory=HjmSpec)
    conditional: ConditionalSpec = field(default_factory=ConditionalSpec)
    variational: VariationalSpec = field(default_factory=VariationalSpec)
    darwin: DarwinSpec = field(default_factory=DarwinSpec)

    def __post_init__(self):
        if not self.particles and self.layout in LAYOUTS:
            object.__setattr__(self, "particles", tuple(ParticleSpec() for _ in range(LAYOUTS[self.layout][0])))

    @property
    def dims(self) -> int:
        count, per_particle = LAYOUTS[self.layout]
        return count * per_particle

    @property
    def particle_axes(self) -> Tuple[Tuple[int, ...], ...]:
        count, per_particle = LAYOUTS[self.layout]
        return tuple(tuple(range(i * per_particle, (i + 1) * per_particle)) for i in range(count))

    @property
    def compton_lengths(self) -> Tuple[float, ...]:
        """``hbar / (m c)`` per particle."""
        return tuple(self.constants.hbar / (p.mass * self.constants.c) for p in self.particles)

    @property
    def compton_frequencies(self) -> Tuple[float, ...]:
        """``m c^2 / hbar`` per particle."""
        return tuple(p.mass * self.constants.c**2 / self.constants.hbar for p in self.particles)

    def derived(self) -> Dict[str, Any]:
        return {"compton_lengths": list(self.compton_lengths), "compton_frequencies": list(self.compton_frequencies)}


def _type_name(hint) -> str:
    return getattr(hint, "__name__", str(hint))


def _coerce(hint, value: Any, path: str) -> Any:
    origin = get_origin(hint)
    if origin in (Union, types.UnionType):
        if value is None:
            return None
        inner = [a for a in get_args(hint) if a is not type(None)][0]
        return _coerce(inner, value, path)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ParseError(path, "expected a list")
        item = get_args(hint)[0]
        return tuple(_coerce(item, v, f"{path}[{i}]") for i, v in enumerate(value))
    if is_dataclass(hint):
        return _build(hint, value, path)
    if hint is bool:
        if not isinstance(value, bool):
            raise ParseError(path, "expected true or false")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(path, "expected an integer")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(path, "expected a number")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ParseError(path, "expected a string")
        return value
    raise ParseError(path, f"unsupported field type {_type_name(hint)}")


def _build(cls, data: Any, path: str = ""):
    if not isinstance(data, dict):
        raise ParseError(path or "<root>", "expected a table")
    hints = get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ParseError(f"{path}.{key}" if path else key, "unknown key")
    values = {}
    for f in fields(cls):
        if f.name in data:
            values[f.name] = _coerce(hints[f.name], data[f.name], f"{path}.{f.name}" if path else f.name)
    return cls(**values)


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ParseError(path, message)


def _check_lengths(values: Tuple[float, ...], expected: int, path: str) -> None:
    _require(len(values) in (0, expected), path, f"expected {expected} values, got {len(values)}")


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    """Check every invariant of a built config.

    Raises:
        ParseError: naming the first offending dotted path.
    """
    _require(cfg.layout in LAYOUTS, "layout", f"must be one of {sorted(LAYOUTS)}")
    _require(cfg.constants.hbar > 0, "constants.hbar", "must be positive")
    _require(cfg.constants.c > 0, "constants.c", "must be positive")
    _require(cfg.grid.points >= 8, "grid.points", "need at least 8 points")
    _require(len(cfg.grid.extent) == 2 and cfg.grid.extent[1] > cfg.grid.extent[0], "grid.extent", "must be [lo, hi] with hi > lo")
    _require(len(cfg.particles) == LAYOUTS[cfg.layout][0], "particles", f"layout {cfg.layout} needs {LAYOUTS[cfg.layout][0]} particles")
    for i, p in enumerate(cfg.particles):
        _require(p.mass > 0, f"particles[{i}].mass", "must be positive")

    init, dims = cfg.initial, cfg.dims
    _require(init.kind in INITIAL_KINDS, "initial.kind", f"must be one of {list(INITIAL_KINDS)}")
    packets = 2 if init.kind == "entangled_pair" else dims
    for name in ("centers", "widths", "boosts"):
        _check_lengths(getattr(init, name), packets, f"initial.{name}")
    _check_lengths(init.phases, len(cfg.particles), "initial.phases")
    for i, w in enumerate(init.widths):
        _require(w > 0, f"initial.widths[{i}]", "must be positive")
    _require(init.n >= 0, "initial.n", "must be non-negative")
    if init.kind == "entangled_pair":
        _require(cfg.layout == "2x1D", "initial.kind", "entangled_pair needs layout 2x1D")
    if init.kind == "vortex":
        _require(cfg.dims == 2, "initial.kind", "vortex needs a two-axis layout")
    if init.kind in ("eigenstate", "coherent", "ground") or (init.kind == "vortex" and init.relax):
        _require(cfg.potentials.harmonic_omega is not None, "potentials.harmonic_omega", f"{init.kind} states need a trap")

    pot = cfg.potentials
    if pot.harmonic_omega is not None:
        _require(pot.harmonic_omega > 0, "potentials.harmonic_omega", "must be positive")
    _check_lengths(pot.vector_potential, dims, "potentials.vector_potential")
    _check_lengths(pot.electric_field, dims, "potentials.electric_field")
    _require(not (pot.vector_potential and pot.electric_field), "potentials.electric_field", "cannot combine with a static vector potential")
    if pot.coulomb_softening is not None:
        _require(cfg.layout == "2x1D", "potentials.coulomb_softening", "the pair interaction needs layout 2x1D")
        _require(pot.coulomb_softening > 0, "potentials.coulomb_softening", "must be positive")

    ev = cfg.evolution
    _require(ev.mode in MODES, "evolution.mode", f"must be one of {list(MODES)}")
    _require(ev.method in METHODS, "evolution.method", f"must be one of {list(METHODS)}")
    _require(ev.dt > 0, "evolution.dt", "must be positive")
    _require(ev.T > 0, "evolution.T", "must be positive")
    _require(ev.stride >= 1, "evolution.stride", "must be at least 1")

    ens = cfg.ensemble
    _require(ens.walkers >= 1, "ensemble.walkers", "must be positive")
    _require(ens.dt is None or ens.dt > 0, "ensemble.dt", "must be positive")
    _require(ens.T is None or ens.T > 0, "ensemble.T", "must be positive")
    _require(ens.stride >= 1, "ensemble.stride", "must be at least 1")

    _require(cfg.outputs.fields in FIELD_OUTPUTS, "outputs.fields", f"must be one of {list(FIELD_OUTPUTS)}")
    _require(all(r > 0 for r in cfg.circulation.radii), "circulation.radii", "must be positive")
    _require(cfg.hjm.T >= 0 and cfg.hjm.dt > 0, "hjm.dt", "needs dt > 0 and T >= 0")
    _require(len(cfg.conditional.start) == 2, "conditional.start", "expected [q1, q2]")
    _require(cfg.variational.corrupt > 0, "variational.corrupt", "must be positive")
    _require(cfg.variational.shape in BUMP_SHAPES, "variational.shape", f"must be one of {list(BUMP_SHAPES)}")
    _require(cfg.variational.bumps >= 1, "variational.bumps", "must be at least 1")
    _require(0 <= cfg.variational.particle < len(cfg.particles), "variational.particle", "no such particle")
    if cfg.darwin.softening is not None:
        _require(cfg.darwin.softening > 0, "darwin.softening", "must be positive")
    if cfg.darwin.lambda_c is not None:
        _require(cfg.darwin.lambda_c >= 0, "darwin.lambda_c", "must be non-negative")
    return cfg


def require_seed(cfg: ScenarioConfig) -> None:
    """Walker-drawing subcommands refuse unseeded configs.

    Raises:
        ParseError: at ``ensemble.seed``.
    """
    _require(cfg.ensemble.seed is not None, "ensemble.seed", "required when an ensemble is requested")


def parse_config(text: str) -> ScenarioConfig:
    """Parse a TOML scenario, or its canonical JSON form when the text starts with ``{``.

    Raises:
        ParseError: for syntax errors, unknown keys, wrong types or violated invariants.
    """
    try:
        if text.lstrip().startswith("{"):
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ParseError("<document>", str(exc)) from exc
    cfg = _build(ScenarioConfig, data)
    return validate(cfg)


def to_dict(cfg: ScenarioConfig) -> Dict[str, Any]:
    return asdict(cfg)


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical sorted-key JSON of every field, defaults included."""
    return json.dumps(to_dict(cfg), sort_keys=True, separators=(",", ":"))


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()
