"""Subcommand bodies: each runs one headline experiment and records its CSVs, dumps and criteria."""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Dict, Optional

import numpy as np
import pandas as pd

from circulation import circle_loop, circulation_table
from conditional import (
    circulation_sectors,
    conditional_continuity_residual,
    conditional_osmotic,
    conditional_qhj_residual,
    conditional_schrodinger_residual,
    osmotic_deviation,
    reduced_mass_transform,
    relative_phase_lock,
    slice_conditional,
    softened_interaction,
)
from diffusion_ensemble import (
    Ensemble,
    NoiseSpec,
    TrajectoryBundle,
    encode_trajectories,
    equilibrium_test,
    propagate_ensemble,
    sample_initial,
    series_drift,
)
from errors import ConfigurationError
from hjm_flow import circulation_drift_experiment
from lattice import Field, Grid, RealField, encode_field
from madelung import MadelungSeries, osmotic_potential_accumulate, residual_summary, series_residuals
from propagator import Evolution, EvolutionSchedule, evolve, imaginary_time_ground_state
from propagator.potentials import harmonic, softened_coulomb
from propagator.states import free_gaussian_width
from scenario_cli.builders import axis_compton_lengths, build_grid, build_hamiltonian, initial_state
from scenario_cli.darwin import darwin_correct
from scenario_cli.schema import ScenarioConfig, require_seed
from utils.manifest import RunManifest, atomic_write_bytes
from variational import (
    euler_lagrange_residual,
    integration_by_parts_check,
    mirrored_bundle,
    particle_bump,
    perturb_and_measure,
)

logger = logging.getLogger(__name__)

FIELDS_DIR = "fields"
TRAJECTORIES_DIR = "trajectories"
CSV_DIR = "csv"

# Per-step norm tolerance of each propagator
NORM_TOLERANCE = {"split_step": 1e-12, "crank_nicolson": 1e-8}
WIDTH_TOLERANCE = 1e-3
NEWTON_TOLERANCE = 1e-2
OSMOTIC_TOLERANCE = 1e-3
OSMOTIC_WINDOW = 0.5
OSMOTIC_SUPPORT = 1e-3
EQUILIBRIUM_L1 = 0.02
EQUILIBRIUM_P = 0.01
OU_VARIANCE_TOLERANCE = 0.02
REFINEMENT_RATIO = 3.0


@dataclass
class RunContext:
    """One run's config, output directory and manifest, shared by every writer."""

    cfg: ScenarioConfig
    run_dir: Path
    manifest: RunManifest
    threads: int = 1

    def _record(self, path: Path, data: bytes, kind: str) -> Path:
        atomic_write_bytes(path, data)
        self.manifest.add_artifact(self.run_dir, path, kind)
        return path

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        return self._record(self.run_dir / CSV_DIR / f"{name}.csv", frame.to_csv(index=False).encode("utf-8"), "csv")

    def write_field(self, name: str, f: Field) -> Path:
        return self._record(self.run_dir / FIELDS_DIR / f"{name}.nlf", encode_field(f), "field")

    def write_trajectories(self, name: str, bundle: TrajectoryBundle) -> Path:
        return self._record(self.run_dir / TRAJECTORIES_DIR / f"{name}.nlt", encode_trajectories(bundle), "trajectories")

    def criterion(self, name: str, value: float, threshold: float, passed: Optional[bool] = None) -> bool:
        """Record ``value < threshold`` (or an explicit verdict); NaN never passes."""
        if passed is None:
            passed = bool(value < threshold)
        self.manifest.add_criterion(name, value, passed, threshold)
        return passed

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.manifest.warnings.append(message)


def evolve_scenario(cfg: ScenarioConfig) -> Evolution:
    """Build the Hamiltonian and initial state of ``cfg`` and propagate it."""
    H = build_hamiltonian(cfg)
    psi0 = initial_state(cfg, H)
    ev = cfg.evolution
    return evolve(psi0, H, EvolutionSchedule(ev.dt, ev.steps, ev.stride, ev.mode, ev.method))


def _require_layout(cfg: ScenarioConfig, *layouts: str) -> None:
    if cfg.layout not in layouts:
        raise ConfigurationError(f"this subcommand needs layout {' or '.join(layouts)}, got {cfg.layout}")


def _write_snapshots(ctx: RunContext, run: Evolution) -> None:
    which = ctx.cfg.outputs.fields
    if which == "none":
        return
    indices = range(len(run.snapshots)) if which == "all" else [len(run.snapshots) - 1]
    for i in indices:
        ctx.write_field(f"psi_{i:04d}", run.snapshots[i])


def _trap_length(cfg: ScenarioConfig, particle: int = 0) -> float:
    omega = cfg.potentials.harmonic_omega or 1.0
    return float(np.sqrt(cfg.constants.hbar / (cfg.particles[particle].mass * omega)))


def _is_free_packet(cfg: ScenarioConfig) -> bool:
    pot = cfg.potentials
    return (
        cfg.dims == 1
        and cfg.initial.kind == "gaussian"
        and pot.harmonic_omega is None
        and not pot.vector_potential
        and not pot.electric_field
    )


def _density_width(psi, grid: Grid) -> float:
    x = grid.axis(0)
    rho = np.abs(psi.values) ** 2
    weight = rho / np.sum(rho)
    mean = np.sum(weight * x)
    return float(np.sqrt(np.sum(weight * (x - mean) ** 2)))


def _osmotic_alignment(run: Evolution) -> float:
    """Largest deviation of accumulated ``R`` from ``(hbar/2) ln rho`` up to a constant, for ``t <= 0.5``."""
    keep = [i for i, t in enumerate(run.times) if t <= OSMOTIC_WINDOW + 1e-12]
    if len(keep) < 2:
        return float("nan")
    series = MadelungSeries.from_snapshots([run.snapshots[i] for i in keep], [run.times[i] for i in keep], run.hamiltonian, scheme="central")
    R = osmotic_potential_accumulate(series)
    worst = 0.0
    for accumulated, fields in zip(R, series.fields):
        inside = fields.rho > OSMOTIC_SUPPORT * np.max(fields.rho)
        deviation = accumulated[inside] - fields.R[inside]
        worst = max(worst, float(np.max(np.abs(deviation - deviation.mean()))))
    return worst


def _log_density_identity(series: MadelungSeries) -> float:
    """Largest ``|exp(2R/hbar) - rho| / max(rho)`` over unfloored cells of every snapshot."""
    hbar = series.hamiltonian.hbar
    worst = 0.0
    for fields in series.fields:
        kept = ~fields.floored
        gap = np.abs(np.exp(2.0 * fields.R[kept] / hbar) - fields.rho[kept])
        worst = max(worst, float(np.max(gap)) / float(np.max(fields.rho)))
    return worst


def run_evolve(ctx: RunContext) -> None:
    """Propagate, dump snapshots and check conservation plus the one-particle identities."""
    cfg = ctx.cfg
    run = evolve_scenario(cfg)
    ctx.write_csv("conservation", run.log)
    _write_snapshots(ctx, run)

    series = MadelungSeries.from_evolution(run)
    summary = residual_summary(series_residuals(series), series.times, series.floored, series.grid.cell_volume)
    ctx.write_csv("residuals", summary)

    norms = run.log["norm"].to_numpy()
    ctx.criterion(
        "norm_drift",
        float(np.max(np.abs(norms - norms[0]))),
        NORM_TOLERANCE[cfg.evolution.method] * max(cfg.evolution.steps, 1),
    )
    ctx.criterion("log_density_identity", _log_density_identity(series), 1e-12)

    if _is_free_packet(cfg):
        sigma = cfg.initial.widths[0] if cfg.initial.widths else 1.0
        if cfg.evolution.mode == "quantum":
            expected = free_gaussian_width(run.times[-1], sigma, cfg.constants.hbar, cfg.particles[0].mass)
        else:
            expected = sigma
        width = _density_width(run.final, run.hamiltonian.grid)
        ctx.manifest.parameters["width_expected"] = expected
        ctx.criterion("packet_width", abs(width - expected), WIDTH_TOLERANCE)

    if cfg.dims == 1 and cfg.evolution.mode == "quantum" and cfg.initial.kind in ("gaussian", "coherent"):
        newton = euler_lagrange_residual(MadelungSeries.from_evolution(run, scheme="central"))
        ctx.write_csv("newton", newton.as_frame())
        ctx.criterion("newton_relative", newton.relative, NEWTON_TOLERANCE)
        ctx.criterion("osmotic_alignment", _osmotic_alignment(run), OSMOTIC_TOLERANCE)


def _moments(bundle: TrajectoryBundle) -> pd.DataFrame:
    rows = []
    for t, frame in zip(bundle.times, bundle.frames):
        for a in range(frame.shape[1]):
            rows.append({"t": t, "axis": a, "mean": float(np.mean(frame[:, a])), "variance": float(np.var(frame[:, a]))})
    return pd.DataFrame(rows, columns=["t", "axis", "mean", "variance"])


def _ensemble_span(cfg: ScenarioConfig):
    dt = cfg.ensemble.dt or cfg.evolution.dt
    T = cfg.ensemble.T or cfg.evolution.T
    return dt, T, int(round(T / dt))


def _walk(ctx: RunContext, series: MadelungSeries, drift) -> TrajectoryBundle:
    cfg = ctx.cfg
    dt, _, steps = _ensemble_span(cfg)
    ens = sample_initial(series.fields[0].rho, cfg.ensemble.walkers, cfg.ensemble.seed, series.grid)
    bundle = propagate_ensemble(
        ens,
        drift,
        series.grid,
        dt,
        steps,
        NoiseSpec.from_hamiltonian(series.hamiltonian),
        stride=cfg.ensemble.stride,
        threads=ctx.threads,
    )
    if bundle.clamped:
        ctx.warn(f"drift clamped on {bundle.clamped} walker-steps")
    if bundle.reflected:
        ctx.warn(f"{bundle.reflected} walker-steps reflected at a grid edge")
    return bundle


def run_ensemble(ctx: RunContext) -> None:
    """Walk ``M`` seeded walkers along ``b = v + u`` and compare their histogram with ``|psi|^2``."""
    cfg = ctx.cfg
    require_seed(cfg)
    _, T, _ = _ensemble_span(cfg)
    run = evolve_scenario(replace(cfg, evolution=replace(cfg.evolution, T=T)))
    series = MadelungSeries.from_evolution(run)
    bundle = _walk(ctx, series, series_drift(series))
    if cfg.outputs.trajectories:
        ctx.write_trajectories("walkers", bundle)

    final = Ensemble(bundle.frames[-1], bundle.times[-1], cfg.ensemble.seed)
    report = equilibrium_test(final, series.fields[-1].rho, series.grid, cfg.ensemble.coarsen)
    ctx.write_csv("equilibrium", report.as_frame())
    ctx.write_csv("moments", _moments(bundle))
    ctx.criterion("equilibrium_l1", report.l1, EQUILIBRIUM_L1)
    ctx.criterion("equilibrium_p_value", report.p_value, EQUILIBRIUM_P, passed=report.p_value > EQUILIBRIUM_P)

    if cfg.dims == 1 and cfg.initial.kind == "eigenstate" and cfg.initial.n == 0:
        expected = cfg.constants.hbar / (2.0 * cfg.particles[0].mass * cfg.potentials.harmonic_omega)
        variance = float(np.var(bundle.frames[-1][:, 0]))
        ctx.manifest.parameters["ou_variance_expected"] = expected
        ctx.criterion("ou_variance", abs(variance - expected) / expected, OU_VARIANCE_TOLERANCE)


def _loop_circulation(ctx: RunContext, run: Evolution) -> None:
    cfg = ctx.cfg
    spec = cfg.circulation
    length = _trap_length(cfg)
    loops = [circle_loop(spec.center, r * length, dims=cfg.dims, name=f"circle-r{r:g}") for r in spec.radii]
    table = circulation_table(run.snapshots, run.times, loops, run.hamiltonian)
    ctx.write_csv("circulation", table)
    flagged = int(table["warning"].sum())
    if flagged:
        ctx.warn(f"{flagged} loop samples crossed floored density")

    quanta = table["canonical_quanta"].to_numpy(dtype=float)
    if cfg.evolution.mode == "quantum":
        ctx.criterion("integer_quanta", float(np.max(np.abs(quanta - np.round(quanta)))), spec.tolerance)
    if cfg.initial.kind == "vortex":
        ell = cfg.initial.ell
        ctx.criterion("quantization", float(np.max(np.abs(quanta - ell))), spec.tolerance * max(abs(ell), 1))
        mismatched = int(np.count_nonzero(table["winding"].to_numpy() != ell))
        ctx.criterion("winding_number", mismatched, 0, passed=mismatched == 0)


def _reduced_mass_sectors(ctx: RunContext, run: Evolution) -> None:
    cfg = ctx.cfg
    omega = cfg.potentials.harmonic_omega
    if omega is None:
        raise ConfigurationError("the reduced-mass comparison needs a common harmonic trap")
    hbar = cfg.constants.hbar
    first, second = cfg.particles
    softening = cfg.potentials.coulomb_softening
    interaction = softened_interaction(first.charge, second.charge, softening) if softening is not None else None
    transform = reduced_mass_transform(first.mass, second.mass, interaction)
    ell = cfg.initial.ell if cfg.initial.kind == "vortex" else 0
    grid = run.hamiltonian.grid
    relative_H = transform.relative_hamiltonian(grid, omega, hbar)
    # a pair vortex (q1 + i q2)^ell carries -ell quanta in the mass-scaled relative angle
    lock = relative_phase_lock(transform, grid, -ell, omega, hbar)
    relative_psi, energy = imaginary_time_ground_state(relative_H, phase_lock=lock)
    ctx.manifest.parameters.update({"reduced_mass": transform.mu, "relative_energy": energy})

    rows = []
    worst = 0.0
    for radius in cfg.circulation.radii:
        pair, relative = circulation_sectors(transform, run.final, run.hamiltonian, relative_psi, relative_H, radius)
        gap = abs(pair.quanta - relative.quanta) / max(abs(relative.quanta), 1.0)
        worst = max(worst, gap)
        rows.append({"radius": radius, "mu": transform.mu, "pair_quanta": pair.quanta, "relative_quanta": relative.quanta, "relative_gap": gap})
    ctx.write_csv("reduced_mass", pd.DataFrame(rows))
    ctx.criterion("reduced_mass_agreement", worst, cfg.circulation.tolerance)


def run_circulation(ctx: RunContext) -> None:
    """Canonical circulation and winding on circle loops, or both reduced-mass sectors of a pair."""
    cfg = ctx.cfg
    _require_layout(cfg, "1x2D", "1x3D", "2x1D")
    run = evolve_scenario(cfg)
    _write_snapshots(ctx, run)
    if cfg.layout == "2x1D":
        _reduced_mass_sectors(ctx, run)
    else:
        _loop_circulation(ctx, run)


def run_hjm(ctx: RunContext) -> None:
    """Integrate the hydrodynamic equations from a vortex of strength ``alpha`` and track its circulation."""
    cfg = ctx.cfg
    _require_layout(cfg, "1x2D")
    spec = cfg.hjm
    drift = circulation_drift_experiment(
        build_grid(cfg),
        spec.alpha,
        spec.T,
        spec.dt,
        omega=cfg.potentials.harmonic_omega or 1.0,
        mass=cfg.particles[0].mass,
        hbar=cfg.constants.hbar,
        loop_radius=spec.loop_radius,
        stride=spec.stride,
        quantum_kinetic=spec.quantum_kinetic,
    )
    ctx.write_csv("hjm_circulation", drift.as_frame())
    ctx.write_csv("hjm_log", drift.run.log)
    flagged = int(np.count_nonzero(drift.flagged))
    if flagged:
        ctx.warn(f"{flagged} circulation samples crossed floored density")
    ctx.criterion("circulation_drift", drift.relative_drift, spec.tolerance)
    defect = float(drift.run.log["mass_defect"].iloc[-1])
    ctx.criterion("mass_defect", defect, 1e-8 * spec.T, passed=defect <= 1e-8 * spec.T)
    if not float(spec.alpha).is_integer():
        offset = float(abs(drift.quanta[0] - np.round(drift.quanta[0])))
        ctx.criterion("non_integer_circulation", offset, spec.tolerance, passed=offset > spec.tolerance)


def run_conditional(ctx: RunContext) -> None:
    """Cut a two-particle run along particle 2's trajectory and check the conditional identities."""
    cfg = ctx.cfg
    _require_layout(cfg, "2x1D")
    spec = cfg.conditional
    run = evolve_scenario(cfg)
    _write_snapshots(ctx, run)
    series = slice_conditional(run, spec.start)
    if series.truncated:
        ctx.warn(f"conditioning path left the grid after {len(series)} snapshots")

    ctx.write_csv(
        "conditional_path",
        pd.DataFrame({"t": series.times, "q1": [s.q1 for s in series.slices], "q2": series.q2, "q2_dot": series.q2_dot}),
    )
    results = {
        "continuity": conditional_continuity_residual(series),
        "qhj": conditional_qhj_residual(series),
        "schrodinger": conditional_schrodinger_residual(series),
    }
    ctx.write_csv("conditional_residuals", pd.concat([r.as_frame() for r in results.values()], ignore_index=True))
    for name, result in results.items():
        ctx.criterion(f"conditional_{name}", result.relative, spec.tolerance)

    deviation = osmotic_deviation(series, conditional_osmotic(series))
    ctx.write_csv("conditional_osmotic", pd.DataFrame({"t": series.times, "deviation": deviation}))
    ctx.criterion("conditional_osmotic", float(np.max(deviation)), spec.tolerance)


def _scaled(drift: Callable[[np.ndarray, float], np.ndarray], factor: float) -> Callable[[np.ndarray, float], np.ndarray]:
    if factor == 1.0:
        return drift
    return lambda positions, t: factor * drift(positions, t)


def _variation_arm(ctx: RunContext, series: MadelungSeries, drift, arm: str):
    """Walk one seeded bundle along ``drift`` and measure its action variation along that drift."""
    cfg = ctx.cfg
    spec = cfg.variational
    H = series.hamiltonian
    bundle = _walk(ctx, series, drift)
    if spec.mirrored:
        bundle = mirrored_bundle(bundle, H.particles[spec.particle].axes)
    if cfg.outputs.trajectories:
        ctx.write_trajectories("paths" if arm == "solution" else f"paths_{arm}", bundle)
    bump = particle_bump(H, bundle, spec.particle, spec.bumps, spec.shape)
    curve = perturb_and_measure(bundle, series, bump, spec.epsilons, drift=drift)
    if curve.baseline.dropped:
        ctx.warn(f"{curve.baseline.dropped} {arm} paths left the grid and were dropped from the action")
    return bundle, bump, curve


def run_variational(ctx: RunContext) -> None:
    """Fit the order of the action change for bundles along the true drift and along a scaled one.

    Both arms share the state, the seed and the bump; only the drift differs.
    """
    cfg = ctx.cfg
    require_seed(cfg)
    spec = cfg.variational
    run = evolve_scenario(cfg)
    series = MadelungSeries.from_evolution(run)
    true_drift = series_drift(series)

    bundle, bump, curve = _variation_arm(ctx, series, true_drift, "solution")
    frames = [curve.as_frame().assign(arm="solution")]
    ctx.manifest.parameters.update({"slope": curve.slope, "action": curve.baseline.value})
    ctx.criterion("variation_slope", abs(curve.slope - 2.0), spec.tolerance)
    if spec.corrupt != 1.0:
        _, _, control = _variation_arm(ctx, series, _scaled(true_drift, spec.corrupt), "control")
        frames.append(control.as_frame().assign(arm="control"))
        ctx.manifest.parameters.update({"control_slope": control.slope, "control_action": control.baseline.value})
        ctx.criterion("control_slope", abs(control.slope - 1.0), spec.tolerance)
    ctx.write_csv("variation", pd.concat(frames, ignore_index=True))

    rows = []
    for direction in ("forward", "backward"):
        check = integration_by_parts_check(bundle, series, bump, direction)
        rows.append(
            {
                "direction": direction,
                "drift_side": check.drift_side,
                "position_side": check.position_side,
                "difference": check.difference,
                "dropped": check.dropped,
            }
        )
    ctx.write_csv("integration_by_parts", pd.DataFrame(rows))

    newton = euler_lagrange_residual(MadelungSeries.from_evolution(run, scheme="central"))
    ctx.write_csv("newton", newton.as_frame())


def _bounded(grid: Grid, factor: int = 1) -> Grid:
    return Grid(grid.extents, tuple(n * factor for n in grid.points), (False,) * grid.dims)


def run_darwin_demo(ctx: RunContext) -> None:
    """Darwin-smeared pair interaction, its grid refinement and the harmonic constant check."""
    cfg = ctx.cfg
    _require_layout(cfg, "2x1D")
    e1, e2 = (p.charge for p in cfg.particles)
    if e1 * e2 == 0:
        raise ConfigurationError("darwin-demo needs two charged particles")
    grid = build_grid(cfg)
    softening = cfg.darwin.softening or cfg.potentials.coulomb_softening or 2.0 * grid.spacing[0]
    lambdas = axis_compton_lengths(cfg)
    ctx.manifest.parameters.update({"softening": softening, "compton_lengths": [float(v) for v in lambdas]})

    V = softened_coulomb(grid, e1, e2, softening)
    corrected = darwin_correct(V, grid, lambdas)
    ctx.write_field("interaction", RealField(grid, V))
    ctx.write_field("interaction_darwin", RealField(grid, corrected))
    cut = int(np.argmin(np.abs(grid.axis(1))))
    ctx.write_csv(
        "darwin_profile",
        pd.DataFrame({"q1": grid.axis(0), "V": V[:, cut], "V_darwin": corrected[:, cut], "delta": corrected[:, cut] - V[:, cut]}),
    )

    # corrections on N, 2N and 4N points compared at the nodes of the N grid, edges excluded
    corrections = []
    for factor in (1, 2, 4):
        fine = _bounded(grid, factor)
        U = softened_coulomb(fine, e1, e2, softening)
        corrections.append((darwin_correct(U, fine, lambdas) - U)[::factor, ::factor][1:-1, 1:-1])
    coarse_gap = float(np.max(np.abs(corrections[0] - corrections[1])))
    fine_gap = float(np.max(np.abs(corrections[1] - corrections[2])))
    ratio = coarse_gap / fine_gap if fine_gap > 0 else float("inf")
    ctx.write_csv(
        "darwin_refinement",
        pd.DataFrame(
            {
                "points": [n * grid.points[0] for n in (1, 2, 4)],
                "spacing": [grid.spacing[0] / n for n in (1, 2, 4)],
                "max_correction": [float(np.max(np.abs(c))) for c in corrections],
                "gap_to_finer": [coarse_gap, fine_gap, float("nan")],
            }
        ),
    )
    ctx.criterion("refinement_ratio", ratio, REFINEMENT_RATIO, passed=ratio >= REFINEMENT_RATIO)

    # V = x^2 / 2 on a bounded line, k = 1
    line = _bounded(grid.sub_grid([0]))
    well = harmonic(line, 1.0, 1.0)
    shift = darwin_correct(well, line, lambdas[0]) - well
    expected = lambdas[0] ** 2 / 12.0
    deviation = float(np.max(np.abs(shift - expected)))
    ctx.criterion("harmonic_constant", deviation, 1e-6 * expected + 1e-15, passed=deviation <= 1e-6 * expected + 1e-15)


COMMANDS: Dict[str, Callable[[RunContext], None]] = {
    "evolve": run_evolve,
    "ensemble": run_ensemble,
    "circulation": run_circulation,
    "hjm": run_hjm,
    "conditional": run_conditional,
    "variational": run_variational,
    "darwin-demo": run_darwin_demo,
}
