"""Command-line entry point: ``nelson-lab <subcommand> --config PATH | --scenario NAME``."""

import argparse
import json
import logging
import logging.config
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from config import LabConfig
from errors import ParseError
from scenario_cli.commands import COMMANDS
from scenario_cli.library import SCENARIOS, scenario
from scenario_cli.runner import EXIT_PARSE, record_rejection, run
from scenario_cli.schema import ScenarioConfig, parse_config, validate

logger = logging.getLogger(__name__)

SUBCOMMAND_HELP = {
    "evolve": "propagate a wavefunction; conservation, residual and snapshot outputs",
    "ensemble": "walk seeded walkers along b = v + u and test equilibrium with |psi|^2",
    "circulation": "canonical circulation and winding on circles, or reduced-mass sectors of a pair",
    "hjm": "integrate the hydrodynamic equations from a non-integer vortex and track circulation",
    "conditional": "conditional wavefunction identities along particle 2's trajectory",
    "variational": "order of the action change under smooth path variations",
    "darwin-demo": "Darwin-smeared pair interaction with refinement and harmonic checks",
}

EPILOG = """\
acceptance runs:
  nelson-lab ensemble --scenario harmonic_ground
  nelson-lab circulation --scenario central_vortex_l2        (also _l1, _l3)
  nelson-lab hjm --scenario hydro_vortex
  nelson-lab evolve --scenario free_gaussian                  (and free_gaussian_classical)
  nelson-lab evolve --scenario harmonic_coherent
  nelson-lab variational --scenario stationary_ground        (and corrupted_coherent)
  nelson-lab conditional --scenario coulomb_pair
  nelson-lab circulation --scenario reduced_mass_dual
  nelson-lab darwin-demo --scenario coulomb_darwin

scenarios: {scenarios}

Exit status: 0 every criterion passed, 1 run failed, 2 config rejected,
3 a criterion failed. Outputs go to <out>/<subcommand>-<name>-<hash>/.
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nelson-lab",
        description="Numerical laboratory for N-particle stochastic mechanics",
        epilog=EPILOG.format(scenarios=", ".join(sorted(SCENARIOS))),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--list-scenarios", action="store_true", help="print the scenario library and exit")
    subparsers = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=SUBCOMMAND_HELP[name], description=SUBCOMMAND_HELP[name])
        source = sub.add_mutually_exclusive_group(required=True)
        source.add_argument("--config", type=Path, metavar="PATH", help="TOML scenario document (or its canonical JSON)")
        source.add_argument("--scenario", metavar="NAME", help="scenario from the built-in library")
        sub.add_argument("--out", metavar="DIR", help="output root (default $NELSON_LAB_OUT or ./out)")
        sub.add_argument("--seed", type=int, help="override ensemble.seed")
        sub.add_argument("--threads", type=int, help="worker threads (default $NELSON_LAB_THREADS or 1)")
        sub.add_argument("--snapshot-stride", type=int, metavar="N", help="override evolution.stride")
        sub.add_argument("--no-catalog", action="store_true", help="do not record the run in the catalog")
        sub.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def configure_logging(lab: LabConfig, verbose: bool = False) -> None:
    if lab.log_config.exists():
        logging.config.fileConfig(lab.log_config, disable_existing_loggers=False)
    else:
        logging.basicConfig(level=logging.INFO, format="%(levelname)-5.5s [%(name)s] %(message)s")
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    """The requested scenario with command-line overrides applied and re-validated.

    Raises:
        ParseError: for unreadable or invalid documents and unknown scenario names.
    """
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError("--config", str(exc)) from exc
        cfg = parse_config(text)
    else:
        cfg = scenario(args.scenario)
    if args.seed is not None:
        cfg = replace(cfg, ensemble=replace(cfg.ensemble, seed=args.seed))
    if args.snapshot_stride is not None:
        cfg = replace(cfg, evolution=replace(cfg.evolution, stride=args.snapshot_stride))
    return validate(cfg)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_scenarios:
        for name in sorted(SCENARIOS):
            print(name)
        return 0
    if args.subcommand is None:
        parser.print_help()
        return EXIT_PARSE

    lab = LabConfig(out_root=args.out, threads=args.threads)
    configure_logging(lab, args.verbose)
    try:
        cfg = load_config(args)
    except ParseError as exc:
        path = record_rejection(lab, args.subcommand, exc)
        logger.error("config rejected: %s", exc)
        print(json.dumps(exc.to_record()), file=sys.stderr)
        logger.info("error record written to %s", path)
        return EXIT_PARSE

    code, run_dir = run(args.subcommand, cfg, lab, scenario=args.scenario, catalog=not args.no_catalog, threads=args.threads)
    print(run_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
