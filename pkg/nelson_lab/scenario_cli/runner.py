"""Run orchestration: output directory, manifest, error record and catalog entry of one subcommand."""

import logging
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from sqlalchemy.exc import SQLAlchemyError

from config import TOOL_VERSION, LabConfig
from errors import NelsonLabError, ParseError
from scenario_cli.commands import COMMANDS, RunContext
from scenario_cli.schema import ScenarioConfig, config_hash, serialize_config, validate
from utils.catalog import RunCatalog
from utils.manifest import ERROR_NAME, RunManifest, atomic_write_bytes, write_error

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_CRITERIA = 3


def run_id_for(subcommand: str, cfg: ScenarioConfig) -> str:
    return f"{subcommand}-{cfg.name}-{config_hash(cfg)[:12]}"


def error_record(exc: BaseException) -> Dict[str, Any]:
    if isinstance(exc, NelsonLabError):
        return exc.to_record()
    return {"type": type(exc).__name__, "message": str(exc), "path": None, "diagnostics": None}


def record_rejection(lab: LabConfig, subcommand: str, exc: ParseError) -> Path:
    """``error.json`` for a config rejected before it had a run directory."""
    run_dir = lab.run_dir(f"{subcommand}-rejected")
    return write_error(run_dir, error_record(exc))


def _catalog(lab: LabConfig, manifest: RunManifest, error: Optional[str]) -> None:
    try:
        lab.create_tables()
        db = lab.SessionLocal()
        try:
            RunCatalog.record_manifest(db, manifest, error)
        finally:
            db.close()
    except SQLAlchemyError as exc:
        logger.warning("run %s not catalogued: %s", manifest.run_id, exc)


def run(
    subcommand: str,
    cfg: ScenarioConfig,
    lab: LabConfig,
    scenario: Optional[str] = None,
    catalog: bool = True,
    threads: Optional[int] = None,
) -> Tuple[int, Path]:
    """Execute one subcommand and leave its manifest behind whatever happens.

    Returns:
        The exit status (0 all criteria passed, 1 failed run, 2 rejected
        config, 3 a criterion failed) and the run directory.
    """
    if subcommand not in COMMANDS:
        raise ParseError("subcommand", f"unknown subcommand {subcommand!r}")
    validate(cfg)
    digest = config_hash(cfg)
    run_id = run_id_for(subcommand, cfg)
    run_dir = lab.run_dir(run_id)
    run_dir.mkdir(parents=True, exist_ok=True)
    stale = run_dir / ERROR_NAME
    if stale.exists():
        stale.unlink()

    manifest = RunManifest(
        run_id,
        subcommand,
        digest,
        TOOL_VERSION,
        seed=cfg.ensemble.seed,
        scenario=scenario,
        started_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        parameters=cfg.derived(),
    )
    ctx = RunContext(cfg, run_dir, manifest, threads or lab.threads)
    config_path = atomic_write_bytes(run_dir / "config.json", serialize_config(cfg).encode("utf-8"))
    manifest.add_artifact(run_dir, config_path, "config")
    logger.info("run %s: %s on %s (config %s)", run_id, subcommand, cfg.name, digest[:12])

    started = time.perf_counter()
    failure = None
    try:
        COMMANDS[subcommand](ctx)
    except ParseError as exc:
        failure, code = exc, EXIT_PARSE
    except NelsonLabError as exc:
        failure, code = exc, EXIT_FAILED
    except Exception as exc:
        logger.exception("run %s crashed", run_id)
        failure, code = exc, EXIT_FAILED
    manifest.wall_time = time.perf_counter() - started

    if failure is not None:
        logger.error("run %s failed: %s", run_id, failure)
        write_error(run_dir, error_record(failure))
        manifest.status = "failed"
    elif manifest.passed:
        manifest.status, code = "passed", EXIT_OK
    else:
        manifest.status, code = "criteria_failed", EXIT_CRITERIA
    manifest.write(run_dir)
    logger.info("run %s %s in %.1fs, %d criteria", run_id, manifest.status, manifest.wall_time, len(manifest.criteria))

    if catalog:
        _catalog(lab, manifest, None if failure is None else str(failure))
    return code, run_dir
