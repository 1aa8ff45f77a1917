"""Run manifest: config hash, seed, timing, criteria and the inventory of written files."""

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
ERROR_NAME = "error.json"


def atomic_write_bytes(path: Path, data: bytes) -> Path:
    """Write ``data`` to a temporary sibling and move it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"
    return atomic_write_bytes(path, text.encode("utf-8"))


def file_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


@dataclass
class Artifact:
    path: str
    kind: str
    sha256: str
    size: int


@dataclass
class Criterion:
    name: str
    value: Optional[float]
    threshold: Optional[float]
    passed: bool


@dataclass
class RunManifest:
    """Everything needed to reproduce and audit one run.

    ``started_at`` and ``wall_time`` are the only fields that differ between two
    runs of the same config and seed.
    """

    run_id: str
    subcommand: str
    config_hash: str
    tool_version: str
    seed: Optional[int] = None
    scenario: Optional[str] = None
    status: str = "running"
    started_at: str = ""
    wall_time: float = 0.0
    criteria: List[Criterion] = field(default_factory=list)
    artifacts: List[Artifact] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)

    def add_artifact(self, run_dir: Path, path: Path, kind: str) -> Artifact:
        """Record a file already written under ``run_dir``."""
        path = Path(path)
        artifact = Artifact(path.relative_to(run_dir).as_posix(), kind, file_digest(path), path.stat().st_size)
        self.artifacts.append(artifact)
        return artifact

    def add_criterion(self, name: str, value: Optional[float], passed: bool, threshold: Optional[float] = None) -> Criterion:
        criterion = Criterion(name, None if value is None else float(value), threshold, bool(passed))
        self.criteria.append(criterion)
        level = logging.INFO if criterion.passed else logging.WARNING
        logger.log(level, "criterion %s: %s (value %s, threshold %s)", name, "pass" if passed else "FAIL", value, threshold)
        return criterion

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["summary"] = {
            "criteria": len(self.criteria),
            "failed": sorted(c.name for c in self.criteria if not c.passed),
        }
        return payload

    def write(self, run_dir: Path) -> Path:
        return write_json(Path(run_dir) / MANIFEST_NAME, self.to_dict())

    @classmethod
    def read(cls, run_dir: Path) -> "RunManifest":
        with open(Path(run_dir) / MANIFEST_NAME, encoding="utf-8") as handle:
            payload = json.load(handle)
        payload.pop("summary", None)
        payload["criteria"] = [Criterion(**c) for c in payload.get("criteria", [])]
        payload["artifacts"] = [Artifact(**a) for a in payload.get("artifacts", [])]
        return cls(**payload)


def write_error(run_dir: Path, record: Dict[str, Any]) -> Path:
    """Machine-readable failure record next to the manifest."""
    return write_json(Path(run_dir) / ERROR_NAME, record)
