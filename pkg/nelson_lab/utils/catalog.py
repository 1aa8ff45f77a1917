"""CRUD operations on the run catalog."""

from datetime import datetime
from typing import List, Optional

from sqlalchemy.orm import Session

from models import ArtifactRecord, CriterionRecord, RunRecord
from utils.manifest import RunManifest


class RunCatalog:
    """Queries and updates of catalogued runs."""

    @staticmethod
    def record_manifest(db: Session, manifest: RunManifest, error: Optional[str] = None) -> RunRecord:
        """Insert a run from its manifest, replacing any earlier record with the same run id."""
        run = db.query(RunRecord).filter(RunRecord.run_id == manifest.run_id).first()
        if run is None:
            run = RunRecord(run_id=manifest.run_id)
            db.add(run)
        run.subcommand = manifest.subcommand
        run.scenario = manifest.scenario
        run.config_hash = manifest.config_hash
        run.tool_version = manifest.tool_version
        run.seed = manifest.seed
        run.status = manifest.status
        run.wall_time = manifest.wall_time
        run.error = error
        run.finished_at = datetime.utcnow()
        run.artifacts = [ArtifactRecord(path=a.path, kind=a.kind, sha256=a.sha256, size=a.size) for a in manifest.artifacts]
        run.criteria = [
            CriterionRecord(name=c.name, value=c.value, threshold=c.threshold, passed=c.passed) for c in manifest.criteria
        ]
        db.commit()
        db.refresh(run)
        return run

    @staticmethod
    def get_run(db: Session, run_id: str) -> Optional[RunRecord]:
        """Get run by its run id."""
        return db.query(RunRecord).filter(RunRecord.run_id == run_id).first()

    @staticmethod
    def get_runs(db: Session, subcommand: Optional[str] = None, skip: int = 0, limit: int = 100) -> List[RunRecord]:
        """Most recent runs first, optionally for one subcommand."""
        query = db.query(RunRecord)
        if subcommand:
            query = query.filter(RunRecord.subcommand == subcommand)
        return query.order_by(RunRecord.started_at.desc(), RunRecord.id.desc()).offset(skip).limit(limit).all()

    @staticmethod
    def runs_with_config(db: Session, config_hash: str) -> List[RunRecord]:
        """Every run of one exact configuration."""
        return db.query(RunRecord).filter(RunRecord.config_hash == config_hash).order_by(RunRecord.id).all()

    @staticmethod
    def failed_criteria(db: Session, run_id: str) -> List[CriterionRecord]:
        return (
            db.query(CriterionRecord)
            .join(RunRecord)
            .filter(RunRecord.run_id == run_id, CriterionRecord.passed.is_(False))
            .order_by(CriterionRecord.name)
            .all()
        )

    @staticmethod
    def delete_run(db: Session, run_id: str) -> bool:
        """Delete a run with its artifacts and criteria."""
        run = db.query(RunRecord).filter(RunRecord.run_id == run_id).first()
        if run:
            db.delete(run)
            db.commit()
            return True
        return False
