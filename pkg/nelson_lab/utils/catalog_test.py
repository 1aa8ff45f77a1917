"""Test cases for run catalog CRUD operations."""

import pytest

from models import ArtifactRecord, RunRecord
from utils.catalog import RunCatalog
from utils.manifest import Artifact, RunManifest


def _manifest(run_id: str, subcommand: str = "evolve", config_hash: str = "c" * 64) -> RunManifest:
    manifest = RunManifest(run_id, subcommand, config_hash, "0.1.0", seed=1, status="ok", wall_time=0.5)
    manifest.artifacts.append(Artifact("csv/conservation.csv", "csv", "0" * 64, 10))
    manifest.add_criterion("norm_drift", 1e-13, True, 1e-10)
    manifest.add_criterion("width", 1.2, False, 1e-3)
    return manifest


class TestRunCatalog:
    """Test recording and querying runs."""

    def test_record_manifest(self, db_session):
        run = RunCatalog.record_manifest(db_session, _manifest("run-1"))
        assert run.id is not None
        assert run.status == "ok"
        assert len(run.artifacts) == 1 and len(run.criteria) == 2
        assert RunCatalog.get_run(db_session, "run-1").config_hash == "c" * 64

    def test_rerecording_replaces_children(self, db_session):
        RunCatalog.record_manifest(db_session, _manifest("run-1"))
        manifest = _manifest("run-1")
        manifest.status = "failed"
        run = RunCatalog.record_manifest(db_session, manifest, error="boom")
        assert db_session.query(RunRecord).count() == 1
        assert db_session.query(ArtifactRecord).count() == 1
        assert run.error == "boom"

    def test_queries(self, db_session):
        RunCatalog.record_manifest(db_session, _manifest("run-1"))
        RunCatalog.record_manifest(db_session, _manifest("run-2", "ensemble"))
        RunCatalog.record_manifest(db_session, _manifest("run-3", config_hash="d" * 64))
        assert [r.run_id for r in RunCatalog.get_runs(db_session, subcommand="ensemble")] == ["run-2"]
        assert [r.run_id for r in RunCatalog.runs_with_config(db_session, "c" * 64)] == ["run-1", "run-2"]
        assert [c.name for c in RunCatalog.failed_criteria(db_session, "run-1")] == ["width"]

    def test_delete_run(self, db_session):
        RunCatalog.record_manifest(db_session, _manifest("run-1"))
        assert RunCatalog.delete_run(db_session, "run-1")
        assert RunCatalog.get_run(db_session, "run-1") is None
        assert db_session.query(ArtifactRecord).count() == 0
        assert not RunCatalog.delete_run(db_session, "run-1")

    @pytest.mark.parametrize("limit", [1, 2])
    def test_pagination(self, db_session, limit):
        for n in range(3):
            RunCatalog.record_manifest(db_session, _manifest(f"run-{n}"))
        assert len(RunCatalog.get_runs(db_session, limit=limit)) == limit
