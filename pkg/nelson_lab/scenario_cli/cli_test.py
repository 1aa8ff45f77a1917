"""End-to-end tests of the ``nelson-lab`` command line."""

import json

import pandas as pd
import pytest

from config import LabConfig
from errors import NumericalError, ParseError
from scenario_cli import cli
from scenario_cli.commands import COMMANDS
from scenario_cli.runner import EXIT_CRITERIA, EXIT_FAILED, EXIT_OK, EXIT_PARSE, run
from scenario_cli.schema import parse_config
from utils.catalog import RunCatalog
from utils.manifest import RunManifest

SMALL_TRAP = """
name = "small_trap"

[grid]
points = 64
extent = [-8.0, 8.0]

[initial]
kind = "eigenstate"
n = 0

[potentials]
harmonic_omega = 1.0

[evolution]
dt = 0.01
T = 0.2
stride = 5

[ensemble]
walkers = 400
seed = 11
dt = 0.01
T = 0.2
stride = 5
"""


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    for name in ("NELSON_LAB_OUT", "NELSON_LAB_CATALOG_URL", "NELSON_LAB_THREADS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def small_trap(tmp_path):
    path = tmp_path / "small_trap.toml"
    path.write_text(SMALL_TRAP, encoding="utf-8")
    return path


def _single_run(out):
    runs = [p for p in out.iterdir() if p.is_dir()]
    assert len(runs) == 1
    return runs[0]


@pytest.mark.integration
class TestCli:
    """Test exit codes and run directories produced by ``main``."""

    def test_list_scenarios(self, capsys):
        assert cli.main(["--list-scenarios"]) == 0
        assert "central_vortex_l2" in capsys.readouterr().out.split()

    def test_missing_subcommand(self, capsys):
        assert cli.main([]) == EXIT_PARSE

    @pytest.mark.parametrize("subcommand", sorted(COMMANDS))
    def test_every_subcommand_is_exposed(self, subcommand):
        args = cli.build_parser().parse_args([subcommand, "--scenario", "free_gaussian"])
        assert args.subcommand == subcommand

    def test_evolve_small_config(self, tmp_path, small_trap):
        out = tmp_path / "out"
        code = cli.main(["evolve", "--config", str(small_trap), "--out", str(out)])
        assert code in (EXIT_OK, EXIT_CRITERIA)
        run_dir = _single_run(out)
        manifest = RunManifest.read(run_dir)
        assert manifest.subcommand == "evolve"
        assert manifest.status in ("passed", "criteria_failed")
        assert {c.name for c in manifest.criteria} >= {"norm_drift", "log_density_identity"}
        conservation = pd.read_csv(run_dir / "csv" / "conservation.csv")
        assert len(conservation) > 1
        assert (run_dir / "config.json").exists()

    def test_ensemble_is_deterministic(self, tmp_path, small_trap):
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            cli.main(["ensemble", "--config", str(small_trap), "--out", str(out), "--no-catalog"])
        a, b = _single_run(first), _single_run(second)
        assert a.name == b.name
        walkers = "trajectories/walkers.nlt"
        assert (a / walkers).read_bytes() == (b / walkers).read_bytes()
        digests = [{x.path: x.sha256 for x in RunManifest.read(d).artifacts} for d in (a, b)]
        assert digests[0] == digests[1]

    def test_seed_override_changes_the_run(self, tmp_path, small_trap):
        out = tmp_path / "out"
        cli.main(["ensemble", "--config", str(small_trap), "--out", str(out), "--no-catalog"])
        cli.main(["ensemble", "--config", str(small_trap), "--out", str(out), "--seed", "12", "--no-catalog"])
        assert len([p for p in out.iterdir() if p.is_dir()]) == 2

    def test_ensemble_needs_a_seed(self, tmp_path, small_trap):
        unseeded = tmp_path / "unseeded.toml"
        unseeded.write_text(SMALL_TRAP.replace("seed = 11\n", ""), encoding="utf-8")
        out = tmp_path / "out"
        assert cli.main(["ensemble", "--config", str(unseeded), "--out", str(out), "--no-catalog"]) == EXIT_PARSE
        run_dir = _single_run(out)
        assert json.loads((run_dir / "error.json").read_text())["path"] == "ensemble.seed"
        assert RunManifest.read(run_dir).status == "failed"

    def test_rejected_config(self, tmp_path, small_trap, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text(SMALL_TRAP.replace("dt = 0.01\nT = 0.2\nstride = 5\n\n[ensemble]", "dt = -0.01\n\n[ensemble]"))
        out = tmp_path / "out"
        assert cli.main(["evolve", "--config", str(bad), "--out", str(out)]) == EXIT_PARSE
        record = json.loads((out / "evolve-rejected" / "error.json").read_text())
        assert record["type"] == "ParseError"
        assert record["path"] == "evolution.dt"
        records = [json.loads(line) for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
        assert records == [record]

    def test_unknown_scenario(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["evolve", "--scenario", "nope", "--out", str(out)]) == EXIT_PARSE
        assert (out / "evolve-rejected" / "error.json").exists()

    def test_catalog_records_the_run(self, tmp_path, small_trap):
        out = tmp_path / "out"
        cli.main(["evolve", "--config", str(small_trap), "--out", str(out)])
        lab = LabConfig(out_root=str(out))
        db = lab.SessionLocal()
        try:
            runs = RunCatalog.get_runs(db, subcommand="evolve")
        finally:
            db.close()
        assert [r.run_id for r in runs] == [_single_run(out).name]

    def test_no_catalog(self, tmp_path, small_trap):
        out = tmp_path / "out"
        cli.main(["evolve", "--config", str(small_trap), "--out", str(out), "--no-catalog"])
        assert not (out / "catalog.db").exists()

    @pytest.mark.slow
    def test_variational_runs_both_arms_on_one_state(self, tmp_path):
        out = tmp_path / "out"
        cli.main(["variational", "--scenario", "stationary_ground", "--out", str(out), "--no-catalog"])
        run_dir = _single_run(out)
        table = pd.read_csv(run_dir / "csv" / "variation.csv")
        assert set(table["arm"]) == {"solution", "control"}
        verdicts = {c.name: c.passed for c in RunManifest.read(run_dir).criteria}
        assert verdicts["variation_slope"] and verdicts["control_slope"]
        assert (run_dir / "trajectories" / "paths_control.nlt").exists()

    @pytest.mark.slow
    def test_vortex_circulation(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["circulation", "--scenario", "central_vortex_l2", "--out", str(out), "--no-catalog"]) == EXIT_OK
        table = pd.read_csv(_single_run(out) / "csv" / "circulation.csv")
        assert table["canonical_quanta"].between(1.99, 2.01).all()
        assert (table["winding"] == 2).all()


@pytest.mark.integration
class TestRunner:
    """Test the failure path of ``run``."""

    def test_numerical_failure_leaves_a_record(self, tmp_path, monkeypatch):
        def explode(ctx):
            raise NumericalError("norm blew up", {"step": 3})

        monkeypatch.setitem(COMMANDS, "evolve", explode)
        lab = LabConfig(out_root=str(tmp_path))
        code, run_dir = run("evolve", parse_config(SMALL_TRAP), lab, catalog=False)
        assert code == EXIT_FAILED
        record = json.loads((run_dir / "error.json").read_text())
        assert record["type"] == "NumericalError"
        assert record["diagnostics"] == {"step": 3}
        assert RunManifest.read(run_dir).status == "failed"

    def test_unknown_subcommand(self, tmp_path):
        with pytest.raises(ParseError):
            run("fly", parse_config(SMALL_TRAP), LabConfig(out_root=str(tmp_path)), catalog=False)
