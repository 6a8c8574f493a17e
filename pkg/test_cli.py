import json
import math

import pytest
from typer.testing import CliRunner

from app.cli import app
from app.datasources.files import CsvReportSource
from app.errors import InfeasibleError, NumericalError
from conftest import CONFIGS, EXAMPLE_Z

runner = CliRunner()

EXAMPLE_COSTS = str(CONFIGS / "example_costs.json")


@pytest.fixture
def reports(tmp_path, monkeypatch):
    out = tmp_path / "reports"
    monkeypatch.setenv("OUTPUT_DIR", str(out))
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("WORKERS", raising=False)
    return out


def _rows(path):
    return {row.function_id: row for row in CsvReportSource(str(path)).fetch_rows()}


def _write_report(path, rows):
    lines = ["# run_id: manual", "run_id,mode,function_id,value,ci_halfwidth,n,seed,residuals"]
    lines += [f"manual,et-sample,{f},{v},{ci},1000,{seed}," for f, v, ci, seed in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_et_solve_writes_minimizer(reports):
    result = runner.invoke(app, ["et-solve", EXAMPLE_COSTS, "--output", "solve.csv"])
    assert result.exit_code == 0, result.output
    assert "✅" in result.stdout
    rows = _rows(reports / "solve.csv")
    assert float(rows["z1"].value) == pytest.approx(EXAMPLE_Z[0], abs=1e-5)
    assert float(rows["z2"].value) == pytest.approx(EXAMPLE_Z[1], abs=1e-5)
    assert rows["z1"].seed == ""


def test_report_header_embeds_config_and_default_name(reports):
    result = runner.invoke(app, ["et-kernel", EXAMPLE_COSTS])
    assert result.exit_code == 0, result.output
    (path,) = reports.glob("et-kernel-*.csv")
    header = path.read_text(encoding="utf-8").splitlines()
    run_id = header[0].removeprefix("# run_id: ")
    assert path.name == f"et-kernel-{run_id}.csv"
    config = json.loads(header[1].removeprefix("# config: "))
    assert config["mode"] == "et-kernel"
    assert config["input"] == EXAMPLE_COSTS
    assert "cbar:111" in _rows(path)


def test_same_command_gives_identical_bytes(reports):
    args = ["et-sample", EXAMPLE_COSTS, "--steps", "2000", "--seed", "9", "-f", "cyl:12", "-f", "x:1", "--output", "s.csv"]
    assert runner.invoke(app, args).exit_code == 0
    first = (reports / "s.csv").read_bytes()
    assert runner.invoke(app, args).exit_code == 0
    assert (reports / "s.csv").read_bytes() == first


def test_tf_normalize_reports_pressure(reports):
    potential = str(CONFIGS / "classical_potential.json")
    result = runner.invoke(app, ["tf-normalize", potential, "-f", "cyl:1", "--output", "n.csv"])
    assert result.exit_code == 0, result.output
    rows = _rows(reports / "n.csv")
    assert float(rows["pressure"].value) == pytest.approx(math.log((5 + math.sqrt(33)) / 2), abs=1e-10)
    assert "monotone=true" in rows["cyl:1"].residuals


def test_sample_oracle_compare_pipeline(reports):
    common = ["-f", "one", "-f", "cyl:1"]
    sample = runner.invoke(
        app, ["et-sample", EXAMPLE_COSTS, "--steps", "20000", "--chains", "2", *common, "--output", "s.csv"]
    )
    assert sample.exit_code == 0, sample.output
    oracle = runner.invoke(app, ["et-oracle", EXAMPLE_COSTS, *common, "--output", "o.csv"])
    assert oracle.exit_code == 0, oracle.output

    sampled = CsvReportSource(str(reports / "s.csv")).fetch_rows()
    assert [r.seed for r in sampled] == ["0", "0", "1", "1", "", ""]

    result = runner.invoke(app, ["compare", str(reports / "s.csv"), str(reports / "o.csv"), "--output", "c.csv"])
    assert result.exit_code == 0, result.output
    compared = CsvReportSource(str(reports / "c.csv")).fetch_rows()
    assert len(compared) == 4
    ones = [r for r in compared if r.function_id == "one"]
    assert all(r.value == "0" and "verdict=pass" in r.residuals for r in ones)


def test_compare_fails_when_estimates_miss(reports, tmp_path):
    sampled, reference = tmp_path / "sampled.csv", tmp_path / "reference.csv"
    _write_report(sampled, [("cyl:1", "0.5", "0.001", "1"), ("cyl:1", "0.51", "0.001", "2")])
    _write_report(reference, [("cyl:1", "0.7", "0", "")])
    result = runner.invoke(app, ["compare", str(sampled), str(reference), "--output", "c.csv"])
    assert result.exit_code == 1


def test_run_with_config_file(reports, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(
        json.dumps({"mode": "et-oracle", "input": EXAMPLE_COSTS, "functions": ["x:1"], "output": "o.csv"}),
        encoding="utf-8",
    )
    result = runner.invoke(app, ["run", "--config", str(config)])
    assert result.exit_code == 0, result.output
    assert float(_rows(reports / "o.csv")["x:1"].value) == pytest.approx(0.7, abs=1e-9)


def test_missing_input_is_config_error(reports, tmp_path):
    result = runner.invoke(app, ["et-solve", str(tmp_path / "missing.json")])
    assert result.exit_code == 2


def test_unknown_config_field_is_config_error(reports, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"mode": "et-solve", "input": EXAMPLE_COSTS, "colour": "red"}), encoding="utf-8")
    assert runner.invoke(app, ["run", "-c", str(config)]).exit_code == 2


def test_bad_probability_is_domain_error(reports, tmp_path):
    costs = tmp_path / "costs.json"
    costs.write_text(json.dumps({"C1": [[3, 5], [2, 4]], "C2": [[2, 1], [4, 3]], "p": 1.5}), encoding="utf-8")
    assert runner.invoke(app, ["et-solve", str(costs)]).exit_code == 3


def test_x_function_in_classical_mode_is_domain_error(reports):
    potential = str(CONFIGS / "classical_potential.json")
    result = runner.invoke(app, ["tf-sample", potential, "--steps", "100", "-f", "x:1"])
    assert result.exit_code == 3


@pytest.mark.parametrize(
    "error, code",
    [
        (InfeasibleError("нет допустимого кандидата"), 5),
        (NumericalError("Ньютон не сошёлся", residual=1e-3), 4),
    ],
)
def test_solver_failures_map_to_exit_codes(reports, monkeypatch, error, code):
    def failing(*args, **kwargs):
        raise error

    monkeypatch.setattr("app.services.run_service.solve_dual", failing)
    assert runner.invoke(app, ["et-kernel", EXAMPLE_COSTS]).exit_code == code


def test_execution_settings_do_not_change_report_bytes(reports, monkeypatch):
    args = ["et-sample", EXAMPLE_COSTS, "--steps", "1500", "--seed", "4", "--chains", "2", "-f", "cyl:1", "--output", "s.csv"]
    monkeypatch.setenv("DEBUG_WEIGHTS", "false")
    monkeypatch.setenv("WORKERS", "1")
    assert runner.invoke(app, args).exit_code == 0
    plain = (reports / "s.csv").read_bytes()

    monkeypatch.setenv("DEBUG_WEIGHTS", "true")
    monkeypatch.setenv("WORKERS", "2")
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    assert (reports / "s.csv").read_bytes() == plain
