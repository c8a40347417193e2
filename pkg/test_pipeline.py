import json

import numpy as np
import pandas as pd
import pytest
import yaml

from main import main
from src.config import load_config, parse_config, worker_count
from src.errors import (
    AssumptionError,
    ConfigError,
    GridError,
    NumericalError,
    ValidationFailure,
)
from src.export import ASYMPTOTICS_COLUMNS, COMPARISON_COLUMNS, ArtifactWriter
from src.pipeline import ExperimentPipeline, fit_power_law
from src.scattering import GridSpec1D, ScatteringData, closed_form_field, write_field_csv, write_scattering_csv
from src.validator import InvariantValidator, format_report


def raw_config(tmp_path, **overrides):
    raw = {
        "experiment": {"name": "small"},
        "initial_datum": {"expression": "zero"},
        "model": {"alpha": 0.0, "beta": 1.0, "kappa": 1},
        "spectral_grid": {"z_min": -2.0, "z_max": 2.0, "n": 9},
        "spatial_grid": {"x_max": 10.0, "n": 64},
        "evolution": {"dt": 0.01, "t_end": 2.0},
        "evaluation": {"xi": [-3.0], "t": [1.0, 2.0]},
        "output_dir": str(tmp_path / "out"),
    }
    raw.update(overrides)
    return raw


def write_config(tmp_path, raw, name="experiment.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return path


def test_error_exit_codes():
    assert ConfigError.exit_code == 2
    assert GridError.exit_code == 2
    assert AssumptionError.exit_code == 3
    assert ValidationFailure.exit_code == 3
    assert NumericalError.exit_code == 4


@pytest.mark.parametrize("change", [
    {"model": None},
    {"model": {"alpha": 0.0, "beta": 1.0}},
    {"model": {"alpha": 0.0, "beta": 1.0, "kappa": 2}},
    {"model": {"alpha": "zero", "beta": 1.0, "kappa": 1}},
    {"spectral_grid": {"z_min": 1.0, "z_max": -1.0, "n": 9}},
    {"initial_datum": {"expression": "airy"}},
    {"evaluation": {"xi": [1.0], "t": [1.0]}},
    {"evaluation": {"xi": [-3.0], "t": [2.0, 1.0]}},
    {"evaluation": {"xi": [-3.0], "t": [5.0]}},
    {"evolution": {"dt": 0.01, "t_end": 2.0, "system": "vector"}},
    {"strict_paper_constants": "yes"},
    {"scattering_csv": "missing.csv"},
])
def test_config_errors(tmp_path, change):
    raw = raw_config(tmp_path, **change)
    with pytest.raises(ConfigError):
        parse_config(raw, tmp_path)


def test_load_config_resolves_relative_paths(tmp_path):
    grid = GridSpec1D.symmetric(10.0, 64)
    write_field_csv(closed_form_field("gaussian", grid, amplitude=0.3), tmp_path / "datum.csv")
    path = write_config(tmp_path, raw_config(tmp_path, initial_datum={"csv": "datum.csv"}))
    config = load_config(path)
    assert config.source == path
    assert config.initial_datum.csv == tmp_path / "datum.csv"
    assert config.evaluation.rays() == {-3.0: [1.0, 2.0]}
    assert config.evolution.system == "nonlocal"

    field = ExperimentPipeline(config, max_workers=1).initial_field()
    assert np.allclose(field.samples, closed_form_field("gaussian", grid, amplitude=0.3).samples)


def test_initial_datum_grid_mismatch(tmp_path):
    write_field_csv(closed_form_field("zero", GridSpec1D.symmetric(10.0, 32)), tmp_path / "datum.csv")
    config = parse_config(raw_config(tmp_path, initial_datum={"csv": "datum.csv"}), tmp_path)
    with pytest.raises(GridError):
        ExperimentPipeline(config, max_workers=1).initial_field()


def test_load_config_rejects_bad_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("model: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")


def test_points_join_their_ray(tmp_path):
    raw = raw_config(tmp_path, evaluation={"xi": [-3.0], "t": [1.0], "points": [[-6.0, 2.0], [-4.0, 1.0]]})
    rays = parse_config(raw, tmp_path).evaluation.rays()
    assert rays == {-3.0: [1.0, 2.0], -4.0: [1.0]}


def test_worker_count(monkeypatch):
    monkeypatch.setenv("NH_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("NH_THREADS", "many")
    with pytest.raises(ConfigError):
        worker_count()


def test_fit_power_law():
    t = np.array([10.0, 20.0, 40.0, 80.0])
    slope, stderr = fit_power_law(t, 2.0 * t ** -0.5)
    assert slope == pytest.approx(-0.5)
    assert stderr == pytest.approx(0.0, abs=1e-10)
    assert fit_power_law(t[:2], t[:2] ** -1.0)[1] is None
    assert fit_power_law(t, np.zeros(4)) == (None, None)


def test_scatter_stage_on_zero_datum(tmp_path):
    config = parse_config(raw_config(tmp_path), tmp_path)
    pipeline = ExperimentPipeline(config, max_workers=1)
    report = pipeline.run_scatter()
    assert report["validation_status"] == "passed"
    assert report["winding_number"] == 0

    out = tmp_path / "out"
    table = pd.read_csv(out / "scattering.csv")
    assert len(table) == 9
    assert np.allclose(table["Re_s11"], 1.0) and np.allclose(table["Re_r"], 0.0)
    lines = (out / "scatter_report.txt").read_text().splitlines()
    assert "validation_status = passed" in lines
    assert any(line.startswith("det_residual = ") for line in lines)


def test_asymptotics_stage_on_zero_datum(tmp_path):
    config = parse_config(raw_config(tmp_path), tmp_path)
    evaluations = ExperimentPipeline(config, max_workers=1).run_asymptotics()
    assert [e.t for e in evaluations] == [1.0, 2.0]
    assert all(e.q_leading == 0 for e in evaluations)

    out = tmp_path / "out"
    table = pd.read_csv(out / "asymptotics.csv")
    assert list(table.columns) == ASYMPTOTICS_COLUMNS
    assert list(table["x"]) == [-3.0, -6.0]
    manifest = json.loads((out / "asymptotics_manifest.json").read_text())
    assert manifest["rays"]["-3.0"]["xi_order"] == -0.75


def test_scatter_refuses_spectral_singularity(tmp_path):
    # a focusing sech of area well above π/2 carries a zero of s11 in the upper half-plane
    raw = raw_config(
        tmp_path,
        initial_datum={"expression": "sech", "params": {"amplitude": 2.0}},
        model={"alpha": 0.0, "beta": 1.0, "kappa": -1},
        spatial_grid={"x_max": 24.0, "n": 1024},
    )
    pipeline = ExperimentPipeline(parse_config(raw, tmp_path), max_workers=1)
    with pytest.raises(AssumptionError):
        pipeline.run_scatter()
    assert (tmp_path / "out" / "scatter_report.txt").exists()


def test_compare_stage_writes_tables(tmp_path):
    raw = raw_config(
        tmp_path,
        initial_datum={"expression": "gaussian", "params": {"amplitude": 0.3}},
        spectral_grid={"z_min": -3.0, "z_max": 3.0, "n": 61},
        spatial_grid={"x_max": 480.0, "n": 4096},
        evolution={"dt": 0.01, "t_end": 2.0, "system": "coupled"},
    )
    pipeline = ExperimentPipeline(parse_config(raw, tmp_path), max_workers=2)
    summary = pipeline.run_compare()
    ray = summary["rays"]["-3.0"]
    assert ray["xi_order"] == pytest.approx(-0.75)
    assert ray["leading_exponent"] == pytest.approx(-0.5)

    out = tmp_path / "out"
    table = pd.read_csv(out / "comparison.csv")
    assert list(table.columns) == COMPARISON_COLUMNS
    assert len(table) == 2
    trajectory = json.loads((out / "trajectory" / "manifest.json").read_text())
    assert trajectory["format_version"] == 1
    assert [s["t"] for s in trajectory["snapshots"]] == [0.0, 1.0, 2.0]
    assert len(trajectory["residual"]) == 3
    assert "comparison_summary.json" in pipeline.get_run_statistics()["files"]


def test_compare_rejects_box_smaller_than_radiation_reach(tmp_path):
    raw = raw_config(
        tmp_path,
        initial_datum={"expression": "gaussian", "params": {"amplitude": 0.3}},
        spatial_grid={"x_max": 40.0, "n": 256},
        evolution={"dt": 0.01, "t_end": 2.0, "system": "coupled"},
    )
    pipeline = ExperimentPipeline(parse_config(raw, tmp_path), max_workers=1)
    with pytest.raises(ConfigError, match="wraps around"):
        pipeline.run_compare()
    assert not (tmp_path / "out" / "comparison.csv").exists()


def test_compare_error_well_below_leading_amplitude(tmp_path):
    raw = raw_config(
        tmp_path,
        initial_datum={"expression": "gaussian", "params": {"amplitude": 0.3, "width": 1.0}},
        spectral_grid={"z_min": -4.0, "z_max": 4.0, "n": 161},
        spatial_grid={"x_max": 2400.0, "n": 32768},
        evolution={"dt": 0.01, "t_end": 10.0, "system": "coupled"},
        evaluation={"xi": [-3.0], "t": [8.0, 10.0]},
    )
    pipeline = ExperimentPipeline(parse_config(raw, tmp_path), max_workers=1)
    pipeline.run_compare()

    table = pd.read_csv(tmp_path / "out" / "comparison.csv")
    assert len(table) == 2
    assert (table["abs_err"] <= 0.05 * table["abs_q_asy"]).all()
    trajectory = json.loads((tmp_path / "out" / "trajectory" / "manifest.json").read_text())
    assert trajectory["required_x_max"] <= 2400.0


def test_evolve_requires_evolution_section(tmp_path):
    raw = raw_config(tmp_path, evolution=None)
    with pytest.raises(ConfigError):
        ExperimentPipeline(parse_config(raw, tmp_path), max_workers=1).run_evolve()


def test_validate_is_deterministic(tmp_path):
    manifests = []
    for name in ("first", "second"):
        config = parse_config(raw_config(tmp_path, output_dir=str(tmp_path / name), seed=5), tmp_path)
        manifest = ExperimentPipeline(config, max_workers=1).run_validate()
        assert manifest["validation_status"] == "passed"
        manifests.append((tmp_path / name / "validation_manifest.json").read_bytes())
    assert manifests[0] == manifests[1]
    assert json.loads(manifests[0])["seed"] == 5


def test_corrupted_scattering_file_fails_named_check(tmp_path):
    z = np.linspace(-2.0, 2.0, 21)
    path = write_scattering_csv(ScatteringData.synthetic(z, 0.2, 0.1), tmp_path / "scattering.csv")
    validator = InvariantValidator()
    assert validator.validate_scattering_file(path, 1)["status"] == "passed"

    frame = pd.read_csv(path, float_precision="round_trip")
    frame["Re_s11"] *= 1.1
    frame.to_csv(path, index=False, float_format="%.17g")
    result = validator.validate_scattering_file(path, 1)
    assert result["status"] == "failed"
    assert "scattering_file.det_S" in result["failed"]


def test_format_report_marks_failures():
    manifest = {"suites": {"demo": {"details": {
        "ok": {"value": 1e-12, "tolerance": 1e-8, "passed": True},
        "bad": {"value": 1.0, "tolerance": 1e-8, "passed": False},
    }}}}
    lines = format_report(manifest, color=False).splitlines()
    assert lines[0].startswith("PASS demo.ok")
    assert lines[1].startswith("FAIL demo.bad")


def test_manifest_and_report_formats(tmp_path):
    writer = ArtifactWriter(str(tmp_path))
    writer.write_manifest({"b": 1 + 2j, "a": float("nan"), "c": np.arange(2)}, "m.json")
    text = (tmp_path / "m.json").read_text()
    assert json.loads(text) == {"a": None, "b": {"re": 1.0, "im": 2.0}, "c": [0, 1]}
    assert text.index('"a"') < text.index('"b"')

    writer.write_report({"value": 0.1, "status": "passed", "issues": [], "missing": None}, "r.txt")
    assert (tmp_path / "r.txt").read_text().splitlines() == [
        "issues = none", "missing = NA", "status = passed", "value = 0.10000000000000001",
    ]
    assert writer.get_export_stats()["files_written"] == 2


def test_main_exit_codes(tmp_path):
    good = write_config(tmp_path, raw_config(tmp_path))
    assert main(["scatter", "--config", str(good), "--out", str(tmp_path / "cli")]) == 0
    assert (tmp_path / "cli" / "scattering.csv").exists()

    assert main(["scatter", "--config", str(tmp_path / "absent.yaml")]) == 2
    bad = write_config(tmp_path, raw_config(tmp_path, model={"alpha": 0.0}), "bad.yaml")
    assert main(["asymptotics", "--config", str(bad)]) == 2
