import json
import logging
from pathlib import Path

import numpy as np
import pytest
from helpers.assertions import assert_same_rotation
from helpers.factories import MeasurementFactory, well_conditioned_quaternion

from wahbakit.config.settings import get_settings
from wahbakit.presentation.cli.main import main
from wahbakit.presentation.cli.schemas import (
    CompareRowSchema,
    DensityRowSchema,
    HistogramSchema,
    SolveReportSchema,
)


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Настройки и обработчики логов не переживают тест."""
    monkeypatch.delenv("WAHBA_KIT_WORKERS", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
    for handler in list(logging.getLogger("wahbakit").handlers):
        logging.getLogger("wahbakit").removeHandler(handler)


def _write_measurements(path: Path, meas) -> Path:
    payload = {
        "measurements": [
            {"b": b.tolist(), "r": r.tolist(), "w": w} for b, r, w in meas.entries()
        ]
    }
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture
def perfect_file(tmp_path, perfect_set):
    return _write_measurements(tmp_path / "perfect.json", perfect_set)


@pytest.fixture
def half_turn_file(tmp_path):
    path = tmp_path / "half_turn.json"
    path.write_text(
        json.dumps([
            {"b": [-1.0, 0.0, 0.0], "r": [1.0, 0.0, 0.0], "w": 1.0},
            {"b": [0.0, -1.0, 0.0], "r": [0.0, 1.0, 0.0], "w": 1.0},
        ]),
        encoding="utf-8",
    )
    return path


# --- solve ----------------------------------------------------------------------


def test_solve_prints_report(perfect_file, q_true, capsys):
    assert main(["solve", str(perfect_file), "--method", "quest"]) == 0
    report = SolveReportSchema.model_validate_json(capsys.readouterr().out)
    assert report.method.value == "quest"
    assert_same_rotation(report.q, q_true, 1e-10)
    assert report.lambda_ == pytest.approx(2.0, abs=1e-12)


def test_solve_writes_csv_file(perfect_file, tmp_path):
    out = tmp_path / "out" / "report.csv"
    assert main(["solve", str(perfect_file), "--format", "csv", "--output", str(out)]) == 0
    header, row = out.read_text(encoding="utf-8").splitlines()
    assert header == "method,v1,v2,v3,s,lambda,iterations,residual,taste"
    assert row.startswith("recursive,")


def test_solve_reads_csv_input(tmp_path, perfect_set, capsys):
    path = tmp_path / "meas.csv"
    lines = ["bx,by,bz,rx,ry,rz,w"] + [
        ",".join(repr(float(x)) for x in [*b, *r, w]) for b, r, w in perfect_set.entries()
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert main(["solve", str(path)]) == 0
    assert SolveReportSchema.model_validate_json(capsys.readouterr().out).iterations == 1


def test_solve_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"measurements": [', encoding="utf-8")
    assert main(["solve", str(path)]) == 1
    captured = capsys.readouterr()
    assert captured.err.startswith("InputError:")
    assert captured.out == ""


def test_solve_missing_file(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "absent.json")]) == 1
    assert capsys.readouterr().err.startswith("InputError:")


def test_solve_non_unit_vectors_need_renormalize(tmp_path, capsys):
    path = tmp_path / "raw.json"
    path.write_text(
        json.dumps([
            {"b": [2.0, 0.0, 0.0], "r": [1.0, 0.0, 0.0], "w": 1.0},
            {"b": [0.0, 0.0, 5.0], "r": [0.0, 0.0, 1.0], "w": 1.0},
        ]),
        encoding="utf-8",
    )
    assert main(["solve", str(path)]) == 1
    assert capsys.readouterr().err.startswith("InvalidMeasurement:")
    assert main(["solve", str(path), "--renormalize", "--method", "q_method"]) == 0
    report = SolveReportSchema.model_validate_json(capsys.readouterr().out)
    assert np.allclose(report.q, [0.0, 0.0, 0.0, 1.0], atol=1e-12)


def test_solve_half_turn_is_numerical_failure(half_turn_file, capsys):
    assert main(["solve", str(half_turn_file)]) == 2
    assert capsys.readouterr().err.startswith("NearSingular:")


def test_solve_unknown_method(perfect_file, capsys):
    assert main(["solve", str(perfect_file), "--method", "svd"]) == 1
    assert capsys.readouterr().err.startswith("InputError:")


def test_solve_rejects_nonpositive_tolerance(perfect_file, capsys):
    assert main(["solve", str(perfect_file), "--tol", "0"]) == 1


def test_debug_logging_keeps_stdout_clean(perfect_file, capsys):
    assert main(["--log-level", "debug", "solve", str(perfect_file)]) == 0
    captured = capsys.readouterr()
    SolveReportSchema.model_validate_json(captured.out)
    assert "recursive" in captured.err


# --- compare --------------------------------------------------------------------


def test_compare_rows(tmp_path, rng, capsys):
    meas = MeasurementFactory.noisy(rng, (0.5, 1.0), q_true=well_conditioned_quaternion(rng))
    path = _write_measurements(tmp_path / "noisy.json", meas)
    assert main(["compare", str(path)]) == 0
    rows = [CompareRowSchema.model_validate(row) for row in json.loads(capsys.readouterr().out)]
    assert [row.method.value for row in rows] == [
        "q_method",
        "quest",
        "first_order",
        "recursive",
        "zeroth_order",
    ]
    assert rows[0].gap == 0.0
    assert all(row.error is None for row in rows)
    assert rows[1].gap <= 1e-10 and rows[3].gap <= 1e-10
    assert all(row.gap >= 0.0 for row in rows)
    assert rows[2].gap == pytest.approx(abs(rows[0].lambda_ - rows[2].lambda_), abs=1e-15)
    assert all(row.wall_time_ns >= 0 for row in rows)


def test_compare_reports_failures_in_rows(half_turn_file, capsys):
    assert main(["compare", str(half_turn_file), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "method,lambda,gap,iterations,residual,taste,wall_time_ns,error"
    assert lines[1].startswith("q_method,")
    assert all("NearSingular" in line for line in lines[2:])


# --- simulate -------------------------------------------------------------------


def _simulate(out, *extra):
    return main([
        "simulate", "--seed", "99", "--sigma1", "1.0", "--sigma2", "0.5",
        "--trials", "300", "--rho-h", "10", "--output", str(out), *extra,
    ])


def test_simulate_is_byte_identical(tmp_path, monkeypatch):
    monkeypatch.setenv("WAHBA_KIT_CHUNK_SIZE", "40")
    outputs = []
    for run, workers in enumerate(("1", "1", "4", "8")):
        get_settings.cache_clear()
        out = tmp_path / f"run{run}.csv"
        assert _simulate(out, "--workers", workers) == 0
        outputs.append(out.read_bytes())
    assert len(set(outputs)) == 1
    assert outputs[0].startswith(b"bin_lo,bin_hi,count\n")
    assert len(outputs[0].splitlines()) == 31


def test_simulate_json_echoes_config(tmp_path):
    out = tmp_path / "hist.json"
    assert _simulate(out, "--format", "json", "--w1", "2.0", "--metric", "rotation_angle") == 0
    histogram = HistogramSchema.model_validate_json(out.read_text(encoding="utf-8"))
    assert histogram.config.seed == 99
    assert histogram.config.sigma1_deg == 1.0
    assert histogram.config.weights == [2.0, 1.0]
    assert histogram.config.error_metric.value == "rotation_angle"
    assert len(histogram.bins) == 30


def test_simulate_workers_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("WAHBA_KIT_WORKERS", "2")
    monkeypatch.setenv("WAHBA_KIT_CHUNK_SIZE", "100")
    assert _simulate(tmp_path / "env.csv") == 0


def test_simulate_study_writes_six_files(tmp_path):
    out_dir = tmp_path / "study"
    code = main([
        "simulate", "--study", "--seed", "1", "--trials", "40", "--rho-h", "10",
        "--output-dir", str(out_dir), "--format", "json",
    ])
    assert code == 0
    files = sorted(p.name for p in out_dir.iterdir())
    assert len(files) == 6
    assert "hist_s1_0.1_s2_0.1.json" in files
    for path in out_dir.iterdir():
        HistogramSchema.model_validate_json(path.read_text(encoding="utf-8"))


def test_simulate_requires_seed(capsys):
    assert main(["simulate", "--sigma1", "1", "--sigma2", "1"]) == 1
    assert capsys.readouterr().err.startswith("InputError:")


def test_simulate_requires_noise_or_study(capsys):
    assert main(["simulate", "--seed", "1"]) == 1


def test_simulate_study_rejects_output(tmp_path, capsys):
    argv = ["simulate", "--study", "--seed", "1", "--output", str(tmp_path / "x.csv")]
    assert main(argv) == 1
    assert capsys.readouterr().err.startswith("InputError:")
    assert not (tmp_path / "x.csv").exists()


def test_simulate_too_few_trials(tmp_path, capsys):
    assert _simulate(tmp_path / "x.csv", "--rho-h", "1000") == 1
    assert capsys.readouterr().err.startswith("ConfigError:")


# --- density / окружение --------------------------------------------------------


def test_density_rows(capsys):
    assert main(["density", "--seed", "4", "--samples", "20000", "--rho-h", "20", "200"]) == 0
    rows = [DensityRowSchema.model_validate(r) for r in json.loads(capsys.readouterr().out)]
    assert [r.n_bins for r in rows] == [1000, 100]
    assert rows[0].l1_error > rows[1].l1_error


def test_invalid_environment_is_config_failure(monkeypatch, perfect_file, capsys):
    monkeypatch.setenv("WAHBA_KIT_LOG_LEVEL", "chatty")
    assert main(["solve", str(perfect_file)]) == 1
    assert capsys.readouterr().err.startswith("ConfigError:")
