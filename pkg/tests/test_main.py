"""Tests for the command-line entry point and its exit codes."""
import json

import numpy as np
import pytest

import main
from dynamics import LimitCycle
from experiment import RecordStatus, SweepRecord
from gmam import straight_line


@pytest.fixture(autouse=True)
def no_log_file(monkeypatch):
    monkeypatch.setattr(main.get_config(), "log_file", "")


@pytest.fixture
def config_file(tmp_path, synthetic_params):
    params_path = tmp_path / "params.json"
    params_path.write_text(json.dumps(synthetic_params.model_dump()))
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"params_file": str(params_path)}))
    return path


def _record(nu, converged=True, status=RecordStatus.OK):
    if status is not RecordStatus.OK:
        return SweepRecord(nu=nu, status=status, message="not bistable")
    angle = np.linspace(0.0, 2 * np.pi, 100)
    circle = np.column_stack([80.0 + 40.0 * np.cos(angle), 2300.0 + 200.0 * np.sin(angle)])
    circle[-1] = circle[0]
    return SweepRecord(
        nu=nu, action=1.25, path_length=150.0, arrival_c=120.0, arrival_w=2300.0,
        endpoint_index=0, converged=converged, iterations=42,
        fixed_point=np.array([80.0, 2300.0]),
        path=straight_line((80.0, 2300.0), (120.0, 2300.0), 10),
        stable_cycle=LimitCycle(points=circle, period=4.0, stability="stable"),
        unstable_cycle=LimitCycle(points=circle, period=4.0, stability="unstable"),
    )


def _fake_transition(record):
    def fake(nu, params, config, workers=1, initial_path=None):
        return record
    return fake


# Parser

def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        main.build_parser().parse_args([])


def test_parser_requires_nu_for_path():
    with pytest.raises(SystemExit):
        main.build_parser().parse_args(["path"])


def test_parser_global_options():
    args = main.build_parser().parse_args(["--seed", "7", "--threads", "3", "simulate", "--nu", "0.2", "--with-path"])
    assert args.command == "simulate"
    assert args.seed == 7 and args.threads == 3
    assert args.nu == 0.2 and args.with_path


# Exit codes

def test_unknown_config_key_exits_with_config_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"c_x": 62.0, "colour": "blue"}))
    assert main.main(["--config", str(bad), "sweep"]) == main.EXIT_CONFIG


def test_missing_parameter_file_exits_with_config_error(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"params_file": str(tmp_path / "nowhere.json")}))
    assert main.main(["--config", str(path), "sweep"]) == main.EXIT_CONFIG


@pytest.mark.parametrize("option", [["--threads", "0"], ["--seed", "-1"], ["--seed", str(2 ** 64)]])
def test_bad_runtime_options(config_file, option):
    assert main.main(["--config", str(config_file), *option, "sweep"]) == main.EXIT_CONFIG


def test_scan_outside_window(config_file, tmp_path):
    argv = ["--config", str(config_file), "--output", str(tmp_path / "out"), "scan", "--cx-min", "10"]
    assert main.main(argv) == main.EXIT_CONFIG


def test_path_writes_outputs(config_file, tmp_path, monkeypatch):
    monkeypatch.setattr(main, "transition_at", _fake_transition(_record(0.2)))
    out = tmp_path / "out"
    assert main.main(["--config", str(config_file), "--output", str(out), "path", "--nu", "0.2"]) == main.EXIT_OK

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "path"
    assert manifest["config"]["nu"] == 0.2
    assert "params" in manifest["config"]
    assert "paths/path_nu_0.200.csv" in [f["name"] for f in manifest["files"]]
    assert (out / "timings.json").exists()


def test_unconverged_path_exits_with_3(config_file, tmp_path, monkeypatch):
    monkeypatch.setattr(main, "transition_at", _fake_transition(_record(0.2, converged=False)))
    argv = ["--config", str(config_file), "--output", str(tmp_path / "out"), "path", "--nu", "0.2"]
    assert main.main(argv) == main.EXIT_NOT_CONVERGED


def test_skipped_path_is_not_an_error(config_file, tmp_path, monkeypatch):
    monkeypatch.setattr(main, "transition_at", _fake_transition(_record(0.95, status=RecordStatus.SKIPPED)))
    argv = ["--config", str(config_file), "--output", str(tmp_path / "out"), "path", "--nu", "0.95"]
    assert main.main(argv) == main.EXIT_OK


def test_compose_without_converged_path_exits_with_3(config_file, tmp_path, monkeypatch):
    monkeypatch.setattr(main, "transition_at", _fake_transition(_record(0.2, status=RecordStatus.FAILED)))
    argv = ["--config", str(config_file), "--output", str(tmp_path / "out"), "compose", "--nu", "0.2"]
    assert main.main(argv) == main.EXIT_NOT_CONVERGED


def test_unwritable_output_exits_with_4(config_file, tmp_path, monkeypatch):
    monkeypatch.setattr(main, "transition_at", _fake_transition(_record(0.2)))
    blocker = tmp_path / "occupied"
    blocker.write_text("not a directory")
    argv = ["--config", str(config_file), "--output", str(blocker / "out"), "path", "--nu", "0.2"]
    assert main.main(argv) == main.EXIT_IO


def test_unexpected_error_exits_with_1(config_file, tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("boom")
    monkeypatch.setattr(main, "transition_at", boom)
    argv = ["--config", str(config_file), "--output", str(tmp_path / "out"), "path", "--nu", "0.2"]
    assert main.main(argv) == main.EXIT_UNEXPECTED


@pytest.mark.params
@pytest.mark.slow
def test_manifest_does_not_depend_on_threads(tmp_path, params):
    params_path = tmp_path / "params.json"
    params_path.write_text(json.dumps(params.model_dump()))
    config = tmp_path / "experiment.json"
    config.write_text(json.dumps({
        "params_file": str(params_path),
        "nu_min": 0.0, "nu_max": 0.02,
        "gmam": {"n_points": 60, "max_outer_iters": 200},
        "n_candidates": 4, "cycle_points": 256,
    }))
    codes, manifests = [], []
    for threads in ("1", "2"):
        out = tmp_path / f"threads_{threads}"
        codes.append(main.main(["--config", str(config), "--output", str(out), "--threads", threads, "sweep"]))
        manifests.append((out / "manifest.json").read_bytes())
    assert codes[0] == codes[1]
    assert codes[0] in (main.EXIT_OK, main.EXIT_NOT_CONVERGED)
    assert manifests[0] == manifests[1]
