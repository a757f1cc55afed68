from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from cli_runs import JUMP_1, JUMP_1_1, TIGHT, command_lines, invoke
from localskorokhod.serialization import dumps_path, load_path, loads_path
from localskorokhod.paths import StepPath


def test_dist_fixture_gives_time_shift() -> None:
    res = invoke(["dist", JUMP_1, JUMP_1_1, "--t", "3", "--radius", "10"])
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["rho_tilde"] == pytest.approx(0.1, abs=1e-9)
    assert 0.1 - 1e-9 <= out["rho"] <= 6.0 * math.sqrt(0.1)
    assert out["local_lower"] <= out["local_upper"]


def test_dist_identical_files() -> None:
    out = json.loads(invoke(["dist", JUMP_1, JUMP_1, "--t", "3", "--n-terms", "7"]).output)
    assert out["rho_tilde"] == out["rho"] == out["local_lower"] == 0.0
    # Terms n = 0..6 vanish; the unevaluated tail sum_{n >= 7} 2^-n remains.
    assert out["local_upper"] == 2.0**-6


def test_dist_missing_file_names_the_path(tmp_path: Path) -> None:
    missing = str(tmp_path / "nope.json")
    res = invoke(["dist", JUMP_1, missing, "--t", "1"])
    assert res.exit_code == 2
    assert "nope.json" in res.output


def test_dist_malformed_file(tmp_path: Path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 1, "jumps": [{"t": 1.0, "v": [0.0]}], "xi": null}', encoding="utf-8")
    res = invoke(["dist", JUMP_1, str(bad), "--t", "1"])
    assert res.exit_code == 2 and "error:" in res.output


def test_omega_constant_path(tmp_path: Path) -> None:
    p = tmp_path / "c.json"
    p.write_text(dumps_path(StepPath.constant(1.0)), encoding="utf-8")
    res = invoke(["omega", str(p), "--t", "2", "--deltas", "0.1,0.5,1"])
    assert res.exit_code == 0
    lines = res.output.splitlines()
    assert lines[0] == "delta,omega_prime"
    assert [float(l.split(",")[1]) for l in lines[1:]] == [0.0, 0.0, 0.0]


def test_omega_jump_path_curve() -> None:
    lines = invoke(["omega", JUMP_1, "--t", "3", "--deltas", "0.5,2.5"]).output.splitlines()
    # A jump at 1 can be isolated only by cells longer than delta on both sides.
    assert [float(l.split(",")[1]) for l in lines[1:]] == [0.0, 1.0]


def test_omega_empty_grid_exits_2() -> None:
    res = invoke(["omega", JUMP_1, "--t", "3", "--deltas", ","])
    assert res.exit_code == 2 and "--deltas" in res.output


def test_timechange_unit_rate_is_identity() -> None:
    res = invoke(["timechange", JUMP_1, "--g", '{"kind": "constant", "value": 1}'])
    assert res.exit_code == 0
    assert loads_path(res.output) == load_path(JUMP_1)


def test_timechange_rate_two_halves_times() -> None:
    y = loads_path(invoke(["timechange", JUMP_1_1, "--g", '{"kind": "constant", "value": 2}']).output)
    assert y.times.tolist() == [0.0, 0.55]


@pytest.mark.parametrize("g", ['{"kind": "wobble"}', "[1, 2]", "{not json", '{"kind": "constant", "k": 1}'])
def test_timechange_bad_rate_exits_2(g: str) -> None:
    assert invoke(["timechange", JUMP_1, "--g", g]).exit_code == 2


def test_config_errors_exit_2(tmp_path: Path) -> None:
    cfg = tmp_path / "c.json"
    cfg.write_text('{"metric_kind": "taxicab"}', encoding="utf-8")
    res = invoke(["--config", str(cfg), "omega", JUMP_1, "--t", "1", "--deltas", "0.5"])
    assert res.exit_code == 2 and "metric_kind" in res.output
    cfg.write_text('{"unknown": 1}', encoding="utf-8")
    assert invoke(["--config", str(cfg), "omega", JUMP_1, "--t", "1", "--deltas", "0.5"]).exit_code == 2
    assert invoke(["--config", str(tmp_path / "missing.json"), "demo"]).exit_code == 2
    cfg.write_text("{}", encoding="utf-8")
    assert invoke(["--config", str(cfg), "tight"]).exit_code == 2
    assert invoke(["--config", str(cfg), "compactness"]).exit_code == 2


def test_tight_deterministic_sampler_gives_zero_or_one(tmp_path: Path) -> None:
    path = json.loads(Path(JUMP_1).read_text(encoding="utf-8"))
    cfg = {"tight": {"statistic": "omega", "t": 3.0, "epsilon": 0.5, "n_mc": 7,
                     "delta_grid": [2.5, 0.5],
                     "samplers": [{"label": "x", "kind": "fixed", "params": {"path": path}}]}}
    f = tmp_path / "t.json"
    f.write_text(json.dumps(cfg), encoding="utf-8")
    lines = invoke(["--config", str(f), "tight"]).output.splitlines()
    assert lines[0].startswith("sampler_label,epsilon,t,region,delta,estimate")
    est = {(l.split(",")[0], float(l.split(",")[4])): float(l.split(",")[5]) for l in lines[1:]}
    assert est[("x", 2.5)] == 1.0 and est[("x", 0.5)] == 0.0
    assert est[("sup", 2.5)] == 1.0


def test_tight_both_prefixes_labels(tmp_path: Path) -> None:
    f = tmp_path / "t.json"
    f.write_text(json.dumps(TIGHT), encoding="utf-8")
    labels = {l.split(",")[0] for l in invoke(["--config", str(f), "tight"]).output.splitlines()[1:]}
    assert labels == {"omega/p", "omega/one", "omega/sup", "alpha/p", "alpha/one", "alpha/sup"}


def test_simulate_outputs_loadable_paths(tmp_path: Path) -> None:
    cmds = command_lines(tmp_path)
    ode = loads_path(invoke(cmds["simulate-ode"]).output)
    assert 0.0 < ode.xi < 1.0
    levy = loads_path(invoke(cmds["simulate-levy"]).output)
    assert math.isinf(levy.xi)


def test_out_writes_file(tmp_path: Path) -> None:
    target = tmp_path / "curve.csv"
    res = invoke(["--out", str(target), "omega", JUMP_1, "--t", "3", "--deltas", "0.5"])
    assert res.exit_code == 0 and res.output == ""
    assert target.read_text(encoding="utf-8").startswith("delta,omega_prime")


@pytest.mark.parametrize("name", ["dist", "omega", "timechange", "compactness", "tight",
                                  "simulate-ode", "simulate-levy"])
def test_commands_are_deterministic(name: str, tmp_path: Path) -> None:
    args = command_lines(tmp_path)[name]
    a, b = invoke(args), invoke(args)
    assert a.exit_code == 0
    assert a.output == b.output
