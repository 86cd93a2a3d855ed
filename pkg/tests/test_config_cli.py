import json

import numpy as np
import pytest
import yaml

from unicycle_esc import cli
from unicycle_esc.config import dump_config, from_dict, parse_config, preset_names, to_dict
from unicycle_esc.errors import ConfigError, DivergenceError
from unicycle_esc.sim import Trajectory


def short_scenario(tmp_path, name="moving-source", **top):
    raw = to_dict(parse_config(name))
    raw.update(top)
    path = tmp_path / f"{raw['name']}.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path


def test_presets_listed():
    assert preset_names() == ["known-field-robot", "light-gaussian", "moving-source", "sim-known-field"]


def test_sim_preset_values():
    cfg = parse_config("sim-known-field")
    p = cfg.params
    assert (p.omega, p.c, p.Omega, p.a0, p.lam, p.h) == (120.0, 0.3, 3.0, 1.0, 0.0105, 1.0)
    assert (p.dt_meas, p.n_substeps, p.q_scale, p.r_scale, p.p0) == (0.01, 10, 0.0005, 0.00999, 4.0)
    assert cfg.initial_position == (2.0, 2.0)
    assert cfg.field.kind == "quadratic" and cfg.field.center(0.0) == (1.0, 1.0)


def test_light_preset_values():
    cfg = parse_config("light-gaussian")
    p = cfg.params
    assert (p.omega, p.c, p.Omega, p.a0, p.lam, p.h) == (100.0, 1.0, 1.0, 0.55, 0.02, 6.0)
    assert (p.dt_meas, p.n_substeps, p.r_scale, p.q_scale) == (0.1, 20, 0.2, 0.005)
    assert cfg.initial_position == (1.3, 0.85)


def test_robot_preset_values():
    p = parse_config("known-field-robot").params
    assert (p.omega, p.c, p.Omega, p.a0, p.lam, p.h, p.dt_meas, p.n_substeps, p.r_scale) == (
        50.0, 5.0, 1.75, 3.53, 0.01, 1.0, 0.1, 20, 0.5)


def test_moving_preset_has_three_relocations():
    cfg = parse_config("moving-source")
    assert len(cfg.field.schedule.relocation_times) == 3
    assert cfg.noise.sigma == 0.05


def test_negative_lambda_rejected():
    raw = to_dict(parse_config("sim-known-field"))
    raw["esc"]["lambda"] = -1
    with pytest.raises(ConfigError, match="lambda must be positive"):
        from_dict(raw)


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda r: r["esc"].update(gain=1.0), "esc.gain"),
        (lambda r: r.update(colour="red"), "colour"),
        (lambda r: r["field"].update(radius=2), "field.radius"),
        (lambda r: r["esc"].pop("omega"), "esc.omega is required"),
        (lambda r: r["gekf"].update(n_substeps=2.5), "gekf.n_substeps"),
        (lambda r: r["esc"].update(c="fast"), "esc.c"),
        (lambda r: r.update(initial_position=[1.0]), "initial_position"),
        (lambda r: r["noise"].update(sigma=-0.1), "noise.sigma"),
        (lambda r: r["field"].update(kind="cone"), "unknown field kind"),
    ],
)
def test_diagnostics_name_the_key(mutate, message):
    raw = to_dict(parse_config("sim-known-field"))
    mutate(raw)
    with pytest.raises(ConfigError, match=message):
        from_dict(raw)


@pytest.mark.parametrize("name", ["sim-known-field", "known-field-robot", "light-gaussian", "moving-source"])
def test_config_echo_round_trips(name, tmp_path):
    cfg = parse_config(name)
    path = tmp_path / "echo.yaml"
    path.write_text(dump_config(cfg))
    assert parse_config(str(path)) == cfg


def test_unknown_scenario_lists_presets():
    with pytest.raises(ConfigError, match="available presets: known-field-robot"):
        parse_config("nowhere")


def test_seed_and_sweep_parsing():
    assert cli.parse_seeds("0..3") == [0, 1, 2, 3]
    assert cli.parse_seeds("7") == [7]
    with pytest.raises(ConfigError):
        cli.parse_seeds("3..1")
    assert cli.parse_sweep("omega=40,120,360") == ("omega", [40.0, 120.0, 360.0])
    with pytest.raises(ConfigError):
        cli.parse_sweep("speed=1")


def test_cli_list_and_show(capsys):
    assert cli.main(["list"]) == 0
    assert "sim-known-field" in capsys.readouterr().out.split()
    assert cli.main(["show", "light-gaussian"]) == 0
    assert "light-gaussian" in capsys.readouterr().out


def test_cli_unknown_scenario(capsys):
    assert cli.main(["run", "--scenario", "nowhere"]) == cli.EXIT_CONFIG
    assert "available presets" in capsys.readouterr().err


def test_cli_bad_config_file(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("name: x\nesc: {omega: 1}\n")
    assert cli.main(["run", "--scenario", str(path)]) == cli.EXIT_CONFIG


def test_cli_run_bundle(tmp_path):
    scen = short_scenario(tmp_path, "sim-known-field", horizon=2.0)
    out = tmp_path / "out"
    assert cli.main(["run", "--scenario", str(scen), "--out", str(out), "--compare-baseline", "--emit-lbs"]) == 0
    for name in ("trajectory.csv", "metrics.json", "config.yaml", "lbs.csv", "comparison.json", "baseline/trajectory.csv"):
        assert (out / name).is_file(), name
    comp = json.loads((out / "comparison.json").read_text())
    assert {"gekf_convergence_time", "baseline_convergence_time", "envelope_ratio"} <= set(comp)
    lbs = Trajectory.from_csv(out / "lbs.csv")
    assert len(lbs) == len(Trajectory.from_csv(out / "trajectory.csv"))

    # the config echo reproduces the run byte for byte
    again = tmp_path / "again"
    assert cli.main(["run", "--scenario", str(out / "config.yaml"), "--out", str(again)]) == 0
    assert (again / "trajectory.csv").read_bytes() == (out / "trajectory.csv").read_bytes()


def test_cli_seed_sweep(tmp_path):
    scen = short_scenario(tmp_path, horizon=60.0)
    out = tmp_path / "sweep"
    assert cli.main(["run", "--scenario", str(scen), "--out", str(out), "--seeds", "0..2", "--jobs", "2"]) == 0
    agg = json.loads((out / "aggregate.json").read_text())
    assert agg["runs"] == 3
    assert 0 <= agg["passed"] <= 3
    assert [r["seed"] for r in agg["results"]] == [0, 1, 2]
    a = Trajectory.from_csv(out / "seed-0" / "trajectory.csv")
    b = Trajectory.from_csv(out / "seed-1" / "trajectory.csv")
    assert not np.array_equal(a["f_meas"], b["f_meas"])


def test_cli_parameter_sweep(tmp_path):
    scen = short_scenario(tmp_path, "sim-known-field", horizon=1.0)
    out = tmp_path / "w"
    assert cli.main(["run", "--scenario", str(scen), "--out", str(out), "--sweep", "omega=40,120"]) == 0
    assert parse_config(str(out / "omega=40" / "config.yaml")).params.omega == 40.0
    assert (out / "omega=120" / "trajectory.csv").is_file()


def test_cli_default_out_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("UNICYCLE_ESC_OUT", str(tmp_path / "env"))
    scen = short_scenario(tmp_path, "sim-known-field", horizon=0.5)
    assert cli.main(["run", "--scenario", str(scen), "--variant", "baseline"]) == 0
    metrics = json.loads((tmp_path / "env" / "sim-known-field" / "metrics.json").read_text())
    assert metrics["final_amplitude"] == 1.0


def test_cli_divergence_exit_code(tmp_path, monkeypatch):
    def boom(self):
        raise DivergenceError("left the workspace", None)

    monkeypatch.setattr("unicycle_esc.sim.Simulation.step", boom)
    scen = short_scenario(tmp_path, "sim-known-field", horizon=0.5)
    assert cli.main(["run", "--scenario", str(scen), "--out", str(tmp_path / "d")]) == cli.EXIT_DIVERGED
