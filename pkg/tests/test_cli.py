import json

import numpy as np
import pytest
from click.testing import CliRunner

from protmeas.cli import fmt, main, run_experiment
from protmeas.config import (
    ConfigError,
    load_profile,
    load_system,
    parse_pointer,
    parse_profile,
    parse_system,
)


@pytest.fixture
def runner():
    return CliRunner()


QUBIT_TOML = """
[system]
energies = [-0.5, 0.5]
observable = [[0.6, 0.5], [0.5, -0.2]]
initial_level = 0
"""


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def test_parse_system_with_complex_entries():
    system = parse_system({
        "energies": [0.0, 1.0],
        "observable": [[0.0, [0.0, -1.0]], [[0.0, 1.0], 0.0]],
        "initial_level": 1,
    })
    assert system.observable[0, 1] == -1j
    assert system.initial_level == 1


@pytest.mark.parametrize("table, field", [
    ({"observable": [[0.0]]}, "energies"),
    ({"energies": [0.0, 1.0], "observable": [[0.0, 1.0]]}, "observable"),
    ({"energies": [0.0, 1.0], "observable": [[0, 1], [1, 0]],
      "initial_level": "x"}, "initial_level"),
    ({"energies": [0.0, 1.0], "observable": [[0, "a"], [1, 0]]}, "observable[0][1]"),
])
def test_parse_system_errors_carry_field_path(table, field):
    with pytest.raises(ConfigError) as exc:
        parse_system(table)
    assert field in exc.value.field_path


def test_parse_profile_kinds_and_aliases():
    assert parse_profile({"kind": "constant", "T": 5.0}).kind == "boxcar"
    assert parse_profile({"kind": "raised_cosine", "T": 5.0}).kind == "raised-cosine"
    trap = parse_profile({"kind": "trapezoid", "T": 4.0, "turn_on_fraction": 0.25})
    assert trap.turn_on_fraction == 0.25
    with pytest.raises(ConfigError):
        parse_profile({"kind": "wedge", "T": 1.0})
    with pytest.raises(ConfigError):
        parse_profile({"kind": "boxcar"})  # missing duration
    with pytest.raises(ConfigError):
        parse_profile({"kind": "trapezoid", "T": 1.0})  # missing fraction
    with pytest.raises(ConfigError):
        parse_profile({"kind": "sampled"})  # missing csv


def test_parse_profile_sampled_csv_relative_to_config(tmp_path):
    (tmp_path / "window.csv").write_text("-1.0,0.0\n0.0,1.0\n1.0,0.0\n")
    prof = parse_profile({"kind": "sampled", "csv": "window.csv"},
                         base_dir=tmp_path)
    assert prof.kind == "sampled"
    assert prof.duration == pytest.approx(2.0)


def test_parse_pointer():
    p = parse_pointer({"x0": 0.5, "sigma_x": 1.0, "grid_size": 32, "grid_span": 4.0})
    assert p.x0 == 0.5 and p.grid_size == 32
    free = parse_pointer({"apparatus": {"free": {"mass": 2.0}}})
    assert np.allclose(free.apparatus_energies, free.momenta**2 / 4.0)
    with pytest.raises(ConfigError):
        parse_pointer({"apparatus": {"trapped": {}}})
    with pytest.raises(ConfigError):
        parse_pointer({"grid_size": 4})


def test_load_system_and_profile(tmp_path):
    cfg = tmp_path / "qubit.toml"
    cfg.write_text(QUBIT_TOML + "\n[profile]\nkind = \"triangle\"\nT = 12.0\n")
    system = load_system(cfg)
    assert system.diagonal_expectation == pytest.approx(0.6)
    profile = load_profile(cfg)
    assert profile.kind == "triangle" and profile.duration == 12.0
    with pytest.raises(ConfigError):
        load_system(tmp_path / "missing.toml")


def test_fmt_is_twelve_significant_digits():
    assert fmt(np.pi) == "3.14159265359e+00"
    assert fmt(0.0) == "0.00000000000e+00"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def test_table1_writes_artifacts_and_passes(runner, tmp_path):
    out = tmp_path / "results"
    result = runner.invoke(main, ["table1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads((out / "table1.json").read_text())
    assert data["schema_version"] == 1
    assert len(data["rows"]) == 3
    assert all(r["beta_ok"] and r["fwhm_ok"] for r in data["rows"])
    text = (out / "table1.txt").read_text()
    assert "pass" in text and "FAIL" not in text


def test_table1_exit_one_on_failed_fit(runner, tmp_path):
    # window too short for the fit: rows error out and the command signals it
    result = runner.invoke(main, ["table1", "--xmin", "62.8", "--xmax", "70.0",
                                  "--out", str(tmp_path)])
    assert result.exit_code == 1


def test_outputs_are_byte_identical_across_runs(runner, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        result = runner.invoke(main, ["--out", str(out), "scan",
                                      "--profile-kind", "triangle"])
        assert result.exit_code == 0, result.output
    assert (a / "scan.csv").read_bytes() == (b / "scan.csv").read_bytes()
    assert (a / "scan.json").read_bytes() == (b / "scan.json").read_bytes()


def test_ft_emits_numeric_cross_check_column(runner):
    result = runner.invoke(main, ["ft", "--points", "5", "--x-max", "10",
                                  "--numeric"])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "x,transform,numeric"
    for line in lines[1:]:
        _, analytic, numeric = line.split(",")
        assert abs(float(analytic) - float(numeric)) < 1e-9


def test_identity_command_reports_small_errors(runner):
    result = runner.invoke(main, ["identity", "--profile-kind", "raised-cosine",
                                  "--max-ell", "4"])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "ell,value,expected,abs_error"
    for line in lines[1:]:
        assert float(line.split(",")[3]) < 1e-9


def test_dyson_json_output(runner, tmp_path):
    cfg = tmp_path / "qubit.toml"
    cfg.write_text(QUBIT_TOML)
    result = runner.invoke(main, ["--config", str(cfg), "--format", "json",
                                  "dyson", "--T", "5", "--max-order", "2"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["schema_version"] == 1
    assert data["max_order"] == 2
    assert len(data["rows"]) == 6  # (orders 0..2) x (2 levels)
    zero = [r for r in data["rows"] if r["order"] == 0]
    assert {(r["m"], r["re"]) for r in zero} == {(0, 1.0), (1, 0.0)}


def test_oracle_csv_and_summary(runner, tmp_path):
    out = tmp_path / "res"
    result = runner.invoke(main, ["--out", str(out), "oracle",
                                  "--profile-kind", "boxcar", "--T", "20",
                                  "--grid", "32"])
    assert result.exit_code == 0, result.output
    rows = (out / "oracle.csv").read_text().strip().splitlines()
    assert rows[0] == "a,re_0,im_0,re_1,im_1,survival"
    assert len(rows) == 33
    summary = json.loads((out / "oracle.json").read_text())
    assert 0.0 <= summary["disturbance"] < 0.1
    assert summary["convergence"] < 1e-8


def test_pointer_command_band(runner, tmp_path):
    cfg = tmp_path / "qubit.toml"
    cfg.write_text(QUBIT_TOML)
    out = tmp_path / "res"
    result = runner.invoke(main, ["--config", str(cfg), "--out", str(out),
                                  "pointer", "--T", "80", "--grid", "32",
                                  "--profiles", "boxcar,triangle"])
    assert result.exit_code == 0, result.output
    data = json.loads((out / "pointer.json").read_text())
    assert len(data["rows"]) == 2
    for row in data["rows"]:
        assert row["expected"] == pytest.approx(0.6)
        assert row["within_band"]


def test_malformed_config_exits_two(runner, tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[system]\nenergies = [0.0, 1.0]\n"
                   "observable = [[0.0, 1.0]]\n")
    result = runner.invoke(main, ["--config", str(cfg), "scan"])
    assert result.exit_code == 2
    assert "observable" in result.output


def test_run_dispatch_and_guards(runner, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(QUBIT_TOML + "\n[run]\ncommand = \"identity\"\nmax-ell = 3\n")
    out = tmp_path / "res"
    assert run_experiment(cfg, out) == 0
    assert (out / "identity.csv").exists()
    # missing config / unknown command
    result = runner.invoke(main, ["run"])
    assert result.exit_code == 2
    cfg.write_text("[run]\ncommand = \"nope\"\n")
    result = runner.invoke(main, ["--config", str(cfg), "run"])
    assert result.exit_code == 2
