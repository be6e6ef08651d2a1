import json
import math

import numpy as np
import pytest

from nhfloquet import cli
from nhfloquet.io import fmt, read_csv, write_csv, write_json, write_matrix
from nhfloquet.presets import FIG3_V, PRESETS


def run(tmp_path, *args):
    return cli.main(list(args) + ["--out", str(tmp_path)])


def test_fmt_cells():
    assert fmt(0.1) == "0.10000000000000001"
    assert float(fmt(math.pi)) == math.pi
    assert fmt(np.float64(-0.0)) == "-0"
    assert fmt(True) == "1" and fmt(np.int64(7)) == "7"
    assert fmt(math.nan) == "nan" and fmt(-math.inf) == "-inf" and fmt(None) == ""


def test_csv_round_trip(tmp_path):
    rows = [{"a": 0.1, "b": "x,y", "c": 3}, {"a": 1e-300, "b": 'q"', "c": -1}]
    path = write_csv(tmp_path / "t.csv", ["a", "b", "c"], rows)
    header, back = read_csv(path)
    assert header == ["a", "b", "c"]
    assert [float(r["a"]) for r in back] == [0.1, 1e-300]
    assert [r["b"] for r in back] == ["x,y", 'q"']
    assert b"\r" not in path.read_bytes()


def test_json_and_matrix_writers(tmp_path):
    write_json(tmp_path / "a.json", {"b": np.float64(1.5), "a": np.array([1, 2]), "c": math.inf})
    assert json.loads((tmp_path / "a.json").read_text()) == {"a": [1, 2], "b": 1.5, "c": "inf"}
    write_matrix(tmp_path / "m.txt", np.eye(2), header="h")
    assert (tmp_path / "m.txt").read_text() == "# h\n1 0\n0 1\n"


@pytest.mark.parametrize("tok,val", [("1.5", 1.5), ("pi", math.pi), ("0.7pi", 0.7 * math.pi),
                                     ("pi/6", math.pi / 6), ("2*pi", 2 * math.pi), ("-1e-3", -1e-3)])
def test_parse_number(tok, val):
    assert cli.parse_number(tok) == pytest.approx(val, rel=1e-15)


def test_parse_list_ranges():
    assert cli.parse_list("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
    assert cli.parse_list("0.2pi, 0.7pi") == pytest.approx([0.2 * math.pi, 0.7 * math.pi])
    with pytest.raises(cli.UsageError):
        cli.parse_list("abc")


def test_zeta_round_trips_through_csv(tmp_path):
    assert run(tmp_path, "scan-v", "--L", "55", "--V", "0.2pi,1.2pi,2.2pi") == 0
    header, rows = read_csv(tmp_path / "scan_v.csv")
    assert header == ["V", "max_im_e", "rho", "agr_mean", "ipr_ave", "npr_ave", "ipr_max",
                      "ipr_min", "zeta", "phase", "error"]
    for r in rows:
        assert math.log10(float(r["ipr_ave"]) * float(r["npr_ave"])) == float(r["zeta"])


def test_rerun_from_provenance_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "phase-diagram", "--L", "34", "--V", "0.5,1.5", "--gamma", "0,0.5",
               "--format", "csv,json") == 0
    assert run(b, "phase-diagram", "--config", str(a / "provenance.json"),
               "--format", "csv,json") == 0
    for name in ("phase_diagram.csv", "phase_diagram.json", "provenance.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_toml_config_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[model]\nL = 34\ngamma = 0.5\n[scan]\nV = ["0.2pi", "0.7pi"]\n'
                   '[run]\neps_im = 1e-6\n')
    assert run(tmp_path, "scan-v", "--config", str(cfg), "--gamma", "0.3") == 0
    prov = json.loads((tmp_path / "provenance.json").read_text())["config"]
    assert prov["model"]["L"] == 34 and prov["model"]["gamma"] == 0.3
    assert prov["run"]["eps_im"] == 1e-6
    assert prov["scan"]["V"] == pytest.approx([0.2 * math.pi, 0.7 * math.pi])


def test_preset_resolution():
    args = cli.build_parser().parse_args(["dynamics", "--preset", "fig6-desk", "--periods", "7"])
    cfg = cli.resolve(args)
    assert cfg["model"]["L"] == 987 and cfg["run"]["periods"] == 7 and cfg["run"]["thin"] == 5
    assert cfg["scan"]["V"] == list(FIG3_V)
    for name, pre in PRESETS.items():
        assert pre["command"] in cli.COMMANDS, name


@pytest.mark.parametrize("argv", [
    ["scan-v", "--V", ""],
    ["scan-v", "--V", "1,0.5,2"],
    ["spectrum", "--V", "1,2"],
    ["spectrum", "--preset", "fig2-desk"],
    ["variant", "--V", "1"],
    ["spectrum", "--format", "xml"],
    ["spectrum", "--L", "1"],
    ["spectrum", "--L", "12.5"],
    ["spectrum", "--eps-im", "0"],
    ["scan-v", "--V", "1", "--threads", "0"],
    ["frobnicate"],
    ["spectrum", "--J", "nope"],
])
def test_usage_errors_exit_2(tmp_path, argv, capsys):
    try:
        code = run(tmp_path, *argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_spectrum_and_dynamics_outputs(tmp_path):
    assert run(tmp_path, "spectrum", "--L", "34", "--V", "1.0", "--format", "csv,json") == 0
    header, rows = read_csv(tmp_path / "spectrum.csv")
    assert header == ["index", "re_e", "im_e", "ipr", "npr", "residual"] and len(rows) == 34
    assert json.loads((tmp_path / "spectrum.json").read_text())["summary"]["L"] == 34
    d = tmp_path / "dyn"
    assert run(d, "dynamics", "--L", "34", "--V", "0.5,2", "--periods", "6", "--heatmap",
               "--thin", "3") == 0
    header, rows = read_csv(d / "trajectory_001.csv")
    assert header == ["t", "x", "x_sd", "v"] and len(rows) == 6
    heat = (d / "heatmap_000.txt").read_text().splitlines()
    assert heat[0].startswith("#") and len(heat) == 3 and len(heat[1].split()) == 34
    _, summ = read_csv(d / "dynamics.csv")
    assert len(summ) == 2


def test_runtime_failure_exit_1(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("solver exploded")
    monkeypatch.setattr(cli, "solve_spectrum", boom)
    assert run(tmp_path, "spectrum", "--L", "13") == 1


def test_variant_and_ipr_outputs(tmp_path):
    assert run(tmp_path, "variant", "--kind", "dimer", "--L", "34", "--V", "1,2") == 0
    assert (tmp_path / "variant_dimer.csv").exists()
    assert run(tmp_path, "ipr-scaling", "--L", "21,34,55", "--V", "0.2pi") == 0
    header, rows = read_csv(tmp_path / "ipr_slopes.csv")
    assert header == ["V_fixed", "ipr_max", "ipr_ave", "ipr_min"] and len(rows) == 1
