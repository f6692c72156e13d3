import json

import pytest

from conemass.cli import dumps, resolve_config, run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_mass_schwarzschild(capsys):
    code, out, _ = call(capsys, "mass", "--chart", "schwarzschild", "--m", "2", "--normalization", "standard")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["limit"] == pytest.approx(2.0, rel=0.01)
    assert rep["formula"]


def test_indicial_sphere_critical(capsys):
    code, out, _ = call(capsys, "indicial", "--n", "3", "--sphere", "--kmax", "3", "--delta", "0")
    rep = json.loads(out)
    assert code == 0 and rep["result"]["critical"] is True


def test_critical_weight_exit_code(capsys):
    code, _, err = call(capsys, "dirac-modes", "--lam", "-1", "--delta", "0")
    assert code == 2 and "critical" in err


def test_negative_yamabe_exit_code(capsys):
    code, _, _ = call(capsys, "horn-check", "--yamabe", "-1")
    assert code == 2


def test_config_overrides_flags_and_rejects_unknown(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 1.0, "chart": "flat"}))
    code, out, _ = call(capsys, "mass", "--m", "5", "--config", str(cfg))
    rep = json.loads(out)
    assert code == 0 and rep["inputs"]["m"] == 1.0 and rep["inputs"]["chart"] == "flat"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = call(capsys, "mass", "--config", str(cfg))
    assert code == 1 and "config error at /" in err


def test_schema_error_has_json_pointer(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"radii": [20, "x", 80]}))
    code, _, err = call(capsys, "mass", "--config", str(cfg))
    assert code == 1 and "/radii/1" in err
    cfg.write_text(json.dumps({"subcommand": "indicial"}))
    code, _, err = call(capsys, "mass", "--config", str(cfg))
    assert code == 1 and "/subcommand" in err


def test_usage_error_is_not_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["mass", "--chart", "nope"])
    assert exc.value.code == 1


def test_deterministic_output(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["horn-check", "--b", "1.5", "--out", str(a)]) == 0
    assert run(["horn-check", "--b", "1.5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["result"]["threshold"] == pytest.approx(4 / 9)


def test_csv_outputs(tmp_path, capsys):
    path = tmp_path / "flux.csv"
    assert run(["mass", "--chart", "flat", "--csv", str(path)]) == 0
    assert path.read_text().splitlines()[0] == "R,raw_flux,normalized_flux"
    path = tmp_path / "mode.csv"
    assert run(["dirac-modes", "--lam", "-1", "--delta", "-0.5", "--source", "1:2", "--csv", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "r,u,v" and len(lines) == 102
    capsys.readouterr()


@pytest.mark.parametrize(
    "argv",
    [
        ["cone-geom", "--b", "1.5", "--r", "0.1", "0.2"],
        ["dirac-modes", "--operation", "solve", "--source", "1:0", "--datum", "0.5:1"],
        ["dirac-modes", "--operation", "perturbed", "--lam", "-2", "--r0", "0.05"],
        ["weighted-check"],
        ["schwarzschild-horn", "--m", "2"],
        ["indicial", "--eigenvalues", "-2", "1.5", "--beta", "-1", "--scal-min", "2"],
        ["selftest", "--only", "5", "12"],
    ],
)
def test_subcommands_run(argv, capsys):
    code, out, _ = call(capsys, *argv)
    assert code == 0
    rep = json.loads(out)
    assert rep["subcommand"] == argv[0] and rep["formula"]


def test_resolve_defaults_and_dumps_handles_infinity():
    cfg = resolve_config("schwarzschild-horn", {"m": None}, None)
    assert cfg["m"] == 1.0 and cfg["sigma_window"] == [1e-6, 1e-4]
    assert json.loads(dumps({"x": float("inf")}))["x"] == "inf"
