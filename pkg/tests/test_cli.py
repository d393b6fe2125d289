import csv
import io
import json

import numpy as np
import pytest

from nfcrb import cli
from nfcrb.quadrature import QuadratureError

BASE = {
    "physical": {"wavelength_m": 0.01, "snr": 10},
    "surface": {"d_r_m": 3},
    "terminal": {"cpl": True, "z_m": 6},
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _point(tmp_path, capsys, cfg, *extra):
    assert cli.main(["point", "--config", _write(tmp_path, cfg), *extra]) == 0
    return json.loads(capsys.readouterr().out)


def test_point_table_value(tmp_path, capsys):
    rep = _point(tmp_path, capsys, BASE, "--model", "vef")
    assert rep["results"][0]["rcrb_cm"]["x"] == pytest.approx(1.02, rel=5e-3)
    assert rep["regime"] == "reactive"


def test_point_osef_reports_null(tmp_path, capsys):
    rep = _point(tmp_path, capsys, BASE, "--model", "osef")
    r = rep["results"][0]
    assert r["crb_m2"]["x"] is None and r["identifiable"]["x"] is False
    assert r["crb_m2"]["z"] > 0


def test_cpl_flag_matches_explicit_origin(tmp_path, capsys):
    a = _point(tmp_path, capsys, BASE)
    explicit = dict(BASE, terminal={"x_m": 0, "y_m": 0, "z_m": 6})
    b = _point(tmp_path, capsys, explicit)
    assert a == b


def test_snr_db_linearity(tmp_path, capsys):
    def crbs(db):
        cfg = dict(BASE, physical={"wavelength_m": 0.01, "snr_db": db})
        rep = _point(tmp_path, capsys, cfg, "--model", "sef")
        return np.array(list(rep["results"][0]["crb_m2"].values()))
    np.testing.assert_allclose(crbs(10) / crbs(20), 10.0, rtol=1e-8)


def test_sweep_csv_columns(tmp_path, capsys):
    cfg = dict(BASE, sweep={"param": "d_r", "values": [0.5, 3]})
    out = tmp_path / "out.csv"
    assert cli.main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert list(rows[0]) == cli.CSV_COLUMNS
    assert len(rows) == 6
    osef = [r for r in rows if r["model"] == "osef"]
    assert all(r["crb_x_m2"] == "-" and r["identifiable_x"] == "0" for r in osef)
    vef = [r for r in rows if r["model"] == "vef" and r["param_value"] == "3"][0]
    assert float(vef["rcrb_x_cm"]) == pytest.approx(1.02, rel=5e-3)


def test_sweep_flags_log_scale(tmp_path, capsys):
    args = ["sweep", "--config", _write(tmp_path, BASE), "--param", "d_r", "--from", "1",
            "--to", "1000", "--points", "7", "--scale", "log", "--model", "vef"]
    assert cli.main(args) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    np.testing.assert_allclose([float(r["param_value"]) for r in rows], np.geomspace(1, 1000, 7))
    z = np.array([float(r["crb_z_m2"]) for r in rows])
    assert np.all(np.diff(z) <= 0)
    # plateau near SNR^-1 lambda^2 / (6 pi^3)
    assert z[-1] == pytest.approx(0.1 * 1e-4 / (6 * np.pi ** 3), rel=0.02)


def test_sweep_two_dimensional_json(tmp_path, capsys):
    cfg = dict(BASE, sweep=[{"param": "x_t", "values": [0, 2]}, {"param": "y_t", "values": [1, 3]}])
    args = ["sweep", "--config", _write(tmp_path, cfg), "--model", "vef", "--format", "json"]
    assert cli.main(args) == 0
    recs = json.loads(capsys.readouterr().out)
    assert [(r["param_value"], r["param_value_2"]) for r in recs] == [(0, 1), (0, 3), (2, 1), (2, 3)]
    assert all(r["identifiable_x"] is True for r in recs)


def test_sweep_simo_n_s(tmp_path, capsys):
    cfg = dict(BASE, sweep={"param": "n_s", "values": [1, 2]})
    assert cli.main(["sweep", "--config", _write(tmp_path, cfg), "--model", "vef"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert float(rows[1]["crb_x_m2"]) < float(rows[0]["crb_x_m2"])


def test_sweep_deterministic_across_threads(tmp_path):
    cfg = dict(BASE, terminal={"x_m": 1, "y_m": 0.5, "z_m": 4},
               sweep={"param": "z_t", "from": 1, "to": 10, "points": 12})
    path = _write(tmp_path, cfg)
    outs = []
    for n in (1, 8):
        out = tmp_path / f"t{n}.csv"
        assert cli.main(["sweep", "--config", path, "--threads", str(n), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_simo_command(tmp_path, capsys):
    cfg = dict(BASE, simo={"enabled": True, "n_s": 2, "r_r_m": 30})
    assert cli.main(["simo", "--config", _write(tmp_path, cfg), "--model", "vef"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["results"][0]["path"] == "simo/quadrant"


@pytest.mark.parametrize("cfg", [
    {"physical": {"wavelength_m": 0.01}},
    dict(BASE, physical={"wavelength_m": -1, "snr": 1}),
    dict(BASE, terminal={"x_m": 0, "y_m": 0, "z_m": 0}),
    dict(BASE, field_model="tef"),
    dict(BASE, numerics={"riemann_alpha": 4}),
    dict(BASE, terminal={"x_m": 1, "y_m": 0, "z_m": 6}, simo={"enabled": True}),
])
def test_config_errors_exit_2(tmp_path, capsys, cfg):
    assert cli.main(["point", "--config", _write(tmp_path, cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_unreadable_config_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["point", "--config", str(bad)]) == 2
    assert cli.main(["point", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["point"]) == 2
    assert cli.main(["sweep", "--config", _write(tmp_path, BASE)]) == 2


def test_numerical_failure_exit_3(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise QuadratureError("non-finite integrand", (0.0, 0.0))
    monkeypatch.setattr(cli, "evaluate", boom)
    assert cli.main(["point", "--config", _write(tmp_path, BASE)]) == 3


def test_validate_exit_codes(capsys, monkeypatch):
    import nfcrb.validation as val

    monkeypatch.setattr(val, "run_all", lambda: {"passed": False, "groups": {}})
    assert cli.main(["validate"]) == 1
    monkeypatch.setattr(val, "run_all", lambda: {"passed": True, "groups": {}})
    assert cli.main(["validate"]) == 0


def test_table1_small_grid(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "AVER_Z", (6.0,))
    out = tmp_path / "t1.csv"
    assert cli.main(["table1", "--alpha", "9", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "SNR is linear 10" in text
    rows = {(r["model"], r["axis"]): r for r in csv.DictReader(io.StringIO(out.read_text()))}
    assert rows[("osef", "x")]["D1_0.5m"] == "-"
    assert float(rows[("vef", "x")]["D1_0.5m"]) == pytest.approx(35.5, rel=5e-3)
    # one-point A_ver at z = 6 equals the D = 3 column
    assert rows[("sef", "z")]["A_ver"] == rows[("sef", "z")]["D4_3m"]
