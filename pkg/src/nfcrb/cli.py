"""Command-line front end.

Subcommands: point, sweep, table1, simo, validate. Exit codes: 0 success,
1 validation failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import jsonschema
import numpy as np

from .core import (ConfigError, DomainError, FieldModel, PhysicalConfig, SurfaceGeometry,
                   TerminalPosition, regime_classify)
from .cpl import CplScenario, crb_cpl
from .engine import CrbResult, Numerics, crb_point
from .quadrature import QuadratureError, QuadratureSpec
from .simo import build_layout, crb_simo

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

CSV_COLUMNS = ["param_value", "crb_x_m2", "crb_y_m2", "crb_z_m2",
               "rcrb_x_cm", "rcrb_y_cm", "rcrb_z_cm", "model",
               "identifiable_x", "identifiable_y", "identifiable_z"]

SWEEP_PARAMS = ("d_r", "z_t", "lambda", "snr_db", "n_s", "x_t", "y_t")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

_SWEEP_SCHEMA = {
    "type": "object",
    "properties": {
        "param": {"enum": list(SWEEP_PARAMS)},
        "from": _NUM, "to": _NUM,
        "points": {"type": "integer", "minimum": 2},
        "scale": {"enum": ["linear", "log"]},
        "values": {"type": "array", "items": _NUM, "minItems": 1},
    },
    "required": ["param"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "physical": {
            "type": "object",
            "properties": {"wavelength_m": _POS, "snr": _POS, "snr_db": _NUM, "eta_ohm": _POS},
            "required": ["wavelength_m"],
            "oneOf": [{"required": ["snr"]}, {"required": ["snr_db"]}],
            "additionalProperties": False,
        },
        "surface": {
            "type": "object",
            "properties": {"d_r_m": _POS},
            "required": ["d_r_m"],
            "additionalProperties": False,
        },
        "terminal": {
            "oneOf": [
                {"type": "object",
                 "properties": {"x_m": _NUM, "y_m": _NUM, "z_m": _POS},
                 "required": ["x_m", "y_m", "z_m"], "additionalProperties": False},
                {"type": "object",
                 "properties": {"cpl": {"const": True}, "z_m": _POS},
                 "required": ["cpl", "z_m"], "additionalProperties": False},
            ],
        },
        "field_model": {"enum": ["vef", "sef", "osef", "all"]},
        "numerics": {
            "type": "object",
            "properties": {"order": {"type": "integer", "minimum": 2},
                           "panels": {"type": "integer", "minimum": 1},
                           "tol": _POS,
                           "riemann_alpha": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
        "simo": {
            "type": "object",
            "properties": {"enabled": {"type": "boolean"},
                           "n_s": {"type": "integer", "minimum": 1},
                           "r_r_m": _POS},
            "required": ["enabled"],
            "additionalProperties": False,
        },
        "sweep": {"oneOf": [_SWEEP_SCHEMA,
                            {"type": "array", "items": _SWEEP_SCHEMA, "minItems": 1, "maxItems": 2}]},
    },
    "required": ["physical", "surface", "terminal"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Scenario:
    cfg: PhysicalConfig
    geom: SurfaceGeometry
    terminal: TerminalPosition
    numerics: Numerics
    simo: dict | None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate_config(raw)
    return raw


def validate_config(raw):
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc


def build_scenario(raw) -> Scenario:
    ph = raw["physical"]
    kw = {"eta": ph["eta_ohm"]} if "eta_ohm" in ph else {}
    if "snr" in ph:
        cfg = PhysicalConfig(ph["wavelength_m"], ph["snr"], **kw)
    else:
        cfg = PhysicalConfig.from_snr_db(ph["wavelength_m"], ph["snr_db"], **kw)
    t = raw["terminal"]
    term = TerminalPosition.on_cpl(t["z_m"]) if t.get("cpl") else TerminalPosition(t["x_m"], t["y_m"], t["z_m"])
    num = raw.get("numerics", {})
    quad = QuadratureSpec(order=num.get("order", 32), panels=num.get("panels", 4), tol=num.get("tol", 1e-10))
    numerics = Numerics(quad, num.get("riemann_alpha", 201 ** 2))
    simo = raw.get("simo")
    if simo is not None and not simo["enabled"]:
        simo = None
    if simo is not None and not term.is_cpl:
        raise ConfigError("SIMO scenarios require a terminal on the central perpendicular line")
    return Scenario(cfg, SurfaceGeometry(raw["surface"]["d_r_m"]), term, numerics, simo)


def models_of(raw, override=None):
    name = override or raw.get("field_model", "all")
    if name == "all":
        return list(FieldModel)
    return [FieldModel.parse(name)]


def evaluate(sc: Scenario, model: FieldModel) -> CrbResult:
    if sc.simo is not None:
        layout = build_layout(sc.simo.get("n_s", 2), sc.simo.get("r_r_m", 30.0),
                              sc.geom.diagonal, sc.terminal.z)
        return crb_simo(layout, sc.cfg, model, sc.numerics)
    if sc.terminal.is_cpl:
        cs = CplScenario.from_geometry(sc.geom.diagonal, sc.terminal.z, sc.cfg, model, sc.numerics.alpha)
        return crb_cpl(cs)
    return crb_point(sc.terminal, sc.geom, sc.cfg, model, sc.numerics)


def fmt(v):
    """Nine significant digits; non-identifiable entries print as '-'."""
    return format(float(v), ".9g") if math.isfinite(v) else "-"


def _json_num(v):
    return float(format(float(v), ".9g")) if math.isfinite(v) else None


def result_record(res: CrbResult, model: FieldModel):
    rc = res.rcrb_cm
    axes = "xyz"
    return {
        "model": model.value,
        "crb_m2": {a: _json_num(v) for a, v in zip(axes, res.crb)},
        "rcrb_cm": {a: _json_num(v) for a, v in zip(axes, rc)},
        "identifiable": {a: bool(v) for a, v in zip(axes, res.identifiable)},
        "rank_deficient": res.rank_deficient,
        "path": res.path,
    }


def point_report(raw, model_override=None):
    sc = build_scenario(raw)
    models = models_of(raw, model_override)
    return {
        "terminal_m": [sc.terminal.x, sc.terminal.y, sc.terminal.z],
        "d_r_m": sc.geom.diagonal,
        "wavelength_m": sc.cfg.wavelength,
        "snr": sc.cfg.snr,
        "regime": regime_classify(sc.terminal.r_to, sc.geom, sc.cfg).value,
        "simo": sc.simo,
        "results": [result_record(evaluate(sc, m), m) for m in models],
    }


# Sweeps -------------------------------------------------------------------------

def sweep_values(spec):
    if "values" in spec:
        return [float(v) for v in spec["values"]]
    for key in ("from", "to", "points"):
        if key not in spec:
            raise ConfigError(f"sweep needs '{key}' or an explicit 'values' list")
    lo, hi, n = spec["from"], spec["to"], spec["points"]
    if not lo < hi:
        raise ConfigError("sweep 'from' must be below 'to'")
    if spec.get("scale", "linear") == "log":
        if lo <= 0:
            raise ConfigError("log sweeps need positive bounds")
        return [float(v) for v in np.geomspace(lo, hi, n)]
    return [float(v) for v in np.linspace(lo, hi, n)]


def apply_param(raw, name, value):
    out = copy.deepcopy(raw)
    if name == "d_r":
        out["surface"]["d_r_m"] = value
    elif name == "z_t":
        out["terminal"]["z_m"] = value
    elif name == "lambda":
        out["physical"]["wavelength_m"] = value
    elif name == "snr_db":
        out["physical"].pop("snr", None)
        out["physical"]["snr_db"] = value
    elif name == "n_s":
        if value != int(value):
            raise ConfigError(f"n_s sweep values must be integers, got {value}")
        out.setdefault("simo", {"enabled": True})
        out["simo"]["enabled"] = True
        out["simo"]["n_s"] = int(value)
    elif name in ("x_t", "y_t"):
        t = out["terminal"]
        if t.get("cpl"):
            out["terminal"] = t = {"x_m": 0.0, "y_m": 0.0, "z_m": t["z_m"]}
        t["x_m" if name == "x_t" else "y_m"] = value
    else:
        raise ConfigError(f"unknown sweep parameter {name!r}")
    return out


def sweep_points(raw, sweep):
    specs = sweep if isinstance(sweep, list) else [sweep]
    grids = [(s["param"], sweep_values(s)) for s in specs]
    if len(grids) == 1:
        name, vals = grids[0]
        return [((v,), apply_param(raw, name, v)) for v in vals]
    (n1, v1), (n2, v2) = grids
    return [((a, b), apply_param(apply_param(raw, n1, a), n2, b)) for a in v1 for b in v2]


def _sweep_row(item, models):
    key, cfg = item
    sc = build_scenario(cfg)
    rows = []
    for m in models:
        res = evaluate(sc, m)
        rc = res.rcrb_cm
        rows.append([*(fmt(k) for k in key), *(fmt(v) for v in res.crb), *(fmt(v) for v in rc),
                     m.value, *("1" if f else "0" for f in res.identifiable)])
    return rows


def run_sweep(raw, sweep, models, threads=1):
    points = sweep_points(raw, sweep)
    for _, cfg in points:
        validate_config(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(pool.map(lambda it: _sweep_row(it, models), points))
        else:
            chunks = [_sweep_row(it, models) for it in points]
    ndim = len(points[0][0]) if points else 1
    header = CSV_COLUMNS[:1] + [f"param_value_{i + 2}" for i in range(ndim - 1)] + CSV_COLUMNS[1:]
    return header, [row for chunk in chunks for row in chunk]


def rows_to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _typed(col, cell):
    if col.startswith("identifiable_"):
        return cell == "1"
    if cell == "-":
        return None
    try:
        return float(cell)
    except ValueError:
        return cell


def rows_to_json(header, rows):
    recs = [{c: _typed(c, v) for c, v in zip(header, r)} for r in rows]
    return json.dumps(recs, indent=2) + "\n"


# CPL comparison table ------------------------------------------------------------------------

TABLE1_DIAGONALS = (0.5, 1.0, 2.0, 3.0)
TABLE1_Z = 6.0
TABLE1_WAVELENGTH = 0.01
TABLE1_SNR = 10.0
AVER_Z = tuple(np.linspace(1.0, 20.0, 1000))
AVER_DIAGONAL = 3.0
TABLE1_NOTE = "calibration: SNR is linear 10, i.e. SNR^-1 = 0.1"


def table1(alpha=201 ** 2, aver_z=None):
    """RCRBs (cm) keyed by (model, axis): four diagonals then the A_ver mean."""
    aver_z = AVER_Z if aver_z is None else aver_z
    cfg = PhysicalConfig(TABLE1_WAVELENGTH, TABLE1_SNR)
    out = {}
    for model in FieldModel:
        cols = [crb_cpl(CplScenario.from_geometry(d, TABLE1_Z, cfg, model, alpha)).rcrb_cm
                for d in TABLE1_DIAGONALS]
        aver = np.mean([crb_cpl(CplScenario.from_geometry(AVER_DIAGONAL, z, cfg, model, alpha)).rcrb_cm
                        for z in aver_z], axis=0)
        for i, axis in enumerate("xyz"):
            out[(model.value, axis)] = [float(c[i]) for c in cols] + [float(aver[i])]
    return out


def table1_rows(tab):
    header = ["model", "axis", "D1_0.5m", "D2_1m", "D3_2m", "D4_3m", "A_ver"]
    rows = [[m, a, *(fmt(v) for v in vals)] for (m, a), vals in tab.items()]
    return header, rows


def table1_text(tab):
    lines = [f"RCRB [cm], z_t = {TABLE1_Z:g} m, lambda = {TABLE1_WAVELENGTH:g} m; {TABLE1_NOTE}",
             f"{'':10s}{'D=0.5':>10s}{'D=1':>10s}{'D=2':>10s}{'D=3':>10s}{'A_ver':>10s}"]
    for (m, a), vals in tab.items():
        cells = "".join(f"{(format(v, '.3g') if math.isfinite(v) else '-'):>10s}" for v in vals)
        lines.append(f"{m.upper() + ' ' + a:10s}{cells}")
    return "\n".join(lines) + "\n"


# Entry point ----------------------------------------------------------------------

def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--model", choices=["vef", "sef", "osef", "all"])
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=["csv", "json"])

    p = argparse.ArgumentParser(prog="nfcrb", description="Near-field positioning CRBs")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("point", parents=[common], help="CRBs for one scenario (JSON)")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep (CSV)")
    sw.add_argument("--param", choices=SWEEP_PARAMS)
    sw.add_argument("--from", dest="start", type=float)
    sw.add_argument("--to", dest="stop", type=float)
    sw.add_argument("--points", type=int)
    sw.add_argument("--scale", choices=["linear", "log"], default="linear")
    t1 = sub.add_parser("table1", parents=[common], help="reproduce the CPL comparison table")
    t1.add_argument("--alpha", type=int, default=201 ** 2, help="Riemann cells for OSEF")
    sub.add_parser("simo", parents=[common], help="distributed-receiver CRBs (JSON)")
    sub.add_parser("validate", parents=[common], help="run the oracle checks")
    return p


def _need_config(args):
    if not args.config:
        raise ConfigError(f"{args.command} requires --config")
    return load_config(args.config)


def _cmd_point(args):
    return _cmd_point_raw(_need_config(args), args)


def _cmd_simo(args):
    raw = _need_config(args)
    simo = raw.get("simo") or {}
    if not simo.get("enabled", False):
        raw = copy.deepcopy(raw)
        raw["simo"] = {"enabled": True, "n_s": simo.get("n_s", 2), "r_r_m": simo.get("r_r_m", 30.0)}
    return _cmd_point_raw(raw, args)


def _cmd_point_raw(raw, args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = point_report(raw, args.model)
    _emit(json.dumps(rep, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_sweep(args):
    raw = _need_config(args)
    if args.param:
        if args.start is None or args.stop is None or args.points is None:
            raise ConfigError("--param needs --from, --to and --points")
        sweep = {"param": args.param, "from": args.start, "to": args.stop,
                 "points": args.points, "scale": args.scale}
    elif "sweep" in raw:
        sweep = raw["sweep"]
    else:
        raise ConfigError("no sweep given (config 'sweep' block or --param)")
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    base = {k: v for k, v in raw.items() if k != "sweep"}
    header, rows = run_sweep(base, sweep, models_of(raw, args.model), args.threads)
    text = rows_to_json(header, rows) if args.format == "json" else rows_to_csv(header, rows)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_table1(args):
    tab = table1(alpha=args.alpha)
    header, rows = table1_rows(tab)
    machine = rows_to_json(header, rows) if args.format == "json" else rows_to_csv(header, rows)
    if args.out:
        _emit(machine, args.out)
        sys.stdout.write(table1_text(tab))
    else:
        sys.stdout.write(table1_text(tab) + "\n" + machine)
    return EXIT_OK


def _cmd_validate(args):
    from .validation import run_all

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = run_all()
    _emit(json.dumps(rep, indent=2, default=float) + "\n", args.out)
    return EXIT_OK if rep["passed"] else EXIT_VALIDATION


_COMMANDS = {"point": _cmd_point, "sweep": _cmd_sweep, "table1": _cmd_table1,
             "simo": _cmd_simo, "validate": _cmd_validate}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
