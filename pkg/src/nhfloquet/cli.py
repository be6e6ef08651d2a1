"""Command-line entry point.

Subcommands: ``spectrum``, ``scan-v``, ``phase-diagram``, ``ipr-scaling``,
``dynamics`` and ``variant --kind {heff,dimer}``.

Settings are resolved in increasing priority: built-in defaults, ``--preset``,
``--config`` file (TOML, or a ``provenance.json`` written by an earlier run),
explicit flags.  Every run writes ``provenance.json`` holding the resolved
configuration, which can be passed back through ``--config`` to re-execute it.

Scan CSV columns: grid keys (slow axis first), then max_im_e, rho,
agr_mean, ipr_ave, npr_ave, ipr_max, ipr_min, zeta, phase, [mean_speed],
error.  Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import re
import sys
from pathlib import Path

from . import __version__, kernels
from .diagnostics import participation_ratios, summarize
from .dynamics import evolve_stroboscopic, time_averaged_speed
from .evolution import build_floquet_operator
from .io import write_csv, write_json, write_matrix
from .model import INV_GOLDEN, ModelParams
from .presets import PRESETS
from .scan import ScanSpec, ipr_scaling, phase_diagram, scan_v, variant_scan
from .spectral import solve_spectrum

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

COMMANDS = ("spectrum", "scan-v", "phase-diagram", "ipr-scaling", "dynamics", "variant")

DEFAULTS = {
    "model": {"J": math.pi / 6, "V": 0.0, "gamma": 0.8, "L": 987, "alpha": INV_GOLDEN,
              "T1": 1.0, "T2": 1.0, "hbar": 1.0},
    "scan": {},
    "run": {"eps_im": 1e-8, "loc_exponent": 0.5, "periods": 1000, "threads": 1,
            "format": ["csv"], "dynamics": False, "heatmap": False, "thin": 1,
            "frame": "lifted", "kind": None, "build_path": "auto"},
}

# which parameters each command treats as a list-valued axis
LIST_AXES = {
    "spectrum": (),
    "scan-v": ("V",),
    "phase-diagram": ("gamma", "V"),
    "ipr-scaling": ("L", "V"),
    "dynamics": ("V",),
    "variant": ("V",),
}


class UsageError(Exception):
    pass


_PI_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi(?:\s*/\s*(\d+\.?\d*))?$")


def parse_number(tok) -> float:
    """Parse ``1.5``, ``0.7pi``, ``pi/6``, ``2*pi``."""
    if isinstance(tok, (int, float)):
        return float(tok)
    s = str(tok).strip().lower()
    m = _PI_RE.match(s)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        div = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / div
    try:
        return float(s)
    except ValueError:
        raise UsageError(f"cannot parse number {tok!r}") from None


def parse_list(text) -> list:
    """Comma list of numbers; ``a:b:step`` expands to an inclusive range."""
    if isinstance(text, (list, tuple)):
        return [parse_number(t) for t in text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            pieces = part.split(":")
            if len(pieces) != 3:
                raise UsageError(f"range must be start:stop:step, got {part!r}")
            a, b, st = (parse_number(p) for p in pieces)
            if st <= 0 or b < a:
                raise UsageError(f"bad range {part!r}")
            n = int(math.floor((b - a) / st + 1e-9))
            out.extend(a + k * st for k in range(n + 1))
        else:
            out.append(parse_number(part))
    return out


def _merge(dst, src):
    for sec in ("model", "scan", "run"):
        for k, v in (src.get(sec) or {}).items():
            dst[sec][k] = v


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        if path.suffix == ".json":
            data = json.loads(path.read_text())
            data = data.get("config", data)
        else:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    return data


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--config", help="TOML file or provenance.json of a previous run")
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--format", action="append", help="csv, json or csv,json (repeatable)")
    g.add_argument("--eps-im", type=float)
    g.add_argument("--loc-exponent", type=float)
    g.add_argument("--threads", type=int, help="worker processes for scans")
    g.add_argument("--periods", type=int, help="driving periods for wavepacket runs")
    m = common.add_argument_group("model")
    for name in ("J", "V", "gamma", "L", "alpha", "T1", "T2", "hbar"):
        m.add_argument(f"--{name}", dest=name, metavar="X",
                       help="value; scan axes accept comma lists, a:b:step ranges and 'pi'")

    parser = argparse.ArgumentParser(prog="nhfloquet", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"nhfloquet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("spectrum", parents=[common], help="per-state quasienergies and IPRs")
    sp.add_argument("--build-path", choices=("auto", "circulant", "dense_expm"))
    sv = sub.add_parser("scan-v", parents=[common], help="diagnostics versus V")
    sv.add_argument("--dynamics", action=argparse.BooleanOptionalAction, default=None)
    sub.add_parser("phase-diagram", parents=[common], help="(gamma, V) grid")
    sub.add_parser("ipr-scaling", parents=[common], help="IPR aggregates versus L")
    dy = sub.add_parser("dynamics", parents=[common], help="wavepacket trajectories")
    dy.add_argument("--heatmap", action=argparse.BooleanOptionalAction, default=None)
    dy.add_argument("--thin", type=int, help="keep every k-th period in the heatmap")
    dy.add_argument("--frame", choices=("lifted", "fixed"))
    va = sub.add_parser("variant", parents=[common], help="truncated H_eff or dimerized chain")
    va.add_argument("--kind", choices=("heff", "dimer"))
    va.add_argument("--dynamics", action=argparse.BooleanOptionalAction, default=None)
    return parser


def resolve(args) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    cfg["command"] = args.command
    if args.preset:
        pre = PRESETS[args.preset]
        if pre["command"] != args.command:
            raise UsageError(f"preset {args.preset!r} belongs to '{pre['command']}', "
                             f"not '{args.command}'")
        _merge(cfg, pre)
        cfg["preset"] = args.preset
    if args.config:
        _merge(cfg, load_config_file(args.config))

    axes = LIST_AXES[args.command]
    for name in ("J", "V", "gamma", "L", "alpha", "T1", "T2", "hbar"):
        raw = getattr(args, name)
        if raw is None:
            continue
        vals = parse_list(raw)
        if name in axes:
            cfg["scan"][name] = vals
        else:
            if len(vals) != 1:
                raise UsageError(f"--{name} takes a single value for '{args.command}'")
            cfg["model"][name] = vals[0]

    run = cfg["run"]
    for flag, key in (("eps_im", "eps_im"), ("loc_exponent", "loc_exponent"),
                      ("threads", "threads"), ("periods", "periods")):
        if getattr(args, flag) is not None:
            run[key] = getattr(args, flag)
    for flag in ("dynamics", "heatmap", "thin", "frame", "kind", "build_path"):
        if getattr(args, flag, None) is not None:
            run[flag] = getattr(args, flag)
    if args.format:
        fmts = [f.strip() for a in args.format for f in a.split(",") if f.strip()]
        run["format"] = fmts
    if isinstance(run["format"], str):
        run["format"] = [run["format"]]
    bad = set(run["format"]) - {"csv", "json"}
    if bad or not run["format"]:
        raise UsageError(f"--format must be csv and/or json, got {run['format']}")
    if not run["eps_im"] > 0:
        raise UsageError("--eps-im must be positive")
    if run["threads"] < 1 or run["periods"] < 1 or run["thin"] < 1:
        raise UsageError("--threads, --periods and --thin must be >= 1")

    # scan lists supplied from file may hold strings like "0.7pi"
    for k, v in list(cfg["scan"].items()):
        cfg["scan"][k] = parse_list(v)
    for k in ("J", "V", "gamma", "alpha", "T1", "T2", "hbar"):
        if k in cfg["model"]:
            cfg["model"][k] = parse_number(cfg["model"][k])
    if "L" in cfg["model"]:
        cfg["model"]["L"] = _as_int(cfg["model"]["L"])
    if "L" in cfg["scan"]:
        cfg["scan"]["L"] = [_as_int(x) for x in cfg["scan"]["L"]]
    for k in list(cfg["scan"]):
        if k not in axes:
            # a list for a non-axis parameter: accept a single entry
            vals = cfg["scan"].pop(k)
            if len(vals) != 1:
                raise UsageError(f"'{args.command}' does not scan {k}")
            cfg["model"][k] = vals[0]
    if args.command == "variant" and run["kind"] not in ("heff", "dimer"):
        raise UsageError("variant needs --kind heff or --kind dimer")
    return cfg


def _as_int(x):
    xf = float(x)
    if xf != int(xf):
        raise UsageError(f"L must be an integer, got {x}")
    return int(xf)


def _params(cfg, **override) -> ModelParams:
    d = {**cfg["model"], **override}
    if cfg["command"] == "variant" and cfg["run"]["kind"] == "dimer":
        d["variant"] = "dimerized"
    try:
        return ModelParams(**d)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _require(cfg, name):
    vals = cfg["scan"].get(name)
    if not vals:
        raise UsageError(f"'{cfg['command']}' needs a non-empty --{name} list")
    return vals


def _provenance(cfg) -> dict:
    return {"tool": "nhfloquet", "version": __version__, "kernel_backend": kernels.BACKEND,
            "config": cfg}


def _spec(cfg, axis1, axis2=None, kind="floquet", dynamics=False, base_override=None):
    run = cfg["run"]
    values2 = tuple(_require(cfg, axis2)) if axis2 else ()
    base = _params(cfg, **(base_override or {}))
    try:
        return ScanSpec(base=base, axis1=axis1, values1=tuple(_require(cfg, axis1)),
                        axis2=axis2, values2=values2, kind=kind, dynamics=dynamics,
                        n_periods=run["periods"], eps_im=run["eps_im"],
                        loc_exponent=run["loc_exponent"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit_scan(cfg, out, name, result):
    header = list(result.columns) + ["error"]
    if "csv" in cfg["run"]["format"]:
        write_csv(out / f"{name}.csv", header, result.rows)
    if "json" in cfg["run"]["format"]:
        write_json(out / f"{name}.json", {"provenance": _provenance(cfg),
                                          "scan_provenance": result.provenance,
                                          "columns": header, "rows": result.rows,
                                          "slopes": {str(k): v for k, v in result.slopes.items()}})
    return sum(1 for r in result.rows if r.get("error"))


def cmd_spectrum(cfg, out):
    params = _params(cfg)
    op = build_floquet_operator(params, path=cfg["run"]["build_path"])
    spec = solve_spectrum(op)
    ipr, npr = participation_ratios(spec)
    summary = summarize(spec, cfg["run"]["eps_im"], cfg["run"]["loc_exponent"])
    header = ["index", "re_e", "im_e", "ipr", "npr", "residual"]
    rows = [(j, e.real, e.imag, ipr[j], npr[j], spec.residuals[j])
            for j, e in enumerate(spec.quasienergies)]
    if "csv" in cfg["run"]["format"]:
        write_csv(out / "spectrum.csv", header, rows)
    if "json" in cfg["run"]["format"]:
        write_json(out / "spectrum.json", {
            "provenance": _provenance(cfg), "build_path": op.build_path,
            "summary": summary.to_dict(), "degraded": spec.degraded,
            "columns": header, "rows": [list(r) for r in rows]})
    return 0


def cmd_scan_v(cfg, out):
    spec = _spec(cfg, "V", dynamics=bool(cfg["run"]["dynamics"]))
    return _emit_scan(cfg, out, "scan_v", scan_v(spec, cfg["run"]["threads"]))


def cmd_phase_diagram(cfg, out):
    spec = _spec(cfg, "V", axis2="gamma")
    return _emit_scan(cfg, out, "phase_diagram", phase_diagram(spec, cfg["run"]["threads"]))


def cmd_ipr_scaling(cfg, out):
    vlist = cfg["scan"].get("V") or []
    if len(vlist) > 1:
        spec = _spec(cfg, "L", axis2="V")
    else:
        override = {"V": vlist[0]} if vlist else {}
        # validate the base at the first L, the per-point L replaces it
        override["L"] = _require(cfg, "L")[0]
        spec = _spec(cfg, "L", base_override=override)
    res = ipr_scaling(spec, cfg["run"]["threads"])
    nerr = _emit_scan(cfg, out, "ipr_scaling", res)
    if "csv" in cfg["run"]["format"]:
        key = "V" if spec.axis2 else "V_fixed"
        rows = [{key: (k if k is not None else spec.base.V), **v} for k, v in res.slopes.items()]
        write_csv(out / "ipr_slopes.csv", [key, "ipr_max", "ipr_ave", "ipr_min"], rows)
    return nerr


def cmd_variant(cfg, out):
    kind = "heff_T2" if cfg["run"]["kind"] == "heff" else "dimerized"
    dyn = bool(cfg["run"]["dynamics"]) and kind == "dimerized"
    spec = _spec(cfg, "V", kind=kind, dynamics=dyn)
    name = "variant_heff" if kind == "heff_T2" else "variant_dimer"
    return _emit_scan(cfg, out, name, variant_scan(spec, kind, cfg["run"]["threads"]))


def cmd_dynamics(cfg, out):
    run = cfg["run"]
    vlist = cfg["scan"].get("V") or [cfg["model"]["V"]]
    summary_rows = []
    for i, V in enumerate(vlist):
        params = _params(cfg, V=V)
        op = build_floquet_operator(params)
        thin = run["thin"] if run["heatmap"] else None
        traj = evolve_stroboscopic(op, n_periods=run["periods"], frame=run["frame"],
                                   snapshot_every=thin)
        rows = list(zip(traj.times, traj.x, traj.x_sd, traj.v))
        if "csv" in run["format"]:
            write_csv(out / f"trajectory_{i:03d}.csv", ["t", "x", "x_sd", "v"], rows)
        if "json" in run["format"]:
            write_json(out / f"trajectory_{i:03d}.json", {
                "provenance": _provenance(cfg), "V": V, "frame": traj.frame,
                "offset": traj.offset, "t": traj.times, "x": traj.x, "x_sd": traj.x_sd,
                "v": traj.v})
        if traj.snapshots is not None:
            L = params.L
            write_matrix(out / f"heatmap_{i:03d}.txt", traj.snapshots,
                         header=f"rows: periods {run['thin']}..{run['periods']} step {run['thin']}; "
                                f"columns: n' = {1 - traj.offset}..{L - traj.offset}; values |psi_n|")
        summary_rows.append({"V": V, "x_final": traj.x[-1], "x_sd_final": traj.x_sd[-1],
                             "mean_speed": traj.mean_speed,
                             "time_averaged_speed": time_averaged_speed(traj)})
    if "csv" in run["format"]:
        write_csv(out / "dynamics.csv",
                  ["V", "x_final", "x_sd_final", "mean_speed", "time_averaged_speed"],
                  summary_rows)
    return 0


HANDLERS = {"spectrum": cmd_spectrum, "scan-v": cmd_scan_v, "phase-diagram": cmd_phase_diagram,
            "ipr-scaling": cmd_ipr_scaling, "dynamics": cmd_dynamics, "variant": cmd_variant}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on malformed flags
    try:
        cfg = resolve(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "provenance.json", _provenance(cfg))
        nerr = HANDLERS[args.command](cfg, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nhfloquet: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"nhfloquet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if nerr:
        print(f"nhfloquet: {nerr} grid point(s) failed; see the error column", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
