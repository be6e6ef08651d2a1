"""Parameter sweeps over V, gamma and L with deterministic parallel execution.

Each grid point is independent: build the operator, diagonalize, summarize,
and optionally propagate a wavepacket.  Points run either in-process
(``workers=1``) or in a spawned process pool; in both cases BLAS/LAPACK is
pinned to one thread so that the floating-point result of every point is
independent of the worker count.  Rows are always returned in grid order.

Memory: one point holds about six dense L x L complex matrices (operator,
eigenvectors, LAPACK workspace and residual product), so peak usage is
roughly 6 * 16 * L**2 bytes per worker (~94 MB at L = 987, ~640 MB at
L = 2584).
"""
from __future__ import annotations

import itertools
import math
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__, kernels
from .diagnostics import EPS_IM, LOC_EXPONENT, summarize
from .dynamics import evolve_stroboscopic, time_averaged_speed
from .evolution import build_bch_heff, build_floquet_operator
from .model import ModelParams
from .spectral import solve_spectrum

AXES = ("V", "gamma", "L")
KINDS = ("floquet", "heff_T2", "dimerized")
SUMMARY_COLUMNS = ("max_im_e", "rho", "agr_mean", "ipr_ave", "npr_ave",
                   "ipr_max", "ipr_min", "zeta", "phase")
DEFAULT_MAX_POINTS = 20000


@dataclass(frozen=True)
class ScanSpec:
    base: ModelParams
    axis1: str
    values1: tuple
    axis2: str | None = None
    values2: tuple = ()
    kind: str = "floquet"
    dynamics: bool = False
    n_periods: int = 1000
    eps_im: float = EPS_IM
    loc_exponent: float = LOC_EXPONENT
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        object.__setattr__(self, "values1", tuple(self.values1))
        object.__setattr__(self, "values2", tuple(self.values2))
        for ax, vals in ((self.axis1, self.values1), (self.axis2, self.values2)):
            if ax is None:
                continue
            if ax not in AXES:
                raise ValueError(f"unknown scan axis {ax!r}")
            _check_monotone(ax, vals)
        if self.axis2 is not None and self.axis2 == self.axis1:
            raise ValueError("the two scan axes must differ")
        if self.axis2 is None and self.values2:
            raise ValueError("values2 given without axis2")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.npoints > self.max_points:
            raise ValueError(f"grid has {self.npoints} points, cap is {self.max_points}")
        if self.dynamics and self.kind == "heff_T2":
            raise ValueError("wavepacket dynamics is defined for Floquet operators only")

    @property
    def keys(self) -> tuple:
        return (self.axis1,) if self.axis2 is None else (self.axis2, self.axis1)

    @property
    def npoints(self) -> int:
        return len(self.values1) * (len(self.values2) if self.axis2 else 1)

    def grid(self):
        """Grid points in row order; with two axes, axis2 is the slow index."""
        if self.axis2 is None:
            return [{self.axis1: v} for v in self.values1]
        return [{self.axis2: b, self.axis1: a}
                for b, a in itertools.product(self.values2, self.values1)]

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(), "axis1": self.axis1, "values1": list(self.values1),
            "axis2": self.axis2, "values2": list(self.values2), "kind": self.kind,
            "dynamics": self.dynamics, "n_periods": self.n_periods,
            "eps_im": self.eps_im, "loc_exponent": self.loc_exponent,
        }


def _check_monotone(ax, vals):
    if len(vals) == 0:
        raise ValueError(f"value list for axis {ax!r} is empty")
    arr = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite values on axis {ax!r}")
    d = np.diff(arr)
    if len(d) and not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError(f"values on axis {ax!r} must be strictly monotone")


@dataclass
class ScanResult:
    spec: ScanSpec
    rows: list
    provenance: dict
    slopes: dict = field(default_factory=dict)

    @property
    def columns(self) -> tuple:
        cols = self.spec.keys + SUMMARY_COLUMNS
        if self.spec.dynamics:
            cols += ("mean_speed",)
        return cols

    def column(self, name) -> np.ndarray:
        return np.array([r.get(name, math.nan) for r in self.rows])


def point_params(spec: ScanSpec, point: dict) -> ModelParams:
    changes = dict(point)
    if "L" in changes:
        changes["L"] = int(changes["L"])
    if spec.kind == "dimerized":
        changes["variant"] = "dimerized"
    return spec.base.replace(**changes)


def run_point(spec: ScanSpec, point: dict) -> dict:
    """Evaluate one grid point; failures are recorded in the row, not raised."""
    row = dict(point)
    try:
        params = point_params(spec, point)
        if spec.kind == "heff_T2":
            spectrum = solve_spectrum(build_bch_heff(params, "T2"), kind="hamiltonian")
            U = None
        else:
            U = build_floquet_operator(params)
            spectrum = solve_spectrum(U)
        summary = summarize(spectrum, spec.eps_im, spec.loc_exponent)
        for name in SUMMARY_COLUMNS:
            row[name] = getattr(summary, name)
        row["phase"] = summary.phase.value
        row["n_localized"] = summary.n_localized
        row["rho_sensitivity"] = [list(p) for p in summary.rho_sensitivity]
        row["degraded"] = spectrum.degraded
        if spec.dynamics:
            traj = evolve_stroboscopic(U, n_periods=spec.n_periods)
            row["mean_speed"] = traj.mean_speed
            row["time_averaged_speed"] = time_averaged_speed(traj)
            row["x_final"] = float(traj.x[-1])
        row["error"] = ""
    except Exception as exc:  # record-and-continue
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _init_worker():
    global _LIMITS
    _LIMITS = threadpool_limits(1)


def _run_indexed(args):
    spec, point = args
    return run_point(spec, point)


def execute(spec: ScanSpec, workers: int = 1) -> list:
    points = spec.grid()
    if workers <= 1 or len(points) <= 1:
        with threadpool_limits(1):
            return [run_point(spec, p) for p in points]
    ctx = mp.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx,
                             initializer=_init_worker) as pool:
        # map preserves submission order
        return list(pool.map(_run_indexed, [(spec, p) for p in points]))


def provenance(spec: ScanSpec, workers: int | None = None) -> dict:
    return {
        "tool": "nhfloquet",
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "scan": spec.to_dict(),
        "thresholds": {"eps_im": spec.eps_im, "loc_exponent": spec.loc_exponent,
                       "rho_sensitivity_factors": [1e-2, 1.0, 1e2]},
    }


def _run(spec, workers):
    return ScanResult(spec, execute(spec, workers), provenance(spec))


def scan_v(spec: ScanSpec, workers: int = 1) -> ScanResult:
    if spec.axis1 != "V":
        raise ValueError("scan_v needs axis1 = 'V'")
    return _run(spec, workers)


def loglog_slope(L, y) -> float:
    L = np.asarray(L, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(y) & (y > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(L[ok]), np.log(y[ok]), 1)[0])


def ipr_scaling(spec: ScanSpec, workers: int = 1) -> ScanResult:
    """IPR aggregates versus L plus log-log slopes (per value of axis2, if any)."""
    if spec.axis1 != "L":
        raise ValueError("ipr_scaling needs axis1 = 'L'")
    res = _run(spec, workers)
    groups = {}
    for r in res.rows:
        key = r.get(spec.axis2) if spec.axis2 else None
        groups.setdefault(key, []).append(r)
    for key, rows in groups.items():
        Ls = [r["L"] for r in rows]
        res.slopes[key] = {name: loglog_slope(Ls, [r.get(name, math.nan) for r in rows])
                           for name in ("ipr_max", "ipr_ave", "ipr_min")}
    return res


def phase_diagram(spec: ScanSpec, workers: int = 1) -> ScanResult:
    if {spec.axis1, spec.axis2} != {"V", "gamma"}:
        raise ValueError("phase_diagram needs a (gamma, V) grid")
    return _run(spec, workers)


def variant_scan(spec: ScanSpec, variant: str, workers: int = 1) -> ScanResult:
    """Same diagnostics for the truncated H_eff (``heff_T2``) or the dimerized chain."""
    kinds = {"heff_T2": "heff_T2", "heff": "heff_T2", "dimerized": "dimerized", "dimer": "dimerized"}
    if variant not in kinds:
        raise ValueError(f"unknown variant {variant!r}")
    kind = kinds[variant]
    if spec.kind != kind:
        spec = replace(spec, kind=kind)
    return _run(spec, workers)
