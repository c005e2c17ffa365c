"""Figure data series, parameter sweeps and deterministic CSV/JSON emission.

Every figure is a registered generator returning named tables. ``run_figure``
writes one CSV per table plus a JSON sidecar holding the full parameter record,
so any row can be recomputed from the sidecar alone.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .errors import RangeError, UnknownFigureError
from .metrics import fidelity, photon_stats, snr_ratio, squeezing
from .protocol import (
    ProtocolParams,
    conditional_state_exact,
    conditional_state_first_order,
    weak_values,
)
from .states import PointerInput, spasv, squeezed_vacuum
from .wigner import GridSpec, wigner_numeric

__all__ = [
    "DEFAULTS",
    "FIGURES",
    "FigureJob",
    "SweepSpec",
    "Table",
    "METRICS",
    "figure_params",
    "params_from_record",
    "grid_from_record",
    "run_figure",
    "sweep",
    "format_csv",
]

FLOAT_FMT = "%.8e"

DEFAULTS = {
    "g": 0.105,
    "alpha": 0.01,
    "epsilon": 0.1,
    "theta": 0.0,
    "phi": 0.0,
    "quad_phi": 0.0,
    "idler_cutoff": 6,
    "signal_cutoff": None,
    "beta_min": 0.0,
    "beta_max": 4.0,
    "beta_points": 81,
    "eta_min": 0.0,
    "eta_max": 2.0,
    "eta_points": 41,
    "epsilons": [0.05, 0.1, 0.2],
    "wigner_betas": [0.0, 1.0, 2.0],
    "wigner_etas": [0.0, 1.0, 2.0],
    "x_min": -4.0,
    "x_max": 4.0,
    "p_min": -4.0,
    "p_max": 4.0,
    "nx": 161,
    "np": 161,
    "exact": False,
    "jobs": 1,
}

# per-figure defaults layered over DEFAULTS and under user overrides
_FIGURE_DEFAULTS = {
    "fig6a": {"alpha": 0.01},
    "fig6b": {"alpha": 0.75},
    "fig8a": {"alpha": 0.01},
    "fig8b": {"alpha": 0.75},
}


@dataclass
class Table:
    name: str
    columns: list
    rows: np.ndarray


@dataclass
class FigureJob:
    id: str
    params: dict = field(default_factory=dict)
    output_dir: Path | str = "."


@dataclass
class SweepSpec:
    variable: str
    lo: float
    hi: float
    points: int
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise RangeError(f"unknown sweep variable {self.variable!r}; choose from {sorted(SWEEP_VARIABLES)}")
        if int(self.points) != self.points or self.points < 2:
            raise RangeError(f"points must be an integer >= 2, got {self.points}")
        if not self.lo < self.hi:
            raise RangeError(f"need lo < hi, got {self.lo} and {self.hi}")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.points))


# -- parameter records ---------------------------------------------------------------


def figure_params(fig_id: str, overrides: dict | None = None) -> dict:
    record = dict(DEFAULTS)
    record.update(_FIGURE_DEFAULTS.get(fig_id, {}))
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS and key not in ("pointer", "beta", "eta"):
            raise KeyError(f"unknown parameter {key!r}")
        record[key] = value
    return record


def params_from_record(record: dict, pointer: PointerInput | None = None) -> ProtocolParams:
    """ProtocolParams from a flat record; ``pointer`` overrides the record's pointer keys."""
    if pointer is None:
        kind = record.get("pointer")
        if kind is None:
            kind = "squeezed" if "eta" in record else "coherent" if "beta" in record else "vacuum"
        if kind == "coherent":
            pointer = PointerInput.coherent(_beta(record, record.get("beta", 0.0)))
        elif kind == "squeezed":
            pointer = PointerInput.squeezed(float(record.get("eta", 0.0)), float(record.get("phi", 0.0)))
        else:
            pointer = PointerInput.vacuum()
    return ProtocolParams(
        g=float(record.get("g", DEFAULTS["g"])),
        alpha=complex(record.get("alpha", DEFAULTS["alpha"])),
        epsilon=float(record.get("epsilon", DEFAULTS["epsilon"])),
        pointer=pointer,
        signal_cutoff=record.get("signal_cutoff"),
        idler_cutoff=int(record.get("idler_cutoff", DEFAULTS["idler_cutoff"])),
    )


def grid_from_record(record: dict) -> GridSpec:
    return GridSpec(
        (float(record["x_min"]), float(record["x_max"])),
        (float(record["p_min"]), float(record["p_max"])),
        int(record["nx"]),
        int(record["np"]),
    )


def _beta(record: dict, magnitude: float) -> complex:
    return complex(magnitude) * np.exp(1j * float(record.get("theta", 0.0)))


def _map(fn: Callable, items, jobs: int) -> list:
    # results come back in input order whatever the completion order
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _betas(r):
    return np.linspace(float(r["beta_min"]), float(r["beta_max"]), int(r["beta_points"]))


def _etas(r):
    return np.linspace(float(r["eta_min"]), float(r["eta_max"]), int(r["eta_points"]))


def _output(params: ProtocolParams, exact: bool):
    return conditional_state_exact(params) if exact else conditional_state_first_order(params)


# -- generators ----------------------------------------------------------------------


def _theta_rows(r: dict, row: Callable) -> np.ndarray:
    base = params_from_record(r, PointerInput.vacuum())

    def one(b):
        p = base.with_(pointer=PointerInput.coherent(_beta(r, b)))
        return [b, *row(p, _output(p, r["exact"]))]

    return np.array(_map(one, _betas(r), int(r["jobs"])), dtype=float)


def _fig2(r):
    def row(p, out):
        n = out.state.dims[0]
        return [fidelity(out.state, p.pointer.state(n)), fidelity(out.state, p.pointer.photon_added(n))]

    return [Table("fig2", ["beta", "F1", "F2"], _theta_rows(r, row))]


def _fig3a(r):
    return [Table("fig3a", ["beta", "g2"], _theta_rows(r, lambda p, out: [photon_stats(out.state).g2]))]


def _fig3b(r):
    return [Table("fig3b", ["beta", "Q"], _theta_rows(r, lambda p, out: [photon_stats(out.state).mandel_q]))]


def _wigner_table(name, state, grid: GridSpec) -> Table:
    w = wigner_numeric(state, grid)
    xx, pp = np.meshgrid(w.xs, w.ps, indexing="ij")
    return Table(name, ["x", "p", "W"], np.column_stack([xx.ravel(), pp.ravel(), w.values.ravel()]))


def _tag(v: float) -> str:
    return f"{v:g}"


def _fig4(r):
    grid = grid_from_record(r)
    base = params_from_record(r, PointerInput.vacuum())

    def one(b):
        p = base.with_(pointer=PointerInput.coherent(_beta(r, b)))
        return _wigner_table(f"fig4-wigner_beta{_tag(b)}", _output(p, r["exact"]).state, grid)

    return _map(one, [float(b) for b in r["wigner_betas"]], int(r["jobs"]))


def _fig5(r):
    betas = _betas(r)
    epsilons = [float(e) for e in r["epsilons"]]
    base = params_from_record(r, PointerInput.vacuum())

    def one(b):
        return [
            snr_ratio(base.with_(epsilon=e), _beta(r, b), exact=bool(r["exact"])).chi for e in epsilons
        ]

    chis = np.array(_map(one, betas, int(r["jobs"])), dtype=float)
    cols = ["beta"] + [f"chi_eps{_tag(e)}" for e in epsilons]
    return [Table("fig5", cols, np.column_stack([betas, chis]))]


def _omega_rows(r: dict, row: Callable) -> np.ndarray:
    base = params_from_record(r, PointerInput.vacuum())
    phi = float(r["phi"])

    def one(eta):
        p = base.with_(pointer=PointerInput.squeezed(eta, phi))
        return [eta, *row(p, _output(p, r["exact"]))]

    return np.array(_map(one, _etas(r), int(r["jobs"])), dtype=float)


def _fig6(name):
    def gen(r):
        def row(p, out):
            n = out.state.dims[0]
            return [fidelity(out.state, p.pointer.state(n)), fidelity(out.state, p.pointer.photon_added(n))]

        return [Table(name, ["eta", "F1", "F2"], _omega_rows(r, row))]

    return gen


def _fig8(name):
    def gen(r):
        qphi = float(r["quad_phi"])

        def row(p, out):
            n = out.state.dims[0]
            return [
                squeezing(out.state, qphi),
                squeezing(p.pointer.state(n), qphi),
                squeezing(p.pointer.photon_added(n), qphi),
            ]

        return [Table(name, ["eta", "S_omega", "S_sv", "S_spasv"], _omega_rows(r, row))]

    return gen


def _fig9(r):
    grid = grid_from_record(r)
    base = params_from_record(r, PointerInput.vacuum())
    phi = float(r["phi"])
    tasks = []
    for eta in (float(e) for e in r["wigner_etas"]):
        for panel in ("sv", "omega", "spasv"):
            tasks.append((eta, panel))

    def one(task):
        eta, panel = task
        p = base.with_(pointer=PointerInput.squeezed(eta, phi))
        n = p.resolved_signal_cutoff()
        if panel == "sv":
            state = squeezed_vacuum(eta, phi, n)
        elif panel == "spasv":
            state = spasv(eta, phi, n)
        else:
            state = _output(p, r["exact"]).state
        return _wigner_table(f"fig9_eta{_tag(eta)}_{panel}", state, grid)

    return _map(one, tasks, int(r["jobs"]))


FIGURES: dict[str, Callable] = {
    "fig2": _fig2,
    "fig3a": _fig3a,
    "fig3b": _fig3b,
    "fig4-wigner": _fig4,
    "fig5": _fig5,
    "fig6a": _fig6("fig6a"),
    "fig6b": _fig6("fig6b"),
    "fig8a": _fig8("fig8a"),
    "fig8b": _fig8("fig8b"),
    "fig9": _fig9,
}

_USES_GRID = {"fig4-wigner", "fig9"}


# -- emission ------------------------------------------------------------------------


def _jsonable(value):
    if isinstance(value, complex):
        return value.real if value.imag == 0 else [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _fmt(v: float) -> str:
    return FLOAT_FMT % v


def format_csv(table: Table, provenance: dict) -> str:
    """CSV text: ``#`` provenance lines, a header, then fixed-format rows."""
    lines = [f"# {key}: {provenance[key]}" for key in provenance]
    lines.append(",".join(table.columns))
    for row in np.atleast_2d(table.rows):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def run_figure(job: FigureJob) -> list[Path]:
    """Compute ``job.id`` and write its CSVs plus ``<id>.json``; returns the paths."""
    if job.id not in FIGURES:
        raise UnknownFigureError(f"unknown figure {job.id!r}; choose from {sorted(FIGURES)}")
    record = figure_params(job.id, job.params)
    tables = FIGURES[job.id](record)

    out = Path(job.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    # the worker count does not change any value, so it stays out of the record
    record = {k: _jsonable(v) for k, v in record.items() if k != "jobs"}
    params_json = json.dumps(record, sort_keys=True)
    written = []
    for table in tables:
        path = out / f"{table.name}.csv"
        text = format_csv(
            table, {"tool": f"wmstate {__version__}", "figure": job.id, "curve": table.name, "params": params_json}
        )
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        written.append(path)
    sidecar = {
        "figure": job.id,
        "tool": "wmstate",
        "version": __version__,
        "params": record,
        "grid": grid_from_record(record).as_dict() if job.id in _USES_GRID else None,
        "files": [p.name for p in written],
    }
    side = out / f"{job.id}.json"
    with open(side, "w", newline="\n") as fh:
        fh.write(json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    written.append(side)
    return written


# -- sweeps --------------------------------------------------------------------------


def _m_fidelity(which):
    def metric(p, out):
        n = out.state.dims[0]
        ref = p.pointer.state(n) if which == 1 else p.pointer.photon_added(n)
        return fidelity(out.state, ref)

    return metric


METRICS: dict[str, Callable] = {
    "F1": _m_fidelity(1),
    "F2": _m_fidelity(2),
    "mean_n": lambda p, out: photon_stats(out.state).mean_n,
    "g2": lambda p, out: photon_stats(out.state).g2,
    "mandel_q": lambda p, out: photon_stats(out.state).mandel_q,
    "squeezing": lambda p, out: squeezing(out.state, 0.0),
    "A_w_abs": lambda p, out: abs(weak_values(p.alpha, p.epsilon).A_w),
    "B_w_abs": lambda p, out: abs(weak_values(p.alpha, p.epsilon).B_w),
    "chi": lambda p, out: snr_ratio(p).chi,
}

SWEEP_VARIABLES = ("beta", "eta", "epsilon", "alpha", "phi", "g")


def _sweep_params(spec: SweepSpec, value: float) -> ProtocolParams:
    record = dict(spec.fixed)
    record[spec.variable] = value
    if spec.variable == "beta" and "pointer" not in record:
        record["pointer"] = "coherent"
    if spec.variable in ("eta", "phi") and "pointer" not in record:
        record["pointer"] = "squeezed"
    return params_from_record(record)


def sweep(spec: SweepSpec, metric: str, jobs: int = 1) -> Table:
    """Evaluate ``metric`` over the sweep; columns are variable, metric, p_zeroth, p_model."""
    if metric not in METRICS:
        raise RangeError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}")
    fn = METRICS[metric]
    exact = bool(spec.fixed.get("exact", False))

    def one(v):
        p = _sweep_params(spec, float(v))
        out = _output(p, exact)
        return [v, fn(p, out), out.p_zeroth, out.p_model]

    rows = np.array(_map(one, spec.values(), jobs), dtype=float)
    return Table(f"sweep_{spec.variable}_{metric}", [spec.variable, metric, "p_zeroth", "p_model"], rows)


def sweep_csv(spec: SweepSpec, metric: str, jobs: int = 1) -> str:
    table = sweep(spec, metric, jobs)
    fixed = json.dumps({k: _jsonable(v) for k, v in spec.fixed.items()}, sort_keys=True)
    return format_csv(
        table,
        {
            "tool": f"wmstate {__version__}",
            "sweep": f"{spec.variable} {_fmt(spec.lo)}:{_fmt(spec.hi)}:{int(spec.points)}",
            "fixed": fixed,
        },
    )

