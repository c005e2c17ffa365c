"""Command-line interface.

Exit status: 0 success, 1 I/O failure, 2 bad arguments or unknown figure,
3 numeric guard failure (truncation, convergence, degenerate input).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .deviations import deviations_report
from .errors import NumericGuardError, RangeError, UnknownFigureError
from .figures import (
    DEFAULTS,
    FIGURES,
    METRICS,
    SWEEP_VARIABLES,
    FigureJob,
    SweepSpec,
    params_from_record,
    run_figure,
    sweep_csv,
)
from .metrics import fidelity, photon_stats, snr_ratio, squeezing
from .protocol import conditional_state_exact, conditional_state_first_order, exact_weak_values, weak_values
from .states import PointerInput, coherent_state, fock, spac, spasv, squeezed_vacuum

STATE_KINDS = ("vacuum", "fock", "coherent", "squeezed", "spac", "spasv")
METRIC_NAMES = ("fidelity", "photon-stats", "squeezing", "snr", "weak-values")
EXTRA_KEYS = {"pointer", "beta", "eta", "n", "cutoff"}


class ArgumentError(ValueError):
    pass


def parse_value(text: str):
    """Scalar, list or complex from a ``--set`` value or config entry."""
    value = yaml.safe_load(text)
    if isinstance(value, str):
        for cast in (float, complex):
            try:
                return cast(value.replace(" ", ""))
            except ValueError:
                pass
    return value


def _coerce(value):
    return parse_value(value) if isinstance(value, str) else value


def load_record(config: str | None, sets: list[str]) -> dict:
    record = {}
    if config:
        with open(config) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ArgumentError(f"{config}: expected a flat key-value mapping")
        for key, value in data.items():
            if isinstance(value, dict):
                raise ArgumentError(f"{config}: nested value under {key!r}; keys must be flat")
            record[str(key)] = _coerce(value)
    for item in sets:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ArgumentError(f"--set expects key=value, got {item!r}")
        record[key.strip()] = parse_value(value)
    unknown = sorted(set(record) - set(DEFAULTS) - EXTRA_KEYS)
    if unknown:
        raise ArgumentError(f"unknown parameter(s): {', '.join(unknown)}")
    return record


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(payload) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2, default=_json_default))


def _describe(state, n_amps: int) -> dict:
    stats = photon_stats(state)
    amps = state.amplitudes[:n_amps]
    return {
        "cutoff": state.dims[0],
        "norm": state.norm,
        "mean_n": stats.mean_n,
        "g2": stats.g2 if np.isfinite(stats.g2) else None,
        "mandel_q": stats.mandel_q,
        "squeezing_x": squeezing(state, 0.0),
        "squeezing_p": squeezing(state, np.pi / 2),
        "amplitudes": [[float(a.real), float(a.imag)] for a in amps],
    }


def _cmd_state(args, record) -> int:
    kind = args.kind
    theta = float(record.get("theta", 0.0))
    beta = complex(record.get("beta", 0.0)) * np.exp(1j * theta)
    eta, phi = float(record.get("eta", 0.0)), float(record.get("phi", 0.0))
    if kind in ("coherent", "spac"):
        pointer = PointerInput.coherent(beta)
    elif kind in ("squeezed", "spasv"):
        pointer = PointerInput.squeezed(eta, phi)
    else:
        pointer = PointerInput.vacuum()
    n = int(record.get("cutoff") or pointer.auto_cutoff())
    builders = {
        "vacuum": lambda: fock(0, n),
        "fock": lambda: fock(int(record.get("n", 1)), max(n, int(record.get("n", 1)) + 2)),
        "coherent": lambda: coherent_state(beta, n),
        "squeezed": lambda: squeezed_vacuum(eta, phi, n),
        "spac": lambda: spac(beta, n),
        "spasv": lambda: spasv(eta, phi, n),
    }
    _emit({"kind": kind, **_describe(builders[kind](), args.amplitudes)})
    return 0


def _cmd_protocol(args, record) -> int:
    params = params_from_record(record)
    out = conditional_state_exact(params) if args.exact else conditional_state_first_order(params)
    n = out.state.dims[0]
    payload = {
        "model": "exact" if args.exact else "first_order",
        "pointer": params.pointer.kind,
        "p_zeroth": out.p_zeroth,
        "p_model": out.p_model,
        "coefficients": out.coefficients,
        "F1_input": fidelity(out.state, params.pointer.state(n)),
        "F2_photon_added": fidelity(out.state, params.pointer.photon_added(n)),
        "state": _describe(out.state, args.amplitudes),
    }
    _emit(payload)
    return 0


def _cmd_metrics(args, record) -> int:
    params = params_from_record(record)
    name = args.name
    if name == "weak-values":
        wv = weak_values(params.alpha, params.epsilon)
        payload = {"A_w": wv.A_w, "B_w": wv.B_w, "exact": exact_weak_values(params.alpha, params.epsilon, params.idler_cutoff)}
    elif name == "snr":
        if params.pointer.kind != "coherent":
            params = params.with_(pointer=PointerInput.coherent(complex(record.get("beta", 1.0))))
        payload = snr_ratio(params, exact=args.exact).__dict__
    else:
        out = conditional_state_exact(params) if args.exact else conditional_state_first_order(params)
        n = out.state.dims[0]
        if name == "fidelity":
            payload = {
                "F1": fidelity(out.state, params.pointer.state(n)),
                "F2": fidelity(out.state, params.pointer.photon_added(n)),
            }
        elif name == "photon-stats":
            payload = photon_stats(out.state).__dict__
        else:
            qphi = float(record.get("quad_phi", 0.0))
            payload = {
                "S_output": squeezing(out.state, qphi),
                "S_input": squeezing(params.pointer.state(n), qphi),
                "S_photon_added": squeezing(params.pointer.photon_added(n), qphi),
            }
    _emit({"metric": name, "pointer": params.pointer.kind, **payload})
    return 0


def _cmd_figure(args, record) -> int:
    if args.id not in FIGURES:
        raise UnknownFigureError(args.id)
    if args.jobs is not None:
        record["jobs"] = args.jobs
    paths = run_figure(FigureJob(args.id, record, args.out))
    for p in paths:
        print(p)
    return 0


def _parse_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise RangeError(f"--range expects lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise RangeError(f"--range expects lo:hi:n, got {text!r}") from exc
    return lo, hi, n


def _cmd_sweep(args, record) -> int:
    lo, hi, n = _parse_range(args.range)
    text = sweep_csv(SweepSpec(args.var, lo, hi, n, record), args.metric, jobs=args.jobs or 1)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_deviations(args, record) -> int:
    params = params_from_record(record) if record else None
    text = json.dumps(deviations_report(params), sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat YAML key-value file of parameters")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one parameter")

    parser = argparse.ArgumentParser(prog="wmstate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wmstate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", parents=[common], help="build a state and print amplitudes and metrics")
    p.add_argument("kind", choices=STATE_KINDS)
    p.add_argument("--amplitudes", type=int, default=10, help="number of amplitudes to print")
    p.set_defaults(func=_cmd_state)

    p = sub.add_parser("protocol", help="run the postselection protocol")
    psub = p.add_subparsers(dest="action", required=True)
    run = psub.add_parser("run", parents=[common])
    run.add_argument("--exact", action="store_true", help="use the full three-mode evolution")
    run.add_argument("--amplitudes", type=int, default=10)
    run.set_defaults(func=_cmd_protocol)

    p = sub.add_parser("metrics", parents=[common], help="evaluate one metric")
    p.add_argument("name", choices=METRIC_NAMES)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("figure", parents=[common], help="write the data series of one figure")
    p.add_argument("id", help=f"one of {', '.join(FIGURES)}")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--jobs", type=int, default=None, help="worker threads")
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("sweep", parents=[common], help="sweep one parameter and tabulate a metric")
    p.add_argument("--var", required=True, choices=SWEEP_VARIABLES)
    p.add_argument("--range", required=True, help="lo:hi:n")
    p.add_argument("--metric", required=True, choices=sorted(METRICS))
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("deviations", parents=[common], help="closed-form versus numeric report")
    p.add_argument("--out", help="JSON path (default stdout)")
    p.set_defaults(func=_cmd_deviations)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        record = load_record(args.config, args.set)
        return args.func(args, record)
    except NumericGuardError as exc:
        print(f"wmstate: numeric guard: {exc}", file=sys.stderr)
        return 3
    except UnknownFigureError as exc:
        print(f"wmstate: unknown figure {exc.args[0]!r}; choose from {', '.join(FIGURES)}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        print(f"wmstate: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"wmstate: {exc}", file=sys.stderr)
        return 1
