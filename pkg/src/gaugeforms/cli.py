"""Command line interface.

    gaugeforms analyze  (--builtin NAME | --config FILE --symbol NAME) [...]
    gaugeforms compare  (--builtin A B | --config FILE A B) --group G [...]
    gaugeforms transform --config FILE --symbol NAME --gauge NAME [...]
    gaugeforms lift     (--builtin A B | --config FILE A B) [...]

Exit codes: 0 success / equivalent; 1 parse or usage error; 2 invalid
symbol or input; 3 not equivalent.  Reports are JSON documents carrying a
schema_version field; the schema lives in docs/report_schema.json.

GAUGEFORMS_THREADS caps the numeric backends' thread pools (set before
any numeric module is imported by this process).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

SCHEMA_VERSION = "1"

_TOL_FLAGS = (
    "metric_equal", "conformal_spread", "electric", "potential_match",
    "period", "closed_form", "residual_principal", "residual_full",
)


def _setup_threads() -> None:
    cap = os.environ.get("GAUGEFORMS_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="gaugeforms", description=__doc__.split("\n")[0])
    sub = top.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--output", help="write the JSON report here instead of stdout")
        p.add_argument("--grid", type=int, help="override the grid resolution")

    def add_tols(p):
        for name in _TOL_FLAGS:
            p.add_argument(f"--tol-{name.replace('_', '-')}", type=float, dest=f"tol_{name}",
                           help=f"override the {name} tolerance")

    pa = sub.add_parser("analyze", help="validate a symbol and report its invariants")
    pa.add_argument("--config", help="config document path")
    pa.add_argument("--symbol", help="symbol name inside the config")
    pa.add_argument("--builtin", help="built-in symbol name")
    pa.add_argument("--allow-invalid", action="store_true",
                    help="emit the report even when validation fails")
    add_io(pa)

    pc = sub.add_parser("compare", help="decide gauge equivalence of two symbols")
    pc.add_argument("names", nargs=2, help="two symbol names (config or built-in)")
    pc.add_argument("--config", help="config document path (else names are built-ins)")
    pc.add_argument("--group", required=True, choices=["gl", "sl", "u", "su"])
    pc.add_argument("--mode", default="full", choices=["principal", "full"])
    pc.add_argument("--lattice", default=None, choices=["strict", "half"],
                    help="period lattice for the potential class (default: half for gl/u)")
    pc.add_argument("--samples", type=int, help="monodromy samples per loop")
    add_io(pc)
    add_tols(pc)

    pt = sub.add_parser("transform", help="apply a gauge block and emit the new symbol")
    pt.add_argument("--config", required=True)
    pt.add_argument("--symbol", required=True)
    pt.add_argument("--gauge", required=True)
    pt.add_argument("--name", default=None, help="name of the emitted symbol block")
    add_io(pt)

    pl = sub.add_parser("lift", help="frame transition and monodromy only")
    pl.add_argument("names", nargs=2)
    pl.add_argument("--config", help="config document path (else names are built-ins)")
    pl.add_argument("--samples", type=int)
    add_io(pl)
    return top


def _emit(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_pair(args):
    """Resolve two symbols from a config document or the built-in catalog."""
    from .catalog import builtin_dim, builtin_symbol
    from .chart import make_chart
    from .config import parse_config

    if args.config:
        with open(args.config) as fh:
            doc = parse_config(fh.read())
        chart = doc.chart(args.grid)
        return chart, [doc.symbol(n, chart) for n in args.names]
    dims = {builtin_dim(n) for n in args.names}
    if len(dims) != 1:
        raise ValueError("built-in symbols have mismatched dimensions")
    dim = dims.pop()
    chart = make_chart(dim, args.grid or (32 if dim == 3 else 16))
    return chart, [builtin_symbol(n, chart) for n in args.names]


def _manifold_doc(chart) -> dict:
    return {
        "dim": chart.dim,
        "resolution": chart.resolution,
        "period": 2 * 3.141592653589793,
        "q_ref": list(chart.q_ref) if chart.q_ref else None,
    }


def _analyze_doc(symbol, name: str) -> tuple[dict, bool]:
    import numpy as np

    from .chart import PERIOD
    from .geometry import charges, metric_data, potentials
    from .framing import frame_from_symbol
    from .symbol import validate

    rep = validate(symbol)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "analyze",
        "symbol": name,
        "manifold": _manifold_doc(symbol.chart),
        "validation": rep.to_dict(),
    }
    if not rep.ok:
        return doc, False

    md = metric_data(symbol)
    origin = np.zeros((symbol.dim, 1))
    g_origin = md.g_up.reshape(symbol.chart.grid_shape + (symbol.dim, symbol.dim))[
        (0,) * symbol.dim]
    doc["metric"] = {
        "signature": md.signature,
        "rho_range": [float(md.rho.min()), float(md.rho.max())],
        "g_up_origin": np.round(g_origin, 12).tolist(),
    }
    frame = frame_from_symbol(symbol, md)
    dets = frame.det()
    doc["frame"] = {"det_range": [float(dets.min()), float(dets.max())]}
    ch = charges(symbol, md)
    doc["charges"] = {"c_top": ch.c_top, "c_tem": ch.c_tem}
    pot = potentials(symbol, md)
    A0 = pot.A.reshape((symbol.dim,) + symbol.chart.grid_shape)[(slice(None),) + (0,) * symbol.dim]
    doc["potentials"] = {
        "A_origin": np.round(A0, 12).tolist(),
        "A_periods": np.round(pot.A.mean(axis=1) * PERIOD, 12).tolist(),
        "A4_origin": (None if pot.A4 is None
                      else float(np.round(pot.A4.reshape(symbol.chart.grid_shape)[
                          (0,) * symbol.dim], 12))),
        "residual": pot.residual,
    }
    return doc, True


def _cmd_analyze(args) -> int:
    from .catalog import builtin_dim, builtin_symbol
    from .chart import make_chart
    from .config import parse_config

    if bool(args.builtin) == bool(args.config):
        print("analyze needs exactly one of --builtin or --config", file=sys.stderr)
        return 1
    if args.builtin:
        dim = builtin_dim(args.builtin)
        chart = make_chart(dim, args.grid or (32 if dim == 3 else 16))
        symbol, name = builtin_symbol(args.builtin, chart), args.builtin
    else:
        if not args.symbol:
            print("--config needs --symbol NAME", file=sys.stderr)
            return 1
        with open(args.config) as fh:
            doc = parse_config(fh.read())
        chart = doc.chart(args.grid)
        symbol, name = doc.symbol(args.symbol, chart), args.symbol
    report, ok = _analyze_doc(symbol, name)
    _emit(report, args.output)
    if not ok and not args.allow_invalid:
        return 2
    return 0


def _tolerances(args):
    from .equivalence import Tolerances
    tol = Tolerances()
    for name in _TOL_FLAGS:
        val = getattr(args, f"tol_{name}", None)
        if val is not None:
            setattr(tol, name, val)
    return tol


def _cmd_compare(args) -> int:
    from .equivalence import decide_equivalence

    chart, (sa, sb) = _load_pair(args)
    lattice = {"strict": "strict", "half": "half_period", None: None}[args.lattice]
    report = decide_equivalence(sa, sb, args.group, mode=args.mode,
                                lattice_mode=lattice, n_monodromy=args.samples,
                                tol=_tolerances(args))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "compare",
        "symbols": list(args.names),
        "manifold": _manifold_doc(chart),
    }
    doc.update(report.to_dict())
    _emit(doc, args.output)
    return 0 if report.verdict else 3


def _cmd_transform(args) -> int:
    from .config import emit_symbol_config, parse_config
    from .equivalence import apply_gauge_symbolic

    with open(args.config) as fh:
        doc = parse_config(fh.read())
    chart = doc.chart(args.grid)
    symbol = doc.symbol(args.symbol, chart)
    gauge = doc.gauge(args.gauge, chart)
    gauge.verify()
    out = apply_gauge_symbolic(symbol, gauge)
    name = args.name or f"{args.symbol}_{args.gauge}"
    text = emit_symbol_config(chart, name,
                              [f.texts() for f in out.E], out.F.texts())
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0


def _cmd_lift(args) -> int:
    from .framing import frame_from_symbol, monodromy_signs, transition
    from .geometry import metric_data

    chart, (sa, sb) = _load_pair(args)
    md_a, md_b = metric_data(sa), metric_data(sb)
    tr = transition(frame_from_symbol(sa, md_a), frame_from_symbol(sb, md_b))
    signs = monodromy_signs(sa, sb, args.samples)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "lift",
        "symbols": list(args.names),
        "manifold": _manifold_doc(chart),
        "monodromy": list(signs),
        "lambda_range": [float(tr.lam.min()), float(tr.lam.max())],
        "group_deviation": tr.group_dev,
    }
    _emit(doc, args.output)
    return 0


def main(argv=None) -> int:
    _setup_threads()
    args = _build_parser().parse_args(argv)
    from .errors import ConfigError, GaugeFormsError, InvalidSymbol, ParseError

    handlers = {
        "analyze": _cmd_analyze,
        "compare": _cmd_compare,
        "transform": _cmd_transform,
        "lift": _cmd_lift,
    }
    try:
        return handlers[args.command](args)
    except (ParseError, ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except InvalidSymbol as err:
        print(f"invalid symbol: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except GaugeFormsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
