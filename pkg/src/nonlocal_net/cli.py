"""Command-line surface: thresholds, figure datasets, routing, validation.

Every command emits CSV (default) or JSON with floats fixed at 10 significant
digits, so identical invocations are byte-identical.  Exit codes: 0 success,
2 usage error, 3 capacity exceeded, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import lattice, thresholds
from .lattice import RoutingError, SquareAddress
from .oracle import CapacityError, OracleConfig, default_config, run_validation
from .thresholds import ChainSpec, SearchExhaustedError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_VALIDATION = 4


def fmt(value) -> str:
    """Fixed 10-significant-digit rendering for floats; str otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    return str(value)


def _json_ready(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return float(fmt(float(value)))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    return value


def _emit_rows(rows: list[dict], args) -> None:
    if args.format == "json":
        text = json.dumps(_json_ready(rows), indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow([fmt(v) for v in row.values()])
        text = buf.getvalue()
    _write_text(text, args)


def _emit_object(obj: dict, args) -> None:
    # Nested payloads (route plans) are JSON regardless of --format.
    _write_text(json.dumps(_json_ready(obj), indent=2) + "\n", args)


def _write_text(text: str, args) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _span(raw: str) -> list[int]:
    """Parse '3', '2:10', or '2,5,9' into an integer list."""
    values: list[int] = []
    for part in raw.split(","):
        if ":" in part:
            lo, hi = part.split(":")
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    return values


def _address(raw: str) -> SquareAddress:
    parts = [int(x) for x in raw.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("site addresses are 'i,j,q'")
    return SquareAddress(*parts)


def _star_threshold(ineq: str, n: int, m: int | None) -> thresholds.ThresholdResult:
    if ineq == "chsh":
        return thresholds.pcr_star_chsh(n)
    m = 0 if m is None else m
    if ineq == "mbk":
        if m == 0:
            return thresholds.pcr_star_mbk_noncollab(n)
        return thresholds.pcr_star_mbk(n, m)
    return thresholds.pcr_star_fb(n, m)


def _chain_threshold(ineq: str, z: int, a: int, m: int | None) -> thresholds.ThresholdResult:
    if ineq == "chsh":
        return thresholds.pcr_chain_chsh(z, a)
    spec = ChainSpec.default(z, a) if m is None else ChainSpec(z, a, m)
    if ineq == "mbk":
        return thresholds.pcr_chain_mbk(spec)
    return thresholds.pcr_chain_fb(spec)


def cmd_threshold(args) -> int:
    rows = []
    if args.network == "star":
        for n in _span(args.n):
            res = _star_threshold(args.ineq, n, args.m)
            rows.append(
                {
                    "network": "star",
                    "inequality": res.inequality,
                    "n": res.params["n"],
                    "m": res.params["m"],
                    "p_cr": res.p_cr,
                    "superadditive": res.superadditive,
                }
            )
    else:
        for z in _span(args.z):
            for a in _span(args.a):
                res = _chain_threshold(args.ineq, z, a, args.m)
                rows.append(
                    {
                        "network": "chain",
                        "inequality": res.inequality,
                        "z": res.params["z"],
                        "a": res.params["a"],
                        "m": res.params["m"],
                        "p_cr": res.p_cr,
                        "superadditive": res.superadditive,
                    }
                )
    _emit_rows(rows, args)
    return EXIT_OK


def figure_rows(figure_id: str, m: int = 0, z: int = 5, a: int = 4, n_max: int = 12) -> tuple[list[dict], str]:
    """Datasets behind the three report figures; returns (rows, sweep key)."""
    rows: list[dict] = []
    if figure_id == "fig2":
        start = max(2, m + 2)
        for n in range(start, n_max + 1):
            rows.append(
                {
                    "n": n,
                    "pcr_mbk": _star_threshold("mbk", n, m).p_cr,
                    "pcr_fb": _star_threshold("fb", n, m).p_cr,
                }
            )
        return rows, "n"
    if figure_id == "fig4":
        for a_val in range(3, 13):
            rows.append(
                {
                    "a": a_val,
                    "pcr_chsh": thresholds.pcr_chain_chsh(z, a_val).p_cr,
                    "pcr_mbk": thresholds.pcr_chain_mbk(ChainSpec.default(z, a_val)).p_cr,
                    "pcr_fb": thresholds.pcr_chain_fb(ChainSpec.default(z, a_val)).p_cr,
                }
            )
        return rows, "a"
    if figure_id == "fig5":
        for z_val in range(1, 13):
            rows.append(
                {
                    "z": z_val,
                    "pcr_chsh": thresholds.pcr_chain_chsh(z_val, a).p_cr,
                    "pcr_mbk": thresholds.pcr_chain_mbk(ChainSpec.default(z_val, a)).p_cr,
                    "pcr_fb": thresholds.pcr_chain_fb(ChainSpec.default(z_val, a)).p_cr,
                }
            )
        return rows, "z"
    raise ValueError(f"unknown figure id {figure_id!r}")


_FIGURE_TITLES = {
    "fig2": "star network: critical noise vs copies",
    "fig4": "chain (z fixed): critical noise vs coordination number",
    "fig5": "chain (a fixed): critical noise vs node count",
}


def cmd_figure(args) -> int:
    rows, x_key = figure_rows(args.figure_id, m=args.m, z=args.z, a=args.a, n_max=args.n_max)
    _emit_rows(rows, args)
    if args.plot:
        if not args.output:
            print("--plot needs --output to place the image next to the dataset", file=sys.stderr)
            return EXIT_USAGE
        from . import plots

        png = Path(args.output).with_suffix(".png")
        plots.render_curves(rows, x_key, png, _FIGURE_TITLES[args.figure_id])
    return EXIT_OK


def cmd_route(args) -> int:
    plan = lattice.route_square(
        args.src, args.dst, n_terminals=args.targets, column_first=args.column_first
    )
    spec = plan.equivalent
    result_rows = [
        {
            "inequality": "fb",
            "p_cr": thresholds.pcr_chain_fb(spec).p_cr,
            "superadditive": thresholds.pcr_chain_fb(spec).superadditive,
        },
        {
            "inequality": "mbk",
            "p_cr": thresholds.pcr_chain_mbk(spec).p_cr,
            "superadditive": thresholds.pcr_chain_mbk(spec).superadditive,
        },
    ]
    if len(plan.terminals) == 2:
        chsh = thresholds.pcr_chain_chsh(spec.z, spec.a)
        result_rows.append(
            {"inequality": "chsh", "p_cr": chsh.p_cr, "superadditive": chsh.superadditive}
        )
    payload = {
        "from": [args.src.i, args.src.j, args.src.q],
        "to": [args.dst.i, args.dst.j, args.dst.q],
        "nearest_nodes": [list(lattice.nearest_node(args.src)), list(lattice.nearest_node(args.dst))],
        "plan": plan.to_dict(),
        "thresholds": result_rows,
    }
    _emit_object(payload, args)
    if args.plot:
        if not args.output:
            print("--plot needs --output to place the image next to the dataset", file=sys.stderr)
            return EXIT_USAGE
        from . import plots

        png = Path(args.output).with_suffix(".png")
        plots.render_route(plan, args.src.node, args.dst.node, png)
    return EXIT_OK


def cmd_chain(args) -> int:
    terminals = [int(t) for t in args.terminals.split(",")] if args.terminals else None
    plan = lattice.chain_plan(args.z, args.a, terminals)
    spec = plan.equivalent
    payload = {
        "plan": plan.to_dict(),
        "thresholds": [
            {
                "inequality": "fb",
                "p_cr": thresholds.pcr_chain_fb(spec).p_cr,
                "superadditive": thresholds.pcr_chain_fb(spec).superadditive,
            },
            {
                "inequality": "mbk",
                "p_cr": thresholds.pcr_chain_mbk(spec).p_cr,
                "superadditive": thresholds.pcr_chain_mbk(spec).superadditive,
            },
            {
                "inequality": "chsh",
                "p_cr": thresholds.pcr_chain_chsh(spec.z, spec.a).p_cr,
                "superadditive": thresholds.pcr_chain_chsh(spec.z, spec.a).superadditive,
            },
        ],
    }
    _emit_object(payload, args)
    return EXIT_OK


def cmd_superadditivity(args) -> int:
    rows = []
    if args.mode == "min-a":
        for z in _span(args.z):
            a_min = thresholds.min_coordination_superadditive(z)
            rows.append(
                {
                    "z": z,
                    "a_min": a_min,
                    "p_cr": thresholds.pcr_chain_fb(ChainSpec(z, a_min, 0)).p_cr,
                }
            )
    else:
        z_min = thresholds.min_nodes_superadditive(args.a, args.m)
        spec = ChainSpec(z_min, args.a, args.m)
        rows.append(
            {
                "a": args.a,
                "m": args.m,
                "z_min": z_min,
                "residual_parties": spec.residual_parties,
                "p_cr": thresholds.pcr_chain_fb(spec).p_cr,
            }
        )
    _emit_rows(rows, args)
    return EXIT_OK


def cmd_validate(args) -> int:
    config = OracleConfig(max_qubits=args.max_qubits) if args.max_qubits else default_config()
    checks = run_validation(scope=args.scope, config=config, corrupt=args.inject_fault)
    rows = [
        {"check": c.name, "max_deviation": c.max_deviation, "passed": c.passed}
        for c in checks
    ]
    _emit_rows(rows, args)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocal-net",
        description="Critical-noise thresholds and measurement plans for "
        "Bell-nonlocality spreading in noisy quantum networks.",
    )
    io_opts = argparse.ArgumentParser(add_help=False)
    io_opts.add_argument("--format", choices=("csv", "json"), default="csv")
    io_opts.add_argument("--output", help="write to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    thr = sub.add_parser(
        "threshold", parents=[io_opts], help="critical noise for a network family"
    )
    thr.add_argument("network", choices=("star", "chain"))
    thr.add_argument("--ineq", choices=("chsh", "mbk", "fb"), required=True)
    thr.add_argument("--n", help="star party count, span syntax 'a', 'a:b', 'a,b,c'")
    thr.add_argument("--z", help="chain node count span")
    thr.add_argument("--a", help="chain coordination span")
    thr.add_argument("--m", type=int, help="local-measurement count (default: canonical)")
    thr.set_defaults(func=cmd_threshold)

    fig = sub.add_parser("figure", parents=[io_opts], help="report dataset (CSV/JSON, optional PNG)")
    fig.add_argument("figure_id", choices=("fig2", "fig4", "fig5"))
    fig.add_argument("--m", type=int, default=0, help="fig2: local measurements")
    fig.add_argument("--z", type=int, default=5, help="fig4: fixed node count")
    fig.add_argument("--a", type=int, default=4, help="fig5: fixed coordination")
    fig.add_argument("--n-max", type=int, default=12, help="fig2: sweep upper end")
    fig.add_argument("--plot", action="store_true", help="render a PNG next to --output")
    fig.set_defaults(func=cmd_figure)

    rt = sub.add_parser("route", parents=[io_opts], help="L-shaped square-lattice route between two sites")
    rt.add_argument("--from", dest="src", type=_address, required=True, metavar="i,j,q")
    rt.add_argument("--to", dest="dst", type=_address, required=True, metavar="i,j,q")
    rt.add_argument("--targets", type=int, default=None, help="residual party count (default 4)")
    rt.add_argument("--column-first", action="store_true", help="bend the other way")
    rt.add_argument("--plot", action="store_true", help="render a PNG next to --output")
    rt.set_defaults(func=cmd_route)

    ch = sub.add_parser("chain", parents=[io_opts], help="measurement plan and thresholds for a 1D chain")
    ch.add_argument("--z", type=int, required=True)
    ch.add_argument("--a", type=int, required=True)
    ch.add_argument("--terminals", help="comma list of unmeasured site indices")
    ch.set_defaults(func=cmd_chain)

    sup = sub.add_parser("superadditivity", help="minimal-resource searches")
    supsub = sup.add_subparsers(dest="mode", required=True)
    mina = supsub.add_parser("min-a", parents=[io_opts], help="smallest superadditive coordination number")
    mina.add_argument("--z", required=True, help="node count span")
    mina.set_defaults(func=cmd_superadditivity)
    minz = supsub.add_parser("min-z", parents=[io_opts], help="smallest superadditive node count")
    minz.add_argument("--a", type=int, required=True)
    minz.add_argument("--m", type=int, required=True)
    minz.set_defaults(func=cmd_superadditivity)

    val = sub.add_parser("validate", parents=[io_opts], help="X-form pipeline vs dense recomputation")
    val.add_argument("--scope", choices=("star", "chain", "all"), default="all")
    val.add_argument("--max-qubits", type=int, help="dense capacity override")
    val.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    val.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "threshold":
        if args.network == "star" and not args.n:
            parser.error("threshold star needs --n")
        if args.network == "chain" and not (args.z and args.a):
            parser.error("threshold chain needs --z and --a")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (RoutingError, SearchExhaustedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
