"""Command-line interface: a thin client over the service handlers.

Each subcommand parses flags into the same pydantic request the HTTP
endpoint accepts, dispatches it (in-process by default, or to a running
service via --server URL), and renders the response as JSON or CSV.
``--seed`` fully determines all stochastic output; identical invocations
produce byte-identical reports.

Exit codes: 0 success, 2 invalid arguments, 3 analytically invalid regime
(gamma <= 1, bounds meaningless).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import List, Optional

from . import schema
from .service import handlers, models

PLACEMENT_ALIASES = {
    "uniform": "uniform_node",
    "reservoir": "reservoir_only",
    "fecundity": "fecundity_weighted",
    "uniform_node": "uniform_node",
    "reservoir_only": "reservoir_only",
    "fecundity_weighted": "fecundity_weighted",
}
FAMILY_ALIASES = {
    "cycle": "directed_cycle",
    "directed_cycle": "directed_cycle",
    "complete": "complete",
    "star": "star",
    "superstar": "superstar",
}

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID_REGIME = 3


def parse_grid(text: str, cast=float) -> List:
    """Grid syntax: comma list ("1,2,5") or start:stop:step ("2:10:2",
    stop inclusive when it lands on the grid)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        values = []
        x = start
        while x <= stop + 1e-12:
            values.append(cast(round(x, 12)))
            x += step
        return values
    return [cast(item) for item in text.split(",")]


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", default="superstar", choices=sorted(FAMILY_ALIASES))
    p.add_argument("--n", type=int, help="size for complete/cycle/star")
    p.add_argument("--B", type=int, help="superstar branch count")
    p.add_argument("--L", type=int, help="superstar reservoir size per branch")
    p.add_argument("--H", type=int, help="superstar stem length")


def _graph_spec(args) -> models.GraphSpec:
    family = FAMILY_ALIASES[args.family]
    if family == "superstar":
        if args.B is None or args.L is None or args.H is None:
            raise ValueError("superstar graphs need --B, --L and --H")
        return models.GraphSpec(family=family, b=args.B, l=args.L, h=args.H)
    if args.n is None:
        raise ValueError(f"{family} graphs need --n")
    return models.GraphSpec(family=family, n=args.n)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evograph",
        description="Birth-death dynamics on superstars: bounds, oracles, simulation.",
    )
    parser.add_argument("--server", help="dispatch to a running service at this URL")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--out", help="write the report to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trainlen", help="expected train length with bounds and oracle check")
    p.add_argument("--r", required=True, help="fitness grid (comma or start:stop:step)")
    p.add_argument("--H", required=True, help="stem length grid")
    p.add_argument("--no-dp-check", action="store_true")

    p = sub.add_parser("bounds", help="finite + asymptotic fixation bounds with error ledger")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--H", type=int, required=True)
    p.add_argument("--delta", type=int)

    p = sub.add_parser("exact", help="exact absorbing-chain fixation probabilities")
    _add_graph_flags(p)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--rule", default="Bd", choices=["Bd", "bD", "dB", "Db"])
    p.add_argument("--cap", type=int, default=16)

    p = sub.add_parser("simulate", help="Monte Carlo fixation estimate")
    _add_graph_flags(p)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--rule", default="Bd", choices=["Bd", "bD", "dB", "Db"])
    p.add_argument("--placement", default="uniform", choices=sorted(PLACEMENT_ALIASES))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--engine", default="auto", choices=["auto", "raw", "condensed", "reference"])

    p = sub.add_parser("one-to-two", help="probability one reservoir mutant becomes two")
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--H", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int)

    p = sub.add_parser("sweep", help="grid sweep over one operation")
    p.add_argument("--op", required=True, choices=["bounds", "trainlen", "simulate", "one-to-two"])
    p.add_argument("--r", default="2", help="fitness grid")
    p.add_argument("--B", help="branch grid")
    p.add_argument("--L", help="reservoir grid")
    p.add_argument("--H", help="stem grid")
    p.add_argument("--n", help="family size grid")
    p.add_argument("--family", choices=sorted(FAMILY_ALIASES))
    p.add_argument("--rule", default="Bd", help="comma list of update rules")
    p.add_argument("--placement", default="uniform", help="comma list of placements")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--overwrite", action="store_true",
                   help="ignore existing rows in --out instead of resuming")

    p = sub.add_parser("graph", help="export a graph as JSON (exact fraction weights)")
    _add_graph_flags(p)

    p = sub.add_parser("serve", help="run the HTTP service (requires uvicorn)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


class Dispatcher:
    """Routes requests in-process or to a remote service over HTTP."""

    def __init__(self, server: Optional[str] = None, client=None):
        self.server = server
        self._client = client

    def call(self, endpoint: str, request, handler):
        if self.server is None and self._client is None:
            return handler(request).model_dump()
        client = self._client
        if client is None:
            import httpx

            client = httpx.Client(base_url=self.server, timeout=None)
        resp = client.post(endpoint, json=request.model_dump())
        if resp.status_code >= 400:
            raise ValueError(f"server error {resp.status_code}: {resp.text}")
        return resp.json()


def _emit(doc, fmt: str, out: Optional[str], rows: Optional[list] = None) -> None:
    """Render a report (or row list) to stdout or --out, deterministically."""
    if fmt == "json":
        text = json.dumps(doc, indent=2, allow_nan=True, default=str) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(schema.CSV_COLUMNS)
        for row in rows if rows is not None else [doc]:
            writer.writerow(schema.csv_row(row))
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _regime_exit(reports: list) -> int:
    for rep in reports:
        if rep.get("valid_regime") is False:
            return EXIT_INVALID_REGIME
    return EXIT_OK


def _run_sweep(args, dispatcher: Dispatcher) -> int:
    req = models.SweepRequest(
        op=args.op,
        r=parse_grid(args.r, float),
        b=parse_grid(args.B, int) if args.B else None,
        l=parse_grid(args.L, int) if args.L else None,
        h=parse_grid(args.H, int) if args.H else None,
        n=parse_grid(args.n, int) if args.n else None,
        family=FAMILY_ALIASES[args.family] if args.family else None,
        rule=[r.strip() for r in args.rule.split(",")],
        placement=[PLACEMENT_ALIASES[p.strip()] for p in args.placement.split(",")],
        trials=args.trials,
        seed=args.seed,
        max_steps=args.max_steps,
        delta=args.delta,
    )
    total = handlers.sweep_job_count(req)
    sys.stderr.write(f"sweep: {total} jobs\n")

    if dispatcher.server is not None or dispatcher._client is not None:
        doc = dispatcher.call("/sweep", req, handlers.handle_sweep)
        rows = [row["report"] | {"grid_index": row["grid_index"]} for row in doc["rows"]]
        _emit(doc if args.format == "json" else None, args.format, args.out, rows=rows)
        return _regime_exit(rows)

    # In-process: flush per job so long sweeps are resumable.
    done = set()
    out_path = args.out
    if out_path and not args.overwrite:
        done = _completed_indices(out_path, args.format)
        if done:
            sys.stderr.write(f"sweep: resuming, {len(done)} rows already present\n")
    rows = []
    sink = open(out_path, "a") if out_path else None
    try:
        if sink is not None and args.format == "csv" and not done:
            writer = csv.writer(sink, lineterminator="\n")
            writer.writerow(["grid_index"] + schema.CSV_COLUMNS)
        for i, point in handlers.sweep_grid(req):
            if i in done:
                continue
            report = handlers.run_sweep_job(req, point)
            report_row = {"grid_index": i, **report}
            rows.append(report_row)
            if sink is not None:
                if args.format == "json":
                    sink.write(json.dumps(report_row, default=str) + "\n")
                else:
                    writer = csv.writer(sink, lineterminator="\n")
                    writer.writerow([i] + schema.csv_row(report))
                sink.flush()
        if sink is None:
            _emit(rows, args.format, None, rows=rows)
    finally:
        if sink is not None:
            sink.close()
    return _regime_exit(rows)


def _completed_indices(path: str, fmt: str) -> set:
    try:
        with open(path) as fh:
            if fmt == "json":
                return {json.loads(line)["grid_index"] for line in fh if line.strip()}
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[0] != "grid_index":
                return set()
            return {int(row[0]) for row in reader if row}
    except FileNotFoundError:
        return set()


def main(argv: Optional[List[str]] = None, client=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    dispatcher = Dispatcher(server=args.server, client=client)
    try:
        if args.command == "trainlen":
            req = models.TrainLenRequest(
                r=parse_grid(args.r, float),
                h=parse_grid(args.H, int),
                dp_check=not args.no_dp_check,
            )
            doc = dispatcher.call("/trainlen", req, handlers.handle_trainlen)
            rows = doc["rows"]
            _emit(rows, args.format, args.out, rows=rows)
            return EXIT_OK
        if args.command == "bounds":
            req = models.BoundsRequest(
                r=args.r, b=args.B, l=args.L, h=args.H, delta=args.delta
            )
            doc = dispatcher.call("/bounds", req, handlers.handle_bounds)
            _emit(doc, args.format, args.out)
            return _regime_exit([doc])
        if args.command == "exact":
            req = models.ExactRequest(
                graph=_graph_spec(args), r=args.r, rule=args.rule, cap=args.cap
            )
            doc = dispatcher.call("/exact", req, handlers.handle_exact)
            _emit(doc, args.format, args.out)
            return EXIT_OK
        if args.command == "simulate":
            req = models.SimulateRequest(
                graph=_graph_spec(args),
                r=args.r,
                rule=args.rule,
                placement=PLACEMENT_ALIASES[args.placement],
                trials=args.trials,
                seed=args.seed,
                max_steps=args.max_steps,
                engine=args.engine,
            )
            doc = dispatcher.call("/simulate", req, handlers.handle_simulate)
            _emit(doc, args.format, args.out)
            return EXIT_OK
        if args.command == "one-to-two":
            req = models.OneToTwoRequest(
                b=args.B,
                l=args.L,
                h=args.H,
                r=args.r,
                trials=args.trials,
                seed=args.seed,
                max_steps=args.max_steps,
            )
            doc = dispatcher.call("/one-to-two", req, handlers.handle_one_to_two)
            _emit(doc, args.format, args.out)
            return EXIT_OK
        if args.command == "sweep":
            return _run_sweep(args, dispatcher)
        if args.command == "graph":
            spec = _graph_spec(args)
            doc = dispatcher.call("/graph", spec, handlers.handle_graph_export)
            _emit(doc, args.format, args.out)
            return EXIT_OK
        if args.command == "serve":
            import uvicorn

            from .service.app import app

            uvicorn.run(app, host=args.host, port=args.port)
            return EXIT_OK
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
