"""Command-line interface.

Exit codes: 0 ok, 1 I/O error, 2 syntax or well-formedness error,
3 catastrophic cycle found, 4 node cap exceeded, 5 internal invariant
violation, 6 input is not a response process.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import casestudy
from .formats import to_dot, to_xml
from .parser import ParseError, parse_file
from .performance import (
    NotAResponseProcess,
    PerformanceError,
    analyze,
    asymptotic_performance,
    build_gprime,
    check_response,
    find_catastrophic,
    full_step_graph,
    reduce_rts,
)
from .semantics import StateCapExceeded, build_rts, default_cap
from .syntax import WellFormednessError, check_well_formed

EXIT_OK = 0
EXIT_IO = 1
EXIT_SYNTAX = 2
EXIT_CATASTROPHIC = 3
EXIT_CAP = 4
EXIT_INTERNAL = 5
EXIT_NOT_RESPONSE = 6


@dataclass
class RunConfig:
    source: Optional[str] = None  # file path
    builtin: Optional[str] = None  # kind:N
    cap: int = field(default_factory=default_cap)
    method: str = "improved"  # baseline | improved | both
    fmt: str = "text"
    rp: tuple = ()
    output: Optional[str] = None
    reduced: bool = False

    def load(self):
        if self.builtin:
            env = casestudy.builtin(self.builtin)
        else:
            env = parse_file(self.source)
        return check_well_formed(env)


def parse_range(text: str) -> tuple:
    """``"3"``, ``"1..4"`` or ``"1,3,5"``."""
    if not text:
        return ()
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition("..")
        if sep:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(lo))
    if any(n < 1 for n in out):
        raise argparse.ArgumentTypeError("values must be positive")
    return tuple(out)


def _emit(text: str, output: Optional[str]):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _error(msg):
    print(f"error: {msg}", file=sys.stderr)


def _guarded(fn):
    """Map library exceptions to the documented exit codes."""

    def run(args):
        try:
            return fn(args)
        except OSError as exc:
            _error(exc)
            return EXIT_IO
        except (ParseError, WellFormednessError) as exc:
            _error(exc)
            return EXIT_SYNTAX
        except ValueError as exc:
            _error(exc)
            return EXIT_SYNTAX
        except StateCapExceeded as exc:
            _error(exc)
            return EXIT_CAP
        except NotAResponseProcess as exc:
            _error(exc)
            return EXIT_NOT_RESPONSE
        except (PerformanceError, AssertionError) as exc:
            _error(f"internal invariant violated: {exc}")
            return EXIT_INTERNAL

    return run


def _config(args) -> RunConfig:
    cfg = RunConfig(source=getattr(args, "file", None), builtin=getattr(args, "builtin", None))
    if getattr(args, "cap", None):
        cfg.cap = args.cap
    for name in ("method", "fmt", "rp", "output", "reduced"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    if not cfg.source and not cfg.builtin:
        raise ValueError("give an input file or --builtin kind:N")
    return cfg


@_guarded
def cmd_parse(args):
    env = parse_file(args.file)
    check_well_formed(env)
    print(f"ok: {len(env.definitions)} definitions")
    return EXIT_OK


@_guarded
def cmd_analyze(args):
    cfg = _config(args)
    env = cfg.load()
    rts = build_rts(env, cap=cfg.cap)
    report = analyze(rts, cfg.rp, cfg.method)
    if cfg.fmt == "json":
        _emit(json.dumps(report.to_json(), indent=2) + "\n", cfg.output)
    else:
        _emit(report.to_text(), cfg.output)
    return EXIT_CATASTROPHIC if report.catastrophic is not None else EXIT_OK


@_guarded
def cmd_export(args):
    cfg = _config(args)
    env = cfg.load()
    rts = build_rts(env, cap=cfg.cap)
    if cfg.reduced:
        check_response(rts)
        rts = reduce_rts(rts)
    text = to_dot(rts) if cfg.fmt == "dot" else to_xml(rts)
    _emit(text, cfg.output)
    return EXIT_OK


def _timed(fn, *a, repeat=3):
    """Result and best-of-``repeat`` wall-clock time in milliseconds."""
    best = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        r = fn(*a)
        ms = (time.perf_counter() - t0) * 1000.0
        best = ms if best is None else min(best, ms)
    return r, best


BENCH_COLUMNS = [
    "instance", "cells", "nodes_G", "edges_G", "edges_Gprime",
    "cat_closure_ms", "cat_scc_ms", "gprime_baseline_ms", "gprime_improved_ms",
    "speedup", "asymptotic", "status",
]


def bench_rows(family: str, sizes, cap: int, baseline_limit: int = 2000, repeat: int = 3):
    """One row per size; baseline (cubic) runs are skipped above ``baseline_limit`` nodes.

    Timings are the best of ``repeat`` runs.
    """
    for N in sizes:
        row = dict.fromkeys(BENCH_COLUMNS, "")
        row["instance"] = f"{family}:{N}"
        row["cells"] = N + 2
        try:
            rts = build_rts(casestudy.GENERATORS[family](N), cap=cap)
        except StateCapExceeded:
            row["status"] = "cap exceeded"
            yield row
            continue
        rrts = reduce_rts(rts)
        g = full_step_graph(rrts)
        row["nodes_G"], row["edges_G"] = g.num_nodes, g.num_edges
        small = rrts.num_nodes <= baseline_limit
        cat_scc, row["cat_scc_ms"] = _timed(find_catastrophic, rrts, "scc", repeat=repeat)
        if small:
            cat_cl, row["cat_closure_ms"] = _timed(find_catastrophic, rrts, "closure", repeat=repeat)
            if (cat_cl is None) != (cat_scc is None):
                raise AssertionError(f"catastrophic verdicts disagree on {family}:{N}")
        if cat_scc is not None:
            row["status"] = "catastrophic"
            yield row
            continue
        (gp, _), row["gprime_improved_ms"] = _timed(build_gprime, g, "improved", repeat=repeat)
        row["edges_Gprime"] = len(gp)
        if small:
            (gp_b, _), row["gprime_baseline_ms"] = _timed(build_gprime, g, "baseline", repeat=repeat)
            if {k: v[0] for k, v in gp_b.items()} != {k: v[0] for k, v in gp.items()}:
                raise AssertionError(f"G' constructions disagree on {family}:{N}")
            row["speedup"] = round(row["gprime_baseline_ms"] / max(row["gprime_improved_ms"], 1e-9), 2)
            a = asymptotic_performance(rrts, "baseline").value
            b = asymptotic_performance(rrts, "improved").value
            if a != b:
                raise AssertionError(f"asymptotic performance disagrees on {family}:{N}")
        row["asymptotic"] = str(asymptotic_performance(rrts, "improved").value)
        row["status"] = "ok"
        for k in ("cat_closure_ms", "cat_scc_ms", "gprime_baseline_ms", "gprime_improved_ms"):
            if row[k] != "":
                row[k] = round(row[k], 2)
        yield row


@_guarded
def cmd_bench(args):
    rows = list(bench_rows(args.family, args.sizes, args.cap or default_cap(), args.baseline_limit,
                           args.repeat))
    buf = io.StringIO()
    if args.csv:
        w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    else:
        widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in BENCH_COLUMNS}
        buf.write("  ".join(c.ljust(widths[c]) for c in BENCH_COLUMNS) + "\n")
        for r in rows:
            buf.write("  ".join(str(r[c]).ljust(widths[c]) for c in BENCH_COLUMNS) + "\n")
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


@_guarded
def cmd_gen(args):
    if args.all:
        out = Path(args.all)
        out.mkdir(parents=True, exist_ok=True)
        for kind in casestudy.KINDS:
            for N in args.sizes:
                (out / f"{kind}_{N}.pafas").write_text(casestudy.gen_source(kind, N), encoding="utf-8")
        return EXIT_OK
    kind, _, num = args.builtin.partition(":")
    _emit(casestudy.gen_source(kind, int(num)), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pafas", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add_input(sp):
        sp.add_argument("file", nargs="?", help=".pafas program")
        sp.add_argument("--builtin", help="kind:N for fifo/pipe/buff, or user:n")
        sp.add_argument("--cap", type=int, help="node cap (default $PAFAS_NODE_CAP or 1000000)")
        sp.add_argument("-o", "--output", help="write to this file instead of stdout")

    sp = sub.add_parser("parse", help="parse and check well-formedness")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("analyze", help="catastrophic cycles, asymptotic and response performance")
    add_input(sp)
    sp.add_argument("--rp", type=parse_range, default=(), help="values of n, e.g. 1..4")
    sp.add_argument("--method", choices=["baseline", "improved", "both"], default="improved")
    sp.add_argument("--format", dest="fmt", choices=["text", "json"], default="text")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("export", help="write the RTS (or reduced RTS) as XML or DOT")
    add_input(sp)
    sp.add_argument("--format", dest="fmt", choices=["xml", "dot"], default="xml")
    sp.add_argument("--reduced", action="store_true", help="export the reduced RTS")
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("bench", help="time baseline vs improved algorithms on a buffer family")
    sp.add_argument("family", choices=casestudy.KINDS)
    sp.add_argument("--sizes", type=parse_range, default=(1, 2, 3), help="values of N, e.g. 1..4")
    sp.add_argument("--cap", type=int)
    sp.add_argument("--baseline-limit", type=int, default=2000,
                    help="skip the cubic baselines above this many nodes")
    sp.add_argument("--repeat", type=int, default=3, help="report the best of this many timed runs")
    sp.add_argument("--csv", action="store_true")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("gen", help="emit .pafas source for a builtin buffer")
    sp.add_argument("builtin", nargs="?", help="kind:N")
    sp.add_argument("--all", metavar="DIR", help="write every kind for --sizes into DIR")
    sp.add_argument("--sizes", type=parse_range, default=(1, 2, 3, 4))
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
