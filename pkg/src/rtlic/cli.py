"""Command-line entry point.

Exit codes: 0 success, 1 target not activated (or replay failed),
2 usage error, 3 stage failure (bad design, unknown target, solver error).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .cfg import build_cfg_set, to_dot
from .errors import RtlicError, StageError
from .frontend import load_design, parse_locator, resolve_target
from .instrument import build_target_queue, instrument_design
from .pipeline import RunConfig, dumps, prepare, run, summary_table, write_artifacts
from .sequence import dependency_search, get_signal_expression
from .sim import Simulator, load_testset
from .solver import emit_smtlib, solve

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_STAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _param(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=INT, got {text!r}")
    try:
        return name, int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None


def _design_args(p, target=False, required_target=False):
    p.add_argument("--design", required=True, help="Verilog source file")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="NAME=INT",
                   help="parameter override (repeatable)")
    if target:
        p.add_argument("--target", required=required_target,
                       help="line:<n>[:true|false] or marker:<text>")


def _search_args(p):
    p.add_argument("--unroll", type=int, default=10, help="cycles to unroll (default 10)")
    p.add_argument("--limit", type=int, default=10, help="solver calls per target (default 10)")
    p.add_argument("--seed", type=int, default=0, help="seed of the random initial test")
    p.add_argument("--mode", choices=["incremental", "baseline"], default="incremental")
    p.add_argument("--solver", default="internal",
                   help="internal | external | external:<exe> (RTLIC_SOLVER overrides the path)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rtlic", description="Incremental concolic test generation for RTL")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate a test activating a branch target")
    _design_args(p, target=True, required_target=True)
    _search_args(p)
    p.add_argument("--out", default="runs", help="output directory (default runs/)")

    p = sub.add_parser("replay", help="check that a test activates a target on the design")
    _design_args(p, target=True, required_target=True)
    p.add_argument("--tests", required=True, help="TestSet JSON file")
    p.add_argument("--unroll", type=int, default=None, help="cycles to simulate (default: test length)")
    p.add_argument("--trace", help="write the trace log here")

    p = sub.add_parser("dump", help="write an intermediate artifact")
    _design_args(p, target=True)
    p.add_argument("what", choices=["cfg-dot", "seq", "instrumented"])
    p.add_argument("--out", help="file to write (default stdout)")

    p = sub.add_parser("cfg", help="print the control-flow graphs")
    _design_args(p)
    p.add_argument("--dot", action="store_true", help="Graphviz output")

    p = sub.add_parser("seq", help="print the event sequence for a target")
    _design_args(p, target=True, required_target=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("instrument", help="print the instrumented design")
    _design_args(p, target=True, required_target=True)
    p.add_argument("--emit", action="store_true", help="emit Verilog (default)")

    p = sub.add_parser("smt", help="export the solver queries of a run as SMT-LIB2")
    _design_args(p, target=True, required_target=True)
    _search_args(p)
    p.add_argument("--out", required=True, help="directory for the .smt2 files")
    p.add_argument("--arrays", action="store_true", help="keep memories as arrays (QF_ABV)")
    return ap


def _config(a) -> RunConfig:
    return RunConfig(a.design, a.target, tuple(a.param), a.unroll, a.limit, a.seed, a.mode,
                     a.solver, getattr(a, "out", "runs") or "runs")


def _write(text: str, out=None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen(a) -> int:
    cfg = _config(a)
    t0 = time.perf_counter()
    outcome = run(cfg)
    root = write_artifacts(outcome)
    sys.stdout.write(summary_table(outcome, time.perf_counter() - t0))
    print(f"artifacts: {root}")
    if not outcome.success:
        print(f"rtlic: {outcome.report['verdict']}", file=sys.stderr)
    return EXIT_OK if outcome.success else EXIT_FAIL


def cmd_replay(a) -> int:
    try:
        d = load_design(a.design, dict(a.param))
    except RtlicError as e:
        raise StageError("frontend", e) from e
    try:
        target = resolve_target(d, parse_locator(a.target))
    except RtlicError as e:
        raise StageError("target", e) from e
    try:
        tests = load_testset(a.tests, d.inputs())
    except (RtlicError, OSError) as e:
        raise StageError("replay", e) from e
    n = a.unroll or len(tests)
    if n < 1:
        print("rtlic: empty test set", file=sys.stderr)
        return EXIT_FAIL
    trace = Simulator(d).run(tests, n)
    if a.trace:
        Path(a.trace).write_text(trace.log(), encoding="utf-8")
    cycle = trace.first_activation(target.block)
    if cycle is None:
        print(f"{target.block} not activated within {n} cycles")
        return EXIT_FAIL
    print(f"{target.block} activated at cycle {cycle}")
    return EXIT_OK


def _sequence(a):
    d, cs, target, ss = prepare(RunConfig(a.design, a.target, tuple(a.param)))
    return d, cs, target, ss


def cmd_seq(a) -> int:
    _, _, target, ss = _sequence(a)
    if getattr(a, "json", False):
        sys.stdout.write(dumps({"target": target.block, **ss.to_json()}))
    else:
        print(ss)
    return EXIT_OK


def cmd_instrument(a, out=None) -> int:
    d, cs, target, ss = _sequence(a)
    try:
        idd = instrument_design(d, build_target_queue(cs, target.block, ss.blocks))
    except RtlicError as e:
        raise StageError("instrument", e) from e
    _write(idd.emit(), out)
    return EXIT_OK


def cmd_cfg(a, out=None) -> int:
    try:
        d = load_design(a.design, dict(a.param))
    except RtlicError as e:
        raise StageError("frontend", e) from e
    cs = build_cfg_set(d)
    if getattr(a, "dot", True):
        _write(to_dot(cs), out)
        return EXIT_OK
    lines = []
    for c in cs.cfgs:
        lines.append(f"CFG{c.process_id} ({c.kind})")
        for s, t, p in c.edges:
            lines.append(f"  {s} -> {t}" + ("" if p is None else f" [{str(p).lower()}]"))
    lines += [f"  {x} => {y} ({sig})" for x, y, sig in cs.inter_edges]
    _write("\n".join(lines) + "\n", out)
    return EXIT_OK


def cmd_dump(a) -> int:
    if a.what == "cfg-dot":
        a.dot = True
        return cmd_cfg(a, a.out)
    if not a.target:
        raise UsageError(f"dump {a.what} needs --target")
    if a.what == "seq":
        _, _, target, ss = _sequence(a)
        _write(str(ss) + "\n" + dumps({"target": target.block, **ss.to_json()}), a.out)
        return EXIT_OK
    return cmd_instrument(a, a.out)


def cmd_smt(a) -> int:
    cfg = _config(a)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    index = []

    def recording(cv):
        res = solve(cv)
        name = f"query_{len(index) + 1:03d}.smt2"
        (out / name).write_text(emit_smtlib(cv, scalarize=not a.arrays), encoding="utf-8")
        index.append({"file": name, "cycle": cv.cycle, "block": cv.pivot.block,
                      "phase": cv.pivot.phase, "internal": res.status})
        return res

    outcome = run(RunConfig(cfg.design, cfg.target, cfg.params, cfg.n, cfg.limit, cfg.seed, cfg.mode),
                  solver=recording)
    (out / "index.json").write_text(dumps(index), encoding="utf-8")
    print(f"{len(index)} queries written to {out}")
    return EXIT_OK if outcome.success else EXIT_FAIL


COMMANDS = {"gen": cmd_gen, "replay": cmd_replay, "dump": cmd_dump, "cfg": cmd_cfg,
            "seq": cmd_seq, "instrument": cmd_instrument, "smt": cmd_smt}


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(a.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    for flag in ("unroll", "limit"):
        v = getattr(a, flag, None)
        if v is not None and v < 1:
            ap.print_usage(sys.stderr)
            print(f"rtlic: error: --{flag} must be >= 1", file=sys.stderr)
            return EXIT_USAGE
    try:
        return COMMANDS[a.cmd](a)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"rtlic: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as e:
        print(f"rtlic: error [{e.stage}]: {e.cause}", file=sys.stderr)
        return EXIT_STAGE
    except RtlicError as e:
        print(f"rtlic: error: {e}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
