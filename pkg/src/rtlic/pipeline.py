"""End-to-end test generation for one branch target.

load -> resolve target -> sequence -> instrument -> incremental search ->
replay on the original design. Every stage failure is re-raised as a
:class:`StageError` naming the stage. Reports carry no timings, so equal
configurations produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

from . import __version__
from .cfg import build_cfg_set, to_dot
from .concolic import IncrementalResult, SearchConfig, incremental_run
from .errors import InstrumentError, RtlicError, StageError
from .frontend import load_design, parse_locator, resolve_target
from .frontend.printer import format_expr
from .instrument import InstrumentedDesign, TargetQueue, build_target_queue, instrument_design
from .sequence import alternative_sequences, dependency_search, get_signal_expression
from .sim import Simulator, TestSet, replay_check
from .solver import external_solve, solve

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODES = ("incremental", "baseline")


@dataclass(frozen=True)
class RunConfig:
    design: str
    target: str
    params: tuple = ()  # (name, value) pairs
    n: int = 10
    limit: int = 10
    seed: int = 0
    mode: str = "incremental"
    solver: str = "internal"  # "internal", "external" or "external:<executable>"
    out: str = "runs"

    def __post_init__(self):
        if self.n < 1 or self.limit < 1:
            raise RtlicError("--unroll and --limit must be >= 1")
        if self.mode not in MODES:
            raise RtlicError(f"unknown mode {self.mode!r}")
        if not (self.solver == "internal" or self.solver.startswith("external")):
            raise RtlicError(f"unknown solver {self.solver!r}")

    def canonical(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d["params"] = [list(p) for p in sorted(self.params)]
        return d

    @property
    def runid(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def search(self) -> SearchConfig:
        return SearchConfig(self.n, self.limit, self.seed)

    def solver_fn(self) -> Optional[Callable]:
        if self.solver == "internal":
            return None
        _, _, exe = self.solver.partition(":")
        exe = os.environ.get("RTLIC_SOLVER") or exe or None
        return lambda cv: external_solve(cv, exe)


@dataclass
class RunOutcome:
    config: RunConfig
    report: dict
    combined: TestSet
    instrumented: InstrumentedDesign
    result: IncrementalResult
    replay: bool
    inputs: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.replay


def _stage(name):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, et, ev, tb):
            if ev is not None and isinstance(ev, (RtlicError, OSError)) and not isinstance(ev, StageError):
                raise StageError(name, ev) from ev
            return False
    return _Ctx()


def _hex_vectors(vectors, inputs) -> list:
    return [{"cycle": v.cycle, "inputs": {k: hex(v.assignments.get(k, 0)) for k in inputs}}
            for v in vectors]


def prepare(cfg: RunConfig):
    """Front half of the pipeline: design, target and the candidate queues."""
    with _stage("frontend"):
        d = load_design(cfg.design, dict(cfg.params))
    with _stage("target"):
        cs = build_cfg_set(d)
        target = resolve_target(d, parse_locator(cfg.target), cs)
    with _stage("sequence"):
        se = get_signal_expression(target)
        ss = dependency_search(cs, se)
    return d, cs, target, ss


def run(cfg: RunConfig, solver: Optional[Callable] = None) -> RunOutcome:
    d, cs, target, ss = prepare(cfg)
    solver = solver or cfg.solver_fn() or (lambda cv: solve(cv))
    # baseline runs the plain search straight on the target
    sequences = alternative_sequences(ss) if cfg.mode == "incremental" else [None]
    attempts = []
    chosen = None
    for alt in sequences:
        with _stage("instrument"):
            try:
                tq = TargetQueue() if alt is None else build_target_queue(cs, target.block, alt.blocks)
            except InstrumentError as e:
                attempts.append({"sequence": list(alt.blocks), "error": str(e)})
                continue
            idd = instrument_design(d, tq)
        with _stage("concolic"):
            res = incremental_run(idd, idd.targets, target.block, cfg.search(), solver=solver)
        attempts.append({"sequence": [] if alt is None else list(alt.blocks), "solved": res.success})
        chosen = (alt, idd, res)
        if res.success:
            break
    if chosen is None:
        raise StageError("instrument", InstrumentError("no sequence alternative could be instrumented"))
    alt, idd, res = chosen
    with _stage("replay"):
        ok = replay_check(d, res.combined, target, cfg.n) if len(res.combined) else False
    report = build_report(cfg, d, target, ss, idd, res, ok, attempts)
    return RunOutcome(cfg, report, res.combined, idd, res, ok, d.inputs())


def build_report(cfg, d, target, ss, idd, res, ok, attempts) -> dict:
    inputs = d.inputs()
    queue = [{
        "marker": t.marker,
        "block": t.block,
        "origin": t.origin,
        "constraints": {c.signal: hex(c.value.value) for c in t.constraints.resolved},
        "condition": format_expr(t.condition),
    } for t in idd.targets]
    targets = [{
        "marker": r.marker,
        "block": r.block,
        "solved": r.solved,
        "iterations": r.iterations,
        "start": r.start,
        "ab_cycle": r.ab_cycle,
        "activation_cycle": r.activation,
        "next_start": None if r.activation is None else r.activation + 1,
        "fragment": _hex_vectors(r.fragment, inputs),
        "attempts": [list(a) for a in r.attempts],
    } for r in res.tests]
    activated = res.success
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "runid": cfg.runid,
        "config": cfg.canonical(),
        "design": {"module": d.ast.module_name, "inputs": inputs},
        "target": {"locator": cfg.target, "block": target.block,
                   "condition": format_expr(target.condition), "polarity": target.guard[1]},
        "sequence": list(ss.blocks),
        "sequence_alternatives": attempts,
        "queue": queue,
        "targets": targets,
        "initial_tests": _hex_vectors(res.initial.vectors, inputs),
        "combined_tests": _hex_vectors(res.combined.vectors, inputs),
        "activated": activated,
        "replay": ok,
        "verdict": "target activated" if ok else "target not activated within limit",
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_artifacts(outcome: RunOutcome, outdir: Optional[str] = None) -> Path:
    cfg = outcome.config
    root = Path(outdir or cfg.out) / cfg.runid
    root.mkdir(parents=True, exist_ok=True)
    inputs = outcome.inputs
    idd = outcome.instrumented
    files = {
        "report.json": dumps(outcome.report),
        "tests.json": dumps(outcome.combined.to_json(inputs)),
        "instrumented.v": idd.emit(),
        "cfg.dot": to_dot(idd.cfg),
    }
    if len(outcome.combined):
        trace = Simulator(idd).run(outcome.combined, len(outcome.combined))
        files["trace.log"] = trace.log()
    manifest = {"schema_version": SCHEMA_VERSION, "runid": cfg.runid, "config": cfg.canonical(),
                "files": {}}
    for name, text in sorted(files.items()):
        (root / name).write_text(text, encoding="utf-8")
        manifest["files"][name] = hashlib.sha256(text.encode()).hexdigest()
    (root / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
    return root


def summary_table(outcome: RunOutcome, seconds: Optional[float] = None) -> str:
    rows = [("target", "block", "activated", "cycle", "iterations")]
    for t in outcome.report["targets"]:
        rows.append((t["marker"], t["block"], "Yes" if t["solved"] else "No",
                     "-" if t["activation_cycle"] is None else str(t["activation_cycle"]),
                     str(t["iterations"])))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    tail = f"replay on original design: {'pass' if outcome.replay else 'FAIL'}"
    if seconds is not None:
        tail += f"  ({seconds:.2f} s)"
    return "\n".join(lines + [tail]) + "\n"
