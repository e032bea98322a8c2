import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import design_from_text
from rtlic.cfg import DistanceMap, compute_distance
from rtlic.concolic import (SearchConfig, build_constraint_vector, concolic, incremental_run,
                            select_alternate_branches)
from rtlic.errors import RtlicError
from rtlic.instrument import TargetQueue, build_target_queue, instrument_design
from rtlic.sim import BranchEvent, SimulationTrace, Simulator, TestSet, TestVector
from rtlic.solver import Model, SolveResult, check_model, solve
from rtlic.solver import terms as T

CONTRADICTION = (
    "module m(clk, a, q); input clk; input a; output reg q;\n"
    "always @(*) begin q = 0; if (a) begin if (!a) begin $display(\"T\"); end end end\n"
    "endmodule\n")


def _trace(events, records):
    return SimulationTrace(tuple(records), {}, frozenset(), (), tuple(events), ())


def _ev(cycle, block, taken, other, phase="post"):
    return BranchEvent(cycle, phase, 3, block, taken, other, True, T.var("x", 1))


def test_distance_then_cycle():
    events = [_ev(1, "B9", "B11", "B12"), _ev(2, "B12", "B14", "B13")]
    records = [(1, ("E3", "B9", "B11")), (2, ("E3", "B9", "B12", "B14"))]
    ds = DistanceMap("B15", {"B12": 3, "B13": 2})
    abs_ = select_alternate_branches(_trace(events, records), ds, 1)
    assert [(a.branch_block, a.cycle, a.distance) for a in abs_] == [("B12", 2, 2), ("B9", 1, 3)]
    assert select_alternate_branches(_trace(events, records), ds, 2)[0].branch_block == "B12"
    assert select_alternate_branches(_trace(events, records), ds, 3) == []


def test_other_side_already_run_is_skipped():
    events = [_ev(1, "B9", "B11", "B12"), _ev(1, "B9", "B12", "B11")]
    records = [(1, ("B9", "B11", "B9", "B12"))]
    ds = DistanceMap("B15", {"B12": 1, "B11": 1})
    assert select_alternate_branches(_trace(events, records), ds, 1) == []


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_sort_matches_brute_force(seed):
    rng = random.Random(seed)
    labels = [f"B{i}" for i in range(1, 13)]
    branches = {labels[k]: (labels[k + 1], labels[k + 2]) for k in range(0, 12, 3)}
    events, records = [], []
    for c in range(1, 5):
        evs = []
        for _ in range(rng.randint(0, 3)):
            b = rng.choice(list(branches))
            t, o = branches[b] if rng.random() < 0.5 else branches[b][::-1]
            evs.append(_ev(c, b, t, o, rng.choice(["pre", "edge", "post"])))
        events += evs
        records.append((c, tuple(e.taken for e in evs)))
    ds = DistanceMap("B0", {b: rng.randint(0, 4) for b in labels if rng.random() < 0.8})
    start = rng.randint(1, 4)
    got = select_alternate_branches(_trace(events, records), ds, start)
    keys = [(a.distance, a.cycle, int(a.block[1:]), ["pre", "edge", "post"].index(a.phase)) for a in got]
    assert keys == sorted(keys)
    expected, seen = set(), set()
    for e in events:
        if (e.block, e.cycle, e.phase) in seen:
            continue
        seen.add((e.block, e.cycle, e.phase))
        if e.cycle >= start and ds.get(e.other) is not None and e.other not in dict(records)[e.cycle]:
            expected.add((e.block, e.cycle, e.phase))
    assert {a.key for a in got} == expected


def _write_then_read(ram):
    t = TestSet((TestVector(1, {"r_en": 0, "w_en": 1, "addr": 4, "w_data": 0x11}),
                 TestVector(2, {"r_en": 1, "w_en": 0, "addr": 4, "w_data": 0})))
    sim = Simulator(ram)
    return sim, t, sim.run(t, 2, symbolic_from=1)


def test_flip_b13_forces_written_value(ram):
    sim, t, tr = _write_then_read(ram)
    ds = compute_distance(sim.cs, "B15")
    cands = [a for a in select_alternate_branches(tr, ds, 1) if a.block == "B15"]
    assert [(a.cycle, a.phase, a.distance) for a in cands] == [(2, "pre", 0), (2, "post", 0)]
    ab = cands[1]
    cv = build_constraint_vector(ab, tr, sim.inputs, t, sim.cs.cfg(3).dominators("B13"))
    assert cv.cycle == 2
    r = solve(cv)
    assert r.sat and check_model(cv, r.model)
    a = r.model.assignments
    assert a[("w_data", 1)] == 0xAB and a[("addr", 1)] == a[("addr", 2)] == 4
    tr2 = sim.run(t.with_values(a, range(1, 3)), 2)
    assert "B15" in tr2.blocks_at(2)


def test_inputs_before_start_are_constant(ram):
    sim, t, _ = _write_then_read(ram)
    tr = sim.run(t, 2, symbolic_from=2)
    ds = compute_distance(sim.cs, "B15")
    ab = [a for a in select_alternate_branches(tr, ds, 2) if a.block == "B15"][-1]
    cv = build_constraint_vector(ab, tr, sim.inputs, t, sim.cs.cfg(3).dominators("B13"))
    names = set(T.variables(p.term for p in cv.predicates()))
    assert names and all(n.endswith("__c2") for n in names)
    assert solve(cv).status == "unsat"  # the stored word is fixed at 0x11


def test_cycle_one_flip_uses_cycle_one_inputs(ram):
    sim = Simulator(ram)
    t = TestSet.zeros(sim.inputs, 1)
    tr = sim.run(t, 1, symbolic_from=1)
    ab = select_alternate_branches(tr, compute_distance(sim.cs, "B3"), 1)[0]
    cv = build_constraint_vector(ab, tr, sim.inputs, t)
    assert set(T.variables(p.term for p in cv.predicates())) <= {f"{k}__c1" for k in sim.inputs}


def test_contradictory_pivot_unsat():
    d = design_from_text(CONTRADICTION)
    sim = Simulator(d)
    t = TestSet((TestVector(1, {"a": 1}),))
    tr = sim.run(t, 1, symbolic_from=1)
    ab = select_alternate_branches(tr, compute_distance(sim.cs, "B3"), 1)[0]
    assert solve(build_constraint_vector(ab, tr, sim.inputs, t)).status == "unsat"


def test_limit_one_unsat():
    d = design_from_text(CONTRADICTION)
    t = TestSet(tuple(TestVector(c, {"a": 1}) for c in range(1, 4)))
    out = concolic(d, "B3", t, 1, SearchConfig(n=3, limit=1))
    assert not out.solved and out.iterations == 1
    assert out.attempts == (("B3", 1, "pre", "unsat"),)
    out = concolic(d, "B3", t, 1, SearchConfig(n=3, limit=10))
    assert not out.solved and out.iterations == 6  # pre and post settle of each cycle


def test_fast_path(ram):
    t = TestSet((TestVector(1, {"r_en": 0, "w_en": 1, "addr": 4, "w_data": 0xAB}),))
    out = concolic(ram, "B3", t, 1, SearchConfig(n=3, limit=1), solver=lambda cv: pytest.fail())
    assert out.solved and out.iterations == 0 and out.activation == 1
    assert out.next_start == 2


def test_unsound_models_are_rejected(ram):
    liar = lambda cv: SolveResult("sat", Model({}))  # noqa: E731
    out = concolic(ram, "B3", TestSet(), 1, SearchConfig(n=2, limit=2), solver=liar)
    assert not out.solved and out.iterations == 2
    assert [a[3] for a in out.attempts] == ["rejected", "rejected"]


def test_start_out_of_range(ram):
    assert not concolic(ram, "B3", TestSet(), 11, SearchConfig()).solved


def test_config_validation():
    with pytest.raises(RtlicError):
        SearchConfig(n=0)
    with pytest.raises(RtlicError):
        SearchConfig(limit=0)


def test_incremental_golden(ram, ram_cfg):
    idd = instrument_design(ram, build_target_queue(ram_cfg, "B15", ("B3", "B8")))
    res = incremental_run(idd, idd.targets, "B15", SearchConfig(10, 10, seed=0))
    assert res.success
    assert [r.marker for r in res.tests] == ["Target1", "Target2", "Target"]
    assert [r.block for r in res.tests] == ["B17", "B19", "B15"]
    starts = [r.start for r in res.tests]
    assert starts == sorted(set(starts))
    for prev, nxt in zip(res.tests, res.tests[1:]):
        assert nxt.start == prev.activation + 1
    assert len(res.combined) == res.tests[-1].activation
    tr = Simulator(idd).run(res.combined, len(res.combined))
    for r in res.tests:
        assert r.block in tr.blocks_at(r.activation)
        assert tuple(res.combined.slice(r.start, r.activation)) == r.fragment
    assert res.initial == TestSet.random(ram.inputs(), 10, 0)


def test_empty_queue_trivial_target():
    d = design_from_text(
        "module m(clk, a, q); input clk; input [3:0] a; output reg q;\n"
        "always @(posedge clk) begin q <= 0; if (a == 9) begin q <= 1; end end endmodule\n")
    res = incremental_run(d, TargetQueue(), "B1", SearchConfig(n=3, limit=10),
                          initial=TestSet.zeros(d.inputs(), 3))
    assert res.success and len(res.tests) == 1 and res.tests[0].iterations == 1
    assert res.combined.value("a", 1) == 9
