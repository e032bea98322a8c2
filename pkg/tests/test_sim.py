import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from conftest import design_from_text
from oracles import random_design, ref_simulate
from rtlic.errors import SimulationError
from rtlic.frontend import elaborate, parse_locator, resolve_target
from rtlic.sim import Simulator, TestSet, TestVector, replay_check
from rtlic.solver import terms as T
from rtlic.solver.core import var_name


def vectors(*rows):
    return TestSet(tuple(TestVector(i + 1, r) for i, r in enumerate(rows)))


WRITE5 = {"r_en": 0, "w_en": 1, "addr": 5, "w_data": 0xAB}
READ5 = {"r_en": 1, "w_en": 0, "addr": 5}


def test_write_cycle(ram):
    tr = Simulator(ram).run(vectors(WRITE5), 1)
    assert {"B2", "B3"} <= set(tr.blocks_at(1))
    assert tr.final_state["mem"][5] == 0xAB
    assert sum(tr.final_state["mem"]) == 0xAB


def test_write_then_read(ram):
    tr = Simulator(ram).run(vectors(WRITE5, READ5), 2)
    assert "B8" in tr.blocks_at(2)
    assert tr.states[1]["r_data"] == 0xAB
    assert tr.states[0]["r_data"] == 0


def test_zero_inputs(ram):
    tr = Simulator(ram).run(TestSet(), 3)
    for _, blocks in tr.records:
        assert not {"B3", "B8", "B15"} & set(blocks)


def test_replay(ram):
    t = resolve_target(ram, parse_locator("line:37"))
    hit = vectors(dict(WRITE5, addr=4), dict(READ5, addr=4), dict(READ5, addr=4))
    assert replay_check(ram, hit, t, 3)
    assert not replay_check(ram, TestSet(), t, 10)
    assert not replay_check(ram, vectors(dict(WRITE5, addr=4)), t, 10)


def test_markers(ram):
    tr = Simulator(ram).run(vectors(dict(WRITE5, addr=4), dict(READ5, addr=4), dict(READ5, addr=4)), 3)
    # the read commits at the edge of cycle 2 and the checker sees it after the edge
    assert tr.marker_cycles("Target") == [2, 3]
    assert (2, "Target") in tr.displays
    assert tr.first_activation("B15") == 2
    assert tr.first_activation("B15", start=3) == 3
    assert tr.first_activation("B15", start=4) is None


def test_padding_and_slices(ram):
    t = vectors(WRITE5)
    p = t.padded(ram.inputs(), 3)
    assert len(p) == 3 and p.value("r_en", 3) == 0
    assert p.value("w_data", 1) == 0xAB
    assert [v.cycle for v in p.slice(2, 3)] == [2, 3]
    w = p.with_values({("addr", 2): 9}, range(2, 3))
    assert w.value("addr", 2) == 9 and w.value("addr", 1) == 5


def test_json_round_trip(ram):
    t = TestSet.random(ram.inputs(), 5, 3)
    assert TestSet.from_json(t.to_json(ram.inputs()), ram.inputs()) == t
    with pytest.raises(SimulationError):
        TestSet.from_json([{"cycle": 1, "inputs": {"addr": "0x10"}}], ram.inputs())


def test_random_is_seeded(ram):
    assert TestSet.random(ram.inputs(), 10, 1) == TestSet.random(ram.inputs(), 10, 1)
    assert TestSet.random(ram.inputs(), 10, 1) != TestSet.random(ram.inputs(), 10, 2)


def test_non_contiguous_vectors():
    with pytest.raises(SimulationError):
        TestSet((TestVector(2, {}),))


def test_width_mismatch(ram):
    with pytest.raises(SimulationError, match="width mismatch"):
        Simulator(ram).run(vectors({"addr": 16}), 1)


def test_bad_cycle_count(ram):
    with pytest.raises(SimulationError):
        Simulator(ram).run(TestSet(), 0)


def test_combinational_loop():
    d = design_from_text(
        "module m(clk, a, q); input clk; input a; output reg [3:0] q; reg [3:0] x, y;\n"
        "always @(*) begin x = y + 1; end\n"
        "always @(*) begin y = x; end\n"
        "always @(posedge clk) begin q <= x; end endmodule\n")
    with pytest.raises(SimulationError, match="combinational loop"):
        Simulator(d).run(TestSet(), 1)


def test_stable_feedback_settles():
    d = design_from_text(
        "module m(clk, a, q); input clk; input a; output reg q; reg x, y;\n"
        "always @(*) begin x = a & y; end\n"
        "always @(*) begin y = a; end\n"
        "always @(posedge clk) begin q <= x; end endmodule\n")
    tr = Simulator(d).run(vectors({"a": 1}), 1)
    assert tr.final_state["x"] == 1 and tr.final_state["q"] == 1


def test_nonblocking_swap():
    d = design_from_text(
        "module m(clk, a, p, q); input clk; input a; output reg p; output reg q;\n"
        "always @(posedge clk) begin p <= q; end\n"
        "always @(posedge clk) begin q <= a ^ p; end endmodule\n")
    tr = Simulator(d).run(vectors({"a": 1}, {"a": 0}, {"a": 0}), 3)
    assert [(s["p"], s["q"]) for s in tr.states] == [(0, 1), (1, 0), (0, 1)]


def _random_case(seed):
    rng = random.Random(seed)
    d = design_from_text(random_design(rng, rng.randint(1, 3), rng.randint(0, 2)))
    return rng, d, TestSet.random(d.inputs(), 6, seed)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_matches_reference_simulator(seed):
    _, d, t = _random_case(seed)
    assert list(Simulator(d).run(t, 6).states) == ref_simulate(d, t, 6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_deterministic(seed):
    _, d, t = _random_case(seed)
    a, b = Simulator(d).run(t, 6), Simulator(d).run(t, 6)
    assert a == b


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_clocked_order_irrelevant(seed):
    rng, d, t = _random_case(seed)
    procs = list(d.ast.processes)
    clocked = [p for p in procs if p.kind == "clocked"]
    rng.shuffle(clocked)
    it = iter(clocked)
    swapped = [next(it) if p.kind == "clocked" else p for p in procs]
    d2 = elaborate(replace(d.ast, processes=tuple(swapped)))
    assert Simulator(d).run(t, 6).states == Simulator(d2).run(t, 6).states


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_markers_and_memory_conservation(seed):
    _, d, t = _random_case(seed)
    sim = Simulator(d)
    tr = sim.run(t, 6)
    for marker, cycle in tr.activated_markers:
        assert any(sim.markers.get(b) == marker for b in tr.blocks_at(cycle))
    for cycle, blocks in tr.records:
        for b in blocks:
            if b in sim.markers:
                assert (sim.markers[b], cycle) in tr.activated_markers
    writers = {b for b in sim.blocks if "m" in sim.blocks[b].defined}
    prev = [0] * 4
    for (cycle, blocks), state in zip(tr.records, tr.states):
        if state["m"] != prev:
            assert writers & set(blocks)
        prev = state["m"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 4))
def test_symbolic_shadow_agrees(seed, start):
    _, d, t = _random_case(seed)
    sim = Simulator(d)
    tr = sim.run(t, 6, symbolic_from=start)
    env = {var_name(k, c): t.value(k, c) for c in range(start, 7) for k in d.inputs()}
    for name, term in tr.final_terms.items():
        assert T.evaluate(term, env) == tr.final_state[name], name
    for ev in tr.events:
        assert T.evaluate(ev.term, env) == int(ev.polarity)
        if ev.cycle < start:
            assert ev.term.op == "const"
