from __future__ import annotations

import io
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionshuttle.circuit_gen import gen_pairing, gen_qft, gen_shift, generate
from ionshuttle.errors import IllegalOp, Stuck
from ionshuttle.qasm_io import Circuit, Gate
from ionshuttle.shuttle_engine import (
    EngineConfig,
    Shuttler,
    bring_together,
    compile_circuit,
    exchange_adjacent,
    execute,
    prepare_trap,
    run_worstcase_multi,
    run_worstcase_uni,
    spectator_padded,
)
from ionshuttle.trap_model import CostModel, auto_uni, crystal_distance, load, new_uni, read_jsonl
from oracles import min_exchanges, min_exchanges_to_meet


def loaded(ions, alpha=1, cm=None):
    return load(auto_uni(len(ions), alpha, cm or CostModel.counting()), list(ions))


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(window=0), dict(break_divisor=0), dict(mover_rule="random"),
                                    dict(liz_selection="farthest")])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            EngineConfig(**kw)


class TestExchange:
    def test_swaps_inner_ions(self):
        t = load(new_uni(32, 19, 1, CostModel.counting()), [0, 1, 2, 3])
        ops = exchange_adjacent(t, 19, 20, 1, 2)
        assert t.layout() == [(19, (0, 2)), (20, (1, 3))]
        kinds = [o.kind for o in ops]
        assert kinds.count("split") == kinds.count("merge") == 3
        assert kinds.count("rotation") == 1
        assert kinds.count("displacement") == 2

    @pytest.mark.parametrize("x,y", [(0, 2), (0, 3), (1, 3), (1, 2)])
    def test_any_pair(self, x, y):
        t = load(new_uni(32, 19, 2), [0, 1, 2, 3])
        exchange_adjacent(t, 19, 21, x, y)
        crystals = [set(c) for _, c in t.layout()]
        assert x in crystals[1] and y in crystals[0]
        assert t.spacing_ok()

    def test_gates_run_in_temporary_crystal(self):
        t = load(new_uni(), [0, 1, 2, 3])
        ops = exchange_adjacent(t, 19, 20, 1, 2, [Gate(7, "cx", (1, 2))])
        ex = [o for o in ops if o.kind == "gate_exec"]
        assert len(ex) == 1 and set(ex[0].ions) == {1, 2}

    def test_not_adjacent(self):
        t = load(new_uni(), list(range(6)))
        with pytest.raises(IllegalOp):
            exchange_adjacent(t, 19, 21, 0, 4)

    def test_neither_at_liz(self):
        t = load(new_uni(), list(range(6)))
        with pytest.raises(IllegalOp):
            exchange_adjacent(t, 20, 21, 2, 4)

    def test_singleton_crystal(self):
        t = load(new_uni(), [0, 1, 2])
        with pytest.raises(IllegalOp):
            exchange_adjacent(t, 19, 20, 0, 2)

    def test_missing_ion(self):
        t = load(new_uni(), [0, 1, 2, 3])
        with pytest.raises(IllegalOp):
            exchange_adjacent(t, 19, 20, 0, 1)


class TestBringTogether:
    def test_same_crystal_no_splits(self):
        ops = bring_together(loaded([0, 1, 2, 3]), 2, 3)
        assert not any(o.kind in ("split", "merge") for o in ops)

    @given(st.integers(2, 5).flatmap(
        lambda k: st.tuples(st.permutations(range(2 * k)), st.integers(0, 2 * k - 1), st.integers(0, 2 * k - 1))),
        st.sampled_from(["fewest_exchanges", "first_operand", "closer_to_end"]))
    @settings(max_examples=150, deadline=None)
    def test_exchange_count_matches_oracle(self, case, rule):
        perm, a, b = case
        if a == b:
            return
        t = loaded(perm)
        crystals = [c for _, c in t.layout()]
        cd = crystal_distance(t, a, b)
        s = Shuttler(t, EngineConfig(mover_rule=rule))
        s.bring_together(a, b, [Gate(0, "cx", (a, b))])
        expected = 0 if any(a in c and b in c for c in crystals) else cd + 1
        assert s.trace.exchanges == expected == min_exchanges_to_meet(crystals, a, b)
        assert crystal_distance(t, a, b) == 0
        done = [o for o in s.trace.ops if o.kind == "gate_exec"]
        assert len(done) == 1 and done[0].seg in t.topology.liz_positions
        assert t.spacing_ok()

    def test_partner_mode_aligns_target(self):
        t = loaded(range(8))
        s = Shuttler(t)
        s.bring_together(1, 7, [Gate(0, "cx", (1, 7))], final="partner")
        assert s.trace.exchanges == 3
        seg, ions = t.layout()[t.chain_index(7)]
        assert 1 in ions and seg == t.topology.liz_positions[0]

    def test_bad_final(self):
        with pytest.raises(ValueError):
            Shuttler(loaded(range(4))).bring_together(0, 3, final="middle")

    def test_stuck_when_trap_too_short(self):
        t = load(new_uni(6, 0, 1), list(range(8)))
        with pytest.raises(Stuck):
            Shuttler(t).bring_together(0, 7)


class TestExecute:
    def test_pairing_needs_no_splits(self):
        c = compile_circuit(gen_pairing(20))
        assert c.trace.counts()["split"] == 0
        assert c.trace.gates_executed == 10

    def test_qft3_small_distance(self):
        tr = compile_circuit(gen_qft(3)).trace
        assert max(tr.cd_series) <= 1

    def test_empty_circuit(self):
        tr = compile_circuit(Circuit("empty", 4)).trace
        assert tr.ops == [] and tr.total_cost == 0

    @pytest.mark.parametrize("fam,size", [("qft", 9), ("shift", 8), ("carry", 3), ("yoyo", 10),
                                          ("comparator", 3), ("adder", 2)])
    @pytest.mark.parametrize("method", ["cio", "oai"])
    def test_split_merge_balance(self, fam, size, method):
        tr = compile_circuit(generate(fam, size), method).trace
        counts = tr.counts()
        assert counts["split"] == counts["merge"] == 3 * tr.exchanges

    def test_all_gates_executed(self):
        c = gen_shift(7)
        comp = compile_circuit(c)
        assert comp.trace.gates_executed == len(comp.circuit)
        assert comp.trace.counts()["gate_exec"] == len(comp.circuit)

    def test_deterministic(self):
        def dump():
            buf = io.StringIO()
            compile_circuit(gen_qft(12), trap="uni:auto").trace.write_jsonl(buf)
            return buf.getvalue()
        assert dump() == dump()

    def test_trace_replays(self):
        comp = compile_circuit(gen_qft(6), cost_model=CostModel.default())
        buf = io.StringIO()
        total = comp.trace.write_jsonl(buf)
        buf.seek(0)
        assert read_jsonl(buf) == comp.trace.ops
        assert total == comp.trace.total_cost == comp.trap.ledger

    def test_odd_qubits_get_spectator(self):
        assert spectator_padded([2, 0, 1]) == [2, 0, 1, 3]
        comp = compile_circuit(gen_qft(5))
        assert len(comp.trap.ions()) == 6

    def test_execute_requires_loaded_trap(self):
        c = gen_qft(4)
        with pytest.raises(ValueError):
            execute(c, [0, 1, 2, 3], new_uni())
        tr = execute(c, [0, 1, 2, 3], prepare_trap(c, [0, 1, 2, 3]))
        assert tr.gates_executed == len(c)


class TestSortChain:
    @pytest.mark.parametrize("perm", list(itertools.permutations(range(6))))
    def test_three_crystals_minimal(self, perm):
        start = [[0, 1], [2, 3], [4, 5]]
        target = [list(perm[i:i + 2]) for i in (0, 2, 4)]
        t = loaded(range(6))
        s = Shuttler(t)
        n = s.sort_chain(target)
        assert [list(c) for _, c in t.layout()] == target
        assert n == min_exchanges(start, target)

    def test_reorganize_applies_cio_of_rest(self):
        t = loaded(range(8))
        rest = list(gen_qft(8).gates[::-1])
        Shuttler(t).reorganize(rest, 8)
        assert t.spacing_ok()
        assert sorted(t.ions()) == list(range(8))


class TestReorgTrigger:
    def test_fires_on_shift(self):
        tr = compile_circuit(gen_shift(24), "oai", config=EngineConfig(reorg_enabled=True)).trace
        assert tr.reorg_events

    def test_disabled_never_fires(self):
        tr = compile_circuit(gen_shift(24), "oai").trace
        assert tr.reorg_events == []


class TestWorstCase:
    @pytest.mark.parametrize("K", [1, 2, 5, 9])
    @pytest.mark.parametrize("alpha", [1, 2])
    def test_uni(self, K, alpha):
        wc = run_worstcase_uni(K, alpha, CostModel.normalized())
        assert wc.shift_displacements == alpha * K * (K - 1)
        assert wc.exchanges == K - 1
        assert wc.exchange_displacements == 2 * alpha * (K - 1)

    def test_k5_example(self):
        wc = run_worstcase_uni(5, 1, CostModel.normalized())
        assert wc.displacements == 28

    def test_multi_k6_per_section(self):
        wc = run_worstcase_multi(6, 3)
        assert wc.sections == 2
        assert wc.shift_displacements == 12
        assert wc.exchanges == 5

    @pytest.mark.parametrize("K", [2, 4, 7])
    def test_single_section_equals_uni(self, K):
        m, u = run_worstcase_multi(K, K), run_worstcase_uni(K)
        assert m.sections == 1
        assert (m.exchanges, m.shift_displacements, m.exchange_displacements) == (
            u.exchanges, u.shift_displacements, u.exchange_displacements)

    def test_multi_cheaper(self):
        for K in (6, 12, 24):
            assert run_worstcase_multi(K, K // 3).displacements <= run_worstcase_uni(K).displacements

    def test_bad_args(self):
        with pytest.raises(ValueError):
            run_worstcase_uni(0)
        with pytest.raises(ValueError):
            run_worstcase_multi(4, 0)
