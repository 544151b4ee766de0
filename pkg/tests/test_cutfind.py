import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cutbench.circuit import (
    CX, CZ, H, RZ, Circuit, Gate, ghz_circuit, qft_circuit, random_circuit,
)
from cutbench.cutfind import (
    CutBudget, ScoreWeights, StrategyOutcome, auto_select, feasibility_check,
    fitv3_select, score, DISCONNECTED, NO_CANDIDATES, OVERHEAD_EXCEEDED,
    UNCUTTABLE, WIDTH_VIOLATION, DEFAULT_PRESETS, ScoredCandidate,
)
from cutbench.cutfind_kl import kl_partition
from cutbench.observables import z_magnetization
from cutbench.qpd import GateCut, estimate_overhead, make_cut_plan


def _k4_cz_circuit():
    gates = tuple(Gate(CZ, (a, b)) for a, b in itertools.combinations(range(4), 2))
    return Circuit(4, gates)


class TestBudgetValidation:
    def test_negative_cuts(self):
        with pytest.raises(ValueError):
            CutBudget(max_cuts=-1)

    def test_tiny_width(self):
        with pytest.raises(ValueError):
            CutBudget(q_max=1)

    def test_bad_cap(self):
        with pytest.raises(ValueError):
            CutBudget(overhead_cap=0.5)


class TestFitv3:
    def test_ghz8_middle_cut(self):
        out = fitv3_select(ghz_circuit(8), z_magnetization(8),
                           CutBudget(max_cuts=2, q_max=4))
        assert not out.skipped
        assert out.plan.locations == (GateCut(4),)
        assert out.plan.partitions == ((0, 1, 2, 3), (4, 5, 6, 7))
        assert out.plan.overhead_estimate == 9.0
        assert out.diagnostics["n_cuts"] == 1

    def test_zero_budget_empty_plan_not_skip(self):
        out = fitv3_select(ghz_circuit(6), z_magnetization(6),
                           CutBudget(max_cuts=0, q_max=4))
        assert out.plan is None
        assert not out.skipped
        assert out.diagnostics["candidates_evaluated"] == 0

    def test_infeasible_complete_graph(self):
        out = fitv3_select(_k4_cz_circuit(), z_magnetization(4),
                           CutBudget(max_cuts=2, q_max=2))
        assert out.plan is None
        assert not out.skipped
        assert out.diagnostics["candidates_evaluated"] > 0

    def test_deterministic(self):
        c = random_circuit(6, depth=3, seed=11)
        budget = CutBudget(max_cuts=2, q_max=4)
        a = fitv3_select(c, z_magnetization(6), budget)
        b = fitv3_select(c, z_magnetization(6), budget)
        assert a.diagnostics == b.diagnostics
        assert (a.plan is None) == (b.plan is None)
        if a.plan is not None:
            assert a.plan.locations == b.plan.locations

    def test_explain_lists_candidates(self):
        out = fitv3_select(ghz_circuit(8), z_magnetization(8),
                           CutBudget(max_cuts=2, q_max=4), explain=True)
        top = out.diagnostics["top_candidates"]
        assert top and top[0]["gates"] == [4]
        assert all(top[i]["score"] >= top[i + 1]["score"]
                   for i in range(len(top) - 1))

    def test_returned_plans_pass_feasibility(self):
        budget = CutBudget(max_cuts=2, q_max=4)
        for seed in range(8):
            c = random_circuit(5, depth=2, seed=seed)
            out = fitv3_select(c, z_magnetization(5), budget)
            if out.plan is not None:
                assert feasibility_check(out.plan, budget) is None


def _brute_force_best(c, budget):
    """Independent reference: try every gate subset up to the budget."""
    from cutbench.circuit import interaction_graph
    from cutbench.qpd import generate_subexperiments, Exact
    two_q = [i for i, g in enumerate(c.gates) if g.is_two_qubit]
    graph = interaction_graph(c)
    edge_of = {}
    for a, b, idx in graph.edges:
        for i in idx:
            edge_of[i] = (a, b, tuple(idx))

    def n_components(removed_edges):
        parent = list(range(c.n_qubits))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, _ in graph.edges:
            if (a, b) in removed_edges:
                continue
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        return len({find(v) for v in range(c.n_qubits)})

    base = n_components(set())
    best_key = None
    for r in range(1, budget.max_cuts + 1):
        for subset in itertools.combinations(two_q, r):
            # the finder always severs whole edges: all parallel gates go
            edges = {edge_of[i] for i in subset}
            gate_idx = tuple(sorted({j for _, _, idx in edges for j in idx}))
            if gate_idx != tuple(sorted(subset)):
                continue
            if any(c.gates[i].kind not in ("CZ", "CX") for i in gate_idx):
                continue
            if len(gate_idx) > budget.max_cuts:
                continue
            if n_components({(a, b) for a, b, _ in edges}) <= base:
                continue
            plan = make_cut_plan(c, [GateCut(i) for i in gate_idx])
            if max(len(p) for p in plan.partitions) > budget.q_max:
                continue
            if plan.overhead_estimate > budget.overhead_cap:
                continue
            widths = [len(p) for p in plan.partitions]
            s = (1.0 * (budget.q_max - max(widths))
                 - 1.0 * len(gate_idx)
                 - 0.5 * (max(widths) - min(widths))
                 - 0.25 * np.log2(6.0 ** len(gate_idx)))
            key = (-s, len(gate_idx), plan.overhead_estimate, gate_idx)
            if best_key is None or key < best_key:
                best_key = key
    return None if best_key is None else best_key[3]


def _fuzz_circuit(rng, n):
    gates = []
    for _ in range(rng.integers(2, 10)):
        if rng.random() < 0.4:
            q = int(rng.integers(n))
            gates.append(Gate(H, (q,)))
        else:
            a, b = rng.choice(n, size=2, replace=False)
            kind = CZ if rng.random() < 0.5 else CX
            gates.append(Gate(kind, (int(a), int(b))))
    return Circuit(n, tuple(gates))


def test_matches_brute_force_oracle():
    budget = CutBudget(max_cuts=2, q_max=4)
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(40):
        n = int(rng.integers(4, 7))
        c = _fuzz_circuit(rng, n)
        expect = _brute_force_best(c, budget)
        out = fitv3_select(c, z_magnetization(n), budget)
        got = (None if out.plan is None
               else tuple(loc.gate_index for loc in out.plan.locations))
        assert got == expect
        checked += 1
    assert checked == 40


class TestAutoSelect:
    def test_ghz8_single_cut(self):
        out = auto_select(ghz_circuit(8), CutBudget(max_cuts=2, q_max=4))
        assert not out.skipped
        assert len(out.plan.locations) == 1
        assert out.plan.overhead_estimate == 9.0

    def test_qft8_skips_on_overhead(self):
        out = auto_select(qft_circuit(8), CutBudget(max_cuts=2, q_max=4))
        assert out.skipped
        assert out.plan is None
        assert out.skip_reason == OVERHEAD_EXCEEDED

    def test_skip_totality(self):
        # every outcome is either a plan or a skip with a known reason
        budget = CutBudget(max_cuts=2, q_max=4)
        reasons = {WIDTH_VIOLATION, OVERHEAD_EXCEEDED, UNCUTTABLE, NO_CANDIDATES}
        rng = np.random.default_rng(7)
        for _ in range(25):
            n = int(rng.integers(4, 9))
            c = _fuzz_circuit(rng, n)
            out = auto_select(c, budget)
            if out.skipped:
                assert out.plan is None and out.skip_reason in reasons
            else:
                assert out.plan is not None and out.skip_reason is None

    def test_deterministic(self):
        c = random_circuit(8, depth=3, seed=4)
        a = auto_select(c, CutBudget())
        b = auto_select(c, CutBudget())
        assert a.skipped == b.skipped and a.skip_reason == b.skip_reason
        if a.plan is not None:
            assert a.plan.locations == b.plan.locations


class TestFeasibilityCheck:
    def test_width_first(self):
        plan = make_cut_plan(ghz_circuit(8), [GateCut(2)])  # 2 | 6 split
        assert feasibility_check(plan, CutBudget(q_max=4)) == WIDTH_VIOLATION
        # width is reported even when overhead would also fail
        assert feasibility_check(
            plan, CutBudget(q_max=4, overhead_cap=1.0)) == WIDTH_VIOLATION

    def test_overhead(self):
        plan = make_cut_plan(ghz_circuit(8), [GateCut(4)])
        assert feasibility_check(
            plan, CutBudget(q_max=4, overhead_cap=8.0)) == OVERHEAD_EXCEEDED

    def test_ok(self):
        plan = make_cut_plan(ghz_circuit(8), [GateCut(4)])
        assert feasibility_check(plan, CutBudget(q_max=4)) is None


class TestKlPartition:
    def test_partition_is_exact_cover(self):
        parts = kl_partition(9, {(0, 1): 2, (4, 5): 1}, 3, 1, 42)
        flat = sorted(q for p in parts for q in p)
        assert flat == list(range(9))

    def test_balance_tolerance(self):
        for seed in (1, 2, 3):
            parts = kl_partition(8, {(i, i + 1): 1 for i in range(7)}, 2, 0, seed)
            assert sorted(len(p) for p in parts) == [4, 4]

    def test_deterministic(self):
        w = {(i, (i + 3) % 10): 1 + i % 2 for i in range(10)}
        assert kl_partition(10, w, 2, 1, 5) == kl_partition(10, w, 2, 1, 5)

    def test_cuts_chain_at_weak_link(self):
        # chain with one light edge in the middle: the split lands there
        w = {(i, i + 1): 5 for i in range(7)}
        w[(3, 4)] = 1
        parts = kl_partition(8, w, 2, 0, 0)
        assert sorted(tuple(sorted(p)) for p in parts) == \
            [(0, 1, 2, 3), (4, 5, 6, 7)]


def test_score_prefers_fewer_cuts_same_widths():
    w = ScoreWeights()
    one = ScoredCandidate((GateCut(0),), 0.0, ((0, 1), (2, 3)), 9.0, 6, True)
    two = ScoredCandidate((GateCut(0), GateCut(1)), 0.0, ((0, 1), (2, 3)), 81.0, 36, True)
    assert score(one, None, w, 4) > score(two, None, w, 4)


def test_default_presets_cover_two_and_three_way():
    assert len(DEFAULT_PRESETS) == 6
    assert {p.n_partitions for p in DEFAULT_PRESETS} == {2, 3}
    assert len({p.seed for p in DEFAULT_PRESETS}) == 6
