"""Cut-selection strategies: the exhaustive budget-aware heuristic (fitv3)
and the preset-search automatic finder, plus feasibility screening.

fitv3 enumerates interaction-graph edge subsets within the cut budget; an
edge selection expands to gate cuts on *every* two-qubit gate joining the two
sides, and the expanded gate count is what the budget and the overhead
estimate see.  This matters on families with parallel gates per qubit pair
(QFT, brickwork).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, interaction_graph
from .cutfind_kl import kl_partition
from .qpd import (
    CUTTABLE_GATE_KINDS, GATE_CUT_OVERHEAD, CutPlan, GateCut, estimate_overhead,
    make_cut_plan,
)

WIDTH_VIOLATION = "WidthViolation"
OVERHEAD_EXCEEDED = "OverheadExceeded"
DISCONNECTED = "Disconnected"
UNCUTTABLE = "UncuttableGates"
NO_CANDIDATES = "NoCandidates"

GATE_CUT_TERMS = 6  # exact-mode subexperiment groups per gate cut


@dataclass(frozen=True)
class CutBudget:
    max_cuts: int = 2
    q_max: int = 4
    overhead_cap: float = 1e8

    def __post_init__(self):
        if self.max_cuts < 0:
            raise ValueError("max_cuts must be non-negative")
        if self.q_max < 2:
            raise ValueError("q_max must be >= 2")
        if self.overhead_cap < 1:
            raise ValueError("overhead_cap must be >= 1")


@dataclass(frozen=True)
class ScoreWeights:
    w_width: float = 1.0
    w_cuts: float = 1.0
    w_balance: float = 0.5
    w_sub: float = 0.25


@dataclass(frozen=True)
class PresetConfig:
    n_partitions: int
    balance_tolerance: int
    seed: int


DEFAULT_PRESETS = tuple(
    PresetConfig(k, tol, 101 + i)
    for i, (k, tol) in enumerate(itertools.product((2, 3), (0, 1, 2)))
)


@dataclass(frozen=True)
class ScoredCandidate:
    locations: tuple[GateCut, ...]
    score: float
    partitions: tuple[tuple[int, ...], ...]
    overhead: float
    n_subexperiments: int
    feasible: bool
    rejection_reason: str | None = None


@dataclass
class StrategyOutcome:
    plan: CutPlan | None
    skipped: bool
    skip_reason: str | None = None
    diagnostics: dict = field(default_factory=dict)


def score(candidate: ScoredCandidate, obs, weights: ScoreWeights, q_max: int) -> float:
    """Linear structural score; higher is better.  Rewards headroom under the
    width limit, penalizes cut count, partition imbalance, and subexperiment
    burden.  Overhead enters only through the hard cap, not the score."""
    widths = [len(p) for p in candidate.partitions]
    max_w, min_w = max(widths), min(widths)
    n_cuts = len(candidate.locations)
    return (weights.w_width * (q_max - max_w)
            - weights.w_cuts * n_cuts
            - weights.w_balance * (max_w - min_w)
            - weights.w_sub * math.log2(candidate.n_subexperiments))


def _components(n: int, edges) -> list[tuple[int, ...]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps: dict[int, list[int]] = {}
    for v in range(n):
        comps.setdefault(find(v), []).append(v)
    return sorted(tuple(sorted(c)) for c in comps.values())


def fitv3_select(c: Circuit, obs, budget: CutBudget,
                 weights: ScoreWeights = ScoreWeights(),
                 explain: bool = False) -> StrategyOutcome:
    """Exhaustive budget-aware gate-cut selection.

    Enumerates disconnecting edge subsets within the cut budget, screens by
    width and overhead, scores survivors, and returns the argmax plan (ties:
    fewer cuts, lower overhead, lexicographically smallest gate tuple).  An
    infeasible instance yields an empty plan, never a skip or an error.
    """
    graph = interaction_graph(c)
    cuttable = [(a, b, idx) for a, b, idx in graph.edges
                if all(c.gates[i].kind in CUTTABLE_GATE_KINDS for i in idx)]
    base_components = len(_components(c.n_qubits, [(a, b) for a, b, _ in graph.edges]))

    best = None
    best_key = None
    evaluated = 0
    scored: list[ScoredCandidate] = []
    for r in range(1, budget.max_cuts + 1):
        for subset in itertools.combinations(cuttable, r):
            gate_idx = tuple(sorted(i for _, _, idx in subset for i in idx))
            if len(gate_idx) > budget.max_cuts:
                continue
            evaluated += 1
            removed = {(a, b) for a, b, _ in subset}
            remaining = [(a, b) for a, b, _ in graph.edges if (a, b) not in removed]
            comps = _components(c.n_qubits, remaining)
            if len(comps) <= base_components:
                continue
            n_cuts = len(gate_idx)
            overhead = GATE_CUT_OVERHEAD ** n_cuts
            cand = ScoredCandidate(
                locations=tuple(GateCut(i) for i in gate_idx),
                score=0.0,
                partitions=tuple(comps),
                overhead=overhead,
                n_subexperiments=GATE_CUT_TERMS ** n_cuts,
                feasible=True,
            )
            if overhead > budget.overhead_cap:
                continue
            if max(len(p) for p in comps) > budget.q_max:
                continue
            s = score(cand, obs, weights, budget.q_max)
            cand = ScoredCandidate(cand.locations, s, cand.partitions,
                                   cand.overhead, cand.n_subexperiments, True)
            key = (-s, n_cuts, overhead, gate_idx)
            if explain:
                scored.append(cand)
            if best_key is None or key < best_key:
                best, best_key = cand, key

    diagnostics = {
        "candidates_evaluated": evaluated,
        "n_cuts": len(best.locations) if best else 0,
        "overhead": best.overhead if best else 1.0,
        "n_subexperiments": best.n_subexperiments if best else 0,
    }
    if explain:
        scored.sort(key=lambda cd: (-cd.score, len(cd.locations)))
        diagnostics["top_candidates"] = [
            {"gates": [loc.gate_index for loc in cd.locations],
             "score": cd.score, "overhead": cd.overhead,
             "partitions": [list(p) for p in cd.partitions]}
            for cd in scored[:10]
        ]
    if best is None:
        return StrategyOutcome(plan=None, skipped=False, diagnostics=diagnostics)
    return StrategyOutcome(plan=make_cut_plan(c, best.locations),
                           skipped=False, diagnostics=diagnostics)


def auto_select(c: Circuit, budget: CutBudget,
                presets=DEFAULT_PRESETS) -> StrategyOutcome:
    """Preset-search automatic finder: seeded balanced graph partitions with
    local refinement; every crossing two-qubit gate becomes a gate cut.
    Infeasibility under the width/overhead screens yields a skip outcome."""
    graph = interaction_graph(c)
    edge_weights = {(a, b): len(idx) for a, b, idx in graph.edges}

    feasible: list[tuple[tuple, ScoredCandidate]] = []
    saw_overhead = saw_width = saw_uncuttable = False
    for preset in presets:
        if preset.n_partitions > c.n_qubits:
            continue
        parts = kl_partition(c.n_qubits, edge_weights, preset.n_partitions,
                             preset.balance_tolerance, preset.seed)
        part_of = {}
        for pi, p in enumerate(parts):
            for q in p:
                part_of[q] = pi
        crossing = [i for i, g in enumerate(c.gates)
                    if g.is_two_qubit and part_of[g.qubits[0]] != part_of[g.qubits[1]]]
        if not crossing:
            continue  # already disconnected; nothing to cut
        widths = sorted((len(p) for p in parts), reverse=True)
        if widths[0] > budget.q_max:
            saw_width = True
            continue
        overhead = GATE_CUT_OVERHEAD ** len(crossing)
        if overhead > budget.overhead_cap:
            saw_overhead = True
            continue
        if any(c.gates[i].kind not in CUTTABLE_GATE_KINDS for i in crossing):
            saw_uncuttable = True
            continue
        cand = ScoredCandidate(
            locations=tuple(GateCut(i) for i in sorted(crossing)),
            score=0.0,
            partitions=tuple(sorted(tuple(sorted(p)) for p in parts)),
            overhead=overhead,
            n_subexperiments=GATE_CUT_TERMS ** len(crossing),
            feasible=True,
        )
        key = (len(crossing), overhead, widths[0],
               tuple(loc.gate_index for loc in cand.locations))
        feasible.append((key, cand))

    diagnostics = {"candidates_evaluated": len(presets)}
    if not feasible:
        if saw_overhead:
            reason = OVERHEAD_EXCEEDED
        elif saw_width:
            reason = WIDTH_VIOLATION
        elif saw_uncuttable:
            reason = UNCUTTABLE
        else:
            reason = NO_CANDIDATES
        return StrategyOutcome(plan=None, skipped=True, skip_reason=reason,
                               diagnostics=diagnostics)
    _, best = min(feasible, key=lambda kv: kv[0])
    diagnostics.update(n_cuts=len(best.locations), overhead=best.overhead,
                       n_subexperiments=best.n_subexperiments)
    return StrategyOutcome(plan=make_cut_plan(c, best.locations),
                           skipped=False, diagnostics=diagnostics)


def feasibility_check(plan: CutPlan, budget: CutBudget) -> str | None:
    """Screen a plan against the budget; returns a rejection reason or None.
    Checks run in the fixed order width, overhead, disconnection."""
    if plan.partitions and max(len(p) for p in plan.partitions) > budget.q_max:
        return WIDTH_VIOLATION
    if plan.overhead_estimate > budget.overhead_cap:
        return OVERHEAD_EXCEEDED
    if len(plan.partitions) < 2:
        return DISCONNECTED
    return None
