"""Seeded Kernighan-Lin-style balanced k-partition of the qubit interaction
graph, minimizing crossing gate weight.

Deterministic for a fixed (graph, k, tolerance, seed): the initial balanced
split comes from a Philox-seeded shuffle and refinement scans moves in a
fixed order, always applying the single best strictly-improving move or swap.
"""
from __future__ import annotations

import math

from .simulator import make_rng


def kl_partition(n: int, edge_weights: dict[tuple[int, int], int], k: int,
                 tolerance: int, seed: int) -> list[tuple[int, ...]]:
    lo = max(1, n // k - tolerance)
    hi = math.ceil(n / k) + tolerance

    rng = make_rng(seed)
    order = list(rng.permutation(n))
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    part_of = [0] * n
    pos = 0
    for p, sz in enumerate(sizes):
        for q in order[pos:pos + sz]:
            part_of[int(q)] = p
        pos += sz

    adj: dict[int, dict[int, int]] = {v: {} for v in range(n)}
    for (a, b), w in edge_weights.items():
        adj[a][b] = adj[a].get(b, 0) + w
        adj[b][a] = adj[b].get(a, 0) + w

    def w_to(u: int, p: int) -> int:
        return sum(w for v, w in adj[u].items() if part_of[v] == p)

    for _ in range(10 * n + 10):
        best_gain = 0
        best_action = None
        counts = [0] * k
        for v in range(n):
            counts[part_of[v]] += 1
        for u in range(n):
            pu = part_of[u]
            for p in range(k):
                if p == pu or counts[p] + 1 > hi or counts[pu] - 1 < lo:
                    continue
                gain = w_to(u, p) - w_to(u, pu)
                if gain > best_gain:
                    best_gain, best_action = gain, ("move", u, p)
        for u in range(n):
            for v in range(u + 1, n):
                pu, pv = part_of[u], part_of[v]
                if pu == pv:
                    continue
                gain = (w_to(u, pv) - w_to(u, pu)
                        + w_to(v, pu) - w_to(v, pv)
                        - 2 * adj[u].get(v, 0))
                if gain > best_gain:
                    best_gain, best_action = gain, ("swap", u, v)
        if best_action is None:
            break
        if best_action[0] == "move":
            part_of[best_action[1]] = best_action[2]
        else:
            _, u, v = best_action
            part_of[u], part_of[v] = part_of[v], part_of[u]

    parts: list[list[int]] = [[] for _ in range(k)]
    for v in range(n):
        parts[part_of[v]].append(v)
    return [tuple(p) for p in parts if p]
