"""Experiment sweeps over families x widths x seeds x strategies, MAE-based
metrics, and result persistence.

All randomness derives from (master_seed, family, width, seed) plus a stage
tag, so records are independent of worker count and scheduling order.  The
baseline estimation path deliberately omits the strategy name from its seed
derivation: a cut strategy that falls back to no-cut (empty plan) reproduces
the no_cut record bit for bit.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from math import fsum
from multiprocessing import get_context
from statistics import mean, median

import numpy as np

from .circuit import (
    Circuit, Gate, H, MEASURE_Z, SDG,
    brickwork_circuit, ghz_circuit, qft_circuit, random_circuit,
    strip_measurements,
)
from .cutfind import CutBudget, ScoreWeights, StrategyOutcome, auto_select, fitv3_select
from .errors import ConfigError, DimensionError, EmptyComparisonError
from .observables import (
    Observable, PauliString, ghz_stabilizers, ideal_expectation, z_magnetization,
)
from .qpd import Sampled, generate_subexperiments
from .simulator import (
    Counts, NoiseProfile, expectation_from_counts, make_rng, run_fragment_shots,
    run_shots, simulate_exact,
)

FAMILIES = ("ghz", "qft", "brickwork", "random")
STRATEGIES = ("no_cut", "auto", "fitv3")
OBSERVABLE_FAMILIES = ("z_magnetization", "ghz_stabilizers")

CSV_COLUMNS = ("family", "n_qubits", "seed", "strategy", "skipped", "skip_reason",
               "mae", "n_cuts", "overhead_estimate", "n_subexperiments", "total_shots")


@dataclass(frozen=True)
class SweepConfig:
    families: tuple[str, ...] = ("ghz", "qft", "random")
    widths: tuple[int, ...] = (4, 6, 8, 10, 12, 14, 16)
    seeds: tuple[int, ...] = tuple(range(10))
    strategies: tuple[str, ...] = STRATEGIES
    shots_per_subexperiment: int = 200
    reconstruction_samples: int = 100
    baseline_shots: int | None = None  # None: shots_per_subexperiment * samples
    budget: CutBudget = CutBudget()
    noise: NoiseProfile = NoiseProfile()
    observable_family: str = "z_magnetization"
    score_weights: ScoreWeights = ScoreWeights()
    master_seed: int = 0
    brickwork_depth: int = 4

    def __post_init__(self):
        for f in self.families:
            if f not in FAMILIES:
                raise ConfigError(f"unknown family {f!r}")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}")
        if self.observable_family not in OBSERVABLE_FAMILIES:
            raise ConfigError(f"unknown observable family {self.observable_family!r}")
        for w in self.widths:
            if not 2 <= w <= 24:
                raise ConfigError(f"width {w} outside [2, 24]")
        if (self.shots_per_subexperiment <= 0 or self.reconstruction_samples <= 0
                or not self.seeds or not self.widths):
            raise ConfigError("counts must be positive and lists non-empty")

    @property
    def effective_baseline_shots(self) -> int:
        if self.baseline_shots is not None:
            return self.baseline_shots
        return self.shots_per_subexperiment * self.reconstruction_samples


@dataclass
class RunRecord:
    family: str
    n_qubits: int
    seed: int
    strategy: str
    mae: float | None
    skipped: bool
    skip_reason: str | None
    n_cuts: int
    overhead_estimate: float
    n_subexperiments: int
    total_shots: int
    per_observable_errors: list[float] = field(default_factory=list)


def derive_seed(*parts) -> int:
    digest = hashlib.sha256("/".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def make_circuit(family: str, n: int, seed: int, cfg: SweepConfig) -> Circuit:
    if family == "ghz":
        return ghz_circuit(n)
    if family == "qft":
        return qft_circuit(n)
    if family == "brickwork":
        return brickwork_circuit(n, depth=cfg.brickwork_depth, seed=seed)
    if family == "random":
        return random_circuit(n, depth=n, seed=seed)
    raise ConfigError(f"unknown family {family!r}")


def observables_for(n: int, cfg: SweepConfig) -> list[Observable]:
    if cfg.observable_family == "z_magnetization":
        return [z_magnetization(n)]
    return ghz_stabilizers(n)


# --- measurement-basis bookkeeping -----------------------------------------

def _term_basis(term: PauliString) -> str:
    return "".join("Z" if p == "I" else p for p in term.paulis)


def _all_bases(observables) -> list[str]:
    seen = []
    for obs in observables:
        for term in obs.terms:
            b = _term_basis(term)
            if b not in seen:
                seen.append(b)
    return seen


def _rotation_gates(basis: str, qubits=None) -> list[Gate]:
    gates = []
    for q, p in enumerate(basis):
        if qubits is not None and q not in qubits:
            continue
        if p == "X":
            gates.append(Gate(H, (q,)))
        elif p == "Y":
            gates.append(Gate(SDG, (q,)))
            gates.append(Gate(H, (q,)))
    return gates


def _parity_values(bits: np.ndarray, mask: int) -> np.ndarray:
    v = bits & np.int64(mask)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return 1.0 - 2.0 * (v & 1)


# --- estimation paths -------------------------------------------------------

def _estimate_no_cut(nom: Circuit, observables, noise: NoiseProfile,
                     shots: int, seed_key: tuple) -> tuple[list[float], int]:
    """Counts-based noisy estimation of each observable; returns (values,
    total shots)."""
    bases = _all_bases(observables)
    counts_by_basis: dict[str, Counts] = {}
    for bi, basis in enumerate(bases):
        gates = _rotation_gates(basis)
        gates += [Gate(MEASURE_Z, (q,)) for q in range(nom.n_qubits)]
        measured = nom.with_gates(gates)
        counts_by_basis[basis] = run_shots(
            measured, noise, shots, derive_seed(*seed_key, "basis", bi))
    values = []
    for obs in observables:
        total = 0.0
        for term in obs.terms:
            counts = counts_by_basis[_term_basis(term)]
            diag = Observable((PauliString(
                "".join("Z" if p != "I" else "I" for p in term.paulis),
                term.coefficient),))
            total += expectation_from_counts(counts, diag)
        values.append(total)
    return values, shots * len(bases)


def _estimate_cut(nom: Circuit, plan, observables, cfg: SweepConfig,
                  seed_key: tuple) -> tuple[list[float], int, int]:
    """Sampled-mode noisy QPD estimation.  Returns (values, n_executed
    subexperiment circuits, total shots)."""
    subexps = generate_subexperiments(
        nom, plan, Sampled(cfg.reconstruction_samples, derive_seed(*seed_key, "qpd")),
        q_max=cfg.budget.q_max)
    bases = _all_bases(observables)
    shots = cfg.shots_per_subexperiment

    # term list with global masks, grouped by basis
    terms = []
    for oi, obs in enumerate(observables):
        for ti, term in enumerate(obs.terms):
            terms.append((oi, term, _term_basis(term)))

    # fragment estimates: est[(group, partition)][term_index]
    frag_est: dict[tuple[int, int], list[float]] = {}
    groups: dict[int, list] = {}
    for sub in subexps:
        groups.setdefault(sub.group_index, []).append(sub)

    n_executed = 0
    for gi in sorted(groups):
        for sub in sorted(groups[gi], key=lambda s: s.target_partition):
            qubit_of_local = {}
            final_locals = []
            for li, ((q, _), is_final) in enumerate(zip(sub.segments, sub.final_mask)):
                qubit_of_local[li] = q
                if is_final:
                    final_locals.append(li)
            est = [0.0] * len(terms)
            for bi, basis in enumerate(bases):
                needed = [k for k, (_, term, tb) in enumerate(terms) if tb == basis]
                if not needed:
                    continue
                local_basis = "".join(
                    basis[qubit_of_local[li]] if li in final_locals else "Z"
                    for li in range(sub.circuit.n_qubits))
                rot = _rotation_gates(local_basis)
                circ = sub.circuit.with_gates(rot)
                rng = make_rng(derive_seed(*seed_key, "frag", gi,
                                           sub.target_partition, bi))
                bits, mids = run_fragment_shots(circ, cfg.noise, shots, rng)
                n_executed += 1
                signs = np.ones(shots)
                for k in sub.sign_measures:
                    signs *= 1.0 - 2.0 * mids[:, k]
                for k in needed:
                    _, term, _ = terms[k]
                    mask = 0
                    for li in final_locals:
                        if term.paulis[qubit_of_local[li]] != "I":
                            mask |= 1 << li
                    est[k] = float(np.mean(signs * _parity_values(bits, mask)))
            frag_est[(gi, sub.target_partition)] = est

    values = []
    for oi, obs in enumerate(observables):
        contributions = []
        for gi in sorted(groups):
            weight = groups[gi][0].weight
            for k, (toi, term, _) in enumerate(terms):
                if toi != oi:
                    continue
                prod = term.coefficient
                for sub in groups[gi]:
                    prod *= frag_est[(gi, sub.target_partition)][k]
                contributions.append(weight * prod)
        values.append(fsum(contributions))
    return values, n_executed, n_executed * shots


# --- metrics ----------------------------------------------------------------

def mae(estimates, ideals) -> float:
    if len(estimates) != len(ideals) or not estimates:
        raise DimensionError(
            f"need equal nonzero lengths, got {len(estimates)} and {len(ideals)}")
    return fsum(abs(e - i) for e, i in zip(estimates, ideals)) / len(estimates)


def _matched_pairs(method_runs, baseline_runs):
    base = {(r.family, r.n_qubits, r.seed): r for r in baseline_runs}
    pairs = []
    for r in method_runs:
        b = base.get((r.family, r.n_qubits, r.seed))
        if b is None or r.skipped or b.skipped:
            continue
        pairs.append((r, b))
    return pairs


def delta_mae(method_runs, baseline_runs) -> float:
    pairs = _matched_pairs(method_runs, baseline_runs)
    if not pairs:
        raise EmptyComparisonError("no matched run pairs")
    return fsum(r.mae - b.mae for r, b in pairs) / len(pairs)


def win_rate(method_runs, baseline_runs, n: int) -> float:
    pairs = [(r, b) for r, b in _matched_pairs(method_runs, baseline_runs)
             if r.n_qubits == n]
    if not pairs:
        raise EmptyComparisonError(f"no matched run pairs at width {n}")
    return sum(1 for r, b in pairs if r.mae < b.mae) / len(pairs)


# --- the per-cell pipeline ---------------------------------------------------

def run_one(family: str, n: int, seed: int, strategy: str,
            cfg: SweepConfig, _cache: dict | None = None) -> RunRecord:
    circ = make_circuit(family, n, seed, cfg)
    nom = strip_measurements(circ)
    observables = observables_for(n, cfg)
    state = simulate_exact(nom)
    ideals = [ideal_expectation(state, o) for o in observables]
    base_key = (cfg.master_seed, family, n, seed)

    outcome: StrategyOutcome | None = None
    if strategy == "fitv3":
        outcome = fitv3_select(nom, observables, cfg.budget, cfg.score_weights)
    elif strategy == "auto":
        outcome = auto_select(nom, cfg.budget)
    elif strategy != "no_cut":
        raise ConfigError(f"unknown strategy {strategy!r}")

    if outcome is not None and outcome.skipped:
        return RunRecord(family, n, seed, strategy, mae=None, skipped=True,
                         skip_reason=outcome.skip_reason, n_cuts=0,
                         overhead_estimate=1.0, n_subexperiments=0, total_shots=0)

    if outcome is None or outcome.plan is None:
        # baseline path; seed derivation omits the strategy name so an empty
        # cut plan reproduces the no_cut record exactly (and can share the
        # no_cut computation via _cache)
        if _cache is not None and "baseline" in _cache:
            values, total_shots = _cache["baseline"]
        else:
            values, total_shots = _estimate_no_cut(
                nom, observables, cfg.noise, cfg.effective_baseline_shots,
                base_key + ("baseline",))
            if _cache is not None:
                _cache["baseline"] = (values, total_shots)
        n_cuts, overhead, n_sub = 0, 1.0, 0
    else:
        plan = outcome.plan
        values, n_sub, total_shots = _estimate_cut(
            nom, plan, observables, cfg, base_key + (strategy,))
        n_cuts = len(plan.locations)
        overhead = plan.overhead_estimate

    errors = [abs(v - i) for v, i in zip(values, ideals)]
    return RunRecord(family, n, seed, strategy,
                     mae=mae(values, ideals), skipped=False, skip_reason=None,
                     n_cuts=n_cuts, overhead_estimate=overhead,
                     n_subexperiments=n_sub, total_shots=total_shots,
                     per_observable_errors=errors)


def _run_group(args) -> list[RunRecord]:
    # one work item per (family, n, seed) so strategies that fall back to the
    # baseline reuse the no_cut estimate instead of recomputing it
    cfg, (family, n, seed) = args
    cache: dict = {}
    return [run_one(family, n, seed, st, cfg, _cache=cache)
            for st in cfg.strategies]


def sweep_cells(cfg: SweepConfig) -> list[tuple]:
    return [(f, n, s, st)
            for f in cfg.families
            for n in cfg.widths
            for s in cfg.seeds
            for st in cfg.strategies]


def run_sweep(cfg: SweepConfig, workers: int = 1) -> list[RunRecord]:
    groups = [(f, n, s)
              for f in cfg.families for n in cfg.widths for s in cfg.seeds]
    jobs = [(cfg, g) for g in groups]
    if workers <= 1:
        nested = [_run_group(job) for job in jobs]
    else:
        ctx = get_context("fork") if os.name == "posix" else get_context("spawn")
        with ctx.Pool(workers) as pool:
            nested = pool.map(_run_group, jobs, chunksize=1)
    return [r for group in nested for r in group]


# --- summaries and persistence ----------------------------------------------

def summarize(records: list[RunRecord]) -> dict:
    families = sorted({r.family for r in records})
    strategies = sorted({r.strategy for r in records})
    by_fs = {(f, s): [r for r in records if r.family == f and r.strategy == s]
             for f in families for s in strategies}

    summary: dict = {"family_mae": {}}
    for f in families:
        summary["family_mae"][f] = {}
        for s in strategies:
            runs = by_fs[(f, s)]
            ok = [r.mae for r in runs if not r.skipped]
            summary["family_mae"][f][s] = {
                "mean": mean(ok) if ok else None,
                "median": median(ok) if ok else None,
                "n_runs": len(runs),
                "n_skipped": sum(1 for r in runs if r.skipped),
            }

    methods = [s for s in strategies if s != "no_cut"]
    if "no_cut" in strategies and methods:
        summary["family_delta_mae"] = {}
        summary["delta_mae_by_width"] = {}
        summary["win_rate_by_width"] = {}
        for f in families:
            baseline = by_fs[(f, "no_cut")]
            summary["family_delta_mae"][f] = {}
            summary["delta_mae_by_width"][f] = {}
            summary["win_rate_by_width"][f] = {}
            widths = sorted({r.n_qubits for r in records if r.family == f})
            for s in methods:
                runs = by_fs[(f, s)]
                try:
                    summary["family_delta_mae"][f][s] = delta_mae(runs, baseline)
                except EmptyComparisonError:
                    summary["family_delta_mae"][f][s] = None
                dw, ww = {}, {}
                for n in widths:
                    sub = [r for r in runs if r.n_qubits == n]
                    try:
                        dw[str(n)] = delta_mae(sub, baseline)
                        ww[str(n)] = win_rate(sub, baseline, n)
                    except EmptyComparisonError:
                        dw[str(n)] = None
                        ww[str(n)] = None
                summary["delta_mae_by_width"][f][s] = dw
                summary["win_rate_by_width"][f][s] = {
                    "rates": ww,
                    "no_matched_pairs": all(v is None for v in ww.values()),
                }
    return summary


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r.family, r.n_qubits, r.seed, r.strategy,
                         int(r.skipped), _fmt(r.skip_reason), _fmt(r.mae),
                         r.n_cuts, _fmt(r.overhead_estimate),
                         r.n_subexperiments, r.total_shots])
    return buf.getvalue()


def records_from_csv(text: str) -> list[RunRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != list(CSV_COLUMNS):
        raise ConfigError(f"unexpected CSV header: {header}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            skipped = bool(int(row[4]))
            records.append(RunRecord(
                family=row[0], n_qubits=int(row[1]), seed=int(row[2]),
                strategy=row[3], skipped=skipped,
                skip_reason=row[5] or None,
                mae=None if skipped else float(row[6]),
                n_cuts=int(row[7]), overhead_estimate=float(row[8]),
                n_subexperiments=int(row[9]), total_shots=int(row[10])))
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"malformed CSV row at line {lineno}: {exc}") from exc
    return records


def write_outputs(records: list[RunRecord], summary: dict, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "results.csv"), "w") as fh:
        fh.write(records_to_csv(records))
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    run_dir = os.path.join(out_dir, "runs")
    os.makedirs(run_dir, exist_ok=True)
    for r in records:
        name = f"{r.family}_n{r.n_qubits}_s{r.seed}_{r.strategy}.json"
        with open(os.path.join(run_dir, name), "w") as fh:
            json.dump({
                "family": r.family, "n_qubits": r.n_qubits, "seed": r.seed,
                "strategy": r.strategy, "mae": r.mae, "skipped": r.skipped,
                "skip_reason": r.skip_reason, "n_cuts": r.n_cuts,
                "overhead_estimate": r.overhead_estimate,
                "n_subexperiments": r.n_subexperiments,
                "total_shots": r.total_shots,
                "per_observable_errors": r.per_observable_errors,
            }, fh, indent=2)
            fh.write("\n")
