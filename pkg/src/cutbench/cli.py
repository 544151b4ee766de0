"""Command line interface.

Subcommands:
  run     evaluate a single (family, qubits, seed, strategy) cell
  sweep   run a full grid and write results.csv / summary.json / per-run JSON
  report  recompute summary metrics from an existing results.csv

Configuration comes from an optional flat config file of ``key = value`` lines
(dotted keys like ``noise.p2 = 0.008``) plus command-line overrides of the
same keys (``--noise.p2 0``).  Unknown keys are rejected by name.

Exit codes: 0 success, 2 usage or config error, 1 internal failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

from .circuit import circuit_to_text, strip_measurements
from .cutfind import fitv3_select
from .errors import ConfigError, CutbenchError
from .harness import (
    FAMILIES, STRATEGIES, SweepConfig, make_circuit, observables_for,
    records_from_csv, run_one, run_sweep, summarize, write_outputs,
)

_INT_KEYS = {
    "shots_per_subexperiment", "reconstruction_samples", "baseline_shots",
    "master_seed", "brickwork_depth",
    "budget.max_cuts", "budget.q_max",
}
_FLOAT_KEYS = {
    "budget.overhead_cap",
    "noise.p1", "noise.p2", "noise.p_readout",
    "weights.width", "weights.cuts", "weights.balance", "weights.subexperiments",
}
_LIST_KEYS = {"families", "widths", "seeds", "strategies"}
_STR_KEYS = {"observable_family"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _LIST_KEYS | _STR_KEYS

_WEIGHT_FIELDS = {
    "width": "w_width", "cuts": "w_cuts",
    "balance": "w_balance", "subexperiments": "w_sub",
}


def _convert(key: str, raw: str):
    if key not in _ALL_KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _LIST_KEYS:
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if key in ("widths", "seeds"):
                return tuple(int(x) for x in items)
            return tuple(items)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def read_config_file(path: str) -> dict:
    """Parse flat ``key = value`` lines; blank lines and # comments allowed."""
    settings: dict = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {text!r}")
        key, _, raw = text.partition("=")
        settings[key.strip()] = _convert(key.strip(), raw.strip())
    return settings


def parse_override_args(extra: list[str]) -> dict:
    """Parse trailing ``--dotted.key value`` pairs into settings."""
    settings: dict = {}
    i = 0
    while i < len(extra):
        token = extra[i]
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        key, eq, raw = token[2:].partition("=")
        if not eq:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for {token!r}")
            raw = extra[i + 1]
            i += 2
        else:
            i += 1
        settings[key] = _convert(key, raw)
    return settings


def build_config(settings: dict) -> SweepConfig:
    budget_kw, noise_kw, weight_kw, top = {}, {}, {}, {}
    for key, value in settings.items():
        if key.startswith("budget."):
            budget_kw[key.split(".", 1)[1]] = value
        elif key.startswith("noise."):
            noise_kw[key.split(".", 1)[1]] = value
        elif key.startswith("weights."):
            weight_kw[_WEIGHT_FIELDS[key.split(".", 1)[1]]] = value
        else:
            top[key] = tuple(value) if key in _LIST_KEYS else value
    try:
        cfg = SweepConfig(**top)
        if budget_kw:
            cfg = dataclasses.replace(cfg, budget=dataclasses.replace(cfg.budget, **budget_kw))
        if noise_kw:
            cfg = dataclasses.replace(cfg, noise=dataclasses.replace(cfg.noise, **noise_kw))
        if weight_kw:
            cfg = dataclasses.replace(
                cfg, score_weights=dataclasses.replace(cfg.score_weights, **weight_kw))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _config_from(args, extra: list[str]) -> SweepConfig:
    settings: dict = {}
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    settings.update(parse_override_args(extra))
    return build_config(settings)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cutbench", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one benchmark cell")
    run.add_argument("--family", required=True)
    run.add_argument("--qubits", required=True, type=int)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--strategy", default="no_cut")
    run.add_argument("--config", help="flat key = value config file")
    run.add_argument("--dump-circuit", action="store_true",
                     help="print the generated circuit before running")
    run.add_argument("--explain", action="store_true",
                     help="with fitv3, print the top scored cut candidates")
    run.add_argument("--dump-subexperiments", metavar="PATH",
                     help="write the strategy's exact-mode subexperiments as JSON")

    sweep = sub.add_parser("sweep", help="run the full benchmark grid")
    sweep.add_argument("--config", help="flat key = value config file")
    sweep.add_argument("--out", default=os.environ.get("CUTBENCH_OUT"),
                       help="output directory (default: $CUTBENCH_OUT)")
    sweep.add_argument("--workers", type=int, default=1)

    report = sub.add_parser("report", help="summarize an existing results.csv")
    report.add_argument("--in", dest="csv", required=True, help="path to results.csv")
    return parser


def _cmd_run(args, extra) -> int:
    if args.family not in FAMILIES:
        raise ConfigError(f"unknown family {args.family!r}")
    if args.strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {args.strategy!r}")
    cfg = _config_from(args, extra)
    if args.dump_circuit:
        print(circuit_to_text(make_circuit(args.family, args.qubits, args.seed, cfg)))
    if args.explain and args.strategy == "fitv3":
        circ = strip_measurements(make_circuit(args.family, args.qubits, args.seed, cfg))
        outcome = fitv3_select(circ, observables_for(args.qubits, cfg),
                               cfg.budget, cfg.score_weights, explain=True)
        for cand in outcome.diagnostics.get("top_candidates", []):
            print(f"candidate {cand}")
    if args.dump_subexperiments:
        _dump_subexperiments(args, cfg)
    started = time.monotonic()
    record = run_one(args.family, args.qubits, args.seed, args.strategy, cfg)
    elapsed = time.monotonic() - started
    payload = dataclasses.asdict(record)
    payload["elapsed_seconds"] = round(elapsed, 3)
    print(json.dumps(payload, indent=2))
    return 0


def _dump_subexperiments(args, cfg) -> None:
    from .cutfind import auto_select
    from .qpd import Exact, generate_subexperiments

    nom = strip_measurements(make_circuit(args.family, args.qubits, args.seed, cfg))
    if args.strategy == "auto":
        outcome = auto_select(nom, cfg.budget)
    else:
        outcome = fitv3_select(nom, observables_for(args.qubits, cfg),
                               cfg.budget, cfg.score_weights)
    if outcome.plan is None:
        print("no cut plan; nothing to dump", file=sys.stderr)
        return
    subs = generate_subexperiments(nom, outcome.plan, Exact(), q_max=cfg.budget.q_max)
    payload = [{
        "circuit": circuit_to_text(s.circuit),
        "weight": s.weight,
        "term_indices": list(s.term_indices),
        "target_partition": s.target_partition,
        "group_index": s.group_index,
    } for s in subs]
    with open(args.dump_subexperiments, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _cmd_sweep(args, extra) -> int:
    if not args.out:
        raise ConfigError("--out (or CUTBENCH_OUT) is required")
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    cfg = _config_from(args, extra)
    records = run_sweep(cfg, workers=args.workers)
    summary = summarize(records)
    write_outputs(records, summary, args.out)
    for family in cfg.families:
        for strategy in cfg.strategies:
            stats = summary["family_mae"][family][strategy]
            m = stats["mean"]
            shown = "n/a" if m is None else f"{m:.4f}"
            print(f"{family:<10} {strategy:<8} mean_mae={shown} "
                  f"runs={stats['n_runs']} skipped={stats['n_skipped']}")
    print(f"{len(records)} records -> {args.out}")
    return 0


def _cmd_report(args, extra) -> int:
    if extra:
        raise ConfigError(f"unexpected argument {extra[0]!r}")
    try:
        with open(args.csv) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.csv!r}: {exc}") from exc
    records = records_from_csv(text)
    print(json.dumps(summarize(records), indent=2, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        code = exc.code
        return 0 if code in (0, None) else 2
    try:
        if args.command == "run":
            return _cmd_run(args, extra)
        if args.command == "sweep":
            return _cmd_sweep(args, extra)
        return _cmd_report(args, extra)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CutbenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
