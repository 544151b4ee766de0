"""Microbenchmark comparing the compiled statevector kernels against the pure
numpy fallback.

Run as: python -m cutbench.benchmark [--widths 10,14,16] [--repeats 3]

The fallback is selected by setting CUTBENCH_NO_NUMBA=1 before import, so this
script re-executes the simulation in a subprocess for each backend.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

_CHILD = """
import json, sys, time
from cutbench.circuit import qft_circuit, random_circuit
from cutbench.kernels import USE_NUMBA, warm_up
from cutbench.simulator import simulate_exact

widths = json.loads(sys.argv[1])
repeats = int(sys.argv[2])
warm_up()
rows = []
for n in widths:
    circuits = [qft_circuit(n), random_circuit(n, seed=1)]
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for c in circuits:
            simulate_exact(c)
        best = min(best, time.perf_counter() - t0)
    rows.append({"n": n, "seconds": best})
print(json.dumps({"numba": USE_NUMBA, "rows": rows}))
"""


def _run_backend(no_numba: bool, widths, repeats: int) -> dict:
    env = dict(os.environ)
    if no_numba:
        env["CUTBENCH_NO_NUMBA"] = "1"
    else:
        env.pop("CUTBENCH_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", _CHILD, json.dumps(list(widths)), str(repeats)],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m cutbench.benchmark")
    parser.add_argument("--widths", default="10,14,16")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)
    widths = [int(x) for x in args.widths.split(",") if x]

    started = time.perf_counter()
    numba_res = _run_backend(False, widths, args.repeats)
    numpy_res = _run_backend(True, widths, args.repeats)
    assert not numpy_res["numba"], "fallback child unexpectedly loaded numba"

    print(f"{'width':>6} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}")
    for a, b in zip(numpy_res["rows"], numba_res["rows"]):
        ratio = a["seconds"] / b["seconds"] if b["seconds"] > 0 else float("inf")
        print(f"{a['n']:>6} {a['seconds']:>12.4f} {b['seconds']:>12.4f} {ratio:>8.2f}x")
    if not numba_res["numba"]:
        print("note: numba backend unavailable, both columns used the fallback")
    print(f"total wall time {time.perf_counter() - started:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
