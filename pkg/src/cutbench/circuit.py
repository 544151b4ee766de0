"""Gate-level circuit representation and benchmark-family generators.

Conventions used throughout the package:

* Qubit indices are little-endian: qubit 0 is the least significant bit of a
  basis-state index, and the last character of a counts bitstring.
* Generators are pure functions of their arguments.  Seeded families use
  numpy's Philox counter-based generator, which is platform-stable, so golden
  files are portable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidWidthError

# Gate kinds
H, X, Y, Z, S, SDG, T = "H", "X", "Y", "Z", "S", "Sdg", "T"
RX, RY, RZ, CP = "Rx", "Ry", "Rz", "CP"
CX, CZ, SWAP = "CX", "CZ", "SWAP"
MEASURE_Z, PREP_STATE = "MeasureZ", "PrepState"

ONE_QUBIT_GATES = frozenset({H, X, Y, Z, S, SDG, T, RX, RY, RZ})
TWO_QUBIT_GATES = frozenset({CP, CX, CZ, SWAP})
PARAMETERIZED = frozenset({RX, RY, RZ, CP})
ALL_KINDS = ONE_QUBIT_GATES | TWO_QUBIT_GATES | {MEASURE_Z, PREP_STATE}

PREP_STATES = ("Zero", "One", "Plus", "Minus", "PlusI", "MinusI")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    prep: str | None = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(self.qubits))
        n = len(self.qubits)
        expected = 2 if self.kind in TWO_QUBIT_GATES else 1
        if n != expected:
            raise ValueError(f"{self.kind} acts on {expected} qubit(s), got {n}")
        if len(set(self.qubits)) != n:
            raise ValueError(f"{self.kind} qubits must be distinct: {self.qubits}")
        if (self.angle is not None) != (self.kind in PARAMETERIZED):
            raise ValueError(f"angle present iff gate is parameterized ({self.kind})")
        if (self.prep is not None) != (self.kind == PREP_STATE):
            raise ValueError("prep present iff kind is PrepState")
        if self.prep is not None and self.prep not in PREP_STATES:
            raise ValueError(f"unknown prep state {self.prep!r}")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_GATES


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidWidthError(f"n_qubits must be positive, got {self.n_qubits}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(q >= self.n_qubits or q < 0 for q in g.qubits):
                raise ValueError(f"gate {g} references qubits outside [0, {self.n_qubits})")

    def two_qubit_gate_indices(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.is_two_qubit]

    def with_gates(self, extra: list[Gate] | tuple[Gate, ...], name: str | None = None) -> "Circuit":
        return replace(self, gates=self.gates + tuple(extra),
                       name=self.name if name is None else name)


@dataclass(frozen=True)
class InteractionGraph:
    """Two-qubit interaction structure: one edge per qubit pair, carrying the
    positions of every two-qubit gate on that pair."""
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int, tuple[int, ...]], ...]

    def edge_map(self) -> dict[tuple[int, int], tuple[int, ...]]:
        return {(a, b): idx for a, b, idx in self.edges}


def ghz_circuit(n: int) -> Circuit:
    """H on qubit 0 followed by a CX chain."""
    if n < 2:
        raise InvalidWidthError(f"GHZ requires n >= 2, got {n}")
    gates = [Gate(H, (0,))]
    gates += [Gate(CX, (i, i + 1)) for i in range(n - 1)]
    return Circuit(n, tuple(gates), name=f"ghz_{n}")


def qft_circuit(n: int) -> Circuit:
    """Textbook QFT: H plus controlled-phase ladder, then SWAP reversal."""
    if n < 1:
        raise InvalidWidthError(f"QFT requires n >= 1, got {n}")
    gates = []
    for k in range(n):
        gates.append(Gate(H, (k,)))
        for j in range(k + 1, n):
            gates.append(Gate(CP, (j, k), angle=math.pi / 2 ** (j - k)))
    for i in range(n // 2):
        gates.append(Gate(SWAP, (i, n - 1 - i)))
    return Circuit(n, tuple(gates), name=f"qft_{n}")


def _brick_pairs(n: int, layer: int) -> list[tuple[int, int]]:
    start = 0 if layer % 2 == 0 else 1
    return [(i, i + 1) for i in range(start, n - 1, 2)]


def brickwork_circuit(n: int, depth: int = 4, seed: int = 0) -> Circuit:
    """Brickwork layers: per-qubit Rz.Ry.Rz Euler triples, then alternating CZ bricks."""
    if n < 2:
        raise InvalidWidthError(f"brickwork requires n >= 2, got {n}")
    if depth < 1:
        raise ValueError(f"depth must be positive, got {depth}")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    gates = []
    for layer in range(depth):
        for q in range(n):
            a, b, c = rng.uniform(0.0, 2.0 * math.pi, size=3)
            gates.append(Gate(RZ, (q,), angle=float(a)))
            gates.append(Gate(RY, (q,), angle=float(b)))
            gates.append(Gate(RZ, (q,), angle=float(c)))
        for pair in _brick_pairs(n, layer):
            gates.append(Gate(CZ, pair))
    return Circuit(n, tuple(gates), name=f"brickwork_{n}_d{depth}_s{seed}")


_RANDOM_1Q = (H, S, T, RX, RY, RZ)


def random_circuit(n: int, depth: int | None = None, seed: int = 0) -> Circuit:
    """Alternating nearest-neighbor entangling layers (CX/CZ) with randomized
    single-qubit gates.  Depth defaults to n."""
    if n < 2:
        raise InvalidWidthError(f"random family requires n >= 2, got {n}")
    if depth is None:
        depth = n
    if depth < 1:
        raise ValueError(f"depth must be positive, got {depth}")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    gates = []
    for layer in range(depth):
        for q in range(n):
            kind = _RANDOM_1Q[rng.integers(len(_RANDOM_1Q))]
            if kind in PARAMETERIZED:
                gates.append(Gate(kind, (q,), angle=float(rng.uniform(0.0, 2.0 * math.pi))))
            else:
                gates.append(Gate(kind, (q,)))
        for pair in _brick_pairs(n, layer):
            kind = CX if rng.integers(2) == 0 else CZ
            gates.append(Gate(kind, pair))
    return Circuit(n, tuple(gates), name=f"random_{n}_d{depth}_s{seed}")


def strip_measurements(c: Circuit) -> Circuit:
    """Remove terminal MeasureZ gates (those with no later gate on their qubit)."""
    last_op = {}
    for i, g in enumerate(c.gates):
        for q in g.qubits:
            last_op[q] = i
    keep = [g for i, g in enumerate(c.gates)
            if not (g.kind == MEASURE_Z and last_op[g.qubits[0]] == i)]
    return replace(c, gates=tuple(keep))


def interaction_graph(c: Circuit) -> InteractionGraph:
    by_pair: dict[tuple[int, int], list[int]] = {}
    for i, g in enumerate(c.gates):
        if g.is_two_qubit:
            a, b = sorted(g.qubits)
            by_pair.setdefault((a, b), []).append(i)
    edges = tuple((a, b, tuple(idx)) for (a, b), idx in sorted(by_pair.items()))
    return InteractionGraph(vertices=tuple(range(c.n_qubits)), edges=edges)


# --- text serialization ----------------------------------------------------
# Format: header line "qubits N", then one gate per line:
#   KIND q0 [q1] [angle]        for unitary gates
#   MeasureZ q
#   PrepState q STATE

def circuit_to_text(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}"]
    for g in c.gates:
        parts = [g.kind] + [str(q) for q in g.qubits]
        if g.angle is not None:
            parts.append(repr(g.angle))
        if g.prep is not None:
            parts.append(g.prep)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str, name: str = "") -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("qubits "):
        raise ValueError("circuit text must start with 'qubits N'")
    n = int(lines[0].split()[1])
    gates = []
    for ln in lines[1:]:
        parts = ln.split()
        kind = parts[0]
        if kind not in ALL_KINDS:
            raise ValueError(f"unknown gate kind {kind!r} in line {ln!r}")
        nq = 2 if kind in TWO_QUBIT_GATES else 1
        qubits = tuple(int(p) for p in parts[1:1 + nq])
        angle = None
        prep = None
        rest = parts[1 + nq:]
        if kind in PARAMETERIZED:
            angle = float(rest[0])
        elif kind == PREP_STATE:
            prep = rest[0]
        elif rest:
            raise ValueError(f"trailing tokens in line {ln!r}")
        gates.append(Gate(kind, qubits, angle=angle, prep=prep))
    return Circuit(n, tuple(gates), name=name)
