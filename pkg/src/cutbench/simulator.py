"""Noiseless statevector simulation, stochastic-Pauli trajectory sampling,
and counts-based expectation estimation.

Bit conventions (used package-wide):

* Statevector index bit q corresponds to qubit q (little-endian).
* Counts keys are bitstrings written most-significant qubit first, i.e.
  qubit q is character ``key[n - 1 - q]``.  An X on qubit 0 of a 2-qubit
  register therefore yields the key ``"01"``.

The noise model is stochastic per-trajectory Pauli insertion: after each gate,
with probability p1 (one-qubit) or p2 (two-qubit) a uniformly random
non-identity Pauli is applied to each qubit the gate touched.  Terminal
readout bits flip independently with probability p_readout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .circuit import (
    CP, CX, CZ, H, MEASURE_Z, PREP_STATE, RX, RY, RZ, S, SDG, SWAP, T, X, Y, Z,
    Circuit, Gate, ONE_QUBIT_GATES,
)
from .errors import InvalidArgumentError, RequiresSamplingError

_SQ = 1.0 / math.sqrt(2.0)
_T_PHASE = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))

_FIXED_1Q = {
    H: np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=np.complex128),
    X: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    Y: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    Z: np.array([[1, 0], [0, -1]], dtype=np.complex128),
    S: np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    SDG: np.array([[1, 0], [0, -1j]], dtype=np.complex128),
    T: np.array([[1, 0], [0, _T_PHASE]], dtype=np.complex128),
}

_PAULI_MATS = (_FIXED_1Q[X], _FIXED_1Q[Y], _FIXED_1Q[Z])

# unitary bringing |0> to each named preparation state
_PREP_OPS = {
    "Zero": (),
    "One": (X,),
    "Plus": (H,),
    "Minus": (X, H),
    "PlusI": (H, S),
    "MinusI": (X, H, S),
}


def gate_matrix_1q(g: Gate) -> np.ndarray:
    if g.kind in _FIXED_1Q:
        return _FIXED_1Q[g.kind]
    t = g.angle
    c, s = math.cos(t / 2), math.sin(t / 2)
    if g.kind == RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if g.kind == RY:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if g.kind == RZ:
        e = complex(math.cos(t / 2), math.sin(t / 2))
        return np.array([[e.conjugate(), 0], [0, e]], dtype=np.complex128)
    raise ValueError(f"not a one-qubit unitary: {g.kind}")


def apply_gate(state: np.ndarray, g: Gate) -> None:
    """Apply one unitary gate in place."""
    if g.kind in ONE_QUBIT_GATES:
        m = gate_matrix_1q(g)
        kernels.apply_1q(state, m[0, 0], m[0, 1], m[1, 0], m[1, 1], g.qubits[0])
    elif g.kind == CX:
        kernels.apply_cx(state, g.qubits[0], g.qubits[1])
    elif g.kind == CZ:
        kernels.apply_phase11(state, g.qubits[0], g.qubits[1], -1.0 + 0.0j)
    elif g.kind == CP:
        phase = complex(math.cos(g.angle), math.sin(g.angle))
        kernels.apply_phase11(state, g.qubits[0], g.qubits[1], phase)
    elif g.kind == SWAP:
        kernels.apply_swap(state, g.qubits[0], g.qubits[1])
    else:
        raise ValueError(f"not a unitary gate: {g.kind}")


def _apply_pauli(state: np.ndarray, code: int, q: int) -> None:
    m = _PAULI_MATS[code]
    kernels.apply_1q(state, m[0, 0], m[0, 1], m[1, 0], m[1, 1], q)


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class NoiseProfile:
    """Parametric stochastic-Pauli + readout noise (hardware-inspired defaults)."""
    p1: float = 0.0003
    p2: float = 0.008
    p_readout: float = 0.02

    def __post_init__(self):
        for name in ("p1", "p2", "p_readout"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def zero(cls) -> "NoiseProfile":
        return cls(0.0, 0.0, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0 and self.p_readout == 0.0

    def gate_error(self, g: Gate) -> float:
        return self.p2 if g.is_two_qubit else self.p1


@dataclass
class Counts:
    counts: dict[str, int]
    total_shots: int
    n_qubits: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.counts.values()) != self.total_shots:
            raise ValueError("counts must sum to total_shots")


def make_rng(seed) -> np.random.Generator:
    """Philox counter-based generator: platform-stable for golden files."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def zero_state(n: int) -> np.ndarray:
    state = np.zeros(1 << n, dtype=np.complex128)
    state[0] = 1.0
    return state


def simulate_exact(c: Circuit) -> StateVector:
    """Exact statevector of a measurement-free circuit from |0...0>."""
    touched = set()
    state = zero_state(c.n_qubits)
    for g in c.gates:
        if g.kind == MEASURE_Z:
            raise RequiresSamplingError("circuit contains MeasureZ; use run_shots")
        if g.kind == PREP_STATE:
            if g.qubits[0] in touched:
                raise RequiresSamplingError(
                    "PrepState on an active qubit requires trajectory simulation")
            for kind in _PREP_OPS[g.prep]:
                apply_gate(state, Gate(kind, g.qubits))
        else:
            apply_gate(state, g)
        touched.update(g.qubits)
    sv = StateVector(c.n_qubits, state)
    assert abs(sv.norm_sq() - 1.0) < 1e-10, "norm drift exceeds 1e-10"
    return sv


# --- exact branch enumeration (mid-circuit measure/prepare) ----------------

@dataclass(frozen=True)
class Branch:
    probability: float
    outcomes: tuple[int, ...]
    state: np.ndarray


_BRANCH_EPS = 1e-14


def simulate_branches(c: Circuit) -> list[Branch]:
    """Enumerate all measurement branches of a circuit exactly.

    Returns one Branch per sequence of MeasureZ outcomes with nonzero
    probability; states are normalized.  Used for exact-mode subexperiment
    evaluation, where measurement count per fragment is small.
    """
    branches = [(1.0, (), zero_state(c.n_qubits))]
    for g in c.gates:
        if g.kind == MEASURE_Z:
            q = g.qubits[0]
            nxt = []
            for p, out, state in branches:
                p1 = kernels.prob_one(state, q)
                for o, po in ((0, 1.0 - p1), (1, p1)):
                    if po <= _BRANCH_EPS:
                        continue
                    s = state.copy()
                    kernels.collapse(s, q, o, math.sqrt(po))
                    nxt.append((p * po, out + (o,), s))
            branches = nxt
        elif g.kind == PREP_STATE:
            q = g.qubits[0]
            for p, out, state in branches:
                p1 = kernels.prob_one(state, q)
                if min(p1, 1.0 - p1) > 1e-10:
                    raise RequiresSamplingError(
                        "PrepState requires a definite (measured or fresh) qubit")
                if p1 > 0.5:
                    apply_gate(state, Gate(X, (q,)))
                for kind in _PREP_OPS[g.prep]:
                    apply_gate(state, Gate(kind, (q,)))
        else:
            for _, _, state in branches:
                apply_gate(state, g)
    return [Branch(p, out, state) for p, out, state in branches]


# --- shot sampling ---------------------------------------------------------

def _split_terminal_measures(c: Circuit):
    last_op = {}
    for i, g in enumerate(c.gates):
        for q in g.qubits:
            last_op[q] = i
    terminal = set()
    ops = []
    for i, g in enumerate(c.gates):
        if g.kind == MEASURE_Z and last_op[g.qubits[0]] == i:
            terminal.add(g.qubits[0])
        else:
            ops.append(g)
    return ops, sorted(terminal)


def _sample_bits(probs: np.ndarray, n_draws: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(n_draws), side="right").astype(np.int64)


def run_shots(c: Circuit, noise: NoiseProfile, shots: int, seed) -> Counts:
    """Sample measurement counts under stochastic-Pauli trajectory noise.

    Deterministic for a fixed (circuit, noise, shots, seed).  Shots whose
    trajectory draws no Pauli error share the noiseless statevector, so only
    erroring trajectories (grouped by error pattern) are re-simulated.
    """
    if shots <= 0:
        raise InvalidArgumentError(f"shots must be positive, got {shots}")
    rng = make_rng(seed)
    ops, measured = _split_terminal_measures(c)
    metadata = {}
    unmeasured = sorted(set(range(c.n_qubits)) - set(measured))
    if unmeasured:
        metadata["unmeasured_qubits"] = unmeasured

    has_mid = any(g.kind in (MEASURE_Z, PREP_STATE) for g in ops)
    if has_mid:
        # mid-circuit measures collapse the trajectory but are not reported
        bits = _run_shots_generic(c.n_qubits, ops, noise, shots, rng)
    else:
        bits = _run_shots_grouped(c.n_qubits, ops, noise, shots, rng)

    # readout flips, then mask out unmeasured qubits
    if noise.p_readout > 0.0 and measured:
        for q in measured:
            flips = rng.random(shots) < noise.p_readout
            bits[flips] ^= np.int64(1 << q)
    mask = np.int64(sum(1 << q for q in measured))
    bits &= mask

    values, cnts = np.unique(bits, return_counts=True)
    counts = {format(int(v), f"0{c.n_qubits}b"): int(k) for v, k in zip(values, cnts)}
    return Counts(counts, shots, c.n_qubits, metadata)


def _run_shots_grouped(n, ops, noise, shots, rng):
    state0 = zero_state(n)
    for g in ops:
        apply_gate(state0, g)
    perr = np.array([noise.gate_error(g) for g in ops])
    if perr.size == 0 or perr.max() == 0.0:
        return _sample_bits(np.abs(state0) ** 2, shots, rng)

    p_clean = float(np.exp(np.sum(np.log1p(-perr))))
    is_err = rng.random(shots) >= p_clean
    err_idx = np.flatnonzero(is_err)

    # sample an error pattern per erroring shot, conditioned on >= 1 error
    patterns = []
    for _ in err_idx:
        while True:
            fired = np.flatnonzero(rng.random(len(ops)) < perr)
            if fired.size:
                break
        pat = tuple((int(g), tuple(int(rng.integers(3)) for _ in ops[g].qubits))
                    for g in fired)
        patterns.append(pat)

    pattern_probs = _pattern_distributions(n, ops, set(patterns))

    bits = np.zeros(shots, dtype=np.int64)
    for idx, pat in zip(err_idx, patterns):
        bits[idx] = _sample_bits(pattern_probs[pat], 1, rng)[0]
    clean_idx = np.flatnonzero(~is_err)
    if clean_idx.size:
        bits[clean_idx] = _sample_bits(np.abs(state0) ** 2, clean_idx.size, rng)
    return bits


def _pattern_distributions(n, ops, patterns):
    """Final output distribution for each distinct error pattern.

    A pattern is a tuple of (gate_index, pauli_codes) insertions.  Patterns
    sharing a prefix (nominal gates plus earlier insertions) share its
    simulation: branching happens only at the first differing insertion, so
    the cost is proportional to the size of the pattern trie, not to
    #patterns times circuit depth.
    """
    results: dict = {}

    def finish(state, next_gate, pattern):
        for i in range(next_gate, len(ops)):
            apply_gate(state, ops[i])
        results[pattern] = np.abs(state) ** 2

    def descend(state, next_gate, items):
        # items: list of (full_pattern, remaining_insertions); the shared
        # `state` has ops[:next_gate] and all consumed insertions applied
        by_gate: dict[int, list] = {}
        for pattern, rest in items:
            if not rest:
                finish(state.copy(), next_gate, pattern)
            else:
                by_gate.setdefault(rest[0][0], []).append((pattern, rest))
        for g in sorted(by_gate):
            for i in range(next_gate, g + 1):
                apply_gate(state, ops[i])
            next_gate = g + 1
            by_paulis: dict[tuple, list] = {}
            for pattern, rest in by_gate[g]:
                by_paulis.setdefault(rest[0][1], []).append((pattern, rest[1:]))
            for codes, sub in by_paulis.items():
                branch = state.copy()
                for q, code in zip(ops[g].qubits, codes):
                    _apply_pauli(branch, code, q)
                descend(branch, next_gate, sub)

    descend(zero_state(n), 0, [(pat, pat) for pat in patterns])
    return results


def _run_shots_generic(n, ops, noise, shots, rng):
    bits = np.zeros(shots, dtype=np.int64)
    for s in range(shots):
        state = zero_state(n)
        for g in ops:
            if g.kind == MEASURE_Z:
                q = g.qubits[0]
                p1 = kernels.prob_one(state, q)
                o = 1 if rng.random() < p1 else 0
                kernels.collapse(state, q, o, math.sqrt(p1 if o else 1.0 - p1))
            elif g.kind == PREP_STATE:
                q = g.qubits[0]
                p1 = kernels.prob_one(state, q)
                if p1 > 0.5:
                    apply_gate(state, Gate(X, (q,)))
                for kind in _PREP_OPS[g.prep]:
                    apply_gate(state, Gate(kind, (q,)))
            else:
                apply_gate(state, g)
                p = noise.gate_error(g)
                if p > 0.0 and rng.random() < p:
                    for q in g.qubits:
                        _apply_pauli(state, int(rng.integers(3)), q)
        bits[s] = int(_sample_bits(np.abs(state) ** 2, 1, rng)[0])
    return bits


# --- vectorized fragment execution (small subexperiment circuits) ----------

def _rows_apply_1q(states, rows, u, q):
    dim = states.shape[1]
    idx = np.arange(dim)
    low = idx[(idx >> q) & 1 == 0]
    high = low | (1 << q)
    a = states[np.ix_(rows, low)]
    b = states[np.ix_(rows, high)]
    states[np.ix_(rows, low)] = u[0, 0] * a + u[0, 1] * b
    states[np.ix_(rows, high)] = u[1, 0] * a + u[1, 1] * b


def run_fragment_shots(c: Circuit, noise: NoiseProfile, shots: int,
                       rng: np.random.Generator):
    """Per-shot sampling of a small fragment circuit, vectorized over shots.

    Every MeasureZ gate's outcome is recorded in order; terminal bits are
    sampled over all qubits at the end (append basis rotations beforehand).
    Returns (bits, mid_outcomes) with shapes (shots,) and (shots, n_measures).
    Readout flips apply to terminal bits only.
    """
    if shots <= 0:
        raise InvalidArgumentError(f"shots must be positive, got {shots}")
    if noise.is_zero:
        return _fragment_shots_noiseless(c, shots, rng)

    n = c.n_qubits
    dim = 1 << n
    states = np.zeros((shots, dim), dtype=np.complex128)
    states[:, 0] = 1.0
    idx = np.arange(dim)
    mid = []
    all_rows = np.arange(shots)

    for g in c.gates:
        if g.kind == MEASURE_Z:
            q = g.qubits[0]
            keep1 = (idx >> q) & 1 == 1
            p1 = np.sum(np.abs(states[:, keep1]) ** 2, axis=1)
            outcome = (rng.random(shots) < p1).astype(np.int8)
            zero_cols = np.where(outcome[:, None] == 1, ~keep1[None, :], keep1[None, :])
            states[zero_cols] = 0.0
            norms = np.sqrt(np.where(outcome == 1, p1, 1.0 - p1))
            states /= norms[:, None]
            mid.append(outcome)
            continue
        if g.kind == PREP_STATE:
            q = g.qubits[0]
            p1 = np.sum(np.abs(states[:, (idx >> q) & 1 == 1]) ** 2, axis=1)
            ones = np.flatnonzero(p1 > 0.5)
            if ones.size:
                _rows_apply_1q(states, ones, _FIXED_1Q[X], q)
            for kind in _PREP_OPS[g.prep]:
                _rows_apply_1q(states, all_rows, _FIXED_1Q[kind], q)
            continue

        # unitary gate on all shots
        if g.kind in ONE_QUBIT_GATES:
            _rows_apply_1q(states, all_rows, gate_matrix_1q(g), g.qubits[0])
        elif g.kind in (CZ, CP):
            a, b = g.qubits
            phase = -1.0 + 0.0j if g.kind == CZ else complex(math.cos(g.angle), math.sin(g.angle))
            sel = ((idx >> a) & 1 == 1) & ((idx >> b) & 1 == 1)
            states[:, sel] *= phase
        elif g.kind == CX:
            ctl, tgt = g.qubits
            sel = idx[((idx >> ctl) & 1 == 1) & ((idx >> tgt) & 1 == 0)]
            other = sel | (1 << tgt)
            states[:, sel], states[:, other] = states[:, other].copy(), states[:, sel].copy()
        elif g.kind == SWAP:
            a, b = g.qubits
            sel = idx[((idx >> a) & 1 == 1) & ((idx >> b) & 1 == 0)]
            other = (sel & ~(1 << a)) | (1 << b)
            states[:, sel], states[:, other] = states[:, other].copy(), states[:, sel].copy()

        p = noise.gate_error(g)
        if p > 0.0:
            hit = np.flatnonzero(rng.random(shots) < p)
            if hit.size:
                for q in g.qubits:
                    codes = rng.integers(3, size=hit.size)
                    for code in range(3):
                        rows = hit[codes == code]
                        if rows.size:
                            _rows_apply_1q(states, rows, _PAULI_MATS[code], q)

    probs = np.abs(states) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    cdf = np.cumsum(probs, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(shots)
    bits = (cdf < u[:, None]).sum(axis=1).astype(np.int64)
    if noise.p_readout > 0.0:
        for q in range(n):
            flips = rng.random(shots) < noise.p_readout
            bits[flips] ^= np.int64(1 << q)
    mids = np.stack(mid, axis=1) if mid else np.zeros((shots, 0), dtype=np.int8)
    return bits, mids


def _fragment_shots_noiseless(c: Circuit, shots: int, rng: np.random.Generator):
    """Noiseless fast path: sample (mid outcomes, terminal bits) jointly from
    the exact branch distribution."""
    branches = simulate_branches(c)
    weights = []
    payload = []
    for br in branches:
        probs = np.abs(br.state) ** 2
        nz = np.flatnonzero(probs > _BRANCH_EPS)
        for k in nz:
            weights.append(br.probability * probs[k])
            payload.append((int(k), br.outcomes))
    weights = np.asarray(weights)
    weights /= weights.sum()
    picks = _sample_bits(weights, shots, rng)
    bits = np.array([payload[p][0] for p in picks], dtype=np.int64)
    n_mid = len(payload[0][1]) if payload else 0
    mids = np.array([payload[p][1] for p in picks], dtype=np.int8).reshape(shots, n_mid)
    return bits, mids


# --- counts-based expectation ----------------------------------------------

def expectation_from_counts(counts: Counts, obs) -> float:
    """Expectation of a Z/I-diagonal observable from Z-basis counts.

    ``obs`` is an Observable (weighted Pauli-string sum); any X or Y in a term
    raises BasisMismatchError -- callers rotate the basis first.
    """
    from .errors import BasisMismatchError, DimensionError

    total = counts.total_shots
    n = counts.n_qubits
    value = 0.0
    for term in obs.terms:
        if len(term.paulis) != n:
            raise DimensionError(
                f"term length {len(term.paulis)} != register width {n}")
        bad = set(term.paulis) - {"I", "Z"}
        if bad:
            raise BasisMismatchError(
                f"term {term.paulis} is not diagonal in the Z basis ({bad})")
        mask = sum(1 << i for i, p in enumerate(term.paulis) if p == "Z")
        acc = 0.0
        for key, cnt in counts.counts.items():
            b = int(key, 2)
            parity = bin(b & mask).count("1") & 1
            acc += (cnt / total) * (-1.0 if parity else 1.0)
        value += term.coefficient * acc
    return value
