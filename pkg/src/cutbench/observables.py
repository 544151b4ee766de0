"""Pauli-string observables, the two benchmark observable families, and
measurement-basis pre-rotation.

Pauli strings are little-endian like everything else: character i acts on
qubit i, so "XI" is X on qubit 0.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import kernels
from .circuit import Circuit, Gate, H, SDG
from .errors import DimensionError
from .simulator import StateVector, _FIXED_1Q

_PAULI_CODE = {"X": 0, "Y": 1, "Z": 2}


@dataclass(frozen=True)
class PauliString:
    paulis: str
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.paulis or set(self.paulis) - set("IXYZ"):
            raise ValueError(f"invalid Pauli string {self.paulis!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.paulis)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.paulis) if p != "I")


@dataclass(frozen=True)
class Observable:
    terms: tuple[PauliString, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Observable needs at least one term")
        lengths = {t.n_qubits for t in self.terms}
        if len(lengths) != 1:
            raise DimensionError(f"terms of mixed length: {sorted(lengths)}")

    @property
    def n_qubits(self) -> int:
        return self.terms[0].n_qubits


def z_magnetization(n: int) -> Observable:
    """Average of local Z operators, (1/n) sum_i Z_i."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    terms = []
    for i in range(n):
        paulis = "".join("Z" if j == i else "I" for j in range(n))
        terms.append(PauliString(paulis, 1.0 / n))
    return Observable(tuple(terms), name=f"z_magnetization_{n}")


def ghz_stabilizers(n: int) -> list[Observable]:
    """The n standard GHZ stabilizer generators: X^n and Z_i Z_{i+1}."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    obs = [Observable((PauliString("X" * n),), name="X" * n)]
    for i in range(n - 1):
        paulis = "".join("Z" if j in (i, i + 1) else "I" for j in range(n))
        obs.append(Observable((PauliString(paulis),), name=paulis))
    return obs


def apply_pauli_string(state: np.ndarray, paulis: str) -> None:
    for q, p in enumerate(paulis):
        if p == "I":
            continue
        m = _FIXED_1Q[{"X": "X", "Y": "Y", "Z": "Z"}[p]]
        kernels.apply_1q(state, m[0, 0], m[0, 1], m[1, 0], m[1, 1], q)


def ideal_expectation(state: StateVector, obs: Observable) -> float:
    """Exact <psi|O|psi>; the imaginary residue must vanish."""
    if obs.n_qubits != state.n_qubits:
        raise DimensionError(
            f"observable on {obs.n_qubits} qubits vs state on {state.n_qubits}")
    value = 0.0 + 0.0j
    for term in obs.terms:
        work = state.amplitudes.copy()
        apply_pauli_string(work, term.paulis)
        value += term.coefficient * np.vdot(state.amplitudes, work)
    assert abs(value.imag) < 1e-10, f"imaginary residue {value.imag}"
    return float(value.real)


def measurement_rotation(term: PauliString) -> Circuit:
    """Basis change mapping each X/Y factor of a term onto Z: X -> H, Y -> Sdg.H."""
    gates = []
    for q, p in enumerate(term.paulis):
        if p == "X":
            gates.append(Gate(H, (q,)))
        elif p == "Y":
            gates.append(Gate(SDG, (q,)))
            gates.append(Gate(H, (q,)))
    return Circuit(term.n_qubits, tuple(gates), name="rotation")


def measurement_basis(term: PauliString) -> str:
    """Per-qubit measurement basis a term needs, with I defaulting to Z."""
    return "".join("Z" if p == "I" else p for p in term.paulis)


def basis_rotation(basis: str) -> Circuit:
    return measurement_rotation(PauliString(basis.replace("Z", "I") or basis))


# --- compact text form: "0.5*ZI + 0.5*IZ" ----------------------------------

_TERM_RE = re.compile(r"^\s*(?:([+-]?[0-9.eE+-]+)\s*\*\s*)?([IXYZ]+)\s*$")


def observable_to_text(obs: Observable) -> str:
    parts = []
    for t in obs.terms:
        if t.coefficient == 1.0:
            parts.append(t.paulis)
        else:
            parts.append(f"{t.coefficient!r}*{t.paulis}")
    return " + ".join(parts)


def observable_from_text(text: str, name: str = "") -> Observable:
    terms = []
    for chunk in text.split(" + "):
        m = _TERM_RE.match(chunk)
        if not m:
            raise ValueError(f"cannot parse observable term {chunk!r}")
        coeff = float(m.group(1)) if m.group(1) else 1.0
        terms.append(PauliString(m.group(2), coeff))
    return Observable(tuple(terms), name=name)
