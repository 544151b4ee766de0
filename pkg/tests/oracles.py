"""Independent reference implementations used as test oracles.

Deliberately avoids the package's kernels: gates are applied by reshaping the
state into a rank-n tensor and contracting dense matrices with einsum, so a
bug in the bitwise kernels cannot hide in both implementations.
"""
import math

import numpy as np

SQ = 1.0 / math.sqrt(2.0)
I2 = np.eye(2, dtype=complex)
XM = np.array([[0, 1], [1, 0]], dtype=complex)
YM = np.array([[0, -1j], [1j, 0]], dtype=complex)
ZM = np.array([[1, 0], [0, -1]], dtype=complex)
HM = np.array([[SQ, SQ], [SQ, -SQ]], dtype=complex)
SM = np.array([[1, 0], [0, 1j]], dtype=complex)
SDGM = SM.conj().T
TM = np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)

PAULI = {"I": I2, "X": XM, "Y": YM, "Z": ZM}

PREP_VECS = {
    "Zero": np.array([1, 0], dtype=complex),
    "One": np.array([0, 1], dtype=complex),
    "Plus": np.array([1, 1], dtype=complex) * SQ,
    "Minus": np.array([1, -1], dtype=complex) * SQ,
    "PlusI": np.array([1, 1j], dtype=complex) * SQ,
    "MinusI": np.array([1, -1j], dtype=complex) * SQ,
}


def mat_1q(gate):
    fixed = {"H": HM, "X": XM, "Y": YM, "Z": ZM, "S": SM, "Sdg": SDGM, "T": TM}
    if gate.kind in fixed:
        return fixed[gate.kind]
    t = gate.angle
    c, s = math.cos(t / 2), math.sin(t / 2)
    if gate.kind == "Rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if gate.kind == "Ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if gate.kind == "Rz":
        return np.array([[np.exp(-1j * t / 2), 0], [0, np.exp(1j * t / 2)]],
                        dtype=complex)
    raise ValueError(gate.kind)


def mat_2q(gate):
    # basis order |q_b q_a> for qubits (a, b) = gate.qubits, a varying fastest
    if gate.kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if gate.kind == "CP":
        return np.diag([1, 1, 1, np.exp(1j * gate.angle)]).astype(complex)
    if gate.kind == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0],
                         [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    if gate.kind == "CX":
        # control = qubits[0] = low tensor bit
        return np.array([[1, 0, 0, 0], [0, 0, 0, 1],
                         [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
    raise ValueError(gate.kind)


def _apply(t, mat, axes):
    # tensor axis q = qubit q throughout
    k = len(axes)
    mat_t = mat.reshape((2,) * (2 * k))
    out = np.tensordot(mat_t, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _flatten(t, n):
    # little-endian: qubit 0 must be the fastest (last) axis in C order
    return t.transpose(tuple(range(n - 1, -1, -1))).reshape(-1)


def ref_state(circuit):
    """Reference statevector (little-endian), for measurement-free circuits."""
    n = circuit.n_qubits
    t = np.zeros((2,) * n, dtype=complex)
    t[(0,) * n] = 1.0
    for g in circuit.gates:
        if g.kind == "PrepState":
            # only valid on fresh qubits here: maps |0> to the named state
            vec = PREP_VECS[g.prep]
            t = _apply(t, np.outer(vec, np.array([1, 0], dtype=complex)),
                       g.qubits)
        elif len(g.qubits) == 1:
            t = _apply(t, mat_1q(g), g.qubits)
        else:
            # mat_2q basis index = 2*b + a; reshape to (b_out, a_out, b_in,
            # a_in) then reorder to (a_out, b_out, a_in, b_in)
            m = mat_2q(g).reshape(2, 2, 2, 2).transpose(1, 0, 3, 2)
            t = _apply(t, m.reshape(4, 4), g.qubits)
    return _flatten(t, n)


def ref_expectation(circuit, paulis, coeff=1.0):
    n = circuit.n_qubits
    state = ref_state(circuit)
    t = state.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1)))
    for q, p in enumerate(paulis):
        if p != "I":
            t = _apply(t, PAULI[p], (q,))
    return coeff * float(np.vdot(state, _flatten(t, n)).real)


# --- superoperator oracle for QPD bases ------------------------------------

def frag_kraus(ops):
    """Signed Kraus branches of a 1-qubit fragment.

    ops use the package's fragment encoding: ("gate", kind), ("measure",
    signed), ("prep", state).  Measurement branches split into P0/P1; a
    signed measurement flips the sign of the P1 branch.  A prep op replaces
    the state: K -> |s><0| style composition handled by the caller for wire
    cuts (preps only appear alone on the right side of wire terms).
    """
    from cutbench.circuit import Gate

    branches = [(1.0, I2.copy())]
    for op in ops:
        if op[0] == "gate":
            m = mat_1q(Gate(op[1], (0,)))
            branches = [(s, m @ K) for s, K in branches]
        elif op[0] == "measure":
            lo = [(s, P0 @ K) for s, K in branches]
            hi = [((-s if op[1] else s), P1 @ K) for s, K in branches]
            branches = lo + hi
        else:
            raise ValueError("prep has no Kraus form here")
    return branches


def term_superop_2q(left_ops, right_ops):
    out = np.zeros((16, 16), dtype=complex)
    for sl, Kl in frag_kraus(left_ops):
        for sr, Kr in frag_kraus(right_ops):
            K = np.kron(Kl, Kr)
            out += sl * sr * np.kron(K, K.conj())
    return out


def unitary_superop(u):
    return np.kron(u, u.conj())


def wire_term_superop(left_ops, right_ops):
    """Superoperator of one wire-cut term: signed-measure functional on the
    input, tensored with preparation of the named state."""
    assert len(right_ops) == 1 and right_ops[0][0] == "prep"
    psi = PREP_VECS[right_ops[0][1]]
    prep_vec = np.kron(psi, psi.conj()).reshape(4, 1)
    func = np.zeros((1, 4), dtype=complex)
    for s, K in frag_kraus(left_ops):
        so = np.kron(K, K.conj())
        func += s * (so[0, :] + so[3, :]).reshape(1, 4)
    return prep_vec @ func
