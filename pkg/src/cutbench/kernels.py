"""Statevector gate-application kernels.

Two interchangeable backends:

* numba ``@njit`` bitwise kernels (default) for the hot per-trajectory loops;
* a pure-numpy fallback, selected by setting ``CUTBENCH_NO_NUMBA=1`` in the
  environment (or automatically when numba is unavailable).

All kernels mutate ``state`` in place.  ``state`` is a 1-D complex128 array of
length 2**n with qubit q mapped to bit q of the index (little-endian).
``python -m cutbench.benchmark`` compares the two backends.
"""
from __future__ import annotations

import os

import numpy as np

_env_off = os.environ.get("CUTBENCH_NO_NUMBA", "").lower() in ("1", "true", "yes")
if not _env_off:
    try:
        from numba import njit
        USE_NUMBA = True
    except ImportError:  # pragma: no cover
        USE_NUMBA = False
else:
    USE_NUMBA = False


# --- numba backend ---------------------------------------------------------

def _apply_1q_loop(state, u00, u01, u10, u11, q):
    half = 1 << q
    dim = state.shape[0]
    for base in range(0, dim, half << 1):
        for k in range(base, base + half):
            a = state[k]
            b = state[k + half]
            state[k] = u00 * a + u01 * b
            state[k + half] = u10 * a + u11 * b


def _apply_cx_loop(state, c, t):
    cbit = 1 << c
    tbit = 1 << t
    dim = state.shape[0]
    for k in range(dim):
        if (k & cbit) and not (k & tbit):
            j = k | tbit
            tmp = state[k]
            state[k] = state[j]
            state[j] = tmp


def _apply_phase11_loop(state, a, b, phase):
    # multiply amplitudes with both bits set by `phase` (CZ: phase=-1, CP: e^{i t})
    abit = 1 << a
    bbit = 1 << b
    dim = state.shape[0]
    for k in range(dim):
        if (k & abit) and (k & bbit):
            state[k] = state[k] * phase


def _apply_swap_loop(state, a, b):
    abit = 1 << a
    bbit = 1 << b
    dim = state.shape[0]
    for k in range(dim):
        if (k & abit) and not (k & bbit):
            j = (k & ~abit) | bbit
            tmp = state[k]
            state[k] = state[j]
            state[j] = tmp


def _prob_one_loop(state, q):
    qbit = 1 << q
    total = 0.0
    for k in range(state.shape[0]):
        if k & qbit:
            total += state[k].real ** 2 + state[k].imag ** 2
    return total


def _collapse_loop(state, q, outcome, norm):
    qbit = 1 << q
    inv = 1.0 / norm
    for k in range(state.shape[0]):
        if ((k & qbit) != 0) != (outcome == 1):
            state[k] = 0.0
        else:
            state[k] = state[k] * inv


if USE_NUMBA:
    _sig_cache = dict(cache=True, fastmath=False)
    apply_1q = njit(**_sig_cache)(_apply_1q_loop)
    apply_cx = njit(**_sig_cache)(_apply_cx_loop)
    apply_phase11 = njit(**_sig_cache)(_apply_phase11_loop)
    apply_swap = njit(**_sig_cache)(_apply_swap_loop)
    prob_one = njit(**_sig_cache)(_prob_one_loop)
    collapse = njit(**_sig_cache)(_collapse_loop)
else:
    # --- numpy fallback ----------------------------------------------------

    def _bit_indices(dim: int, q: int) -> tuple[np.ndarray, np.ndarray]:
        idx = np.arange(dim)
        low = idx[(idx >> q) & 1 == 0]
        return low, low | (1 << q)

    def apply_1q(state, u00, u01, u10, u11, q):
        low, high = _bit_indices(state.shape[0], q)
        a = state[low].copy()
        b = state[high]
        state[low] = u00 * a + u01 * b
        state[high] = u10 * a + u11 * b

    def apply_cx(state, c, t):
        idx = np.arange(state.shape[0])
        sel = idx[((idx >> c) & 1 == 1) & ((idx >> t) & 1 == 0)]
        other = sel | (1 << t)
        state[sel], state[other] = state[other].copy(), state[sel].copy()

    def apply_phase11(state, a, b, phase):
        idx = np.arange(state.shape[0])
        sel = ((idx >> a) & 1 == 1) & ((idx >> b) & 1 == 1)
        state[sel] *= phase

    def apply_swap(state, a, b):
        idx = np.arange(state.shape[0])
        sel = idx[((idx >> a) & 1 == 1) & ((idx >> b) & 1 == 0)]
        other = (sel & ~(1 << a)) | (1 << b)
        state[sel], state[other] = state[other].copy(), state[sel].copy()

    def prob_one(state, q):
        idx = np.arange(state.shape[0])
        sel = (idx >> q) & 1 == 1
        return float(np.sum(np.abs(state[sel]) ** 2))

    def collapse(state, q, outcome, norm):
        idx = np.arange(state.shape[0])
        keep = ((idx >> q) & 1) == outcome
        state[~keep] = 0.0
        state[keep] /= norm


def warm_up() -> None:
    """Trigger JIT compilation of all kernels (no-op on the numpy backend)."""
    s = np.zeros(4, dtype=np.complex128)
    s[0] = 1.0
    apply_1q(s, 0.7071067811865476 + 0j, 0.7071067811865476 + 0j,
             0.7071067811865476 + 0j, -0.7071067811865476 + 0j, 0)
    apply_cx(s, 0, 1)
    apply_phase11(s, 0, 1, -1.0 + 0j)
    apply_swap(s, 0, 1)
    p = prob_one(s, 1)
    if p > 0:
        collapse(s, 1, 1, p ** 0.5)
