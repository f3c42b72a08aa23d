"""Hot state-vector kernels with a numba and a pure-numpy backend.

The numba path is the default; set ``QPI_PURE_NUMPY=1`` before importing
qpi to force the numpy fallback (also used automatically when numba is
not importable).  Both backends are importable side by side so
``benchmarks/bench_kernels.py`` can time them against each other.

Qubit convention: qubit 0 is the least-significant bit of the amplitude
index.  All kernels mutate ``amps`` in place except the Pauli apply,
which is a permutation and returns a fresh array.
"""

import os

import numpy as np

__all__ = ["BACKEND", "KERNELS", "NUMPY_KERNELS", "NUMBA_KERNELS"]


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _np_apply_1q(amps, mat, qubit):
    dim = amps.shape[0]
    step = 1 << qubit
    view = amps.reshape(dim >> (qubit + 1), 2, step)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    view[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1
    return amps


def _np_apply_cx(amps, control, target):
    idx = np.arange(amps.shape[0])
    sel = (((idx >> control) & 1) == 1) & (((idx >> target) & 1) == 0)
    i0 = idx[sel]
    i1 = i0 | (1 << target)
    amps[i0], amps[i1] = amps[i1].copy(), amps[i0].copy()
    return amps


def _np_apply_cphase(amps, q0, q1, phase):
    idx = np.arange(amps.shape[0])
    both = (((idx >> q0) & 1) == 1) & (((idx >> q1) & 1) == 1)
    amps[both] *= phase
    return amps


def _np_apply_swap(amps, q0, q1):
    idx = np.arange(amps.shape[0])
    sel = (((idx >> q0) & 1) == 1) & (((idx >> q1) & 1) == 0)
    i0 = idx[sel]
    i1 = (i0 ^ (1 << q0)) | (1 << q1)
    amps[i0], amps[i1] = amps[i1].copy(), amps[i0].copy()
    return amps


def _np_apply_dense(amps, mat, offsets, tmask, cmask):
    idx = np.arange(amps.shape[0])
    bases = idx[((idx & tmask) == 0) & ((idx & cmask) == cmask)]
    gather = bases[:, None] + offsets[None, :]
    amps[gather] = amps[gather] @ mat.T
    return amps


def _np_apply_pauli(amps, flip, phasem, iy):
    idx = np.arange(amps.shape[0])
    sign = 1.0 - 2.0 * (np.bitwise_count(idx & phasem) & 1)
    out = np.empty_like(amps)
    out[idx ^ flip] = (iy * sign) * amps
    return out


def _np_expect_pauli(amps, flip, phasem, iy):
    idx = np.arange(amps.shape[0])
    sign = 1.0 - 2.0 * (np.bitwise_count(idx & phasem) & 1)
    return complex(np.sum(np.conj(amps[idx ^ flip]) * (iy * sign) * amps))


class _KernelSet:
    def __init__(self, name, apply_1q, apply_cx, apply_cphase, apply_swap,
                 apply_dense, apply_pauli, expect_pauli):
        self.name = name
        self.apply_1q = apply_1q
        self.apply_cx = apply_cx
        self.apply_cphase = apply_cphase
        self.apply_swap = apply_swap
        self.apply_dense = apply_dense
        self.apply_pauli = apply_pauli
        self.expect_pauli = expect_pauli


NUMPY_KERNELS = _KernelSet(
    "numpy", _np_apply_1q, _np_apply_cx, _np_apply_cphase, _np_apply_swap,
    _np_apply_dense, _np_apply_pauli, _np_expect_pauli,
)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

def _build_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def apply_1q(amps, mat, qubit):
        dim = amps.shape[0]
        bit = 1 << qubit
        m00, m01 = mat[0, 0], mat[0, 1]
        m10, m11 = mat[1, 0], mat[1, 1]
        for i in range(dim):
            if i & bit == 0:
                j = i | bit
                a0 = amps[i]
                a1 = amps[j]
                amps[i] = m00 * a0 + m01 * a1
                amps[j] = m10 * a0 + m11 * a1
        return amps

    @njit(cache=True)
    def apply_cx(amps, control, target):
        dim = amps.shape[0]
        cbit = 1 << control
        tbit = 1 << target
        for i in range(dim):
            if i & cbit != 0 and i & tbit == 0:
                j = i | tbit
                amps[i], amps[j] = amps[j], amps[i]
        return amps

    @njit(cache=True)
    def apply_cphase(amps, q0, q1, phase):
        dim = amps.shape[0]
        mask = (1 << q0) | (1 << q1)
        for i in range(dim):
            if i & mask == mask:
                amps[i] *= phase
        return amps

    @njit(cache=True)
    def apply_swap(amps, q0, q1):
        dim = amps.shape[0]
        b0 = 1 << q0
        b1 = 1 << q1
        for i in range(dim):
            if i & b0 != 0 and i & b1 == 0:
                j = (i ^ b0) | b1
                amps[i], amps[j] = amps[j], amps[i]
        return amps

    @njit(cache=True)
    def apply_dense(amps, mat, offsets, tmask, cmask):
        dim = amps.shape[0]
        k = offsets.shape[0]
        tmp = np.empty(k, dtype=np.complex128)
        for base in range(dim):
            if base & tmask != 0 or (base & cmask) != cmask:
                continue
            for a in range(k):
                tmp[a] = amps[base + offsets[a]]
            for a in range(k):
                acc = 0.0 + 0.0j
                for c in range(k):
                    acc += mat[a, c] * tmp[c]
                amps[base + offsets[a]] = acc
        return amps

    @njit(cache=True, inline="always")
    def _parity(x):
        x ^= x >> 32
        x ^= x >> 16
        x ^= x >> 8
        x ^= x >> 4
        x ^= x >> 2
        x ^= x >> 1
        return x & 1

    @njit(cache=True)
    def apply_pauli(amps, flip, phasem, iy):
        dim = amps.shape[0]
        out = np.empty_like(amps)
        for b in range(dim):
            if _parity(b & phasem) == 1:
                out[b ^ flip] = -iy * amps[b]
            else:
                out[b ^ flip] = iy * amps[b]
        return out

    @njit(cache=True)
    def expect_pauli(amps, flip, phasem, iy):
        dim = amps.shape[0]
        acc = 0.0 + 0.0j
        for b in range(dim):
            if _parity(b & phasem) == 1:
                acc -= np.conj(amps[b ^ flip]) * amps[b]
            else:
                acc += np.conj(amps[b ^ flip]) * amps[b]
        return acc * iy

    return _KernelSet("numba", apply_1q, apply_cx, apply_cphase, apply_swap,
                      apply_dense, apply_pauli, expect_pauli)


def _want_numba():
    flag = os.environ.get("QPI_PURE_NUMPY", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


NUMBA_KERNELS = None
if _want_numba():
    try:
        NUMBA_KERNELS = _build_numba_kernels()
    except ImportError:
        NUMBA_KERNELS = None

KERNELS = NUMBA_KERNELS if NUMBA_KERNELS is not None else NUMPY_KERNELS
BACKEND = KERNELS.name
