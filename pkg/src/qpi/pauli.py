"""Pauli strings, Hermitian embedding and the Pauli-basis LCU decomposition.

A Hermitian matrix H on N qubits expands as H = sum_i a_i P_i over the
4^N Pauli strings, with real coefficients a_i = Tr(H P_i) / 2^N.  The
decomposition carries Parseval's identity sum_i a_i^2 * 2^N = ||H||_F^2,
which makes truncation errors exactly computable from the dropped
coefficients.

Non-Hermitian system matrices B are handled by the block embedding
[[0, B], [B^T, 0]] (padded to the next power of two), whose spectrum is
the +/- singular values of B and whose solution vector sits in the
second block.

String convention: ``ops[k]`` acts on qubit k, qubit 0 being the
least-significant bit of the amplitude index.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .sparse import SparseMatrix

_VALID = frozenset("IXYZ")

# single-qubit products sigma_a sigma_b = phase * sigma_c
_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis, e.g. ``PauliString("XZI")``."""

    ops: str

    def __post_init__(self):
        if not self.ops or not set(self.ops) <= _VALID:
            raise ValueError(f"invalid Pauli string {self.ops!r}")

    @property
    def n_qubits(self):
        return len(self.ops)

    @property
    def weight(self):
        return sum(1 for c in self.ops if c != "I")

    def masks(self):
        """(flip_mask, phase_mask, i**n_Y): P|b> = iy*(-1)^popcount(b & phase_mask) |b ^ flip_mask>."""
        flip = 0
        phase = 0
        ny = 0
        for k, c in enumerate(self.ops):
            if c in ("X", "Y"):
                flip |= 1 << k
            if c in ("Y", "Z"):
                phase |= 1 << k
            if c == "Y":
                ny += 1
        return flip, phase, 1j ** (ny % 4)

    def to_matrix(self):
        dim = 1 << self.n_qubits
        flip, phasem, iy = self.masks()
        b = np.arange(dim)
        sign = 1.0 - 2.0 * (np.bitwise_count(b & phasem) & 1)
        mat = np.zeros((dim, dim), dtype=complex)
        mat[b ^ flip, b] = iy * sign
        return mat

    def __mul__(self, other):
        """Product P * Q as (phase, PauliString); phase is a power of i."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        phase = 1 + 0j
        out = []
        for a, b in zip(self.ops, other.ops):
            ph, c = _MUL[(a, b)]
            phase *= ph
            out.append(c)
        return phase, PauliString("".join(out))

    def __str__(self):
        return self.ops


def all_pauli_strings(n_qubits):
    """All 4^n strings in lexicographic order (I < X < Y < Z)."""
    return [PauliString("".join(p)) for p in product("IXYZ", repeat=n_qubits)]


@dataclass(frozen=True)
class EmbeddedSystem:
    """Hermitian linear system of dimension 2^n_qubits with rhs.

    ``solution_slice`` marks where the original unknowns live inside the
    embedded solution vector; rows outside the embedded 2n block are
    identity-diagonal with zero rhs so the padding cannot perturb the
    solution or make the matrix singular.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    original_dim: int
    solution_slice: tuple

    def __post_init__(self):
        dim = self.matrix.shape[0]
        if self.matrix.shape != (dim, dim) or dim & (dim - 1) != 0:
            raise ValueError("matrix dimension must be a power of two")
        if not np.array_equal(self.matrix, np.conj(self.matrix.T)):
            raise ValueError("embedded matrix must be exactly Hermitian")
        if self.rhs.shape != (dim,):
            raise ValueError("rhs length must match matrix dimension")

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def n_qubits(self):
        return int(self.dim).bit_length() - 1

    @classmethod
    def from_hermitian(cls, matrix, rhs):
        """Wrap an already-Hermitian system; the whole vector is the solution."""
        matrix = np.asarray(matrix, dtype=float) if np.isrealobj(matrix) else np.asarray(matrix)
        rhs = np.asarray(rhs, dtype=float)
        return cls(matrix, rhs, matrix.shape[0], (0, matrix.shape[0]))

    def extract_solution(self, x):
        lo, hi = self.solution_slice
        return x[lo:hi]


def hermitian_embed(B, r):
    """Embed B q = r into the Hermitian block system [[0,B],[B^T,0]] (q,0)=(r,0).

    Pads to the next power of two with an identity diagonal and zero rhs.
    The embedded solution is (0, q, 0...) with q in ``solution_slice``.
    """
    dense = B.to_dense() if isinstance(B, SparseMatrix) else np.asarray(B, dtype=float)
    n = dense.shape[0]
    if dense.shape != (n, n):
        raise ValueError("B must be square")
    r = np.asarray(r, dtype=float)
    if r.shape != (n,):
        raise ValueError("rhs length must match B")
    dim = 1 << max(1, int(np.ceil(np.log2(2 * n))))
    H = np.zeros((dim, dim))
    H[:n, n:2 * n] = dense
    H[n:2 * n, :n] = dense.T
    for i in range(2 * n, dim):
        H[i, i] = 1.0
    rhs = np.zeros(dim)
    rhs[:n] = r
    return EmbeddedSystem(H, rhs, n, (n, 2 * n))


@dataclass(frozen=True)
class LcuDecomposition:
    """H = sum_i a_i P_i with real a_i, sorted by |a_i| descending."""

    n_qubits: int
    terms: tuple          # of (coefficient, PauliString)
    source_norm: float    # Frobenius norm of the decomposed matrix

    def __post_init__(self):
        seen = set()
        prev = np.inf
        for a, p in self.terms:
            if p.ops in seen:
                raise ValueError(f"duplicate Pauli string {p.ops}")
            seen.add(p.ops)
            if abs(a) > prev + 1e-15:
                raise ValueError("terms must be sorted by |coefficient| descending")
            prev = abs(a)

    def __len__(self):
        return len(self.terms)

    def coefficient_norm_sq(self):
        return sum(a * a for a, _ in self.terms)

    def reconstruct(self):
        dim = 1 << self.n_qubits
        H = np.zeros((dim, dim), dtype=complex)
        for a, p in self.terms:
            H += a * p.to_matrix()
        return H

    def apply(self, amps, kernels=None):
        """sum_i a_i P_i |psi> without materialising the dense matrix."""
        from ._kernels import KERNELS
        K = kernels or KERNELS
        out = np.zeros_like(amps)
        for a, p in self.terms:
            flip, phasem, iy = p.masks()
            out += a * K.apply_pauli(amps, flip, phasem, iy)
        return out


def lcu_decompose(H, drop_below=1e-12):
    """Pauli coefficients a_i = Tr(H P_i)/2^N for a Hermitian H.

    Accepts an EmbeddedSystem or a dense Hermitian matrix whose dimension
    is a power of two.  Coefficients below ``drop_below`` in magnitude are
    dropped; the survivors reproduce H to machine precision (Parseval).
    """
    mat = H.matrix if isinstance(H, EmbeddedSystem) else np.asarray(H)
    dim = mat.shape[0]
    if mat.shape != (dim, dim) or dim & (dim - 1) != 0 or dim < 2:
        raise ValueError("dimension must be a power of two, at least 2")
    if not np.allclose(mat, np.conj(mat.T), atol=1e-12):
        raise ValueError("matrix must be Hermitian")
    n = int(dim).bit_length() - 1
    b = np.arange(dim)
    terms = []
    for p in all_pauli_strings(n):
        flip, phasem, iy = p.masks()
        sign = 1.0 - 2.0 * (np.bitwise_count(b & phasem) & 1)
        # Tr(H P) = sum_b H[b, b^flip] * phase(b)
        a = complex(np.sum(mat[b, b ^ flip] * (iy * sign))) / dim
        if abs(a) <= drop_below:
            continue
        if abs(a.imag) > 1e-10:
            raise ValueError(f"non-real coefficient for {p.ops}: {a}")
        terms.append((a.real, p))
    terms.sort(key=lambda t: (-abs(t[0]), t[1].ops))
    return LcuDecomposition(n, tuple(terms), float(np.linalg.norm(mat)))


def lcu_truncate(lcu, keep):
    """Keep the ``keep`` largest-|a_i| terms (ties broken lexicographically).

    Returns (truncated decomposition, Frobenius truncation error).
    """
    if not 1 <= keep <= len(lcu.terms):
        raise ValueError(f"keep must be in [1, {len(lcu.terms)}], got {keep}")
    kept = lcu.terms[:keep]
    dropped_sq = sum(a * a for a, _ in lcu.terms[keep:])
    err = float(np.sqrt(dropped_sq * (1 << lcu.n_qubits)))
    return LcuDecomposition(lcu.n_qubits, kept, lcu.source_norm), err


def lcu_histogram(lcu):
    """(term index, coefficient) rows behind a coefficient-distribution plot."""
    return [(i, a) for i, (a, _) in enumerate(lcu.terms)]
