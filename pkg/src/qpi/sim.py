"""Dense state-vector circuit simulator.

Supports the gate set needed by the HHL and variational solvers: the
usual fixed single-qubit gates, rotations, CX/CZ/SWAP, controlled-phase,
arbitrary dense (controlled) unitaries, and whole Pauli strings as
single ops.  Qubit 0 is the least-significant bit of the amplitude
index; this is load-bearing for every bit-exact test.

Noise is the stochastic trajectory method: after each gate, every
touched qubit independently suffers a uniformly random X/Y/Z error with
the configured per-gate probability.  A trajectory is a pure state;
ensemble quantities come from averaging seeded trajectories.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import KERNELS
from .pauli import PauliString

NORM_TOL = 1e-10

_SQ2 = 1.0 / math.sqrt(2.0)
FIXED_1Q = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
}


def rotation_matrix(axis, theta):
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    if axis == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "rz":
        return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]],
                        dtype=complex)
    raise ValueError(axis)


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude vector length must be 2**n_qubits")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("state vector is not normalised")

    @classmethod
    def zero(cls, n_qubits):
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_vector(cls, vec):
        vec = np.asarray(vec, dtype=complex)
        nrm = np.linalg.norm(vec)
        if nrm == 0:
            raise ValueError("cannot normalise the zero vector")
        n = int(len(vec)).bit_length() - 1
        if len(vec) != 1 << n:
            raise ValueError("vector length must be a power of two")
        return cls(n, vec / nrm)

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class GateOp:
    name: str
    targets: tuple
    controls: tuple = ()
    matrix: np.ndarray = None
    param: float = None
    pauli: PauliString = None

    def touched(self):
        return self.targets + self.controls


@dataclass
class NoiseModel:
    """Per-gate depolarising strength: p1 for 1-qubit ops, p2 for wider ones."""

    p1: float = 0.0
    p2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (0 <= self.p1 <= 1 and 0 <= self.p2 <= 1):
            raise ValueError("noise probabilities must lie in [0, 1]")

    def rng(self):
        return np.random.default_rng(self.seed)


class Circuit:
    """Ordered gate list over a fixed register; builder methods chain."""

    def __init__(self, n_qubits):
        if n_qubits < 1:
            raise ValueError("need at least one qubit")
        self.n_qubits = n_qubits
        self.ops = []

    def _check(self, qubits):
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits}-qubit circuit")
        if len(set(qubits)) != len(qubits):
            raise ValueError("target/control qubits must be distinct")

    def append(self, op):
        self._check(op.touched())
        self.ops.append(op)
        return self

    def _g1(self, name, q, mat, param=None):
        return self.append(GateOp(name, (q,), matrix=mat, param=param))

    def h(self, q): return self._g1("h", q, FIXED_1Q["h"])
    def x(self, q): return self._g1("x", q, FIXED_1Q["x"])
    def y(self, q): return self._g1("y", q, FIXED_1Q["y"])
    def z(self, q): return self._g1("z", q, FIXED_1Q["z"])
    def s(self, q): return self._g1("s", q, FIXED_1Q["s"])
    def t(self, q): return self._g1("t", q, FIXED_1Q["t"])

    def rx(self, theta, q): return self._g1("rx", q, rotation_matrix("rx", theta), theta)
    def ry(self, theta, q): return self._g1("ry", q, rotation_matrix("ry", theta), theta)
    def rz(self, theta, q): return self._g1("rz", q, rotation_matrix("rz", theta), theta)

    def cx(self, control, target):
        return self.append(GateOp("cx", (target,), (control,)))

    def cz(self, q0, q1):
        return self.append(GateOp("cz", (q0, q1)))

    def swap(self, q0, q1):
        return self.append(GateOp("swap", (q0, q1)))

    def cphase(self, theta, q0, q1):
        return self.append(GateOp("cphase", (q0, q1), param=theta))

    def unitary(self, mat, targets, controls=(), name="unitary"):
        mat = np.ascontiguousarray(mat, dtype=complex)
        k = len(targets)
        if mat.shape != (1 << k, 1 << k):
            raise ValueError("matrix dimension does not match target count")
        if np.max(np.abs(mat @ np.conj(mat.T) - np.eye(1 << k))) > NORM_TOL:
            raise ValueError("custom matrix is not unitary")
        return self.append(GateOp(name, tuple(targets), tuple(controls), matrix=mat))

    def pauli_gate(self, pauli):
        if isinstance(pauli, str):
            pauli = PauliString(pauli)
        if pauli.n_qubits != self.n_qubits:
            raise ValueError("Pauli string length must equal circuit width")
        return self.append(GateOp("pauli", tuple(range(self.n_qubits)), pauli=pauli))

    def extend(self, other):
        if other.n_qubits != self.n_qubits:
            raise ValueError("circuit widths differ")
        for op in other.ops:
            self.ops.append(op)
        return self

    def __add__(self, other):
        out = Circuit(self.n_qubits)
        out.extend(self)
        out.extend(other)
        return out

    def __len__(self):
        return len(self.ops)

    def dump(self):
        """One line per gate, e.g. ``CZ 0 1`` or ``RY(0.5) 2``."""
        lines = []
        for op in self.ops:
            label = op.name.upper()
            if op.param is not None:
                label += f"({op.param:g})"
            if op.name == "pauli":
                lines.append(f"PAULI {op.pauli.ops}")
                continue
            qubits = " ".join(str(q) for q in op.controls + op.targets)
            lines.append(f"{label} {qubits}")
        return "\n".join(lines)


def _dense_plan(targets, controls):
    k = len(targets)
    offsets = np.zeros(1 << k, dtype=np.int64)
    for j in range(1 << k):
        off = 0
        for b in range(k):
            if (j >> b) & 1:
                off |= 1 << targets[b]
        offsets[j] = off
    tmask = 0
    for q in targets:
        tmask |= 1 << q
    cmask = 0
    for q in controls:
        cmask |= 1 << q
    return offsets, tmask, cmask


def _apply_op(amps, op, kernels):
    if op.name in ("cx",):
        return kernels.apply_cx(amps, op.controls[0], op.targets[0])
    if op.name == "cz":
        return kernels.apply_cphase(amps, op.targets[0], op.targets[1], -1.0 + 0.0j)
    if op.name == "cphase":
        return kernels.apply_cphase(amps, op.targets[0], op.targets[1],
                                    complex(np.exp(1j * op.param)))
    if op.name == "swap":
        return kernels.apply_swap(amps, op.targets[0], op.targets[1])
    if op.name == "pauli":
        flip, phasem, iy = op.pauli.masks()
        return kernels.apply_pauli(amps, flip, phasem, iy)
    if op.matrix is not None and len(op.targets) == 1 and not op.controls:
        return kernels.apply_1q(amps, op.matrix, op.targets[0])
    offsets, tmask, cmask = _dense_plan(op.targets, op.controls)
    return kernels.apply_dense(amps, op.matrix, offsets, tmask, cmask)


_PAULI_ERRORS = tuple(FIXED_1Q[g] for g in ("x", "y", "z"))


def apply_circuit(state, circuit, noise=None, rng=None):
    """Run the circuit; with a NoiseModel, inject trajectory Pauli errors.

    ``rng`` overrides the generator derived from ``noise.seed`` so that
    callers averaging many trajectories can feed per-trajectory streams.
    """
    if state.n_qubits != circuit.n_qubits:
        raise ValueError("state and circuit qubit counts differ")
    if noise is not None and rng is None:
        rng = noise.rng()
    amps = state.amplitudes.copy()
    for op in circuit.ops:
        amps = _apply_op(amps, op, KERNELS)
        if noise is not None:
            touched = op.touched()
            p = noise.p1 if len(touched) == 1 else noise.p2
            if p > 0.0:
                for q in touched:
                    if rng.random() < p:
                        amps = KERNELS.apply_1q(amps, _PAULI_ERRORS[rng.integers(3)], q)
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1.0) > NORM_TOL:
        raise ArithmeticError(f"norm drifted to {nrm!r} during circuit application")
    return StateVector(circuit.n_qubits, amps)


def expectation_pauli(state, pauli):
    """<psi|P|psi>, guaranteed real for a Pauli observable."""
    if isinstance(pauli, str):
        pauli = PauliString(pauli)
    if pauli.n_qubits != state.n_qubits:
        raise ValueError("Pauli string length must equal state width")
    flip, phasem, iy = pauli.masks()
    val = KERNELS.expect_pauli(state.amplitudes, flip, phasem, iy)
    if abs(val.imag) > NORM_TOL:
        raise ArithmeticError(f"non-real Pauli expectation {val!r}")
    return float(val.real)


def sample_measurement(state, qubits, shots, seed=0):
    """Multinomial samples of the marginal over ``qubits`` (seed-deterministic).

    Keys are bitstrings with the last listed qubit leftmost, so
    ``qubits=[0, 1]`` reads naturally as |q1 q0>.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise IndexError(f"qubit {q} out of range")
    if len(set(qubits)) != len(qubits):
        raise ValueError("qubits must be distinct")
    width = len(qubits)
    marg = np.zeros(1 << width)
    flat = state.probabilities()
    idx = np.arange(flat.shape[0])
    key = np.zeros_like(idx)
    for k, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << k
    np.add.at(marg, key, flat)
    marg /= marg.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, marg)
    out = {}
    for val, c in enumerate(counts):
        if c:
            out[format(val, f"0{width}b")] = int(c)
    return out


def fidelity(state_a, state_b):
    """|<a|b>|^2 for pure states of equal width."""
    if state_a.n_qubits != state_b.n_qubits:
        raise ValueError("qubit counts differ")
    return float(abs(np.vdot(state_a.amplitudes, state_b.amplitudes)) ** 2)
