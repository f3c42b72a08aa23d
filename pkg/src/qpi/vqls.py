"""Variational linear solver: layered Ry/CZ ansatz, measurement-style
global cost, plain gradient descent.

The cost for B x = r (B given as a Pauli-term decomposition) is

    C(theta) = 1 - |<r|B|x(theta)>|^2 / <x(theta)|B'B|x(theta)>,

assembled term by term from simulator Pauli expectations <x|P_i P_j|x>
and overlaps <r|P_i|x>, so the noisy path can estimate exactly the same
quantities from averaged trajectories.  C lies in [0, 1] and vanishes
iff B|x> is proportional to |r>.

Gradients: the numerator and denominator are both expectations of
Hermitian operators in |x(theta)>, so the exact parameter-shift rule
applies to each of them separately; the ratio's derivative is assembled
classically.  A central-finite-difference fallback is kept as the
independent cross-check.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._kernels import KERNELS
from .pauli import LcuDecomposition
from .sim import Circuit, NoiseModel, StateVector, apply_circuit

DENOMINATOR_FLOOR = 1e-12


class VqlsDivergenceError(RuntimeError):
    """Cost increased for too many consecutive iterations."""


class ZeroDenominatorError(ArithmeticError):
    """B|x(theta)> vanished; the decomposition is over-truncated."""


@dataclass
class AnsatzConfig:
    """Ry rotation layers interleaved with fixed linear-chain CZ layers.

    Parameter count is n_qubits * (n_layers + 1): one Ry column up
    front, then one per entangling layer.
    """

    n_qubits: int
    n_layers: int
    theta0: np.ndarray = None

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_layers < 0:
            raise ValueError("need n_qubits >= 1 and n_layers >= 0")
        if self.theta0 is not None:
            theta0 = np.asarray(self.theta0, dtype=float)
            if theta0.shape != (self.n_params,):
                raise ValueError(f"theta0 must have length {self.n_params}")
            self.theta0 = theta0

    @property
    def n_params(self):
        return self.n_qubits * (self.n_layers + 1)


@dataclass
class VqlsConfig:
    learning_rate: float = 1.0
    max_iters: int = 500
    gradient: str = "parameter_shift"   # or "finite_difference"
    fd_step: float = 1e-4
    target_cost: float = 1e-8
    seed: int = 1
    noise: NoiseModel = None
    trajectories: int = 20
    divergence_patience: int = 50

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.gradient not in ("parameter_shift", "finite_difference"):
            raise ValueError(f"unknown gradient method {self.gradient!r}")
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")


@dataclass
class TrainTrace:
    rows: list = field(default_factory=list)   # (iteration, cost, grad_norm)
    wall_time: float = 0.0
    final_theta: np.ndarray = None

    @property
    def final_cost(self):
        return self.rows[-1][1] if self.rows else math.nan

    @property
    def initial_cost(self):
        return self.rows[0][1] if self.rows else math.nan

    def csv_lines(self):
        yield "iter,cost,grad_norm"
        for it, c, g in self.rows:
            yield f"{it},{c!r},{g!r}"


def build_ansatz_circuit(cfg, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (cfg.n_params,):
        raise ValueError(f"expected {cfg.n_params} parameters, got {theta.shape}")
    cols = theta.reshape(cfg.n_layers + 1, cfg.n_qubits)
    circ = Circuit(cfg.n_qubits)
    for q in range(cfg.n_qubits):
        circ.ry(cols[0, q], q)
    for layer in range(cfg.n_layers):
        for q in range(cfg.n_qubits - 1):
            circ.cz(q, q + 1)
        for q in range(cfg.n_qubits):
            circ.ry(cols[layer + 1, q], q)
    return circ


def ansatz_state(cfg, theta, noise=None, rng=None):
    """|x(theta)> = U(theta)|0...0>."""
    circ = build_ansatz_circuit(cfg, theta)
    return apply_circuit(StateVector.zero(cfg.n_qubits), circ, noise=noise, rng=rng)


class _CostEngine:
    """Shared machinery for cost and gradient evaluations.

    Precomputes the Pauli products P_i P_j once; pairs whose product
    phase is purely imaginary cannot contribute to the (real)
    denominator and are skipped.
    """

    def __init__(self, lcu, r_state, ansatz_cfg, noise=None, trajectories=1):
        if not isinstance(lcu, LcuDecomposition):
            raise TypeError("lcu must be an LcuDecomposition")
        if r_state.n_qubits != lcu.n_qubits or ansatz_cfg.n_qubits != lcu.n_qubits:
            raise ValueError("qubit counts of lcu, rhs state and ansatz must agree")
        self.lcu = lcu
        self.r_amps = r_state.amplitudes
        self.cfg = ansatz_cfg
        self.noise = noise
        self.trajectories = trajectories if noise is not None else 1
        self.coeffs = np.array([a for a, _ in lcu.terms])
        self.term_masks = [p.masks() for _, p in lcu.terms]
        self.diag_weight = float(np.sum(self.coeffs ** 2))
        self.pairs = []
        for i in range(len(lcu.terms)):
            for j in range(i + 1, len(lcu.terms)):
                phase, prod = lcu.terms[i][1] * lcu.terms[j][1]
                if abs(phase.real) < 1e-15:
                    continue
                weight = 2.0 * self.coeffs[i] * self.coeffs[j] * phase.real
                self.pairs.append((weight, prod.masks()))

    def parts(self, theta, rng=None):
        """(|<r|B|x>|^2, <x|B'B|x>), trajectory-averaged when noisy."""
        overlap = 0.0 + 0.0j
        den = 0.0
        for _ in range(self.trajectories):
            x = ansatz_state(self.cfg, theta, noise=self.noise, rng=rng)
            amps = x.amplitudes
            for a, (flip, phasem, iy) in zip(self.coeffs, self.term_masks):
                overlap += a * np.vdot(self.r_amps, KERNELS.apply_pauli(amps, flip, phasem, iy))
            den += self.diag_weight
            for weight, (flip, phasem, iy) in self.pairs:
                val = KERNELS.expect_pauli(amps, flip, phasem, iy)
                den += weight * val.real
        overlap /= self.trajectories
        den /= self.trajectories
        if den < DENOMINATOR_FLOOR:
            raise ZeroDenominatorError(
                f"<x|B'B|x> = {den:.3e}; the truncated operator annihilates the ansatz state")
        return float(abs(overlap) ** 2), float(den)

    def cost(self, theta, rng=None):
        num, den = self.parts(theta, rng=rng)
        return 1.0 - num / den

    def gradient(self, theta, rng=None, method="parameter_shift", fd_step=1e-4,
                 base_parts=None):
        theta = np.asarray(theta, dtype=float)
        grad = np.zeros_like(theta)
        if method == "finite_difference":
            for k in range(len(theta)):
                shift = np.zeros_like(theta)
                shift[k] = fd_step
                grad[k] = (self.cost(theta + shift, rng=rng)
                           - self.cost(theta - shift, rng=rng)) / (2.0 * fd_step)
            return grad
        num0, den0 = base_parts if base_parts is not None else self.parts(theta, rng=rng)
        for k in range(len(theta)):
            shift = np.zeros_like(theta)
            shift[k] = math.pi / 2.0
            num_p, den_p = self.parts(theta + shift, rng=rng)
            num_m, den_m = self.parts(theta - shift, rng=rng)
            d_num = (num_p - num_m) / 2.0
            d_den = (den_p - den_m) / 2.0
            grad[k] = -(d_num * den0 - num0 * d_den) / den0 ** 2
        return grad


def vqls_cost(theta, lcu, r_state, ansatz_cfg, noise=None, trajectories=1, rng=None):
    engine = _CostEngine(lcu, r_state, ansatz_cfg, noise=noise, trajectories=trajectories)
    return engine.cost(np.asarray(theta, dtype=float), rng=rng)


def vqls_gradient(theta, lcu, r_state, ansatz_cfg, cfg=None, rng=None):
    cfg = cfg or VqlsConfig()
    engine = _CostEngine(lcu, r_state, ansatz_cfg, noise=cfg.noise,
                         trajectories=cfg.trajectories)
    return engine.gradient(np.asarray(theta, dtype=float), rng=rng,
                           method=cfg.gradient, fd_step=cfg.fd_step)


def _descend(cost_and_grad, theta, cfg):
    """Plain gradient descent with early stop and divergence detection."""
    trace = TrainTrace()
    start = time.perf_counter()
    streak = 0
    prev = math.inf
    for k in range(cfg.max_iters + 1):
        cost, grad = cost_and_grad(theta)
        trace.rows.append((k, cost, float(np.linalg.norm(grad))))
        if cost > prev:
            streak += 1
            if streak >= cfg.divergence_patience:
                raise VqlsDivergenceError(
                    f"cost increased for {streak} consecutive iterations at k={k}")
        else:
            streak = 0
        prev = cost
        if cost <= cfg.target_cost or k == cfg.max_iters:
            break
        theta = theta - cfg.learning_rate * grad
    trace.wall_time = time.perf_counter() - start
    trace.final_theta = theta
    return theta, trace


def vqls_solve(lcu, rhs, ansatz_cfg, cfg=None):
    """Gradient-descent solve of B x = rhs; returns (scaled solution, trace).

    The optimiser works on normalised states; the output amplitudes are
    rescaled by the least-squares factor <B x, rhs>/||B x||^2 so the
    caller receives an actual solution vector, not a ray.
    """
    cfg = cfg or VqlsConfig()
    rhs = np.asarray(rhs, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    if ansatz_cfg.theta0 is not None:
        theta = ansatz_cfg.theta0.copy()
    else:
        theta = rng.uniform(-math.pi, math.pi, ansatz_cfg.n_params)
    r_state = StateVector.from_vector(rhs.astype(complex))
    engine = _CostEngine(lcu, r_state, ansatz_cfg, noise=cfg.noise,
                         trajectories=cfg.trajectories)

    def cost_and_grad(th):
        parts = engine.parts(th, rng=rng)
        cost = 1.0 - parts[0] / parts[1]
        grad = engine.gradient(th, rng=rng, method=cfg.gradient,
                               fd_step=cfg.fd_step, base_parts=parts)
        return cost, grad

    theta, trace = _descend(cost_and_grad, theta, cfg)

    x = ansatz_state(ansatz_cfg, theta)
    bx = lcu.apply(x.amplitudes)
    norm_sq = float(np.real(np.vdot(bx, bx)))
    if norm_sq < DENOMINATOR_FLOOR:
        raise ZeroDenominatorError("B|x> vanished at the optimum")
    scale = np.vdot(bx, rhs.astype(complex)) / norm_sq
    solution = scale * x.amplitudes
    return np.real(solution), trace
