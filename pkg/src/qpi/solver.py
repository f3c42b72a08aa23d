"""Policy iteration with pluggable policy-evaluation backends.

Each iteration solves (I - gamma P^pi) Q = r for the Q-vector of the
current policy and then improves greedily, with argmax ties broken
toward the smaller order quantity.  The evaluation step is the swap
point: an exact LU solve, the HHL simulation, or the variational solver
all satisfy the same contract (small residual), and any of them drives
the loop to the same fixed point on instances whose Q-gaps dominate the
evaluation error.

A Q-value iteration oracle is included for cross-validation; it never
shares code with the policy-iteration path.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .mdp import Policy, bellman_system_matrix

PIVOT_TOL = 1e-13
RESIDUAL_REL_TOL = 1e-9
MAX_VI_SWEEPS = 10 ** 6


class SingularMatrixError(RuntimeError):
    """LU elimination hit a negligible pivot (gamma >= 1 or corrupt input)."""


class EvaluatorError(RuntimeError):
    """A policy-evaluation backend failed; carries the iteration index."""

    def __init__(self, iteration, cause):
        super().__init__(f"policy evaluation failed at iteration {iteration}: {cause}")
        self.iteration = iteration
        self.cause = cause


class IterationCapError(RuntimeError):
    """Value iteration failed to contract within the sweep budget."""


def policy_evaluation_exact(B, r):
    """Solve B Q = r by dense LU with partial pivoting."""
    dense = B.to_dense()
    r = np.asarray(r, dtype=float)
    lu, piv = scipy.linalg.lu_factor(dense)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularMatrixError(
            f"pivot below {PIVOT_TOL}; system matrix is numerically singular")
    q = scipy.linalg.lu_solve((lu, piv), r)
    residual = np.max(np.abs(dense @ q - r))
    if residual > RESIDUAL_REL_TOL * (1.0 + np.max(np.abs(r))):
        raise SingularMatrixError(f"solve residual {residual:.3e} out of contract")
    return q


def policy_improvement(q, mdp):
    """Greedy policy from a Q-vector; ties go to the smallest action index."""
    q = np.asarray(q, dtype=float)
    if q.shape != (mdp.n_pairs,) or not np.all(np.isfinite(q)):
        raise ValueError("Q-vector must be finite with one entry per state-action pair")
    table = q.reshape(mdp.n_states, mdp.n_actions)
    return Policy(np.argmax(table, axis=1))


class ExactEvaluator:
    """Direct LU policy evaluation."""

    name = "exact"

    def solve(self, B, r):
        return policy_evaluation_exact(B, r)


@dataclass
class HhlEvaluator:
    """Policy evaluation through the simulated HHL pipeline."""

    n_clock: int = 6
    evolution_time: float = None
    rotation_constant: float = None

    name = "hhl"

    def solve(self, B, r):
        from .hhl import HhlConfig, hhl_solve
        from .pauli import hermitian_embed
        system = hermitian_embed(B, r)
        cfg = HhlConfig(n_clock=self.n_clock, evolution_time=self.evolution_time,
                        rotation_constant=self.rotation_constant)
        q, _report = hhl_solve(system, cfg)
        return q


@dataclass
class VqlsEvaluator:
    """Policy evaluation through the variational solver (desk-scale systems).

    Uses the full (untruncated) Pauli decomposition of the embedded
    matrix and restarts from fresh seeded parameters when a descent run
    stalls above the target cost.
    """

    n_layers: int = 5
    learning_rate: float = 0.5
    max_iters: int = 2000
    target_cost: float = 1e-10
    seed: int = 1
    restarts: int = 5

    name = "vqls"

    def solve(self, B, r):
        from .pauli import hermitian_embed, lcu_decompose
        from .vqls import AnsatzConfig, VqlsConfig, vqls_solve
        system = hermitian_embed(B, r)
        lcu = lcu_decompose(system)
        best = None
        for attempt in range(self.restarts):
            cfg = VqlsConfig(learning_rate=self.learning_rate, max_iters=self.max_iters,
                             target_cost=self.target_cost, seed=self.seed + attempt)
            ansatz = AnsatzConfig(n_qubits=system.n_qubits, n_layers=self.n_layers)
            x, trace = vqls_solve(lcu, system.rhs, ansatz, cfg)
            if best is None or trace.final_cost < best[1]:
                best = (x, trace.final_cost)
            if best[1] <= self.target_cost:
                break
        return system.extract_solution(best[0])


@dataclass
class PiIteration:
    k: int
    policy: np.ndarray
    q: np.ndarray
    residual: float
    changed_states: int

    def record(self):
        return {
            "k": self.k,
            "policy": [int(a) for a in self.policy],
            "residual": self.residual,
            "changed_states": self.changed_states,
        }


@dataclass
class PiTrace:
    iterations: list = field(default_factory=list)
    wall_time: float = 0.0
    converged: bool = False

    def jsonl_lines(self):
        for it in self.iterations:
            yield json.dumps(it.record(), sort_keys=True)


def policy_iteration(mdp, gamma, max_iters=20, evaluator=None):
    """Alternate evaluation and greedy improvement from the zero-order policy.

    Stops early once the policy repeats (it is then a fixed point and
    further sweeps cannot change it), still capped at ``max_iters``.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    evaluator = evaluator or ExactEvaluator()
    policy = Policy.zero(mdp.n_states)
    trace = PiTrace()
    start = time.perf_counter()
    for k in range(max_iters):
        B = bellman_system_matrix(mdp, policy, gamma)
        try:
            q = evaluator.solve(B, mdp.reward)
        except Exception as exc:
            raise EvaluatorError(k, exc) from exc
        residual = float(np.max(np.abs(B.matvec(q) - mdp.reward)))
        new_policy = policy_improvement(q, mdp)
        changed = int(np.count_nonzero(new_policy.actions != policy.actions))
        trace.iterations.append(PiIteration(k, new_policy.actions.copy(), q, residual, changed))
        if changed == 0:
            trace.converged = True
            break
        policy = new_policy
    trace.wall_time = time.perf_counter() - start
    return policy, trace


def value_iteration_oracle(mdp, gamma, tol=1e-10):
    """Q-value iteration to the Bellman-optimality fixed point.

    Sweeps until the sup-norm update drops below tol*(1-gamma)/(2*gamma)
    (plain tol when gamma = 0), then extracts the greedy policy with the
    same tie-break as policy improvement.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    threshold = tol if gamma == 0 else tol * (1.0 - gamma) / (2.0 * gamma)
    kernel = mdp.kernel
    q = np.zeros(mdp.n_pairs)
    for _sweep in range(MAX_VI_SWEEPS):
        v = q.reshape(mdp.n_states, mdp.n_actions).max(axis=1)
        q_next = mdp.reward + gamma * kernel.matvec(v)
        delta = np.max(np.abs(q_next - q))
        q = q_next
        if delta < threshold:
            return q, policy_improvement(q, mdp)
    raise IterationCapError(f"no contraction below {threshold:.3e} in {MAX_VI_SWEEPS} sweeps")
