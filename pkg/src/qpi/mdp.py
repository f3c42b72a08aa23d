"""Periodic-review inventory MDP with lost sales.

States are inventory levels 0..max_inventory, actions are order
quantities 0..max_order (no lead time).  Post-order inventory is capped
at max_inventory before demand hits, so the chain stays on the finite
state space; demand beyond stock is lost and all of that probability
mass piles onto inventory level 0.

State-action pairs are indexed state-major: pair = state * n_actions +
action.  That layout is shared by the reward vector, the Q-vectors and
the policy-conditioned transition matrix.
"""

from dataclasses import dataclass

import numpy as np

from .sparse import SparseMatrix

PROB_TOL = 1e-12


@dataclass(frozen=True)
class DemandDistribution:
    """PMF over demand values 0..D (contiguous support starting at 0)."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("demand PMF must be a non-empty vector")
        if np.any(p < 0):
            raise ValueError("demand probabilities must be non-negative")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"demand PMF must sum to 1, got {p.sum()!r}")
        if not np.any(p > 0):
            raise ValueError("demand PMF has empty support")

    @property
    def support_size(self):
        return len(self.probabilities)

    @property
    def max_demand(self):
        return len(self.probabilities) - 1

    @property
    def positive_atoms(self):
        """Number of demand values with non-zero probability."""
        return int(np.count_nonzero(self.probabilities))

    @classmethod
    def uniform(cls, max_demand):
        return cls(np.full(max_demand + 1, 1.0 / (max_demand + 1)))

    @classmethod
    def deterministic(cls, value):
        p = np.zeros(value + 1)
        p[value] = 1.0
        return cls(p)

    @classmethod
    def geometric(cls, ratio, max_demand):
        """Truncated geometric tail p_d ~ ratio^d, renormalised."""
        if not 0 < ratio < 1:
            raise ValueError("ratio must be in (0, 1)")
        p = ratio ** np.arange(max_demand + 1)
        return cls(p / p.sum())


@dataclass(frozen=True)
class InventoryParams:
    holding_cost: float
    lost_sales_cost: float
    gamma: float
    max_inventory: int
    max_order: int
    unit_order_cost: float = 0.0

    def __post_init__(self):
        if self.holding_cost < 0 or self.lost_sales_cost < 0 or self.unit_order_cost < 0:
            raise ValueError("costs must be non-negative")
        if not 0 < self.gamma < 1:
            raise ValueError("discount must lie in (0, 1)")
        if not self.max_inventory >= self.max_order >= 1:
            raise ValueError("require max_inventory >= max_order >= 1")


@dataclass(frozen=True)
class Policy:
    """Deterministic stationary policy: one order quantity per state."""

    actions: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.actions, dtype=np.int64)
        object.__setattr__(self, "actions", a)
        if a.ndim != 1 or np.any(a < 0):
            raise ValueError("policy must be a vector of action indices")

    def __len__(self):
        return len(self.actions)

    def __eq__(self, other):
        return isinstance(other, Policy) and np.array_equal(self.actions, other.actions)

    @classmethod
    def zero(cls, n_states):
        return cls(np.zeros(n_states, dtype=np.int64))

    @classmethod
    def order_up_to(cls, level, n_states, max_order):
        return cls(np.array([min(max(0, level - i), max_order) for i in range(n_states)]))


@dataclass(frozen=True)
class MdpInstance:
    params: InventoryParams
    demand: DemandDistribution
    n_states: int
    n_actions: int
    kernel: SparseMatrix         # (n_states*n_actions) x n_states
    reward: np.ndarray           # length n_states*n_actions, state-major

    @property
    def n_pairs(self):
        return self.n_states * self.n_actions

    def pair(self, state, action):
        return state * self.n_actions + action

    def validate_policy(self, policy):
        if len(policy) != self.n_states:
            raise ValueError("policy length must equal number of states")
        if np.any(policy.actions >= self.n_actions):
            raise ValueError("policy contains an out-of-range action")


def build_inventory_mdp(params, demand):
    """Assemble the transition kernel and expected one-period reward.

    For pair (i, j) the post-order level is y = min(i + j, max_inventory)
    and the next state is max(y - d, 0) with the demand probability p_d;
    demands d >= y all aggregate onto state 0.  The reward is the
    expected negative holding-plus-lost-sales cost minus the linear
    ordering cost.
    """
    nS = params.max_inventory + 1
    nA = params.max_order + 1
    n = nS * nA
    pmf = demand.probabilities
    rows, cols, vals = [], [], []
    reward = np.zeros(n)
    for i in range(nS):
        for j in range(nA):
            m = i * nA + j
            y = min(i + j, params.max_inventory)
            mass = {}
            exp_cost = 0.0
            for d, p in enumerate(pmf):
                if p == 0.0:
                    continue
                nxt = max(y - d, 0)
                mass[nxt] = mass.get(nxt, 0.0) + p
                exp_cost += p * (params.holding_cost * max(y - d, 0)
                                 + params.lost_sales_cost * max(d - y, 0))
            reward[m] = -exp_cost - params.unit_order_cost * j
            for nxt, p in mass.items():
                rows.append(m)
                cols.append(nxt)
                vals.append(p)
    kernel = SparseMatrix.from_triplets((n, nS), rows, cols, vals)
    sums = kernel.row_sums()
    if np.any(np.abs(sums - 1.0) > PROB_TOL):
        raise ValueError("transition kernel rows do not sum to 1")
    return MdpInstance(params, demand, nS, nA, kernel, reward)


def policy_transition_matrix(mdp, policy):
    """Transition matrix on state-action pairs under a deterministic policy.

    Entry ((i,j),(i',j')) = P(i'|i,j) when j' = policy(i'), else 0; each
    row therefore keeps the kernel's sparsity.
    """
    mdp.validate_policy(policy)
    n = mdp.n_pairs
    rows, cols, vals = [], [], []
    for m in range(n):
        next_states, probs = mdp.kernel.row(m)
        for ip, p in zip(next_states, probs):
            rows.append(m)
            cols.append(int(ip) * mdp.n_actions + int(policy.actions[ip]))
            vals.append(p)
    return SparseMatrix.from_triplets((n, n), rows, cols, vals)


def bellman_system_matrix(mdp, policy, gamma):
    """B = I - gamma * P^pi; strictly diagonally dominant, hence invertible."""
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    p_pi = policy_transition_matrix(mdp, policy)
    n = mdp.n_pairs
    rows, cols, vals = [], [], []
    for m in range(n):
        js, ps = p_pi.row(m)
        diag_done = False
        for jcol, p in zip(js, ps):
            if jcol == m:
                rows.append(m); cols.append(m); vals.append(1.0 - gamma * p)
                diag_done = True
            else:
                rows.append(m); cols.append(int(jcol)); vals.append(-gamma * p)
        if not diag_done:
            rows.append(m); cols.append(m); vals.append(1.0)
    return SparseMatrix.from_triplets((n, n), rows, cols, vals)


def sparsity_stats(matrix, mdp, with_diagonal=False):
    """Actual non-zero count against the demand-driven bound.

    The bound is (positive demand atoms) * n_pairs for a policy
    transition matrix, plus n_pairs diagonal slots when the matrix is a
    Bellman system matrix (``with_diagonal=True``).  Raises if the bound
    is violated, which would falsify the sparsity argument the quantum
    solvers rely on.
    """
    bound = mdp.demand.positive_atoms * mdp.n_pairs
    if with_diagonal:
        bound += mdp.n_pairs
    nnz = matrix.nnz
    if nnz > bound:
        raise ValueError(f"non-zero count {nnz} exceeds sparsity bound {bound}")
    return nnz, bound
