"""Quantized policy iteration for inventory control.

Builds a lost-sales inventory MDP, runs policy iteration, and lets the
policy-evaluation linear solve go through an exact LU factorisation, a
simulated HHL pipeline, or a variational solver; also ships the
Pauli-term data-upload decomposition and closed-form QRAM feasibility
estimates.
"""

from ._kernels import BACKEND
from .mdp import (DemandDistribution, InventoryParams, MdpInstance, Policy,
                  bellman_system_matrix, build_inventory_mdp,
                  policy_transition_matrix, sparsity_stats)
from .pauli import (EmbeddedSystem, LcuDecomposition, PauliString,
                    hermitian_embed, lcu_decompose, lcu_histogram, lcu_truncate)
from .sim import (Circuit, GateOp, NoiseModel, StateVector, apply_circuit,
                  expectation_pauli, fidelity, sample_measurement)
from .solver import (ExactEvaluator, HhlEvaluator, PiTrace, VqlsEvaluator,
                     policy_evaluation_exact, policy_improvement,
                     policy_iteration, value_iteration_oracle)
from .sparse import SparseMatrix

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Circuit", "DemandDistribution", "EmbeddedSystem",
    "ExactEvaluator", "GateOp", "HhlEvaluator", "InventoryParams",
    "LcuDecomposition", "MdpInstance", "NoiseModel", "PauliString",
    "PiTrace", "Policy", "SparseMatrix", "StateVector", "VqlsEvaluator",
    "apply_circuit", "bellman_system_matrix", "build_inventory_mdp",
    "expectation_pauli", "fidelity", "hermitian_embed", "lcu_decompose",
    "lcu_histogram", "lcu_truncate", "policy_evaluation_exact",
    "policy_improvement", "policy_iteration", "policy_transition_matrix",
    "sample_measurement", "sparsity_stats", "value_iteration_oracle",
]
