"""Constraint encodings for QAOA on the 0/1 knapsack problem.

Three ways of enforcing the capacity constraint are implemented on top of a
small in-repo simulator: a slack-bit QUBO penalty, an in-circuit penalty
phase computed by Fourier-space arithmetic, and repeated non-selective
measurement of a feasibility flag.
"""

from .encoders import METHODS, EncodingMethod
from .harness import ExperimentConfig, RunRecord, run_experiment
from .knapsack import KnapsackInstance, brute_force, generate
from .metrics import MetricSet, compute_metrics
from .optimizer import OptimizerOptions, make_objective, minimize, multistart
from .qubo import AnsatzParams, build_qubo

__version__ = "0.1.0"

__all__ = [
    "METHODS", "AnsatzParams", "EncodingMethod", "ExperimentConfig", "KnapsackInstance", "MetricSet",
    "OptimizerOptions", "RunRecord", "brute_force", "build_qubo", "compute_metrics", "generate",
    "make_objective", "minimize", "multistart", "run_experiment",
]
