"""Solution-quality metrics over a distribution of item-order bitstrings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .knapsack import OracleResult, index_to_bits


@dataclass(frozen=True)
class MetricSet:
    p_best: float
    feasibility_ratio: float
    avg_performance: float | None  # undefined when nothing fits


def p_best(dist: Mapping[str, float], oracle: OracleResult) -> float:
    """Probability mass on optimal feasible selections."""
    return float(sum(dist.get(x, 0.0) for x in oracle.best_solutions))


def feasibility_ratio(dist: Mapping[str, float], oracle: OracleResult) -> float:
    """Feasible mass normalised by the feasible fraction; 1 for the uniform distribution."""
    mass = sum(dist.get(x, 0.0) for x in oracle.feasible_set)
    return float(mass / len(oracle.feasible_set) * oracle.n_all)


def avg_performance(dist: Mapping[str, float], oracle: OracleResult) -> float | None:
    if oracle.best_value == 0:
        return None
    total = sum(dist.get(x, 0.0) * oracle.value_of[x] for x in oracle.feasible_set)
    return float(total / oracle.best_value)


def compute_metrics(dist: Mapping[str, float], oracle: OracleResult) -> MetricSet:
    return MetricSet(p_best(dist, oracle), feasibility_ratio(dist, oracle), avg_performance(dist, oracle))


def distribution_from_array(probs: np.ndarray, m: int) -> dict[str, float]:
    """Data-register probabilities (bit ``i`` = item ``i+1``) keyed in item order."""
    return {index_to_bits(i, m): float(p) for i, p in enumerate(probs)}


def uniform_distribution(m: int) -> dict[str, float]:
    return distribution_from_array(np.full(1 << m, 1.0 / (1 << m)), m)
