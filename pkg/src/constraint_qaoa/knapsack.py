"""0-1 knapsack instances, a seeded generator and an exhaustive oracle.

Bitstrings here are in *item order*: character ``i`` is item ``i + 1``.
On the quantum side item ``i`` lives on qubit ``i``, so a basis index maps
to an item string by reading its bits from the least significant upward
(:func:`index_to_bits` / :func:`bits_to_index`).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product

import numpy as np

MAX_BRUTE_FORCE_ITEMS = 24


@dataclass(frozen=True)
class KnapsackInstance:
    weights: tuple[int, ...]
    values: tuple[int, ...]
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.weights) != len(self.values) or not self.weights:
            raise ValueError("weights and values must be non-empty and of equal length")
        if min(self.weights) < 1 or min(self.values) < 1:
            raise ValueError("weights and values must be positive integers")
        if self.capacity < 2:
            raise ValueError("capacity must be >= 2")

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    @property
    def total_value(self) -> int:
        return sum(self.values)


@dataclass(frozen=True)
class OracleResult:
    best_value: int
    best_solutions: frozenset[str]
    feasible_set: frozenset[str]
    value_of: dict[str, int]
    weight_of: dict[str, int]

    @property
    def n_all(self) -> int:
        return len(self.value_of)


def index_to_bits(index: int, m: int) -> str:
    return "".join(str((index >> i) & 1) for i in range(m))


def bits_to_index(bits: str) -> int:
    return sum(1 << i for i, ch in enumerate(bits) if ch == "1")


def generate(seed: int, m: int, w_max: int = 10, v_max: int = 10, tightness: float = 0.5) -> KnapsackInstance:
    """Uniform integer weights/values; capacity is a fraction of the total weight."""
    if m < 1 or w_max < 1 or v_max < 1:
        raise ValueError("m, w_max and v_max must be >= 1")
    if not 0 < tightness <= 1:
        raise ValueError("tightness must be in (0, 1]")
    rng = np.random.default_rng(seed)
    w = rng.integers(1, w_max, size=m, endpoint=True)
    v = rng.integers(1, v_max, size=m, endpoint=True)
    W = max(2, int(np.floor(tightness * int(w.sum()))))
    return KnapsackInstance(tuple(w.tolist()), tuple(v.tolist()), W)


def evaluate(inst: KnapsackInstance, x: str) -> tuple[int, int, bool]:
    if len(x) != inst.m or set(x) - {"0", "1"}:
        raise ValueError(f"selection {x!r} is not a {inst.m}-bit string")
    value = sum(v for v, b in zip(inst.values, x) if b == "1")
    weight = sum(w for w, b in zip(inst.weights, x) if b == "1")
    return value, weight, weight <= inst.capacity


def brute_force(inst: KnapsackInstance) -> OracleResult:
    if inst.m > MAX_BRUTE_FORCE_ITEMS:
        raise ValueError(f"brute force limited to {MAX_BRUTE_FORCE_ITEMS} items, got {inst.m}")
    value_of, weight_of = {}, {}
    for bits in product("01", repeat=inst.m):
        x = "".join(bits)
        value_of[x], weight_of[x], _ = evaluate(inst, x)
    feasible = frozenset(x for x, w in weight_of.items() if w <= inst.capacity)
    best = max(value_of[x] for x in feasible)
    best_set = frozenset(x for x in feasible if value_of[x] == best)
    return OracleResult(best, best_set, feasible, value_of, weight_of)


def value_vector(inst: KnapsackInstance) -> np.ndarray:
    """Total value of every basis index over the data register."""
    idx = np.arange(1 << inst.m)
    return sum(((idx >> i) & 1) * v for i, v in enumerate(inst.values))


def weight_vector(inst: KnapsackInstance) -> np.ndarray:
    idx = np.arange(1 << inst.m)
    return sum(((idx >> i) & 1) * w for i, w in enumerate(inst.weights))


# -- text format: "m W" / weights / values ---------------------------------

def dumps(inst: KnapsackInstance) -> str:
    return (f"{inst.m} {inst.capacity}\n"
            f"{' '.join(map(str, inst.weights))}\n"
            f"{' '.join(map(str, inst.values))}\n")


def loads(text: str) -> KnapsackInstance:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) != 3 or len(lines[0]) != 2:
        raise ValueError("expected 3 lines: 'm W', weights, values")
    m, W = map(int, lines[0])
    w, v = [int(t) for t in lines[1]], [int(t) for t in lines[2]]
    if len(w) != m or len(v) != m:
        raise ValueError(f"header says {m} items, found {len(w)} weights and {len(v)} values")
    return KnapsackInstance(tuple(w), tuple(v), W)


def write(inst: KnapsackInstance, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(inst))


def read(path: str | os.PathLike) -> KnapsackInstance:
    with open(path) as fh:
        return loads(fh.read())
