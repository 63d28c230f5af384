"""Quadratization of the knapsack constraint into a QUBO / Ising cost.

Cost over data bits ``x`` and slack bits ``s``::

    f(x, s) = -sum v_i x_i + P (sum w_i x_i + sum a_k s_k - W)^2

Expanding the square with ``y_j**2 = y_j`` gives couplings ``Q``, fields
``B`` and a constant ``offset = P W^2``.  Two slack conventions exist:

``"exact"``    ``ceil(log2(W+1))`` bits of weight ``1, 2, 4, ...`` (every
               slack ``0..W`` representable; energy minima are knapsack optima)
``"shifted"``  ``ceil(log2 W) + 1`` bits of weight ``2, 4, 8, ...`` (odd
               deficits are not representable)
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import CircuitProgram, RegisterLayout, compose, program
from .knapsack import KnapsackInstance
from .sim import GateOp

SLACK_CONVENTIONS = ("exact", "shifted")


def slack_weights(W: int, convention: str = "exact") -> tuple[int, ...]:
    if convention == "exact":
        c = math.ceil(math.log2(W + 1))
        return tuple(1 << k for k in range(c))
    if convention == "shifted":
        c = math.ceil(math.log2(W)) + 1
        return tuple(1 << (k + 1) for k in range(c))
    raise ValueError(f"unknown slack convention {convention!r}")


@dataclass(frozen=True)
class IsingModel:
    m: int
    c: int
    P: float
    Q: np.ndarray  # strictly upper triangular, (m+c, m+c)
    B: np.ndarray
    offset: float
    slack_weights: tuple[int, ...]

    @property
    def n_vars(self) -> int:
        return self.m + self.c

    def couplings(self):
        """Nonzero ``(i, j, Q_ij)`` with ``i < j``."""
        n = self.n_vars
        return [(i, j, self.Q[i, j]) for i in range(n) for j in range(i + 1, n) if self.Q[i, j] != 0]


@dataclass(frozen=True)
class AnsatzParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas) or not self.gammas:
            raise ValueError("gammas and betas must be non-empty and of equal length")

    @property
    def p(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_vector(cls, theta: Sequence[float]) -> "AnsatzParams":
        theta = list(theta)
        if len(theta) % 2 or not theta:
            raise ValueError("parameter vector must have even, nonzero length")
        p = len(theta) // 2
        return cls(tuple(theta[:p]), tuple(theta[p:]))

    def to_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas)


def build_qubo(inst: KnapsackInstance, P: float, slack_convention: str = "exact") -> IsingModel:
    if P <= 0:
        raise ValueError("penalty P must be positive")
    sw = slack_weights(inst.capacity, slack_convention)
    a = list(inst.weights) + list(sw)
    n, W = len(a), inst.capacity
    Q = np.zeros((n, n))
    B = np.zeros(n)
    for i in range(n):
        B[i] = P * (a[i] * a[i] - 2 * W * a[i])
        for j in range(i + 1, n):
            Q[i, j] = 2 * P * a[i] * a[j]
    for i, v in enumerate(inst.values):
        B[i] -= v
    return IsingModel(inst.m, len(sw), P, Q, B, P * W * W, sw)


def qubo_cost(inst: KnapsackInstance, P: float, x: str, slack: str, weights: Sequence[int]) -> float:
    """Direct evaluation of the penalized cost (no Q/B expansion)."""
    value = sum(v for v, b in zip(inst.values, x) if b == "1")
    weight = sum(w for w, b in zip(inst.weights, x) if b == "1")
    s = sum(a for a, b in zip(weights, slack) if b == "1")
    return -value + P * (weight + s - inst.capacity) ** 2


def ising_energy(model: IsingModel, assignment: str) -> float:
    if len(assignment) != model.n_vars or set(assignment) - {"0", "1"}:
        raise ValueError(f"assignment must be a {model.n_vars}-bit string")
    on = [i for i, ch in enumerate(assignment) if ch == "1"]
    e = model.offset + sum(model.B[i] for i in on)
    e += sum(model.Q[i, j] for k, i in enumerate(on) for j in on[k + 1:])
    return float(e)


def energy_vector(model: IsingModel) -> np.ndarray:
    """Energy of every basis index; variable ``i`` is bit ``i`` of the index."""
    n = model.n_vars
    idx = np.arange(1 << n)
    bits = ((idx[:, None] >> np.arange(n)) & 1).astype(float)
    return model.offset + bits @ model.B + np.einsum("ki,ij,kj->k", bits, model.Q, bits)


def to_spin(model: IsingModel) -> tuple[np.ndarray, np.ndarray, float]:
    """Couplings ``J``, fields ``h`` and constant with ``x = (1 + z) / 2``."""
    Q, B = model.Q, model.B
    J = Q / 4
    h = B / 2 + (Q.sum(axis=1) + Q.sum(axis=0)) / 4
    const = model.offset + B.sum() / 2 + Q.sum() / 4
    return J, h, float(const)


def spin_energy(J: np.ndarray, h: np.ndarray, const: float, z: Sequence[int]) -> float:
    z = np.asarray(z, dtype=float)
    return float(const + h @ z + z @ J @ z)


def split_assignment(model: IsingModel, assignment: str) -> tuple[str, str]:
    return assignment[: model.m], assignment[model.m:]


# -- circuits ---------------------------------------------------------------

def qubo_layout(model: IsingModel) -> RegisterLayout:
    return RegisterLayout((0, model.m), (model.m, model.n_vars) if model.c else None)


def qubo_phase_block(model: IsingModel, gamma: float) -> CircuitProgram:
    """``exp(-i gamma (E - offset))`` as Phase/CPhase gates (diagonal)."""
    ops = [GateOp("Phase", (i,), -gamma * model.B[i]) for i in range(model.n_vars)]
    ops += [GateOp("CPhase", (i, j), -gamma * q) for i, j, q in model.couplings()]
    return program(model.n_vars, ops, qubo_layout(model), "cost")


def x_mixer(n_qubits: int, qubits: Sequence[int], beta: float, layout: RegisterLayout) -> CircuitProgram:
    """``exp(-i beta sum_i X_i)`` over ``qubits``."""
    return program(n_qubits, [GateOp("RX", (q,), 2 * beta) for q in qubits], layout, "mixer")


def qubo_layer(model: IsingModel, gamma: float, beta: float) -> CircuitProgram:
    layer = compose(qubo_phase_block(model, gamma),
                    x_mixer(model.n_vars, range(model.n_vars), beta, qubo_layout(model)))
    return CircuitProgram(layer.n_qubits, layer.ops, layer.layout, layer.blocks, 1)


def qubo_ansatz(inst: KnapsackInstance, P: float, params: AnsatzParams,
                slack_convention: str = "exact") -> CircuitProgram:
    model = build_qubo(inst, P, slack_convention)
    n = model.n_vars
    out = program(n, [GateOp("H", (q,)) for q in range(n)], qubo_layout(model), "init")
    for g, b in zip(params.gammas, params.betas):
        out = compose(out, qubo_layer(model, g, b))
    return out


# -- text export ------------------------------------------------------------

def dumps_model(model: IsingModel) -> str:
    lines = [f"{model.m} {model.c} {float(model.P)!r} {float(model.offset)!r}",
             "# slack_weights " + " ".join(map(str, model.slack_weights))]
    lines += [f"{i} {j} {float(q)!r}" for i, j, q in model.couplings()]
    lines += [f"{i} {float(model.B[i])!r}" for i in range(model.n_vars)]
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> IsingModel:
    rows = [ln for ln in text.splitlines() if ln.strip()]
    m, c = (int(t) for t in rows[0].split()[:2])
    P, offset = (float(t) for t in rows[0].split()[2:4])
    n = m + c
    Q, B = np.zeros((n, n)), np.zeros(n)
    sw = tuple(1 << k for k in range(c))
    for ln in rows[1:]:
        parts = ln.split()
        if parts[0] == "#":
            if parts[1] == "slack_weights":
                sw = tuple(int(t) for t in parts[2:])
            continue
        if len(parts) == 3:
            Q[int(parts[0]), int(parts[1])] = float(parts[2])
        elif len(parts) == 2:
            B[int(parts[0])] = float(parts[1])
        else:
            raise ValueError(f"bad model line {ln!r}")
    return IsingModel(m, c, P, Q, B, offset, sw)


def write_model(model: IsingModel, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_model(model))


def read_model(path: str | os.PathLike) -> IsingModel:
    with open(path) as fh:
        return loads_model(fh.read())
