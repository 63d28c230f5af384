"""Fourier-space arithmetic blocks: QFT, weighted adder, comparator, penalty, uncompute.

Register spans are lists of qubits ordered least-significant first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import CircuitProgram, RegisterLayout, compose, compose_all, invert, program
from .knapsack import KnapsackInstance, weight_vector
from .sim import GateOp

PENAL_MODES = ("flat", "proportional")


@dataclass(frozen=True)
class RegisterPlan:
    """Data qubits ``[0, m)``, weight register ``[m, m+n)``, flag ``m+n``."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("register sizes must be positive")

    @classmethod
    def for_instance(cls, inst: KnapsackInstance) -> "RegisterPlan":
        return cls(inst.m, weight_register_size(inst.total_weight))

    @property
    def data(self) -> list[int]:
        return list(range(self.m))

    @property
    def weight_reg(self) -> list[int]:
        return list(range(self.m, self.m + self.n))

    @property
    def flag(self) -> int:
        return self.m + self.n

    @property
    def n_qubits(self) -> int:
        return self.m + self.n + 1

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout((0, self.m), (self.m, self.m + self.n), self.flag)

    def holds(self, total_weight: int) -> bool:
        return total_weight <= 1 << (self.n - 1)


def weight_register_size(total_weight: int) -> int:
    return math.ceil(math.log2(total_weight)) + 1 if total_weight > 1 else 1


def _wrap(theta: float) -> float:
    """Reduce to (-pi, pi]; returns 0.0 for multiples of 2*pi."""
    t = math.remainder(theta, 2 * math.pi)
    return 0.0 if abs(t) < 1e-15 else t


def qft_ops(reg: Sequence[int]) -> list[GateOp]:
    n = len(reg)
    ops = []
    for j in reversed(range(n)):
        ops.append(GateOp("H", (reg[j],)))
        for k in reversed(range(j)):
            ops.append(GateOp("CPhase", (reg[k], reg[j]), math.pi / (1 << (j - k))))
    for i in range(n // 2):
        ops.append(GateOp("SWAP", (reg[i], reg[n - 1 - i])))
    return ops


def qft(reg: Sequence[int], n_qubits: int | None = None, layout: RegisterLayout | None = None) -> CircuitProgram:
    """QFT with ``|y> -> sum_k exp(2 pi i y k / 2**n) |k> / sqrt(2**n)``."""
    if not reg:
        raise ValueError("empty register")
    n_qubits = n_qubits if n_qubits is not None else max(reg) + 1
    return program(n_qubits, qft_ops(reg), layout, "qft")


def _fourier_add_ops(k: int, reg: Sequence[int], control: int | None = None) -> list[GateOp]:
    # in the Fourier basis adding k is a phase 2 pi k 2^j / 2^n on qubit j
    n = len(reg)
    ops = []
    for j, q in enumerate(reg):
        theta = _wrap(2 * math.pi * k * (1 << j) / (1 << n))
        if theta == 0.0:
            continue
        if control is None:
            ops.append(GateOp("Phase", (q,), theta))
        else:
            ops.append(GateOp("CPhase", (control, q), theta))
    return ops


def add_constant(k: int, reg: Sequence[int], n_qubits: int | None = None,
                 layout: RegisterLayout | None = None) -> CircuitProgram:
    """``|y> -> |y + k mod 2**n>`` (no controls)."""
    n_qubits = n_qubits if n_qubits is not None else max(reg) + 1
    if k % (1 << len(reg)) == 0:
        return program(n_qubits, [], layout, "addc")
    f = qft(reg, n_qubits, layout)
    body = program(n_qubits, _fourier_add_ops(k, reg), layout)
    out = compose_all(f, body, invert(f))
    return CircuitProgram(n_qubits, out.ops, layout, ("addc",))


def adder(inst: KnapsackInstance, plan: RegisterPlan) -> CircuitProgram:
    """``ADD |x>|y> = |x>|y + Weight(x) mod 2**n>``."""
    f = qft(plan.weight_reg, plan.n_qubits, plan.layout)
    body = [op for i, w in enumerate(inst.weights) for op in _fourier_add_ops(w, plan.weight_reg, control=i)]
    ops = f.ops + tuple(body) + invert(f).ops
    return CircuitProgram(plan.n_qubits, ops, plan.layout, ("add",))


def test_block(W: int, plan: RegisterPlan) -> CircuitProgram:
    """Flip the flag iff the weight register holds a value above ``W``.

    Subtracting ``W + 1`` makes the sign bit 1 exactly for feasible weights;
    its complement is copied to the flag and the subtraction undone.  Legal
    register contents never exceed ``2**(n-1)``, so for ``W >= 2**(n-1)``
    nothing can violate the bound and the block is empty.
    """
    lay = plan.layout
    if W >= 1 << (plan.n - 1):
        return CircuitProgram(plan.n_qubits, (), lay, ("test",))
    msb = plan.weight_reg[-1]
    sub = add_constant(-(W + 1), plan.weight_reg, plan.n_qubits, lay)
    copy = program(plan.n_qubits, [GateOp("X", (msb,)), GateOp("CNOT", (msb, plan.flag)), GateOp("X", (msb,))], lay)
    out = compose_all(sub, copy, add_constant(W + 1, plan.weight_reg, plan.n_qubits, lay))
    return CircuitProgram(plan.n_qubits, out.ops, lay, ("test",))


test_block.__test__ = False  # keep pytest from collecting it


def penal_block(alpha: float, gamma: float, mode: str, plan: RegisterPlan, scale_by_gamma: bool = True) -> CircuitProgram:
    """Phase on flagged branches.

    ``flat``: phase ``-alpha*gamma`` when the flag is set.
    ``proportional``: phase ``-alpha*gamma*Weight(x)`` when the flag is set.
    With ``scale_by_gamma=False`` the angle is ``alpha`` itself.
    """
    angle = alpha * gamma if scale_by_gamma else alpha
    if mode == "flat":
        ops = [GateOp("Phase", (plan.flag,), -angle)]
    elif mode == "proportional":
        ops = [GateOp("CPhase", (plan.flag, q), -angle * (1 << j)) for j, q in enumerate(plan.weight_reg)]
    else:
        raise ValueError(f"unknown penal mode {mode!r}")
    return program(plan.n_qubits, ops, plan.layout, "penal")


def reinit_block(variant: str, inst: KnapsackInstance, W: int, plan: RegisterPlan) -> CircuitProgram:
    if variant == "dephasing":
        return compose(invert(test_block(W, plan)), invert(adder(inst, plan)))
    if variant == "zeno":
        return invert(adder(inst, plan))
    raise ValueError(f"unknown reinit variant {variant!r}")


def flag_truth_table(inst: KnapsackInstance) -> np.ndarray:
    """Expected flag per data basis index (1 = infeasible)."""
    return (weight_vector(inst) > inst.capacity).astype(int)
