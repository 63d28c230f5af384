"""Penalty-dephasing and Zeno QAOA layers, and ansatz assembly for all methods."""

from __future__ import annotations

from dataclasses import dataclass

from .arithmetic import RegisterPlan, adder, penal_block, reinit_block, test_block
from .circuit import CircuitProgram, compose, compose_all, program
from .knapsack import KnapsackInstance
from .qubo import AnsatzParams, build_qubo, qubo_ansatz, qubo_layer, qubo_layout, x_mixer
from .sim import GateOp

METHODS = ("qubo", "dephasing", "zeno")


@dataclass(frozen=True)
class EncodingMethod:
    tag: str
    P: float = 10.0
    alpha: float = 10000.0
    penal_mode: str = "flat"
    penal_scaled: bool = True
    slack_convention: str = "exact"

    def __post_init__(self):
        if self.tag not in METHODS:
            raise ValueError(f"unknown method {self.tag!r}")

    def n_ancilla(self, inst: KnapsackInstance) -> int:
        if self.tag == "qubo":
            return build_qubo(inst, self.P, self.slack_convention).c
        return RegisterPlan.for_instance(inst).n + 1


def _as_layer(c: CircuitProgram) -> CircuitProgram:
    return CircuitProgram(c.n_qubits, c.ops, c.layout, c.blocks, 1)


def return_phase(inst: KnapsackInstance, gamma: float, plan: RegisterPlan | None = None) -> CircuitProgram:
    """``P_i(-gamma v_i)`` on each data qubit."""
    plan = plan or RegisterPlan.for_instance(inst)
    ops = [GateOp("Phase", (i,), -gamma * v) for i, v in enumerate(inst.values)]
    return program(plan.n_qubits, ops, plan.layout, "return")


def data_mixer(plan: RegisterPlan, beta: float) -> CircuitProgram:
    return x_mixer(plan.n_qubits, plan.data, beta, plan.layout)


def dephasing_layer(inst: KnapsackInstance, gamma: float, beta: float, alpha: float,
                    plan: RegisterPlan | None = None, penal_mode: str = "flat",
                    penal_scaled: bool = True) -> CircuitProgram:
    plan = plan or RegisterPlan.for_instance(inst)
    return _as_layer(compose_all(
        return_phase(inst, gamma, plan),
        adder(inst, plan),
        test_block(inst.capacity, plan),
        penal_block(alpha, gamma, penal_mode, plan, penal_scaled),
        reinit_block("dephasing", inst, inst.capacity, plan),
        data_mixer(plan, beta),
    ))


def zeno_layer(inst: KnapsackInstance, gamma: float, beta: float,
               plan: RegisterPlan | None = None) -> CircuitProgram:
    plan = plan or RegisterPlan.for_instance(inst)
    measure = program(plan.n_qubits, [GateOp("MeasureReset", (plan.flag,))], plan.layout, "measure")
    return _as_layer(compose_all(
        return_phase(inst, gamma, plan),
        adder(inst, plan),
        test_block(inst.capacity, plan),
        measure,
        reinit_block("zeno", inst, inst.capacity, plan),
        data_mixer(plan, beta),
    ))


def layer(inst: KnapsackInstance, method: EncodingMethod, gamma: float, beta: float) -> CircuitProgram:
    """One QAOA layer of ``method`` (used for resource counting)."""
    if method.tag == "qubo":
        return qubo_layer(build_qubo(inst, method.P, method.slack_convention), gamma, beta)
    if method.tag == "dephasing":
        return dephasing_layer(inst, gamma, beta, method.alpha, None, method.penal_mode, method.penal_scaled)
    return zeno_layer(inst, gamma, beta)


def build_ansatz(inst: KnapsackInstance, method: EncodingMethod, params: AnsatzParams) -> CircuitProgram:
    if method.tag == "qubo":
        return qubo_ansatz(inst, method.P, params, method.slack_convention)
    plan = RegisterPlan.for_instance(inst)
    out = program(plan.n_qubits, [GateOp("H", (q,)) for q in plan.data], plan.layout, "init")
    for g, b in zip(params.gammas, params.betas):
        if method.tag == "dephasing":
            lay = dephasing_layer(inst, g, b, method.alpha, plan, method.penal_mode, method.penal_scaled)
        else:
            lay = zeno_layer(inst, g, b, plan)
        out = compose(out, lay)
    return out


def ansatz_layout(inst: KnapsackInstance, method: EncodingMethod):
    if method.tag == "qubo":
        return qubo_layout(build_qubo(inst, method.P, method.slack_convention))
    return RegisterPlan.for_instance(inst).layout
