"""Circuit programs: composition, inversion, CNOT-basis decomposition, resources."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .sim import GateOp, QuantumState, apply_gate, basis_state, measure_and_reset


class CircuitError(Exception):
    pass


@dataclass(frozen=True)
class RegisterLayout:
    """Named spans of a register.  ``data`` and ``ancilla`` are half-open."""

    data: tuple[int, int]
    ancilla: tuple[int, int] | None = None
    flag: int | None = None

    def __post_init__(self):
        spans = [set(range(*self.data))]
        if self.ancilla is not None:
            spans.append(set(range(*self.ancilla)))
        if self.flag is not None:
            spans.append({self.flag})
        seen: set[int] = set()
        for s in spans:
            if seen & s:
                raise CircuitError(f"overlapping register spans in {self}")
            seen |= s

    @property
    def data_qubits(self) -> list[int]:
        return list(range(*self.data))

    @property
    def ancilla_qubits(self) -> list[int]:
        return list(range(*self.ancilla)) if self.ancilla else []

    @property
    def n_data(self) -> int:
        return self.data[1] - self.data[0]

    @property
    def n_ancilla(self) -> int:
        """Ancilla count including the flag qubit."""
        return len(self.ancilla_qubits) + (self.flag is not None)

    @property
    def declared(self) -> int:
        return self.n_data + self.n_ancilla


@dataclass(frozen=True)
class CircuitProgram:
    n_qubits: int
    ops: tuple[GateOp, ...] = ()
    layout: RegisterLayout | None = None
    blocks: tuple[str, ...] = ()
    n_layers: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.layout is None:
            object.__setattr__(self, "layout", RegisterLayout((0, self.n_qubits)))
        if self.layout.declared > self.n_qubits:
            raise CircuitError("register layout declares more qubits than the circuit has")
        for op in self.ops:
            for q in op.targets:
                if not 0 <= q < self.n_qubits:
                    raise CircuitError(f"{op} targets qubit outside [0, {self.n_qubits})")

    def __len__(self):
        return len(self.ops)

    def count(self, kind: str) -> int:
        return sum(op.kind == kind for op in self.ops)

    def dump(self) -> str:
        """Text listing, one op per line: ``kind targets [angle]``."""
        return "\n".join(str(op) for op in self.ops)


def program(n_qubits: int, ops: Iterable[GateOp], layout: RegisterLayout | None = None,
            block: str | None = None) -> CircuitProgram:
    return CircuitProgram(n_qubits, tuple(ops), layout, (block,) if block else ())


def empty_like(c: CircuitProgram) -> CircuitProgram:
    return CircuitProgram(c.n_qubits, (), c.layout)


def compose(a: CircuitProgram, b: CircuitProgram) -> CircuitProgram:
    if a.n_qubits != b.n_qubits or a.layout != b.layout:
        raise CircuitError("cannot compose circuits with different register layouts")
    return CircuitProgram(a.n_qubits, a.ops + b.ops, a.layout, a.blocks + b.blocks,
                          a.n_layers + b.n_layers)


def compose_all(first: CircuitProgram, *rest: CircuitProgram) -> CircuitProgram:
    out = first
    for c in rest:
        out = compose(out, c)
    return out


def _dagger_name(name: str) -> str:
    return name[:-3] if name.endswith("_dg") else name + "_dg"


def invert(c: CircuitProgram) -> CircuitProgram:
    if any(op.kind == "MeasureReset" for op in c.ops):
        raise CircuitError("circuit with MeasureReset is not invertible")
    ops = tuple(op.inverse() for op in reversed(c.ops))
    blocks = tuple(_dagger_name(b) for b in reversed(c.blocks))
    return CircuitProgram(c.n_qubits, ops, c.layout, blocks, c.n_layers)


def _decompose_op(op: GateOp) -> list[GateOp]:
    if op.kind == "CPhase":
        a, b = op.targets
        h = op.angle / 2
        return [
            GateOp("RZ", (a,), h),
            GateOp("CNOT", (a, b)),
            GateOp("RZ", (b,), -h),
            GateOp("CNOT", (a, b)),
            GateOp("RZ", (b,), h),
        ]
    if op.kind == "SWAP":
        a, b = op.targets
        return [GateOp("CNOT", (a, b)), GateOp("CNOT", (b, a)), GateOp("CNOT", (a, b))]
    return [op]


def decompose(c: CircuitProgram) -> CircuitProgram:
    """Rewrite into CNOT plus single-qubit gates (equal up to global phase)."""
    ops = tuple(g for op in c.ops for g in _decompose_op(op))
    return CircuitProgram(c.n_qubits, ops, c.layout, c.blocks, c.n_layers)


def depth(c: CircuitProgram) -> int:
    level = [0] * c.n_qubits
    for op in c.ops:
        d = max(level[q] for q in op.targets) + 1
        for q in op.targets:
            level[q] = d
    return max(level, default=0)


@dataclass(frozen=True)
class ResourceReport:
    n_data_qubits: int
    n_ancilla_qubits: int
    two_qubit_gates_per_layer: int
    single_qubit_gates_per_layer: int
    total_depth: int

    @property
    def n_qubits(self) -> int:
        return self.n_data_qubits + self.n_ancilla_qubits


def count_resources(c: CircuitProgram, layers: int = 1) -> ResourceReport:
    """Resource counts for one QAOA layer ``c`` repeated ``layers`` times."""
    d = decompose(c)
    two = sum(op.kind == "CNOT" for op in d.ops)
    one = sum(op.kind not in ("CNOT", "MeasureReset") for op in d.ops)
    return ResourceReport(
        n_data_qubits=c.layout.n_data,
        n_ancilla_qubits=c.layout.n_ancilla,
        two_qubit_gates_per_layer=two,
        single_qubit_gates_per_layer=one,
        total_depth=depth(d) * layers,
    )


def run(c: CircuitProgram, initial: QuantumState) -> QuantumState:
    if initial.n_qubits != c.n_qubits:
        raise CircuitError(f"state has {initial.n_qubits} qubits, circuit needs {c.n_qubits}")
    state = initial
    for op in c.ops:
        if op.kind == "MeasureReset":
            state = measure_and_reset(state, op.targets[0])
        else:
            state = apply_gate(state, op)
    return state


def unitary(c: CircuitProgram) -> np.ndarray:
    """Dense unitary of a measurement-free circuit (columns = basis inputs)."""
    dim = 1 << c.n_qubits
    cols = [run(c, basis_state(c.n_qubits, i)).data for i in range(dim)]
    return np.stack(cols, axis=1)


def single(n_qubits: int, kind: str, targets: Sequence[int], angle: float | None = None,
           layout: RegisterLayout | None = None) -> CircuitProgram:
    return CircuitProgram(n_qubits, (GateOp(kind, tuple(targets), angle),), layout)
