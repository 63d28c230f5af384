import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constraint_qaoa import arithmetic as ar
from constraint_qaoa import sim
from constraint_qaoa.circuit import (CircuitError, CircuitProgram, RegisterLayout, compose, count_resources,
                                     decompose, invert, run, single, unitary)
from constraint_qaoa.encoders import EncodingMethod, layer
from constraint_qaoa.knapsack import KnapsackInstance
from constraint_qaoa.sim import GateOp

INSTANCE_A = KnapsackInstance((1, 2, 3), (6, 10, 12), 5)


def equal_up_to_phase(U, V, atol=1e-9):
    k = np.unravel_index(np.argmax(np.abs(V)), V.shape)
    phase = U[k] / V[k]
    return abs(abs(phase) - 1) < atol and np.allclose(U, phase * V, atol=atol)


def random_circuit(n, n_ops, seed):
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(n_ops):
        kind = rng.choice(["H", "X", "RX", "RZ", "Phase", "CNOT", "CPhase", "SWAP"])
        if kind in ("CNOT", "CPhase", "SWAP"):
            t = tuple(int(q) for q in rng.choice(n, 2, replace=False))
        else:
            t = (int(rng.integers(n)),)
        angle = float(rng.uniform(-np.pi, np.pi)) if kind in ("RX", "RZ", "Phase", "CPhase") else None
        ops.append(GateOp(kind, t, angle))
    return CircuitProgram(n, tuple(ops))


class TestCompose:
    def test_double_x_is_identity(self):
        x = single(1, "X", [0])
        assert np.allclose(unitary(compose(x, x)), np.eye(2))

    def test_empty_left_unit(self):
        c = random_circuit(3, 10, 0)
        assert compose(CircuitProgram(3), c) == c

    def test_layout_mismatch(self):
        a = CircuitProgram(3, (), RegisterLayout((0, 3)))
        b = CircuitProgram(3, (), RegisterLayout((0, 2), (2, 3)))
        with pytest.raises(CircuitError):
            compose(a, b)

    def test_adder_then_inverse_identity(self):
        plan = ar.RegisterPlan.for_instance(INSTANCE_A)
        add = ar.adder(INSTANCE_A, plan)
        round_trip = compose(add, invert(add))
        for x in range(1 << plan.m):
            out = run(round_trip, sim.basis_state(plan.n_qubits, x))
            expected = np.zeros(1 << plan.n_qubits)
            expected[x] = 1
            np.testing.assert_allclose(out.data, expected, atol=1e-10)


class TestInvert:
    def test_rz(self):
        assert invert(single(1, "RZ", [0], 0.3)).ops == (GateOp("RZ", (0,), -0.3),)

    def test_order_reversed(self):
        c = CircuitProgram(1, (GateOp("H", (0,)), GateOp("X", (0,))))
        assert invert(c).ops == (GateOp("X", (0,)), GateOp("H", (0,)))

    @pytest.mark.parametrize("seed", range(5))
    def test_round_trip_on_random_state(self, seed):
        c = random_circuit(4, 30, seed)
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi /= np.linalg.norm(psi)
        out = run(invert(c), run(c, sim.from_statevector(psi)))
        np.testing.assert_allclose(out.data, psi, atol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_involution(self, seed):
        c = random_circuit(4, 20, seed)
        assert invert(invert(c)) == c

    def test_measure_reset_not_invertible(self):
        with pytest.raises(CircuitError):
            invert(single(1, "MeasureReset", [0]))


class TestDecompose:
    def test_cphase_two_cnots(self):
        c = single(2, "CPhase", [0, 1], 0.77)
        d = decompose(c)
        assert d.count("CNOT") == 2
        assert {op.kind for op in d.ops} == {"CNOT", "RZ"}
        assert len(d.ops) == 5
        assert equal_up_to_phase(unitary(d), unitary(c))

    def test_swap_three_cnots(self):
        c = single(2, "SWAP", [0, 1])
        d = decompose(c)
        assert d.count("CNOT") == 3 and len(d.ops) == 3
        np.testing.assert_allclose(unitary(d), unitary(c), atol=1e-12)

    def test_single_qubit_only_untouched(self):
        c = CircuitProgram(2, (GateOp("H", (0,)), GateOp("RX", (1,), 0.2), GateOp("Phase", (0,), 1.0)))
        assert decompose(c) == c
        assert count_resources(c).two_qubit_gates_per_layer == 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_preserves_semantics(self, seed):
        c = random_circuit(3, 15, seed)
        d = decompose(c)
        assert all(op.kind == "CNOT" or not op.is_two_qubit for op in d.ops)
        assert equal_up_to_phase(unitary(d), unitary(c))

    def test_blocks_preserve_semantics(self):
        plan = ar.RegisterPlan.for_instance(INSTANCE_A)
        for block in (ar.adder(INSTANCE_A, plan), ar.test_block(5, plan), ar.qft(plan.weight_reg, plan.n_qubits)):
            assert equal_up_to_phase(unitary(decompose(block)), unitary(block))

    def test_measure_reset_preserved(self):
        c = CircuitProgram(2, (GateOp("CPhase", (0, 1), 0.1), GateOp("MeasureReset", (1,))))
        d = decompose(c)
        assert d.ops[-1] == GateOp("MeasureReset", (1,))
        assert count_resources(c).two_qubit_gates_per_layer == 2


class TestResources:
    def test_qubo_ancillas_instance_a(self):
        # W = 5 needs ceil(log2 6) = 3 slack bits
        rep = count_resources(layer(INSTANCE_A, EncodingMethod("qubo"), 0.1, 0.2))
        assert rep.n_ancilla_qubits == 3
        assert rep.n_data_qubits == 3

    def test_dephasing_ancillas_instance_a(self):
        # sum w = 6 -> n = ceil(log2 6) + 1 = 4 weight qubits plus the flag
        rep = count_resources(layer(INSTANCE_A, EncodingMethod("dephasing"), 0.1, 0.2))
        assert rep.n_ancilla_qubits == 5

    def test_deterministic(self):
        c = layer(INSTANCE_A, EncodingMethod("zeno"), 0.3, 0.4)
        assert count_resources(c, 5) == count_resources(c, 5)

    def test_cnot_count_matches_closed_form(self):
        # QFT on n qubits: n(n-1)/2 CPhase + floor(n/2) SWAP
        for n in range(1, 7):
            c = ar.qft(list(range(n)))
            assert count_resources(c).two_qubit_gates_per_layer == n * (n - 1) + 3 * (n // 2)


class TestRun:
    def test_empty_circuit(self):
        s = sim.init_state(2, [0])
        assert np.array_equal(run(CircuitProgram(2), s).data, s.data)

    def test_hadamards(self):
        c = CircuitProgram(3, tuple(GateOp("H", (q,)) for q in range(3)))
        probs = sim.marginal(run(c, sim.init_state(3)), [0, 1, 2])
        np.testing.assert_allclose(probs, np.full(8, 1 / 8), atol=1e-12)

    def test_adder_instance_a(self):
        # items 1 and 2 (qubits 0, 1) selected: weight 1 + 2 = 3 -> register 0011
        plan = ar.RegisterPlan.for_instance(INSTANCE_A)
        out = run(ar.adder(INSTANCE_A, plan), sim.basis_state(plan.n_qubits, 0b011))
        k = int(np.argmax(np.abs(out.data)))
        assert abs(abs(out.data[k]) - 1) < 1e-10
        assert k & 0b111 == 0b011
        assert (k >> 3) & 0b1111 == 0b0011

    def test_qubit_count_mismatch(self):
        with pytest.raises(CircuitError):
            run(CircuitProgram(2), sim.init_state(3))

    def test_dump(self):
        c = CircuitProgram(2, (GateOp("H", (0,)), GateOp("CPhase", (0, 1), 0.5)))
        assert c.dump().splitlines() == ["H 0", "CPhase 0,1 0.5"]

    def test_out_of_range_target(self):
        with pytest.raises(CircuitError):
            CircuitProgram(2, (GateOp("X", (2,)),))
