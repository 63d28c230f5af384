"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``CRITERION k: PASS|FAIL`` line and the same lines are
repeated in the terminal summary.  The protocol sweep (criteria 8-10) runs
once per session and is then repeated for the determinism check.
"""

import time
from itertools import product

import numpy as np
import pytest
from scipy.stats import unitary_group

from constraint_qaoa import arithmetic as ar
from constraint_qaoa import harness, qubo, sim
from constraint_qaoa.circuit import compose, run
from constraint_qaoa.encoders import EncodingMethod, build_ansatz, dephasing_layer, return_phase
from constraint_qaoa.knapsack import KnapsackInstance, brute_force, generate, value_vector, weight_vector
from constraint_qaoa.metrics import compute_metrics, distribution_from_array
from constraint_qaoa.optimizer import AnsatzSimulator
from constraint_qaoa.qubo import AnsatzParams

INSTANCE_A = KnapsackInstance((1, 2, 3), (6, 10, 12), 5)
PROTOCOL = harness.ExperimentConfig()  # sizes 3-6, p = 5, P = 10, alpha = 10000, 50 instances, 3 restarts
SWEEP_BUDGET_S = 3600.0


def _basis_index(state):
    k = int(np.argmax(np.abs(state.data)))
    return k, abs(abs(state.data[k]) - 1)


# -- 1 ---------------------------------------------------------------------

def test_criterion_01_arithmetic_exhaustive(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    bad_add = bad_flag = 0
    worst_leak = 0.0
    for seed in range(20):
        inst = generate(seed, 1 + seed % 4)
        plan = ar.RegisterPlan.for_instance(inst)
        wv, truth = weight_vector(inst), ar.flag_truth_table(inst)
        add = ar.adder(inst, plan)
        add_test = compose(add, ar.test_block(inst.capacity, plan))
        layer = dephasing_layer(inst, rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi), 10000.0, plan)
        for x in range(1 << plan.m):
            k, _ = _basis_index(run(add, sim.basis_state(plan.n_qubits, x)))
            bad_add += (k >> plan.m) & ((1 << plan.n) - 1) != wv[x]
            k, _ = _basis_index(run(add_test, sim.basis_state(plan.n_qubits, x)))
            bad_flag += (k >> plan.flag) != truth[x]
            out = run(layer, sim.basis_state(plan.n_qubits, x)).data
            worst_leak = max(worst_leak, float(np.max(np.abs(out[1 << plan.m:]))))
    elapsed = time.perf_counter() - t0
    ok = bad_add == 0 and bad_flag == 0 and worst_leak < 1e-10 and elapsed < 60
    acceptance_log(1, ok, f"adder errors {bad_add}, flag errors {bad_flag}, "
                          f"max ancilla amplitude {worst_leak:.1e}, {elapsed:.1f} s")
    assert ok


# -- 2 ---------------------------------------------------------------------

def test_criterion_02_qubo_ground_state(acceptance_log):
    t0 = time.perf_counter()
    failures = 0
    for seed in range(50):
        inst = generate(seed, 1 + seed % 5)
        model = qubo.build_qubo(inst, 2 * inst.total_value)
        e = qubo.energy_vector(model)
        k = int(np.argmin(e))
        oracle = brute_force(inst)
        x = "".join(str((k >> i) & 1) for i in range(inst.m))
        failures += x not in oracle.best_solutions or e[k] != -oracle.best_value
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 120
    acceptance_log(2, ok, f"{50 - failures}/50 ground states optimal with exact energy, {elapsed:.1f} s")
    assert ok


# -- 3 ---------------------------------------------------------------------

def test_criterion_03_energy_consistency(acceptance_log):
    mismatches = checked = 0
    for seed in range(20):
        inst = generate(100 + seed, 1 + seed % 4)
        P = 1 + seed  # integer penalty keeps every energy an exact integer
        model = qubo.build_qubo(inst, P)
        for bits in product("01", repeat=model.n_vars):
            a = "".join(bits)
            x, s = qubo.split_assignment(model, a)
            mismatches += qubo.ising_energy(model, a) != qubo.qubo_cost(inst, P, x, s, model.slack_weights)
            checked += 1
    acceptance_log(3, mismatches == 0, f"{checked} assignments over 20 instances, {mismatches} mismatches")
    assert mismatches == 0


# -- 4 ---------------------------------------------------------------------

def test_criterion_04_phase_diagonality(acceptance_log):
    worst = 0.0
    n_instances = 0
    seed = 0
    while n_instances < 10:
        inst = generate(200 + seed, 1 + seed % 4)
        seed += 1
        model = qubo.build_qubo(inst, 10)
        if model.n_vars > 8:
            continue
        n_instances += 1
        gamma = 0.01 + 0.03 * seed
        block = qubo.qubo_phase_block(model, gamma)
        e = qubo.energy_vector(model)
        ref = run(block, sim.basis_state(model.n_vars, 0)).data[0]
        for x in range(1 << model.n_vars):
            amp = run(block, sim.basis_state(model.n_vars, x)).data
            off = np.delete(amp, x)
            worst = max(worst, abs(amp[x] / ref - np.exp(-1j * gamma * (e[x] - e[0]))),
                        float(np.max(np.abs(off), initial=0.0)))
        plan = ar.RegisterPlan.for_instance(inst)
        ret = return_phase(inst, gamma, plan)
        for x, v in enumerate(value_vector(inst)):
            amp = run(ret, sim.basis_state(plan.n_qubits, x)).data
            worst = max(worst, abs(amp[x] - np.exp(-1j * gamma * v)))
    ok = worst < 1e-9
    acceptance_log(4, ok, f"max phase deviation {worst:.1e} over {n_instances} instances (m + c <= 8)")
    assert ok


# -- 5 ---------------------------------------------------------------------

def test_criterion_05_backend_equivalence(acceptance_log):
    params = AnsatzParams((0.35, 1.2), (0.8, 0.25))
    deph = build_ansatz(INSTANCE_A, EncodingMethod("dephasing"), params)
    everything = list(range(deph.n_qubits))
    sv = sim.marginal(run(deph, sim.init_state(deph.n_qubits)), everything)
    dm = sim.marginal(run(deph, sim.init_state(deph.n_qubits, [], "density")), everything)
    diff = float(np.max(np.abs(sv - dm)))

    zeno = build_ansatz(INSTANCE_A, EncodingMethod("zeno"), params)
    everything = list(range(zeno.n_qubits))
    rho = sim.marginal(run(zeno, sim.init_state(zeno.n_qubits, [], "density")), everything)
    traj = sim.marginal(run(zeno, sim.init_state(zeno.n_qubits, [], "trajectory", shots=20000, seed=2024)),
                        everything)
    tvd = 0.5 * float(np.abs(rho - traj).sum())
    ok = diff < 1e-10 and tvd < 0.05
    acceptance_log(5, ok, f"dephasing statevector vs density max diff {diff:.1e}; "
                          f"zeno trajectory (20000 shots) vs density TVD {tvd:.4f}")
    assert ok


# -- 6 ---------------------------------------------------------------------

def test_criterion_06_zeno_limit(acceptance_log):
    worst_ratio, worst_abs = 0.0, 0.0
    for k in range(20):
        n = 1 + k % 3
        d = 1 << n
        rng = np.random.default_rng(600 + k)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = (a + a.conj().T) / 2
        rank = 1 + k % (d - 1) if d > 2 else 1
        basis = unitary_group.rvs(d, random_state=600 + k)[:, :rank]
        P = basis @ basis.conj().T
        e10 = sim.zeno_limit_check(H, P, 1.0, 10)
        e1k = sim.zeno_limit_check(H, P, 1.0, 1000)
        e10k = sim.zeno_limit_check(H, P, 1.0, 10_000)
        worst_ratio = max(worst_ratio, e1k / e10)
        worst_abs = max(worst_abs, e10k)
    ok = worst_ratio < 0.1 and worst_abs < 1e-2
    acceptance_log(6, ok, f"worst err(N=1000)/err(N=10) = {worst_ratio:.4f}, worst err(N=1e4) = {worst_abs:.1e}")
    assert ok


# -- 7 ---------------------------------------------------------------------

def test_criterion_07_trivial_angles(acceptance_log):
    worst = 0.0
    vbar_a = None
    cases = [(INSTANCE_A, "circuit")] + [(generate(700 + s, 2 + s % 4), "reduced") for s in range(10)]
    for inst, engine in cases:
        oracle = brute_force(inst)
        uniform_vbar = (sum(oracle.value_of[x] for x in oracle.feasible_set) / 2 ** inst.m / oracle.best_value
                        if oracle.best_value else None)
        for tag in ("qubo", "dephasing", "zeno"):
            simulator = AnsatzSimulator(inst, EncodingMethod(tag), engine=engine)
            probs = simulator.data_distribution(AnsatzParams((0.0,), (0.0,)))
            mets = compute_metrics(distribution_from_array(probs, inst.m), oracle)
            worst = max(worst, float(np.max(np.abs(probs - 2.0 ** -inst.m))),
                        abs(mets.p_best - len(oracle.best_solutions) / 2 ** inst.m),
                        abs(mets.feasibility_ratio - 1.0))
            if uniform_vbar is not None:
                worst = max(worst, abs(mets.avg_performance - uniform_vbar))
            if inst is INSTANCE_A and tag == "dephasing":
                vbar_a = mets.avg_performance
    ok = worst < 1e-12 and abs(vbar_a - 21 / 44) < 1e-12
    acceptance_log(7, ok, f"max deviation {worst:.1e}; instance A uniform V = {vbar_a:.6f}")
    assert ok


# -- 8-10: the protocol sweep ----------------------------------------------

@pytest.fixture(scope="session")
def protocol_sweep(tmp_path_factory):
    t0 = time.perf_counter()
    records = harness.run_experiment(PROTOCOL)
    elapsed = time.perf_counter() - t0
    path = tmp_path_factory.mktemp("sweep") / "first.csv"
    harness.emit_csv(records, path)
    return records, path, elapsed


def _mean(values):
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else float("nan")


def test_criterion_08_beats_random_guessing(acceptance_log, protocol_sweep):
    records, _, elapsed = protocol_sweep
    assert len(records) == len(PROTOCOL.methods) * len(PROTOCOL.sizes) * PROTOCOL.instances_per_cell
    failures, lines = [], []
    for m in PROTOCOL.sizes:
        baseline = [harness.uniform_baseline(PROTOCOL, m, i) for i in range(PROTOCOL.instances_per_cell)]
        uniform_vbar = _mean(b[1] for b in baseline)
        for method in PROTOCOL.methods:
            cell = [r for r in records if r.method == method and r.m == m]
            vbar = _mean(r.avg_performance for r in cell)
            pb = _mean(r.p_best for r in cell)
            v_ok, p_ok = vbar > uniform_vbar, pb > 2.0 ** -m
            lines.append(f"    {method:9s} m={m}  V {vbar:.4f} vs uniform {uniform_vbar:.4f} "
                         f"[{'ok' if v_ok else 'LOW'}]  P_B {pb:.4f} vs 2^-m {2.0 ** -m:.4f} "
                         f"[{'ok' if p_ok else 'LOW'}]")
            if not v_ok:
                failures.append(f"{method} V m={m}")
            if not p_ok:
                failures.append(f"{method} P_B m={m}")
    print("\n" + "\n".join(lines))
    in_budget = elapsed < SWEEP_BUDGET_S
    ok = not failures and in_budget
    detail = f"{len(records)} runs in {elapsed / 60:.1f} min"
    detail += "; all cells beat random guessing" if not failures else f"; below baseline: {', '.join(failures)}"
    acceptance_log(8, ok, detail)
    assert not failures, "\n".join(lines)
    assert in_budget


def test_criterion_09_resource_trends(acceptance_log, protocol_sweep):
    records = protocol_sweep[0]
    problems = []
    means = {}
    for method in PROTOCOL.methods:
        for m in PROTOCOL.sizes:
            cell = [r for r in records if r.method == method and r.m == m]
            means[method, m] = (_mean(r.two_qubit_gates_per_layer for r in cell), _mean(r.n_ancilla for r in cell))
        for a, b in zip(PROTOCOL.sizes, PROTOCOL.sizes[1:]):
            if means[method, b][0] < means[method, a][0]:
                problems.append(f"{method} gates drop {a}->{b}")
            if means[method, b][1] < means[method, a][1]:
                problems.append(f"{method} ancillas drop {a}->{b}")
    for m in PROTOCOL.sizes:
        for other in ("dephasing", "zeno"):
            if not means["qubo", m][1] < means[other, m][1]:
                problems.append(f"qubo ancillas not below {other} at m={m}")
    summary = ", ".join(f"m={m}: " + "/".join(f"{means[t, m][1]:.1f}" for t in PROTOCOL.methods)
                        for m in PROTOCOL.sizes)
    acceptance_log(9, not problems, f"mean ancillas qubo/dephasing/zeno {summary}"
                                    + (f"; {', '.join(problems)}" if problems else ""))
    assert not problems


def _strip_timing(path):
    cols = harness.COLUMNS
    drop = [cols.index(c) for c in harness.TIMING_COLUMNS]
    out = []
    for line in path.read_bytes().splitlines():
        cells = line.split(b",")
        out.append(b",".join(c for i, c in enumerate(cells) if i not in drop))
    return b"\n".join(out)


def test_criterion_10_determinism(acceptance_log, protocol_sweep, tmp_path):
    _, first, _ = protocol_sweep
    second = tmp_path / "second.csv"
    harness.emit_csv(harness.run_experiment(PROTOCOL), second)
    a, b = _strip_timing(first), _strip_timing(second)
    ok = a == b
    acceptance_log(10, ok, f"rerun with seed {PROTOCOL.seed}: {len(a.splitlines()) - 1} rows, non-timing columns "
                           + ("byte-identical" if ok else "DIFFER"))
    assert ok
