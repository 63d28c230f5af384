"""Command-line entry point: ``constraint-qaoa {gen,run,sweep,report,selftest}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import arithmetic, harness, knapsack, qubo
from .circuit import compose, run as run_circuit
from .encoders import METHODS, EncodingMethod
from .optimizer import ConfigurationError, classical_cost, make_objective
from .sim import basis_state

log = logging.getLogger("constraint_qaoa")

# flag name -> ExperimentConfig field
_CONFIG_FLAGS = {
    "methods": "methods", "sizes": "sizes", "layers": "layers", "instances": "instances_per_cell",
    "seed": "seed", "P": "P", "alpha": "alpha", "penal_mode": "penal_mode", "penal_scaled": "penal_scaled",
    "slack_convention": "slack_convention", "backend": "backend", "engine": "engine", "shots": "shots",
    "trajectories": "trajectories", "restarts": "restarts", "max_iterations": "max_iterations",
    "w_max": "w_max", "v_max": "v_max", "tightness": "tightness", "output_dir": "output_dir",
}


def _add_config_flags(p: argparse.ArgumentParser, single: bool = False) -> None:
    g = p.add_argument_group("experiment configuration")
    if not single:
        g.add_argument("--methods", help="comma list from qubo,dephasing,zeno")
        g.add_argument("--sizes", help="comma list of item counts")
        g.add_argument("--layers", help="comma list of layer counts p")
        g.add_argument("--instances", "--instances-per-cell", dest="instances", type=int)
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--P", "-P", dest="P", type=float, help="QUBO penalty weight")
    g.add_argument("--alpha", type=float, help="dephasing penalty phase")
    g.add_argument("--penal-mode", choices=arithmetic.PENAL_MODES)
    g.add_argument("--penal-scaled", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--slack-convention", choices=qubo.SLACK_CONVENTIONS)
    g.add_argument("--backend", help="auto, statevector, density (density-matrix) or trajectory")
    g.add_argument("--engine", choices=("reduced", "circuit"))
    g.add_argument("--shots", type=int, help="finite-shot sampling of the output distribution")
    g.add_argument("--trajectories", type=int)
    g.add_argument("--restarts", type=int)
    g.add_argument("--max-iterations", type=int)
    g.add_argument("--w-max", type=int)
    g.add_argument("--v-max", type=int)
    g.add_argument("--tightness", type=float)
    g.add_argument("--output-dir")


def _overrides(args: argparse.Namespace) -> dict:
    out = {}
    for flag, name in _CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            out[name] = value
    return harness.coerce_config(out)


def _config(args: argparse.Namespace, **extra) -> harness.ExperimentConfig:
    values = _overrides(args)
    values.update(extra)
    if getattr(args, "config", None):
        return harness.load_config(args.config, values)
    return harness.ExperimentConfig(**values)


def _record_line(r: harness.RunRecord) -> str:
    return ",".join(harness._fmt(getattr(r, c)) for c in harness.COLUMNS)


def cmd_gen(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for m in cfg.sizes:
        for i in range(cfg.instances_per_cell):
            path = out / f"knapsack_m{m}_{i:03d}.txt"
            knapsack.write(harness.cell_instance(cfg, m, i), path)
    print(f"wrote {len(cfg.sizes) * cfg.instances_per_cell} instance files to {out}")
    return 0


def cmd_run(args) -> int:
    cfg = _config(args, methods=(args.method,), sizes=(args.m,), layers=(args.p,), instances_per_cell=1)
    inst = knapsack.read(args.instance) if args.instance else None
    if inst is not None and inst.m != args.m:
        cfg = dataclasses.replace(cfg, sizes=(inst.m,))
    rec = harness.run_cell(cfg, args.method, cfg.sizes[0], args.p, args.index, inst)
    print(",".join(harness.COLUMNS))
    print(_record_line(rec))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.txt").write_text(harness.config_as_text(cfg))
    progress = (lambda r: log.info("%s m=%d p=%d #%d nfev=%d", r.method, r.m, r.p, r.instance_index, r.nfev))
    records = harness.run_experiment(cfg, args.workers, progress)
    csv_path = out_dir / "results.csv"
    harness.emit_csv(records, csv_path)
    print(f"wrote {len(records)} records to {csv_path}")
    if args.report:
        from .report import emit_report
        emit_report(records, out_dir)
        print(f"wrote report to {out_dir}")
    return 0


def cmd_report(args) -> int:
    from .report import emit_report
    records = harness.read_csv(args.csv)
    out = Path(args.out) if args.out else Path(args.csv).parent
    paths = emit_report(records, out)
    for p in paths.values():
        print(p)
    return 0


def _check(name: str, ok: bool, failures: list) -> None:
    print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if not ok:
        failures.append(name)


def cmd_selftest(args) -> int:
    failures: list[str] = []
    seeds = range(args.instances)
    arith_ok = True
    for s in seeds:
        inst = knapsack.generate(s, 1 + s % 4)
        plan = arithmetic.RegisterPlan.for_instance(inst)
        c = compose(arithmetic.adder(inst, plan), arithmetic.test_block(inst.capacity, plan))
        wv, flag = knapsack.weight_vector(inst), arithmetic.flag_truth_table(inst)
        for x in range(1 << inst.m):
            k = int(np.argmax(np.abs(run_circuit(c, basis_state(plan.n_qubits, x)).data)))
            arith_ok &= ((k >> plan.m) & ((1 << plan.n) - 1)) == wv[x] and (k >> plan.flag) == flag[x]
    _check("adder and comparator match the oracle", arith_ok, failures)

    ground_ok = True
    for s in seeds:
        inst = knapsack.generate(s, 1 + s % 5)
        model = qubo.build_qubo(inst, 2 * inst.total_value)
        e = qubo.energy_vector(model)
        k = int(np.argmin(e))
        oracle = knapsack.brute_force(inst)
        ground_ok &= knapsack.index_to_bits(k & ((1 << inst.m) - 1), inst.m) in oracle.best_solutions
        ground_ok &= e[k] == -oracle.best_value
    _check("QUBO ground states are knapsack optima", ground_ok, failures)

    rng = np.random.default_rng(0)
    engines_ok = True
    for s in range(min(3, args.instances)):
        inst = knapsack.generate(s, 2 + s % 2)
        theta = rng.uniform(0, 2 * np.pi, 4)
        for tag in METHODS:
            enc = EncodingMethod(tag)
            a = make_objective(inst, enc, "density")(theta)
            b = make_objective(inst, enc, "density", engine="circuit")(theta)
            engines_ok &= abs(a - b) < 1e-8
    _check("reduced engine matches gate-level circuits", engines_ok, failures)

    uniform_ok = True
    for s in seeds:
        inst = knapsack.generate(s, 3)
        f = make_objective(inst, EncodingMethod("dephasing"))
        uniform_ok &= abs(f(np.zeros(2)) - classical_cost(inst).mean()) < 1e-12
    _check("zero angles give the uniform objective", uniform_ok, failures)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="constraint-qaoa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write seeded knapsack instance files")
    _add_config_flags(p)
    p.add_argument("--out", default="instances")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="optimize one (method, size, p, instance) cell")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--m", "--size", dest="m", type=int, default=3)
    p.add_argument("--p", "--layers", dest="p", type=int, default=5)
    p.add_argument("--index", type=int, default=0, help="instance index within the cell")
    p.add_argument("--instance", help="instance file instead of a generated one")
    p.add_argument("--config")
    _add_config_flags(p, single=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="full method x size x p sweep to CSV")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--workers", type=int, help=f"process count (default ${harness.WORKERS_ENV} or 1)")
    p.add_argument("--report", action="store_true", help="also write aggregate CSV and SVG figures")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="aggregate a results CSV and draw figures")
    p.add_argument("csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("selftest", help="oracle-vs-circuit consistency checks")
    p.add_argument("--instances", type=int, default=10)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
