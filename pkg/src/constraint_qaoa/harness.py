"""Experiment orchestration: seeded instance batches, method/size/layer sweeps, CSV I/O."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Iterable

import numpy as np

from .circuit import count_resources
from .encoders import METHODS, EncodingMethod, layer
from .knapsack import KnapsackInstance, brute_force, generate
from .metrics import compute_metrics, distribution_from_array, uniform_distribution
from .optimizer import (ConfigurationError, OptimizerOptions, make_objective, multistart,
                        resolve_backend, sample_distribution)

log = logging.getLogger(__name__)

WORKERS_ENV = "CQAOA_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple[str, ...] = METHODS
    sizes: tuple[int, ...] = (3, 4, 5, 6)
    layers: tuple[int, ...] = (5,)
    instances_per_cell: int = 50
    seed: int = 0
    P: float = 10.0
    alpha: float = 10000.0
    penal_mode: str = "flat"
    penal_scaled: bool = True
    slack_convention: str = "exact"
    backend: str = "auto"
    engine: str = "reduced"
    shots: int | None = None
    trajectories: int = 1000
    restarts: int = 3
    max_iterations: int = 500
    w_max: int = 10
    v_max: int = 10
    tightness: float = 0.5
    output_dir: str = "results"

    def __post_init__(self):
        for name in ("methods", "sizes", "layers"):
            value = getattr(self, name)
            if isinstance(value, str):
                value = value.split(",")
            value = tuple(value)
            if not value:
                raise ConfigurationError(f"{name} must be non-empty")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "layers", tuple(int(p) for p in self.layers))
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigurationError(f"unknown method(s): {', '.join(sorted(unknown))}")
        if self.instances_per_cell < 1 or self.restarts < 1:
            raise ConfigurationError("instances_per_cell and restarts must be >= 1")
        if min(self.sizes) < 1 or min(self.layers) < 1:
            raise ConfigurationError("sizes and layers must be >= 1")
        for method in self.methods:
            resolve_backend(self.encoding(method), self.backend)

    def encoding(self, method: str) -> EncodingMethod:
        return EncodingMethod(method, self.P, self.alpha, self.penal_mode, self.penal_scaled, self.slack_convention)


@dataclass(frozen=True)
class RunRecord:
    method: str
    m: int
    p: int
    instance_index: int
    instance_seed: int
    nfev: int
    wall_time_ms: float
    p_best: float
    feasibility_ratio: float
    avg_performance: float | None
    n_qubits: int
    n_ancilla: int
    two_qubit_gates_per_layer: int


TIMING_COLUMNS = ("wall_time_ms",)


def derive_seed(*parts) -> int:
    digest = hashlib.sha256("|".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def instance_seed(master: int, m: int, index: int) -> int:
    # independent of method and p so every method sees the same instances
    return derive_seed(master, "instance", m, index)


def optimizer_seed(master: int, method: str, m: int, p: int, index: int) -> int:
    return derive_seed(master, "optimizer", method, m, p, index)


def cell_instance(cfg: ExperimentConfig, m: int, index: int) -> KnapsackInstance:
    return generate(instance_seed(cfg.seed, m, index), m, cfg.w_max, cfg.v_max, cfg.tightness)


def run_cell(cfg: ExperimentConfig, method: str, m: int, p: int, index: int,
             inst: KnapsackInstance | None = None) -> RunRecord:
    seed = instance_seed(cfg.seed, m, index)
    inst = inst or cell_instance(cfg, m, index)
    oracle = brute_force(inst)
    enc = cfg.encoding(method)
    opt_seed = optimizer_seed(cfg.seed, method, m, p, index)
    objective = make_objective(inst, enc, cfg.backend, cfg.shots, engine=cfg.engine,
                               trajectories=cfg.trajectories, seed=opt_seed)
    opts = OptimizerOptions(max_iterations=cfg.max_iterations, seed=opt_seed)

    t0 = time.perf_counter()
    trace = multistart(objective, cfg.restarts, opts, 2 * p)
    probs = objective.simulator.data_distribution(trace.best_params)
    if cfg.shots is not None:
        probs = sample_distribution(probs, cfg.shots, np.random.default_rng(opt_seed + 1))
    wall_ms = (time.perf_counter() - t0) * 1e3

    metrics = compute_metrics(distribution_from_array(probs, m), oracle)
    res = count_resources(layer(inst, enc, trace.best_params.gammas[0], trace.best_params.betas[0]), p)
    return RunRecord(method, m, p, index, seed, trace.nfev, wall_ms, metrics.p_best,
                     metrics.feasibility_ratio, metrics.avg_performance, res.n_qubits,
                     res.n_ancilla_qubits, res.two_qubit_gates_per_layer)


def _run_task(args) -> RunRecord:
    return run_cell(*args)


def _cells(cfg: ExperimentConfig) -> list[tuple]:
    return [(cfg, method, m, p, i) for method in cfg.methods for m in cfg.sizes
            for p in cfg.layers for i in range(cfg.instances_per_cell)]


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, workers)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None, progress=None) -> list[RunRecord]:
    tasks = _cells(cfg)
    workers = worker_count(workers)
    log.info("running %d cells on %d worker(s)", len(tasks), workers)
    if workers == 1:
        records = []
        for t in tasks:
            records.append(_run_task(t))
            if progress:
                progress(records[-1])
    else:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=4))
    return sorted(records, key=lambda r: (r.method, r.m, r.p, r.instance_index))


def uniform_baseline(cfg: ExperimentConfig, m: int, index: int) -> tuple[float, float | None]:
    """``(p_best, avg_performance)`` of random guessing on one cell's instance."""
    mets = compute_metrics(uniform_distribution(m), brute_force(cell_instance(cfg, m, index)))
    return mets.p_best, mets.avg_performance


# -- CSV --------------------------------------------------------------------

COLUMNS = tuple(f.name for f in fields(RunRecord))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(records: Iterable[RunRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in records:
            w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])


def _parse(kind: str, text: str):
    if text == "":
        return None
    if kind.startswith("int"):
        return int(text)
    if kind.startswith("float"):
        return float(text)
    return text


def read_csv(path: str | os.PathLike) -> list[RunRecord]:
    kinds = {f.name: str(f.type) for f in fields(RunRecord)}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        return [RunRecord(**{k: _parse(kinds[k], v) for k, v in row.items()}) for row in reader]


# -- config files -----------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def coerce_config(values: dict) -> dict:
    """Convert string values to the types of :class:`ExperimentConfig` fields."""
    types = {f.name: str(f.type) for f in fields(ExperimentConfig)}
    out = {}
    for key, value in values.items():
        if key not in types:
            raise ConfigurationError(f"unknown config key {key!r}")
        kind = types[key]
        if not isinstance(value, str):
            out[key] = value
        elif kind.startswith("tuple"):
            items = [s.strip() for s in value.split(",") if s.strip()]
            out[key] = tuple(int(s) for s in items) if "int" in kind else tuple(items)
        elif kind == "bool":
            out[key] = value.lower() in ("1", "true", "yes", "on")
        elif kind.startswith("int"):
            out[key] = None if value.lower() in ("", "none", "exact") else int(value)
        elif kind == "float":
            out[key] = float(value)
        else:
            out[key] = value
    return out


def load_config(path: str | os.PathLike, overrides: dict | None = None) -> ExperimentConfig:
    with open(path) as fh:
        values = coerce_config(parse_config_text(fh.read()))
    values.update(overrides or {})
    return ExperimentConfig(**values)


def config_as_text(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(map(str, v))
        lines.append(f"{f.name} = {'none' if v is None else v}")
    return "\n".join(lines) + "\n"


def replace_config(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(cfg, **changes)
