"""Aggregate sweep records and draw the resource / performance figures as SVG."""

from __future__ import annotations

import csv
import os
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import RunRecord  # noqa: E402

AGG_COLUMNS = ("method", "m", "p", "metric", "n", "mean", "std", "q25", "q75")
METRICS = ("two_qubit_gates_per_layer", "n_ancilla", "nfev", "wall_time_ms",
           "p_best", "feasibility_ratio", "avg_performance")
LABELS = {
    "two_qubit_gates_per_layer": "CNOTs per layer",
    "n_ancilla": "ancilla qubits",
    "nfev": "objective evaluations",
    "wall_time_ms": "runtime [ms]",
    "p_best": "$P_B$",
    "feasibility_ratio": "$F$",
    "avg_performance": r"$\bar V$",
}
LOG_SCALE = {"nfev", "wall_time_ms"}
FIGURES = {
    "fig2_resources": ("m", ("two_qubit_gates_per_layer", "n_ancilla", "nfev", "wall_time_ms")),
    "fig3_performance": ("m", ("p_best", "feasibility_ratio", "avg_performance")),
    "fig4_layers": ("p", ("p_best", "feasibility_ratio", "avg_performance", "nfev")),
}


def aggregate(records: Iterable[RunRecord]) -> list[dict]:
    """Mean, population std and interquartile range per (method, m, p, metric)."""
    groups = defaultdict(list)
    for r in records:
        for metric in METRICS:
            value = getattr(r, metric)
            if value is not None:
                groups[(r.method, r.m, r.p, metric)].append(float(value))
    rows = []
    for (method, m, p, metric), vals in sorted(groups.items()):
        a = np.asarray(vals)
        q25, q75 = np.percentile(a, [25, 75])
        rows.append(dict(method=method, m=m, p=p, metric=metric, n=a.size, mean=float(a.mean()),
                         std=float(a.std()), q25=float(q25), q75=float(q75)))
    return rows


def write_aggregate(rows: Sequence[dict], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, AGG_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def _reference(values: set[int], preferred: int) -> int:
    return preferred if preferred in values else max(values)


def _panel(ax, rows, axis, fixed_key, fixed_value, metric):
    methods = sorted({r["method"] for r in rows})
    for method in methods:
        sel = sorted((r for r in rows if r["method"] == method and r["metric"] == metric
                      and r[fixed_key] == fixed_value), key=lambda r: r[axis])
        if not sel:
            continue
        x = [r[axis] for r in sel]
        line, = ax.plot(x, [r["mean"] for r in sel], marker="o", label=method)
        ax.fill_between(x, [r["q25"] for r in sel], [r["q75"] for r in sel], alpha=0.2, color=line.get_color())
    ax.set_xlabel("problem size $m$" if axis == "m" else "layers $p$")
    ax.set_ylabel(LABELS[metric])
    if metric in LOG_SCALE:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)


def _figure(rows, path, axis, metrics, fixed_key, fixed_value):
    fig, axes = plt.subplots(1, len(metrics), figsize=(4 * len(metrics), 3.4), squeeze=False)
    for ax, metric in zip(axes[0], metrics):
        _panel(ax, rows, axis, fixed_key, fixed_value, metric)
    axes[0][0].legend(fontsize="small")
    fig.suptitle(f"{fixed_key} = {fixed_value}", fontsize="medium")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(records: Sequence[RunRecord], out_dir: str | os.PathLike) -> dict[str, Path]:
    """Write ``aggregate.csv`` and three SVG figures into ``out_dir``.

    Size sweeps use ``p = 5`` when present (else the largest ``p``); the
    layer sweep uses ``m = 5`` when present (else the largest size).
    """
    if not records:
        raise ValueError("no records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = aggregate(records)
    paths = {"aggregate": out / "aggregate.csv"}
    write_aggregate(rows, paths["aggregate"])

    plt.rcParams["svg.hashsalt"] = "constraint-qaoa"
    p_ref = _reference({r.p for r in records}, 5)
    m_ref = _reference({r.m for r in records}, 5)
    for name, (axis, metrics) in FIGURES.items():
        fixed_key, fixed_value = ("p", p_ref) if axis == "m" else ("m", m_ref)
        paths[name] = out / f"{name}.svg"
        _figure(rows, paths[name], axis, metrics, fixed_key, fixed_value)
    return paths
