"""Resources and solution quality versus problem size at p = 5.

Writes ``results.csv``, ``aggregate.csv`` and the SVG figures, then prints
per-cell means next to the random-guessing baseline.

    python scripts/size_sweep.py --instances 50 --out results/size_sweep
"""

import argparse
import logging
import time
from pathlib import Path

import numpy as np

from constraint_qaoa import harness
from constraint_qaoa.report import emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", default="3,4,5,6")
    ap.add_argument("--layers", type=int, default=5)
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--restarts", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", default="results/size_sweep")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    cfg = harness.ExperimentConfig(sizes=tuple(int(s) for s in args.sizes.split(",")), layers=(args.layers,),
                                   instances_per_cell=args.instances, restarts=args.restarts, seed=args.seed,
                                   output_dir=args.out)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(harness.config_as_text(cfg))
    t0 = time.perf_counter()
    records = harness.run_experiment(cfg, args.workers)
    print(f"{len(records)} runs in {time.perf_counter() - t0:.0f} s")
    harness.emit_csv(records, out / "results.csv")
    emit_report(records, out)

    print(f"{'method':10s}{'m':>3s}{'P_B':>9s}{'2^-m':>9s}{'F':>8s}{'V':>8s}{'V unif':>8s}{'nfev':>8s}")
    for m in cfg.sizes:
        base = [harness.uniform_baseline(cfg, m, i)[1] for i in range(cfg.instances_per_cell)]
        v_unif = np.mean([b for b in base if b is not None])
        for method in cfg.methods:
            cell = [r for r in records if r.method == method and r.m == m]
            vbar = np.mean([r.avg_performance for r in cell if r.avg_performance is not None])
            print(f"{method:10s}{m:3d}{np.mean([r.p_best for r in cell]):9.4f}{2.0 ** -m:9.4f}"
                  f"{np.mean([r.feasibility_ratio for r in cell]):8.3f}{vbar:8.3f}{v_unif:8.3f}"
                  f"{np.mean([r.nfev for r in cell]):8.0f}")


if __name__ == "__main__":
    main()
