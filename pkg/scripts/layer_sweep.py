"""Solution quality and optimizer effort versus layer count at a fixed size.

    python scripts/layer_sweep.py --size 5 --layers 1,2,3,4,5,6 --out results/layer_sweep
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from constraint_qaoa import harness
from constraint_qaoa.report import emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=int, default=5)
    ap.add_argument("--layers", default="1,2,3,4,5,6")
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--restarts", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", default="results/layer_sweep")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    cfg = harness.ExperimentConfig(sizes=(args.size,), layers=tuple(int(p) for p in args.layers.split(",")),
                                   instances_per_cell=args.instances, restarts=args.restarts, seed=args.seed,
                                   output_dir=args.out)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(harness.config_as_text(cfg))
    records = harness.run_experiment(cfg, args.workers)
    harness.emit_csv(records, out / "results.csv")
    emit_report(records, out)

    print(f"{'method':10s}{'p':>3s}{'P_B':>9s}{'F':>8s}{'V':>8s}{'nfev':>8s}")
    for method in cfg.methods:
        for p in cfg.layers:
            cell = [r for r in records if r.method == method and r.p == p]
            vbar = np.mean([r.avg_performance for r in cell if r.avg_performance is not None])
            print(f"{method:10s}{p:3d}{np.mean([r.p_best for r in cell]):9.4f}"
                  f"{np.mean([r.feasibility_ratio for r in cell]):8.3f}{vbar:8.3f}"
                  f"{np.mean([r.nfev for r in cell]):8.0f}")


if __name__ == "__main__":
    main()
