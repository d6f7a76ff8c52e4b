"""Recognition-rate tables (one row per feature, one column per atom count)
and per-trial timings for a gesture dataset.

Binary set (three classes, 150x150):
    python scripts/reproduce_tables.py data/binary --atoms 100,150,200,250
Gray-scale set with rotation augmentation (five classes, 160x90):
    python scripts/reproduce_tables.py data/gray --atoms 50,100,150,200 --rotations 1,-1,2,-2
L1 vs L1-L2 on LBP features:
    python scripts/reproduce_tables.py data/gray --atoms 50,100,150,200 --rotations 1,-1,2,-2 --compare
"""

import argparse
import csv
import logging
import sys
from pathlib import Path

from sgrec.experiment import ExperimentConfig, compare_regularizers, emit_comparison, ingest_dataset, run_sweep
from sgrec.features import FeatureSpec


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0], formatter_class=argparse.RawDescriptionHelpFormatter, epilog=__doc__)
    p.add_argument("root")
    p.add_argument("--atoms", default="100,150,200,250")
    p.add_argument("--rotations", default="")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cell-size", type=int, default=8)
    p.add_argument("--features", default="raw,hog,lbp", help="comma separated subset of raw,hog,lbp")
    p.add_argument("--metric", default="residual", choices=["residual", "cosine"])
    p.add_argument("--compare", action="store_true", help="L1 vs L1-L2 with LBP features")
    p.add_argument("--timings", type=Path, help="write per-trial timings to this CSV")
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    atoms = tuple(int(a) for a in args.atoms.split(","))
    rots = tuple(float(r) for r in args.rotations.split(",") if r)
    data = ingest_dataset(args.root)
    base = dict(atoms_per_class=atoms, trials=args.trials, seed=args.seed,
                augment_rotations=rots, metric=args.metric)

    if args.compare:
        cfg = ExperimentConfig(feature=FeatureSpec("lbp", args.cell_size), **base)
        sys.stdout.write(emit_comparison(compare_regularizers(cfg, data), "table"))
        return

    rows = []
    timing_rows = []
    for name in args.features.split(","):
        spec = FeatureSpec(name, 0 if name == "raw" else args.cell_size)
        reports = run_sweep(ExperimentConfig(feature=spec, **base), data)
        rows.append([name] + [f"{reports[a].mean_rate:.4f}" for a in atoms])
        for a, rep in reports.items():
            timing_rows.extend([name, a, i, t.wall_time_ms] for i, t in enumerate(rep.per_trial))
        print(f"{name}: " + "  ".join(f"{a}:{reports[a].mean_time_ms:.1f}ms" for a in atoms), file=sys.stderr)

    header = ["feature"] + [str(a) for a in atoms]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    if args.timings:
        with open(args.timings, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["feature", "atoms", "trial", "wall_time_ms"])
            w.writerows(timing_rows)


if __name__ == "__main__":
    main()
