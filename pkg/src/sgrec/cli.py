"""``sgrec`` command line.

Subcommands: ingest-check, extract, build-dict, classify, experiment,
compare-reg. Settings come from ``--config`` (TOML) and are overridden
by explicit flags. Exit status is 0 on success, 2 on usage/input errors
and 1 on any other failure.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .admm import SolverConfig
from .classifier import classify
from .dictionary import build_dictionary, load_dictionary, save_dictionary
from .errors import SGRecError
from .experiment import (
    ExperimentConfig,
    augment,
    compare_regularizers,
    emit_comparison,
    emit_report,
    emit_sweep,
    ingest_dataset,
    load_config,
    load_image,
    run_sweep,
)
from .features import FeatureSpec, extract

log = logging.getLogger("sgrec")


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed {text} is not an unsigned 64-bit integer")
    return v


def _common_parser():
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    g = p.add_argument_group("experiment settings (override --config)")
    g.add_argument("--config", default=S, help="TOML config file")
    g.add_argument("--dataset-root", dest="dataset_root", default=S)
    g.add_argument("--seed", type=_u64, default=S)
    g.add_argument("--feature", choices=["raw", "hog", "lbp"], default=S)
    g.add_argument("--cell-size", dest="cell_size", type=int, default=S)
    g.add_argument("--metric", choices=["residual", "cosine"], default=S)
    g.add_argument("--regularizer", choices=["l12", "l1"], default=S)
    g.add_argument("--lambda", dest="lam", type=float, default=S)
    g.add_argument("--rho", type=float, default=S)
    g.add_argument("--max-inner", dest="max_inner", type=int, default=S)
    g.add_argument("--tol", type=float, default=S)
    g.add_argument("--atoms", "--atoms-per-class", dest="atoms", type=_ints, default=S,
                   help="atoms per class, comma separated for a sweep")
    g.add_argument("--tests-per-class", dest="tests_per_class", type=int, default=S)
    g.add_argument("--trials", type=int, default=S)
    g.add_argument("--rotations", "--augment-rotations", dest="rotations", type=_floats, default=S,
                   help="rotation angles in degrees, e.g. 1,-1,2,-2")
    g.add_argument("--output", choices=["csv", "json", "table"], default=S)
    g.add_argument("-v", "--verbose", action="count", default=S)
    return p


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="sgrec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-check", parents=[common], help="validate a dataset directory")
    p.add_argument("root", nargs="?")

    p = sub.add_parser("extract", parents=[common], help="compute the feature vector of one image")
    p.add_argument("image")
    p.add_argument("--out", help="write the vector as .npy")

    p = sub.add_parser("build-dict", parents=[common], help="build an SGD1 dictionary from a dataset")
    p.add_argument("root", nargs="?")
    p.add_argument("--out", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify one image against a dictionary")
    p.add_argument("image")
    p.add_argument("--dict", dest="dictionary", required=True)

    p = sub.add_parser("experiment", parents=[common], help="run randomized recognition trials")
    p.add_argument("root", nargs="?")

    p = sub.add_parser("compare-reg", parents=[common], help="L1 vs L1-L2 on identical splits")
    p.add_argument("root", nargs="?")
    return parser


def resolve_config(args):
    """Merge ``--config`` with explicit flags into an ExperimentConfig."""
    ns = vars(args)
    cfg = load_config(ns["config"]) if "config" in ns else ExperimentConfig()
    root = ns.get("root") or ns.get("dataset_root")
    if root:
        cfg = replace(cfg, dataset_root=str(root))
    spec = cfg.feature
    if "feature" in ns or "cell_size" in ns:
        spec = FeatureSpec(ns.get("feature", spec.kind), ns.get("cell_size", spec.cell_size))
    solver_kw = {k: ns[k] for k in ("lam", "rho", "max_inner", "tol", "regularizer") if k in ns}
    solver = replace(cfg.solver, **solver_kw) if solver_kw else cfg.solver
    kw = {k: ns[k] for k in ("seed", "metric", "tests_per_class", "trials") if k in ns}
    if "atoms" in ns:
        kw["atoms_per_class"] = tuple(ns["atoms"]) if len(ns["atoms"]) > 1 else ns["atoms"][0]
    if "rotations" in ns:
        kw["augment_rotations"] = tuple(ns["rotations"])
    return replace(cfg, feature=spec, solver=solver, **kw)


def _emit(text):
    sys.stdout.write(text)


def cmd_ingest_check(args, cfg):
    data = ingest_dataset(_root(cfg))
    shape = next(iter(data.values()))[0].shape
    rows = [("class", "images")] + [(lbl, str(len(v))) for lbl, v in data.items()]
    if args.output == "json":
        _emit(json.dumps({"image_size": list(shape), "classes": {k: len(v) for k, v in data.items()}}) + "\n")
    else:
        _emit(f"image size {shape[0]}x{shape[1]}, {len(data)} classes\n")
        _emit("\n".join(f"{a:>12}  {b}" for a, b in rows) + "\n")


def cmd_extract(args, cfg):
    fv = extract(load_image(args.image), cfg.feature)
    if args.out:
        np.save(args.out, fv.values)
    info = {"image": args.image, "feature": cfg.feature.kind.value,
            "cell_size": cfg.feature.cell_size, "dim": len(fv), "source_dims": list(fv.source_dims)}
    if args.output == "json":
        _emit(json.dumps(info) + "\n")
    else:
        _emit(f"{args.image}: {info['feature']} k={info['cell_size']} dim={info['dim']}\n")


def cmd_build_dict(args, cfg):
    data = ingest_dataset(_root(cfg))
    atoms = None
    if isinstance(cfg.atoms_per_class, int) and "atoms" in vars(args):
        atoms = cfg.atoms_per_class
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    sets = {}
    for label in sorted(data):
        imgs = augment(data[label], cfg.augment_rotations)
        if atoms is not None:
            if atoms > len(imgs):
                raise SGRecError(f"class {label!r} has only {len(imgs)} images, {atoms} requested")
            imgs = [imgs[int(i)] for i in sorted(rng.choice(len(imgs), atoms, replace=False))]
        sets[label] = [extract(img, cfg.feature) for img in imgs]
    d = build_dictionary(sets)
    save_dictionary(d, args.out)
    _emit(f"wrote {args.out}: m={d.m} n={d.n} classes={len(d.class_offsets)}\n")


def cmd_classify(args, cfg):
    d = load_dictionary(args.dictionary)
    fv = extract(load_image(args.image), d.feature_spec)
    scores = classify(fv, d, cfg.solver, cfg.metric)
    if args.output == "json":
        _emit(json.dumps({
            "predicted": scores.predicted,
            "metric": scores.metric_kind.value,
            "scores": {s.label: s.r_value for s in scores.per_class},
            "iterations": {s.label: s.solve.iterations for s in scores.per_class},
        }) + "\n")
    elif args.output == "csv":
        _emit("label,r_value,iterations,converged\n")
        for s in scores.per_class:
            _emit(f"{s.label},{s.r_value:.10g},{s.solve.iterations},{int(s.solve.converged)}\n")
    else:
        for s in scores.per_class:
            mark = "*" if s.label == scores.predicted else " "
            _emit(f"{mark} {s.label:>12}  {s.r_value:.6g}\n")
        _emit(f"predicted: {scores.predicted}\n")


def cmd_experiment(args, cfg):
    reports = run_sweep(replace(cfg, dataset_root=_root(cfg)))
    if len(reports) == 1:
        _emit(emit_report(next(iter(reports.values())), args.output))
    else:
        _emit(emit_sweep(reports, args.output))


def cmd_compare_reg(args, cfg):
    pairs = compare_regularizers(replace(cfg, dataset_root=_root(cfg)))
    _emit(emit_comparison(pairs, args.output))


def _root(cfg):
    if not cfg.dataset_root:
        raise SGRecError("no dataset root given (positional ROOT, --dataset-root or config)")
    return cfg.dataset_root


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "extract": cmd_extract,
    "build-dict": cmd_build_dict,
    "classify": cmd_classify,
    "experiment": cmd_experiment,
    "compare-reg": cmd_compare_reg,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = getattr(args, "verbose", 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if not hasattr(args, "output"):
        args.output = "table" if args.command in ("ingest-check", "extract", "classify", "compare-reg") else "csv"
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](args, cfg)
    except (SGRecError, ValueError, FileNotFoundError, OSError) as exc:
        print(f"sgrec {args.command}: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, (ValueError, FileNotFoundError)) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
