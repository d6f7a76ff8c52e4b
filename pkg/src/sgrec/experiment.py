"""Randomized recognition trials over an image dataset.

A dataset is a directory with one sub-directory per class, each holding
8-bit PNG/PGM images of a common size. In every trial each class has
`tests_per_class` originals held out as test images; the atoms are
drawn from the remaining originals and, when rotations are enabled,
their rotated copies. Rotated copies of a test image never become
atoms.
"""

import csv
import hashlib
import io
import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .admm import GramCache, Regularizer, SolverConfig
from .classifier import MetricKind, classify
from .dictionary import build_dictionary
from .errors import EmptyClassError, InvalidInputError, SGRecError
from .features import FeatureKind, FeatureSpec, check_image, extract, rgb_to_gray, rotate

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "TrialReport",
    "IMAGE_SUFFIXES",
    "load_image",
    "ingest_dataset",
    "augment",
    "draw_split",
    "run_experiment",
    "run_sweep",
    "compare_regularizers",
    "emit_report",
    "emit_sweep",
    "emit_comparison",
    "report_from_json",
    "load_config",
    "config_from_mapping",
]

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".pgm", ".pnm", ".ppm", ".pbm", ".bmp", ".jpg", ".jpeg", ".tif", ".tiff"}
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_root: str = None
    feature: FeatureSpec = field(default_factory=FeatureSpec)
    atoms_per_class: object = 100
    tests_per_class: int = 10
    trials: int = 50
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    metric: MetricKind = MetricKind.RESIDUAL
    augment_rotations: tuple = ()

    def __post_init__(self):
        atoms = self.atoms_per_class
        atoms = tuple(int(a) for a in atoms) if isinstance(atoms, (list, tuple)) else int(atoms)
        for a in atoms if isinstance(atoms, tuple) else (atoms,):
            if a < 1:
                raise InvalidInputError(f"atoms_per_class must be positive, got {a}")
        object.__setattr__(self, "atoms_per_class", atoms)
        object.__setattr__(self, "metric", MetricKind(self.metric))
        object.__setattr__(self, "augment_rotations", tuple(float(r) for r in self.augment_rotations))
        if self.trials < 1:
            raise InvalidInputError(f"trials must be >= 1, got {self.trials}")
        if self.tests_per_class < 1:
            raise InvalidInputError(f"tests_per_class must be >= 1, got {self.tests_per_class}")
        if not 0 <= int(self.seed) <= _U64:
            raise InvalidInputError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        if self.dataset_root is not None:
            object.__setattr__(self, "dataset_root", str(self.dataset_root))

    @property
    def atoms_list(self):
        a = self.atoms_per_class
        return list(a) if isinstance(a, tuple) else [a]

    def to_dict(self):
        a = self.atoms_per_class
        return {
            "dataset_root": self.dataset_root,
            "feature": self.feature.to_dict(),
            "atoms_per_class": list(a) if isinstance(a, tuple) else a,
            "tests_per_class": self.tests_per_class,
            "trials": self.trials,
            "seed": self.seed,
            "solver": self.solver.to_dict(),
            "metric": self.metric.value,
            "augment_rotations": list(self.augment_rotations),
        }

    @classmethod
    def from_dict(cls, d):
        return config_from_mapping(d)


@dataclass(frozen=True)
class TrialRecord:
    recognition_rate: float
    wall_time_ms: float
    split_hash: str = ""
    n_correct: int = 0
    n_tests: int = 0


@dataclass(frozen=True)
class TrialReport:
    per_trial: tuple
    mean_rate: float
    mean_time_ms: float
    config_echo: ExperimentConfig
    atoms_per_class: int = 0

    @classmethod
    def from_trials(cls, trials, config, atoms):
        trials = tuple(trials)
        return cls(
            per_trial=trials,
            mean_rate=float(np.mean([t.recognition_rate for t in trials])),
            mean_time_ms=float(np.mean([t.wall_time_ms for t in trials])),
            config_echo=config,
            atoms_per_class=atoms,
        )

    @property
    def rates(self):
        return [t.recognition_rate for t in self.per_trial]

    @property
    def split_hashes(self):
        return [t.split_hash for t in self.per_trial]

    def to_dict(self):
        return {
            "per_trial": [vars(t).copy() for t in self.per_trial],
            "mean_rate": self.mean_rate,
            "mean_time_ms": self.mean_time_ms,
            "atoms_per_class": self.atoms_per_class,
            "config_echo": self.config_echo.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            per_trial=tuple(TrialRecord(**t) for t in d["per_trial"]),
            mean_rate=d["mean_rate"],
            mean_time_ms=d["mean_time_ms"],
            config_echo=config_from_mapping(d["config_echo"]),
            atoms_per_class=d.get("atoms_per_class", 0),
        )


# ---------------------------------------------------------------- config io


def config_from_mapping(d):
    """Build an :class:`ExperimentConfig` from a plain mapping (TOML/JSON).

    ``feature`` may be a table ``{kind, cell_size}`` or a bare kind string
    with an optional top-level ``cell_size``.
    """
    d = dict(d)
    known = {
        "dataset_root", "feature", "cell_size", "atoms_per_class", "tests_per_class",
        "trials", "seed", "solver", "metric", "augment_rotations",
    }
    unknown = set(d) - known
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    feat = d.pop("feature", None)
    cell = d.pop("cell_size", None)
    if isinstance(feat, FeatureSpec):
        spec = feat
    elif isinstance(feat, dict):
        spec = FeatureSpec(**feat)
    else:
        spec = FeatureSpec(feat or FeatureKind.HOG, 8 if cell is None else cell)
    if cell is not None and not isinstance(feat, str):
        spec = FeatureSpec(spec.kind, cell)
    solver = d.pop("solver", None)
    if isinstance(solver, dict):
        solver = SolverConfig.from_dict(solver)
    kwargs = {k: v for k, v in d.items() if v is not None}
    try:
        return ExperimentConfig(feature=spec, solver=solver or SolverConfig(), **kwargs)
    except TypeError as exc:
        raise InvalidInputError(str(exc)) from None


def load_config(path):
    """Parse a TOML experiment config."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise InvalidInputError(f"{path}: {exc}") from None
    return config_from_mapping(data)


# ---------------------------------------------------------------- ingestion


def load_image(path):
    """Decode an image file to a float gray image in [0, 1]."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("1", "L", "P", "LA", "PA"):
                if im.mode in ("P", "PA"):
                    im = im.convert("RGB")
                    arr = rgb_to_gray(np.asarray(im, dtype=float))
                else:
                    arr = np.asarray(im.convert("L"), dtype=float)
            elif im.mode in ("RGB", "RGBA", "RGBX", "CMYK", "YCbCr"):
                arr = rgb_to_gray(np.asarray(im.convert("RGB"), dtype=float))
            else:
                raise InvalidInputError(f"{path}: unsupported image mode {im.mode} (8-bit expected)")
    except (OSError, UnidentifiedImageError) as exc:
        raise InvalidInputError(f"cannot read image {path}: {exc}") from None
    return check_image(arr / 255.0)


def ingest_dataset(root):
    """Load ``root/<label>/*.{png,pgm,...}`` into ``{label: [image, ...]}``.

    Labels and files are sorted; every image must share one size.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} does not exist or is not a directory")
    out = {}
    shape = None
    for sub in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
        files = sorted(
            f for f in sub.iterdir()
            if f.is_file() and f.suffix.lower() in IMAGE_SUFFIXES and not f.name.startswith(".")
        )
        if not files:
            raise EmptyClassError(sub.name, f"class directory {sub} contains no images")
        imgs = []
        for f in files:
            img = load_image(f)
            if shape is None:
                shape = img.shape
            elif img.shape != shape:
                raise InvalidInputError(f"{f}: size {img.shape} differs from {shape}")
            imgs.append(img)
        out[sub.name] = imgs
    if not out:
        raise InvalidInputError(f"no class directories under {root}")
    return out


def augment(images, degrees):
    """Originals followed by every rotation of every image.

    Order is image-major: all of ``images`` first, then for each image
    its rotations in `degrees` order.
    """
    images = list(images)
    out = list(images)
    for img in images:
        out.extend(rotate(img, d) for d in degrees)
    return out


# ---------------------------------------------------------------- trials


def _trial_rng(seed, t):
    return np.random.Generator(np.random.PCG64((seed ^ t) & _U64))


def _check_feasible(dataset, atoms, tests, n_rot):
    for label, imgs in dataset.items():
        n = len(imgs)
        pool = (n - tests) * (1 + n_rot)
        if n < tests + 1 or atoms > pool:
            raise InvalidInputError(
                f"class {label!r} has {n} images: cannot hold out {tests} tests and draw "
                f"{atoms} atoms from the remaining pool of {max(pool, 0)}"
            )


def draw_split(rng, dataset, atoms, tests, n_rot):
    """Per-class ``(test_indices, atom_keys)`` for one trial.

    Atom keys are ``(image_index, variant)`` with variant 0 the original
    and ``1..n_rot`` the rotations.
    """
    split = {}
    for label in sorted(dataset):
        perm = rng.permutation(len(dataset[label]))
        test_idx = [int(i) for i in perm[:tests]]
        pool = [(int(i), v) for i in perm[tests:] for v in range(n_rot + 1)]
        chosen = rng.choice(len(pool), size=atoms, replace=False)
        split[label] = (test_idx, [pool[int(c)] for c in chosen])
    return split


def split_hash(split):
    h = hashlib.sha256()
    for label in sorted(split):
        tests, atoms = split[label]
        h.update(repr((label, tests, atoms)).encode())
    return h.hexdigest()


class _FeatureStore:
    """Lazily extracts and memoizes features of (class, image, variant)."""

    def __init__(self, dataset, spec, rotations):
        self.dataset = dataset
        self.spec = spec
        self.rotations = rotations
        self._memo = {}

    def get(self, label, idx, variant=0):
        key = (label, idx, variant)
        fv = self._memo.get(key)
        if fv is None:
            img = self.dataset[label][idx]
            if variant:
                img = rotate(img, self.rotations[variant - 1])
            fv = extract(img, self.spec)
            self._memo[key] = fv
        return fv


def _run_trials(cfg, dataset, atoms, store=None):
    tests = cfg.tests_per_class
    rots = cfg.augment_rotations
    _check_feasible(dataset, atoms, tests, len(rots))
    store = store or _FeatureStore(dataset, cfg.feature, rots)
    records = []
    for t in range(cfg.trials):
        split = draw_split(_trial_rng(cfg.seed, t), dataset, atoms, tests, len(rots))
        d = build_dictionary(
            {lbl: [store.get(lbl, i, v) for i, v in atom_keys] for lbl, (_, atom_keys) in split.items()}
        )
        test_vecs = [(lbl, store.get(lbl, i)) for lbl, (idx, _) in split.items() for i in idx]
        cache = GramCache(maxsize=len(d.class_offsets))
        t0 = time.perf_counter()
        correct = sum(
            classify(fv, d, cfg.solver, cfg.metric, cache=cache).predicted == lbl
            for lbl, fv in test_vecs
        )
        elapsed = (time.perf_counter() - t0) * 1e3
        rec = TrialRecord(
            recognition_rate=correct / len(test_vecs),
            wall_time_ms=elapsed,
            split_hash=split_hash(split),
            n_correct=int(correct),
            n_tests=len(test_vecs),
        )
        log.info("trial %d: rate %.4f (%d/%d) %.1f ms", t, rec.recognition_rate, correct, len(test_vecs), elapsed)
        records.append(rec)
    return TrialReport.from_trials(records, cfg, atoms)


def _dataset_for(cfg, dataset):
    if dataset is None:
        if cfg.dataset_root is None:
            raise InvalidInputError("no dataset given and dataset_root is unset")
        dataset = ingest_dataset(cfg.dataset_root)
    if not dataset:
        raise InvalidInputError("dataset has no classes")
    return {str(k): list(v) for k, v in dataset.items()}


def run_experiment(cfg, dataset=None, atoms=None):
    """Run ``cfg.trials`` trials at one atom count.

    Parameters
    ----------
    cfg : ExperimentConfig
    dataset : mapping of label to list of images, optional
        In-memory dataset; ingested from ``cfg.dataset_root`` if omitted.
    atoms : int, optional
        Atom count per class; required when ``cfg.atoms_per_class`` is a
        sweep list.
    """
    dataset = _dataset_for(cfg, dataset)
    if atoms is None:
        if isinstance(cfg.atoms_per_class, tuple):
            if len(cfg.atoms_per_class) != 1:
                raise InvalidInputError("atoms_per_class is a sweep; use run_sweep")
            atoms = cfg.atoms_per_class[0]
        else:
            atoms = cfg.atoms_per_class
    return _run_trials(cfg, dataset, int(atoms))


def run_sweep(cfg, dataset=None):
    """One :class:`TrialReport` per atom count, keyed by that count."""
    dataset = _dataset_for(cfg, dataset)
    for a in cfg.atoms_list:
        _check_feasible(dataset, a, cfg.tests_per_class, len(cfg.augment_rotations))
    store = _FeatureStore(dataset, cfg.feature, cfg.augment_rotations)
    return {a: _run_trials(cfg, dataset, a, store) for a in cfg.atoms_list}


def compare_regularizers(cfg, dataset=None):
    """Run the same trials under L1 and L1-L2 penalties.

    Returns
    -------
    dict
        ``{atoms: (l1_report, l12_report)}``.
    """
    dataset = _dataset_for(cfg, dataset)
    for a in cfg.atoms_list:
        _check_feasible(dataset, a, cfg.tests_per_class, len(cfg.augment_rotations))
    store = _FeatureStore(dataset, cfg.feature, cfg.augment_rotations)
    out = {}
    for a in cfg.atoms_list:
        pair = []
        for reg in (Regularizer.L1, Regularizer.L12):
            arm = replace(cfg, solver=replace(cfg.solver, regularizer=reg))
            pair.append(_run_trials(arm, dataset, a, store))
        if pair[0].split_hashes != pair[1].split_hashes:
            raise SGRecError("regularizer arms drew different splits")
        out[a] = tuple(pair)
    return out


# ---------------------------------------------------------------- reporting


def _fmt(x):
    return format(x, ".10g")


def emit_report(report, fmt="csv"):
    """Render one report as ``csv``, ``json`` or an aligned ``table``."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    rows = [(str(i), _fmt(t.recognition_rate), _fmt(t.wall_time_ms)) for i, t in enumerate(report.per_trial)]
    rows.append(("mean", _fmt(report.mean_rate), _fmt(report.mean_time_ms)))
    header = ("trial", "rate", "wall_time_ms")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "table":
        return _table([header] + rows)
    raise InvalidInputError(f"unknown output format {fmt!r}")


def emit_sweep(reports, fmt="csv"):
    """Render ``{atoms: report}`` with a leading ``atoms`` column."""
    if fmt == "json":
        return json.dumps({str(a): r.to_dict() for a, r in reports.items()}, indent=2) + "\n"
    header = ("atoms", "trial", "rate", "wall_time_ms")
    rows = []
    for a, r in reports.items():
        rows.extend(
            (str(a), str(i), _fmt(t.recognition_rate), _fmt(t.wall_time_ms))
            for i, t in enumerate(r.per_trial)
        )
        rows.append((str(a), "mean", _fmt(r.mean_rate), _fmt(r.mean_time_ms)))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "table":
        summary = [("atoms", "mean_rate", "mean_time_ms")] + [
            (str(a), f"{r.mean_rate:.4f}", f"{r.mean_time_ms:.2f}") for a, r in reports.items()
        ]
        return _table(summary)
    raise InvalidInputError(f"unknown output format {fmt!r}")


def emit_comparison(pairs, fmt="table"):
    """Two rows (l1, l12) of mean rates, one column per atom count."""
    atoms = list(pairs)
    if fmt == "json":
        return json.dumps(
            {
                str(a): {"l1": p[0].to_dict(), "l12": p[1].to_dict()}
                for a, p in pairs.items()
            },
            indent=2,
        ) + "\n"
    header = ("regularizer",) + tuple(str(a) for a in atoms)
    rows = [
        ("l1",) + tuple(f"{pairs[a][0].mean_rate:.4f}" for a in atoms),
        ("l12",) + tuple(f"{pairs[a][1].mean_rate:.4f}" for a in atoms),
    ]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "table":
        return _table([header] + rows)
    raise InvalidInputError(f"unknown output format {fmt!r}")


def _table(rows):
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def report_from_json(text):
    return TrialReport.from_dict(json.loads(text))
