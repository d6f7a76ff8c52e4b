"""Per-class sparse coding and nearest-class identification."""

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .admm import SolverConfig, solve
from .errors import InvalidInputError, NumericalFailureError

__all__ = [
    "MetricKind",
    "ClassScore",
    "ClassScores",
    "residual_metric",
    "cosine_metric",
    "classify",
    "argmin_label",
]

log = logging.getLogger(__name__)


class MetricKind(str, enum.Enum):
    RESIDUAL = "residual"
    COSINE = "cosine"


@dataclass(frozen=True)
class ClassScore:
    label: str
    r_value: float
    solve: object
    # True when the cosine metric hit a zero vector and fell back to 1.
    degenerate: bool = False


@dataclass(frozen=True)
class ClassScores:
    per_class: tuple
    predicted: str
    metric_kind: MetricKind = MetricKind.RESIDUAL
    flags: tuple = field(default=())

    def r_values(self):
        return {s.label: s.r_value for s in self.per_class}


def _reconstruction(b, dict_block, x_star):
    b = np.asarray(b, dtype=float)
    a = np.asarray(dict_block, dtype=float)
    x = np.asarray(x_star, dtype=float)
    if a.ndim != 2 or b.shape != (a.shape[0],) or x.shape != (a.shape[1],):
        raise InvalidInputError(
            f"dimension mismatch: b {b.shape}, block {a.shape}, x {x.shape}"
        )
    return b, a @ x


def residual_metric(b, dict_block, x_star):
    """L2 residual ``||b - D_i x_i||``."""
    b, recon = _reconstruction(b, dict_block, x_star)
    return float(np.linalg.norm(b - recon))


def _cosine(b, recon):
    nb = np.linalg.norm(b)
    nr = np.linalg.norm(recon)
    if nb == 0 or nr == 0:
        return 1.0, True
    cos = float(b @ recon) / (nb * nr)
    return float(np.clip(1.0 - cos, 0.0, 2.0)), False


def cosine_metric(b, dict_block, x_star):
    """One minus the cosine of the angle between `b` and ``D_i x_i``.

    Returns 1 (no similarity) when either vector is zero.
    """
    b, recon = _reconstruction(b, dict_block, x_star)
    return _cosine(b, recon)[0]


def argmin_label(r_values):
    """Label with the smallest score; ties go to the smallest label."""
    return min(r_values.items(), key=lambda kv: (kv[1], kv[0]))[0]


def classify(b, d, cfg=None, metric=MetricKind.RESIDUAL, cache=None, workers=1):
    """Predict the class of `b` against a partitioned dictionary.

    Parameters
    ----------
    b : FeatureVector or array_like
        Test vector; used without normalization.
    d : PartitionedDictionary
    cfg : SolverConfig, optional
    metric : MetricKind or str
    cache : GramCache, optional
        Reuses Cholesky factors across calls with the same dictionary.
    workers : int
        Number of threads for the per-class solves.

    Returns
    -------
    ClassScores
    """
    cfg = SolverConfig() if cfg is None else cfg
    metric = MetricKind(metric)
    if hasattr(b, "spec"):
        if b.spec != d.feature_spec or tuple(b.source_dims) != d.source_dims:
            raise InvalidInputError(
                f"test vector {b.spec}/{b.source_dims} does not match dictionary "
                f"{d.feature_spec}/{d.source_dims}"
            )
        vec = b.values
    else:
        vec = b
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (d.m,):
        raise InvalidInputError(f"test vector has shape {vec.shape}, expected ({d.m},)")
    if not np.all(np.isfinite(vec)):
        raise InvalidInputError("test vector has non-finite entries")

    def score(item):
        label, block = item
        factor = cache.get(block, cfg.rho) if cache is not None else None
        try:
            res = solve(block, vec, cfg, factor=factor, label=label)
        except NumericalFailureError as exc:
            raise NumericalFailureError(
                f"class {label!r}: {exc}", exc.iteration, label
            ) from exc
        recon = block @ res.x_star
        if metric is MetricKind.RESIDUAL:
            return ClassScore(label, float(np.linalg.norm(vec - recon)), res)
        r, degenerate = _cosine(vec, recon)
        return ClassScore(label, r, res, degenerate)

    items = list(d.blocks())
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, items))
    else:
        scores = [score(it) for it in items]
    # Join by label so completion order never matters.
    scores = tuple(sorted(scores, key=lambda s: s.label))
    flags = tuple(f"{s.label}: zero vector in cosine metric" for s in scores if s.degenerate)
    for msg in flags:
        log.debug(msg)
    predicted = argmin_label({s.label: s.r_value for s in scores})
    return ClassScores(per_class=scores, predicted=predicted, metric_kind=metric, flags=flags)
