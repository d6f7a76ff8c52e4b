"""Sparse-representation gesture recognition with an l1-l2 penalty solved by ADMM."""

__version__ = "0.1.0"

from .admm import FactorizedGram, GramCache, Regularizer, SolveResult, SolverConfig, factorize, solve, x_update
from .classifier import ClassScores, MetricKind, classify, cosine_metric, residual_metric
from .dictionary import PartitionedDictionary, build_dictionary, load_dictionary, normalize_columns, save_dictionary
from .features import (
    FeatureKind,
    FeatureSpec,
    FeatureVector,
    hog_descriptor,
    lbp_descriptor,
    raw_vectorize,
    rotate,
)
from .prox import prox_l1, prox_l12, shrink
