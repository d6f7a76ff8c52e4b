r"""ADMM solver for the :math:`\ell_1 - \ell_2` regularized least-squares code

.. math::

    \min_x \tfrac12 \|A x - b\|_2^2 + \lambda (\|x\|_1 - \|x\|_2)

on one class sub-dictionary :math:`A`. The x-step solves the normal
equation with a cached Cholesky factor of :math:`A^T A + \rho I`; the
y-step is the closed-form prox with scale ``theta = lam / rho``; the
scaled dual is updated as ``yhat <- x - y + yhat``.
"""

import enum
import hashlib
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .errors import InvalidInputError, NumericalFailureError
from .prox import norm_l12, prox_l1, prox_l12

__all__ = [
    "Regularizer",
    "SolverConfig",
    "FactorizedGram",
    "SolveResult",
    "GramCache",
    "factorize",
    "x_update",
    "solve",
    "objective",
]

# Below this norm the relative-change test falls back to absolute change.
_ZERO_NORM = 1e-12


class Regularizer(str, enum.Enum):
    L12 = "l12"
    L1 = "l1"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the inner ADMM loop.

    Defaults are the ones used for every reported experiment:
    ``rho=1000``, ``lam=1``, 20 inner iterations, ``tol=1e-4``.
    """

    lam: float = 1.0
    rho: float = 1000.0
    max_inner: int = 20
    tol: float = 1e-4
    regularizer: Regularizer = Regularizer.L12

    def __post_init__(self):
        object.__setattr__(self, "regularizer", Regularizer(self.regularizer))
        # lam == 0 is accepted so the penalty can be switched off entirely.
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise InvalidInputError(f"lam must be >= 0, got {self.lam}")
        if not (np.isfinite(self.rho) and self.rho > 0):
            raise InvalidInputError(f"rho must be > 0, got {self.rho}")
        if int(self.max_inner) != self.max_inner or self.max_inner < 1:
            raise InvalidInputError(f"max_inner must be a positive integer, got {self.max_inner}")
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise InvalidInputError(f"tol must be > 0, got {self.tol}")
        object.__setattr__(self, "max_inner", int(self.max_inner))

    @property
    def theta(self):
        return self.lam / self.rho

    def to_dict(self):
        return {
            "lambda": self.lam,
            "rho": self.rho,
            "max_inner": self.max_inner,
            "tol": self.tol,
            "regularizer": self.regularizer.value,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass(frozen=True, eq=False)
class FactorizedGram:
    """Lower Cholesky factor ``L`` with ``L @ L.T == A.T @ A + rho * I``."""

    chol_lower: np.ndarray
    rho: float

    @property
    def n(self):
        return self.chol_lower.shape[0]


@dataclass(frozen=True)
class SolveResult:
    x_star: np.ndarray
    iterations: int
    final_rel_change: float
    final_objective: float
    converged: bool
    # ||x - y|| after the first and after the last iteration.
    first_gap: float = float("nan")
    final_gap: float = float("nan")

    def __eq__(self, other):
        if not isinstance(other, SolveResult):
            return NotImplemented
        return (
            np.array_equal(self.x_star, other.x_star)
            and self.iterations == other.iterations
            and _same_float(self.final_rel_change, other.final_rel_change)
            and _same_float(self.final_objective, other.final_objective)
            and self.converged == other.converged
            and _same_float(self.first_gap, other.first_gap)
            and _same_float(self.final_gap, other.final_gap)
        )


def _same_float(a, b):
    return a == b or (np.isnan(a) and np.isnan(b))


def _as_matrix(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise InvalidInputError(f"dictionary block must be 2-D, got shape {a.shape}")
    return a


def factorize(dict_block, rho):
    """Cholesky-factor ``A.T @ A + rho * I``.

    Parameters
    ----------
    dict_block : array_like, shape (m, n)
    rho : float
        Positive penalty; makes the Gram matrix positive definite.

    Returns
    -------
    FactorizedGram
    """
    a = _as_matrix(dict_block)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("dictionary block has non-finite entries")
    rho = float(rho)
    if not (np.isfinite(rho) and rho > 0):
        raise InvalidInputError(f"rho must be > 0, got {rho}")
    gram = a.T @ a
    gram[np.diag_indices_from(gram)] += rho
    lower = cholesky(gram, lower=True, check_finite=False)
    lower.setflags(write=False)
    return FactorizedGram(chol_lower=lower, rho=rho)


def x_update(f, atb, y, yhat, rho):
    """Solve ``(A.T A + rho I) x = A.T b + rho (y - yhat)`` with the factor.

    Forward substitution with ``L`` followed by back substitution with
    ``L.T``.
    """
    n = f.n
    atb = np.asarray(atb, dtype=float)
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    for name, vec in (("atb", atb), ("y", y), ("yhat", yhat)):
        if vec.shape != (n,):
            raise InvalidInputError(f"{name} has shape {vec.shape}, expected ({n},)")
    rhs = atb + rho * y - rho * yhat
    w = solve_triangular(f.chol_lower, rhs, lower=True, check_finite=False)
    return solve_triangular(f.chol_lower, w, lower=True, trans="T", check_finite=False)


def objective(dict_block, b, x, lam, regularizer=Regularizer.L12):
    """Model objective ``0.5 ||A x - b||^2 + lam * penalty(x)``."""
    a = np.asarray(dict_block, dtype=float)
    r = a @ x - b
    pen = norm_l12(x) if Regularizer(regularizer) is Regularizer.L12 else float(np.sum(np.abs(x)))
    return 0.5 * float(r @ r) + lam * pen


def _block_key(a, rho):
    h = hashlib.sha1(np.ascontiguousarray(a).view(np.uint8))
    h.update(repr((a.shape, a.dtype.str)).encode())
    return h.hexdigest(), float(rho)


class GramCache:
    """Thread-safe LRU cache of factors keyed by (block content hash, rho)."""

    def __init__(self, maxsize=64):
        self.maxsize = maxsize
        self._store = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, dict_block, rho):
        a = _as_matrix(dict_block)
        key = _block_key(a, rho)
        with self._lock:
            f = self._store.get(key)
            if f is not None:
                self._store.move_to_end(key)
                self.hits += 1
                return f
        f = factorize(a, rho)
        with self._lock:
            self.misses += 1
            self._store[key] = f
            while len(self._store) > self.maxsize:
                self._store.popitem(last=False)
        return f

    def __len__(self):
        return len(self._store)

    def clear(self):
        with self._lock:
            self._store.clear()


def solve(dict_block, b, cfg=None, factor=None, label=None):
    """Run the inner ADMM loop for one sub-dictionary.

    Parameters
    ----------
    dict_block : array_like, shape (m, n)
        Sub-dictionary with unit-norm columns.
    b : array_like, shape (m,)
        Test vector, used as given.
    cfg : SolverConfig, optional
    factor : FactorizedGram, optional
        Precomputed factor for ``(dict_block, cfg.rho)``; computed if absent.
    label : str, optional
        Attached to a :class:`NumericalFailureError` if one is raised.

    Returns
    -------
    SolveResult
    """
    cfg = SolverConfig() if cfg is None else cfg
    a = _as_matrix(dict_block)
    m, n = a.shape
    if m == 0 or n == 0:
        raise InvalidInputError(f"zero-size dictionary block {a.shape}")
    b = np.asarray(b, dtype=float)
    if b.shape != (m,):
        raise InvalidInputError(f"b has shape {b.shape}, expected ({m},)")
    if not np.all(np.isfinite(b)):
        raise InvalidInputError("b has non-finite entries")
    if factor is None:
        factor = factorize(a, cfg.rho)
    elif factor.n != n or factor.rho != float(cfg.rho):
        raise InvalidInputError("factor does not match dictionary block / rho")

    prox = prox_l12 if cfg.regularizer is Regularizer.L12 else prox_l1
    rho, theta = cfg.rho, cfg.theta
    atb = a.T @ b
    x = np.zeros(n)
    y = np.zeros(n)
    yhat = np.zeros(n)
    rel = float("inf")
    first_gap = float("nan")
    converged = False
    j = 0
    for j in range(1, cfg.max_inner + 1):
        x_new = x_update(factor, atb, y, yhat, rho)
        if not np.all(np.isfinite(x_new)):
            raise NumericalFailureError(f"non-finite x at iteration {j}", j, label)
        y = prox(x_new + yhat, theta)
        yhat = x_new - y + yhat
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(yhat))):
            raise NumericalFailureError(f"non-finite y/yhat at iteration {j}", j, label)
        step = float(np.linalg.norm(x_new - x))
        prev = float(np.linalg.norm(x))
        rel = step / prev if prev >= _ZERO_NORM else step
        x = x_new
        if j == 1:
            first_gap = float(np.linalg.norm(x - y))
        if rel < cfg.tol:
            converged = True
            break

    return SolveResult(
        x_star=x,
        iterations=j,
        final_rel_change=rel,
        final_objective=objective(a, b, x, cfg.lam, cfg.regularizer),
        converged=converged,
        first_gap=first_gap,
        final_gap=float(np.linalg.norm(x - y)),
    )
