r"""Shrinkage and proximal operators for the :math:`\ell_1` and
:math:`\ell_1 - \ell_2` penalties.

The weight on the :math:`\ell_2` term is fixed at one, so the penalty is
:math:`J(u) = \|u\|_1 - \|u\|_2`.
"""

import numpy as np

from .errors import InvalidInputError

__all__ = ["shrink", "prox_l1", "prox_l12", "norm_l12", "prox_objective"]


def _check(v, theta, name="theta"):
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("input vector has non-finite components")
    theta = float(theta)
    if not np.isfinite(theta) or theta < 0:
        raise InvalidInputError(f"{name} must be a finite nonnegative number, got {theta}")
    return v, theta


def shrink(u, mu):
    """Componentwise soft-thresholding ``sign(u) * max(|u| - mu, 0)``.

    Parameters
    ----------
    u : array_like
        Input vector.
    mu : float
        Threshold, ``mu >= 0``.

    Returns
    -------
    ndarray
        Array of the same shape as `u`.
    """
    u, mu = _check(u, mu, "mu")
    return np.sign(u) * np.maximum(np.abs(u) - mu, 0.0)


def prox_l1(v, theta):
    r"""Proximal operator of :math:`\theta \|\cdot\|_1` (soft-thresholding)."""
    return shrink(v, theta)


def norm_l12(x):
    r"""Value of :math:`\|x\|_1 - \|x\|_2` (always nonnegative)."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.abs(x)) - np.linalg.norm(x))


def prox_objective(u, v, theta):
    r"""Evaluate :math:`\tfrac12\|u - v\|^2 + \theta (\|u\|_1 - \|u\|_2)`."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return 0.5 * float(np.sum((u - v) ** 2)) + theta * norm_l12(u)


def prox_l12(v, theta):
    r"""Proximal operator of :math:`\theta (\|\cdot\|_1 - \|\cdot\|_2)`.

    With ``z = shrink(v, theta)``, the result is ``z + theta * z / ||z||``
    whenever ``z`` is nonzero. If ``z`` vanishes but `v` does not
    (``0 < max|v_i| <= theta``) the minimizer is 1-sparse: it keeps
    ``v_i`` at the first index of largest magnitude and zeros the rest.
    ``v = 0`` maps to 0.

    Parameters
    ----------
    v : array_like
        Input vector.
    theta : float
        Penalty scale, ``theta >= 0``.

    Returns
    -------
    ndarray
        A global minimizer of ``prox_objective(., v, theta)``.
    """
    v, theta = _check(v, theta)
    z = np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)
    znorm = np.linalg.norm(z)
    if znorm > 0:
        return z * (1.0 + theta / znorm)
    u = np.zeros_like(v)
    if v.size == 0:
        return u
    flat = v.ravel()
    idx = int(np.argmax(np.abs(flat)))
    if flat[idx] != 0:
        u.ravel()[idx] = flat[idx]
    return u
