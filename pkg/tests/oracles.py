"""Independent reference computations used by the tests.

None of these call into the code under test.
"""

import itertools

import numpy as np
from scipy.optimize import minimize


def l12_objective(u, v, theta):
    u = np.asarray(u, dtype=float)
    return 0.5 * np.sum((u - v) ** 2, axis=-1) + theta * (
        np.sum(np.abs(u), axis=-1) - np.linalg.norm(u, axis=-1)
    )


def _sign_patterns(n):
    pats = np.array(list(itertools.product((-1, 0, 1), repeat=n)), dtype=float)
    return pats[np.any(pats != 0, axis=1)]


_PATTERNS = {}


def prox_l12_enumeration(v, theta):
    """Global minimizer of 0.5||u - v||^2 + theta (||u||_1 - ||u||_2).

    On a fixed support S with signs s the objective is smooth, and its
    stationary points satisfy u_S (1 - theta/||u_S||) = v_S - theta s =: w,
    so u_S is parallel to w with ||u_S|| = theta + ||w|| or theta - ||w||.
    Every such candidate (plus 0 and the 1-sparse copies of v) is scored
    with the true objective and the best one returned.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if n not in _PATTERNS:
        _PATTERNS[n] = _sign_patterns(n)
    pats = _PATTERNS[n]
    mask = pats != 0
    w = np.where(mask, v - theta * pats, 0.0)
    wn = np.linalg.norm(w, axis=1)
    ok = wn > 0
    safe = np.where(ok, wn, 1.0)[:, None]
    cands = [np.zeros((1, n)), np.diag(v)]
    cands.append((w * (1.0 + theta / safe))[ok])
    inner = ok & (theta - wn > 0)
    cands.append((-w * (theta - wn)[:, None] / safe)[inner])
    cands = np.vstack(cands)
    obj = l12_objective(cands, v, theta)
    best = int(np.argmin(obj))
    return cands[best], float(obj[best])


def prox_l12_grid(v, theta, lim=None, step=0.005):
    """Grid search over R^2 refined by Nelder-Mead. Two-dimensional only."""
    v = np.asarray(v, dtype=float)
    assert v.size == 2
    lim = lim or (np.max(np.abs(v)) + theta + 1.0)
    g = np.arange(-lim, lim + step, step)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    obj = l12_objective(pts, v, theta)
    start = pts[int(np.argmin(obj))]
    res = minimize(
        lambda u: float(l12_objective(u, v, theta)),
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000},
    )
    u = res.x if res.fun <= obj.min() else start
    return u, float(l12_objective(u, v, theta))


def dense_normal_solve(a, b_rhs, rho):
    """Solve (A^T A + rho I) x = rhs by a general dense LU solve."""
    gram = a.T @ a + rho * np.eye(a.shape[1])
    return np.linalg.solve(gram, b_rhs)
