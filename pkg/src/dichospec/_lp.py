"""Three-variable envelope LP shared by every fit.

All fits reduce to: given a cloud of points ``(u_i, v_i, y_i)`` find
``(alpha, theta, logK)`` with

    y_i <= logK + alpha * u_i + theta * v_i     for every i

inside box bounds, minimising a linear objective. The feasible set only
depends on the convex hull of the cloud, so the LP is first solved on the
hull vertices and then checked against the full cloud (violated points are
added back until none remain).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

__all__ = ["hull_indices", "EnvelopeResult", "solve_envelope", "required_logK"]

ALPHA_FLOOR = -1e6


def _affine_rank(X, rtol=1e-10):
    c = X - X.mean(axis=0)
    if len(c) < 2:
        return 0, np.eye(X.shape[1])
    _, s, vt = np.linalg.svd(c, full_matrices=False)
    if s[0] == 0:
        return 0, vt
    return int(np.sum(s > rtol * s[0])), vt


def hull_indices(points) -> np.ndarray:
    """Indices of a superset of the convex-hull vertices of ``points`` (n, 3)."""
    P = np.asarray(points, dtype=float)
    n = len(P)
    if n <= 8:
        return np.arange(n)
    # qhull is scale sensitive; vertex sets are invariant under affine maps
    scale = P.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (P - P.mean(axis=0)) / scale
    r, vt = _affine_rank(Z)
    if r == 0:
        return np.array([0])
    proj = Z @ vt[:r].T
    if r == 1:
        x = proj[:, 0]
        return np.unique([int(np.argmin(x)), int(np.argmax(x))])
    for opts in (None, "QJ"):
        try:
            return np.sort(ConvexHull(proj, qhull_options=opts).vertices)
        except QhullError:
            continue
    return np.arange(n)


@dataclass
class EnvelopeResult:
    feasible: bool
    alpha: float
    theta: float
    logK: float               # exact requirement max(0, max_i(y - alpha u - theta v))
    worst_slack: float        # max_i(y - logK - alpha u - theta v)
    binding: int              # index of the tightest point
    n_active: int
    required_logK: float = np.nan   # set when infeasible: smallest logK the bounds allow


def required_logK(u, v, y, alpha, theta):
    r = y - alpha * u - theta * v
    i = int(np.argmax(r))
    return float(r[i]), i


def _linprog(c, A, b, bounds):
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    return res


def _stages(u, v, y, a_bounds, t_bounds, cap, mode, mult):
    """Solve on a subset; returns (alpha, theta) or None when infeasible."""
    A = np.column_stack([-u, -v, -np.ones_like(u)])
    b = -y
    bounds = [a_bounds, t_bounds, (0.0, cap)]
    if mode == "alpha":
        first = np.array([1.0, 0.0, 0.0])
    elif mode == "sum":
        first = np.array([1.0, mult, 0.0])
    elif mode == "alpha_then_theta":
        first = np.array([1.0, 0.0, 0.0])
    else:
        raise ValueError(mode)
    res = _linprog(first, A, b, bounds)
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    x = res.x
    opt = float(first @ x)
    # lexicographic tie-break: smallest alpha, then smallest theta on the optimal face
    slack = 1e-9 * (1.0 + abs(opt))
    A2 = np.vstack([A, first])
    b2 = np.append(b, opt + slack)
    for c in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        res2 = _linprog(c, A2, b2, bounds)
        if res2.status != 0:
            break
        x = res2.x
        A2 = np.vstack([A2, c])
        b2 = np.append(b2, float(c @ x) + 1e-9 * (1.0 + abs(float(c @ x))))
    return float(x[0]), float(x[1])


def _polish(u, v, y, alpha, theta, cap, a_bounds):
    """Smallest alpha >= LP alpha making the full cloud feasible at logK = cap."""
    pos = u > 0
    if np.any(pos):
        need = float(np.max((y[pos] - theta * v[pos] - cap) / u[pos]))
        alpha = max(alpha, need)
    return alpha


def solve_envelope(u, v, y, *, alpha_bounds, theta_bounds, logK_cap, mode="sum",
                   multiplier=1.0, hull=None, max_rounds=40) -> EnvelopeResult:
    """Solve the envelope LP on the full cloud via hull thinning plus cutting planes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y)
    if not np.all(keep):
        # log-norm -inf means the operator vanishes: the constraint always holds
        orig = np.nonzero(keep)[0]
        if hull is not None:
            hull = np.asarray(hull)
            hull = np.searchsorted(orig, hull[keep[hull]])
        u, v, y = u[keep], v[keep], y[keep]
    else:
        orig = None
    if len(y) == 0:
        # no constraints: the objective runs to its box bound
        return EnvelopeResult(True, alpha_bounds[0], theta_bounds[0], 0.0, -np.inf, -1, 0)
    active = hull_indices(np.column_stack([u, v, y])) if hull is None else np.asarray(hull)
    scale = 1.0 + float(np.max(np.abs(y)))
    tol = 1e-12 * scale
    mask = np.zeros(len(y), dtype=bool)
    mask[active] = True
    for _ in range(max_rounds):
        idx = np.nonzero(mask)[0]
        sol = _stages(u[idx], v[idx], y[idx], alpha_bounds, theta_bounds, logK_cap, mode, multiplier)
        if sol is None:
            return _infeasible(u, v, y, alpha_bounds, theta_bounds, orig, active)
        alpha, theta = sol
        r = y - alpha * u - theta * v
        over = r > logK_cap + 1e-9 * scale
        if not np.any(over & ~mask):
            break
        new = np.nonzero(over & ~mask)[0]
        worst = new[np.argsort(-r[new])[:500]]
        mask[worst] = True
    alpha = _polish(u, v, y, alpha, theta, logK_cap, alpha_bounds)
    if alpha <= alpha_bounds[1] + tol:
        alpha = min(alpha, alpha_bounds[1])
    req, i = required_logK(u, v, y, alpha, theta)
    logK = max(0.0, req)
    feasible = (alpha <= alpha_bounds[1]) and (logK <= logK_cap + tol)
    b = int(orig[i]) if orig is not None else i
    res = EnvelopeResult(feasible, alpha, theta, logK, req - logK, b, int(mask.sum()))
    if not feasible:
        res.required_logK = req
    return res


def _infeasible(u, v, y, a_bounds, t_bounds, orig, act):
    """Relaxed problem without the cap: minimal logK and the pair that forces it."""
    A = np.column_stack([-u[act], -v[act], -np.ones(len(act))])
    res = linprog([0.0, 0.0, 1.0], A_ub=A, b_ub=-y[act], bounds=[a_bounds, t_bounds, (0.0, None)],
                  method="highs")
    if res.status != 0:
        return EnvelopeResult(False, np.nan, np.nan, np.inf, np.inf, -1, len(act), np.inf)
    alpha, theta = float(res.x[0]), float(res.x[1])
    req, i = required_logK(u, v, y, alpha, theta)
    b = int(orig[i]) if orig is not None else i
    return EnvelopeResult(False, alpha, theta, max(0.0, req), req - max(0.0, req), b, len(act), req)
