"""Windowed verification and optimal fitting of dichotomy constants.

Every estimate is a finite certificate: for all pairs in a window,

    stable   (k >= n):  log||Phi(k,n) P(n)||      <= logK + alpha (L(k)-L(n)) + theta lam(n)
    unstable (k <= n):  log||Phi(k,n)(Id-P(n))||  <= logK + beta  (L(k)-L(n)) + nu    lam(n)

Each point of the pair cloud is ``(u, v, y)`` with ``u = |L(k)-L(n)|``,
``v = lam(n)`` and ``y`` the log-norm. Weighting by ``gamma`` shears
``y`` by ``-gamma (L(k)-L(n))`` and leaves the convex hull combinatorics
unchanged, so clouds and hulls are computed once per system and reused
across a whole spectral sweep.
"""

from __future__ import annotations

import threading
import weakref
from dataclasses import asdict, dataclass, replace

import numpy as np

from ._lp import ALPHA_FLOOR, hull_indices, solve_envelope
from .growth import GrowthRate
from .system import (LinearSystem, ProjectorFamily, WeightedSystem, coordinate_projectors,
                     identity_projector, pair_log_norms, zero_projector)

__all__ = [
    "FitCaps",
    "DichotomyParams",
    "FitReport",
    "GrowthFit",
    "FitInfeasible",
    "ProjectorVerdict",
    "verify",
    "fit_stable",
    "fit_unstable",
    "growth_fit",
    "projector_verdict",
    "candidate_projectors",
    "feasible_projectors",
    "usp_check",
    "upp_check",
    "clear_cache",
    "effective_floor",
]

FIT_CLASSES = ("uniform", "nonuniform", "slow")


@dataclass(frozen=True)
class FitCaps:
    """Caps and floors that turn the asymptotic definitions into finite LPs."""

    logK_cap: float = 2.0
    theta_cap: float = 100.0
    alpha_min: float = 1e-3
    beta_min: float = 1e-3
    multiplier: float = 1.0   # nonuniform condition alpha + m theta < 0

    def __post_init__(self):
        if not (self.logK_cap >= 0 and self.theta_cap >= 0):
            raise ValueError("caps must be nonnegative")
        if not (self.alpha_min > 0 and self.beta_min > 0):
            raise ValueError("alpha_min and beta_min must be positive")
        if self.multiplier <= 0:
            raise ValueError("multiplier must be positive")

    def to_dict(self):
        return asdict(self)


DEFAULT_CAPS = FitCaps()


@dataclass(frozen=True)
class DichotomyParams:
    """``(P; alpha, beta, theta, nu)`` plus ``log K``; ``None`` marks an absent side."""

    cls: str
    alpha: float | None = None
    beta: float | None = None
    theta: float = 0.0
    nu: float = 0.0
    logK: float = 0.0

    def check(self, multiplier=1.0):
        """Raise ``ValueError`` when the tuple breaks its class invariants."""
        if self.cls not in FIT_CLASSES:
            raise ValueError(f"unknown class {self.cls!r}")
        if self.logK < 0:
            raise ValueError("logK must be >= 0")
        if self.theta < 0 or self.nu < 0:
            raise ValueError("theta and nu must be >= 0")
        if self.alpha is not None and not self.alpha < 0:
            raise ValueError(f"alpha must be < 0, got {self.alpha}")
        if self.beta is not None and not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.cls == "uniform" and (self.theta != 0 or self.nu != 0):
            raise ValueError("uniform class requires theta = nu = 0")
        if self.cls == "nonuniform":
            if self.alpha is not None and not self.alpha + multiplier * self.theta < 0:
                raise ValueError(f"nonuniform class requires alpha + theta < 0, got "
                                 f"{self.alpha} + {multiplier:g}*{self.theta}")
            if self.beta is not None and not self.beta - multiplier * self.nu > 0:
                raise ValueError(f"nonuniform class requires beta - nu > 0, got "
                                 f"{self.beta} - {multiplier:g}*{self.nu}")
        return self

    def tuple_str(self, projector="P"):
        a = "*" if self.alpha is None else f"{self.alpha:g}"
        b = "*" if self.beta is None else f"{self.beta:g}"
        t = "*" if self.alpha is None else f"{self.theta:g}"
        v = "*" if self.beta is None else f"{self.nu:g}"
        return f"({projector}; {a}, {b}, {t}, {v})"

    def to_dict(self):
        return asdict(self)


@dataclass
class FitReport:
    feasible: bool
    params: DichotomyParams
    objective: float | None          # alpha + theta (stable) or beta - nu (unstable)
    worst_slack: float
    n_constraints: int
    side: str = "stable"
    floor: float = 0.0
    window: tuple = (0, 0)
    caps: FitCaps = DEFAULT_CAPS
    projector: str = ""
    gamma: float = 0.0
    binding: tuple | None = None     # (k, n) of the tightest constraint
    required_logK: float | None = None

    def to_dict(self):
        d = asdict(self)
        d["params"] = self.params.to_dict()
        d["caps"] = self.caps.to_dict()
        return d


@dataclass
class GrowthFit:
    a_hat: float
    eps_hat: float
    logK_hat: float
    window: tuple = (0, 0)
    caps: FitCaps = DEFAULT_CAPS
    n_constraints: int = 0

    def to_dict(self):
        d = asdict(self)
        d["caps"] = self.caps.to_dict()
        return d


class FitInfeasible(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# pair clouds

@dataclass
class _Cloud:
    k: np.ndarray
    n: np.ndarray
    u: np.ndarray        # >= 0
    v: np.ndarray
    y: np.ndarray
    dL: np.ndarray       # L(k) - L(n), signed
    hull: np.ndarray | None = None

    @property
    def reach(self):
        """Largest ``u`` among pairs with the smallest weight ``v`` (the weight-free ray)."""
        if self.u.size == 0:
            return 0.0
        vmin = self.v.min()
        return float(self.u[self.v == vmin].max())

    def sheared(self, gamma):
        return self.y if gamma == 0.0 else self.y - gamma * self.dL

    def hull_idx(self):
        if self.hull is None:
            keep = np.isfinite(self.y)
            if np.all(keep):
                self.hull = hull_indices(np.column_stack([self.u, self.v, self.y]))
            else:
                sub = np.nonzero(keep)[0]
                h = hull_indices(np.column_stack([self.u[sub], self.v[sub], self.y[sub]])) if sub.size else sub
                self.hull = sub[h]
        return self.hull


_CACHE: "weakref.WeakKeyDictionary[LinearSystem, dict]" = weakref.WeakKeyDictionary()
_CACHE_LOCK = threading.Lock()
_KEY_LOCKS: dict = {}


def clear_cache():
    with _CACHE_LOCK:
        _CACHE.clear()
        _KEY_LOCKS.clear()


def _rate_key(rate: GrowthRate):
    return (rate.label, id(rate.mu_log))


def _proj_key(P: ProjectorFamily):
    return ("coords", P.coords) if P.coords is not None else ("fn", id(P.proj), P.rank)


def _unwrap(sys, rate):
    """Base system and total weighting, when weights use the fitting rate."""
    gamma = 0.0
    while isinstance(sys, WeightedSystem) and _rate_key(sys.rate) == _rate_key(rate):
        gamma += sys.gamma
        sys = sys.base
    return sys, gamma


def _build_cloud(sys, rate, window, side, P):
    k, n, y = pair_log_norms(sys, window, side, P)
    Lk, Ln = rate.L(k), rate.L(n)
    dL = Lk - Ln
    return _Cloud(k, n, np.abs(dL), rate.weight(n), y, dL)


def _cloud(sys, rate, window, side, P):
    window = (int(window[0]), int(window[1]))
    key = (_rate_key(rate), window, side, _proj_key(P))
    with _CACHE_LOCK:
        store = _CACHE.setdefault(sys, {})
        if key in store:
            return store[key]
        lock = _KEY_LOCKS.setdefault((id(sys), key), threading.Lock())
    with lock:
        with _CACHE_LOCK:
            if key in store:
                return store[key]
        cloud = _build_cloud(sys, rate, window, side, P)
        cloud.hull_idx()
        with _CACHE_LOCK:
            store[key] = cloud
        return cloud


# ---------------------------------------------------------------------------
# fits

def effective_floor(cloud, caps, side):
    """Strictness floor plus the exponent a capped ``K`` can fake along the window.

    Along pairs with ``lam(n)`` minimal, ``logK_cap`` alone absorbs an exponent
    of size ``logK_cap / reach``; an exponent is only certified as negative
    (positive) on the window once it clears that amount as well.
    """
    base = caps.alpha_min if side == "stable" else caps.beta_min
    r = cloud.reach
    return base + (caps.logK_cap / r if r > 0 else 0.0)


def _mode(cls):
    return {"uniform": "alpha", "nonuniform": "sum", "slow": "alpha_then_theta"}[cls]


def _check_window(window):
    if int(window[1]) < int(window[0]):
        raise ValueError(f"empty window {window}")


def _fit_side(sys, rate, P, window, caps, cls, side, gamma_extra=0.0):
    if cls not in FIT_CLASSES:
        raise ValueError(f"unknown class {cls!r}")
    _check_window(window)
    caps = caps or DEFAULT_CAPS
    base, g = _unwrap(sys, rate)
    g += gamma_extra
    d = base.dim
    if P is None:
        P = identity_projector(d) if side == "stable" else zero_projector(d)
    if side == "stable" and P.rank < 1:
        raise ValueError("fit_stable needs rank P >= 1")
    if side == "unstable" and P.rank > d - 1:
        raise ValueError("fit_unstable needs rank P <= d - 1")
    cloud = _cloud(base, rate, window, side, P)
    y = cloud.sheared(g)
    floor = effective_floor(cloud, caps, side)
    t_bounds = (0.0, 0.0) if cls == "uniform" else (0.0, caps.theta_cap)
    res = solve_envelope(cloud.u, cloud.v, y, alpha_bounds=(ALPHA_FLOOR, -floor),
                         theta_bounds=t_bounds, logK_cap=caps.logK_cap, mode=_mode(cls),
                         multiplier=caps.multiplier, hull=cloud.hull_idx())
    binding = None
    if res.binding >= 0:
        binding = (int(cloud.k[res.binding]), int(cloud.n[res.binding]))
    w = (int(window[0]), int(window[1]))
    if side == "stable":
        params = DichotomyParams(cls, alpha=res.alpha, theta=res.theta, logK=res.logK)
        objective = res.alpha + res.theta
    else:
        params = DichotomyParams(cls, beta=-res.alpha, nu=res.theta, logK=res.logK)
        objective = -res.alpha - res.theta
    if not np.isfinite(objective):
        objective = None
    return FitReport(
        feasible=bool(res.feasible), params=params, objective=objective,
        worst_slack=float(res.worst_slack), n_constraints=int(np.isfinite(y).sum()),
        side=side, floor=floor, window=w, caps=caps, projector=P.label, gamma=g, binding=binding,
        required_logK=None if res.feasible else float(res.required_logK))


def fit_stable(sys: LinearSystem, rate: GrowthRate, P: ProjectorFamily | None = None,
               window=(-200, 200), caps: FitCaps | None = None, cls: str = "nonuniform",
               logK_cap: float | None = None) -> FitReport:
    """Minimise ``alpha + theta`` (class-dependent objective) over the stable constraints.

    ``uniform`` fixes ``theta = 0`` and minimises ``alpha``; ``slow`` minimises
    ``alpha`` first and ``theta`` second. Weighted systems built with the same
    rate are fitted by shearing the cached base cloud.
    """
    if logK_cap is not None:
        caps = replace(caps or DEFAULT_CAPS, logK_cap=logK_cap)
    return _fit_side(sys, rate, P, window, caps, cls, "stable")


def fit_unstable(sys: LinearSystem, rate: GrowthRate, P: ProjectorFamily | None = None,
                 window=(-200, 200), caps: FitCaps | None = None, cls: str = "nonuniform",
                 logK_cap: float | None = None) -> FitReport:
    """Maximise ``beta - nu`` over the unstable constraints (mirror of ``fit_stable``)."""
    if logK_cap is not None:
        caps = replace(caps or DEFAULT_CAPS, logK_cap=logK_cap)
    return _fit_side(sys, rate, P, window, caps, cls, "unstable")


def verify(sys: LinearSystem, rate: GrowthRate, P: ProjectorFamily, params: DichotomyParams,
           window, caps: FitCaps | None = None) -> FitReport:
    """Check a given parameter tuple against every window pair.

    ``worst_slack`` is ``max(lhs - rhs)`` in log scale over both sides;
    the tuple is certified on the window iff it is ``<= 0``.
    """
    caps = caps or DEFAULT_CAPS
    params.check(caps.multiplier)
    _check_window(window)
    base, g = _unwrap(sys, rate)
    d = base.dim
    if P.rank >= 1 and params.alpha is None:
        raise ValueError("alpha is required when rank P >= 1")
    if P.rank <= d - 1 and params.beta is None:
        raise ValueError("beta is required when rank P <= d - 1")
    worst = -np.inf
    binding = None
    count = 0
    for side, rate_coef, weight in (("stable", params.alpha, params.theta),
                                    ("unstable", params.beta, params.nu)):
        if rate_coef is None:
            continue
        if (side == "stable" and P.rank == 0) or (side == "unstable" and P.rank == d):
            continue
        c = _cloud(base, rate, window, side, P)
        y = c.sheared(g)
        s = y - params.logK - rate_coef * c.dL - weight * c.v
        fin = np.isfinite(s)
        count += int(fin.sum())
        if fin.any():
            i = int(np.argmax(np.where(fin, s, -np.inf)))
            if s[i] > worst:
                worst, binding = float(s[i]), (int(c.k[i]), int(c.n[i]))
    if not np.isfinite(worst):
        worst = -np.inf
    alpha, beta = params.alpha, params.beta
    obj = (alpha + params.theta) if alpha is not None else (beta - params.nu if beta is not None else None)
    return FitReport(feasible=bool(worst <= 0.0), params=params, objective=obj, worst_slack=worst,
                     n_constraints=count, side="both", window=(int(window[0]), int(window[1])),
                     caps=caps, projector=P.label, gamma=g, binding=binding)


def growth_fit(sys: LinearSystem, rate: GrowthRate, window=(-200, 200),
               caps: FitCaps | None = None, logK_cap: float | None = None) -> GrowthFit:
    """Minimise ``a + eps`` with ``log||Phi(k,n)|| <= logK + a|L(k)-L(n)| + eps lam(n)``."""
    caps = caps or DEFAULT_CAPS
    if logK_cap is not None:
        caps = replace(caps, logK_cap=logK_cap)
    _check_window(window)
    base, g = _unwrap(sys, rate)
    c = _cloud(base, rate, window, "full", identity_projector(base.dim))
    y = c.sheared(g)
    hull = c.hull_idx() if g == 0.0 else None   # |u| is not sheared linearly
    res = solve_envelope(c.u, c.v, y, alpha_bounds=(0.0, -ALPHA_FLOOR), theta_bounds=(0.0, -ALPHA_FLOOR),
                         logK_cap=caps.logK_cap, mode="sum", hull=hull)
    if not res.feasible:
        raise FitInfeasible(f"growth bound infeasible within logK_cap={caps.logK_cap:g} "
                            f"(needs logK >= {res.required_logK:.6g}); increase the cap")
    return GrowthFit(res.alpha, res.theta, res.logK, (int(window[0]), int(window[1])), caps,
                     int(np.isfinite(y).sum()))


# ---------------------------------------------------------------------------
# projector verdicts, USP and UPP

@dataclass
class ProjectorVerdict:
    projector: str
    rank: int
    coords: tuple | None
    feasible: bool
    margin: float
    stable: FitReport | None = None
    unstable: FitReport | None = None

    def to_dict(self):
        return {
            "projector": self.projector, "rank": self.rank,
            "coords": None if self.coords is None else [i + 1 for i in self.coords],
            "feasible": self.feasible, "margin": self.margin,
            "stable": None if self.stable is None else self.stable.to_dict(),
            "unstable": None if self.unstable is None else self.unstable.to_dict(),
        }


def candidate_projectors(sys: LinearSystem, projectors=None):
    """Coordinate projectors for diagonal systems; ``{0, Id}`` otherwise."""
    if projectors is not None:
        return list(projectors)
    d = sys.dim
    if sys.is_diagonal or d == 1:
        return coordinate_projectors(d)
    return [zero_projector(d), identity_projector(d)]


def projector_verdict(sys, rate, P, window, caps=None, cls="nonuniform", gamma=0.0) -> ProjectorVerdict:
    """Both-side fits of the ``gamma``-weighted system with projector ``P`` under ``cls``."""
    caps = caps or DEFAULT_CAPS
    d = sys.dim
    st = un = None
    ok = True
    margins = []
    if P.rank >= 1:
        st = _fit_side(sys, rate, P, window, caps, cls, "stable", gamma)
        if cls == "nonuniform":
            val = -(st.params.alpha + caps.multiplier * st.params.theta)
            ok &= st.feasible and val >= st.floor
        else:
            val = -st.params.alpha
            ok &= st.feasible
        margins.append(val)
    if P.rank <= d - 1:
        un = _fit_side(sys, rate, P, window, caps, cls, "unstable", gamma)
        if cls == "nonuniform":
            val = un.params.beta - caps.multiplier * un.params.nu
            ok &= un.feasible and val >= un.floor
        else:
            val = un.params.beta
            ok &= un.feasible
        margins.append(val)
    margin = float(min(margins)) if margins else np.inf
    if not np.isfinite(margin) and margins:
        margin = -np.inf
    return ProjectorVerdict(P.label, P.rank, P.coords, bool(ok), margin, st, un)


def feasible_projectors(sys, rate, window, caps=None, cls="nonuniform", gamma=0.0, projectors=None):
    """All candidate verdicts in enumeration order (rank, then coordinates)."""
    return [projector_verdict(sys, rate, P, window, caps, cls, gamma)
            for P in candidate_projectors(sys, projectors)]


def _require_diagonal(sys):
    if not (sys.is_diagonal or sys.dim == 1):
        raise ValueError("USP diagnostic requires diagonal structure")


def usp_check(sys: LinearSystem, window=(-200, 200), bound_factor: float = 10.0) -> list:
    """Coordinate directions whose solution through ``n0 = 0`` stays bounded on the window.

    Returns 1-based indices; an empty list means every direction grows by more
    than ``bound_factor`` somewhere, i.e. the USP holds empirically.
    """
    _require_diagonal(sys)
    if bound_factor <= 0:
        raise ValueError("bound_factor must be positive")
    lo, hi = int(window[0]), int(window[1])
    if not lo <= 0 <= hi:
        raise ValueError("window must contain 0")
    ns = np.arange(lo, hi + 1)
    if sys.is_diagonal:
        F = sys.fundamental_log(ns)
        F = F - sys.fundamental_log(np.array([0]))[0]
    else:
        from .system import EvolutionOperator, solution_log_norms
        vals = solution_log_norms(EvolutionOperator(sys), 0, [1.0], (lo, hi))
        F = np.array([v for _, v in vals]).reshape(-1, 1)
    sup = F.max(axis=0)
    return [i + 1 for i in range(sys.dim) if sup[i] <= np.log(bound_factor)]


def upp_check(sys: LinearSystem, rate: GrowthRate, window=(-200, 200), cls: str = "slow",
              gamma: float = 0.0, caps: FitCaps | None = None) -> dict:
    """Which coordinate projectors admit the class; two or more means UPP fails empirically."""
    _require_diagonal(sys)
    verdicts = feasible_projectors(sys, rate, window, caps, cls, gamma)
    feas = [v for v in verdicts if v.feasible]
    return {
        "class": cls,
        "gamma": float(gamma),
        "window": [int(window[0]), int(window[1])],
        "feasible": [v.projector for v in feas],
        "upp_holds": len(feas) == 1,
        "upp_violated": len(feas) >= 2,
        "verdicts": verdicts,
    }
