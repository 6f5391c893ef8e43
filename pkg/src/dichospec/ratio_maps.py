"""Optimal stable/unstable ratio curves over spectral gaps.

For a gap with projector ``P`` the windowed ratios are

    st(gamma) = min alpha + theta   (stable constraints of the gamma-weighted system)
    un(gamma) = max beta  - nu      (unstable constraints)

Both are non-increasing in gamma: weighting by a larger gamma shears every
constraint in the favourable direction, so the feasible sets are nested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dichotomy_fit import DEFAULT_CAPS, FitCaps, fit_stable, fit_unstable, growth_fit
from .growth import GrowthRate
from .spectrum import SpectrumEstimate, resolvent_test
from .system import (LinearSystem, ProjectorFamily, WeightedSystem, coordinate_projector,
                     identity_projector, zero_projector)

__all__ = [
    "RatioSample",
    "RatioCurve",
    "RATIO_COLUMNS",
    "gap_projector",
    "ratio_at",
    "sweep_ratios",
    "sweep_gap",
    "boundary_locator",
    "divergence_check",
]

RATIO_COLUMNS = ("gamma", "st", "un", "feasible_st", "feasible_un")


@dataclass
class RatioSample:
    gamma: float
    st: float | None
    un: float | None
    feasible_st: bool | None
    feasible_un: bool | None

    def row(self):
        return (self.gamma, self.st, self.un, self.feasible_st, self.feasible_un)


@dataclass
class RatioCurve:
    gap: tuple
    projector: str
    rank: int
    samples: list
    window: tuple
    caps: FitCaps = DEFAULT_CAPS
    flags: list = field(default_factory=list)

    def column(self, name):
        return [getattr(s, name) for s in self.samples]

    def is_monotone(self, tol=1e-9):
        """Both present columns non-increasing in gamma (up to ``tol``)."""
        for name in ("st", "un"):
            vals = [(s.gamma, getattr(s, name)) for s in self.samples if getattr(s, name) is not None]
            vals.sort()
            if any(b[1] > a[1] + tol for a, b in zip(vals, vals[1:])):
                return False
        return True

    def to_dict(self):
        return {
            "gap": list(self.gap),
            "projector": self.projector,
            "rank": self.rank,
            "window": list(self.window),
            "caps": self.caps.to_dict(),
            "flags": list(self.flags),
            "columns": list(RATIO_COLUMNS),
            "samples": [list(s.row()) for s in self.samples],
        }


def _base_dim(sys):
    while isinstance(sys, WeightedSystem):
        sys = sys.base
    return sys.dim


def gap_projector(sys, rate, gap, window=(-200, 200), caps=None, rank=None) -> ProjectorFamily:
    """Projector of a gap: taken from the resolvent verdict at an interior point."""
    d = sys.dim
    if rank is not None and rank in (0, d):
        return zero_projector(d) if rank == 0 else identity_projector(d)
    lo, hi = gap
    if math.isinf(lo) and math.isinf(hi):
        g = 0.0
    elif math.isinf(lo):
        g = hi - 1.0
    elif math.isinf(hi):
        g = lo + 1.0
    else:
        g = 0.5 * (lo + hi)
    v = resolvent_test(sys, rate, g, "nonuniform", window, caps)
    if not v.member:
        raise ValueError(f"gamma={g} inside the claimed gap {gap} is not in the resolvent")
    for pv in v.fits:
        if pv.projector == v.projector:
            if pv.coords is not None:
                return coordinate_projector(d, [i + 1 for i in pv.coords])
    return zero_projector(d) if v.projector_rank == 0 else identity_projector(d)


def ratio_at(sys, rate, gamma, P: ProjectorFamily, window=(-200, 200), caps=None) -> RatioSample:
    """One sample of both ratios of the ``gamma``-weighted system with projector ``P``."""
    caps = caps or DEFAULT_CAPS
    d = _base_dim(sys)
    wsys = WeightedSystem(sys, rate, gamma) if gamma != 0.0 else sys
    st = un = fst = fun = None
    if P.rank >= 1:
        r = fit_stable(wsys, rate, P, window, caps, "nonuniform")
        if r.feasible:
            st = r.objective
            fst = st <= -r.floor
        else:
            fst = False
    if P.rank <= d - 1:
        r = fit_unstable(wsys, rate, P, window, caps, "nonuniform")
        if r.feasible:
            un = r.objective
            fun = un >= r.floor
        else:
            fun = False
    return RatioSample(float(gamma), st, un, fst, fun)


def _default_horizon(sys, rate, window, caps):
    g = growth_fit(sys, rate, window, caps)
    return g.a_hat + g.eps_hat + 10.0


def _gap_samples(gap, n, horizon):
    lo, hi = gap
    if n < 2:
        raise ValueError("n_samples must be >= 2")
    if not math.isinf(lo) and not math.isinf(hi):
        return list(np.linspace(lo, hi, n + 2)[1:-1])
    if math.isinf(lo) and math.isinf(hi):
        return list(np.linspace(-horizon, horizon, n))
    # unbounded side: geometric offsets from the finite edge out to the horizon
    edge = hi if math.isinf(lo) else lo
    span = max(horizon - abs(edge), 1.0)
    offs = np.geomspace(span * 1e-2, span, n)
    return sorted(edge - offs) if math.isinf(lo) else list(edge + offs)


def sweep_ratios(sys: LinearSystem, rate: GrowthRate, gap, n_samples: int = 9, window=(-200, 200),
                 caps: FitCaps | None = None, gammas=None, projector: ProjectorFamily | None = None,
                 horizon: float | None = None, rank: int | None = None) -> RatioCurve:
    """Sample ``st`` and ``un`` across one spectral gap.

    ``gammas`` overrides the automatic sampling (uniform inside bounded gaps,
    geometric towards ``horizon`` on unbounded ones). Values are ``None``
    where the projector has no stable (``P = 0``) or unstable (``P = Id``) part.
    """
    caps = caps or DEFAULT_CAPS
    gap = (float(gap[0]), float(gap[1]))
    P = projector or gap_projector(sys, rate, gap, window, caps, rank)
    if gammas is None:
        if horizon is None and (math.isinf(gap[0]) or math.isinf(gap[1])):
            horizon = _default_horizon(sys, rate, window, caps)
        gammas = _gap_samples(gap, n_samples, horizon)
    samples = [ratio_at(sys, rate, float(g), P, window, caps) for g in sorted(gammas)]
    flags = []
    if any(s.feasible_st is False or s.feasible_un is False for s in samples):
        flags.append("infeasible sample inside gap")
    curve = RatioCurve(gap, P.label, P.rank, samples, (int(window[0]), int(window[1])), caps, flags)
    if not curve.is_monotone():
        curve.flags.append("non-monotone samples")
    return curve


def sweep_gap(est: SpectrumEstimate, sys, rate, gap_index: int, **kw) -> RatioCurve:
    """``sweep_ratios`` on gap ``gap_index`` of a spectrum estimate."""
    if not 0 <= gap_index < len(est.gaps):
        raise IndexError(f"gap index {gap_index} out of range (estimate has {len(est.gaps)} gaps)")
    kw.setdefault("window", est.window)
    kw.setdefault("caps", est.caps)
    return sweep_ratios(sys, rate, est.gaps[gap_index], rank=est.gap_ranks[gap_index], **kw)


def boundary_locator(sys: LinearSystem, rate: GrowthRate, side: str, bracket, tol: float = 0.01,
                     window=(-200, 200), caps: FitCaps | None = None,
                     projector: ProjectorFamily | None = None) -> float:
    """Bisect for the gamma where the windowed ratio leaves the admissible range.

    ``side="stable"`` tracks ``st <= -floor`` (true to the right of the
    crossing), ``side="unstable"`` tracks ``un >= floor`` (true to the left).
    The bracket is widened by ``tol`` on both sides, so a crossing sitting
    just outside a bracket edge (within the requested resolution) is found.
    """
    if side not in ("stable", "unstable"):
        raise ValueError("side must be 'stable' or 'unstable'")
    caps = caps or DEFAULT_CAPS
    d = _base_dim(sys)
    if projector is None:
        projector = identity_projector(d) if side == "stable" else zero_projector(d)

    def ok(g):
        s = ratio_at(sys, rate, g, projector, window, caps)
        return bool(s.feasible_st) if side == "stable" else bool(s.feasible_un)

    a, b = float(bracket[0]), float(bracket[1])
    if not b > a:
        raise ValueError("bracket must satisfy a < b")
    if not tol > 0:
        raise ValueError("tol must be positive")
    a, b = a - tol, b + tol
    fa, fb = ok(a), ok(b)
    want = (False, True) if side == "stable" else (True, False)
    if (fa, fb) != want:
        raise ValueError(f"no crossing of the {side} ratio in bracket [{a}, {b}]")
    while b - a > tol:
        m = 0.5 * (a + b)
        if ok(m) == fa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def divergence_check(sys: LinearSystem, rate: GrowthRate, horizon_list, window=(-200, 200),
                     caps: FitCaps | None = None, un_list=None) -> dict:
    """``-st`` at increasing gamma (P = Id) and ``un`` at decreasing gamma (P = 0).

    Both columns must strictly increase along their lists; failures are listed.
    """
    caps = caps or DEFAULT_CAPS
    d = _base_dim(sys)
    out = {"st": [], "un": [], "failures": []}
    for g in sorted(horizon_list):
        s = ratio_at(sys, rate, float(g), identity_projector(d), window, caps)
        out["st"].append((float(g), -s.st if s.feasible_st else None))
    for g in sorted(un_list or [], reverse=True):
        s = ratio_at(sys, rate, float(g), zero_projector(d), window, caps)
        out["un"].append((float(g), s.un if s.feasible_un else None))
    for name in ("st", "un"):
        vals = [v for _, v in out[name]]
        if any(v is None for v in vals):
            out["failures"].append(f"{name}: infeasible sample")
        elif any(b <= a for a, b in zip(vals, vals[1:])):
            out["failures"].append(f"{name}: not strictly increasing")
    out["ok"] = not out["failures"]
    return out
