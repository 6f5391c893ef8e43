"""Dichotomy spectra by gamma-grid sweep and endpoint bisection.

A gamma is in the resolvent of a class when the gamma-weighted system admits
that class of dichotomy on the window with some candidate projector (for the
``upp`` class: with exactly one candidate under the slow class). Spectra are
complements of the resolvent inside ``gamma_range``.

Two resolvent points with no projector in common cannot lie in the same gap,
since each side of a fit only improves as gamma moves away from the spectrum;
such pairs are bisected like member/non-member pairs, which recovers point
spectra (autonomous systems) that fall between grid nodes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corpus import Interval
from .dichotomy_fit import (DEFAULT_CAPS, FitCaps, ProjectorVerdict, feasible_projectors,
                            growth_fit)
from .growth import GrowthRate
from .system import LinearSystem

__all__ = [
    "SPECTRUM_CLASSES",
    "ResolventVerdict",
    "SpectrumEstimate",
    "NotInResolvent",
    "resolvent_test",
    "estimate_spectrum",
    "upp_spectrum",
    "dimension_map",
    "default_gamma_range",
]

SPECTRUM_CLASSES = ("uniform", "nonuniform", "slow", "upp")

FLAG_RANGE = "spectrum may exceed range"
FLAG_SMALL = "gamma_range too small"
FLAG_SPURIOUS = "suspect spurious interval"


class NotInResolvent(ValueError):
    pass


@dataclass
class ResolventVerdict:
    gamma: float
    member: bool
    cls: str
    projector_rank: int | None
    margin: float
    projector: str | None = None
    feasible: tuple = ()                  # labels of every feasible candidate
    fits: list = field(default_factory=list, repr=False)

    @property
    def key(self):
        return frozenset(self.feasible) if self.member else None

    def to_row(self):
        return {"gamma": self.gamma, "member": self.member, "margin": self.margin,
                "rank": self.projector_rank}


@dataclass
class SpectrumEstimate:
    cls: str
    intervals: list                       # list[Interval], ordered and disjoint
    gaps: list                            # list of (lo, hi) with +-inf for unbounded gaps
    gap_ranks: list
    grid_step: float
    window: tuple
    refinement_tol: float
    gamma_range: tuple
    dim: int
    flags: list = field(default_factory=list)
    grid: list = field(default_factory=list)      # ResolventVerdict per grid node
    caps: FitCaps = DEFAULT_CAPS
    n_evaluations: int = 0

    def endpoints(self):
        return [(iv.lo, iv.hi) for iv in self.intervals]

    def contains(self, gamma):
        return any(iv.contains(gamma) for iv in self.intervals)

    def to_dict(self):
        return {
            "class": self.cls,
            "intervals": [iv.as_list() for iv in self.intervals],
            "gaps": [[lo, hi] for lo, hi in self.gaps],
            "gap_ranks": list(self.gap_ranks),
            "flags": list(self.flags),
            "grid_step": self.grid_step,
            "refinement_tol": self.refinement_tol,
            "window": list(self.window),
            "gamma_range": list(self.gamma_range),
            "dim": self.dim,
            "caps": self.caps.to_dict(),
            "n_evaluations": self.n_evaluations,
        }

    def grid_rows(self):
        return [v.to_row() for v in self.grid]


def resolvent_test(sys: LinearSystem, rate: GrowthRate, gamma: float, cls: str = "nonuniform",
                   window=(-200, 200), caps: FitCaps | None = None, projectors=None) -> ResolventVerdict:
    """Membership of ``gamma`` in the resolvent of ``cls``.

    The chosen projector is the first feasible one in (rank, coordinates)
    order; the ``upp`` class runs the slow fits and demands exactly one.
    """
    if cls not in SPECTRUM_CLASSES:
        raise ValueError(f"unknown class {cls!r}; expected one of {SPECTRUM_CLASSES}")
    caps = caps or DEFAULT_CAPS
    fit_cls = "slow" if cls == "upp" else cls
    verdicts: list[ProjectorVerdict] = feasible_projectors(sys, rate, window, caps, fit_cls,
                                                           float(gamma), projectors)
    feas = [v for v in verdicts if v.feasible]
    member = len(feas) == 1 if cls == "upp" else len(feas) >= 1
    if member:
        ch = feas[0]
        return ResolventVerdict(float(gamma), True, cls, ch.rank, ch.margin, ch.projector,
                                tuple(v.projector for v in feas), verdicts)
    best = max((v.margin for v in verdicts), default=-np.inf)
    return ResolventVerdict(float(gamma), False, cls, None, float(best), None,
                            tuple(v.projector for v in feas), verdicts)


def _differs(a: ResolventVerdict, b: ResolventVerdict):
    if a.member != b.member:
        return True
    if a.member and b.member:
        return not (a.key & b.key)
    return False


def default_gamma_range(sys, rate, window=(-200, 200), caps=None):
    """``+-(a_hat + eps_hat + 1)`` from the growth fit."""
    g = growth_fit(sys, rate, window, caps)
    r = g.a_hat + g.eps_hat + 1.0
    return (-r, r)


def _grid(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9))
    pts = [lo + i * step for i in range(n + 1)]
    if hi - pts[-1] > 1e-9 * max(1.0, abs(hi)):
        pts.append(hi)
    return [round(p, 12) for p in pts]


def estimate_spectrum(sys: LinearSystem, rate: GrowthRate, cls: str = "nonuniform",
                      gamma_range=None, grid_step: float = 0.05, window=(-200, 200),
                      caps: FitCaps | None = None, refinement_tol: float | None = None,
                      jobs: int = 1, projectors=None) -> SpectrumEstimate:
    """Sweep the gamma grid, then bisect every change of verdict to ``refinement_tol``."""
    if cls not in SPECTRUM_CLASSES:
        raise ValueError(f"unknown class {cls!r}; expected one of {SPECTRUM_CLASSES}")
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    caps = caps or DEFAULT_CAPS
    tol = grid_step / 8.0 if refinement_tol is None else float(refinement_tol)
    if not tol > 0:
        raise ValueError("refinement_tol must be positive")
    if gamma_range is None:
        gamma_range = default_gamma_range(sys, rate, window, caps)
    lo, hi = float(gamma_range[0]), float(gamma_range[1])
    if not hi > lo:
        raise ValueError("gamma_range must satisfy lo < hi")
    window = (int(window[0]), int(window[1]))

    def test(g):
        return resolvent_test(sys, rate, g, cls, window, caps, projectors)

    gammas = _grid(lo, hi, grid_step)
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            grid = list(ex.map(test, gammas))
    else:
        grid = [test(g) for g in gammas]
    n_eval = len(grid)

    extra = []

    def refine(a, b):
        nonlocal n_eval
        if b.gamma - a.gamma <= tol:
            return
        m = test(0.5 * (a.gamma + b.gamma))
        n_eval += 1
        extra.append(m)
        if _differs(a, m):
            refine(a, m)
        if _differs(m, b):
            refine(m, b)

    pairs = [(a, b) for a, b in zip(grid, grid[1:]) if _differs(a, b)]
    if jobs and jobs > 1 and len(pairs) > 1:
        # endpoints are independent; each bisection runs sequentially in its own worker
        def run(pair):
            local = []

            def rf(a, b):
                if b.gamma - a.gamma <= tol:
                    return
                m = test(0.5 * (a.gamma + b.gamma))
                local.append(m)
                if _differs(a, m):
                    rf(a, m)
                if _differs(m, b):
                    rf(m, b)
            rf(*pair)
            return local

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            for local in ex.map(run, pairs):
                extra.extend(local)
        n_eval += len(extra)
    else:
        for a, b in pairs:
            refine(a, b)

    pts = sorted(grid + extra, key=lambda v: v.gamma)
    return _assemble(pts, grid, cls, sys.dim, grid_step, window, tol, (lo, hi), caps, n_eval)


def _assemble(pts, grid, cls, d, step, window, tol, grange, caps, n_eval):
    flags = []
    intervals = []
    gap_members = [[]]
    lo_g, hi_g = grange
    i = 0
    n = len(pts)
    while i < n:
        v = pts[i]
        if not v.member:
            j = i
            while j + 1 < n and not pts[j + 1].member:
                j += 1
            if i == 0:
                a, a_open = lo_g, False
                flags.append(FLAG_RANGE)
            else:
                a = 0.5 * (pts[i - 1].gamma + v.gamma)
                a_open = cls == "upp" and len(v.feasible) >= 2
            if j == n - 1:
                b, b_open = hi_g, False
                if FLAG_RANGE not in flags:
                    flags.append(FLAG_RANGE)
            else:
                b = 0.5 * (pts[j].gamma + pts[j + 1].gamma)
                b_open = cls == "upp" and len(pts[j].feasible) >= 2
            intervals.append(Interval(a, b, a_open, b_open))
            gap_members.append([])
            i = j + 1
            continue
        if i > 0 and pts[i - 1].member and _differs(pts[i - 1], v):
            # two resolvent points without a common projector: spectrum between them
            c = 0.5 * (pts[i - 1].gamma + v.gamma)
            intervals.append(Interval(c, c))
            gap_members.append([])
        gap_members[-1].append(v)
        i += 1

    gaps, ranks = [], []
    edges = [-math.inf] + [x for iv in intervals for x in (iv.lo, iv.hi)] + [math.inf]
    for gi, members in enumerate(gap_members):
        if not members:
            continue
        gaps.append((edges[2 * gi], edges[2 * gi + 1]))
        ranks.append(members[0].projector_rank)

    if cls != "slow" and gaps:
        if (gaps[0][0] == -math.inf and ranks[0] != 0) or (gaps[-1][1] == math.inf and ranks[-1] != d):
            flags.append(FLAG_SMALL)
        if any(r2 <= r1 for r1, r2 in zip(ranks, ranks[1:])):
            flags.append(FLAG_SPURIOUS)
    return SpectrumEstimate(cls, intervals, gaps, ranks, step, window, tol, grange, d, flags,
                            grid, caps, n_eval)


def upp_spectrum(sys, rate, gamma_range=None, grid_step=0.05, window=(-200, 200), caps=None,
                 refinement_tol=None, jobs=1, projectors=None) -> SpectrumEstimate:
    """Spectrum of the slow class restricted to a unique feasible projector."""
    return estimate_spectrum(sys, rate, "upp", gamma_range, grid_step, window, caps,
                             refinement_tol, jobs, projectors)


def dimension_map(est: SpectrumEstimate, gamma: float) -> int:
    """Rank of the dichotomy projector on the gap containing ``gamma``."""
    if est.contains(gamma):
        raise NotInResolvent(f"gamma={gamma} is not in resolvent")
    for (lo, hi), r in zip(est.gaps, est.gap_ranks):
        if lo < gamma < hi or (lo == hi == gamma):
            return int(r)
    raise NotInResolvent(f"gamma={gamma} is not in resolvent")
