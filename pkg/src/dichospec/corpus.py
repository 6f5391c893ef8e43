"""Closed-form test systems with their reference spectra.

All coefficients are given through ``log|A(n)|`` and the fundamental
solution through ``F(n) = log|X(n)|`` with ``X(0) = 1``, so that
``log Phi(k, n) = F(k) - F(n)`` holds exactly for every scalar entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .growth import GrowthRate, make_rate
from .system import LinearSystem

__all__ = ["Interval", "ExampleEntry", "get_example", "list_examples", "diagonal_compose",
           "CLASSES", "union_intervals"]

CLASSES = ("uniform", "nonuniform", "slow", "upp")

INF = float("inf")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def contains(self, x):
        left = x > self.lo if self.lo_open else x >= self.lo
        right = x < self.hi if self.hi_open else x <= self.hi
        return left and right

    def as_list(self):
        return [self.lo, self.hi, self.lo_open, self.hi_open]


REAL_LINE = Interval(-INF, INF, True, True)


@dataclass
class ExampleEntry:
    name: str
    params: dict
    system: LinearSystem
    rate: GrowthRate
    references: dict = field(default_factory=dict)   # class -> list[Interval]
    notes: dict = field(default_factory=dict)        # class -> provenance string
    log_phi: Callable | None = None                  # closed form for scalar entries
    description: str = ""

    @property
    def dim(self):
        return self.system.dim

    def summary(self) -> dict:
        return {
            "name": self.name,
            "params": dict(self.params),
            "dim": self.dim,
            "rate": self.rate.label,
            "description": self.description,
            "references": {k: [iv.as_list() for iv in v] for k, v in self.references.items()},
            "notes": dict(self.notes),
        }


def _scalar(name, params, log_a, F, rate, refs, notes, description):
    def log_diag(ns):
        return np.asarray(log_a(np.asarray(ns)), dtype=float).reshape(-1, 1)

    def log_fund(ns):
        return np.asarray(F(np.asarray(ns)), dtype=float).reshape(-1, 1)

    system = LinearSystem(1, log_diag=log_diag, log_fundamental=log_fund, label=name)

    def log_phi(k, n):
        return F(np.asarray(k)) - F(np.asarray(n))

    return ExampleEntry(name, params, system, rate, refs, notes, log_phi, description)


def _bv_F(omega, a):
    def F(n):
        n = np.asarray(n, dtype=float)
        return -omega * n + a * n * np.cos(n) - a * np.sin(n)
    return F


def _bv_log_a(omega, a):
    # log A(n) = F(n+1) - F(n), written out term by term
    def log_a(n):
        n = np.asarray(n, dtype=float)
        return (-omega + a * (n + 1) * np.cos(n + 1) - a * n * np.cos(n)
                - a * np.sin(n + 1) + a * np.sin(n))
    return log_a


def _ex707(p):
    refs = {
        "nonuniform": [Interval(-1.0, 1.0)],
        "uniform": [REAL_LINE],
        "slow": [],
        "upp": [Interval(-1.0, 1.0, True, True)],
    }
    notes = {
        "nonuniform": "stated: NqD spectrum [-1,1]",
        "uniform": ("stated: qD spectrum is the real line; derived: [-1,1], since K=1 and "
                    "alpha=1-gamma give a uniform dichotomy for every gamma>1"),
        "slow": "stated: sNqD spectrum empty",
        "upp": "stated: UPP spectrum (-1,1), both endpoints open",
    }
    return _scalar("ex707", {}, lambda n: -2.0 * n - 1.0, lambda n: -np.asarray(n, float) ** 2,
                   make_rate("quadratic"), refs, notes,
                   "x(n+1) = exp(-2n-1) x(n); Phi(k,n) = exp(-(k^2-n^2))")


def _ex718(p):
    def log_a(n):
        return np.where(np.asarray(n) < -1, 1.0, -1.0)

    def F(n):
        n = np.asarray(n, dtype=float)
        # switch at n = -1 as printed: X(-1) = e, X(n) = e^(n+2) for n <= -1
        return np.where(n >= 0, -n, n + 2.0)

    notes = {"usp": "stated: bounded nontrivial solution, USP and UPP fail"}
    return _scalar("ex718", {}, log_a, F, make_rate("exponential"), {}, notes,
                   "A(n) = e for n < -1, 1/e for n >= -1")


def _ex708(p):
    omega, a = p["omega"], p["a"]
    if not (3 * a > omega > 2 * a):
        raise ValueError(f"ex708 requires 3a > omega > 2a, got omega={omega}, a={a}")
    refs = {
        "slow": [Interval(-omega - a, -omega + a)],
        "upp": [Interval(-omega - a, -omega + a)],
        "nonuniform": [Interval(-omega - 3 * a, -omega + 3 * a)],
        "uniform": [REAL_LINE],
    }
    notes = {
        "slow": "stated: [-omega-a, -omega+a]",
        "upp": "stated: [-omega-a, -omega+a]",
        "nonuniform": "stated: [-omega-3a, -omega+3a]",
        "uniform": "stated: the real line",
    }
    return _scalar("ex708", {"omega": omega, "a": a}, _bv_log_a(omega, a), _bv_F(omega, a),
                   make_rate("exponential"), refs, notes,
                   "log Phi(k,n) = -omega(k-n) + a k cos k - a n cos n - a sin k + a sin n")


def _ex731(p, shift=0.0, name="ex731"):
    omega, a = p["omega"], p["a"]
    if not (3 * a > omega > a):
        raise ValueError(f"{name} requires 3a > omega > a, got omega={omega}, a={a}")
    w = omega - shift
    refs = {"nonuniform": [Interval(-w - 3 * a, -w + 3 * a)]}
    if shift:
        notes = {"nonuniform": "stated: [-omega-2a, -omega+4a]"}
        desc = "ex731 with omega replaced by omega - a"
    else:
        notes = {"nonuniform": "stated: [-omega-3a, -omega+3a]",
                 "growth": "stated: |Phi(k,n)| <= e^{2a} e^{(omega+a)|k-n|} e^{2a|n|}"}
        desc = "log Phi(k,n) = -omega(k-n) + a k cos k - a n cos n - a sin k + a sin n"
    return _scalar(name, {"omega": omega, "a": a}, _bv_log_a(w, a), _bv_F(w, a),
                   make_rate("exponential"), refs, notes, desc)


def _ex735(p):
    return _ex731(p, shift=p["a"], name="ex735")


def _autonomous(p):
    c = float(p["c"])
    pt = [Interval(c, c)]
    refs = {k: list(pt) for k in CLASSES}
    notes = {k: "derived: Phi_gamma(k,n) = exp((c-gamma)(k-n))" for k in CLASSES}
    return _scalar("autonomous", {"c": c}, lambda n: np.full(np.shape(n), c),
                   lambda n: c * np.asarray(n, dtype=float), make_rate("exponential"),
                   refs, notes, "A(n) = e^c")


def _identity(p):
    d = int(p.get("d", 1))
    if d < 1:
        raise ValueError("identity requires d >= 1")
    sys = LinearSystem(d, log_diag=lambda ns: np.zeros((len(ns), d)),
                       log_fundamental=lambda ns: np.zeros((len(ns), d)), label="identity")
    refs = {k: [Interval(0.0, 0.0)] for k in CLASSES}
    notes = {k: "derived: Phi = Id" for k in CLASSES}
    lp = (lambda k, n: np.zeros(np.broadcast(k, n).shape)) if d == 1 else None
    return ExampleEntry("identity", {"d": d}, sys, make_rate("exponential"), refs, notes, lp,
                        "A(n) = Id")


_REGISTRY = {
    "ex707": (_ex707, {}, "quadratic-rate example without USP or UPP"),
    "ex718": (_ex718, {}, "exponential-rate example with a bounded solution"),
    "ex708": (_ex708, {"omega": 2.0, "a": 0.8}, "slow dichotomy that is not nonuniform"),
    "ex731": (_ex731, {"omega": 2.0, "a": 1.0}, "non-invariance example, original system"),
    "ex735": (_ex735, {"omega": 2.0, "a": 1.0}, "non-invariance example, transformed system"),
    "autonomous": (_autonomous, {"c": 0.0}, "scalar A(n) = e^c"),
    "identity": (_identity, {"d": 1}, "A(n) = Id in dimension d"),
}

_ALIASES = {"ω": "omega", "w": "omega"}


def list_examples():
    return [(name, dict(defaults), doc) for name, (_, defaults, doc) in _REGISTRY.items()]


def get_example(name: str, params: dict | None = None) -> ExampleEntry:
    """Instantiate a registry entry; unknown parameter names are errors."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown example {name!r}; available: {', '.join(_REGISTRY)}")
    factory, defaults, _ = _REGISTRY[name]
    p = dict(defaults)
    for k, v in (params or {}).items():
        k = _ALIASES.get(k, k)
        if k not in defaults:
            raise ValueError(f"{name} has no parameter {k!r} (accepted: {sorted(defaults) or 'none'})")
        p[k] = float(v)
    return factory(p)


def union_intervals(lists):
    """Union of closed intervals; touching or overlapping pieces are merged."""
    ivs = sorted((iv for lst in lists for iv in lst), key=lambda iv: (iv.lo, iv.hi))
    out = []
    for iv in ivs:
        if out and iv.lo <= out[-1].hi:
            last = out[-1]
            if iv.hi > last.hi:
                out[-1] = Interval(last.lo, iv.hi, last.lo_open, iv.hi_open)
            elif iv.hi == last.hi:
                out[-1] = Interval(last.lo, last.hi, last.lo_open, last.hi_open and iv.hi_open)
        else:
            out.append(iv)
    return out


def diagonal_compose(entries) -> ExampleEntry:
    """Block-diagonal system from scalar entries sharing one recommended rate."""
    entries = list(entries)
    if not entries:
        raise ValueError("nothing to compose")
    if any(e.dim != 1 for e in entries):
        raise ValueError("diagonal_compose takes scalar entries")
    labels = {e.rate.label for e in entries}
    if len(labels) != 1:
        raise ValueError(f"entries use different rates: {sorted(labels)}")
    d = len(entries)
    systems = [e.system for e in entries]

    def log_diag(ns):
        return np.hstack([s.log_diag(ns) for s in systems])

    def log_fund(ns):
        return np.hstack([s.fundamental_log(ns) for s in systems])

    name = "diag(" + ",".join(e.name for e in entries) + ")"
    sys = LinearSystem(d, log_diag=log_diag, log_fundamental=log_fund, label=name)
    refs, notes = {}, {}
    for cls in CLASSES:
        if not all(cls in e.references for e in entries):
            continue
        union = union_intervals([e.references[cls] for e in entries])
        if cls == "nonuniform":
            # blocks share one (alpha, theta): the sum needs max alpha + max theta < 0,
            # so its spectrum only contains the union
            notes[cls] = "derived: contains the union of block spectra; equal when blocks need no theta"
            continue
        # coordinate projectors split blockwise, so resolvents intersect
        refs[cls] = union
        notes[cls] = "derived: union of block spectra"
    params = {f"{i}.{k}": v for i, e in enumerate(entries) for k, v in e.params.items()}
    return ExampleEntry(name, params, sys, entries[0].rate, refs, notes, None,
                        "block-diagonal composition")
