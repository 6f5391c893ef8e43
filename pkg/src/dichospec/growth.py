"""Discrete growth rates on the integers.

A growth rate is a non-decreasing map ``mu: Z -> (0, inf)`` with ``mu(0) = 1``.
Everything downstream works with ``L(n) = log mu(n)``; the quadratic rate
already reaches ``exp(160000)`` at ``n = 400``, so ``mu`` itself is never
materialised except on request.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "GrowthRate",
    "GrowthRateError",
    "make_rate",
    "rate_from_table",
    "rate_from_csv",
    "log_ratio",
    "nonuniform_weight",
    "BUILTIN_RATES",
]

BUILTIN_RATES = ("exponential", "polynomial", "quadratic", "cubic")


class GrowthRateError(ValueError):
    """A rate violates L(0) = 0, monotonicity, or a lookup is out of range."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


def _exponential(n):
    return np.asarray(n, dtype=float)


def _polynomial(n):
    n = np.asarray(n)
    a = np.abs(n).astype(float)
    with np.errstate(divide="ignore"):
        out = np.sign(n) * np.log(np.where(a == 0, 1.0, a))
    return out


def _quadratic(n):
    n = np.asarray(n, dtype=float)
    return np.sign(n) * n * n


def _cubic(n):
    n = np.asarray(n, dtype=float)
    return n * n * n


_BUILTIN = {
    # kind: (log function, largest |n| kept well inside float precision)
    "exponential": (_exponential, 10**9),
    "polynomial": (_polynomial, 10**9),
    "quadratic": (_quadratic, 10**5),
    "cubic": (_cubic, 2000),
}


@dataclass(frozen=True)
class GrowthRate:
    """Immutable growth rate stored through its logarithm.

    Attributes
    ----------
    label : str
        Name used in reports (``"exponential"``, ``"quadratic"``, ...).
    mu_log : callable
        Vectorised ``n -> L(n) = log mu(n)``; accepts ints or integer arrays.
    window_hint : int
        Largest ``|n|`` at which values are numerically meaningful.
    """

    label: str
    mu_log: Callable = field(repr=False, compare=False)
    window_hint: int = 1000

    def L(self, n):
        """Natural log of ``mu(n)``; scalar in, float out; array in, array out."""
        out = self.mu_log(n)
        if np.ndim(n) == 0:
            return float(out)
        return np.asarray(out, dtype=float)

    def mu(self, n):
        # may overflow to inf; callers that care stay in log space
        with np.errstate(over="ignore"):
            return np.exp(self.L(n))

    def weight(self, n):
        """``lambda(n) = sgn(n) L(n)``, the exponent of the nonuniform weight."""
        val = np.sign(n) * self.L(n)
        if np.ndim(n) == 0:
            return float(abs(val)) if val == 0 else float(val)
        return np.where(val == 0, 0.0, val)

    def log_ratio(self, k, n):
        """``L(k) - L(n)``, i.e. ``log(mu(k)/mu(n))``."""
        return self.L(k) - self.L(n)


def _check_rate(rate: GrowthRate, span: int) -> None:
    ns = np.arange(-span, span + 1)
    vals = np.asarray(rate.L(ns), dtype=float)
    if vals.shape != ns.shape:
        raise GrowthRateError("custom log function must be vectorised over integer arrays")
    if not np.all(np.isfinite(vals)):
        bad = int(ns[np.argmin(np.isfinite(vals))])
        raise GrowthRateError(f"non-finite log value at n={bad}", bad)
    if rate.L(0) != 0.0:
        raise GrowthRateError(f"L(0) must be 0, got {rate.L(0)!r}", 0)
    drops = np.nonzero(np.diff(vals) < 0)[0]
    if drops.size:
        bad = int(ns[drops[0] + 1])
        raise GrowthRateError(f"log rate decreases at n={bad}: L({bad - 1})={vals[drops[0]]:g} > L({bad})={vals[drops[0] + 1]:g}", bad)
    # divergence to +/- infinity cannot be checked on finite data; this is the surrogate
    if not (vals[-1] > 0.0 > vals[0]):
        raise GrowthRateError(
            f"rate must satisfy L({span}) > 0 > L({-span}) on its window", span)


def _vectorise(func):
    def wrapped(n):
        if np.ndim(n) == 0:
            return float(func(int(n)))
        arr = np.asarray(n)
        try:
            out = np.asarray(func(arr), dtype=float)
            if out.shape == arr.shape:
                return out
        except Exception:
            pass
        return np.array([float(func(int(x))) for x in arr.ravel()]).reshape(arr.shape)

    return wrapped


def make_rate(kind: str, custom_log: Callable | None = None, *, window_hint: int | None = None,
              label: str | None = None) -> GrowthRate:
    """Build a built-in or custom growth rate.

    Parameters
    ----------
    kind : {"exponential", "polynomial", "quadratic", "cubic", "custom"}
    custom_log : callable, optional
        ``n -> L(n)`` for ``kind="custom"``. Scalar functions are vectorised.
    window_hint : int, optional
        Range ``[-h, h]`` on which a custom rate is validated (default 1000).

    Examples
    --------
    >>> make_rate("quadratic").L(3)
    9.0
    >>> round(make_rate("polynomial").L(-4), 6)
    -1.386294
    """
    if kind == "custom":
        if custom_log is None:
            raise GrowthRateError("custom rate requires custom_log")
        hint = 1000 if window_hint is None else int(window_hint)
        rate = GrowthRate(label or "custom", _vectorise(custom_log), hint)
        _check_rate(rate, hint)
        return rate
    if kind not in _BUILTIN:
        raise GrowthRateError(f"unknown rate kind {kind!r}; expected one of {BUILTIN_RATES + ('custom',)}")
    func, hint = _BUILTIN[kind]
    return GrowthRate(label or kind, func, hint if window_hint is None else int(window_hint))


def rate_from_table(table: dict, label: str = "table") -> GrowthRate:
    """Rate backed by exact integer lookups; no interpolation, no extrapolation."""
    keys = np.array(sorted(int(k) for k in table))
    if keys.size == 0:
        raise GrowthRateError("empty growth-rate table")
    lo, hi = int(keys[0]), int(keys[-1])
    if not np.array_equal(keys, np.arange(lo, hi + 1)):
        missing = sorted(set(range(lo, hi + 1)) - set(keys.tolist()))[0]
        raise GrowthRateError(f"table has a hole at n={missing}", missing)
    values = np.array([float(table[int(k)]) for k in keys])

    def lookup(n):
        arr = np.asarray(n)
        if arr.size and (arr.min() < lo or arr.max() > hi):
            bad = int(arr.min()) if arr.min() < lo else int(arr.max())
            raise GrowthRateError(f"n={bad} outside tabulated range [{lo}, {hi}]", bad)
        out = values[arr.astype(int) - lo]
        return float(out) if arr.ndim == 0 else out

    hint = min(hi, -lo)
    if hint < 1:
        raise GrowthRateError("table must cover both signs of n")
    rate = GrowthRate(label, lookup, hint)
    _check_rate(rate, hint)
    return rate


def rate_from_csv(path, label: str | None = None) -> GrowthRate:
    """Load ``n, L(n)`` rows from a two-column CSV (a header row is optional)."""
    table = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                n = int(row[0])
            except ValueError:
                continue  # header
            table[n] = float(row[1])
    return rate_from_table(table, label or Path(path).stem)


def log_ratio(rate: GrowthRate, k, n):
    """``L(k) - L(n)``; antisymmetric and non-negative for ``k >= n``."""
    return rate.log_ratio(k, n)


def nonuniform_weight(rate: GrowthRate, n):
    """``sgn(n) * L(n) >= 0``; zero at ``n = 0``."""
    return rate.weight(n)
