"""Weak kinematic similarity and the non-invariance experiment.

A map ``S`` is weakly nondegenerate for a rate ``mu`` when

    log||S(n)||, log||S(n)^-1||  <=  logM + theta_S * lam(n)

and the transformed system is ``B(k) = S(k+1)^-1 A(k) S(k)``, so that
``Phi_A(k,n) S(n) = S(k) Phi_B(k,n)``.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .dichotomy_fit import DEFAULT_CAPS, DichotomyParams, FitCaps
from .growth import GrowthRate, make_rate
from .spectrum import default_gamma_range, estimate_spectrum, resolvent_test
from .system import LinearSystem, SingularCoefficientError, normalize

__all__ = [
    "SimilarityMap",
    "NondegeneracyError",
    "exp_scaling",
    "identity_map",
    "similarity_from_csv",
    "check_weakly_nondegenerate",
    "transform",
    "TransportResult",
    "transported_params",
    "near_spectrum_breakdown",
    "invariance_experiment",
]


class NondegeneracyError(ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SimilarityMap:
    """``n -> S(n)`` in scaled form ``(M, s)`` with the nondegeneracy constants."""

    step: Callable = field(repr=False, compare=False)
    dim: int
    logM: float
    theta_S: float
    rate: GrowthRate
    label: str = "S"
    diag_log: Callable | None = field(default=None, repr=False, compare=False)
    diag_sign: Callable | None = field(default=None, repr=False, compare=False)

    def __call__(self, n):
        M, s = self.step(int(n))
        with np.errstate(over="ignore"):
            return np.exp(s) * M

    def log_norm(self, n):
        return float(self.step(int(n))[1])

    def log_norm_inv(self, n):
        M, s = self.step(int(n))
        sig = np.linalg.svd(M, compute_uv=False)[-1]
        if sig <= 1e-12:
            raise SingularCoefficientError(int(n), float(sig))
        return float(-s - np.log(sig))

    def inverse(self) -> "SimilarityMap":
        def step(n):
            M, s = self.step(n)
            return normalize(np.linalg.inv(M), -s)

        dl = None if self.diag_log is None else (lambda ns: -self.diag_log(ns))
        return SimilarityMap(step, self.dim, self.logM, self.theta_S, self.rate,
                             f"{self.label}^-1", dl, self.diag_sign)


def exp_scaling(sigma: float, d: int = 1, rate: GrowthRate | None = None, logM: float = 0.0,
                theta_S: float | None = None) -> SimilarityMap:
    """``S(n) = exp(sigma n) Id``; ``theta_S`` defaults to ``|sigma|`` (tight for the exponential rate)."""
    rate = rate or make_rate("exponential")
    sigma = float(sigma)
    I = np.eye(d)

    def step(n):
        return I, sigma * n

    def dl(ns):
        return np.repeat((sigma * np.asarray(ns, dtype=float))[:, None], d, axis=1)

    th = abs(sigma) if theta_S is None else float(theta_S)
    return SimilarityMap(step, d, float(logM), th, rate, f"exp({sigma:g} n)", dl)


def identity_map(d: int = 1, rate: GrowthRate | None = None) -> SimilarityMap:
    return exp_scaling(0.0, d, rate, 0.0, 0.0)


def similarity_from_csv(path, rate: GrowthRate, logM: float, theta_S: float) -> SimilarityMap:
    """Rows ``n, s11, ..., sdd``; lookups outside the table are errors."""
    rows = {}
    with open(path, newline="") as fh:
        for raw in csv.reader(fh):
            if not raw or raw[0].lstrip().startswith("#"):
                continue
            try:
                n = int(raw[0])
            except ValueError:
                continue
            rows[n] = np.array([float(x) for x in raw[1:]])
    if not rows:
        raise ValueError(f"{path}: no rows")
    d = int(round(np.sqrt(len(next(iter(rows.values()))))))
    mats = {n: normalize(v.reshape(d, d)) for n, v in rows.items()}

    def step(n):
        if n not in mats:
            raise ValueError(f"S({n}) not tabulated in {path}")
        return mats[n]

    return SimilarityMap(step, d, float(logM), float(theta_S), rate, Path(path).stem)


def check_weakly_nondegenerate(S: SimilarityMap, window) -> dict:
    """Worst slack of both bounds over the window; passes iff both are ``<= 0``."""
    lo, hi = int(window[0]), int(window[1])
    ns = np.arange(lo, hi + 1)
    lam = S.rate.weight(ns)
    a = np.array([S.log_norm(n) for n in ns]) - S.logM - S.theta_S * lam
    b = np.array([S.log_norm_inv(n) for n in ns]) - S.logM - S.theta_S * lam
    ia, ib = int(np.argmax(a)), int(np.argmax(b))
    # tiny tolerance: log-norms of exact scalings are computed, not looked up
    tol = 1e-12 * (1.0 + float(np.max(np.abs(S.theta_S * lam))))
    return {
        "slack_S": float(a[ia]), "binding_S": int(ns[ia]),
        "slack_S_inv": float(b[ib]), "binding_S_inv": int(ns[ib]),
        "passed": bool(a[ia] <= tol and b[ib] <= tol),
        "window": [lo, hi], "logM": S.logM, "theta_S": S.theta_S, "map": S.label,
    }


def transform(sys: LinearSystem, S: SimilarityMap) -> LinearSystem:
    """``B(k) = S(k+1)^-1 A(k) S(k)``; diagonal structure is kept when both sides are diagonal."""
    if S.dim != sys.dim:
        raise ValueError(f"dimension mismatch: system {sys.dim}, map {S.dim}")

    def step(k):
        Ma, sa = sys.step(k)
        Mk, sk = S.step(k)
        Mk1, sk1 = S.step(k + 1)
        try:
            X = np.linalg.solve(Mk1, Ma @ Mk)
        except np.linalg.LinAlgError:
            raise SingularCoefficientError(k + 1, 0.0) from None
        return normalize(X, sa + sk - sk1)

    label = f"{S.label}-transform of {sys.label}"
    if sys.is_diagonal and S.diag_log is not None:
        def log_diag(ns):
            ns = np.asarray(ns)
            return sys.log_diag(ns) + S.diag_log(ns) - S.diag_log(ns + 1)

        def log_fund(ns):
            ns = np.asarray(ns)
            return sys.fundamental_log(ns) - S.diag_log(ns) + S.diag_log(np.array([0]))

        sign = None
        if sys._diag_sign is not None or S.diag_sign is not None:
            def sign(ns):
                ns = np.asarray(ns)
                a = np.ones((len(ns), sys.dim)) if sys._diag_sign is None else sys._diag_sign(ns)
                s0 = np.ones((len(ns), sys.dim)) if S.diag_sign is None else S.diag_sign(ns)
                s1 = np.ones((len(ns), sys.dim)) if S.diag_sign is None else S.diag_sign(ns + 1)
                return a * s0 * s1

        return LinearSystem(sys.dim, step, invertible=sys.invertible, label=label,
                            log_diag=log_diag, diag_sign=sign,
                            log_fundamental=log_fund if sys.invertible else None,
                            domain=sys.domain, sigma_min=sys.sigma_min)
    return LinearSystem(sys.dim, step, invertible=sys.invertible, label=label,
                        domain=sys.domain, sigma_min=sys.sigma_min)


@dataclass
class TransportResult:
    feasible: bool
    params: DichotomyParams | None
    margin: float            # min{-alpha, beta} - 4 theta
    theta: float
    message: str = ""

    def to_dict(self):
        return {"feasible": self.feasible,
                "params": None if self.params is None else self.params.to_dict(),
                "margin": self.margin, "theta": self.theta, "message": self.message}


def transported_params(params: DichotomyParams, theta_S: float, logM: float = 0.0) -> TransportResult:
    """Parameters for the transformed system when ``min{-alpha, beta} > 4 theta``.

    ``theta`` is the larger of the dichotomy weight and ``theta_S`` (both bounds
    then hold with it). Absent sides drop out of the minimum. The constant
    becomes ``K M^2``.
    """
    if params.cls != "nonuniform":
        raise ValueError("transport applies to the nonuniform class")
    if params.alpha is not None and params.beta is not None and params.theta != params.nu:
        raise ValueError("lemma hypothesis requires theta=nu")
    own = params.theta if params.alpha is not None else params.nu
    th = max(float(own), float(theta_S))
    rates = []
    if params.alpha is not None:
        rates.append(-params.alpha)
    if params.beta is not None:
        rates.append(params.beta)
    if not rates:
        raise ValueError("params have neither a stable nor an unstable side")
    margin = min(rates) - 4.0 * th
    if not margin > 0:
        return TransportResult(False, None, margin, th,
                               f"min(-alpha, beta) = {min(rates):.6g} <= 4 theta = {4 * th:.6g}")
    new = DichotomyParams(
        "nonuniform",
        alpha=None if params.alpha is None else params.alpha + th,
        beta=None if params.beta is None else params.beta - th,
        theta=3.0 * th if params.alpha is not None else 0.0,
        nu=3.0 * th if params.beta is not None else 0.0,
        logK=params.logK + 2.0 * logM,
    )
    return TransportResult(True, new, margin, th)


def near_spectrum_breakdown(sys, rate, gamma, theta_S, window=(-200, 200), caps=None) -> dict:
    """Fit the ``gamma``-weighted system and test the transport condition on the fit.

    ``fired`` is true when the fitted parameters fail ``min{-alpha, beta} > 4 theta``.
    """
    caps = caps or DEFAULT_CAPS
    v = resolvent_test(sys, rate, gamma, "nonuniform", window, caps)
    if not v.member:
        return {"gamma": float(gamma), "member": False, "fired": None,
                "message": "gamma is not in the nonuniform resolvent"}
    pv = next(p for p in v.fits if p.projector == v.projector)
    st, un = pv.stable, pv.unstable
    th = max(st.params.theta if st else 0.0, un.params.nu if un else 0.0)
    params = DichotomyParams("nonuniform",
                             alpha=st.params.alpha if st else None,
                             beta=un.params.beta if un else None,
                             theta=th, nu=th,
                             logK=max(st.params.logK if st else 0.0, un.params.logK if un else 0.0))
    tr = transported_params(params, theta_S)
    return {"gamma": float(gamma), "member": True, "projector": v.projector,
            "params": params.to_dict(), "transport": tr.to_dict(), "fired": not tr.feasible}


def invariance_experiment(sysA: LinearSystem, S: SimilarityMap, rate: GrowthRate,
                          cls: str = "nonuniform", gamma_range=None, grid_step: float = 0.05,
                          window=(-200, 200), caps: FitCaps | None = None,
                          refinement_tol: float | None = None, jobs: int = 1) -> dict:
    """Estimate the spectrum of ``sysA`` and of its ``S``-transform with identical settings."""
    caps = caps or DEFAULT_CAPS
    nd = check_weakly_nondegenerate(S, window)
    if not nd["passed"]:
        raise NondegeneracyError("similarity map is not weakly nondegenerate on the window", nd)
    sysB = transform(sysA, S)
    if gamma_range is None:
        ra = default_gamma_range(sysA, rate, window, caps)
        rb = default_gamma_range(sysB, rate, window, caps)
        gamma_range = (min(ra[0], rb[0]), max(ra[1], rb[1]))
    kw = dict(gamma_range=gamma_range, grid_step=grid_step, window=window, caps=caps,
              refinement_tol=refinement_tol, jobs=1)
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=2) as ex:
            fa = ex.submit(estimate_spectrum, sysA, rate, cls, **kw)
            fb = ex.submit(estimate_spectrum, sysB, rate, cls, **kw)
            estA, estB = fa.result(), fb.result()
    else:
        estA = estimate_spectrum(sysA, rate, cls, **kw)
        estB = estimate_spectrum(sysB, rate, cls, **kw)
    tol = estA.refinement_tol
    diff = []
    if len(estA.intervals) == len(estB.intervals):
        for i, (ia, ib) in enumerate(zip(estA.intervals, estB.intervals)):
            for end in ("lo", "hi"):
                a, b = getattr(ia, end), getattr(ib, end)
                dsp = b - a if np.isfinite(a) and np.isfinite(b) else 0.0
                diff.append({"interval": i, "endpoint": end, "A": a, "B": b,
                             "displacement": dsp,
                             "quantized": round(round(dsp / tol) * tol, 12)})
        moved = any(abs(r["displacement"]) > 3 * tol for r in diff)
        label = "non-invariance demonstrated" if moved else "no displacement detected"
    else:
        label = "non-invariance demonstrated"
    return {
        "map": {"label": S.label, "logM": S.logM, "theta_S": S.theta_S, "rate": S.rate.label},
        "nondegeneracy": nd,
        "class": cls,
        "spectrum_A": estA,
        "spectrum_B": estB,
        "diff": diff,
        "interval_counts": [len(estA.intervals), len(estB.intervals)],
        "label": label,
    }
