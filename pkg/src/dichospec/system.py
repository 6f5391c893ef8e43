"""Linear systems x(k+1) = A(k) x(k), evolution operators and projectors.

Every operator is carried as a pair ``(M, s)`` with ``||M||_2 = 1`` (or
``M = 0``) and the operator equal to ``exp(s) * M``. Coefficients are
supplied in the same form, so systems whose entries over- or underflow a
double (``exp(-801)`` for the quadratic example at ``n = 400``) are
representable without loss.
"""

from __future__ import annotations

import csv
import threading
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Callable

import numpy as np

from .growth import GrowthRate

__all__ = [
    "SystemError_",
    "NoBackwardExtension",
    "SingularCoefficientError",
    "ProjectorError",
    "normalize",
    "LinearSystem",
    "WeightedSystem",
    "EvolutionOperator",
    "ProjectorFamily",
    "coordinate_projector",
    "identity_projector",
    "zero_projector",
    "coordinate_projectors",
    "projector_residuals",
    "validate_projector",
    "weighted",
    "transition",
    "solution_log_norms",
    "pair_log_norms",
    "diagonal_system",
    "system_from_csv",
]

SIGMA_MIN = 1e-12


class SystemError_(RuntimeError):
    """Base class for numerical failures in systems and operators."""


class NoBackwardExtension(SystemError_):
    def __init__(self, message="no backward extension"):
        super().__init__(message)


class SingularCoefficientError(SystemError_):
    def __init__(self, index, sigma):
        super().__init__(f"coefficient A({index}) is singular (smallest singular value {sigma:.3e})")
        self.index = index


class ProjectorError(ValueError):
    pass


def normalize(M, s=0.0):
    """Rescale ``exp(s) M`` so the matrix factor has unit spectral norm."""
    M = np.asarray(M, dtype=float)
    nrm = np.linalg.norm(M, 2) if M.ndim == 2 else abs(float(M))
    if nrm == 0.0:
        return np.zeros_like(M), -np.inf
    return M / nrm, float(s) + float(np.log(nrm))


def _sigma_min(M):
    return float(np.linalg.svd(M, compute_uv=False)[-1])


class LinearSystem:
    """Coefficient sequence ``n -> A(n)`` of fixed dimension.

    Parameters
    ----------
    dim : int
    step : callable, optional
        ``n -> (M, s)`` with ``A(n) = exp(s) M``. Preferred form.
    coeff : callable, optional
        ``n -> A(n)`` as a plain matrix; used when ``step`` is absent.
    invertible : bool
        Claim that every ``A(n)`` is invertible; checked on each step.
    log_diag : callable, optional
        Vectorised ``ns -> (len(ns), d)`` array of ``log|A_ii(n)|``. Marks the
        system as diagonal and enables closed-form cumulative products.
    diag_sign : callable, optional
        Vectorised signs of the diagonal entries (default all positive).
    log_fundamental : callable, optional
        Closed form of ``log|X_ii(n)|`` for the diagonal fundamental
        operator with ``X(0) = Id``.
    domain : (int, int), optional
        Inclusive range of ``n`` on which ``A(n)`` is defined.
    """

    def __init__(self, dim, step=None, *, coeff=None, invertible=True, label="",
                 log_diag=None, diag_sign=None, log_fundamental=None, domain=None,
                 sigma_min=SIGMA_MIN):
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        self.invertible = bool(invertible)
        self.label = label
        self.sigma_min = sigma_min
        self.domain = None if domain is None else (int(domain[0]), int(domain[1]))
        self._log_diag = log_diag
        self._diag_sign = diag_sign
        self._log_fundamental = log_fundamental
        if step is None and coeff is None and log_diag is None:
            raise ValueError("one of step, coeff or log_diag is required")
        self._step = step
        self._coeff = coeff

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, label={self.label!r})"

    @property
    def is_diagonal(self):
        return self._log_diag is not None

    def _check_domain(self, n):
        if self.domain is not None and not (self.domain[0] <= n <= self.domain[1]):
            raise SystemError_(f"A({n}) requested outside the tabulated range {self.domain}")

    def _raw_step(self, n):
        if self._step is not None:
            M, s = self._step(n)
            return normalize(np.atleast_2d(np.asarray(M, dtype=float)), s)
        if self._coeff is not None:
            return normalize(np.atleast_2d(np.asarray(self._coeff(n), dtype=float)))
        logs = np.asarray(self._log_diag(np.array([n])), dtype=float)[0]
        sign = np.ones(self.dim) if self._diag_sign is None else np.asarray(self._diag_sign(np.array([n])))[0]
        top = float(np.max(logs))
        if not np.isfinite(top):
            return np.zeros((self.dim, self.dim)), -np.inf
        return np.diag(sign * np.exp(logs - top)), top

    def step(self, n):
        """``A(n)`` as ``(M, s)``; raises on singular coefficients when invertibility is claimed."""
        n = int(n)
        self._check_domain(n)
        M, s = self._raw_step(n)
        if self.invertible:
            sig = _sigma_min(M) if np.isfinite(s) else 0.0
            if sig <= self.sigma_min:
                raise SingularCoefficientError(n, sig)
        return M, s

    def coeff(self, n):
        """Plain matrix ``A(n)``; may overflow for extreme coefficients."""
        M, s = self.step(n)
        with np.errstate(over="ignore"):
            return np.exp(s) * M

    def log_diag(self, ns):
        if self._log_diag is None:
            raise SystemError_("system is not diagonal")
        ns = np.asarray(ns)
        if self.domain is not None and ns.size:
            self._check_domain(int(ns.min()))
            self._check_domain(int(ns.max()))
        return np.asarray(self._log_diag(ns), dtype=float).reshape(len(ns), self.dim)

    def fundamental_log(self, ns):
        """``log|X_ii(n)|`` for the diagonal fundamental operator, ``X(0) = Id``."""
        ns = np.asarray(ns, dtype=int)
        if self._log_fundamental is not None:
            return np.asarray(self._log_fundamental(ns), dtype=float).reshape(len(ns), self.dim)
        if not self.invertible:
            raise SystemError_("cumulative log products need an invertible diagonal system")
        lo, hi = min(int(ns.min()), 0), max(int(ns.max()), 0)
        logs = self.log_diag(np.arange(lo, hi))
        c = np.vstack([np.zeros((1, self.dim)), np.cumsum(logs, axis=0)])
        return c[ns - lo] - c[-lo]


class WeightedSystem(LinearSystem):
    """The system with coefficients ``A(k) (mu(k+1)/mu(k))^(-gamma)``."""

    def __init__(self, base: LinearSystem, rate: GrowthRate, gamma: float):
        self.base = base
        self.rate = rate
        self.gamma = float(gamma)
        g = self.gamma

        def step(n):
            M, s = base.step(n)
            if g == 0.0:
                return M, s
            return M, s - g * (rate.L(n + 1) - rate.L(n))

        log_diag = log_fund = None
        if base.is_diagonal:
            def log_diag(ns):
                out = base.log_diag(ns)
                if g == 0.0:
                    return out
                return out - (g * (rate.L(ns + 1) - rate.L(ns)))[:, None]

            def log_fund(ns):
                out = base.fundamental_log(ns)
                if g == 0.0:
                    return out
                return out - (g * rate.L(ns))[:, None]

        super().__init__(base.dim, step, invertible=base.invertible,
                         label=f"{base.label}[{rate.label},gamma={g:g}]",
                         log_diag=log_diag, diag_sign=base._diag_sign,
                         log_fundamental=log_fund if base.is_diagonal else None,
                         domain=base.domain, sigma_min=base.sigma_min)

    def step(self, n):
        # the base system already validated invertibility
        n = int(n)
        self._check_domain(n)
        return self._step(n)


def weighted(sys: LinearSystem, rate: GrowthRate, gamma: float) -> WeightedSystem:
    """The ``(mu, gamma)``-weighted system; ``gamma = 0`` reproduces ``sys`` exactly."""
    return WeightedSystem(sys, rate, gamma)


@dataclass(frozen=True)
class ProjectorFamily:
    """Family ``n -> P(n)`` of idempotents of constant rank.

    ``coords`` records the stable coordinate set (0-based) for constant
    diagonal projectors, which lets diagonal systems skip matrix products.
    """

    proj: Callable = field(repr=False, compare=False)
    rank: int
    dim: int
    label: str = ""
    coords: tuple | None = None

    def __call__(self, n):
        return np.asarray(self.proj(n), dtype=float)

    @property
    def is_identity(self):
        return self.rank == self.dim

    @property
    def is_zero(self):
        return self.rank == 0


def coordinate_projector(d: int, stable_indices) -> ProjectorFamily:
    """Constant diagonal projector onto the listed coordinates (1-based)."""
    idx = sorted(set(int(i) for i in stable_indices))
    if any(i < 1 or i > d for i in idx):
        raise ProjectorError(f"stable indices {idx} out of range 1..{d}")
    diag = np.zeros(d)
    diag[[i - 1 for i in idx]] = 1.0
    P = np.diag(diag)
    if not idx:
        label = "0"
    elif len(idx) == d:
        label = "Id"
    else:
        label = "P{" + ",".join(map(str, idx)) + "}"
    return ProjectorFamily(lambda n, P=P: P, len(idx), d, label, tuple(i - 1 for i in idx))


def identity_projector(d):
    return coordinate_projector(d, range(1, d + 1))


def zero_projector(d):
    return coordinate_projector(d, ())


def coordinate_projectors(d):
    """All ``2^d`` coordinate projectors ordered by rank, then lexicographically."""
    out = []
    for r in range(d + 1):
        for combo in combinations(range(1, d + 1), r):
            out.append(coordinate_projector(d, combo))
    return out


def projector_residuals(sys: LinearSystem, P: ProjectorFamily, window) -> dict:
    """Worst violations of the projector invariants over ``window``."""
    lo, hi = window
    idem = inv = 0.0
    ranks = set()
    kern = np.inf
    for n in range(lo, hi + 1):
        Pn = P(n)
        idem = max(idem, float(np.linalg.norm(Pn @ Pn - Pn, 2)))
        sv = np.linalg.svd(Pn, compute_uv=False)
        ranks.add(int(np.sum(sv > 1e-8)))
        if n < hi:
            M, s = sys.step(n)
            Pn1 = P(n + 1)
            # invariance measured relative to ||A(n)||, i.e. on the unit-norm factor
            inv = max(inv, float(np.linalg.norm(M @ Pn - Pn1 @ M, 2)) / 2.0)
            Q = _kernel_basis(Pn)
            if Q.shape[1]:
                R = _kernel_basis(Pn1)
                C = np.linalg.lstsq(R, M @ Q, rcond=None)[0]
                kern = min(kern, _sigma_min(C) if C.size else np.inf)
    return {"idempotency": idem, "ranks": sorted(ranks), "invariance": inv, "kernel_sigma_min": kern}


def validate_projector(sys, P, window, sigma_min=SIGMA_MIN):
    res = projector_residuals(sys, P, window)
    if res["idempotency"] > 1e-10:
        raise ProjectorError(f"P(n) not idempotent: {res['idempotency']:.2e}")
    if res["ranks"] != [P.rank]:
        raise ProjectorError(f"rank not constant {P.rank}: observed {res['ranks']}")
    if res["invariance"] > 1e-8:
        raise ProjectorError(f"invariance A(n)P(n)=P(n+1)A(n) violated by {res['invariance']:.2e}")
    if res["kernel_sigma_min"] <= sigma_min:
        raise ProjectorError("A(n) restricted to ker P(n) is not an isomorphism")
    return res


def _kernel_basis(P):
    """Orthonormal basis of ``ker P`` (columns)."""
    u, sv, vt = np.linalg.svd(P)
    rank = int(np.sum(sv > 1e-8))
    return vt[rank:].T


class EvolutionOperator:
    """Lazily evaluated ``Phi(k, n)`` in scaled form with a row cache.

    Forward rows ``Phi(n+1, n), Phi(n+2, n), ...`` and backward rows
    ``Phi(n-1, n), ...`` are extended on demand and reused. Fills are guarded
    by a lock, so ``transition`` is observably pure under concurrent use.
    """

    def __init__(self, system: LinearSystem, projector: ProjectorFamily | None = None):
        self.system = system
        self.projector = projector
        self._fwd: dict[int, list] = {}
        self._bwd: dict[int, list] = {}
        self._lock = threading.Lock()

    def _forward(self, k, n):
        with self._lock:
            row = self._fwd.setdefault(n, [])
            d = self.system.dim
            while len(row) < k - n:
                prevM, prevs = row[-1] if row else (np.eye(d), 0.0)
                j = n + len(row)
                A, s = self.system.step(j)
                row.append(normalize(A @ prevM, prevs + s))
            return row[k - n - 1]

    def _backward_inverse(self, k, n):
        with self._lock:
            row = self._bwd.setdefault(n, [])
            d = self.system.dim
            while len(row) < n - k:
                prevM, prevs = row[-1] if row else (np.eye(d), 0.0)
                j = n - len(row) - 1
                A, s = self.system.step(j)
                row.append(normalize(np.linalg.solve(A, prevM), prevs - s))
            return row[n - k - 1]

    def _backward_restricted(self, k, n):
        P = self.projector
        M, s = self._forward(n, k)
        Qk = _kernel_basis(P(k))
        Rn = _kernel_basis(P(n))
        if Qk.shape[1] == 0:
            return np.zeros((self.system.dim, self.system.dim)), -np.inf
        C = np.linalg.lstsq(Rn, M @ Qk, rcond=None)[0]
        if _sigma_min(C) <= self.system.sigma_min:
            raise NoBackwardExtension(f"Phi({n},{k}) restricted to ker P({k}) is singular")
        Id = np.eye(self.system.dim)
        op = Qk @ np.linalg.solve(C, Rn.T @ (Id - P(n)))
        return normalize(op, -s)

    def transition(self, k, n):
        """``Phi(k, n)`` as ``(M, s)``.

        For ``k < n`` on a non-invertible system a projector must have been
        supplied; the result is then ``Phi(k, n)(Id - P(n))``, the inverse of
        ``Phi(n, k)`` restricted to ``ker P(k)``.
        """
        k, n = int(k), int(n)
        if k == n:
            return np.eye(self.system.dim), 0.0
        if k > n:
            return self._forward(k, n)
        if self.system.invertible:
            return self._backward_inverse(k, n)
        if self.projector is not None:
            return self._backward_restricted(k, n)
        raise NoBackwardExtension()


def transition(op: EvolutionOperator, k, n):
    return op.transition(k, n)


def solution_log_norms(op: EvolutionOperator, n0: int, xi, window) -> list:
    """``[(k, log ||Phi(k, n0) xi||)]`` for ``k`` in the inclusive window."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if not np.any(xi):
        raise ValueError("initial vector must be nonzero")
    lo, hi = window
    out = []
    for k in range(lo, hi + 1):
        M, s = op.transition(k, n0)
        v = np.linalg.norm(M @ xi)
        out.append((k, s + np.log(v) if v > 0 else -np.inf))
    return out


def _stack_steps(sys, ns):
    Ms, ss = zip(*(sys.step(int(j)) for j in ns)) if len(ns) else ((), ())
    return np.array(Ms).reshape(len(ns), sys.dim, sys.dim), np.array(ss, dtype=float)


def _log_spec_norm(X):
    if X.shape[1] == 1 and X.shape[2] == 1:
        a = np.abs(X[:, 0, 0])
    else:
        a = np.linalg.norm(X, ord=2, axis=(1, 2))
    with np.errstate(divide="ignore"):
        return np.log(a)


def pair_log_norms(sys: LinearSystem, window, side: str, projector: ProjectorFamily | None = None):
    """All windowed pair values used by the dichotomy estimates.

    ``side="stable"``: pairs ``k >= n`` with ``log||Phi(k,n) P(n)||``;
    ``side="unstable"``: pairs ``k <= n`` with ``log||Phi(k,n)(Id-P(n))||``;
    ``side="full"``: all pairs with ``log||Phi(k,n)||``.

    Returns flat arrays ``(k, n, y)``.
    """
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError("empty window")
    ns = np.arange(lo, hi + 1)
    d = sys.dim
    if projector is None:
        projector = identity_projector(d) if side == "stable" else zero_projector(d)
    if side not in ("stable", "unstable", "full"):
        raise ValueError(f"unknown side {side!r}")

    if sys.is_diagonal and sys.invertible and (projector.coords is not None or side == "full"):
        F = sys.fundamental_log(ns)
        if side == "full":
            sel = list(range(d))
        elif side == "stable":
            sel = list(projector.coords)
        else:
            sel = [i for i in range(d) if i not in projector.coords]
        K, N = np.meshgrid(ns, ns, indexing="ij")
        if side == "stable":
            mask = K >= N
        elif side == "unstable":
            mask = K <= N
        else:
            mask = np.ones_like(K, dtype=bool)
        k, n = K[mask], N[mask]
        if not sel:
            return k, n, np.full(k.shape, -np.inf)
        Fs = F[:, sel]
        y = np.max(Fs[k - lo] - Fs[n - lo], axis=1)
        return k, n, y

    W = len(ns)
    Ps = np.array([projector(int(j)) for j in ns]).reshape(W, d, d)
    Id = np.eye(d)
    ks, nn, ys = [], [], []
    if side in ("stable", "full"):
        post = Ps if side == "stable" else np.broadcast_to(Id, (W, d, d))
        AM, As = _stack_steps(sys, ns[:-1])
        cur = np.broadcast_to(Id, (W, d, d)).copy()
        cur_s = np.zeros(W)
        for j in range(W):
            m = W - j
            if j > 0:
                cur[:m] = np.matmul(AM[j - 1:j - 1 + m], cur[:m])
                cur_s[:m] += As[j - 1:j - 1 + m]
                f = np.linalg.norm(cur[:m], axis=(1, 2))
                good = f > 0
                cur[:m][good] /= f[good, None, None]
                with np.errstate(divide="ignore"):
                    cur_s[:m] += np.log(f)
            vals = cur_s[:m] + _log_spec_norm(np.matmul(cur[:m], post[:m]))
            ks.append(ns[:m] + j)
            nn.append(ns[:m])
            ys.append(vals)
    if side in ("unstable", "full"):
        post = np.broadcast_to(Id, (W, d, d)) - Ps if side == "unstable" else np.broadcast_to(Id, (W, d, d))
        start = 0 if side == "unstable" else 1
        if sys.invertible:
            AM, As = _stack_steps(sys, ns[:-1])
            AMi = np.linalg.inv(AM) if len(AM) else AM
            cur = np.broadcast_to(Id, (W, d, d)).copy()
            cur_s = np.zeros(W)
            for j in range(W):
                m = W - j
                if j > 0:
                    # Phi(n-j, n) = A(n-j)^{-1} Phi(n-j+1, n), n = ns[j:]
                    cur[j:] = np.matmul(AMi[:m], cur[j:])
                    cur_s[j:] -= As[:m]
                    f = np.linalg.norm(cur[j:], axis=(1, 2))
                    cur[j:] /= f[:, None, None]
                    cur_s[j:] += np.log(f)
                if j < start:
                    continue
                vals = cur_s[j:] + _log_spec_norm(np.matmul(cur[j:], post[j:]))
                ks.append(ns[j:] - j)
                nn.append(ns[j:])
                ys.append(vals)
        else:
            if side == "full":
                raise NoBackwardExtension()
            op = EvolutionOperator(sys, projector)
            for n in ns:
                for k in range(lo, int(n) + 1):
                    M, s = op.transition(k, int(n))
                    v = np.linalg.norm(M @ (Id - projector(int(n))), 2)
                    ks.append(np.array([k]))
                    nn.append(np.array([n]))
                    ys.append(np.array([s + np.log(v) if v > 0 else -np.inf]))
    return np.concatenate(ks), np.concatenate(nn), np.concatenate(ys)


def diagonal_system(log_diag, dim, *, label="", log_fundamental=None, invertible=True,
                    diag_sign=None) -> LinearSystem:
    return LinearSystem(dim, log_diag=log_diag, log_fundamental=log_fundamental,
                        invertible=invertible, label=label, diag_sign=diag_sign)


def system_from_csv(path, label=None) -> LinearSystem:
    """Load ``n, a11, a12, ..., add`` rows; a ``# window: lo hi`` header line is required.

    ``A(n)`` must be tabulated for ``lo <= n < hi`` so that the evolution
    operator is defined on the whole window; other indices are errors.
    """
    window = None
    rows = {}
    with open(path, newline="") as fh:
        for raw in csv.reader(fh):
            if not raw:
                continue
            head = raw[0].strip()
            if head.startswith("#"):
                text = ",".join(raw).lstrip("#").strip()
                if text.lower().startswith("window"):
                    parts = text.split(":", 1)[1].replace(",", " ").split()
                    window = (int(parts[0]), int(parts[1]))
                continue
            try:
                n = int(head)
            except ValueError:
                continue
            rows[n] = np.array([float(x) for x in raw[1:]])
    if window is None:
        raise ValueError(f"{path}: missing '# window: lo hi' header line")
    if not rows:
        raise ValueError(f"{path}: no coefficient rows")
    sizes = {len(v) for v in rows.values()}
    if len(sizes) != 1:
        raise ValueError(f"{path}: rows have inconsistent lengths {sorted(sizes)}")
    d = int(round(np.sqrt(sizes.pop())))
    lo, hi = window
    missing = [n for n in range(lo, hi) if n not in rows]
    if missing:
        raise ValueError(f"{path}: A({missing[0]}) missing inside window {window}")
    mats = {n: v.reshape(d, d) for n, v in rows.items()}
    inv = all(_sigma_min(normalize(mats[n])[0]) > SIGMA_MIN if np.any(mats[n]) else False
              for n in range(lo, hi))
    diag = all(np.count_nonzero(m - np.diag(np.diag(m))) == 0 for m in mats.values())
    name = label or Path(path).stem
    dom = (lo, hi - 1) if hi > lo else (lo, lo)
    if diag and inv:
        def log_diag(ns):
            out = np.empty((len(ns), d))
            for i, n in enumerate(np.asarray(ns)):
                if int(n) not in mats:
                    raise SystemError_(f"A({int(n)}) requested outside the tabulated range")
                out[i] = np.log(np.abs(np.diag(mats[int(n)])))
            return out

        def sign(ns):
            return np.array([np.sign(np.diag(mats[int(n)])) for n in np.asarray(ns)])

        return LinearSystem(d, log_diag=log_diag, diag_sign=sign, invertible=True, label=name, domain=dom)
    return LinearSystem(d, coeff=lambda n: mats[int(n)], invertible=inv, label=name, domain=dom)
