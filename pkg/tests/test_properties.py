"""Randomised properties on scalar tabulated systems."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dichospec.dichotomy_fit import DichotomyParams, fit_stable, fit_unstable, verify
from dichospec.growth import make_rate
from dichospec.system import (EvolutionOperator, LinearSystem, identity_projector, weighted,
                              zero_projector)

LO, HI = -12, 12
RATES = ["exponential", "polynomial", "quadratic"]

coeffs = st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=HI - LO + 1, max_size=HI - LO + 1)


def table(vals):
    vals = np.asarray(vals, dtype=float)

    def log_diag(ns):
        return vals[np.asarray(ns) - LO].reshape(-1, 1)

    return LinearSystem(1, log_diag=log_diag, label="table")


def cumulative(vals):
    F = np.concatenate([[0.0], np.cumsum(vals)])
    return lambda k, n: F[k - LO] - F[n - LO]


@given(coeffs, st.integers(LO, HI), st.integers(LO, HI), st.integers(LO, HI))
def test_cocycle(vals, k, m, n):
    op = EvolutionOperator(table(vals))
    _, a = op.transition(k, m)
    _, b = op.transition(m, n)
    M, c = op.transition(k, n)
    assert a + b == pytest.approx(c, abs=1e-9)
    assert c == pytest.approx(cumulative(vals)(k, n), abs=1e-9)


@given(coeffs, st.floats(-3, 3), st.sampled_from(RATES), st.integers(LO, HI), st.integers(LO, HI))
def test_weighted_identity(vals, g, rate_name, k, n):
    rate = make_rate(rate_name)
    _, s = EvolutionOperator(weighted(table(vals), rate, g)).transition(k, n)
    assert s == pytest.approx(cumulative(vals)(k, n) - g * rate.log_ratio(k, n), abs=1e-8)


@given(coeffs, st.floats(-3, -0.1), st.floats(0, 1), st.floats(0, 2), st.sampled_from(RATES))
def test_verify_matches_direct_slack(vals, alpha, theta, logK, rate_name):
    rate = make_rate(rate_name)
    phi = cumulative(vals)
    expect = -np.inf
    for k in range(LO, HI + 1):
        for n in range(LO, k + 1):
            rhs = logK + alpha * rate.log_ratio(k, n) + theta * rate.weight(n)
            expect = max(expect, phi(k, n) - rhs)
    p = DichotomyParams("nonuniform", alpha=alpha, theta=theta, logK=logK)
    if not alpha + theta < 0:
        return
    rep = verify(table(vals), rate, identity_projector(1), p, (LO, HI))
    assert rep.worst_slack == pytest.approx(expect, abs=1e-8)
    assert rep.feasible == (expect <= 1e-9)


def direct_slack(phi, rate, g, side, rate_coef, weight, logK):
    worst = -np.inf
    for k in range(LO, HI + 1):
        for n in range(LO, HI + 1):
            if (side == "stable") != (k >= n):
                continue
            y = phi(k, n) - g * rate.log_ratio(k, n)
            worst = max(worst, y - logK - rate_coef * rate.log_ratio(k, n) - weight * rate.weight(n))
    return worst


@given(coeffs, st.floats(-4, 4), st.sampled_from(RATES))
def test_fit_certificates(vals, g, rate_name):
    # every solved LP tuple satisfies all window pairs; verify agrees once the class holds
    rate = make_rate(rate_name)
    phi = cumulative(vals)
    sys = weighted(table(vals), rate, g)
    for side, P, fit in (("stable", identity_projector(1), fit_stable),
                         ("unstable", zero_projector(1), fit_unstable)):
        r = fit(sys, rate, P, (LO, HI), None, "nonuniform")
        if not r.feasible:
            continue
        q = r.params
        coef, w = (q.alpha, q.theta) if side == "stable" else (q.beta, q.nu)
        assert direct_slack(phi, rate, g, side, coef, w, q.logK) <= 1e-7
        met = r.objective <= -r.floor if side == "stable" else r.objective >= r.floor
        if met:
            assert verify(sys, rate, P, q, (LO, HI)).worst_slack <= 1e-7
