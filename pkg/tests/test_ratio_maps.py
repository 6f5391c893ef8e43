import math

import numpy as np
import pytest

from dichospec.corpus import get_example
from dichospec.dichotomy_fit import DEFAULT_CAPS
from dichospec.ratio_maps import (RATIO_COLUMNS, boundary_locator, divergence_check, ratio_at,
                                  sweep_gap, sweep_ratios)
from dichospec.spectrum import estimate_spectrum
from dichospec.system import identity_projector, weighted, zero_projector

W4 = (-400, 400)
W = (-200, 200)


def test_ex731_closed_forms(ex731):
    right = sweep_ratios(ex731.system, ex731.rate, (1.0, math.inf), window=W4,
                         gammas=[1.5, 2, 3, 5], projector=identity_projector(1))
    for s in right.samples:
        assert s.st == pytest.approx(1.0 - s.gamma, abs=0.1) and s.un is None
    left = sweep_ratios(ex731.system, ex731.rate, (-math.inf, -5.0), window=W4,
                        gammas=[-8, -6], projector=zero_projector(1))
    for s in left.samples:
        assert s.un == pytest.approx(-5.0 - s.gamma, abs=0.1) and s.st is None
    assert right.is_monotone() and left.is_monotone()
    assert not right.flags and not left.flags


def test_autonomous_exact_lines():
    c = 1.0
    e = get_example("autonomous", {"c": c})
    bias = DEFAULT_CAPS.logK_cap / 400
    for g in (1.5, 2.0, 4.0):
        s = ratio_at(e.system, e.rate, g, identity_projector(1), W)
        assert s.st == pytest.approx(c - g - bias, abs=1e-12)
    for g in (-1.0, 0.0, 0.5):
        s = ratio_at(e.system, e.rate, g, zero_projector(1), W)
        assert s.un == pytest.approx(c - g + bias, abs=1e-12)


@pytest.mark.parametrize("name", ["ex731", "ex708", "ex707", "ex735"])
def test_monotone_on_every_gap(name):
    e = get_example(name)
    rng = (-3, 3) if name == "ex707" else (-9, 4)
    est = estimate_spectrum(e.system, e.rate, "nonuniform", rng, 0.1, W)
    assert est.gaps
    for i in range(len(est.gaps)):
        curve = sweep_gap(est, e.system, e.rate, i, n_samples=6, horizon=12.0)
        assert curve.is_monotone(), (name, i)
        for s in curve.samples:
            if s.feasible_st:
                assert s.st < 0
            if s.feasible_un:
                assert s.un > 0


def test_boundary_limits(ex731):
    for d in (0.2, 0.1, 0.05):
        st = ratio_at(ex731.system, ex731.rate, 1.0 + d, identity_projector(1), W4).st
        un = ratio_at(ex731.system, ex731.rate, -5.0 - d, zero_projector(1), W4).un
        # closed forms st = 1 - gamma, un = -5 - gamma give slope 1; allow 1.5
        assert abs(st) <= 1.5 * d and abs(un) <= 1.5 * d


def test_shift_identity(ex731):
    g0 = 0.75
    w = weighted(ex731.system, ex731.rate, g0)
    for g in (1.0, 2.5, 4.0):
        a = ratio_at(w, ex731.rate, g, identity_projector(1), W)
        b = ratio_at(ex731.system, ex731.rate, g + g0, identity_projector(1), W)
        assert a.st == pytest.approx(b.st, abs=1e-12)


def test_divergence(ex731, ex707):
    r = divergence_check(ex731.system, ex731.rate, [2, 5, 10], W4)
    assert r["ok"]
    assert [v for _, v in r["st"]] == pytest.approx([1, 4, 9], abs=0.1)
    e = get_example("autonomous", {"c": 0.0})
    r = divergence_check(e.system, e.rate, [1, 2, 4], W, un_list=[-1, -3])
    assert r["ok"]
    assert [v for _, v in r["st"]] == pytest.approx([1, 2, 4], abs=0.01)
    r = divergence_check(ex707.system, ex707.rate, [2, 4], W)
    assert r["ok"]


def test_divergence_failure_report(ex731):
    r = divergence_check(ex731.system, ex731.rate, [0.0, 2.0], W)
    assert not r["ok"] and r["failures"]


def test_boundary_locator(ex731):
    b = boundary_locator(ex731.system, ex731.rate, "stable", (1, 4), 0.01, W4)
    assert b == pytest.approx(1.0, abs=0.1)
    b = boundary_locator(ex731.system, ex731.rate, "unstable", (-9, -5), 0.01, W4)
    assert b == pytest.approx(-5.0, abs=0.1)
    c = 0.4
    e = get_example("autonomous", {"c": c})
    b = boundary_locator(e.system, e.rate, "stable", (c, c + 2), 0.01, W)
    floor = DEFAULT_CAPS.alpha_min + DEFAULT_CAPS.logK_cap / 400
    assert abs(b - c) <= 0.01 + floor
    with pytest.raises(ValueError, match="no crossing"):
        boundary_locator(ex731.system, ex731.rate, "stable", (2, 4), 0.01, W)
    with pytest.raises(ValueError):
        boundary_locator(ex731.system, ex731.rate, "sideways", (2, 4))


def test_infeasible_samples_flagged(ex731):
    curve = sweep_ratios(ex731.system, ex731.rate, (-2.0, 0.0), n_samples=3, window=W,
                         projector=identity_projector(1))
    assert "infeasible sample inside gap" in curve.flags


def test_curve_serialisation_and_errors(ex731):
    est = estimate_spectrum(ex731.system, ex731.rate, "nonuniform", (-8, 4), 0.1, W)
    curve = sweep_gap(est, ex731.system, ex731.rate, 1, n_samples=4)
    d = curve.to_dict()
    assert d["columns"] == list(RATIO_COLUMNS) == ["gamma", "st", "un", "feasible_st", "feasible_un"]
    assert len(d["samples"]) == 4 and d["projector"] == "Id"
    gs = [s.gamma for s in curve.samples]
    assert gs == sorted(gs) and gs[0] > est.gaps[1][0]
    with pytest.raises(IndexError):
        sweep_gap(est, ex731.system, ex731.rate, 5)
    with pytest.raises(ValueError):
        sweep_ratios(ex731.system, ex731.rate, (1.0, 2.0), n_samples=1,
                     projector=identity_projector(1))


def test_unbounded_gap_sampling_reaches_horizon(ex731):
    curve = sweep_ratios(ex731.system, ex731.rate, (1.0, math.inf), n_samples=5, window=W,
                         horizon=11.0, projector=identity_projector(1))
    gs = np.array([s.gamma for s in curve.samples])
    assert gs.max() == pytest.approx(11.0) and np.all(np.diff(gs) > 0)
