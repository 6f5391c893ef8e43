import math

import numpy as np
import pytest

from dichospec.growth import (BUILTIN_RATES, GrowthRateError, log_ratio, make_rate,
                              nonuniform_weight, rate_from_csv, rate_from_table)


def test_builtin_values():
    assert make_rate("exponential").L(5) == 5.0
    p = make_rate("polynomial")
    assert p.L(-4) == pytest.approx(-math.log(4))
    assert p.mu(-4) == pytest.approx(0.25)
    q = make_rate("quadratic")
    assert q.L(3) == 9.0
    assert q.mu(3) == pytest.approx(math.exp(9))


@pytest.mark.parametrize("kind", BUILTIN_RATES)
def test_builtin_invariants(kind):
    r = make_rate(kind)
    ns = np.arange(-1000, 1001)
    L = r.L(ns)
    assert r.L(0) == 0.0
    assert np.all(np.diff(L) >= 0)
    w = r.weight(ns)
    assert np.all(w >= 0) and r.weight(0) == 0.0


def test_closed_forms():
    ns = np.arange(-50, 51)
    assert np.array_equal(make_rate("exponential").L(ns), ns.astype(float))
    assert np.array_equal(make_rate("quadratic").L(ns), np.sign(ns) * ns * ns.astype(float))
    assert np.array_equal(make_rate("cubic").L(ns), ns.astype(float) ** 3)
    p = make_rate("polynomial").L(ns)
    nz = ns != 0
    assert np.allclose(p[nz], np.sign(ns[nz]) * np.log(np.abs(ns[nz])))
    assert p[ns == 0][0] == 0.0
    # flat on {-1, 0, 1}: non-strict monotonicity
    assert make_rate("polynomial").L(1) == make_rate("polynomial").L(-1) == 0.0


def test_log_ratio_and_weight():
    e, q = make_rate("exponential"), make_rate("quadratic")
    assert log_ratio(e, 5, 2) == 3.0
    assert log_ratio(q, 0, -3) == 9.0
    assert log_ratio(q, 4, 4) == 0.0
    assert log_ratio(q, 2, 7) == -log_ratio(q, 7, 2)
    assert nonuniform_weight(e, -7) == 7.0
    assert nonuniform_weight(q, -3) == 9.0
    assert nonuniform_weight(q, 0) == 0.0


def test_custom_rate_accepted():
    r = make_rate("custom", lambda n: 2.0 * n, window_hint=100, label="twice")
    assert r.L(3) == 6.0 and r.label == "twice"


def test_custom_rate_rejections():
    with pytest.raises(GrowthRateError) as exc:
        make_rate("custom", lambda n: n + 1.0, window_hint=10)
    assert exc.value.index == 0
    with pytest.raises(GrowthRateError) as exc:
        make_rate("custom", lambda n: np.where(np.asarray(n) == 3, -1.0, n), window_hint=10)
    assert exc.value.index == 3
    with pytest.raises(GrowthRateError):
        make_rate("custom")
    with pytest.raises(GrowthRateError):
        make_rate("bogus")


def test_table_rate_exact_lookup(tmp_path):
    p = tmp_path / "rate.csv"
    p.write_text("n,L\n" + "".join(f"{n},{2 * n}\n" for n in range(-5, 6)))
    r = rate_from_csv(p)
    assert r.L(4) == 8.0
    assert np.array_equal(r.L(np.array([-5, 0, 5])), [-10.0, 0.0, 10.0])
    with pytest.raises(GrowthRateError) as exc:
        r.L(6)
    assert exc.value.index == 6


def test_table_rate_holes_rejected():
    with pytest.raises(GrowthRateError):
        rate_from_table({-1: -1.0, 0: 0.0, 2: 2.0})
    with pytest.raises(GrowthRateError):
        rate_from_table({0: 0.0, 1: 1.0})
