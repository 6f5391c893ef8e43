import math

import numpy as np
import pytest

from dichospec.corpus import (CLASSES, Interval, diagonal_compose, get_example, list_examples,
                              union_intervals)
from dichospec.system import EvolutionOperator


def test_registry_lists_every_entry():
    names = [n for n, _, _ in list_examples()]
    assert names == ["ex707", "ex718", "ex708", "ex731", "ex735", "autonomous", "identity"]
    for n in names:
        e = get_example(n)
        assert e.name == n and e.system.dim >= 1
        assert set(e.references) <= set(CLASSES)


@pytest.mark.parametrize("name", ["ex707", "ex718", "ex708", "ex731", "ex735", "autonomous"])
def test_closed_form_matches_products(name):
    e = get_example(name)
    op = EvolutionOperator(e.system)
    worst = 0.0
    for n in range(-12, 13, 3):
        for k in range(n, n + 15):
            M, s = op.transition(k, n)
            exact = float(e.log_phi(k, n))
            worst = max(worst, abs(s + math.log(abs(float(M.ravel()[0]))) - exact))
    assert worst <= 1e-9


def test_log_diag_is_fundamental_increment():
    for name in ("ex707", "ex708", "ex731", "ex735", "autonomous"):
        e = get_example(name)
        ns = np.arange(-40, 41)
        F = e.system.fundamental_log(np.arange(-40, 42))[:, 0]
        np.testing.assert_allclose(e.system.log_diag(ns)[:, 0], np.diff(F), atol=1e-9)
        assert e.system.fundamental_log([0])[0, 0] == 0.0


def test_reference_intervals():
    assert get_example("ex707").references["nonuniform"] == [Interval(-1.0, 1.0)]
    assert get_example("ex707").references["upp"] == [Interval(-1.0, 1.0, True, True)]
    assert get_example("ex707").references["slow"] == []
    e = get_example("ex708", {"omega": 2.0, "a": 0.8})
    assert e.references["slow"][0].lo == pytest.approx(-2.8)
    assert e.references["nonuniform"][0].hi == pytest.approx(0.4)
    assert get_example("ex731").references["nonuniform"] == [Interval(-5.0, 1.0)]
    assert get_example("ex735").references["nonuniform"] == [Interval(-4.0, 2.0)]
    assert get_example("autonomous", {"c": 0.3}).references["upp"] == [Interval(0.3, 0.3)]


def test_parameter_validation():
    with pytest.raises(KeyError, match="unknown example"):
        get_example("ex999")
    with pytest.raises(ValueError, match="no parameter"):
        get_example("ex731", {"b": 1})
    with pytest.raises(ValueError, match="3a > omega > a"):
        get_example("ex731", {"omega": 4.0, "a": 1.0})
    with pytest.raises(ValueError, match="3a > omega > 2a"):
        get_example("ex708", {"omega": 2.0, "a": 1.0})
    assert get_example("ex731", {"ω": 2.5}).params["omega"] == 2.5
    with pytest.raises(ValueError):
        get_example("identity", {"d": 0})


def test_union_intervals():
    u = union_intervals([[Interval(0, 1)], [Interval(0.5, 2)], [Interval(3, 4)]])
    assert u == [Interval(0, 2), Interval(3, 4)]
    u = union_intervals([[Interval(0, 1, False, True)], [Interval(1, 1)]])
    assert u == [Interval(0, 1, False, False)]
    assert Interval(0, 1, True, False).contains(1) and not Interval(0, 1, True, False).contains(0)


def test_diagonal_compose():
    a = get_example("autonomous", {"c": -0.9})
    b = get_example("autonomous", {"c": 0.6})
    d = diagonal_compose([a, b])
    assert d.dim == 2 and d.system.is_diagonal
    assert d.references["uniform"] == [Interval(-0.9, -0.9), Interval(0.6, 0.6)]
    assert "nonuniform" not in d.references and "contains" in d.notes["nonuniform"]
    np.testing.assert_allclose(d.system.log_diag([0, 5]), [[-0.9, 0.6], [-0.9, 0.6]])
    with pytest.raises(ValueError, match="different rates"):
        diagonal_compose([a, get_example("ex707")])
    with pytest.raises(ValueError):
        diagonal_compose([])


def test_summary_is_plain_data():
    s = get_example("ex708").summary()
    assert s["name"] == "ex708" and s["rate"] == "exponential"
    assert s["references"]["slow"][0][:2] == pytest.approx([-2.8, -1.2])
