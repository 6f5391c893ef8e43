import numpy as np
import pytest

from dichospec.corpus import get_example, list_examples
from dichospec.dichotomy_fit import fit_stable
from dichospec.growth import make_rate
from dichospec.system import (EvolutionOperator, LinearSystem, NoBackwardExtension,
                              ProjectorError, ProjectorFamily, SingularCoefficientError,
                              SystemError_, WeightedSystem, coordinate_projector,
                              identity_projector, pair_log_norms, projector_residuals,
                              solution_log_norms, system_from_csv, transition,
                              validate_projector, weighted, zero_projector)

from conftest import scalar


def _corpus():
    return [get_example(name) for name, _, _ in list_examples()]


def _rotating_system(seed=3):
    """A coupled 2-d invertible system (no diagonal fast path)."""
    mats = {}

    def coeff(n):
        if n not in mats:
            r = np.random.default_rng(seed * 100003 + n)
            t = r.uniform(0, 2 * np.pi)
            R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
            mats[n] = R @ np.diag(np.exp(r.normal(0, 1, 2)))
        return mats[n]
    return LinearSystem(2, coeff=coeff, label="rotating")


def _cocycle_error(op, k, m, n):
    Mk, sk = op.transition(k, m)
    Mm, sm = op.transition(m, n)
    Mt, st = op.transition(k, n)
    lhs = Mk @ Mm * np.exp(sk + sm - st)
    return np.linalg.norm(lhs - Mt, 2) / np.linalg.norm(Mt, 2)


@pytest.mark.parametrize("entry", _corpus(), ids=lambda e: e.name)
def test_cocycle_random_triples(entry, rng):
    op = EvolutionOperator(entry.system)
    worst = 0.0
    for _ in range(200):
        n, m, k = sorted(rng.integers(-200, 201, size=3))
        worst = max(worst, _cocycle_error(op, int(k), int(m), int(n)))
    assert worst <= 1e-10


def test_cocycle_coupled_system(rng):
    op = EvolutionOperator(_rotating_system())
    worst = 0.0
    for _ in range(200):
        n, m, k = sorted(int(x) for x in rng.integers(-60, 61, size=3))
        worst = max(worst, _cocycle_error(op, k, m, n))
    assert worst <= 1e-10


def test_cocycle_coupled_mixed_directions(rng):
    # unordered triples mix inverses; kept short so Phi(m, n) stays well conditioned
    op = EvolutionOperator(_rotating_system())
    worst = 0.0
    for _ in range(200):
        k, m, n = (int(x) for x in rng.integers(-6, 7, size=3))
        worst = max(worst, _cocycle_error(op, k, m, n))
    assert worst <= 1e-10


def test_transition_examples(ex707, ex718):
    M, s = transition(EvolutionOperator(ex707.system), 2, 0)
    assert scalar(M, 0.0) == pytest.approx(1.0) and s == pytest.approx(-4.0)
    M, s = transition(EvolutionOperator(ex718.system), -3, -5)
    assert abs(M[0, 0]) == pytest.approx(1.0) and s == pytest.approx(2.0)
    M, s = transition(EvolutionOperator(ex707.system), 5, 5)
    assert np.array_equal(M, np.eye(1)) and s == 0.0


def test_no_backward_extension():
    sys = LinearSystem(2, coeff=lambda n: np.diag([2.0, 0.0]), invertible=False)
    op = EvolutionOperator(sys)
    op.transition(3, 0)
    with pytest.raises(NoBackwardExtension, match="no backward extension"):
        op.transition(0, 3)


def test_backward_through_kernel_restriction():
    # A kills the second coordinate; the projector onto it makes backward steps well defined
    sys = LinearSystem(2, coeff=lambda n: np.diag([2.0, 0.0]), invertible=False)
    P = coordinate_projector(2, [2])
    op = EvolutionOperator(sys, P)
    M, s = op.transition(-3, 2)
    got = M * np.exp(s)
    assert np.allclose(got, np.diag([2.0 ** -5, 0.0]), atol=1e-14)


def test_singular_coefficient_reported_with_index():
    sys = LinearSystem(1, coeff=lambda n: np.array([[0.0 if n == 4 else 1.0]]))
    with pytest.raises(SingularCoefficientError) as exc:
        EvolutionOperator(sys).transition(6, 0)
    assert exc.value.index == 4


def test_weighted_identity_log_form(ex731, ex707):
    for entry, g in ((ex731, 1.0), (ex731, -2.3), (ex707, 0.7)):
        base = EvolutionOperator(entry.system)
        w = EvolutionOperator(weighted(entry.system, entry.rate, g))
        for k, n in ((10, 0), (0, 10), (-30, 25), (40, -40), (7, 7)):
            _, s0 = base.transition(k, n)
            _, s1 = w.transition(k, n)
            expect = s0 - g * entry.rate.log_ratio(k, n)
            assert s1 == pytest.approx(expect, rel=1e-12, abs=1e-9)


def test_weighted_examples(ex707, ex731):
    w0 = EvolutionOperator(weighted(ex707.system, ex707.rate, 0.0))
    M, s = w0.transition(2, 0)
    assert M[0, 0] == pytest.approx(1.0) and s == -4.0
    M, s = EvolutionOperator(weighted(ex707.system, ex707.rate, -1.0)).transition(2, 0)
    assert s == pytest.approx(0.0, abs=1e-12)
    _, s = EvolutionOperator(weighted(ex731.system, ex731.rate, 1.0)).transition(10, 0)
    assert s == pytest.approx(ex731.log_phi(10, 0) - 10.0, abs=1e-9)


def test_weighted_zero_is_bit_identical(ex731):
    a = EvolutionOperator(ex731.system)
    b = EvolutionOperator(WeightedSystem(ex731.system, ex731.rate, 0.0))
    for k, n in ((17, -4), (-9, 30), (3, 2)):
        Ma, sa = a.transition(k, n)
        Mb, sb = b.transition(k, n)
        assert np.array_equal(Ma, Mb) and sa == sb
    for side in ("stable", "unstable", "full"):
        pa = pair_log_norms(ex731.system, (-20, 20), side)
        pb = pair_log_norms(WeightedSystem(ex731.system, ex731.rate, 0.0), (-20, 20), side)
        for x, y in zip(pa, pb):
            assert np.array_equal(x, y)


def test_coordinate_projectors():
    P = coordinate_projector(1, [1])
    assert P.is_identity and P.label == "Id" and np.array_equal(P(0), np.eye(1))
    P = coordinate_projector(1, [])
    assert P.is_zero and P.label == "0"
    P = coordinate_projector(2, {1})
    assert P.rank == 1 and np.array_equal(P(5), np.diag([1.0, 0.0])) and P.label == "P{1}"
    with pytest.raises(ProjectorError):
        coordinate_projector(2, [3])


def _conjugated_system():
    T = np.array([[1.0, 1.0], [0.0, 1.0]])
    Ti = np.linalg.inv(T)
    sys = LinearSystem(2, coeff=lambda n: T @ np.diag([0.5, 3.0 + np.sin(n)]) @ Ti)
    P = ProjectorFamily(lambda n: T @ np.diag([1.0, 0.0]) @ Ti, 1, 2, "TPT^-1")
    return sys, P


def test_projector_invariants_and_commutation():
    sys, P = _conjugated_system()
    res = validate_projector(sys, P, (-10, 10))
    assert res["ranks"] == [1]
    op = EvolutionOperator(sys)
    for k, n in ((5, -3), (-4, 6), (8, 8)):
        M, s = op.transition(k, n)
        assert np.allclose(P(k) @ M, M @ P(n), atol=1e-8)


def test_projector_validation_failures():
    sys, _ = _conjugated_system()
    bad = ProjectorFamily(lambda n: np.diag([1.0, 0.0]), 1, 2, "wrong")
    with pytest.raises(ProjectorError, match="invariance"):
        validate_projector(sys, bad, (-3, 3))
    notidem = ProjectorFamily(lambda n: np.diag([2.0, 0.0]), 1, 2, "x2")
    with pytest.raises(ProjectorError, match="idempotent"):
        validate_projector(sys, notidem, (-3, 3))
    assert projector_residuals(sys, bad, (0, 2))["invariance"] > 1e-3


def test_solution_log_norms(ex707, ex718):
    vals = solution_log_norms(EvolutionOperator(ex707.system), 0, [1.0], (0, 5))
    assert [v for _, v in vals] == pytest.approx([-k * k for k in range(6)], abs=1e-12)
    # Ex718 as printed (coefficient switch at n = -1): -k forward, k + 2 backward
    vals = dict(solution_log_norms(EvolutionOperator(ex718.system), 0, [1.0], (-5, 5)))
    assert all(vals[k] == pytest.approx(-k, abs=1e-12) for k in range(0, 6))
    assert all(vals[k] == pytest.approx(k + 2, abs=1e-12) for k in range(-5, 0))
    vals = dict(solution_log_norms(EvolutionOperator(ex707.system), 3, [2.0], (3, 3)))
    assert vals[3] == pytest.approx(np.log(2.0))
    with pytest.raises(ValueError):
        solution_log_norms(EvolutionOperator(ex707.system), 0, [0.0], (0, 1))


@pytest.mark.parametrize("side", ["stable", "unstable", "full"])
def test_pair_norms_fast_path_matches_products(ex731, side):
    slow = LinearSystem(1, step=ex731.system.step, label="no fast path")
    k1, n1, y1 = pair_log_norms(ex731.system, (-25, 25), side, identity_projector(1)
                                if side == "stable" else zero_projector(1))
    k2, n2, y2 = pair_log_norms(slow, (-25, 25), side, identity_projector(1)
                                if side == "stable" else zero_projector(1))
    o1, o2 = np.lexsort((n1, k1)), np.lexsort((n2, k2))
    assert np.array_equal(k1[o1], k2[o2]) and np.array_equal(n1[o1], n2[o2])
    assert np.allclose(y1[o1], y2[o2], rtol=1e-11, atol=1e-9)


def test_pair_norms_coupled_against_operator():
    sys, P = _conjugated_system()
    k, n, y = pair_log_norms(sys, (-6, 6), "stable", P)
    op = EvolutionOperator(sys)
    for kk, nn, yy in zip(k, n, y):
        M, s = op.transition(int(kk), int(nn))
        assert yy == pytest.approx(s + np.log(np.linalg.norm(M @ P(int(nn)), 2)), abs=1e-9)


def test_fitted_projector_bounds_forward_solutions(ex731):
    # image of the fitted projector stays below K mu(n)^theta along forward orbits
    w = weighted(ex731.system, ex731.rate, 2.0)
    rep = fit_stable(w, ex731.rate, identity_projector(1), (-100, 100))
    assert rep.feasible
    op = EvolutionOperator(w)
    for n0 in (-60, -5, 0, 12, 70):
        bound = rep.params.logK + rep.params.theta * ex731.rate.weight(n0)
        vals = solution_log_norms(op, n0, [1.0], (n0, 100))
        assert max(v for _, v in vals) <= bound + 1e-9


def test_system_from_csv(tmp_path):
    p = tmp_path / "sys.csv"
    rows = "".join(f"{n},{np.exp(-0.5):.17g},0,0,{np.exp(1.0):.17g}\n" for n in range(-3, 3))
    p.write_text("# window: -3 3\nn,a11,a12,a21,a22\n" + rows)
    sys = system_from_csv(p)
    assert sys.dim == 2 and sys.is_diagonal
    M, s = EvolutionOperator(sys).transition(3, -3)
    assert s == pytest.approx(6.0)
    with pytest.raises(SystemError_):
        sys.step(3)


def test_system_from_csv_errors(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0,1\n1,1\n")
    with pytest.raises(ValueError, match="window"):
        system_from_csv(p)
    p.write_text("# window: 0 3\n0,1\n2,1\n")
    with pytest.raises(ValueError, match="missing"):
        system_from_csv(p)


def test_rate_enters_weighting_only_through_log_differences():
    sys = get_example("autonomous", {"c": 0.5}).system
    q = make_rate("quadratic")
    _, s = EvolutionOperator(weighted(sys, q, 1.0)).transition(3, -2)
    assert s == pytest.approx(0.5 * 5 - (9 - (-4)))
