import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ggc.errors import FractionMismatch, NotNormalized, NotUnique, SupportViolation
from ggc.markov import WeightedGraph, graph_to_chain, random_reversible_chain, stationary_and_gap
from ggc.qwalk import (
    QWalkInstance,
    build_detection,
    build_finding,
    mnrs_bounds,
    mnrs_inequality,
    random_instance,
    unified_bound,
    unified_check,
    unit_rescaled,
    variable_query_bounds,
)


def edge_instance(marked=({"b"}, set())):
    G = WeightedGraph(("a", "b"), (("a", "b", 2.0),))
    return QWalkInstance.symbolic(G, [f"x{i}" for i in range(len(marked))], marked)


def test_single_edge_detection():
    Q = edge_instance()
    _, rep = build_detection(Q, {"a": 1.0}, {"b": 1.0})
    # 1 (setup) + 2 (walk resistance) + 1 (check)
    assert rep.plus[0] == pytest.approx(4.0)
    # 1 (setup) + 1/2 (sum of U-/r) + 1 (check)
    assert rep.minus[1] == pytest.approx(2.5)
    assert rep.objective == pytest.approx(math.sqrt(10.0))
    assert rep.consistency() <= 1e-12


def test_zero_resistance_degenerate():
    Q = edge_instance()
    _, rep = build_detection(Q, {"b": 1.0}, {"b": 1.0})
    assert rep.breakdown["update"][0][0] == 0.0
    assert rep.plus[0] == pytest.approx(2.0)


def test_unique_finding_on_single_edge():
    Q = edge_instance(({"b"}, {"a"}))
    tau = {"a": 0.25, "b": 0.75}
    _, rep = build_finding(Q, {"a": 1.0}, tau, "unique")
    assert rep.plus[0] == pytest.approx(1 + 2 + 1 / 0.75)
    # the marked vertex's check leaves the cut
    assert rep.minus[0] == pytest.approx(1 + 0.5 + 0.25)
    assert rep.minus[1] == pytest.approx(1 + 0.5 + 0.75)


def test_fraction_finding_all_marked():
    G = WeightedGraph(("a", "b", "c"), (("a", "b", 6.0), ("b", "c", 6.0), ("a", "c", 6.0)))
    Q = QWalkInstance.symbolic(G, ["x"], [{"a", "b", "c"}], check=2.0)
    tau = np.array([0.2, 0.3, 0.5])
    _, rep = build_finding(Q, tau, tau, "fraction", eps=1.0)
    assert rep.breakdown["check"][0][0] == pytest.approx(float(np.sum(tau * 2.0)))
    assert rep.breakdown["update"][0][0] == pytest.approx(0.0)
    assert rep.breakdown["check"][1][0] == 0.0


def test_finding_guards():
    Q = edge_instance(({"a", "b"}, {"a"}))
    with pytest.raises(NotUnique):
        build_finding(Q, {"a": 1.0}, {"b": 1.0}, "unique")
    Q = edge_instance(({"b"}, {"a"}))
    with pytest.raises(FractionMismatch):
        build_finding(Q, {"a": 1.0}, {"a": 0.4, "b": 0.6}, "fraction", eps=0.6)


def test_support_and_normalisation_errors():
    Q = edge_instance()
    with pytest.raises(SupportViolation):
        build_detection(Q, {"a": 1.0}, {"b": 1.0}, mu=np.array([0.5, 0.5]))
    with pytest.raises(SupportViolation):
        build_detection(Q, {"a": 1.0}, {"a": 1.0})
    with pytest.raises(SupportViolation):
        variable_query_bounds(Q, {"a": 1.0}, {"a": 0.5, "b": 0.5})
    G = WeightedGraph(("a", "b"), (("a", "b", 1.0),))
    with pytest.raises(NotNormalized):
        QWalkInstance.symbolic(G, ["x"], [set()], normalize=False)
    with pytest.warns(UserWarning):
        Q = QWalkInstance.symbolic(G, ["x"], [set()])
    assert Q.resistances[0] == pytest.approx(2.0)


@pytest.mark.parametrize("seed", range(8))
def test_detection_formula_matches_composition(seed):
    rng = np.random.default_rng(100 + seed)
    Q = random_instance(rng)
    sigma = rng.dirichlet(np.ones(Q.n))
    tau = rng.dirichlet(np.ones(Q.n))
    res, rep = build_detection(Q, sigma, tau)
    assert rep.extra["formula_gap"] <= 1e-8
    assert res.feasibility.max_violation <= 1e-8
    assert rep.consistency() <= 1e-10
    # negative inputs carry no flow, positive ones no cut
    np.testing.assert_allclose(res.sizes_plus[~Q.positive], 0, atol=1e-20)
    np.testing.assert_allclose(res.sizes_minus[Q.positive], 0, atol=1e-20)


@pytest.mark.parametrize("seed", range(4))
def test_finding_formula_and_unit_states(seed):
    rng = np.random.default_rng(200 + seed)
    n = int(rng.integers(3, 8))
    m = int(rng.integers(2, 6))
    sig = rng.dirichlet(np.ones(n))
    Q = random_instance(rng, n=n, marked=[[int(rng.integers(n))] for _ in range(m)])
    res, rep = build_finding(Q, sig, np.ones(n) / n, "unique")
    assert rep.extra["formula_gap"] <= 1e-8
    assert res.details["unit"]["feasibility"].max_violation <= 1e-8
    assert res.details["unit"]["state_norm_defect"] <= 1e-12
    Q = random_instance(rng, n=n, marked=[rng.choice(n, 2, replace=False).tolist() for _ in range(m)])
    res, rep = build_finding(Q, sig, np.ones(n) / n, "fraction", eps=2 / n)
    assert rep.extra["formula_gap"] <= 1e-8
    assert res.details["unit"]["feasibility"].max_violation <= 1e-8
    assert res.details["unit"]["state_norm_defect"] <= 1e-12


def test_fraction_equals_detection_plus_check_inflation():
    rng = np.random.default_rng(7)
    Q = random_instance(rng, n=6, marked=[[0, 3], [1, 2], [4, 5]], concrete=False)
    tau = np.ones(6) / 6
    sig = rng.dirichlet(np.ones(6))
    _, det = build_detection(Q, sig, tau, nu="tau")
    _, fin = build_finding(Q, sig, tau, "fraction", eps=1 / 3)
    for k in ("setup", "update"):
        np.testing.assert_allclose(fin.breakdown[k][0], det.breakdown[k][0], rtol=1e-12)
    Cp = Q.C[0]
    mask = Q.marked_mask()
    expected = 9 * np.sum(np.where(mask, tau * Cp.T, 0), axis=1)
    np.testing.assert_allclose(fin.breakdown["check"][0], expected, rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unit_cost_negative_at_most_three(seed):
    rng = np.random.default_rng(seed)
    Q = unit_rescaled(random_instance(rng, concrete=False))
    sigma = rng.dirichlet(np.ones(Q.n))
    tau = rng.dirichlet(np.ones(Q.n))
    _, rep = build_detection(Q, sigma, tau)
    assert rep.max_minus <= 3 + 1e-9
    assert rep.consistency() <= 1e-10


def test_unified_bound_values():
    b = unified_bound(1.0, 1.0, 1.0, 1, 1.0)
    assert b.value == pytest.approx(2 + math.sqrt(2))
    assert b.plus_bound == pytest.approx(1 + 1 + 4)
    assert b.objective_bound <= math.sqrt(6) * b.value
    b = unified_bound((4.0, 1.0), (2.0, 2.0), (1.0, 9.0), 3, 0.0)
    assert b.value == pytest.approx(2.0 + 3.0)


@pytest.mark.parametrize("seed", range(5))
def test_unified_t_sweep(seed):
    rng = np.random.default_rng(300 + seed)
    Q = random_instance(rng)
    rep = unified_check(Q, rng.dirichlet(np.ones(Q.n)))
    assert rep.ok, rep.violations()
    assert rep.detection.extra["formula_gap"] <= 1e-8
    assert rep.result.feasibility.max_violation <= 1e-8
    assert [b.t for b in rep.bounds] == [1, 2, 3, 4, 5]


@pytest.mark.parametrize("variant", [1, 2])
def test_variable_query_terms_bounded(variant):
    rng = np.random.default_rng(40 + variant)
    for _ in range(4):
        Q = random_instance(rng)
        sigma = rng.dirichlet(np.ones(Q.n))
        tau = rng.dirichlet(np.ones(Q.n))
        rep = variable_query_bounds(Q, sigma, tau, variant)
        for k, v in rep.extra["term_max"].items():
            assert v <= 1 + 1e-9, k
        assert rep.max_plus <= 3 + 1e-9
        neg = ~Q.positive
        assert np.all(rep.minus[neg] <= rep.extra["negative_expression"][neg] + 1e-12)
        assert rep.extra["formula_gap"] <= 1e-8


def test_variable_query_unit_costs_variant_two():
    G = WeightedGraph(("a", "b", "c"), (("a", "b", 6.0), ("b", "c", 6.0), ("c", "a", 6.0)))
    Q = QWalkInstance.symbolic(G, ["x0", "x1"], [{"c"}, set()])
    tau = np.array([0.5, 0.3, 0.2])
    rep = variable_query_bounds(Q, np.ones(3) / 3, tau, 2)
    R, eps = rep.extra["R"], rep.extra["eps"]
    assert eps == pytest.approx(0.2)
    # E[S-] + R E_{pi,P}[U-] + E_tau[C-]/eps with all sizes 1
    assert rep.extra["negative_expression"][1] == pytest.approx(1 + R + 1 / eps)


def test_variable_query_point_mass_eps():
    Q = edge_instance()
    tau = {"a": 0.4, "b": 0.6}
    rep = variable_query_bounds(Q, tau, tau, 1)
    assert rep.extra["eps_x"][0] == pytest.approx(0.6)


def test_mnrs_complete_graph():
    V = tuple("abcd")
    G = WeightedGraph(V, tuple((u, v, 12.0) for i, u in enumerate(V) for v in V[i + 1:]))
    M, _ = graph_to_chain(G)
    lhs, mid, rhs = mnrs_inequality(M, {"a"})
    assert lhs <= mid <= rhs
    assert mid - lhs > 0
    lhs, mid, rhs = mnrs_inequality(M, set(V))
    assert lhs == pytest.approx(0, abs=1e-12) and mid == pytest.approx(0, abs=1e-12)
    Q = QWalkInstance.symbolic(G, ["x0", "x1"], [{"a"}, set()])
    rep = mnrs_bounds(Q)
    assert rep.extra["inequality_slack"] > 0
    assert rep.extra["negative_expression"][1] <= rep.extra["mnrs_expression"][1] + 1e-12


def test_mnrs_fuzz():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = int(rng.integers(2, 10))
        M = random_reversible_chain(n, rng)
        k = int(rng.integers(1, n + 1))
        marked = set(rng.choice(M.states, size=k, replace=False).tolist())
        lhs, mid, rhs = mnrs_inequality(M, marked)
        assert lhs <= mid + 1e-9
        assert mid <= rhs + 1e-12
        _, gap = stationary_and_gap(M)
        assert gap > 0
