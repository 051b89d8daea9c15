import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ggc.errors import CrossComponent, Disconnected, NotIrreducible, NotReversible, OverlappingSupport
from ggc.markov import (
    MarkovChain,
    WeightedGraph,
    chain_laplacian,
    chain_to_graph,
    check_resistance_inequalities,
    graph_to_chain,
    random_connected_graph,
    random_reversible_chain,
    resistance,
    spectral_resistance,
    stationary_and_gap,
)
from ggc.numerics import pseudoinverse


def test_single_edge_chain():
    M, pi = graph_to_chain(WeightedGraph("ab", [("a", "b", 2.0)]))
    assert np.allclose(M.P, [[0, 1], [1, 0]])
    assert np.allclose(pi, [0.5, 0.5])


def test_triangle_chain():
    G = WeightedGraph("abc", [("a", "b", 1), ("b", "c", 1), ("a", "c", 1)])
    M, pi = graph_to_chain(G)
    assert np.allclose(M.P, (np.ones((3, 3)) - np.eye(3)) / 2)
    assert np.allclose(pi, 1 / 3)


def test_path_chain_by_hand():
    G = WeightedGraph("abc", [("a", "b", 1), ("b", "c", 1)])
    M, pi = graph_to_chain(G)
    # b has conductance 2, so each neighbour gets 1/2
    assert np.allclose(M.P[1], [0.5, 0, 0.5])
    assert np.allclose(pi, [0.25, 0.5, 0.25])


def test_disconnected_graph():
    with pytest.raises(Disconnected):
        graph_to_chain(WeightedGraph("abc", [("a", "b", 1)]))


def test_chain_to_graph_flip():
    G = chain_to_graph(MarkovChain("ab", [[0, 1], [1, 0]]))
    assert len(G.edges) == 1
    assert np.isclose(G.edges[0][2], 2.0)


def test_chain_to_graph_identity_not_irreducible():
    with pytest.raises(NotIrreducible):
        chain_to_graph(MarkovChain("ab", np.eye(2)))


def test_non_reversible_chain():
    P = np.array([[0, 0.9, 0.1], [0.1, 0, 0.9], [0.9, 0.1, 0]])
    with pytest.raises(NotReversible):
        chain_to_graph(MarkovChain("abc", P))


@pytest.mark.parametrize("seed", range(4))
def test_round_trip(seed):
    rng = np.random.default_rng(seed)
    M = random_reversible_chain(6, rng, lazy=0.3)
    M2, _ = graph_to_chain(chain_to_graph(M))
    assert np.max(np.abs(M2.P - M.P)) < 1e-10


def test_stationary_doubly_stochastic():
    P = np.array([[0.2, 0.5, 0.3], [0.5, 0.1, 0.4], [0.3, 0.4, 0.3]])
    pi, _ = stationary_and_gap(MarkovChain("abc", P))
    assert np.allclose(pi, 1 / 3)


def test_gap_flip_and_lazy():
    # eigenvalues {1, -1}: the distance from -1 to 1 is taken as the gap
    _, gap = stationary_and_gap(MarkovChain("ab", [[0, 1], [1, 0]]))
    assert np.isclose(gap, 2.0)
    _, lazy_gap = stationary_and_gap(MarkovChain("ab", [[0.5, 0.5], [0.5, 0.5]]))
    assert np.isclose(lazy_gap, 1.0)


def test_one_state_gap():
    _, gap = stationary_and_gap(MarkovChain("a", [[1.0]]))
    assert gap == math.inf


def test_resistance_basic_laws():
    R, f = resistance(WeightedGraph("ab", [("a", "b", 2)]), {"a": 1, "b": -1})
    assert np.isclose(R, 2) and np.allclose(f.values, [1])
    R, _ = resistance(WeightedGraph("sbt", [("s", "b", 1), ("b", "t", 1)]), {"s": 1, "t": -1})
    assert np.isclose(R, 2)
    R, f = resistance(WeightedGraph("st", [("s", "t", 1), ("s", "t", 1)]), {"s": 1, "t": -1})
    assert np.isclose(R, 0.5) and np.allclose(f.values, [0.5, 0.5])


def test_flow_sign_follows_orientation():
    _, f = resistance(WeightedGraph("ab", [("b", "a", 1)]), {"a": 1, "b": -1})
    assert np.allclose(f.values, [-1])


def test_cross_component():
    G = WeightedGraph("abcd", [("a", "b", 1), ("c", "d", 1)])
    with pytest.raises(CrossComponent):
        resistance(G, {"a": 1, "c": -1})
    R, _ = resistance(G, {"a": 1, "b": -1})
    assert np.isclose(R, 1)


def test_t1_equality():
    rng = np.random.default_rng(5)
    M = random_reversible_chain(5, rng)
    xi = np.array([1, -1, 0, 0, 0.0])
    rep = check_resistance_inequalities(M, xi, 1)
    assert np.isclose(rep.r_chain, rep.fast_forward_rhs)


def test_four_cycle():
    labels = "abcd"
    G = WeightedGraph(labels, [(labels[i], labels[(i + 1) % 4], 8.0) for i in range(4)])
    M, _ = graph_to_chain(G)
    xi = np.array([1, 0, -1, 0.0])
    for t in (2, 3, 4):
        rep = check_resistance_inequalities(M, xi, t)
        assert np.isclose(rep.r_chain, 8.0)
        assert rep.fast_forward_rhs >= 8.0 - 1e-9
        assert rep.fast_forward_ok


def test_spectral_matches_pinv_for_t1():
    rng = np.random.default_rng(9)
    M = random_reversible_chain(7, rng)
    pi, _ = stationary_and_gap(M)
    xi = rng.normal(size=7)
    xi -= xi.mean()
    L = chain_laplacian(M, pi)
    assert np.isclose(spectral_resistance(M, pi, xi, 1), (xi @ pseudoinverse(L) @ xi).real)


def test_inequality_fuzz():
    rng = np.random.default_rng(11)
    M = random_reversible_chain(8, rng, density=0.4)
    for _ in range(50):
        t = int(rng.integers(1, 6))
        xi = rng.normal(size=8)
        xi -= xi.mean()
        perm = rng.permutation(8)
        s = np.zeros(8)
        v = np.zeros(8)
        s[perm[:3]] = rng.random(3)
        v[perm[3:6]] = rng.random(3)
        rep = check_resistance_inequalities(M, xi, t, s / s.sum(), v / v.sum())
        assert rep.ok, rep


def test_overlapping_support():
    M = random_reversible_chain(4, np.random.default_rng(0))
    s = np.array([0.5, 0.5, 0, 0])
    v = np.array([0, 0.5, 0.5, 0])
    with pytest.raises(OverlappingSupport):
        check_resistance_inequalities(M, s - v, 1, s, v)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 20))
def test_two_routes_agree(seed, n):
    rng = np.random.default_rng(seed)
    G = random_connected_graph(n, rng)
    d = rng.normal(size=n)
    d -= d.mean()
    R, f = resistance(G, d)
    assert np.isclose(R, f.energy, rtol=1e-8)
    assert np.isclose(np.sum(f.values**2 * G.resistances), R, rtol=1e-8)
    # f_min is a valid flow for d
    idx = G.index
    net = np.zeros(n)
    for (u, v, _), fe in zip(G.edges, f.values):
        net[idx[u]] += fe
        net[idx[v]] -= fe
    assert np.allclose(net, d, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_detailed_balance_and_laplacian(seed):
    rng = np.random.default_rng(seed)
    G = random_connected_graph(7, rng)
    M, pi = graph_to_chain(G)
    flux = pi[:, None] * M.P
    assert np.allclose(flux, flux.T, atol=1e-10)
    L = chain_laplacian(M, pi)
    L_graph = chain_to_graph(M, pi).laplacian()
    # scale: chain_to_graph resistances are 1/(pi P), the original up to a constant
    assert np.allclose(L, L_graph, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.floats(1.01, 10))
def test_rayleigh_monotonicity(seed, factor):
    rng = np.random.default_rng(seed)
    G = random_connected_graph(6, rng)
    d = np.zeros(6)
    d[0], d[-1] = 1, -1
    R, _ = resistance(G, d)
    j = int(rng.integers(len(G.edges)))
    edges = list(G.edges)
    u, v, r = edges[j]
    edges[j] = (u, v, r * factor)
    R2, _ = resistance(WeightedGraph(G.vertices, edges), d)
    assert R2 >= R - 1e-10
