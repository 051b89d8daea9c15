import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ggc import catalog, io
from ggc.dectree import complete_tree, path_tree, random_tree
from ggc.errors import SchemaError
from ggc.markov import random_connected_graph, random_reversible_chain
from ggc.qwalk import random_instance
from ggc.reflection import random_conversion_problem, to_reflection


def test_dumps_is_sorted_and_lossless():
    x = 0.1 + 0.2
    text = io.dumps({"b": x, "a": [1, 2.5]})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text)["b"] == x
    assert float(f"{x:.17g}") == json.loads(text)["b"]


def test_plain_special_values():
    assert io.plain(complex(1, -2)) == [1.0, -2.0]
    assert io.plain([math.inf, -math.inf, math.nan]) == ["inf", "-inf", "nan"]
    assert io.plain(np.array([[1, 2]], dtype=np.int64)) == [[1, 2]]
    assert io.plain({(0, 1): np.bool_(True)}) == {"(0, 1)": True}
    assert io.real_array(["inf", 1], "x")[0] == math.inf


@pytest.mark.parametrize("F", catalog.standard_fixtures(), ids=lambda F: f"{F.name}{F.params.get('n', '')}")
def test_fixture_round_trip(F):
    doc = io.fixture_to_json(F)
    text = io.dumps(doc)
    inst, builder, expected = io.instance_from_json(io.parse(text))
    again = io.instance_to_json(inst, builder, expected) | {k: doc[k] for k in ("name", "description", "params")}
    assert io.dumps(again) == text
    res = io.build(inst, builder)
    np.testing.assert_allclose(res.sizes_plus, F.expected_plus, atol=1e-9)
    np.testing.assert_allclose(res.sizes_minus, F.expected_minus, atol=1e-9)


def test_generator_documents():
    inst, builder, expected = io.instance_from_json({"kind": "instance", "generator": "dense_learning",
                                                     "params": {"n": 2}})
    assert builder == "resistance_cut" and inst.m == 4
    np.testing.assert_allclose(expected[0], 2.0)
    F = catalog.first_marked_index(4, *catalog.sqrt_weights(4))
    inst, _, expected = io.instance_from_json({"kind": "instance", "generator": "first_marked_index",
                                               "params": io.plain(F.params)})
    np.testing.assert_allclose(expected[0], F.expected_plus)
    with pytest.raises(SchemaError):
        io.instance_from_json({"kind": "instance", "generator": "nope"})


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_graph_and_chain_round_trip(seed):
    rng = np.random.default_rng(seed)
    G = random_connected_graph(int(rng.integers(1, 9)), rng)
    assert io.graph_from_json(json.loads(io.dumps(io.graph_to_json(G)))) == G
    M = random_reversible_chain(int(rng.integers(2, 7)), rng)
    M2 = io.chain_from_json(json.loads(io.dumps(io.chain_to_json(M))))
    assert M2.states == M.states and np.array_equal(M2.P, M.P)


def test_problem_round_trip_exact():
    rng = np.random.default_rng(4)
    P, w = random_conversion_problem(3, 2, 2, rng)
    R, W = to_reflection(P, w)
    R2, W2 = io.problem_from_json(json.loads(io.dumps(io.problem_to_json(R, W))))
    assert np.array_equal(R2.sigma_plus, R.sigma_plus) and np.array_equal(W2.minus, W.minus)
    assert np.array_equal(R2.oracle.dense_all(), R.oracle.dense_all())


@pytest.mark.parametrize("T", [complete_tree(2), path_tree(3), random_tree(np.random.default_rng(2), 4)])
def test_tree_round_trip(T):
    text = io.dumps(io.tree_to_json(T))
    T2 = io.tree_from_json(json.loads(text))
    assert io.dumps(io.tree_to_json(T2)) == text
    assert T2.root == T.root and T2.black == T.black


def test_qwalk_round_trip():
    Q = random_instance(np.random.default_rng(3), concrete=False)
    text = io.dumps(io.qwalk_to_json(Q))
    Q2 = io.qwalk_from_json(json.loads(text), normalize=False)
    assert io.dumps(io.qwalk_to_json(Q2)) == text
    assert Q2.marked == Q.marked and Q2.database == Q.database


def test_distribution_validation():
    assert io.distribution({"a": 0.25, "b": 0.75}, ("a", "b")).tolist() == [0.25, 0.75]
    with pytest.raises(SchemaError):
        io.distribution({"a": 0.5}, ("a", "b"))
    with pytest.raises(SchemaError):
        io.distribution({"z": 1.0}, ("a", "b"))


@pytest.mark.parametrize("text", [
    "{", "[]", '{"kind": "graph"}', '{"kind": "graph", "vertices": ["a"], "edges": [["a", "b", 1]]}',
    '{"kind": "graph", "vertices": ["a", "b"], "edges": [["a", "b", "x"]]}',
    '{"kind": "chain", "states": [0, 1], "P": [[1, 0]]}',
    '{"kind": "tree", "root": "r", "alphabet": [0], "n": 1, "nodes": [{"id": "r", "position": 0, "children": [[0, "q"]]}]}',
])
def test_schema_errors(text):
    with pytest.raises(SchemaError):
        io.load(text)
