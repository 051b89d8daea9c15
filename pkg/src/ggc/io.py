"""JSON encoding for graphs, chains, problems, instances, trees and walk instances.

Every document carries a ``kind`` field. Labels may be nested tuples (lists in
JSON), complex numbers are ``[re, im]`` pairs and non-finite floats are the
strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Any

import numpy as np

from ggc.composition import (
    ComposedResult,
    Hyperedge,
    HypergraphInstance,
    compose,
    electrical_embed,
    resistance_cut,
)
from ggc.dectree import DecisionTree, Node
from ggc.errors import GGCError, SchemaError
from ggc.markov import MarkovChain, WeightedGraph
from ggc.qwalk import QWalkInstance
from ggc.reflection import BlockOracle, HyperedgeProblem, StateReflectionProblem, WitnessFamily

BUILDERS = {"resistance_cut": resistance_cut, "electrical_embed": electrical_embed, "compose": compose}
_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


# ---------------------------------------------------------------------------
# plain values


def _float(x: float):
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def plain(obj: Any) -> Any:
    """Reduce ``obj`` to JSON types (dicts, lists, str, int, float, bool, None)."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, np.bool_):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()] if obj.ndim else plain(obj.item())
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted((plain(v) for v in obj), key=repr)
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return plain(obj.as_dict())
    if dataclasses.is_dataclass(obj):
        return plain({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    return str(obj)


def dumps(obj: Any, indent: int | None = None) -> str:
    """Stable JSON text: sorted keys and shortest round-trip float digits."""
    return json.dumps(plain(obj), sort_keys=True, indent=indent, allow_nan=False,
                      separators=(",", ": ") if indent else (",", ":"), ensure_ascii=False)


def label(x):
    """Turn JSON lists back into (nested) tuples so labels are hashable."""
    if isinstance(x, list):
        return tuple(label(v) for v in x)
    return x


def _number(x, where: str) -> float:
    if isinstance(x, str) and x in _NONFINITE:
        return _NONFINITE[x]
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {x!r}")
    return float(x)


def real_array(x, where: str, ndim: int | None = None) -> np.ndarray:
    try:
        a = np.array(_map_numbers(x, where), dtype=float)
    except ValueError as err:
        raise SchemaError(f"{where}: ragged or malformed array") from err
    if ndim is not None and a.ndim != ndim and a.size:
        raise SchemaError(f"{where}: expected {ndim} dimensions, got {a.ndim}")
    return a


def _map_numbers(x, where):
    if isinstance(x, list):
        return [_map_numbers(v, where) for v in x]
    return _number(x, where)


def _complex_plain(a: np.ndarray):
    a = np.asarray(a, dtype=complex)
    return plain(np.stack([a.real, a.imag], axis=-1))


def _pairs_to_complex(x, where: str, ndim: int) -> np.ndarray:
    # complex arrays are stored with a trailing [re, im] axis; empty ones lose it
    a = real_array(x, where)
    if a.ndim == ndim + 1 and a.shape[-1] == 2:
        out = np.empty(a.shape[:-1], dtype=complex)
        out.real, out.imag = a[..., 0], a[..., 1]
        return out
    if a.size == 0 and a.ndim <= ndim:
        return np.zeros(a.shape, dtype=complex)
    raise SchemaError(f"{where}: expected {ndim}-dimensional array of [re, im] pairs")


def _need(doc: dict, key: str, kind: str):
    if not isinstance(doc, dict):
        raise SchemaError(f"{kind}: expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise SchemaError(f"{kind}: missing field {key!r}")
    return doc[key]


def _expect_kind(doc, kind: str) -> None:
    got = _need(doc, "kind", kind)
    if got != kind:
        raise SchemaError(f"expected kind {kind!r}, got {got!r}")


# ---------------------------------------------------------------------------
# graphs and chains


def graph_to_json(G: WeightedGraph) -> dict:
    return {"kind": "graph", "vertices": plain(G.vertices), "edges": [plain([u, v, r]) for u, v, r in G.edges]}


def graph_from_json(doc: dict) -> WeightedGraph:
    _expect_kind(doc, "graph")
    edges = []
    for e in _need(doc, "edges", "graph"):
        if not isinstance(e, list) or len(e) != 3:
            raise SchemaError(f"graph: edge {e!r} must be [tail, head, resistance]")
        edges.append((label(e[0]), label(e[1]), _number(e[2], "graph edge")))
    try:
        return WeightedGraph(tuple(label(v) for v in _need(doc, "vertices", "graph")), tuple(edges))
    except ValueError as err:
        raise SchemaError(f"graph: {err}") from err


def chain_to_json(M: MarkovChain) -> dict:
    return {"kind": "chain", "states": plain(M.states), "P": plain(M.P)}


def chain_from_json(doc: dict) -> MarkovChain:
    _expect_kind(doc, "chain")
    try:
        return MarkovChain(tuple(label(v) for v in _need(doc, "states", "chain")),
                           real_array(_need(doc, "P", "chain"), "chain P", 2))
    except ValueError as err:
        raise SchemaError(f"chain: {err}") from err


def distribution(doc, labels, where: str = "distribution", tol: float = 1e-9) -> np.ndarray:
    """Label-to-probability map as a vector over ``labels``; must sum to 1."""
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected a label -> probability map")
    keys = {str(plain(v)): i for i, v in enumerate(labels)}
    out = np.zeros(len(labels))
    for k, p in doc.items():
        if k not in keys:
            raise SchemaError(f"{where}: unknown label {k!r}")
        out[keys[k]] = _number(p, where)
    if np.any(out < 0) or abs(out.sum() - 1.0) > tol:
        raise SchemaError(f"{where}: probabilities must be nonnegative and sum to 1")
    return out


# ---------------------------------------------------------------------------
# problems, witnesses, instances


def oracle_to_json(O: BlockOracle) -> dict:
    return {"segments": [{"shape": list(s.shape), "data": _complex_plain(s)} for s in O.segments],
            "perm": None if O.perm is None else plain(O.perm)}


def oracle_from_json(doc: dict) -> BlockOracle:
    segs = []
    for s in _need(doc, "segments", "oracle"):
        shape = tuple(_need(s, "shape", "oracle segment"))
        a = _pairs_to_complex(_need(s, "data", "oracle segment"), "oracle segment", 4)
        if a.size != int(np.prod(shape)):
            raise SchemaError(f"oracle segment: data does not match shape {shape}")
        segs.append(a.reshape(shape))
    perm = doc.get("perm")
    try:
        return BlockOracle(tuple(segs), None if perm is None else np.asarray(perm, dtype=int))
    except GGCError as err:
        raise SchemaError(f"oracle: {err}") from err


def problem_to_json(P: StateReflectionProblem, W: WitnessFamily | None = None) -> dict:
    doc = {"kind": "reflection", "domain": plain(P.domain), "sigma_plus": _complex_plain(P.sigma_plus),
           "sigma_minus": _complex_plain(P.sigma_minus), "oracle": oracle_to_json(P.oracle)}
    if isinstance(P, HyperedgeProblem):
        doc["vertices"] = plain(P.vertices)
    if W is not None:
        doc["witnesses"] = {"plus": _complex_plain(W.plus), "minus": _complex_plain(W.minus)}
    return doc


def problem_from_json(doc: dict) -> tuple[StateReflectionProblem, WitnessFamily | None]:
    _expect_kind(doc, "reflection")
    domain = tuple(label(x) for x in _need(doc, "domain", "reflection"))
    sp = _pairs_to_complex(_need(doc, "sigma_plus", "reflection"), "sigma_plus", 2)
    sm = _pairs_to_complex(_need(doc, "sigma_minus", "reflection"), "sigma_minus", 2)
    O = oracle_from_json(_need(doc, "oracle", "reflection"))
    try:
        if "vertices" in doc:
            P = HyperedgeProblem(tuple(label(v) for v in doc["vertices"]), domain, sp.reshape(len(domain), -1),
                                 sm.reshape(len(domain), -1), O)
        else:
            P = StateReflectionProblem(domain, sp.reshape(len(domain), -1), sm.reshape(len(domain), -1), O)
        W = None
        if doc.get("witnesses") is not None:
            w = doc["witnesses"]
            W = WitnessFamily(_pairs_to_complex(_need(w, "plus", "witnesses"), "witness", 2).reshape(len(domain), -1),
                              _pairs_to_complex(_need(w, "minus", "witnesses"), "witness", 2).reshape(len(domain), -1))
    except GGCError as err:
        raise SchemaError(f"reflection: {err}") from err
    return P, W


def instance_to_json(inst: HypergraphInstance, builder: str = "resistance_cut", expected=None) -> dict:
    if builder not in BUILDERS:
        raise SchemaError(f"unknown builder {builder!r}")
    edges = []
    for e in inst.edges:
        doc = problem_to_json(e.problem, e.witnesses)
        edges.append({"label": e.label, "weight": e.weight, "problem": doc})
    out = {"kind": "instance", "vertices": plain(inst.vertices), "boundary": plain(inst.boundary),
           "hyperedges": edges, "builder": builder}
    if expected is not None:
        out["expected"] = {"plus": plain(expected[0]), "minus": plain(expected[1])}
    return out


def generate_fixture(doc: dict):
    """Catalog fixture named by ``doc["generator"]`` with ``doc["params"]``."""
    from ggc import catalog

    name = _need(doc, "generator", "instance")
    params = doc.get("params", {}) or {}
    makers = {"dense_learning": catalog.dense_learning, "minimum_finding": catalog.minimum_finding,
              "bit_select": catalog.bit_select}
    if name == "first_marked_index":
        n = int(_need(params, "n", "first_marked_index"))
        if "alpha" in params or "beta" in params:
            return catalog.first_marked_index(n, real_array(_need(params, "alpha", name), "alpha", 1),
                                              real_array(_need(params, "beta", name), "beta", 1))
        weights = {"sqrt": catalog.sqrt_weights, "harmonic": catalog.harmonic_weights}
        scheme = params.get("weights", "sqrt")
        if scheme not in weights:
            raise SchemaError(f"first_marked_index: weights must be one of {sorted(weights)}")
        return catalog.first_marked_index(n, *weights[scheme](n))
    if name not in makers:
        raise SchemaError(f"unknown generator {name!r}")
    try:
        return makers[name](**params)
    except TypeError as err:
        raise SchemaError(f"{name}: bad parameters {params!r}") from err


def instance_from_json(doc: dict) -> tuple[HypergraphInstance, str, tuple | None]:
    """Returns ``(instance, builder name, expected sizes or None)``.

    ``{"kind": "instance", "generator": name, "params": {...}}`` names a
    catalog fixture instead of listing hyperedges.
    """
    _expect_kind(doc, "instance")
    if "generator" in doc:
        F = generate_fixture(doc)
        return F.instance, F.builder.__name__, (F.expected_plus, F.expected_minus)
    builder = doc.get("builder", "resistance_cut")
    if builder not in BUILDERS:
        raise SchemaError(f"unknown builder {builder!r}")
    edges = []
    for h in _need(doc, "hyperedges", "instance"):
        P, W = problem_from_json(_need(h, "problem", "hyperedge"))
        if not isinstance(P, HyperedgeProblem) or W is None:
            raise SchemaError("hyperedge: problem needs vertices and witnesses")
        try:
            edges.append(Hyperedge(P, W, _number(h.get("weight", 1.0), "weight"), h.get("label")))
        except GGCError as err:
            raise SchemaError(f"hyperedge: {err}") from err
    try:
        inst = HypergraphInstance(tuple(label(v) for v in _need(doc, "vertices", "instance")),
                                  tuple(label(v) for v in _need(doc, "boundary", "instance")), tuple(edges))
    except GGCError as err:
        raise SchemaError(f"instance: {err}") from err
    expected = None
    if doc.get("expected") is not None:
        ex = doc["expected"]
        expected = (real_array(_need(ex, "plus", "expected"), "expected"),
                    real_array(_need(ex, "minus", "expected"), "expected"))
    return inst, builder, expected


def fixture_to_json(F) -> dict:
    return instance_to_json(F.instance, F.builder.__name__, (F.expected_plus, F.expected_minus)) | {
        "name": F.name, "description": F.description, "params": plain(F.params)}


def build(inst: HypergraphInstance, builder: str, check: bool = True) -> ComposedResult:
    return BUILDERS[builder](inst, check=check)


# ---------------------------------------------------------------------------
# trees


def tree_to_json(T: DecisionTree) -> dict:
    nodes = []
    for v, node in T.nodes.items():
        nodes.append({"id": plain(v), "position": node.position, "output": plain(node.output),
                      "children": [[plain(s), plain(c)] for s, c in node.children.items()]})
    out = {"kind": "tree", "root": plain(T.root), "alphabet": plain(T.alphabet), "n": T.n, "nodes": nodes}
    if T.black is not None:
        out["black"] = [[plain(v), plain(s)] for v, s in T.black.items()]
    return out


def tree_from_json(doc: dict) -> DecisionTree:
    _expect_kind(doc, "tree")
    nodes = {}
    for d in _need(doc, "nodes", "tree"):
        vid = label(_need(d, "id", "tree node"))
        if vid in nodes:
            raise SchemaError(f"tree: duplicate node id {vid!r}")
        pos = d.get("position")
        if pos is not None and (isinstance(pos, bool) or not isinstance(pos, int)):
            raise SchemaError(f"tree: node {vid!r} has a non-integer position")
        children = {label(s): label(c) for s, c in d.get("children", [])}
        nodes[vid] = Node(position=pos, output=label(d.get("output")), children=children)
    black = doc.get("black")
    n = _need(doc, "n", "tree")
    if isinstance(n, bool) or not isinstance(n, int):
        raise SchemaError("tree: n must be an integer")
    try:
        return DecisionTree(nodes, label(_need(doc, "root", "tree")),
                            tuple(label(s) for s in _need(doc, "alphabet", "tree")), n,
                            None if black is None else {label(v): label(s) for v, s in black})
    except GGCError as err:
        raise SchemaError(f"tree: {err}") from err


# ---------------------------------------------------------------------------
# walk instances (size tables only)


def qwalk_to_json(Q: QWalkInstance) -> dict:
    return {
        "kind": "qwalk",
        "graph": graph_to_json(Q.graph),
        "domain": plain(Q.domain),
        "marked": [plain(M) for M in Q.marked],
        "states": plain(Q.states),
        "database": [[plain(v), plain(Q.database[v])] for v in Q.vertices],
        "setup_sizes": plain(Q.setup_sizes),
        "update_sizes": plain(Q.update_sizes),
        "check_sizes": plain(Q.check_sizes),
        "setup_scale": plain(Q.setup_scale),
        "update_scale": plain(Q.update_scale),
        "check_scale": plain(Q.check_scale),
    }


def qwalk_from_json(doc: dict, normalize: bool = True) -> QWalkInstance:
    """Size-only walk instance. Scalars in the size fields broadcast."""
    _expect_kind(doc, "qwalk")
    G = graph_from_json(_need(doc, "graph", "qwalk"))
    domain = tuple(label(x) for x in _need(doc, "domain", "qwalk"))
    states = tuple(label(s) for s in doc.get("states", [0]))
    m, n, E = len(domain), G.n, len(G.edges)
    database = doc.get("database")
    if database is None:
        database = {v: (states[0],) * m for v in G.vertices}
    else:
        database = {label(v): tuple(label(D) for D in row) for v, row in database}
        if set(database) != set(G.vertices):
            raise SchemaError("qwalk: database must list every walk vertex")

    def sizes(key, shape):
        a = real_array(doc.get(key, 1.0), key)
        try:
            return np.broadcast_to(a, shape).copy()
        except ValueError as err:
            raise SchemaError(f"qwalk: {key} does not broadcast to {shape}") from err

    scales = {}
    for key, shape in (("setup_scale", (n,)), ("update_scale", (E,)), ("check_scale", (n, len(states)))):
        if doc.get(key) is not None:
            scales[key] = sizes(key, shape)
    try:
        return QWalkInstance(G, domain, [{label(v) for v in M} for M in _need(doc, "marked", "qwalk")], states,
                             database, sizes("setup_sizes", (2, n, m)), sizes("update_sizes", (2, E, m)),
                             sizes("check_sizes", (2, n, m)), normalize=normalize, **scales)
    except (GGCError, KeyError) as err:
        raise SchemaError(f"qwalk: {err}") from err


# ---------------------------------------------------------------------------
# dispatch


LOADERS = {"graph": graph_from_json, "chain": chain_from_json, "reflection": problem_from_json,
           "instance": instance_from_json, "tree": tree_from_json, "qwalk": qwalk_from_json}


def parse(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"invalid JSON: {err}") from err
    if not isinstance(doc, dict) or doc.get("kind") not in LOADERS:
        kinds = ", ".join(sorted(LOADERS))
        raise SchemaError(f"document must be an object whose kind is one of: {kinds}")
    return doc


def load(text: str):
    doc = parse(text)
    return LOADERS[doc["kind"]](doc)
