"""Gluing hyperedge problems over a hypergraph.

An instance is a hypergraph whose hyperedges each carry a hyperedge problem
with a feasible witness family. When internal net-flows cancel and
potentials agree on shared vertices, the direct sum of the witnesses solves
the problem induced on the boundary vertices and the witness sizes add.

Most instances are built from "switch" hyperedges: per input, a hyperedge
either carries flow between two of its vertices or carries none. Such an
instance is embedded by choosing, per input, a flow through the open
switches and a potential on the vertices; each hyperedge is then rescaled
(flow by ``a``, potential by ``c`` plus a constant) to match.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    InvalidInstance,
    NotConnected,
    NotCut,
    OutputMismatch,
    UnsupportedShape,
)
from .markov import WeightedGraph, resistance
from .numerics import min_norm_solve
from .reflection import (
    BlockOracle,
    FeasibilityReport,
    HyperedgeProblem,
    SpanProgram,
    WitnessFamily,
    check_feasibility,
    direct_sum_oracles,
    direct_sum_witnesses,
    rescale_hyperedge,
    span_to_hyperedge,
)

TOL = 1e-9


@dataclass(eq=False)
class Hyperedge:
    """One hyperedge: its problem, a feasible witness family and a weight."""

    problem: HyperedgeProblem
    witnesses: WitnessFamily
    weight: float = 1.0
    label: str | None = None

    def __post_init__(self):
        if not self.weight > 0:
            raise InvalidInstance(f"hyperedge weight must be positive, got {self.weight}")

    @property
    def vertices(self) -> tuple:
        return self.problem.vertices


@dataclass(eq=False)
class HypergraphInstance:
    vertices: tuple
    boundary: tuple
    edges: tuple

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        self.boundary = tuple(self.boundary)
        self.edges = tuple(self.edges)
        index = self.index
        if len(index) != len(self.vertices):
            raise InvalidInstance("duplicate vertex labels")
        for b in self.boundary:
            if b not in index:
                raise InvalidInstance(f"boundary vertex {b!r} is not a vertex")
        domains = {e.problem.domain for e in self.edges}
        if len(domains) > 1:
            raise InvalidInstance("hyperedges are defined over different domains")
        for e in self.edges:
            for v in e.vertices:
                if v not in index:
                    raise InvalidInstance(f"hyperedge {e.label!r} uses unknown vertex {v!r}")

    @property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @property
    def domain(self) -> tuple:
        return self.edges[0].problem.domain if self.edges else ()

    @property
    def m(self) -> int:
        return len(self.domain)

    def lift(self, e: Hyperedge, arr: np.ndarray) -> np.ndarray:
        """Embed per-edge vertex arrays ``(m, |N(e)|)`` into ``(m, |V|)``."""
        index = self.index
        out = np.zeros((arr.shape[0], len(self.vertices)))
        cols = [index[v] for v in e.vertices]
        np.add.at(out, (slice(None), cols), arr)
        return out


@dataclass
class InstanceReport:
    flow_residual: np.ndarray = field(repr=False)
    potential_spread: np.ndarray = field(repr=False)
    tol: float = TOL

    @property
    def max_flow_residual(self) -> float:
        return float(self.flow_residual.max(initial=0.0))

    @property
    def max_potential_spread(self) -> float:
        return float(self.potential_spread.max(initial=0.0))

    @property
    def ok(self) -> bool:
        return self.max_flow_residual <= self.tol and self.max_potential_spread <= self.tol


def validate_instance(inst: HypergraphInstance, tol: float = TOL) -> InstanceReport:
    """Flow conservation at internal vertices and potential agreement everywhere.

    ``flow_residual[x, v]`` is ``|sum_e delta^e_x(v)|`` for internal ``v`` (0 on
    the boundary); ``potential_spread[x, v]`` is the spread of ``U^e_x(v)`` over
    the hyperedges containing ``v``.
    """
    n = len(inst.vertices)
    m = inst.m
    total = np.zeros((m, n))
    lo = np.full((m, n), np.inf)
    hi = np.full((m, n), -np.inf)
    index = inst.index
    for e in inst.edges:
        total += inst.lift(e, e.problem.delta)
        cols = [index[v] for v in e.vertices]
        U = e.problem.potential
        lo[:, cols] = np.minimum(lo[:, cols], U)
        hi[:, cols] = np.maximum(hi[:, cols], U)
    internal = np.array([v not in set(inst.boundary) for v in inst.vertices])
    flow_res = np.abs(total) * internal[None, :]
    spread = np.where(np.isfinite(lo), hi - lo, 0.0)
    return InstanceReport(flow_res, spread, tol)


@dataclass(eq=False)
class ComposedResult:
    problem: HyperedgeProblem
    witnesses: WitnessFamily
    feasibility: FeasibilityReport | None
    instance: HypergraphInstance | None = None
    details: dict = field(default_factory=dict)

    @property
    def sizes_plus(self) -> np.ndarray:
        return self.witnesses.sizes_plus

    @property
    def sizes_minus(self) -> np.ndarray:
        return self.witnesses.sizes_minus


def compose(inst: HypergraphInstance, tol: float = TOL, check: bool = True) -> ComposedResult:
    """Direct-sum composition of a valid instance.

    Each hyperedge's witnesses are scaled by ``sqrt(w_e)`` (positive) and
    ``1/sqrt(w_e)`` (negative), which is the rescaling with ``D = w_e^{-1/2} I``
    and leaves its states unchanged. Sizes are
    ``sum_e w_e^{+-1} R^e_x``.
    """
    rep = validate_instance(inst, tol)
    if not rep.ok:
        raise InvalidInstance(
            f"instance invalid: flow residual {rep.max_flow_residual:.3e}, "
            f"potential spread {rep.max_potential_spread:.3e}"
        )
    m = inst.m
    n = len(inst.vertices)
    index = inst.index
    delta = np.zeros((m, n))
    pot = np.zeros((m, n))
    for e in inst.edges:
        delta += inst.lift(e, e.problem.delta)
        cols = [index[v] for v in e.vertices]
        pot[:, cols] = e.problem.potential
    bcols = [index[b] for b in inst.boundary]
    families = [e.witnesses.scaled(np.sqrt(e.weight), 1 / np.sqrt(e.weight)) for e in inst.edges]
    W = direct_sum_witnesses(families) if families else WitnessFamily(np.zeros((m, 0)), np.zeros((m, 0)))
    oracle = direct_sum_oracles([e.problem.oracle for e in inst.edges])
    if oracle.dim == 0:
        oracle = BlockOracle.empty(m)
    H = HyperedgeProblem(inst.boundary, inst.domain, delta[:, bcols], pot[:, bcols], oracle)
    feas = check_feasibility(H, W, 1e-8) if check else None
    return ComposedResult(H, W, feas, inst)


def expected_sizes(inst: HypergraphInstance) -> tuple[np.ndarray, np.ndarray]:
    """``sum_e w_e^{+-1} R^e_x`` computed from the edge families alone."""
    m = inst.m
    sp = np.zeros(m)
    sm = np.zeros(m)
    for e in inst.edges:
        sp += e.weight * e.witnesses.sizes_plus
        sm += e.witnesses.sizes_minus / e.weight
    return sp, sm


# ---------------------------------------------------------------------------
# switch embeddings


def _switch_table(e: Hyperedge) -> list:
    """Per input ``(u, v, s)`` with ``delta^e_x = s (1_u - 1_v)``, or ``None`` for no flow."""
    d = e.problem.delta
    nz = np.abs(d) > TOL
    counts = nz.sum(axis=1)
    bad = np.nonzero((counts != 0) & (counts != 2))[0]
    if bad.size:
        i = bad[0]
        raise UnsupportedShape(
            f"hyperedge {e.label!r} has net-flow on {counts[i]} vertices for input {e.problem.domain[i]!r}"
        )
    src = np.argmax(np.where(nz, d, -np.inf), axis=1)
    dst = np.argmin(np.where(nz, d, np.inf), axis=1)
    out = []
    for i in range(d.shape[0]):
        if counts[i]:
            out.append((e.vertices[src[i]], e.vertices[dst[i]], float(d[i, src[i]])))
        else:
            out.append(None)
    return out


def _fit_two_vertex(U: np.ndarray, phi: np.ndarray):
    """Vectorised ``phi = c U + k`` on two-vertex edges; ``None`` where it fails."""
    dU = U[:, 0] - U[:, 1]
    flat = np.abs(dU) <= TOL
    c = np.where(flat, 0.0, (phi[:, 0] - phi[:, 1]) / np.where(flat, 1.0, dU))
    k = np.where(flat, phi.mean(axis=1), phi[:, 0] - c * U[:, 0])
    bad = flat & (np.abs(phi[:, 0] - phi[:, 1]) > 1e-8)
    return c, k, bad


def _fit_potential(e: Hyperedge, i: int, phi: np.ndarray) -> tuple[float, float] | None:
    """Solve ``phi = c U^e_x + k 1`` on the hyperedge, or return ``None``."""
    U = e.problem.potential[i]
    A = np.column_stack([U, np.ones_like(U)])
    if np.ptp(U) <= TOL:
        # constant potential: only constant phi is representable, with c = 0
        if np.ptp(phi) > 1e-8:
            return None
        return 0.0, float(phi.mean())
    c, k = np.real(min_norm_solve(A, phi))
    if np.max(np.abs(A @ np.array([c, k]) - phi)) > 1e-8 * max(1.0, np.abs(phi).max()):
        return None
    return float(c), float(k)


def embed(inst: HypergraphInstance, flow_scale: np.ndarray, potentials: np.ndarray,
          tol: float = TOL, check: bool = True) -> ComposedResult:
    """Rescale every hyperedge per input and compose.

    Parameters
    ----------
    flow_scale : (m, E) array
        Factor applied to ``delta^e_x``.
    potentials : (m, |V|) array
        Target vertex potential; each hyperedge's ``U^e_x`` is mapped onto it
        by ``c U + k``.
    """
    index = inst.index
    scaled = []
    m = inst.m
    for j, e in enumerate(inst.edges):
        cols = [index[v] for v in e.vertices]
        if len(cols) == 2:
            cs, ks, bad = _fit_two_vertex(e.problem.potential, potentials[:, cols])
            failed = np.nonzero(bad)[0]
            if failed.size:
                raise NotCut(
                    f"potential cannot be realised on hyperedge {e.label or j!r} for input {inst.domain[failed[0]]!r}"
                )
        else:
            cs = np.zeros(m)
            ks = np.zeros(m)
            for i in range(m):
                fit = _fit_potential(e, i, potentials[i, cols])
                if fit is None:
                    raise NotCut(
                        f"potential cannot be realised on hyperedge {e.label or j!r} for input {inst.domain[i]!r}"
                    )
                cs[i], ks[i] = fit
        H2, W2 = rescale_hyperedge(e.problem, e.witnesses, flow_scale[:, j], cs, ks)
        scaled.append(Hyperedge(H2, W2, e.weight, e.label))
    inst2 = HypergraphInstance(inst.vertices, inst.boundary, scaled)
    result = compose(inst2, tol, check)
    result.instance = inst
    result.details["scaled_instance"] = inst2
    return result


class _UnionFind:
    def __init__(self, items):
        self.parent = {v: v for v in items}

    def find(self, v):
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return self.parent[v]

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def electrical_flow(vertices: Sequence, pairs: Sequence[tuple], resist: Sequence[float],
                    netflow: Mapping) -> np.ndarray:
    """Minimum-energy flow on ``pairs`` (oriented ``u -> v``) with the given net-flow.

    Zero-resistance edges are contracted first; the contracted flow is then
    routed inside each contracted cluster along a spanning tree, at no cost.
    """
    resist = np.asarray(resist, dtype=float)
    uf = _UnionFind(vertices)
    for (u, v), r in zip(pairs, resist):
        if r <= 0:
            uf.union(u, v)
    clusters = sorted({uf.find(v) for v in vertices}, key=lambda c: list(vertices).index(c))
    cindex = {c: i for i, c in enumerate(clusters)}
    demand = np.zeros(len(clusters))
    for v, val in netflow.items():
        demand[cindex[uf.find(v)]] += val
    pos = [j for j, r in enumerate(resist) if r > 0]
    flows = np.zeros(len(pairs))
    if np.any(np.abs(demand) > TOL):
        G = WeightedGraph(tuple(range(len(clusters))),
                          tuple((cindex[uf.find(pairs[j][0])], cindex[uf.find(pairs[j][1])], resist[j]) for j in pos))
        _, f = resistance(G, demand)
        flows[pos] = f.values
    # route the remaining imbalance inside clusters along zero-resistance trees
    residual = defaultdict(float)
    for v, val in netflow.items():
        residual[v] += val
    for j in pos:
        u, v = pairs[j]
        residual[u] -= flows[j]
        residual[v] += flows[j]
    zero_adj = defaultdict(list)
    for j, r in enumerate(resist):
        if r <= 0:
            u, v = pairs[j]
            zero_adj[u].append((v, j, +1))
            zero_adj[v].append((u, j, -1))
    seen = set()
    for root in vertices:
        if root in seen or not zero_adj[root]:
            continue
        order = []
        parent = {root: None}
        queue = deque([root])
        seen.add(root)
        while queue:
            a = queue.popleft()
            order.append(a)
            for b, j, sgn in zero_adj[a]:
                if b not in seen:
                    seen.add(b)
                    parent[b] = (a, j, sgn)
                    queue.append(b)
        for b in reversed(order[1:]):
            a, j, sgn = parent[b]
            # b must send residual[b] into the tree towards a
            amount = residual[b]
            # sgn = +1 means the pair is (a, b): flow a -> b is positive
            flows[j] += -amount if sgn > 0 else amount
            residual[a] += amount
            residual[b] = 0.0
    return flows


def dirichlet_potential(vertices: Sequence, pairs: Sequence[tuple], conductance: Sequence[float],
                        fixed: Mapping, contract: Sequence[tuple] = ()) -> np.ndarray:
    """Energy-minimising potential with values fixed on some vertices.

    Vertices joined by a pair in ``contract`` share their potential. Free
    clusters that are not conductively linked to a fixed vertex get the
    minimum-norm value (zero).
    """
    uf = _UnionFind(vertices)
    for u, v in contract:
        uf.union(u, v)
    clusters = []
    cindex = {}
    for v in vertices:
        c = uf.find(v)
        if c not in cindex:
            cindex[c] = len(clusters)
            clusters.append(c)
    n = len(clusters)
    L = np.zeros((n, n))
    for (u, v), g in zip(pairs, conductance):
        a, b = cindex[uf.find(u)], cindex[uf.find(v)]
        if a == b or g == 0:
            continue
        L[a, a] += g
        L[b, b] += g
        L[a, b] -= g
        L[b, a] -= g
    val = np.zeros(n)
    is_fixed = np.zeros(n, dtype=bool)
    for v, x in fixed.items():
        c = cindex[uf.find(v)]
        if is_fixed[c] and abs(val[c] - x) > TOL:
            raise NotCut(f"vertex {v!r} is tied to vertices with a different fixed potential")
        val[c] = x
        is_fixed[c] = True
    free = ~is_fixed
    if free.any():
        rhs = -L[np.ix_(free, is_fixed)] @ val[is_fixed]
        val[free] = np.real(min_norm_solve(L[np.ix_(free, free)], rhs))
    return np.array([val[cindex[uf.find(v)]] for v in vertices])


@dataclass
class _InputAnalysis:
    pairs: dict
    component: set
    boundary_hit: list


def _switch_tables(inst: HypergraphInstance) -> list:
    return [_switch_table(e) for e in inst.edges]


def _analyse_input(inst: HypergraphInstance, i: int, source, tables: list) -> _InputAnalysis:
    pairs = {}
    adj = defaultdict(set)
    for j, table in enumerate(tables):
        p = table[i]
        if p is not None:
            pairs[j] = p
            adj[p[0]].add(p[1])
            adj[p[1]].add(p[0])
    comp = {source}
    queue = deque([source])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if b not in comp:
                comp.add(b)
                queue.append(b)
    hit = [b for b in inst.boundary if b in comp]
    return _InputAnalysis(pairs, comp, hit)


def _positive_resistance(e: Hyperedge, i: int, s: float) -> float:
    return e.weight * float(e.witnesses.sizes_plus[i]) / s**2


def resistance_cut(inst: HypergraphInstance, flow="auto", cut="auto", source=None,
                   check: bool = True) -> ComposedResult:
    """Compose switch hyperedges with a flow through the open switches and a 0/1 cut potential.

    Per input, ``G(x)`` joins the two vertices of every hyperedge that carries
    flow. The flow component of ``source`` (default: first boundary vertex)
    must meet at most two boundary vertices; with two, a unit flow is sent
    between them (minimum-energy when ``flow="auto"``). The potential is 1 on
    the vertices reachable from the flow component and 0 elsewhere; the
    hyperedges straddling that set form the cut. When every boundary vertex
    is reached the potential is constant and the cut is empty.

    ``flow`` may also be a per-input sequence of edge flow scales and ``cut``
    a per-input collection of hyperedge indices; a user cut is accepted only
    if removing it separates the flow component from the other boundary
    vertices.

    ``details`` holds the closed-form sizes: the effective resistance of
    ``G(x)`` under ``e -> w_e R^e+`` and the sum of ``R^e-/w_e`` over the cut.
    """
    m = inst.m
    E = len(inst.edges)
    n = len(inst.vertices)
    index = inst.index
    source = inst.boundary[0] if source is None else source
    tables = _switch_tables(inst)
    scales = np.zeros((m, E))
    phi = np.zeros((m, n))
    formula_plus = np.zeros(m)
    formula_minus = np.zeros(m)
    cuts = []
    for i in range(m):
        A = _analyse_input(inst, i, source, tables)
        if len(A.boundary_hit) > 2 and isinstance(flow, str):
            raise UnsupportedShape(
                f"flow component of {source!r} meets {len(A.boundary_hit)} boundary vertices for input "
                f"{inst.domain[i]!r}; give an explicit flow"
            )
        if isinstance(flow, str):
            if len(A.boundary_hit) == 2:
                b0, b1 = A.boundary_hit
                js = sorted(j for j in A.pairs if A.pairs[j][0] in A.component)
                pairs = [(A.pairs[j][0], A.pairs[j][1]) for j in js]
                res = [_positive_resistance(inst.edges[j], i, A.pairs[j][2]) for j in js]
                comp = [v for v in inst.vertices if v in A.component]
                f = electrical_flow(comp, pairs, res, {b0: 1.0, b1: -1.0})
                for j, fj in zip(js, f):
                    scales[i, j] = fj / A.pairs[j][2]
                formula_plus[i] = float(np.sum(f**2 * np.asarray(res)))
        else:
            scales[i] = np.asarray(flow[i], dtype=float)
            for j in range(E):
                if scales[i, j] != 0 and j not in A.pairs:
                    raise InvalidInstance(f"flow uses hyperedge {j} which carries no flow for input {inst.domain[i]!r}")
            formula_plus[i] = float(sum(scales[i, j] ** 2 * inst.edges[j].weight * inst.edges[j].witnesses.sizes_plus[i]
                                        for j in range(E)))
        # reachable set
        if cut == "auto":
            reach = set(A.component)
        else:
            blocked = set(cut[i])
            reach = set(A.component)
            changed = True
            while changed:
                changed = False
                for j, e in enumerate(inst.edges):
                    if j in blocked:
                        continue
                    if any(v in reach for v in e.vertices) and not all(v in reach for v in e.vertices):
                        reach.update(e.vertices)
                        changed = True
            others = [b for b in inst.boundary if b in reach and b not in A.component]
            if others:
                raise NotCut(f"cut for input {inst.domain[i]!r} does not separate boundary vertices {others}")
        if all(b in reach for b in inst.boundary):
            phi[i] = 1.0
            cut_i = []
        else:
            for v in reach:
                phi[i, index[v]] = 1.0
            cut_i = [j for j, e in enumerate(inst.edges)
                     if any(v in reach for v in e.vertices) and not all(v in reach for v in e.vertices)]
            if cut != "auto":
                extra = set(cut_i) - set(cut[i])
                if extra:
                    raise NotCut(f"hyperedges {sorted(extra)} cross the cut for input {inst.domain[i]!r}")
        cuts.append(cut_i)
        formula_minus[i] = float(sum(inst.edges[j].witnesses.sizes_minus[i] / inst.edges[j].weight for j in cut_i))
    result = embed(inst, scales, phi, check=check)
    result.details.update(formula_plus=formula_plus, formula_minus=formula_minus, cuts=cuts, flow_scale=scales,
                          potential=phi)
    return result


def electrical_embed(inst: HypergraphInstance, source=None, check: bool = True) -> ComposedResult:
    """Embedding with a minimum-energy flow and an energy-minimising potential.

    Every hyperedge must live on two vertices. Positive side: unit flow
    between the (at most two) boundary vertices met by the flow component of
    ``source``, with resistances ``w_e R^e+``. Negative side: potential 1 on
    boundary vertices in that component and 0 on the other boundary vertices,
    on the graph where open hyperedges are contracted and blocked ones have
    conductance ``R^e- / (w_e dU^2)``.
    """
    m = inst.m
    E = len(inst.edges)
    n = len(inst.vertices)
    for e in inst.edges:
        if len(e.vertices) != 2:
            raise UnsupportedShape("electrical embedding needs two-vertex hyperedges")
    source = inst.boundary[0] if source is None else source
    tables = _switch_tables(inst)
    scales = np.zeros((m, E))
    phi = np.zeros((m, n))
    fp = np.zeros(m)
    fm = np.zeros(m)
    for i in range(m):
        A = _analyse_input(inst, i, source, tables)
        if len(A.boundary_hit) > 2:
            raise UnsupportedShape(f"flow component meets more than two boundary vertices for input {inst.domain[i]!r}")
        if len(A.boundary_hit) == 2:
            b0, b1 = A.boundary_hit
            js = sorted(j for j in A.pairs if A.pairs[j][0] in A.component)
            pairs = [(A.pairs[j][0], A.pairs[j][1]) for j in js]
            res = [_positive_resistance(inst.edges[j], i, A.pairs[j][2]) for j in js]
            comp = [v for v in inst.vertices if v in A.component]
            f = electrical_flow(comp, pairs, res, {b0: 1.0, b1: -1.0})
            for j, fj in zip(js, f):
                scales[i, j] = fj / A.pairs[j][2]
            fp[i] = float(np.sum(f**2 * np.asarray(res)))
        fixed = {b: (1.0 if b in A.component else 0.0) for b in inst.boundary}
        contract = [(p[0], p[1]) for p in A.pairs.values()]
        bpairs, cond = [], []
        for j, e in enumerate(inst.edges):
            if j in A.pairs:
                continue
            U = e.problem.potential[i]
            dU = abs(U[0] - U[1])
            if dU <= TOL:
                contract.append(tuple(e.vertices))
                continue
            bpairs.append(tuple(e.vertices))
            cond.append(e.witnesses.sizes_minus[i] / (e.weight * dU**2))
        phi[i] = dirichlet_potential(inst.vertices, bpairs, cond, fixed, contract)
        idx = inst.index
        fm[i] = float(sum(g * (phi[i, idx[u]] - phi[i, idx[v]]) ** 2 for (u, v), g in zip(bpairs, cond)))
    result = embed(inst, scales, phi, check=check)
    result.details.update(formula_plus=fp, formula_minus=fm, flow_scale=scales, potential=phi)
    return result


# ---------------------------------------------------------------------------
# classic graph composition and divide-and-conquer


def span_edge(SP: SpanProgram, f, u, v, weight: float = 1.0, label=None, witnesses=None) -> Hyperedge:
    H, W = span_to_hyperedge(SP, f, witnesses, vertices=(u, v))
    return Hyperedge(H, W, weight, label)


def classic_embed(vertices: Sequence, s, t, edges: Sequence[tuple], expected=None,
                  check: bool = True) -> ComposedResult:
    """Graph composition of span programs between ``s`` and ``t``.

    ``edges`` holds ``(u, v, span_program, f_values[, weight])`` tuples. Positive
    inputs (``s`` and ``t`` joined by positive edges) get the minimum-energy
    unit flow; negative ones the unit potential difference on the graph with
    positive edges contracted, whose energy is ``1/R_eff`` of that graph under
    resistances ``1/R^e-``.
    """
    hedges = []
    for k, spec in enumerate(edges):
        u, v, SP, f = spec[:4]
        w = spec[4] if len(spec) > 4 else 1.0
        hedges.append(span_edge(SP, f, u, v, w, label=f"e{k}"))
    inst = HypergraphInstance(vertices, (s, t), hedges)
    result = electrical_embed(inst, source=s, check=check)
    if expected is not None:
        for i, x in enumerate(inst.domain):
            pos = bool(np.abs(result.problem.delta[i]).max() > TOL)
            if pos != bool(expected[i]):
                raise NotConnected(
                    f"input {x!r} is declared {'positive' if expected[i] else 'negative'} but s and t are "
                    f"{'connected' if pos else 'disconnected'}"
                )
    return result


def divide_conquer_instance(aux: Hyperedge, branches: Mapping, blank="⊥", sink="t") -> HypergraphInstance:
    """Auxiliary function evaluation followed by the branch selected by its output.

    ``aux`` lives on ``(blank,) + Lambda``; ``branches[s]`` is a two-vertex
    hyperedge (``(source, sink)`` order) attached between output ``s`` and a
    shared sink.
    """
    if blank not in aux.vertices:
        raise OutputMismatch(f"auxiliary hyperedge has no blank vertex {blank!r}")
    outputs = tuple(v for v in aux.vertices if v != blank)
    if set(outputs) != set(branches):
        raise OutputMismatch(
            f"auxiliary outputs {sorted(map(str, outputs))} differ from branch labels {sorted(map(str, branches))}"
        )
    edges = [aux]
    for s in outputs:
        b = branches[s]
        if len(b.vertices) != 2:
            raise UnsupportedShape("branches must be two-vertex hyperedges")
        H = b.problem
        H2 = HyperedgeProblem((s, sink), H.domain, H.delta, H.potential, H.oracle)
        edges.append(Hyperedge(H2, b.witnesses, b.weight, label=f"branch[{s}]"))
    return HypergraphInstance((blank,) + outputs + (sink,), (blank, sink), edges)


def divide_conquer(aux: Hyperedge, branches: Mapping, blank="⊥", sink="t", check: bool = True) -> ComposedResult:
    """Compose :func:`divide_conquer_instance` with the resistance-cut embedding.

    Positive inputs get ``R+ = aux+ + branch+`` along the single open path;
    negative ones ``R- = aux- + branch-`` from the cut around ``blank`` and
    the selected output.
    """
    return resistance_cut(divide_conquer_instance(aux, branches, blank, sink), check=check)
