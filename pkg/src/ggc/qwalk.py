"""Quantum walk search built by composing setup, update and checking routines.

Every vertex ``v`` of the walk graph carries a database entry ``D_{v,x}``.
The composed hypergraph has a source ``s``, a sink ``t`` and one vertex
``(v, D)`` per vertex and entry. Setup routines join ``s`` to the cells of
``v``, update routines join the cells of the two ends of a walk edge and
checking span programs join ``(v, D)`` to ``t``. A positive input routes a
flow ``mu`` out of ``s``, along the walk and into ``t`` through marked
vertices with weights ``nu``; a negative input gets potential 1 on
everything reachable from ``s``.

Two tiers are supported. A symbolic instance only has per-input size tables
and is evaluated with the closed-form sizes; a concrete instance also holds
feasible witness families, which are composed and checked.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .composition import (
    ComposedResult,
    Hyperedge,
    HypergraphInstance,
    _switch_table,
    electrical_flow,
    resistance_cut,
)
from .errors import (
    FractionMismatch,
    InputError,
    InvalidInstance,
    NotNormalized,
    NotUnique,
    SupportViolation,
)
from .markov import (
    MarkovChain,
    WeightedGraph,
    chain_laplacian,
    distribution_vector,
    graph_to_chain,
    random_connected_graph,
    resistance,
    resistance_to_set,
    stationary_and_gap,
)
from .numerics import pseudoinverse
from .reflection import (
    BlockOracle,
    HyperedgeProblem,
    SpanProgram,
    WitnessFamily,
    check_feasibility,
    function_evaluation,
    database_hyperedge,
    known_fraction_inverse,
    learning_solution,
    rescale,
    span_to_hyperedge,
)

SOURCE = "s"
SINK = "t"
NORM_TOL = 1e-9


def cell(v, D) -> tuple:
    """Vertex label of database entry ``D`` at walk vertex ``v``."""
    return (v, D)


def sink_of(v, D) -> tuple:
    """Sink of the check on cell ``(v, D)`` in the finding constructions."""
    return (SINK, v, D)


# ---------------------------------------------------------------------------
# instances


@dataclass(eq=False)
class QWalkInstance:
    """Walk graph, marked sets, database and routine witness sizes.

    Size tables are raw sizes; ``*_scale`` arrays hold rescaling factors
    ``k`` that multiply positive sizes and divide negative ones (applied as
    edge weights in the concrete tier). ``check_sizes`` refers to the
    program ``C_{v, D_{v,x}}`` at input ``x``.

    Parameters
    ----------
    graph : WeightedGraph
        Rescaled to ``sum 1/r_e = 1/2`` with a warning unless ``normalize`` is
        false, in which case an unnormalised graph raises ``NotNormalized``.
    marked : sequence of sets
        ``M_x`` per input.
    database : mapping
        ``database[v][i]`` is ``D_{v,x_i}``.
    setup_sizes, update_sizes, check_sizes : arrays of shape (2, n, m), (2, |E|, m), (2, n, m)
    """

    graph: WeightedGraph
    domain: tuple
    marked: tuple
    states: tuple
    database: dict
    setup_sizes: np.ndarray
    update_sizes: np.ndarray
    check_sizes: np.ndarray
    setups: dict | None = field(default=None, repr=False)
    updates: list | None = field(default=None, repr=False)
    checks: dict | None = field(default=None, repr=False)
    setup_scale: np.ndarray | None = None
    update_scale: np.ndarray | None = None
    check_scale: np.ndarray | None = None
    normalize: bool = True

    def __post_init__(self):
        G = self.graph
        total = float(sum(1.0 / r for _, _, r in G.edges))
        if abs(total - 0.5) > NORM_TOL:
            if not self.normalize:
                raise NotNormalized(f"sum of inverse resistances is {total!r}, expected 1/2")
            warnings.warn(f"rescaling resistances by {2 * total:.6g} so that their inverses sum to 1/2",
                          stacklevel=2)
            self.graph = G = WeightedGraph(G.vertices, tuple((u, v, r * 2 * total) for u, v, r in G.edges))
        if not G.is_connected():
            raise InvalidInstance("walk graph is not connected")
        self.domain = tuple(self.domain)
        self.states = tuple(self.states)
        m, n, E = len(self.domain), G.n, len(G.edges)
        self.marked = tuple(frozenset(M) for M in self.marked)
        if len(self.marked) != m:
            raise InvalidInstance("one marked set per input is required")
        for M in self.marked:
            if not M <= set(G.vertices):
                raise InvalidInstance(f"marked set {sorted(map(str, M))} has unknown vertices")
        self.database = {v: tuple(self.database[v]) for v in G.vertices}
        for v, row in self.database.items():
            if len(row) != m or any(D not in self.states for D in row):
                raise InvalidInstance(f"database row of vertex {v!r} is malformed")
        self.setup_sizes = np.asarray(self.setup_sizes, dtype=float).reshape(2, n, m)
        self.update_sizes = np.asarray(self.update_sizes, dtype=float).reshape(2, E, m)
        self.check_sizes = np.asarray(self.check_sizes, dtype=float).reshape(2, n, m)
        for name in ("setup_sizes", "update_sizes", "check_sizes"):
            if np.any(getattr(self, name) < 0):
                raise InvalidInstance(f"{name} must be nonnegative")
        self.setup_scale = np.ones(n) if self.setup_scale is None else np.asarray(self.setup_scale, dtype=float)
        self.update_scale = np.ones(E) if self.update_scale is None else np.asarray(self.update_scale, dtype=float)
        if self.check_scale is None:
            self.check_scale = np.ones((n, len(self.states)))
        self.check_scale = np.asarray(self.check_scale, dtype=float).reshape(n, len(self.states))
        for k in (self.setup_scale, self.update_scale, self.check_scale):
            if np.any(~(k > 0)):
                raise InvalidInstance("rescaling factors must be positive")

    # -- shape helpers

    @property
    def m(self) -> int:
        return len(self.domain)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def vertices(self) -> tuple:
        return self.graph.vertices

    @property
    def resistances(self) -> np.ndarray:
        return self.graph.resistances

    @property
    def positive(self) -> np.ndarray:
        return np.array([bool(M) for M in self.marked])

    @property
    def concrete(self) -> bool:
        return self.setups is not None and self.updates is not None and self.checks is not None

    def marked_mask(self) -> np.ndarray:
        index = self.graph.index
        out = np.zeros((self.m, self.n), dtype=bool)
        for i, M in enumerate(self.marked):
            for v in M:
                out[i, index[v]] = True
        return out

    def entry_index(self) -> np.ndarray:
        """``(n, m)`` array of ``states.index(D_{v,x})``."""
        pos = {D: j for j, D in enumerate(self.states)}
        return np.array([[pos[D] for D in self.database[v]] for v in self.vertices], dtype=int)

    # -- effective (rescaled) sizes

    def _check_factor(self) -> np.ndarray:
        return np.take_along_axis(self.check_scale, self.entry_index(), axis=1)

    @property
    def S(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.setup_scale[:, None]
        return self.setup_sizes[0] * k, self.setup_sizes[1] / k

    @property
    def U(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.update_scale[:, None]
        return self.update_sizes[0] * k, self.update_sizes[1] / k

    @property
    def C(self) -> tuple[np.ndarray, np.ndarray]:
        k = self._check_factor()
        return self.check_sizes[0] * k, self.check_sizes[1] / k

    def rescaled(self, setup=1.0, update=1.0, check=1.0) -> "QWalkInstance":
        """Multiply the routine rescaling factors (positive sizes times ``k``, negative over ``k``)."""
        n, E, k = self.n, len(self.graph.edges), len(self.states)
        return replace(
            self,
            setup_scale=self.setup_scale * np.broadcast_to(np.asarray(setup, dtype=float), (n,)),
            update_scale=self.update_scale * np.broadcast_to(np.asarray(update, dtype=float), (E,)),
            check_scale=self.check_scale * np.broadcast_to(np.asarray(check, dtype=float), (n, k)),
            normalize=False,
        )

    def chain(self) -> tuple[MarkovChain, np.ndarray]:
        return graph_to_chain(self.graph)

    # -- constructors

    @classmethod
    def from_payloads(cls, graph: WeightedGraph, domain, marked, states, database, setups: Mapping,
                      updates: Sequence, checks: Mapping, normalize: bool = True) -> "QWalkInstance":
        """Concrete instance; size tables are read off the witness families.

        ``setups[v]`` is a ``(HyperedgeProblem, WitnessFamily)`` pair on
        ``(s,) + V_v``, ``updates[e]`` one on ``V_a + V_b`` for edge ``(a, b)``
        and ``checks[(v, D)]`` a two-vertex pair on ``((v, D), t)`` built from
        a span program.
        """
        domain = tuple(domain)
        m = len(domain)
        V = graph.vertices
        dbase = {v: tuple(database[v]) for v in V}
        marked = tuple(frozenset(M) for M in marked)
        S = np.zeros((2, len(V), m))
        U = np.zeros((2, len(graph.edges), m))
        C = np.zeros((2, len(V), m))
        for a, v in enumerate(V):
            H, W = setups[v]
            _expect_switch(H, [(SOURCE, cell(v, dbase[v][i])) for i in range(m)], f"setup of {v!r}")
            S[0, a], S[1, a] = W.sizes_plus, W.sizes_minus
        for j, (a, b, _) in enumerate(graph.edges):
            H, W = updates[j]
            _expect_switch(H, [(cell(a, dbase[a][i]), cell(b, dbase[b][i])) for i in range(m)],
                           f"update of edge {j}")
            U[0, j], U[1, j] = W.sizes_plus, W.sizes_minus
        for a, v in enumerate(V):
            for i in range(m):
                H, W = checks[(v, dbase[v][i])]
                opened = bool(np.abs(H.delta[i]).max() > 1e-12)
                if opened != (v in marked[i]):
                    raise InvalidInstance(
                        f"check ({v!r}, {dbase[v][i]!r}) answers {int(opened)} on input {domain[i]!r}"
                    )
                C[0, a, i], C[1, a, i] = W.sizes_plus[i], W.sizes_minus[i]
        return cls(graph, domain, marked, tuple(states), dbase, S, U, C, dict(setups), list(updates), dict(checks),
                   normalize=normalize)

    @classmethod
    def symbolic(cls, graph: WeightedGraph, domain, marked, states=(0,), database=None, setup=1.0, update=1.0,
                 check=1.0, normalize: bool = True) -> "QWalkInstance":
        """Size-only instance; scalars broadcast to every routine and input."""
        domain = tuple(domain)
        m, n, E = len(domain), graph.n, len(graph.edges)
        if database is None:
            database = {v: (states[0],) * m for v in graph.vertices}
        S = np.broadcast_to(np.asarray(setup, dtype=float), (2, n, m)).copy()
        U = np.broadcast_to(np.asarray(update, dtype=float), (2, E, m)).copy()
        C = np.broadcast_to(np.asarray(check, dtype=float), (2, n, m)).copy()
        return cls(graph, domain, marked, tuple(states), database, S, U, C, normalize=normalize)


def _expect_switch(H: HyperedgeProblem, pairs, what: str) -> None:
    table = _switch_table(Hyperedge(H, WitnessFamily(np.zeros((H.m, 0)), np.zeros((H.m, 0)))))
    for i, ((u, v), got) in enumerate(zip(pairs, table)):
        if got is None or {got[0], got[1]} != {u, v}:
            raise InvalidInstance(f"{what} does not move flow between {u!r} and {v!r} on input {i}")


def normalized_graph(G: WeightedGraph) -> WeightedGraph:
    """Rescale all resistances so that their inverses sum to 1/2."""
    total = float(sum(1.0 / r for _, _, r in G.edges))
    return WeightedGraph(G.vertices, tuple((u, v, r * 2 * total) for u, v, r in G.edges))


# ---------------------------------------------------------------------------
# reports


@dataclass
class BoundReport:
    """Per-input composed sizes split into setup, update and check terms.

    ``plus`` is defined on inputs flagged in ``plus_inputs`` and ``minus`` on
    those in ``minus_inputs``; other entries are zero.
    """

    domain: tuple
    plus: np.ndarray
    minus: np.ndarray
    plus_inputs: np.ndarray
    minus_inputs: np.ndarray
    breakdown: dict
    extra: dict = field(default_factory=dict)

    @property
    def max_plus(self) -> float:
        return float(np.max(self.plus[self.plus_inputs], initial=0.0))

    @property
    def max_minus(self) -> float:
        return float(np.max(self.minus[self.minus_inputs], initial=0.0))

    @property
    def objective(self) -> float:
        return math.sqrt(self.max_plus * self.max_minus)

    def consistency(self) -> float:
        """Largest gap between the totals and the sum of their parts."""
        sp = sum(p for p, _ in self.breakdown.values())
        sm = sum(q for _, q in self.breakdown.values())
        return float(max(np.max(np.abs(sp - self.plus), initial=0.0), np.max(np.abs(sm - self.minus), initial=0.0)))

    def as_dict(self) -> dict:
        out = {
            "inputs": [str(x) for x in self.domain],
            "plus": self.plus.tolist(),
            "minus": self.minus.tolist(),
            "plus_inputs": self.plus_inputs.tolist(),
            "minus_inputs": self.minus_inputs.tolist(),
            "objective": self.objective,
            "breakdown": {k: {"plus": p.tolist(), "minus": q.tolist()} for k, (p, q) in self.breakdown.items()},
        }
        out.update({k: _plain(v) for k, v in self.extra.items()})
        return out


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _plain(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(w) for w in v]
    return v


# ---------------------------------------------------------------------------
# flows and closed forms


def _per_input(Q: QWalkInstance, arg, name: str) -> np.ndarray:
    """``(m, n)`` array from one distribution (mapping or vector) or a per-input sequence.

    Entries of a per-input sequence may be ``None`` for inputs where the
    distribution is unused.
    """
    V = Q.vertices
    if isinstance(arg, Mapping) or (isinstance(arg, np.ndarray) and arg.ndim == 1):
        return np.tile(distribution_vector(V, arg), (Q.m, 1))
    if len(arg) != Q.m:
        raise InputError(f"{name} needs one entry per input")
    out = np.zeros((Q.m, Q.n))
    for i, a in enumerate(arg):
        if a is None:
            continue
        try:
            out[i] = distribution_vector(V, a)
        except ValueError as err:
            raise InputError(f"{name} for input {Q.domain[i]!r}: {err}") from None
    return out


def update_resistance(Q: QWalkInstance, i: int, xi: np.ndarray) -> float:
    """``R_eff(G, r o U+_x; xi)``; zero-cost updates are contracted."""
    res = Q.resistances * Q.U[0][:, i]
    if not np.any(np.abs(xi) > 1e-15):
        return 0.0
    if np.all(res > 0):
        G = WeightedGraph(Q.vertices, tuple((a, b, r) for (a, b, _), r in zip(Q.graph.edges, res)))
        return resistance(G, xi)[0]
    pairs = [(a, b) for a, b, _ in Q.graph.edges]
    f = electrical_flow(Q.vertices, pairs, res, dict(zip(Q.vertices, xi)))
    return float(np.sum(f**2 * res))


def _update_flow(Q: QWalkInstance, i: int, xi: np.ndarray) -> np.ndarray:
    res = Q.resistances * Q.U[0][:, i]
    pairs = [(a, b) for a, b, _ in Q.graph.edges]
    return electrical_flow(Q.vertices, pairs, res, dict(zip(Q.vertices, xi)))


def _update_laplacian(Q: QWalkInstance, i: int) -> np.ndarray:
    res = np.maximum(Q.resistances * Q.U[0][:, i], 1e-12)
    index = Q.graph.index
    L = np.zeros((Q.n, Q.n))
    for (a, b, _), r in zip(Q.graph.edges, res):
        p, q = index[a], index[b]
        L[p, p] += 1 / r
        L[q, q] += 1 / r
        L[p, q] -= 1 / r
        L[q, p] -= 1 / r
    return L


def auto_nu(Q: QWalkInstance, mu: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Per positive input, the distribution on ``M_x`` within ``supp(tau)`` closest to ``mu`` in update resistance."""
    mask = Q.marked_mask() & (tau > 0)[None, :]
    nu = np.zeros((Q.m, Q.n))
    for i in np.nonzero(Q.positive)[0]:
        targets = np.nonzero(mask[i])[0]
        if not targets.size:
            raise SupportViolation(f"input {Q.domain[i]!r} has no marked vertex in the support of tau")
        _, w = resistance_to_set(_update_laplacian(Q, i), mu[i], targets)
        nu[i, targets] = w
    return nu


def _check_supports(Q: QWalkInstance, sigma, tau, mu, nu, rows) -> None:
    mask = Q.marked_mask()
    for i in rows:
        if np.any((mu[i] > 1e-15) & (sigma <= 0)):
            raise SupportViolation(f"mu for input {Q.domain[i]!r} leaves the support of sigma")
        if np.any((nu[i] > 1e-15) & ~(mask[i] & (tau > 0))):
            raise SupportViolation(f"nu for input {Q.domain[i]!r} leaves M_x within the support of tau")


def _resolve(Q: QWalkInstance, sigma, tau, mu, nu, rows):
    sig = distribution_vector(Q.vertices, sigma)
    ta = distribution_vector(Q.vertices, tau)
    mu_arr = np.tile(sig, (Q.m, 1)) if mu is None else _per_input(Q, mu, "mu")
    if isinstance(nu, str):
        if nu == "auto":
            nu_arr = auto_nu(Q, mu_arr, ta)
        elif nu == "tau":
            mask = Q.marked_mask() & (ta > 0)[None, :]
            nu_arr = np.zeros((Q.m, Q.n))
            for i in rows:
                w = np.where(mask[i], ta, 0.0)
                if w.sum() <= 0:
                    raise SupportViolation(f"input {Q.domain[i]!r} has no marked vertex in the support of tau")
                nu_arr[i] = w / w.sum()
        else:
            raise InputError(f"unknown nu rule {nu!r}")
    else:
        nu_arr = _per_input(Q, nu, "nu")
    _check_supports(Q, sig, ta, mu_arr, nu_arr, rows)
    return sig, ta, mu_arr, nu_arr


def walk_formula(Q: QWalkInstance, sigma, tau, mu, nu, plus_rows, minus_rows, excluded=None) -> BoundReport:
    """Closed-form sizes of the walk composition.

    Positive side (rows in ``plus_rows``)::

        sum mu_v^2/sigma_v S+  +  R_eff(G, r o U+; mu - nu)  +  sum nu_v^2/tau_v C+

    Negative side (rows in ``minus_rows``)::

        sum sigma_v S-  +  sum U-_e / r_e  +  sum tau_v C-

    with the check sum skipping vertices in ``excluded[i]`` (the marked ones
    in the finding constructions).
    """
    m = Q.m
    Sp, Sm = Q.S
    Up, Um = Q.U
    Cp, Cm = Q.C
    r = Q.resistances
    on_s = sigma > 0
    on_t = tau > 0
    parts = {k: (np.zeros(m), np.zeros(m)) for k in ("setup", "update", "check")}
    for i in plus_rows:
        parts["setup"][0][i] = float(np.sum(mu[i, on_s] ** 2 / sigma[on_s] * Sp[on_s, i]))
        parts["update"][0][i] = update_resistance(Q, i, mu[i] - nu[i])
        parts["check"][0][i] = float(np.sum(nu[i, on_t] ** 2 / tau[on_t] * Cp[on_t, i]))
    for i in minus_rows:
        keep = on_t.copy()
        if excluded is not None:
            keep &= ~excluded[i]
        parts["setup"][1][i] = float(np.sum(sigma[on_s] * Sm[on_s, i]))
        parts["update"][1][i] = float(np.sum(Um[:, i] / r))
        parts["check"][1][i] = float(np.sum(tau[keep] * Cm[keep, i]))
    plus = sum(p for p, _ in parts.values())
    minus = sum(q for _, q in parts.values())
    pin = np.zeros(m, dtype=bool)
    pin[list(plus_rows)] = True
    mn = np.zeros(m, dtype=bool)
    mn[list(minus_rows)] = True
    return BoundReport(Q.domain, plus, minus, pin, mn, parts)


# ---------------------------------------------------------------------------
# concrete composition


def _relabel(H: HyperedgeProblem, vertices) -> HyperedgeProblem:
    return HyperedgeProblem(vertices, H.domain, H.delta, H.potential, H.oracle)


def _orient(e: Hyperedge, i: int, a, b, f: float) -> float:
    """Flow scale putting ``f`` units from ``a`` to ``b`` through switch edge ``e``."""
    if f == 0:
        return 0.0
    row = _switch_table(e)[i]
    if row is None:
        raise InvalidInstance(f"hyperedge {e.label!r} carries no flow on input {i}")
    u, v, s = row
    if (u, v) == (a, b):
        return f / s
    if (u, v) == (b, a):
        return -f / s
    raise InvalidInstance(f"hyperedge {e.label!r} does not join {a!r} and {b!r}")


def _walk_instance(Q: QWalkInstance, sigma, tau, sinks: Mapping):
    """Hypergraph on ``{s} + cells + sinks``; ``sinks[(v, D)]`` is the sink of that cell's check."""
    if not Q.concrete:
        raise InputError("concrete composition needs witness payloads")
    V = Q.vertices
    cells = [cell(v, D) for v in V for D in Q.states]
    sink_list = list(dict.fromkeys(sinks[(v, D)] for v in V if tau[Q.graph.index[v]] > 0 for D in Q.states))
    edges, kinds = [], []
    for a, v in enumerate(V):
        if sigma[a] > 0:
            H, W = Q.setups[v]
            edges.append(Hyperedge(H, W, Q.setup_scale[a] / sigma[a], label=f"S[{v}]"))
            kinds.append(("setup", v))
    for j, (a, b, r) in enumerate(Q.graph.edges):
        H, W = Q.updates[j]
        edges.append(Hyperedge(H, W, Q.update_scale[j] * r, label=f"U[{a},{b}]"))
        kinds.append(("update", j))
    for a, v in enumerate(V):
        if tau[a] > 0:
            for k, D in enumerate(Q.states):
                H, W = Q.checks[(v, D)]
                edges.append(Hyperedge(_relabel(H, (cell(v, D), sinks[(v, D)])), W, Q.check_scale[a, k] / tau[a],
                                       label=f"C[{v},{D}]"))
                kinds.append(("check", (v, D)))
    inst = HypergraphInstance((SOURCE,) + tuple(cells) + tuple(sink_list), (SOURCE,) + tuple(sink_list), edges)
    return inst, kinds


def _walk_flows(Q: QWalkInstance, inst: HypergraphInstance, kinds, mu, nu, rows, sinks) -> np.ndarray:
    scales = np.zeros((Q.m, len(inst.edges)))
    index = Q.graph.index
    db = Q.database
    for i in rows:
        f_upd = _update_flow(Q, i, mu[i] - nu[i])
        for j, (kind, key) in enumerate(kinds):
            e = inst.edges[j]
            if kind == "setup":
                v = key
                scales[i, j] = _orient(e, i, SOURCE, cell(v, db[v][i]), mu[i, index[v]])
            elif kind == "update":
                a, b, _ = Q.graph.edges[key]
                scales[i, j] = _orient(e, i, cell(a, db[a][i]), cell(b, db[b][i]), f_upd[key])
            else:
                v, D = key
                if D == db[v][i]:
                    scales[i, j] = _orient(e, i, cell(v, D), sinks[key], nu[i, index[v]])
    return scales


def build_detection(Q: QWalkInstance, sigma, tau, mu=None, nu="auto", concrete: bool | None = None,
                    check: bool = True) -> tuple[ComposedResult | None, BoundReport]:
    """Detection composition and its closed-form sizes.

    ``mu`` defaults to ``sigma`` for every positive input. ``nu`` is a
    per-input distribution array, ``"auto"`` (the marked distribution
    closest to ``mu`` in update resistance) or ``"tau"`` (``tau`` restricted
    to ``M_x``, renormalised). In the concrete tier the composed result's
    sizes are compared with the formulas in ``report.extra``.
    """
    pos = np.nonzero(Q.positive)[0]
    neg = np.nonzero(~Q.positive)[0]
    sig, ta, mu_arr, nu_arr = _resolve(Q, sigma, tau, mu, nu, pos)
    report = walk_formula(Q, sig, ta, mu_arr, nu_arr, pos, neg)
    report.extra.update(mu=mu_arr, nu=nu_arr)
    concrete = Q.concrete if concrete is None else concrete
    if not concrete:
        return None, report
    sinks = {(v, D): SINK for v in Q.vertices for D in Q.states}
    inst, kinds = _walk_instance(Q, sig, ta, sinks)
    scales = _walk_flows(Q, inst, kinds, mu_arr, nu_arr, pos, sinks)
    result = resistance_cut(inst, flow=scales, source=SOURCE, check=check)
    _attach_comparison(report, result)
    return result, report


def _attach_comparison(report: BoundReport, result: ComposedResult) -> None:
    dp = np.abs(result.sizes_plus - report.plus)
    dm = np.abs(result.sizes_minus - report.minus)
    report.extra.update(
        composed_plus=result.sizes_plus.copy(),
        composed_minus=result.sizes_minus.copy(),
        formula_gap=float(max(dp.max(initial=0.0), dm.max(initial=0.0))),
        feasibility=result.feasibility.max_violation if result.feasibility is not None else None,
    )


def build_finding(Q: QWalkInstance, sigma, tau, mode="unique", eps: float | None = None, mu=None,
                  concrete: bool | None = None, check: bool = True) -> tuple[ComposedResult | None, BoundReport]:
    """Finding composition with one sink per cell ``(v, D)``, ``v`` in ``supp(tau)``.

    ``mode="unique"`` needs ``|M_x| = 1`` and sends all flow into the marked
    vertex's sink; ``mode="fraction"`` needs ``Pr_{v~tau}[v in M_x] = eps``
    for every input and uses ``nu_x = tau|_{M_x} / eps``. The negative side
    cuts everything reachable from ``s``, which now includes the sinks of
    marked cells, so marked vertices drop out of the check sum. Separate
    sinks per cell keep checks on wrong entries away from reachable sinks.
    The sink reached identifies the marked vertex. The composed hyperedge is
    mapped back to unit-norm states; the result is in
    ``result.details["unit"]``.
    """
    sig = distribution_vector(Q.vertices, sigma)
    ta = distribution_vector(Q.vertices, tau)
    mask = Q.marked_mask()
    rows = np.arange(Q.m)
    if mode == "unique":
        sizes = mask.sum(axis=1)
        if np.any(sizes != 1):
            i = int(np.argmax(sizes != 1))
            raise NotUnique(f"input {Q.domain[i]!r} has {int(sizes[i])} marked vertices")
        nu = mask.astype(float)
    elif mode == "fraction":
        if eps is None or not eps > 0:
            raise InputError("fraction mode needs eps > 0")
        mass = (mask * ta).sum(axis=1)
        bad = np.abs(mass - eps) > 1e-10
        if np.any(bad):
            i = int(np.argmax(bad))
            raise FractionMismatch(f"input {Q.domain[i]!r} has marked tau-mass {mass[i]!r}, expected {eps!r}")
        nu = mask * ta / eps
    else:
        raise InputError(f"unknown finding mode {mode!r}")
    mu_arr = np.tile(sig, (Q.m, 1)) if mu is None else _per_input(Q, mu, "mu")
    _check_supports(Q, sig, ta, mu_arr, nu, rows)
    report = walk_formula(Q, sig, ta, mu_arr, nu, rows, rows, excluded=mask)
    report.extra.update(mu=mu_arr, nu=nu, mode=mode)
    concrete = Q.concrete if concrete is None else concrete
    if not concrete:
        return None, report
    sinks = {(v, D): sink_of(v, D) for v in Q.vertices for D in Q.states}
    inst, kinds = _walk_instance(Q, sig, ta, sinks)
    scales = _walk_flows(Q, inst, kinds, mu_arr, nu, rows, sinks)
    result = resistance_cut(inst, flow=scales, source=SOURCE, check=check)
    _attach_comparison(report, result)
    H, W = result.problem, result.witnesses
    if mode == "unique":
        # (1_s - 1_t, 1_s + 1_t) -> ((e_s + e_t)/sqrt2, (e_s - e_t)/sqrt2)
        D = np.diag(np.concatenate([[1.0], -np.ones(len(H.vertices) - 1)]))
        R2, W2 = rescale(H, W, D, 1 / math.sqrt(2), 1 / math.sqrt(2))
    else:
        # every cell of v carries tau_v; only the entry of x is ever marked
        pi = np.array([ta[Q.graph.index[b[1]]] for b in H.vertices[1:]])
        R1, W1 = known_fraction_inverse(H, pi, eps, W)
        R2, W2 = rescale(R1, W1, None, 1 / math.sqrt(2), 1 / math.sqrt(2))
    feas = check_feasibility(R2, W2, 1e-8) if check else None
    norms = np.concatenate([np.linalg.norm(R2.sigma_plus, axis=1), np.linalg.norm(R2.sigma_minus, axis=1)])
    result.details["unit"] = {"problem": R2, "witnesses": W2, "feasibility": feas,
                              "state_norm_defect": float(np.max(np.abs(norms - 1), initial=0.0))}
    return result, report


# ---------------------------------------------------------------------------
# aggregate bounds


def _pair(M) -> tuple[float, float]:
    if np.ndim(M) == 0:
        return float(M), float(M)
    p, q = M
    return float(p), float(q)


@dataclass
class UnifiedBound:
    value: float
    plus_bound: float
    minus_bound: float
    S: float
    U: float
    C: float
    t: int
    R: float

    @property
    def objective_bound(self) -> float:
        """``sqrt(plus_bound * minus_bound)``, at most ``sqrt(6)`` times ``value``."""
        return math.sqrt(self.plus_bound * self.minus_bound)

    def as_dict(self) -> dict:
        return {"value": self.value, "plus_bound": self.plus_bound, "minus_bound": self.minus_bound,
                "objective_bound": self.objective_bound, "S": self.S, "U": self.U, "C": self.C, "t": self.t,
                "R": self.R}


def unified_bound(S, U, C, t: int, R: float) -> UnifiedBound:
    """Bracket ``S + sqrt(tR) U + sqrt(1+R) C`` for aggregate routine sizes.

    ``S``, ``U`` and ``C`` are ``(plus, minus)`` pairs (or an already combined
    ``sqrt(plus * minus)`` scalar). After rescaling every routine class to
    negative size 1, the composed positive size is at most
    ``S^2 + tR U^2 + 2(1+R) C^2`` and the negative size at most 3.
    """
    if t < 1 or R < 0:
        raise InputError("need t >= 1 and R >= 0")
    s, u, c = (math.sqrt(p * q) for p, q in map(_pair, (S, U, C)))
    value = s + math.sqrt(t * R) * u + math.sqrt(1 + R) * c
    plus = s**2 + t * R * u**2 + 2 * (1 + R) * c**2
    return UnifiedBound(value, plus, 3.0, s, u, c, int(t), float(R))


def aggregate_sizes(Q: QWalkInstance) -> dict:
    """Class maxima ``(M+, M-)`` over routines and inputs."""
    out = {}
    for name in ("S", "U", "C"):
        p, q = getattr(Q, name)
        out[name] = (float(p.max(initial=0.0)), float(q.max(initial=0.0)))
    return out


def unit_rescaled(Q: QWalkInstance) -> QWalkInstance:
    """Rescale each routine class so that its largest negative size is 1."""
    agg = aggregate_sizes(Q)
    k = {name: (q if q > 0 else 1.0) for name, (_, q) in agg.items()}
    return Q.rescaled(k["S"], k["U"], k["C"])


def walk_resistance_bounds(Q: QWalkInstance, sigma, t: int) -> tuple[float, np.ndarray]:
    """``max_x R_eff(P^t; sigma <-> M_x)`` and the optimal ``nu_x`` per positive input."""
    M, pi = Q.chain()
    L = chain_laplacian(M, pi, t)
    sig = distribution_vector(Q.vertices, sigma)
    mask = Q.marked_mask()
    nu = np.zeros((Q.m, Q.n))
    R = 0.0
    for i in np.nonzero(Q.positive)[0]:
        targets = np.nonzero(mask[i])[0]
        r, w = resistance_to_set(L, sig, targets)
        nu[i, targets] = w
        R = max(R, r)
    return R, nu


def _best_nu(Q: QWalkInstance, sigma, tau, candidates: Sequence[np.ndarray]) -> np.ndarray:
    """Per positive input, a marked distribution minimising the positive size.

    The objective ``R_eff(G, r o U+; sigma - nu) + sum nu^2/tau C+`` is convex;
    it is minimised over the simplex on ``M_x`` starting from the best
    candidate, and the best point seen is kept.
    """
    Cp = Q.C[0]
    mask = Q.marked_mask()
    nu = np.zeros((Q.m, Q.n))
    for i in np.nonzero(Q.positive)[0]:
        T = np.nonzero(mask[i])[0]
        Lp = np.real(pseudoinverse(_update_laplacian(Q, i)))
        c = Cp[T, i] / tau[T]

        def f(w):
            xi = sigma.copy()
            xi[T] -= w
            return float(xi @ Lp @ xi + np.sum(w**2 * c))

        def grad(w):
            xi = sigma.copy()
            xi[T] -= w
            return -2 * (Lp @ xi)[T] + 2 * w * c

        starts = [cand[i, T] for cand in candidates]
        best = min(starts, key=f)
        if len(T) > 1:
            sol = minimize(f, best, jac=grad, method="SLSQP", bounds=[(0, 1)] * len(T),
                           constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1, "jac": lambda w: np.ones_like(w)}],
                           options={"ftol": 1e-14, "maxiter": 500})
            w = np.clip(sol.x, 0, None)
            w /= w.sum()
            if f(w) < f(best):
                best = w
        nu[i, T] = best
    return nu


@dataclass
class UnifiedReport:
    instance: QWalkInstance
    bounds: list
    detection: BoundReport
    result: ComposedResult | None
    tau: np.ndarray

    @property
    def max_plus(self) -> float:
        return self.detection.max_plus

    @property
    def max_minus(self) -> float:
        return self.detection.max_minus

    def violations(self, tol: float = 1e-9) -> list:
        out = []
        for b in self.bounds:
            if self.max_plus > b.plus_bound * (1 + tol) + tol:
                out.append(("plus", b.t, self.max_plus, b.plus_bound))
        if self.max_minus > 3 + tol:
            out.append(("minus", None, self.max_minus, 3.0))
        return out

    @property
    def ok(self) -> bool:
        return not self.violations()

    def as_dict(self) -> dict:
        return {"bounds": [b.as_dict() for b in self.bounds], "max_plus": self.max_plus, "max_minus": self.max_minus,
                "ok": self.ok, "detection": self.detection.as_dict()}


def unified_check(Q: QWalkInstance, sigma, ts: Sequence[int] = (1, 2, 3, 4, 5), concrete: bool | None = None,
                  check: bool = True) -> UnifiedReport:
    """Evaluate the unified bound on an instance and test it against one fixed construction.

    Routine classes are rescaled to negative size 1, ``tau = (sigma + pi)/2``
    and ``mu = sigma``. A single ``nu`` (independent of ``t``) minimises the
    positive size; its composed sizes must lie below every ``t``'s bound.
    """
    Q1 = unit_rescaled(Q)
    agg = aggregate_sizes(Q1)
    _, pi = Q1.chain()
    sig = distribution_vector(Q1.vertices, sigma)
    tau = (sig + pi) / 2
    bounds, cands = [], []
    for t in ts:
        R, nu_t = walk_resistance_bounds(Q1, sig, t)
        bounds.append(unified_bound(agg["S"], agg["U"], agg["C"], t, R))
        cands.append(nu_t)
    nu = _best_nu(Q1, sig, tau, cands) if Q1.positive.any() else np.zeros((Q1.m, Q1.n))
    rows = [nu[i] if Q1.positive[i] else None for i in range(Q1.m)]
    result, rep = build_detection(Q1, sig, tau, mu=None, nu=rows, concrete=concrete, check=check)
    return UnifiedReport(Q1, bounds, rep, result, tau)


def _expect(weights: np.ndarray, values: np.ndarray) -> float:
    return float(np.sum(weights * values))


def variable_query_bounds(Q: QWalkInstance, sigma, tau, variant: int = 1, concrete: bool | None = None,
                          check: bool = True) -> BoundReport:
    """Per-routine rescaling that makes every positive term at most 1.

    Setups are scaled by ``1/E_sigma[S_v+]``, updates by ``1/(R U_e+)`` and
    checks by ``eps / C_{v,D}+``. ``variant=1`` takes ``nu_x`` as the
    resistance-minimising marked distribution and
    ``eps_x = (sum nu^2/tau)^-1``; ``variant=2`` takes
    ``nu_x = tau|_{M_x}/eps_x`` with ``eps_x = Pr_tau[M_x]``. In both
    ``mu = sigma``. ``extra`` holds ``R``, ``eps``, the three positive
    terms, their maxima and the amortised negative expression
    ``E_sigma[S+] E_sigma[S-_x] + R E_{pi,P}[U+ U-_x] + E_tau[C+ C-_x]/eps``.
    """
    sig = distribution_vector(Q.vertices, sigma)
    ta = distribution_vector(Q.vertices, tau)
    if np.any(sig <= 0) or np.any(ta <= 0):
        raise SupportViolation("sigma and tau must have full support")
    pos = np.nonzero(Q.positive)[0]
    neg = np.nonzero(~Q.positive)[0]
    M, pi = Q.chain()
    L = chain_laplacian(M, pi, 1)
    mask = Q.marked_mask()
    nu = np.zeros((Q.m, Q.n))
    eps_x = np.full(Q.m, np.nan)
    Rx = np.full(Q.m, np.nan)
    Lp = np.real(pseudoinverse(L))
    for i in pos:
        T = np.nonzero(mask[i])[0]
        if variant == 1:
            Rx[i], w = resistance_to_set(L, sig, T)
            nu[i, T] = w
            eps_x[i] = 1.0 / float(np.sum(w**2 / ta[T]))
        elif variant == 2:
            eps_x[i] = float(ta[T].sum())
            nu[i, T] = ta[T] / eps_x[i]
            xi = sig - nu[i]
            Rx[i] = float(xi @ Lp @ xi)
        else:
            raise InputError("variant must be 1 or 2")
    R = float(np.nanmax(Rx)) if pos.size else 0.0
    eps = float(np.nanmin(eps_x)) if pos.size else 1.0
    Sp, Sm = Q.S
    Up, Um = Q.U
    Cp, Cm = Q.C
    S_hat = Sp[:, pos].max(axis=1, initial=0.0)
    U_hat = Up[:, pos].max(axis=1, initial=0.0)
    entry = Q.entry_index()
    C_hat = np.zeros((Q.n, len(Q.states)))
    for a in range(Q.n):
        for i in pos:
            C_hat[a, entry[a, i]] = max(C_hat[a, entry[a, i]], Cp[a, i])
    ES = _expect(sig, S_hat)
    kS = 1.0 / ES if ES > 0 else 1.0
    kU = np.where(R * U_hat > 0, 1.0 / np.where(R * U_hat > 0, R * U_hat, 1.0), 1.0)
    kC = np.where(C_hat > 0, eps / np.where(C_hat > 0, C_hat, 1.0), 1.0)
    Q2 = Q.rescaled(kS, kU, kC)
    rows = [nu[i] if Q.positive[i] else None for i in range(Q.m)]
    result, rep = build_detection(Q2, sig, ta, mu=None, nu=rows, concrete=concrete, check=check)
    # amortised negative expression; sum_e f_e/r_e = E_{pi,P}[f]/2
    r = Q.resistances
    Chat_x = np.take_along_axis(C_hat, entry, axis=1)
    expr = np.zeros(Q.m)
    for i in neg:
        e_piP = 2 * float(np.sum(U_hat * Um[:, i] / r))
        expr[i] = ES * _expect(sig, Sm[:, i]) + R * e_piP + _expect(ta, Chat_x[:, i] * Cm[:, i]) / eps
    terms = {k: rep.breakdown[k][0] for k in ("setup", "update", "check")}
    rep.extra.update(R=R, eps=eps, eps_x=eps_x, R_x=Rx, variant=variant, negative_expression=expr,
                     term_max={k: float(v[pos].max(initial=0.0)) for k, v in terms.items()},
                     rescaled=Q2, result=result)
    return rep


def mnrs_inequality(M: MarkovChain, marked) -> tuple[float, float, float]:
    """``(R_eff(P; pi - pi|_M/eps), (1/eps - 1)/delta, 1/(delta eps))`` for one marked set.

    The resistance uses the pseudoinverse of ``diag(pi)(I - P)``; ``delta`` is
    the spectral gap.
    """
    pi, delta = stationary_and_gap(M)
    mask = np.zeros(M.n, dtype=bool)
    index = {s: i for i, s in enumerate(M.states)}
    for v in marked:
        mask[index[v]] = True
    eps = float(pi[mask].sum())
    if eps <= 0:
        raise InputError("marked set has no stationary mass")
    xi = pi - np.where(mask, pi, 0.0) / eps
    L = chain_laplacian(M, pi, 1)
    lhs = float(np.real(xi @ pseudoinverse(L) @ xi))
    return lhs, (1 / eps - 1) / delta, 1 / (delta * eps)


def mnrs_bounds(Q: QWalkInstance, concrete: bool | None = None, check: bool = True) -> BoundReport:
    """Variable-query bounds with ``sigma = tau = pi`` and the spectral-gap estimate.

    ``extra["inequality"]`` lists ``(lhs, mid, rhs)`` per positive input from
    :func:`mnrs_inequality`; ``extra["mnrs_expression"]`` is
    ``E_pi[S+] E_pi[S-_x] + (E_{pi,P}[U+ U-_x]/delta + E_pi[C+ C-_x]) / eps``.
    """
    M, pi = Q.chain()
    _, delta = stationary_and_gap(M)
    rep = variable_query_bounds(Q, pi, pi, variant=2, concrete=concrete, check=check)
    pos = np.nonzero(Q.positive)[0]
    neg = np.nonzero(~Q.positive)[0]
    ineq = {Q.domain[i]: mnrs_inequality(M, Q.marked[i]) for i in pos}
    eps = rep.extra["eps"]
    Sp, Sm = Q.S
    Up, Um = Q.U
    Cp, Cm = Q.C
    S_hat = Sp[:, pos].max(axis=1, initial=0.0)
    U_hat = Up[:, pos].max(axis=1, initial=0.0)
    entry = Q.entry_index()
    C_hat = np.zeros((Q.n, len(Q.states)))
    for a in range(Q.n):
        for i in pos:
            C_hat[a, entry[a, i]] = max(C_hat[a, entry[a, i]], Cp[a, i])
    Chat_x = np.take_along_axis(C_hat, entry, axis=1)
    r = Q.resistances
    expr = np.zeros(Q.m)
    for i in neg:
        e_piP = 2 * float(np.sum(U_hat * Um[:, i] / r))
        expr[i] = _expect(pi, S_hat) * _expect(pi, Sm[:, i]) + (e_piP / delta + _expect(pi, Chat_x[:, i] * Cm[:, i])) / eps
    slack = min((rhs - lhs for lhs, _, rhs in ineq.values()), default=math.inf)
    rep.extra.update(delta=delta, inequality=ineq, mnrs_expression=expr, inequality_slack=slack)
    return rep


# ---------------------------------------------------------------------------
# random instances


def indicator_program(domain: Sequence, values: Sequence[int], scale: float = 1.0) -> SpanProgram:
    """One-query program for given bits on ``C^2`` with target ``scale e_1``.

    Positive witnesses have size ``scale^2`` and negative ones ``1/scale^2``.
    """
    P = np.zeros((len(domain), 2, 2), dtype=complex)
    for i, b in enumerate(values):
        b = int(bool(b))
        P[i, b, b] = 1.0
    return SpanProgram(tuple(domain), P, np.zeros((2, 0)), np.array([0.0, scale]))


def random_instance(rng: np.random.Generator, n: int | None = None, n_states: int | None = None,
                    m: int | None = None, concrete: bool = True, wrong_checks: str = "random",
                    density: float = 0.4, marked=None) -> QWalkInstance:
    """Random walk-search instance with feasible routine payloads.

    Setups and updates are random feasible families under an input-revealing
    oracle; checks are one-query programs with a random target scale.
    ``wrong_checks`` chooses what checks on wrong entries answer: ``"random"``
    bits, or ``"reject"`` (always 0). Unless ``marked`` (vertex indices per
    input) is given, the first input is unmarked and the second marked.
    """
    n = int(rng.integers(2, 9)) if n is None else n
    k = int(rng.integers(2, 4)) if n_states is None else n_states
    m = int(rng.integers(2, 7)) if m is None else m
    m = len(marked) if marked is not None else m
    G = normalized_graph(random_connected_graph(n, rng, density, (0.5, 5.0)))
    V = G.vertices
    states = tuple(range(k))
    domain = tuple(f"x{i}" for i in range(m))
    given, marked = marked, []
    for i in range(m):
        if given is not None:
            marked.append(frozenset(V[j] for j in given[i]))
            continue
        if i == 0 or (i > 1 and rng.random() < 0.3):
            marked.append(frozenset())
        else:
            size = int(rng.integers(1, max(1, n // 2) + 1))
            marked.append(frozenset(rng.choice(V, size=size, replace=False).tolist()))
    database = {v: tuple(int(d) for d in rng.integers(0, k, size=m)) for v in V}
    if not concrete:
        S = rng.uniform(0.2, 3.0, size=(2, n, m))
        U = rng.uniform(0.2, 3.0, size=(2, len(G.edges), m))
        C = rng.uniform(0.2, 3.0, size=(2, n, m))
        return QWalkInstance(G, domain, marked, states, database, S, U, C)
    empty = BlockOracle.empty(m)
    setups = {}
    for v in V:
        verts = (SOURCE,) + tuple(cell(v, D) for D in states)
        H, _ = function_evaluation(verts, domain, [cell(v, database[v][i]) for i in range(m)], empty, blank=SOURCE)
        setups[v] = learning_solution(H, rng, scale=float(rng.uniform(0.5, 1.5)))
    updates = []
    for a, b, _ in G.edges:
        verts = tuple(cell(a, D) for D in states) + tuple(cell(b, D) for D in states)
        H, _ = database_hyperedge(verts, domain, [cell(a, database[a][i]) for i in range(m)],
                                  [cell(b, database[b][i]) for i in range(m)], empty)
        updates.append(learning_solution(H, rng, scale=float(rng.uniform(0.5, 1.5))))
    checks = {}
    for v in V:
        for D in states:
            vals = []
            for i in range(m):
                if database[v][i] == D:
                    vals.append(int(v in marked[i]))
                elif wrong_checks == "random":
                    vals.append(int(rng.random() < 0.5))
                else:
                    vals.append(0)
            SP = indicator_program(domain, vals, float(rng.uniform(0.6, 1.6)))
            checks[(v, D)] = span_to_hyperedge(SP, vals, vertices=(cell(v, D), SINK))
    return QWalkInstance.from_payloads(G, domain, marked, states, database, setups, updates, checks)
