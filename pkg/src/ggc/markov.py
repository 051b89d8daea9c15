"""Reversible Markov chains and electrical networks.

A weighted graph with edge resistances and a reversible Markov chain are two
views of the same object: the walk moves along edge ``e`` with probability
proportional to ``1/r_e``. This module converts between the two, computes
stationary distributions, spectral gaps and effective resistances, and
checks the two resistance inequalities used by the walk-search bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    CrossComponent,
    Disconnected,
    NotIrreducible,
    NotReversible,
    NumericalFailure,
    OverlappingSupport,
)
from .numerics import hermitian_eig, min_norm_solve, pseudoinverse

STRUCT_TOL = 1e-10
RESISTANCE_RTOL = 1e-8


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected multigraph with positive edge resistances.

    Edges are ``(tail, head, resistance)`` triples. The orientation only fixes
    the sign convention of flows; the graph itself is undirected.
    """

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple((u, v, float(r)) for u, v, r in self.edges))
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex labels")
        index = self.index
        for u, v, r in self.edges:
            if u not in index or v not in index:
                raise ValueError(f"edge ({u!r}, {v!r}) uses an unknown vertex")
            if not r > 0 or not math.isfinite(r):
                raise ValueError(f"edge ({u!r}, {v!r}) has non-positive resistance {r}")

    @property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def resistances(self) -> np.ndarray:
        return np.array([r for _, _, r in self.edges], dtype=float)

    def incidence(self) -> np.ndarray:
        """Weighted incidence matrix with entries ``+-1/sqrt(r_e)``.

        The tail of an edge gets the positive sign; self-loops get a zero column.
        """
        index = self.index
        B = np.zeros((self.n, len(self.edges)))
        for j, (u, v, r) in enumerate(self.edges):
            if u == v:
                continue
            B[index[u], j] = 1.0 / math.sqrt(r)
            B[index[v], j] = -1.0 / math.sqrt(r)
        return B

    def laplacian(self) -> np.ndarray:
        B = self.incidence()
        return B @ B.T

    def components(self) -> np.ndarray:
        """Connected-component label for every vertex."""
        index = self.index
        rows = [index[u] for u, v, _ in self.edges]
        cols = [index[v] for u, v, _ in self.edges]
        adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))
        return connected_components(adj, directed=False)[1]

    def is_connected(self) -> bool:
        return self.n <= 1 or len(set(self.components())) == 1

    def scaled(self, factor: float) -> "WeightedGraph":
        return WeightedGraph(self.vertices, tuple((u, v, r * factor) for u, v, r in self.edges))


@dataclass(frozen=True)
class MarkovChain:
    """Row-stochastic transition matrix over labelled states."""

    states: tuple
    P: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        P = np.array(self.P, dtype=float)
        if P.shape != (len(self.states), len(self.states)):
            raise ValueError(f"transition matrix shape {P.shape} does not match {len(self.states)} states")
        if np.any(P < -STRUCT_TOL):
            raise ValueError("transition matrix has negative entries")
        if np.any(np.abs(P.sum(axis=1) - 1.0) > STRUCT_TOL):
            raise ValueError("transition matrix rows do not sum to 1")
        object.__setattr__(self, "P", P)

    @property
    def n(self) -> int:
        return len(self.states)

    def is_irreducible(self) -> bool:
        if self.n <= 1:
            return True
        adj = csr_matrix(self.P > STRUCT_TOL)
        return connected_components(adj, directed=True, connection="strong")[0] == 1


@dataclass(frozen=True)
class Flow:
    """Edge flow (positive along the declared tail-to-head orientation)."""

    values: np.ndarray
    energy: float


def as_vertex_vector(G_or_labels, values) -> np.ndarray:
    """Accept either a dense vector or a ``label -> value`` mapping."""
    labels = G_or_labels.vertices if hasattr(G_or_labels, "vertices") else tuple(G_or_labels)
    if isinstance(values, Mapping):
        index = {v: i for i, v in enumerate(labels)}
        out = np.zeros(len(labels))
        for k, val in values.items():
            out[index[k]] = val
        return out
    out = np.asarray(values, dtype=float)
    if out.shape != (len(labels),):
        raise ValueError(f"vector of shape {out.shape} does not match {len(labels)} vertices")
    return out


def graph_to_chain(G: WeightedGraph) -> tuple[MarkovChain, np.ndarray]:
    """Random walk on ``G`` and its stationary distribution.

    ``P_vw = sum over edges e joining v and w of r_v / r_e`` with
    ``r_v = (sum_{e at v} 1/r_e)^-1``; a self-loop contributes to ``P_vv``.
    The stationary distribution is ``pi_v = R / r_v`` with ``R = (sum_v 1/r_v)^-1``.
    """
    if not G.is_connected():
        raise Disconnected("graph is not connected")
    index = G.index
    n = G.n
    conductance = np.zeros((n, n))
    for u, v, r in G.edges:
        i, j = index[u], index[v]
        conductance[i, j] += 1.0 / r
        if i != j:
            conductance[j, i] += 1.0 / r
    degree = conductance.sum(axis=1)
    if n == 1 and degree[0] == 0:
        return MarkovChain(G.vertices, np.ones((1, 1))), np.ones(1)
    if np.any(degree <= 0):
        raise Disconnected("graph has an isolated vertex")
    P = conductance / degree[:, None]
    pi = degree / degree.sum()
    return MarkovChain(G.vertices, P), pi


def _stationary(M: MarkovChain) -> np.ndarray:
    A = M.P.T - np.eye(M.n)
    A = np.vstack([A, np.ones((1, M.n))])
    b = np.zeros(M.n + 1)
    b[-1] = 1.0
    pi = np.real(min_norm_solve(A, b))
    if np.any(pi < -STRUCT_TOL):
        raise NumericalFailure("stationary distribution has negative entries")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def is_reversible(M: MarkovChain, pi, tol: float = STRUCT_TOL) -> bool:
    flux = np.asarray(pi)[:, None] * M.P
    return bool(np.max(np.abs(flux - flux.T), initial=0.0) <= tol)


def chain_to_graph(M: MarkovChain, pi=None, tol: float = STRUCT_TOL) -> WeightedGraph:
    """Weighted graph whose random walk is ``M``: ``r_vw = 1/(pi_v P_vw)``.

    Self-loops in ``M`` become loop edges so the round trip reproduces ``P``.
    """
    if not M.is_irreducible():
        raise NotIrreducible("chain is not irreducible")
    if pi is None:
        pi = _stationary(M)
    pi = np.asarray(pi, dtype=float)
    if not is_reversible(M, pi, tol):
        raise NotReversible("chain violates detailed balance")
    edges = []
    for i in range(M.n):
        for j in range(i, M.n):
            if M.P[i, j] > tol:
                edges.append((M.states[i], M.states[j], 1.0 / (pi[i] * M.P[i, j])))
    return WeightedGraph(M.states, tuple(edges))


def symmetrized(M: MarkovChain, pi) -> np.ndarray:
    """``D^{1/2} P D^{-1/2}`` with ``D = diag(pi)``."""
    root = np.sqrt(np.asarray(pi, dtype=float))
    return root[:, None] * M.P / root[None, :]


def stationary_and_gap(M: MarkovChain) -> tuple[np.ndarray, float]:
    """Stationary distribution and spectral gap.

    The gap is ``min over eigenvalues lambda < 1 of (1 - lambda)`` for the
    symmetrised transition matrix, so a periodic chain with eigenvalue ``-1``
    has gap 2 rather than 0. The two-state flip chain therefore has gap 2 and
    its lazy version gap 1. A one-state chain has no sub-unit eigenvalue and
    gets ``inf``.
    """
    if not M.is_irreducible():
        raise NotIrreducible("chain is not irreducible")
    pi = _stationary(M)
    S = symmetrized(M, pi)
    if is_reversible(M, pi):
        lam = hermitian_eig((S + S.T) / 2).eigenvalues
    else:
        lam = np.sort(np.real(np.linalg.eigvals(S)))[::-1]
    below = lam[1:]
    if below.size == 0:
        return pi, math.inf
    return pi, float(1.0 - below.max())


def absolute_gap(M: MarkovChain) -> float:
    """``1 - max |lambda|`` over the non-trivial eigenvalues (0 for periodic chains)."""
    pi, _ = stationary_and_gap(M)
    lam = np.linalg.eigvals(symmetrized(M, pi))
    lam = lam[np.argsort(-np.real(lam))][1:]
    return float(1.0 - np.max(np.abs(lam))) if lam.size else math.inf


def _check_components(labels: np.ndarray, delta: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(delta).sum()))
    for c in np.unique(labels):
        if abs(delta[labels == c].sum()) > STRUCT_TOL * scale:
            raise CrossComponent("net-flow does not vanish on a connected component")


def resistance(G: WeightedGraph, delta) -> tuple[float, Flow]:
    """Effective resistance and the minimum-energy flow for net-flow ``delta``.

    Two independent routes are computed and cross-checked: ``delta^T L^+ delta``
    through the Laplacian pseudoinverse, and the minimal-norm solution of
    ``B f = delta`` on the weighted incidence matrix whose squared norm is the
    flow energy.

    Parameters
    ----------
    G : WeightedGraph
    delta : array_like or mapping
        Net-flow over the vertices (positive where flow enters the network).

    Returns
    -------
    R_eff : float
    flow : Flow
        ``flow.values[e]`` is the flow along edge ``e`` from tail to head.
    """
    d = as_vertex_vector(G, delta)
    _check_components(G.components(), d)
    if not np.any(d):
        return 0.0, Flow(np.zeros(len(G.edges)), 0.0)
    B = G.incidence()
    L = B @ B.T
    r_laplacian = float(np.real(d @ pseudoinverse(L) @ d))
    embedded = np.real(min_norm_solve(B, d))
    if np.max(np.abs(B @ embedded - d)) > STRUCT_TOL * max(1.0, np.abs(d).max()):
        raise NumericalFailure("incidence least-squares flow does not reproduce the net-flow")
    energy = float(embedded @ embedded)
    if abs(energy - r_laplacian) > RESISTANCE_RTOL * max(abs(r_laplacian), 1e-300):
        raise NumericalFailure(
            f"resistance routes disagree: laplacian {r_laplacian!r}, incidence {energy!r}"
        )
    values = embedded / np.sqrt(G.resistances)
    return r_laplacian, Flow(values, energy)


def resistance_incidence(G: WeightedGraph, delta) -> float:
    """Flow energy of the incidence least-squares solution (second route only)."""
    d = as_vertex_vector(G, delta)
    _check_components(G.components(), d)
    embedded = np.real(min_norm_solve(G.incidence(), d))
    return float(embedded @ embedded)


def resistance_laplacian(G: WeightedGraph, delta) -> float:
    """``delta^T L^+ delta`` (first route only)."""
    d = as_vertex_vector(G, delta)
    _check_components(G.components(), d)
    return float(np.real(d @ pseudoinverse(G.laplacian()) @ d))


def chain_laplacian(M: MarkovChain, pi, t: int = 1) -> np.ndarray:
    """``diag(pi) (I - P^t)``, the Laplacian of the chain ``P^t``."""
    Pt = np.linalg.matrix_power(M.P, t)
    return np.asarray(pi)[:, None] * (np.eye(M.n) - Pt)


def spectral_resistance(M: MarkovChain, pi, xi, t: int = 1) -> float:
    """Effective resistance of ``P^t`` for net-flow ``xi`` from the spectrum of ``P``.

    Uses ``sum over lambda_j^t < 1 of |<xi~, v_j>|^2 / (1 - lambda_j^t)`` with
    ``xi~ = D^{-1/2} xi``. Components on eigenvalues with ``lambda^t = 1`` other
    than the stationary direction mean ``xi`` straddles components of ``P^t``
    and give ``inf``.
    """
    pi = np.asarray(pi, dtype=float)
    xi = np.asarray(xi, dtype=float)
    S = symmetrized(M, pi)
    eig = hermitian_eig((S + S.T) / 2)
    xt = xi / np.sqrt(pi)
    coeff = np.abs(eig.eigenvectors.T @ xt) ** 2
    power = eig.eigenvalues ** t
    total = 0.0
    scale = max(float(xt @ xt), 1e-300)
    for c, mu in zip(coeff, power):
        if 1.0 - mu > 1e-12:
            total += c / (1.0 - mu)
        elif c > 1e-18 * scale:
            return math.inf
    return float(total)


def resistance_to_set(L: np.ndarray, source, targets: Sequence[int]) -> tuple[float, np.ndarray]:
    """Least effective resistance from ``source`` to any distribution on ``targets``.

    The target set is grounded and the flow's boundary trace gives the optimal
    sink distribution ``nu``. Returns ``(R, nu)``; ``R`` is ``inf`` when some
    source mass cannot reach the targets.
    """
    source = np.asarray(source, dtype=float)
    n = len(source)
    T = np.zeros(n, dtype=bool)
    T[list(targets)] = True
    if not T.any():
        raise ValueError("target set is empty")
    free = ~T
    phi = np.zeros(n)
    if free.any():
        Lff = L[np.ix_(free, free)]
        sol = np.real(min_norm_solve(Lff, source[free]))
        if np.max(np.abs(Lff @ sol - source[free]), initial=0.0) > 1e-8 * max(1.0, np.abs(source).max()):
            return math.inf, np.full(int(T.sum()), np.nan)
        phi[free] = sol
    inflow = source - L @ phi
    nu = np.clip(inflow[T], 0.0, None)
    nu = nu / nu.sum()
    return float(phi @ source), nu


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of the three resistance inequalities for one draw."""

    t: int
    r_chain: float
    r_power: float
    fast_forward_rhs: float
    fast_forward_ok: bool
    gap: float
    gap_rhs: float
    gap_ok: bool
    fraction_lhs: float | None = None
    fraction_rhs: float | None = None
    fraction_ok: bool | None = None

    @property
    def ok(self) -> bool:
        return self.fast_forward_ok and self.gap_ok and self.fraction_ok is not False

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"ok": self.ok}


def check_resistance_inequalities(M: MarkovChain, xi, t: int, sigma=None, nu=None, slack: float = 1e-9) -> InequalityReport:
    """Check the fast-forwarding and fraction inequalities.

    (i) ``R(P; xi) <= t R(P^t; xi)``; (ii) ``R(P; xi) <= ||D^{-1/2} xi||^2 / gap``;
    (iii) ``sum_v nu_v^2 / pi_v <= 2 R(P^t; sigma - nu)`` for disjointly supported
    distributions ``sigma`` and ``nu`` (skipped when they are not given).
    ``R(P; .)`` comes from the graph of the chain; ``R(P^t; .)`` from the spectrum.
    """
    if t < 1:
        raise ValueError("t must be a positive integer")
    pi, gap = stationary_and_gap(M)
    G = chain_to_graph(M, pi)
    xi = as_vertex_vector(M.states, xi)
    r_chain, _ = resistance(G, xi)
    r_power = spectral_resistance(M, pi, xi, t)
    ff_rhs = t * r_power
    norm_term = float(np.sum(xi**2 / pi))
    gap_rhs = norm_term / gap if gap > 0 else math.inf
    report = dict(
        t=t,
        r_chain=r_chain,
        r_power=r_power,
        fast_forward_rhs=ff_rhs,
        fast_forward_ok=bool(r_chain <= ff_rhs + slack),
        gap=gap,
        gap_rhs=gap_rhs,
        gap_ok=bool(r_chain <= gap_rhs + slack),
    )
    if sigma is not None and nu is not None:
        s = as_vertex_vector(M.states, sigma)
        v = as_vertex_vector(M.states, nu)
        if np.any((s > 0) & (v > 0)):
            raise OverlappingSupport("sigma and nu share support")
        lhs = float(np.sum(v**2 / pi))
        rhs = 2.0 * spectral_resistance(M, pi, s - v, t)
        report.update(fraction_lhs=lhs, fraction_rhs=rhs, fraction_ok=bool(lhs <= rhs + slack))
    return InequalityReport(**report)


def random_reversible_chain(n: int, rng: np.random.Generator, density: float = 0.5, lazy: float = 0.0) -> MarkovChain:
    """Random irreducible reversible chain via a random connected weighted graph."""
    G = random_connected_graph(n, rng, density=density)
    M, _ = graph_to_chain(G)
    P = M.P
    if lazy > 0:
        P = lazy * np.eye(n) + (1 - lazy) * P
    return MarkovChain(M.states, P)


def random_connected_graph(n: int, rng: np.random.Generator, density: float = 0.3,
                           r_range: tuple[float, float] = (0.1, 10.0)) -> WeightedGraph:
    """Random spanning tree plus random extra edges, resistances uniform in ``r_range``."""
    labels = tuple(f"v{i}" for i in range(n))
    edges = []
    order = rng.permutation(n)
    for k in range(1, n):
        a = order[k]
        b = order[rng.integers(0, k)]
        edges.append((labels[a], labels[b]))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                edges.append((labels[i], labels[j]))
    lo, hi = r_range
    return WeightedGraph(labels, tuple((u, v, float(rng.uniform(lo, hi))) for u, v in edges))


def distribution_vector(labels: Sequence[Hashable], dist) -> np.ndarray:
    """Validate a probability distribution over ``labels``."""
    v = as_vertex_vector(labels, dist)
    if np.any(v < -STRUCT_TOL) or abs(v.sum() - 1.0) > 1e-9:
        raise ValueError("not a probability distribution")
    return np.clip(v, 0.0, None)
