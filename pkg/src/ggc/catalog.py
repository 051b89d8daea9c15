"""Worked composition instances with closed-form witness sizes.

Each generator returns a :class:`CatalogFixture` holding the hypergraph
instance, the builder that turns it into a feasible solution and the
expected per-input sizes.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .composition import (
    ComposedResult,
    Hyperedge,
    HypergraphInstance,
    divide_conquer_instance,
    electrical_embed,
    resistance_cut,
    span_edge,
)
from .errors import AllZeroInput, InputError, NotDistinct
from .reflection import (
    BlockOracle,
    SpanProgram,
    StateConversionProblem,
    function_evaluation_from_conversion,
    run_query_algorithm,
    single_query_span_program,
)


@dataclass(eq=False)
class CatalogFixture:
    name: str
    instance: HypergraphInstance
    expected_plus: np.ndarray
    expected_minus: np.ndarray
    description: str
    builder: Callable[[HypergraphInstance], ComposedResult] = field(repr=False, default=resistance_cut)
    params: dict = field(default_factory=dict)

    @cached_property
    def result(self) -> ComposedResult:
        return self.builder(self.instance)

    @property
    def domain(self) -> tuple:
        return self.instance.domain

    def size_errors(self) -> tuple[float, float]:
        r = self.result
        return (float(np.max(np.abs(r.sizes_plus - self.expected_plus), initial=0.0)),
                float(np.max(np.abs(r.sizes_minus - self.expected_minus), initial=0.0)))


def predicate_span_program(domain: Sequence, predicate: Callable) -> SpanProgram:
    """One-query program for a Boolean predicate of the input on ``C^2``.

    The oracle reveals ``b = predicate(x)`` through ``H(x) = span{e_b}``; the
    target is ``e_1`` so both witness sizes are 1.
    """
    P = np.zeros((len(domain), 2, 2), dtype=complex)
    for i, x in enumerate(domain):
        b = int(bool(predicate(x)))
        P[i, b, b] = 1.0
    return SpanProgram(tuple(domain), P, np.zeros((2, 0)), np.array([0.0, 1.0]))


def _query_edge(domain, pos, symbol, u, v, weight=1.0, label=None) -> Hyperedge:
    SP = single_query_span_program(domain, pos, symbol, (0, 1))
    # both witness types are the target vector itself
    w = np.tile(SP.target, (len(domain), 1))
    return span_edge(SP, [int(x[pos] == symbol) for x in domain], u, v, weight, label, witnesses=w)


# ---------------------------------------------------------------------------
# first marked index


def first_marked(x: Sequence[int]) -> int:
    """1-based index of the first 1 in ``x``."""
    for j, b in enumerate(x, start=1):
        if b:
            return j
    raise AllZeroInput("the all-zero string has no marked index")


def first_marked_domain(n: int, limit: int | None = None) -> tuple:
    """One representative per value of the first marked index.

    The tail after the first 1 alternates so that both symbols are queried.
    """
    out = []
    for i in range(1, (limit or n) + 1):
        tail = [(i + j) % 2 for j in range(n - i)]
        out.append(tuple([0] * (i - 1) + [1] + tail))
    return tuple(out)


def first_marked_index(n: int, alpha: Sequence[float], beta: Sequence[float], domain: Sequence | None = None
                       ) -> CatalogFixture:
    """Comb instance: spine edges ``alpha_j [x_j = 0]``, teeth ``beta_j [x_j = 1]``.

    The spine runs ``s = c1, c2, ..., c(n+1)`` and tooth ``j`` hangs from
    ``c_j`` to the boundary leaf ``j``.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.shape != (n,) or beta.shape != (n,):
        raise InputError("alpha and beta need one entry per position")
    if np.any(alpha <= 0) or np.any(beta <= 0):
        raise InputError("alpha and beta must be positive")
    D = tuple(tuple(int(b) for b in x) for x in (domain if domain is not None else first_marked_domain(n)))
    for x in D:
        if len(x) != n:
            raise InputError(f"input {x} does not have length {n}")
        if not any(x):
            raise AllZeroInput("the all-zero string has no marked index")
    spine = ["s"] + [f"c{j}" for j in range(2, n + 2)]
    leaves = [f"leaf{j}" for j in range(1, n + 1)]
    edges = []
    for j in range(n):
        edges.append(_query_edge(D, j, 0, spine[j], spine[j + 1], alpha[j], f"alpha{j + 1}"))
        edges.append(_query_edge(D, j, 1, spine[j], leaves[j], beta[j], f"beta{j + 1}"))
    inst = HypergraphInstance(tuple(spine + leaves), ("s",) + tuple(leaves), edges)
    ip = np.array([first_marked(x) for x in D])
    plus = np.array([alpha[: i - 1].sum() + beta[i - 1] for i in ip])
    minus = np.array([(1 / beta[: i - 1]).sum() + 1 / alpha[i - 1] for i in ip])
    return CatalogFixture("first_marked_index", inst, plus, minus,
                          f"first marked index on {n} bits", resistance_cut,
                          {"n": n, "alpha": alpha.tolist(), "beta": beta.tolist()})


def sqrt_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(1, n + 1)
    return 1 / np.sqrt(j), np.sqrt(j)


def harmonic_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(1, n + 1)
    return 1 / j, np.ones(n)


# ---------------------------------------------------------------------------
# learning a bit string


def _prefix(p: tuple) -> str:
    return "s" if not p else "".join(map(str, p))


def dense_learning(n: int) -> CatalogFixture:
    """Complete binary tree of depth ``n``; node ``p`` has edges ``[x_{|p|+1} = b]`` to ``p b``."""
    if n < 1:
        raise InputError("n must be at least 1")
    D = tuple(itertools.product((0, 1), repeat=n))
    verts = []
    edges = []
    for depth in range(n + 1):
        for p in itertools.product((0, 1), repeat=depth):
            verts.append(_prefix(p))
            if depth < n:
                for b in (0, 1):
                    edges.append(_query_edge(D, depth, b, _prefix(p), _prefix(p + (b,))))
    leaves = tuple(_prefix(p) for p in D)
    inst = HypergraphInstance(tuple(verts), ("s",) + leaves, edges)
    full = np.full(len(D), float(n))
    return CatalogFixture("dense_learning", inst, full, full.copy(), f"learn {n} bits", resistance_cut, {"n": n})


# ---------------------------------------------------------------------------
# minimum finding


def permutation_domain(n: int, samples: int = 24, seed: int = 0) -> tuple:
    """All permutations of ``range(n)`` when there are at most ``samples``, else a seeded sample."""
    if math.factorial(n) <= samples:
        return tuple(itertools.permutations(range(n)))
    rng = np.random.default_rng(seed)
    seen = {}
    while len(seen) < samples:
        p = tuple(int(v) for v in rng.permutation(n))
        seen.setdefault(p, None)
    return tuple(seen)


def minimum_finding(n: int, domain: Sequence | None = None, samples: int = 24, seed: int = 0) -> CatalogFixture:
    """Star of ``n`` paths; path ``i`` has edges ``[x_i <= x_j]`` for ``j = 1..n`` ending at leaf ``i``.

    Sizes use the energy-minimising potential: the path of an element of
    rank ``r`` has ``r - 1`` blocked edges in series, contributing
    ``1/(r - 1)``.
    """
    if n < 2:
        raise InputError("n must be at least 2")
    D = tuple(tuple(x) for x in (domain if domain is not None else permutation_domain(n, samples, seed)))
    for x in D:
        if len(x) != n:
            raise InputError(f"input {x} does not have length {n}")
        if len(set(x)) != n:
            raise NotDistinct(f"input {x} has repeated values")
    verts = ["s"]
    leaves = []
    edges = []
    for i in range(n):
        path = ["s"] + [f"p{i + 1}_{j}" for j in range(1, n)] + [f"leaf{i + 1}"]
        verts += path[1:]
        leaves.append(path[-1])
        for j in range(n):
            SP = predicate_span_program(D, lambda x, i=i, j=j: x[i] <= x[j])
            f = [int(x[i] <= x[j]) for x in D]
            edges.append(span_edge(SP, f, path[j], path[j + 1], label=f"x{i + 1}<=x{j + 1}"))
    inst = HypergraphInstance(tuple(verts), ("s",) + tuple(leaves), edges)
    h = sum(1 / k for k in range(1, n))
    return CatalogFixture("minimum_finding", inst, np.full(len(D), float(n)), np.full(len(D), h),
                          f"minimum of {n} distinct values", electrical_embed, {"n": n, "seed": seed})


def argmin(x: Sequence) -> int:
    return int(np.argmin(x)) + 1


# ---------------------------------------------------------------------------
# divide and conquer


def bit_evaluation(domain: Sequence, position: int, blank="⊥"):
    """Function-evaluation hyperedge for ``x -> x_position`` from a one-query algorithm.

    The oracle applies the phase ``(-1)^{x_position}``; the algorithm is
    Hadamard, query, Hadamard then ``Z``, with pre-query state
    ``(e_0 + e_1)/sqrt2`` whose controlled part gives sizes 1.
    """
    m = len(domain)
    phases = np.array([(-1.0) ** x[position] for x in domain]).reshape(m, 1, 1)
    O = BlockOracle.from_dense(phases)
    sigma = np.ones((m, 1))
    Hd = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    init = np.hstack([sigma, np.zeros((m, 1))])
    run = run_query_algorithm(init, [Hd, np.diag([1.0, -1.0]) @ Hd], O, 1)
    P = StateConversionProblem(tuple(domain), sigma, run.output, O)
    return function_evaluation_from_conversion(P, np.hstack(run.controlled), outputs=(0, 1), blank=blank)


def bit_select(blank="⊥") -> CatalogFixture:
    """``f(x) = x_{2 + x_1}`` on three bits: read ``x_1`` then query the selected bit."""
    D = tuple(itertools.product((0, 1), repeat=3))
    H, W = bit_evaluation(D, 0, blank)
    aux = Hyperedge(H, W, label="aux")
    branches = {s: _query_edge(D, 1 + s, 1, "u", "v", label=f"x{2 + s}") for s in (0, 1)}
    f = np.array([x[1 + x[0]] for x in D])
    plus = np.where(f == 1, 2.0, 0.0)
    minus = np.where(f == 0, 2.0, 0.0)
    inst = divide_conquer_instance(aux, branches, blank=blank)
    return CatalogFixture("bit_select", inst, plus, minus, "read one bit, then query the bit it selects",
                          resistance_cut, {})


def standard_fixtures() -> list[CatalogFixture]:
    """The fixture corpus shared by the acceptance checks and the CLI self-test."""
    out = []
    a, b = sqrt_weights(8)
    out.append(first_marked_index(8, a, b))
    a, b = harmonic_weights(8)
    out.append(first_marked_index(8, a, b))
    out += [dense_learning(n) for n in (1, 2, 3)]
    out += [minimum_finding(n) for n in (2, 3, 4)]
    out.append(bit_select())
    return out
