"""Weighting schemes for decision trees and their conversion to compositions.

A weighting scheme assigns ``w_v >= 0`` to every node with ``w_leaf = 0``
and, at every internal node, PSD certificates ``X, Y`` over the children
with ``X - Y = 1`` off the diagonal and ``w_v - w_c >= X[c,c] + Y[c,c]``.
The optimal scheme solves one small SDP per node, leaves first.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .composition import ComposedResult, Hyperedge, HypergraphInstance, compose
from .errors import InputError, InvalidColoring, InvalidScheme, NoConvergence
from .numerics import psd_factor
from .reflection import HyperedgeProblem, WitnessFamily, symbol_swap_oracle


@dataclass(frozen=True)
class Node:
    position: int | None = None
    output: Hashable = None
    children: Mapping = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.position is None


@dataclass(eq=False)
class DecisionTree:
    """Decision tree with nodes keyed by id; ``black[v]`` names v's black child symbol."""

    nodes: dict
    root: Hashable
    alphabet: tuple
    n: int
    black: dict | None = None

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        if self.root not in self.nodes:
            raise InputError("root is not a node")
        seen = set()
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v in seen:
                raise InputError(f"node {v!r} is reached twice; the tree must be acyclic")
            seen.add(v)
            node = self.nodes[v]
            if node.is_leaf:
                if node.children:
                    raise InputError(f"leaf {v!r} has children")
                continue
            if not 0 <= node.position < self.n:
                raise InputError(f"node {v!r} queries position {node.position} outside 0..{self.n - 1}")
            if not node.children:
                raise InputError(f"internal node {v!r} has no children")
            for sym, c in node.children.items():
                if sym not in self.alphabet:
                    raise InputError(f"symbol {sym!r} at node {v!r} is not in the alphabet")
                if c not in self.nodes:
                    raise InputError(f"child {c!r} of {v!r} is not a node")
                stack.append(c)
        if seen != set(self.nodes):
            raise InputError("some nodes are unreachable from the root")
        if self.black is not None:
            for v, sym in self.black.items():
                if v not in self.nodes or self.nodes[v].is_leaf or sym not in self.nodes[v].children:
                    raise InvalidColoring(f"black edge ({v!r}, {sym!r}) is not an edge of the tree")

    def internal(self) -> list:
        """Internal nodes, children before parents."""
        order = []

        def visit(v):
            for c in self.nodes[v].children.values():
                visit(c)
            if not self.nodes[v].is_leaf:
                order.append(v)

        visit(self.root)
        return order

    def leaves(self) -> list:
        return [v for v in self._preorder() if self.nodes[v].is_leaf]

    def _preorder(self) -> list:
        out = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(list(self.nodes[v].children.values())))
        return out

    def children(self, v) -> list:
        return list(self.nodes[v].children.values())

    def path(self, x: Sequence) -> list:
        """Nodes visited on input ``x``, root to leaf."""
        v = self.root
        out = [v]
        while not self.nodes[v].is_leaf:
            node = self.nodes[v]
            sym = x[node.position]
            if sym not in node.children:
                raise InputError(f"input {tuple(x)} leaves the tree at node {v!r}")
            v = node.children[sym]
            out.append(v)
        return out

    def evaluate(self, x: Sequence):
        return self.nodes[self.path(x)[-1]].output

    def depth(self) -> int:
        def d(v):
            node = self.nodes[v]
            return 0 if node.is_leaf else 1 + max(d(c) for c in node.children.values())

        return d(self.root)

    def red_count(self) -> int:
        """Largest number of red (non-black) edges on a root-to-leaf path."""
        black = self.black or {}

        def g(v):
            node = self.nodes[v]
            if node.is_leaf:
                return 0
            return max(g(c) + (0 if black.get(v) == s else 1) for s, c in node.children.items())

        return g(self.root)

    def domain(self, full: bool = False, limit: int = 4096) -> tuple:
        """Inputs reaching every leaf.

        With ``full=True`` every string over the alphabet that stays inside
        the tree is listed (when there are at most ``limit``); otherwise one
        representative per leaf, with unqueried positions set to the first
        symbol.
        """
        if full:
            if len(self.alphabet) ** self.n > limit:
                raise InputError("domain too large to enumerate")
            out = []
            for x in itertools.product(self.alphabet, repeat=self.n):
                try:
                    self.path(x)
                except InputError:
                    continue
                out.append(x)
            return tuple(out)
        reps = []

        def walk(v, fixed):
            node = self.nodes[v]
            if node.is_leaf:
                reps.append(tuple(fixed.get(i, self.alphabet[0]) for i in range(self.n)))
                return
            for sym, c in node.children.items():
                if node.position in fixed and fixed[node.position] != sym:
                    continue
                walk(c, {**fixed, node.position: sym})

        walk(self.root, {})
        return tuple(reps)


# ---------------------------------------------------------------------------
# tree constructors


def complete_tree(depth: int, alphabet: Sequence = (0, 1), positions: Sequence[int] | None = None) -> DecisionTree:
    """Tree querying ``positions[d]`` at depth ``d``; leaves output the queried string."""
    alphabet = tuple(alphabet)
    positions = list(range(depth)) if positions is None else list(positions)
    nodes = {}

    def build(prefix):
        vid = "r" + "".join(f".{s}" for s in prefix)
        if len(prefix) == depth:
            nodes[vid] = Node(output=tuple(prefix))
        else:
            nodes[vid] = Node(position=positions[len(prefix)],
                              children={s: build(prefix + (s,)) for s in alphabet})
        return vid

    root = build(())
    return DecisionTree(nodes, root, alphabet, max(positions, default=-1) + 1)


def path_tree(depth: int, alphabet: Sequence = (0, 1)) -> DecisionTree:
    """Query ``x_0, x_1, ...`` while the answer is the first symbol; all continuing edges black."""
    alphabet = tuple(alphabet)
    nodes = {}
    black = {}
    for d in range(depth):
        kids = {}
        for s in alphabet:
            if s == alphabet[0] and d < depth - 1:
                kids[s] = f"p{d + 1}"
            else:
                kids[s] = f"leaf{d}.{s}"
                nodes[kids[s]] = Node(output=(d, s))
        nodes[f"p{d}"] = Node(position=d, children=kids)
        black[f"p{d}"] = alphabet[0]
    return DecisionTree(nodes, "p0", alphabet, depth, black)


def random_tree(rng: np.random.Generator, max_depth: int = 4, alphabet: Sequence = (0, 1, 2),
                n: int | None = None, leaf_prob: float = 0.3, colored: bool = True) -> DecisionTree:
    """Random tree; each internal node queries an unused position and has 1..|alphabet| children."""
    alphabet = tuple(alphabet)
    n = max_depth if n is None else n
    nodes = {}
    black = {}
    counter = itertools.count()

    def build(depth, used):
        vid = f"v{next(counter)}"
        free = [i for i in range(n) if i not in used]
        if depth == max_depth or not free or (depth > 0 and rng.random() < leaf_prob):
            nodes[vid] = Node(output=vid)
            return vid
        pos = int(rng.choice(free))
        k = int(rng.integers(1, len(alphabet) + 1))
        syms = [alphabet[i] for i in sorted(rng.choice(len(alphabet), size=k, replace=False))]
        kids = {s: build(depth + 1, used | {pos}) for s in syms}
        nodes[vid] = Node(position=pos, children=kids)
        if colored:
            black[vid] = syms[int(rng.integers(0, k))]
        return vid

    root = build(0, frozenset())
    return DecisionTree(nodes, root, alphabet, n, black if colored else None)


# ---------------------------------------------------------------------------
# weighting schemes


@dataclass(eq=False)
class WeightingScheme:
    weights: dict
    X: dict
    Y: dict
    duals: dict = field(default_factory=dict)

    def root_weight(self, T: DecisionTree) -> float:
        return float(self.weights[T.root])


@dataclass
class SchemeReport:
    leaf_weight: float
    psd: float
    offdiag: float
    descent: float
    negative_weight: float
    tol: float

    @property
    def worst(self) -> float:
        return max(self.leaf_weight, self.psd, self.offdiag, self.descent, self.negative_weight)

    @property
    def ok(self) -> bool:
        return self.worst <= self.tol

    def as_dict(self) -> dict:
        return {"leaf_weight": self.leaf_weight, "psd": self.psd, "offdiag": self.offdiag,
                "descent": self.descent, "negative_weight": self.negative_weight, "ok": self.ok}


def validate_scheme(T: DecisionTree, S: WeightingScheme, tol: float = 1e-8) -> SchemeReport:
    """Worst violation of each weighting-scheme condition.

    ``psd`` is the most negative certificate eigenvalue beyond the 1e-9
    clip, ``offdiag`` the worst ``|X - Y - 1|`` off the diagonal and
    ``descent`` the worst ``X[c,c] + Y[c,c] - (w_v - w_c)``.
    """
    leaf = neg = psd = off = desc = 0.0
    for v, node in T.nodes.items():
        w = S.weights.get(v, 0.0)
        neg = max(neg, -w)
        if node.is_leaf:
            leaf = max(leaf, abs(w))
            continue
        kids = list(node.children.values())
        k = len(kids)
        X = np.asarray(S.X[v], dtype=float)
        Y = np.asarray(S.Y[v], dtype=float)
        if X.shape != (k, k) or Y.shape != (k, k):
            raise InvalidScheme(f"certificates at node {v!r} do not match its {k} children")
        for M in (X, Y):
            lam = np.linalg.eigvalsh((M + M.T) / 2)
            psd = max(psd, -(lam[0] + 1e-9))
        D = X - Y
        mask = ~np.eye(k, dtype=bool)
        if k > 1:
            off = max(off, float(np.max(np.abs(D[mask] - 1.0))))
        for j, c in enumerate(kids):
            desc = max(desc, X[j, j] + Y[j, j] - (w - S.weights.get(c, 0.0)))
    return SchemeReport(leaf, max(psd, 0.0), off, max(desc, 0.0), neg, tol)


def binary_analytic(wa: float, wb: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Closed-form optimum for a node with two children.

    ``w_v`` is the top eigenvalue of ``[[wa, 1], [1, wb]]``; since
    ``(w_v - wa)(w_v - wb) = 1`` the rank-one ``X = x x^T`` with
    ``x = (sqrt(w_v - wa), sqrt(w_v - wb))`` and ``Y = 0`` certify it.
    """
    if wa < 0 or wb < 0:
        raise InputError("child weights must be nonnegative")
    wv = (wa + wb + math.sqrt((wa - wb) ** 2 + 4)) / 2
    x = np.array([math.sqrt(wv - wa), math.sqrt(wv - wb)])
    return wv, np.outer(x, x), np.zeros((2, 2))


@dataclass
class NodeSolution:
    weight: float
    X: np.ndarray
    Y: np.ndarray
    gamma: np.ndarray
    lower: float
    iterations: int

    @property
    def gap(self) -> float:
        return self.weight - self.lower


def dual_value(child_weights, gamma) -> float:
    """Lower bound ``lambda_max(diag(w) + Gamma)`` for zero-diagonal ``||Gamma|| <= 1``."""
    w = np.asarray(child_weights, dtype=float)
    return float(np.linalg.eigvalsh(np.diag(w) + gamma)[-1])


def _sym_basis(k: int, diagonal: bool = True):
    idx = [(i, j) for i in range(k) for j in range(i if diagonal else i + 1, k)]
    A = np.zeros((len(idx), k, k))
    for p, (i, j) in enumerate(idx):
        A[p, i, j] = A[p, j, i] = 1.0
    return idx, A


def _barrier_minimise(c, blocks, z0, N, target, max_iter):
    """Minimise ``c.z`` over ``z = z0 + N y`` with ``M0 + sum_q z_q dM[q]`` PSD for every block.

    Path-following with damped Newton steps from a strictly feasible
    ``z0``; stops once ``nu/sigma <= target``. Returns the final iterate,
    the number of Newton steps and whether the target was reached.
    """
    nu = sum(M0.shape[0] for M0, _ in blocks)
    cy = N.T @ c
    dMy = [np.einsum("qa,qij->aij", N, dM) for _, dM in blocks]

    def mats(y):
        z = z0 + N @ y
        return [M0 + np.einsum("q,qij->ij", z, dM) for M0, dM in blocks]

    def feasible(y):
        try:
            for M in mats(y):
                np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            return False
        return True

    y = np.zeros(N.shape[1])
    sigma, iters = 1.0, 0
    while True:
        for _ in range(100):
            g = sigma * cy
            H = np.zeros((y.size, y.size))
            for M, D in zip(mats(y), dMy):
                MD = np.linalg.solve(M, D)
                g -= np.einsum("aii->a", MD)
                H += np.einsum("aij,bji->ab", MD, MD)
            # Jacobi scaling and a pseudo-inverse solve: near the optimum the
            # active constraints make H badly scaled
            sc = 1 / np.sqrt(np.maximum(np.diag(H), 1e-300))
            ev, V = np.linalg.eigh(H * np.outer(sc, sc))
            keep = ev > 1e-13 * ev[-1]
            step = -sc * (V[:, keep] @ ((V[:, keep].T @ (sc * g)) / ev[keep]))
            dec = float(-g @ step)
            iters += 1
            if dec <= 1e-12 or iters >= max_iter:
                break
            # damped step; only feasibility is tested, which avoids roundoff
            # in comparing large barrier values
            a = 1.0 if dec < 0.0625 else 1 / (1 + math.sqrt(dec))
            while a > 1e-14 and not feasible(y + a * step):
                a /= 2
            y = y + a * step
        if nu / sigma <= target:
            return z0 + N @ y, iters, True
        if iters >= max_iter:
            return z0 + N @ y, iters, False
        sigma *= 8.0


def _node_primal(w, target, max_iter):
    """Upper end: strictly feasible ``(X, Y)`` with ``Y = offdiag(X) - (J - I) + diag(d)``."""
    k = w.size
    idx, A = _sym_basis(k)
    nx = len(idx)
    nz = nx + k + 1  # z = (X entries, diag Y, t)
    dX = np.zeros((nz, k, k))
    dX[:nx] = A
    dY = np.zeros((nz, k, k))
    for p, (i, j) in enumerate(idx):
        if i != j:
            dY[p] = A[p]
    for c in range(k):
        dY[nx + c, c, c] = 1.0
    # slacks t - w_c - X_cc - d_c as 1x1 blocks
    dS = np.zeros((nz, k, k))
    dS[-1] = np.eye(k)
    for c in range(k):
        dS[idx.index((c, c)), c, c] = -1.0
        dS[nx + c, c, c] = -1.0
    blocks = [(np.zeros((k, k)), dX), (-(np.ones((k, k)) - np.eye(k)), dY), (-np.diag(w), dS)]
    X0 = np.eye(k) + np.ones((k, k))
    z0 = np.zeros(nz)
    z0[:nx] = [X0[i, j] for i, j in idx]
    z0[nx:nx + k] = 1.0
    z0[-1] = float(np.max(w)) + 4.0
    c = np.zeros(nz)
    c[-1] = 1.0
    z, iters, done = _barrier_minimise(c, blocks, z0, np.eye(nz), target, max_iter)
    X = np.einsum("p,pij->ij", z[:nx], A)
    Y = X - np.diag(np.diag(X)) - (np.ones((k, k)) - np.eye(k)) + np.diag(z[nx:nx + k])
    return X, Y, float(np.max(w + np.diag(X) + np.diag(Y))), iters, done


def _node_dual(w, target, max_iter):
    """Lower end: strictly feasible ``lam`` (summing to 1) and zero-diagonal ``G`` with ``diag(lam) -+ G`` PSD."""
    k = w.size
    idx, A = _sym_basis(k, diagonal=False)
    ng = len(idx)
    nz = k + ng  # z = (lam, G entries)
    L = np.zeros((nz, k, k))
    for c in range(k):
        L[c, c, c] = 1.0
    G = np.zeros((nz, k, k))
    G[k:] = A
    blocks = [(np.zeros((k, k)), L - G), (np.zeros((k, k)), L + G)]
    z0 = np.concatenate([np.full(k, 1 / k), np.zeros(ng)])
    # null space of sum(lam) = const
    N = np.zeros((nz, nz - 1))
    N[:k, :k - 1] = np.linalg.svd(np.ones((1, k)))[2][1:].T
    N[k:, k - 1:] = np.eye(ng)
    c = -np.concatenate([w, 2 * np.ones(ng)])
    z, iters, done = _barrier_minimise(c, blocks, z0, N, target, max_iter)
    lam = z[:k]
    Gp = np.einsum("p,pij->ij", z[k:], A)
    return lam, Gp, float(lam @ w + Gp.sum()), iters, done


def solve_node_sdp(child_weights, tol: float = 1e-7, max_iter: int = 500) -> NodeSolution:
    """Minimise ``max_c (w_c + X[c,c] + Y[c,c])`` over PSD ``X, Y`` with ``X - Y = 1`` off the diagonal.

    Both the problem and its dual are solved by log-barrier Newton path
    following from strictly feasible starts, so each end of the returned
    bracket is certified by a feasible point. The dual point is a
    distribution ``lam`` and a zero-diagonal ``G`` with
    ``-diag(lam) <= G <= diag(lam)``; its value ``lam.w + 1^T G 1`` equals
    ``psi^T (diag(w) + Gamma) psi`` for ``psi = sqrt(lam)`` and
    ``Gamma = diag(psi)^-1 G diag(psi)^-1``, a zero-diagonal matrix of norm
    at most 1, hence is at most ``lambda_max(diag(w) + Gamma)``.

    Raises
    ------
    NoConvergence
        If the bracket is wider than ``tol`` after ``max_iter`` Newton steps
        per side; the exception carries the bracket.
    """
    w = np.asarray(child_weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InputError("need at least one child weight")
    if np.any(w < 0):
        raise InputError("child weights must be nonnegative")
    k = w.size
    if k == 1:
        z = np.zeros((1, 1))
        return NodeSolution(float(w[0]), z, z.copy(), z.copy(), float(w[0]), 0)
    target = min(tol, 1e-7) / 10
    X, Y, upper, it_p, _ = _node_primal(w, target, max_iter)
    lam, Gp, lower, it_d, _ = _node_dual(w, target, max_iter)
    r = 1 / np.sqrt(lam)
    gamma = Gp * np.outer(r, r)
    nrm = np.linalg.norm(gamma, 2)
    if nrm > 1:
        gamma = gamma / nrm
    lower = max(lower, dual_value(w, gamma))
    sol = NodeSolution(upper, X, Y, gamma, lower, it_p + it_d)
    if sol.gap > tol:
        err = NoConvergence(f"node SDP bracket [{lower:.10g}, {upper:.10g}] wider than {tol:g}")
        err.bracket = (lower, upper)
        raise err
    return sol


def wdt(T: DecisionTree, tol: float = 1e-7) -> tuple[WeightingScheme, float]:
    """Optimal weighting scheme, computed leaves first."""
    weights = {v: 0.0 for v in T.nodes}
    Xs, Ys, duals = {}, {}, {}
    for v in T.internal():
        kids = T.children(v)
        sol = solve_node_sdp([weights[c] for c in kids], tol)
        weights[v] = sol.weight
        Xs[v], Ys[v] = sol.X, sol.Y
        duals[v] = (sol.lower, sol.weight)
    S = WeightingScheme(weights, Xs, Ys, duals)
    return S, weights[T.root]


def analytic_scheme(T: DecisionTree) -> tuple[WeightingScheme, float]:
    """Optimal scheme for trees whose nodes have at most two children."""
    weights = {v: 0.0 for v in T.nodes}
    Xs, Ys = {}, {}
    for v in T.internal():
        kids = T.children(v)
        if len(kids) == 1:
            weights[v] = weights[kids[0]]
            Xs[v] = Ys[v] = np.zeros((1, 1))
        elif len(kids) == 2:
            weights[v], Xs[v], Ys[v] = binary_analytic(weights[kids[0]], weights[kids[1]])
        else:
            raise InputError(f"node {v!r} has {len(kids)} children")
    return WeightingScheme(weights, Xs, Ys), weights[T.root]


def bt20_scheme(T: DecisionTree, depth: int | None = None, red: int | None = None) -> WeightingScheme:
    """Explicit scheme from a red/black colouring.

    With ``alpha = sqrt(depth/red)``, child ``c`` gets ``v_c = 1/sqrt(alpha)``
    if black and ``sqrt(alpha)`` if red; ``X = v v^T`` and ``Y`` is
    ``alpha - 1`` between distinct red children (and on their diagonal).
    Black edges then cost ``1/alpha`` and red ones ``2 alpha - 1``.
    """
    if T.black is None:
        raise InvalidColoring("tree has no colouring")
    Td = T.depth() if depth is None else depth
    G = max(T.red_count(), 1) if red is None else red
    if G < 1 or Td < G:
        raise InvalidColoring(f"need 1 <= G <= T, got G = {G}, T = {Td}")
    alpha = math.sqrt(Td / G)
    weights = {v: 0.0 for v in T.nodes}
    Xs, Ys = {}, {}
    for v in T.internal():
        node = T.nodes[v]
        syms = list(node.children)
        is_black = np.array([T.black.get(v) == s for s in syms])
        vec = np.where(is_black, 1 / math.sqrt(alpha), math.sqrt(alpha))
        X = np.outer(vec, vec)
        red_mask = ~is_black
        Y = (alpha - 1) * np.outer(red_mask, red_mask).astype(float)
        cost = np.diag(X) + np.diag(Y)
        weights[v] = float(max(weights[c] + cost[j] for j, c in enumerate(node.children.values())))
        Xs[v], Ys[v] = X, Y
    return WeightingScheme(weights, Xs, Ys)


# ---------------------------------------------------------------------------
# conversion to a composition


def node_hyperedge(T: DecisionTree, v, X: np.ndarray, Y: np.ndarray, domain: Sequence,
                   paths: Sequence[list]) -> Hyperedge:
    """Function-evaluation hyperedge on ``{v} + children(v)`` with witnesses from ``X, Y``.

    With ``X = U+^H U+``, ``Y = U-^H U-`` and columns ``u^+-_c``, an input
    reaching ``v`` with answer ``a`` gets
    ``w^+- = (u^+_a + (+-u^-_a)) (x) (e_blank +- e_a)``; inputs not
    reaching ``v`` get zero witnesses, no flow and zero potential. The
    oracle swaps the blank with the queried symbol.
    """
    node = T.nodes[v]
    syms = list(node.children)
    kids = list(node.children.values())
    verts = (v,) + tuple(kids)
    m = len(domain)
    k = len(kids)
    Up = psd_factor(X)
    Um = psd_factor(Y)
    rows = max(Up.shape[0], Um.shape[0])
    Up = np.vstack([Up, np.zeros((rows - Up.shape[0], k))])
    Um = np.vstack([Um, np.zeros((rows - Um.shape[0], k))])
    nsym = len(T.alphabet) + 1
    delta = np.zeros((m, k + 1))
    pot = np.zeros((m, k + 1))
    plus = np.zeros((m, 2 * rows, nsym), dtype=complex)
    minus = np.zeros((m, 2 * rows, nsym), dtype=complex)
    swapped = []
    for i, x in enumerate(domain):
        sym = x[node.position]
        swapped.append(1 + T.alphabet.index(sym))
        if v not in paths[i]:
            continue
        j = syms.index(sym)
        delta[i, 0], delta[i, 1 + j] = 1.0, -1.0
        pot[i, 0] = pot[i, 1 + j] = 1.0
        e_p = np.zeros(nsym)
        e_m = np.zeros(nsym)
        e_p[0] = e_m[0] = 1.0
        e_p[swapped[-1]] = 1.0
        e_m[swapped[-1]] = -1.0
        plus[i] = np.outer(np.concatenate([Up[:, j], Um[:, j]]), e_p)
        minus[i] = np.outer(np.concatenate([Up[:, j], -Um[:, j]]), e_m)
    oracle = symbol_swap_oracle(m, nsym, swapped).tiled(2 * rows)
    H = HyperedgeProblem(verts, tuple(domain), delta, pot, oracle)
    W = WitnessFamily(plus.reshape(m, -1), minus.reshape(m, -1))
    return Hyperedge(H, W, label=str(v))


def tree_instance(T: DecisionTree, S: WeightingScheme, domain: Sequence | None = None) -> HypergraphInstance:
    rep = validate_scheme(T, S)
    if not rep.ok:
        raise InvalidScheme(f"weighting scheme violates its conditions by {rep.worst:.3e}")
    D = tuple(tuple(x) for x in (domain if domain is not None else T.domain()))
    paths = [T.path(x) for x in D]
    order = T._preorder()
    edges = [node_hyperedge(T, v, S.X[v], S.Y[v], D, paths) for v in order if not T.nodes[v].is_leaf]
    boundary = (T.root,) + tuple(v for v in order if T.nodes[v].is_leaf and v != T.root)
    return HypergraphInstance(tuple(order), boundary, edges)


def tree_to_composition(T: DecisionTree, S: WeightingScheme, domain: Sequence | None = None
                        ) -> tuple[HypergraphInstance, ComposedResult]:
    """Compose the per-node hyperedges; sizes are ``2 sum (X + Y)[c,c]`` along the path."""
    inst = tree_instance(T, S, domain)
    if not inst.edges:
        m = len(domain) if domain is not None else len(T.domain())
        D = tuple(domain) if domain is not None else T.domain()
        H = HyperedgeProblem((T.root,), D, np.zeros((m, 1)), np.ones((m, 1)), symbol_swap_oracle(m, 1, [0] * m))
        from .reflection import check_feasibility
        W = WitnessFamily(np.zeros((m, 1)), np.zeros((m, 1)))
        return inst, ComposedResult(H, W, check_feasibility(H, W, 1e-8), inst)
    return inst, compose(inst)
