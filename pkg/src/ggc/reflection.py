"""State-conversion and state-reflection problems and their witnesses.

Problems are stored input-major: row ``i`` of every state array belongs to
``domain[i]``. Oracles are block-diagonal (up to a fixed coordinate
permutation), which keeps composed problems with thousands of coordinates
cheap to apply. Witnesses for a conversion problem with oracle ``O`` on a
space of dimension ``d`` live in ``k`` copies of that space, copy-major, and
the oracle acts on them as ``kron(I_k, O)``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    FractionMismatch,
    InfeasibleInput,
    InputError,
    InvalidWitness,
    ScheduleMismatch,
    SingularScaling,
)
from .numerics import min_norm_solve, null_space, orthonormal_basis

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
STRUCT_TOL = 1e-9


# ---------------------------------------------------------------------------
# oracles


@dataclass(eq=False)
class BlockOracle:
    """Per-input operator ``P^T (B_1 + ... + B_r) P`` on ``C^dim``.

    ``segments`` holds runs of equally sized blocks as arrays of shape
    ``(m, nb, d, d)``; ``perm`` (optional) is the coordinate order fed to the
    block diagonal, i.e. ``apply(w) = unpermute(blocks(w[perm]))``.
    """

    segments: tuple
    perm: np.ndarray | None = None

    def __post_init__(self):
        segs = []
        for s in self.segments:
            s = np.asarray(s, dtype=complex)
            if s.ndim != 4 or s.shape[2] != s.shape[3]:
                raise DimensionMismatch(f"bad oracle segment shape {s.shape}")
            segs.append(s)
        ms = {s.shape[0] for s in segs}
        if len(ms) > 1:
            raise DimensionMismatch("oracle segments disagree on the number of inputs")
        self.segments = tuple(segs)
        if self.perm is not None:
            self.perm = np.asarray(self.perm, dtype=int)
            if sorted(self.perm.tolist()) != list(range(self.dim)):
                raise DimensionMismatch("oracle permutation is not a permutation of its coordinates")

    @classmethod
    def from_dense(cls, mats) -> "BlockOracle":
        A = np.asarray(mats, dtype=complex)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise DimensionMismatch(f"expected (m, d, d) oracle matrices, got {A.shape}")
        return cls((A[:, None],))

    @classmethod
    def empty(cls, m: int) -> "BlockOracle":
        return cls((np.zeros((m, 0, 0, 0), dtype=complex),))

    @property
    def m(self) -> int:
        return self.segments[0].shape[0] if self.segments else 0

    @property
    def dim(self) -> int:
        return sum(s.shape[1] * s.shape[2] for s in self.segments)

    def _blockwise(self, W: np.ndarray, adjoint: bool = False) -> np.ndarray:
        out = np.empty_like(W)
        pos = 0
        sub = "xbji,xbj->xbi" if adjoint else "xbij,xbj->xbi"
        for s in self.segments:
            m, nb, d, _ = s.shape
            size = nb * d
            if size:
                chunk = W[:, pos:pos + size].reshape(W.shape[0], nb, d)
                mats = s.conj() if adjoint else s
                out[:, pos:pos + size] = np.einsum(sub, mats, chunk).reshape(W.shape[0], size)
            pos += size
        return out

    def apply(self, W, adjoint: bool = False) -> np.ndarray:
        """Apply ``O_x`` (or ``O_x^H``) to row ``x`` of ``W``."""
        W = np.asarray(W, dtype=complex)
        if W.shape != (self.m, self.dim):
            raise DimensionMismatch(f"witness array {W.shape} does not match oracle ({self.m}, {self.dim})")
        if self.perm is None:
            return self._blockwise(W, adjoint)
        out = np.empty_like(W)
        out[:, self.perm] = self._blockwise(W[:, self.perm], adjoint)
        return out

    def dense(self, i: int) -> np.ndarray:
        """Explicit matrix of ``O`` for input index ``i``."""
        D = np.zeros((self.dim, self.dim), dtype=complex)
        pos = 0
        for s in self.segments:
            _, nb, d, _ = s.shape
            for b in range(nb):
                D[pos:pos + d, pos:pos + d] = s[i, b]
                pos += d
        if self.perm is not None:
            out = np.zeros_like(D)
            out[np.ix_(self.perm, self.perm)] = D
            return out
        return D

    def dense_all(self) -> np.ndarray:
        return np.stack([self.dense(i) for i in range(self.m)]) if self.m else np.zeros((0, self.dim, self.dim))

    def tiled(self, k: int) -> "BlockOracle":
        """``kron(I_k, O)``: ``k`` consecutive copies."""
        if k == 0:
            return BlockOracle.empty(self.m)
        if self.perm is None:
            return BlockOracle(self.segments * k)
        d = self.dim
        perm = np.concatenate([self.perm + j * d for j in range(k)])
        return BlockOracle(self.segments * k, perm)

    def select(self, rows) -> "BlockOracle":
        """Restrict to a subset of inputs."""
        rows = np.asarray(rows, dtype=int)
        return BlockOracle(tuple(s[rows] for s in self.segments), self.perm)

    def adjoint(self) -> "BlockOracle":
        return BlockOracle(tuple(np.swapaxes(s, 2, 3).conj() for s in self.segments), self.perm)

    def involution_defect(self) -> float:
        if self.dim == 0 or self.m == 0:
            return 0.0
        worst = 0.0
        for s in self.segments:
            if s.shape[1] == 0:
                continue
            sq = np.einsum("xbij,xbjk->xbik", s, s)
            worst = max(worst, float(np.max(np.abs(sq - np.eye(s.shape[2])))))
        return worst

    def unitarity_defect(self) -> float:
        worst = 0.0
        for s in self.segments:
            if s.shape[1] == 0 or self.m == 0:
                continue
            sq = np.einsum("xbji,xbjk->xbik", s.conj(), s)
            worst = max(worst, float(np.max(np.abs(sq - np.eye(s.shape[2])))))
        return worst


def direct_sum_oracles(oracles: Sequence[BlockOracle]) -> BlockOracle:
    """``O_1 + O_2 + ...`` on the concatenated coordinates."""
    oracles = [o for o in oracles if o.dim > 0]
    if not oracles:
        return BlockOracle(())
    if all(o.perm is None for o in oracles):
        return BlockOracle(tuple(s for o in oracles for s in o.segments))
    perms = []
    offset = 0
    for o in oracles:
        p = o.perm if o.perm is not None else np.arange(o.dim)
        perms.append(p + offset)
        offset += o.dim
    return BlockOracle(tuple(s for o in oracles for s in o.segments), np.concatenate(perms))


def swap_oracle(O: BlockOracle) -> BlockOracle:
    """``SWAP (O + O^H)`` on two copies, i.e. ``[[0, O^H], [O, 0]]``.

    Each block ``B`` of ``O`` is paired with its copy in the second half, so
    the result stays block diagonal after a coordinate permutation.
    """
    d = O.dim
    base = O.perm if O.perm is not None else np.arange(d)
    segs = []
    order = []
    pos = 0
    for s in O.segments:
        m, nb, k, _ = s.shape
        blk = np.zeros((m, nb, 2 * k, 2 * k), dtype=complex)
        blk[:, :, :k, k:] = np.swapaxes(s, 2, 3).conj()
        blk[:, :, k:, :k] = s
        segs.append(blk)
        for b in range(nb):
            idx = base[pos + b * k: pos + (b + 1) * k]
            order.append(np.concatenate([idx, idx + d]))
        pos += nb * k
    perm = np.concatenate(order) if order else np.zeros(0, dtype=int)
    return BlockOracle(tuple(segs), perm)


def reflection_oracle(projectors) -> BlockOracle:
    """``2 Pi_x - I`` for a stack of projectors."""
    P = np.asarray(projectors, dtype=complex)
    return BlockOracle.from_dense(2 * P - np.eye(P.shape[1]))


def symbol_swap_oracle(m: int, n_symbols: int, swapped: Sequence[int]) -> BlockOracle:
    """Permutation oracle on ``C^{n_symbols}`` swapping coordinate 0 with ``swapped[x]``.

    Coordinate 0 plays the role of the blank symbol; ``swapped[x] = 0`` gives
    the identity.
    """
    mats = np.zeros((m, n_symbols, n_symbols), dtype=complex)
    for i, j in enumerate(swapped):
        perm = np.arange(n_symbols)
        perm[0], perm[j] = j, 0
        mats[i, np.arange(n_symbols), perm] = 1.0
    return BlockOracle.from_dense(mats)


# ---------------------------------------------------------------------------
# problems and witnesses


def _as_states(a, m: int, name: str) -> np.ndarray:
    A = np.asarray(a, dtype=complex)
    if A.ndim == 1 and m == 0:
        A = A.reshape(0, 0)
    if A.ndim != 2 or A.shape[0] != m:
        raise DimensionMismatch(f"{name} must have shape (len(domain), dim); got {A.shape}")
    return A


@dataclass(eq=False)
class StateConversionProblem:
    """Map ``sigma_x`` to ``tau_x`` with access to the oracle ``O_x``."""

    domain: tuple
    sigma: np.ndarray
    tau: np.ndarray
    oracle: BlockOracle

    def __post_init__(self):
        self.domain = tuple(self.domain)
        m = len(self.domain)
        self.sigma = _as_states(self.sigma, m, "sigma")
        self.tau = _as_states(self.tau, m, "tau")
        if self.oracle.m not in (0, m) or (self.oracle.m == 0 and self.oracle.dim and m):
            raise DimensionMismatch("oracle and domain sizes disagree")

    @property
    def m(self) -> int:
        return len(self.domain)

    def is_unit_norm(self, tol: float = STRUCT_TOL) -> bool:
        return bool(np.all(np.abs(np.linalg.norm(self.sigma, axis=1) - 1) <= tol)
                    and np.all(np.abs(np.linalg.norm(self.tau, axis=1) - 1) <= tol))


@dataclass(eq=False)
class StateReflectionProblem:
    """Reflect ``sigma_plus_x`` to itself and ``sigma_minus_x`` to minus itself."""

    domain: tuple
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    oracle: BlockOracle

    def __post_init__(self):
        self.domain = tuple(self.domain)
        m = len(self.domain)
        self.sigma_plus = _as_states(self.sigma_plus, m, "sigma_plus")
        self.sigma_minus = _as_states(self.sigma_minus, m, "sigma_minus")
        if self.sigma_plus.shape != self.sigma_minus.shape:
            raise DimensionMismatch("positive and negative states differ in dimension")
        if m and self.oracle.m != m and self.oracle.dim:
            raise DimensionMismatch("oracle and domain sizes disagree")
        overlap = np.abs(np.sum(self.sigma_plus.conj() * self.sigma_minus, axis=1))
        scale = np.maximum(np.linalg.norm(self.sigma_plus, axis=1) * np.linalg.norm(self.sigma_minus, axis=1), 1.0)
        if m and np.max(overlap / scale) > 1e-8:
            raise InputError("positive and negative states are not orthogonal")
        if self.oracle.involution_defect() > 1e-9:
            raise InputError("oracle does not square to the identity")

    @property
    def m(self) -> int:
        return len(self.domain)

    @property
    def state_dim(self) -> int:
        return self.sigma_plus.shape[1]

    def index(self, x) -> int:
        return self.domain.index(x)


@dataclass(eq=False, init=False)
class HyperedgeProblem(StateReflectionProblem):
    """State-reflection problem whose states are a net-flow and a potential.

    ``delta_x`` sums to zero and ``potential_x`` is constant on its support.
    """

    vertices: tuple

    def __init__(self, vertices, domain, delta, potential, oracle: BlockOracle):
        self.vertices = tuple(vertices)
        super().__init__(tuple(domain), delta, potential, oracle)
        if self.state_dim != len(self.vertices) and self.m:
            raise DimensionMismatch("net-flow dimension does not match the vertex set")
        d = self.sigma_plus
        if self.m and np.max(np.abs(d.sum(axis=1))) > STRUCT_TOL * max(1.0, np.abs(d).max()):
            raise InputError("net-flow does not sum to zero")
        if self.m and self.state_dim:
            supp = np.abs(d) > STRUCT_TOL
            U = self.sigma_minus
            ref = U[np.arange(self.m), np.argmax(supp, axis=1)]
            spread = np.max(np.where(supp, np.abs(U - ref[:, None]), 0.0), axis=1)
            bad = np.nonzero(spread > 1e-8)[0]
            if bad.size:
                raise InputError(f"potential is not constant on the flow support for input {self.domain[bad[0]]!r}")

    @property
    def delta(self) -> np.ndarray:
        return self.sigma_plus.real

    @property
    def potential(self) -> np.ndarray:
        return self.sigma_minus.real

    @property
    def vertex_index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @classmethod
    def from_reflection(cls, vertices, R: StateReflectionProblem) -> "HyperedgeProblem":
        return cls(vertices, R.domain, R.sigma_plus, R.sigma_minus, R.oracle)


@dataclass(eq=False)
class WitnessFamily:
    """Positive and negative witnesses, one row per input."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        self.plus = np.asarray(self.plus, dtype=complex)
        self.minus = np.asarray(self.minus, dtype=complex)
        if self.plus.shape != self.minus.shape or self.plus.ndim != 2:
            raise DimensionMismatch("positive and negative witness arrays must share a 2-d shape")

    @property
    def sizes_plus(self) -> np.ndarray:
        return np.sum(np.abs(self.plus) ** 2, axis=1)

    @property
    def sizes_minus(self) -> np.ndarray:
        return np.sum(np.abs(self.minus) ** 2, axis=1)

    @property
    def dim(self) -> int:
        return self.plus.shape[1]

    def scaled(self, a_plus, a_minus) -> "WitnessFamily":
        ap = np.broadcast_to(np.asarray(a_plus, dtype=complex), (self.plus.shape[0],))
        am = np.broadcast_to(np.asarray(a_minus, dtype=complex), (self.plus.shape[0],))
        return WitnessFamily(ap[:, None] * self.plus, am[:, None] * self.minus)

    def select(self, rows) -> "WitnessFamily":
        return WitnessFamily(self.plus[rows], self.minus[rows])


def direct_sum_witnesses(families: Sequence[WitnessFamily]) -> WitnessFamily:
    return WitnessFamily(np.hstack([f.plus for f in families]), np.hstack([f.minus for f in families]))


def same_problem(a, b, tol: float = 1e-12) -> bool:
    """Field-by-field comparison used in round-trip tests."""
    if type(a) is not type(b):
        return False
    if isinstance(a, WitnessFamily):
        return np.allclose(a.plus, b.plus, atol=tol) and np.allclose(a.minus, b.minus, atol=tol)
    if a.domain != b.domain:
        return False
    if isinstance(a, HyperedgeProblem) and a.vertices != b.vertices:
        return False
    for name in ("sigma", "tau", "sigma_plus", "sigma_minus"):
        if hasattr(a, name) and not np.allclose(getattr(a, name), getattr(b, name), atol=tol):
            return False
    return np.allclose(a.oracle.dense_all(), b.oracle.dense_all(), atol=tol)


# ---------------------------------------------------------------------------
# feasibility


@dataclass
class FeasibilityReport:
    max_violation: float
    worst: tuple | None
    residuals: dict = field(repr=False)
    tol: float = FEAS_TOL
    normal_form_defect: float = 0.0

    @property
    def ok(self) -> bool:
        return bool(self.max_violation <= self.tol)

    def as_dict(self) -> dict:
        return {
            "feasible": self.ok,
            "max_violation": self.max_violation,
            "worst": list(self.worst) if self.worst is not None else None,
            "tol": self.tol,
            "normal_form_defect": self.normal_form_defect,
        }


def _gram(A, B) -> np.ndarray:
    return A.conj() @ B.T


def normal_form_defect(problem: StateReflectionProblem, W: WitnessFamily) -> float:
    if problem.m == 0 or W.dim == 0:
        return 0.0
    dp = problem.oracle.apply(W.plus) - W.plus
    dm = problem.oracle.apply(W.minus) + W.minus
    return float(max(np.abs(dp).max(), np.abs(dm).max()))


def check_feasibility(problem, witnesses, tol: float = FEAS_TOL) -> FeasibilityReport:
    """Check the adversary-bound equality constraints for every pair of inputs.

    For a state-reflection problem the constraints are, for signs ``s, t``,
    ``<w^s_x|(I - O_x^H O_y)|w^t_y> = (1 - s t) <sigma^s_x|sigma^t_y>``.
    For a state-conversion problem with witnesses in ``k`` copies of the
    oracle space they read
    ``<w_x|(I - kron(I_k, O_x^H O_y))|w_y> = <sigma_x|sigma_y> - <tau_x|tau_y>``.

    Returns
    -------
    FeasibilityReport
        ``max_violation`` is the largest absolute residual, ``worst`` the
        ``(x, y, s, t)`` where it occurs and ``residuals`` the full residual
        matrices keyed by sign pair.
    """
    if isinstance(problem, StateConversionProblem):
        return _check_conversion(problem, np.asarray(witnesses, dtype=complex), tol)
    W = witnesses
    if problem.m == 0:
        return FeasibilityReport(0.0, None, {}, tol)
    if W.plus.shape[0] != problem.m or W.dim != problem.oracle.dim:
        raise DimensionMismatch(
            f"witnesses {W.plus.shape} do not fit the problem ({problem.m} inputs, oracle dim {problem.oracle.dim})"
        )
    ws = {"+": W.plus, "-": W.minus}
    ows = {k: problem.oracle.apply(v) for k, v in ws.items()}
    states = {"+": problem.sigma_plus, "-": problem.sigma_minus}
    residuals = {}
    best = (-1.0, None)
    for s in "+-":
        for t in "+-":
            lhs = _gram(ws[s], ws[t]) - _gram(ows[s], ows[t])
            rhs = 2.0 * _gram(states[s], states[t]) if s != t else 0.0
            res = lhs - rhs
            residuals[(s, t)] = res
            k = np.unravel_index(np.argmax(np.abs(res)), res.shape)
            v = float(np.abs(res[k]))
            if v > best[0]:
                best = (v, (problem.domain[k[0]], problem.domain[k[1]], s, t))
    return FeasibilityReport(best[0], best[1], residuals, tol, normal_form_defect(problem, W))


def _check_conversion(P: StateConversionProblem, w: np.ndarray, tol: float) -> FeasibilityReport:
    if P.m == 0:
        return FeasibilityReport(0.0, None, {}, tol)
    d = P.oracle.dim
    if w.ndim != 2 or w.shape[0] != P.m or (d == 0 and w.shape[1]) or (d and w.shape[1] % d):
        raise DimensionMismatch(f"conversion witnesses {w.shape} are not copies of a {d}-dim oracle space")
    k = w.shape[1] // d if d else 0
    Ow = P.oracle.tiled(k).apply(w) if k else w
    res = (_gram(w, w) - _gram(Ow, Ow)) - (_gram(P.sigma, P.sigma) - _gram(P.tau, P.tau))
    idx = np.unravel_index(np.argmax(np.abs(res)), res.shape)
    return FeasibilityReport(float(np.abs(res[idx])), (P.domain[idx[0]], P.domain[idx[1]]), {"": res}, tol)


def normalize_witnesses(problem: StateReflectionProblem, W: WitnessFamily, tol: float = FEAS_TOL) -> WitnessFamily:
    """Project witnesses onto the matching eigenspaces of the oracle.

    Warns when the discarded part exceeds ``tol``. The projection does not
    preserve feasibility for every family, so callers re-check afterwards.
    """
    Op = problem.oracle.apply(W.plus)
    Om = problem.oracle.apply(W.minus)
    plus = (W.plus + Op) / 2
    minus = (W.minus - Om) / 2
    lost = max(np.abs(W.plus - plus).max(initial=0.0), np.abs(W.minus - minus).max(initial=0.0))
    if lost > tol:
        warnings.warn(f"witnesses were not in eigenspace normal form; discarded component {lost:.3e}", stacklevel=2)
    return WitnessFamily(plus, minus)


def require_feasible(problem, witnesses, tol: float = 1e-8, what: str = "witnesses") -> FeasibilityReport:
    rep = check_feasibility(problem, witnesses, tol)
    if not rep.ok:
        raise InfeasibleInput(f"{what} violate the feasibility constraints by {rep.max_violation:.3e} at {rep.worst}")
    return rep


# ---------------------------------------------------------------------------
# reformulation


def to_reflection(P: StateConversionProblem, w, tol: float = 1e-8) -> tuple[StateReflectionProblem, WitnessFamily]:
    """Reflection form of a unit-norm unitary-oracle conversion problem.

    States become ``(sigma + tau)/sqrt2`` and ``(sigma - tau)/sqrt2``, the
    oracle ``[[0, O^H], [O, 0]]`` and the witnesses ``(w + Ow)/sqrt2`` and
    ``(w - Ow)/sqrt2`` (in that block order), so both sizes equal ``|w|^2``.
    """
    w = np.asarray(w, dtype=complex)
    if not P.is_unit_norm():
        raise InputError("conversion problem is not unit-norm")
    if P.oracle.unitarity_defect() > 1e-9:
        raise InputError("conversion oracle is not unitary")
    require_feasible(P, w, tol, "conversion witnesses")
    k = w.shape[1] // P.oracle.dim if P.oracle.dim else 0
    Ot = P.oracle.tiled(k)
    Ow = Ot.apply(w) if k else w
    r2 = math.sqrt(2.0)
    R = StateReflectionProblem(
        P.domain,
        np.hstack([P.sigma, P.tau]) / r2,
        np.hstack([P.sigma, -P.tau]) / r2,
        swap_oracle(Ot),
    )
    W = WitnessFamily(np.hstack([w, Ow]) / r2, np.hstack([w, -Ow]) / r2)
    return R, W


def from_reflection(R: StateReflectionProblem, W: WitnessFamily, input_dim: int,
                    tol: float = 1e-8) -> tuple[StateConversionProblem, np.ndarray]:
    """Recover a conversion problem and witnesses from its reflection form.

    ``R`` must have states ``(sigma +- tau)/sqrt2`` on ``C^input_dim + V_2`` and
    oracle ``[[0, O^H], [O, 0]]``. Each reflection witness is split into the
    two eigenspaces of that oracle, and the four pieces are recombined into
    four copies of the oracle space, with ``O^H`` applied to the second half
    of each pair. Of the four ways to pair the eigen-pieces, the one that
    satisfies the conversion constraints is kept. The output size is the
    average ``(|w^+|^2 + |w^-|^2)/2``.
    """
    require_feasible(R, W, tol, "reflection witnesses")
    r2 = math.sqrt(2.0)
    sigma = (R.sigma_plus[:, :input_dim] + R.sigma_minus[:, :input_dim]) / r2
    tau = (R.sigma_plus[:, input_dim:] - R.sigma_minus[:, input_dim:]) / r2
    full = R.oracle.dense_all()
    D = R.oracle.dim
    if D % 2:
        raise DimensionMismatch("reflection oracle must act on two equal halves")
    h = D // 2
    O = full[:, h:, :h]
    if np.max(np.abs(full[:, :h, :h]), initial=0.0) > 1e-9 or np.max(np.abs(full[:, h:, h:]), initial=0.0) > 1e-9 \
            or np.max(np.abs(full[:, :h, h:] - np.swapaxes(O, 1, 2).conj()), initial=0.0) > 1e-9:
        raise InputError("reflection oracle is not of the form [[0, O^H], [O, 0]]")
    base = BlockOracle.from_dense(O)
    P = StateConversionProblem(R.domain, sigma, tau, base)

    def pieces(V):
        OV = R.oracle.apply(V)
        return {+1: (V + OV) / 2, -1: (V - OV) / 2}

    wp, wm = pieces(W.plus), pieces(W.minus)
    best = None
    for bp in (+1, -1):
        for bm in (+1, -1):
            p = wp[bp] + wm[bm]
            q = wp[-bp] + wm[-bm]
            parts = []
            for v in (p, q):
                top, bot = v[:, :h], v[:, h:]
                bot = np.einsum("xji,xj->xi", O.conj(), bot)
                parts += [top, bot]
            w = np.hstack(parts) / r2
            rep = check_feasibility(P, w, tol)
            if best is None or rep.max_violation < best[0]:
                best = (rep.max_violation, w)
    if best[0] > tol:
        raise InfeasibleInput(f"no recombination of the witness pieces is feasible (violation {best[0]:.3e})")
    return P, best[1]


# ---------------------------------------------------------------------------
# rescaling and potential shifts


def rescale(R: StateReflectionProblem, W: WitnessFamily | None, D, alpha_plus=1.0, alpha_minus=1.0,
            tol: float = 1e-12):
    """Rescale states by ``alpha_plus D`` and ``alpha_minus D^{-H}``.

    The witnesses become ``(alpha_plus w^+, alpha_minus w^-)``. The scalars may
    also be per-input arrays; the cross constraints only involve the product
    ``conj(alpha_plus_x) alpha_minus_y`` so feasibility is kept either way.

    Parameters
    ----------
    D : array_like or None
        Invertible operator on the state space (``None`` means identity).

    Returns
    -------
    (StateReflectionProblem, WitnessFamily or None)
        A ``HyperedgeProblem`` input stays one only when the caller rebuilds
        it; this returns the generic form.
    """
    n = R.state_dim
    if D is None:
        D = np.eye(n)
    D = np.asarray(D, dtype=complex)
    if D.shape != (n, n):
        raise DimensionMismatch(f"scaling operator {D.shape} does not act on dimension {n}")
    s = np.linalg.svd(D, compute_uv=False) if n else np.ones(1)
    if s.size and (s[-1] <= tol * max(s[0], 1e-300) or s[0] == 0):
        raise SingularScaling("scaling operator is not invertible")
    ap = np.broadcast_to(np.asarray(alpha_plus, dtype=complex), (R.m,))
    am = np.broadcast_to(np.asarray(alpha_minus, dtype=complex), (R.m,))
    if np.any(ap == 0) or np.any(am == 0):
        raise SingularScaling("scaling factors must be non-zero")
    Dinv_h = np.linalg.inv(D).conj().T if n else D
    plus = ap[:, None] * (R.sigma_plus @ D.T)
    minus = am[:, None] * (R.sigma_minus @ Dinv_h.T)
    R2 = StateReflectionProblem(R.domain, plus, minus, R.oracle)
    W2 = W.scaled(ap, am) if W is not None else None
    return R2, W2


def rescale_hyperedge(H: HyperedgeProblem, W: WitnessFamily | None, flow_scale, potential_scale,
                      potential_shift=0.0):
    """Per-input scaling ``delta -> a delta``, ``U -> c U + k``.

    Witnesses become ``(a w^+, c w^-)``. Scale factors must be non-zero; a
    zero factor is allowed only where the corresponding witness and state are
    already zero (then the scaled witness is zero as well).
    """
    a = np.broadcast_to(np.asarray(flow_scale, dtype=float), (H.m,))
    c = np.broadcast_to(np.asarray(potential_scale, dtype=float), (H.m,))
    k = np.broadcast_to(np.asarray(potential_shift, dtype=float), (H.m,))
    delta = a[:, None] * H.delta
    pot = c[:, None] * H.potential + k[:, None]
    H2 = HyperedgeProblem(H.vertices, H.domain, delta, pot, H.oracle)
    return H2, (W.scaled(a, c) if W is not None else None)


def shift_potential(H: HyperedgeProblem, C) -> HyperedgeProblem:
    """Add ``C_x`` to every entry of ``U_x``; the feasible region is unchanged."""
    c = np.broadcast_to(np.asarray(C, dtype=complex), (H.m,))
    return HyperedgeProblem(H.vertices, H.domain, H.sigma_plus, H.sigma_minus + c[:, None], H.oracle)


# ---------------------------------------------------------------------------
# span programs


@dataclass(eq=False)
class SpanProgram:
    """``(H, x -> H(x), K, w0)`` with ``H(x)`` given by orthogonal projectors."""

    domain: tuple
    available: np.ndarray
    kernel: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        self.domain = tuple(self.domain)
        self.available = np.asarray(self.available, dtype=complex)
        n = self.available.shape[1]
        self.kernel = np.asarray(self.kernel, dtype=complex).reshape(n, -1)
        self.target = np.asarray(self.target, dtype=complex)
        P = self.available
        if np.max(np.abs(P - np.swapaxes(P, 1, 2).conj()), initial=0.0) > STRUCT_TOL or \
                np.max(np.abs(P @ P - P), initial=0.0) > STRUCT_TOL:
            raise InputError("available-space projectors must be Hermitian and idempotent")
        if self.kernel.shape[1] and np.max(np.abs(self.kernel.conj().T @ self.target)) > STRUCT_TOL:
            raise InputError("target vector is not orthogonal to the kernel space")

    @property
    def dim(self) -> int:
        return self.available.shape[1]

    def positive_witness(self, i: int) -> np.ndarray | None:
        """Smallest ``w`` in ``H(x)`` with ``w - w0`` in ``K`` (``None`` if none exists)."""
        P = self.available[i]
        Q = np.eye(self.dim) - P
        K = self.kernel
        b = -(Q @ self.target)
        if K.shape[1]:
            A = Q @ K
            c0 = min_norm_solve(A, b)
            if np.linalg.norm(A @ c0 - b) > 1e-9 * max(1.0, np.linalg.norm(self.target)):
                return None
            N = null_space(A)
            base = self.target + K @ c0
            if N.shape[1]:
                KN = K @ N
                base = base - KN @ min_norm_solve(KN, base)
            return base
        if np.linalg.norm(b) > 1e-9 * max(1.0, np.linalg.norm(self.target)):
            return None
        return self.target.copy()

    def negative_witness(self, i: int) -> np.ndarray | None:
        """Smallest ``w`` orthogonal to ``K`` and ``H(x)`` with ``<w0|w> = 1``."""
        A = np.vstack([self.kernel.conj().T, self.available[i]])
        Q = null_space(A)
        c = Q.conj().T @ self.target
        nc = float(np.real(np.vdot(c, c)))
        if nc <= 1e-18:
            return None
        return Q @ c / nc

    def evaluate(self, i: int) -> int:
        return int(self.positive_witness(i) is not None)

    def complexity(self) -> float:
        """``sqrt(max positive size * max negative size)`` with optimal witnesses."""
        wp = [0.0]
        wn = [0.0]
        for i in range(len(self.domain)):
            w = self.positive_witness(i)
            if w is not None:
                wp.append(float(np.vdot(w, w).real))
            else:
                wn.append(float(np.vdot(self.negative_witness(i), self.negative_witness(i)).real))
        return math.sqrt(max(wp) * max(wn))


def single_query_span_program(domain: Sequence, position: int, symbol, alphabet: Sequence) -> SpanProgram:
    """The one-query program ``[x_position = symbol]`` over ``C^alphabet``.

    ``H(x) = span{e_{x_position}}``, ``K = {0}`` and ``w0 = e_symbol``; both
    witness types are ``e_symbol`` with size 1.
    """
    alphabet = list(alphabet)
    n = len(alphabet)
    P = np.zeros((len(domain), n, n), dtype=complex)
    for i, x in enumerate(domain):
        j = alphabet.index(x[position])
        P[i, j, j] = 1.0
    target = np.zeros(n, dtype=complex)
    target[alphabet.index(symbol)] = 1.0
    return SpanProgram(tuple(domain), P, np.zeros((n, 0)), target)


def _validate_span_witness(SP: SpanProgram, i: int, w: np.ndarray, positive: bool, tol: float = 1e-9) -> None:
    P = SP.available[i]
    K = SP.kernel
    if positive:
        if np.linalg.norm(w - P @ w) > tol or \
                np.linalg.norm((w - SP.target) - K @ (K.conj().T @ (w - SP.target))) > tol:
            raise InvalidWitness(f"positive witness for input {SP.domain[i]!r} is invalid")
    else:
        if np.linalg.norm(P @ w) > tol or np.linalg.norm(K.conj().T @ w) > tol or \
                abs(np.vdot(SP.target, w) - 1) > tol:
            raise InvalidWitness(f"negative witness for input {SP.domain[i]!r} is invalid")


def _validate_span_witnesses(SP: SpanProgram, plus: np.ndarray, minus: np.ndarray, positive: np.ndarray,
                             tol: float = 1e-9) -> None:
    """Batch version of :func:`_validate_span_witness` over all inputs."""
    P = SP.available
    K = SP.kernel
    Pw = np.einsum("xij,xj->xi", P, plus)
    r = plus - SP.target
    r_out = r - (r @ K.conj()) @ K.T
    bad_pos = (np.linalg.norm(plus - Pw, axis=1) > tol) | (np.linalg.norm(r_out, axis=1) > tol)
    Pm = np.einsum("xij,xj->xi", P, minus)
    bad_neg = (np.linalg.norm(Pm, axis=1) > tol) | (np.linalg.norm(minus @ K.conj(), axis=1) > tol) | \
        (np.abs(minus @ SP.target.conj() - 1) > tol)
    bad = np.nonzero(np.where(positive, bad_pos, bad_neg))[0]
    if bad.size:
        kind = "positive" if positive[bad[0]] else "negative"
        raise InvalidWitness(f"{kind} witness for input {SP.domain[bad[0]]!r} is invalid")


def span_to_hyperedge(SP: SpanProgram, f, witnesses=None, vertices=("s", "t")) -> tuple[HyperedgeProblem, WitnessFamily]:
    """Two-vertex hyperedge for a span program computing ``f``.

    Positive inputs carry unit flow ``1_s - 1_t`` with zero potential; negative
    inputs carry no flow and potential ``-1_t``. The oracle is ``2 Pi_H(x) - I``.
    ``witnesses`` maps input index to a span-program witness; optimal ones
    are computed when omitted.
    """
    m = len(SP.domain)
    fx = np.array([int(f[x]) if isinstance(f, Mapping) else int(v) for x, v in
                   zip(SP.domain, f if not isinstance(f, Mapping) else SP.domain)])
    delta = np.zeros((m, 2))
    pot = np.zeros((m, 2))
    plus = np.zeros((m, SP.dim), dtype=complex)
    minus = np.zeros((m, SP.dim), dtype=complex)
    for i in range(m):
        if witnesses is not None:
            w = np.asarray(witnesses[i], dtype=complex)
        else:
            w = SP.positive_witness(i) if fx[i] else SP.negative_witness(i)
            if w is None:
                raise InvalidWitness(f"span program does not compute f on input {SP.domain[i]!r}")
        if fx[i]:
            delta[i] = [1.0, -1.0]
            plus[i] = w
        else:
            pot[i] = [0.0, -1.0]
            minus[i] = w
    _validate_span_witnesses(SP, plus, minus, fx.astype(bool))
    H = HyperedgeProblem(vertices, SP.domain, delta, pot, reflection_oracle(SP.available))
    return H, WitnessFamily(plus, minus)


def hyperedge_to_span(H: HyperedgeProblem, W: WitnessFamily) -> SpanProgram:
    """Span program read off a feasible two-vertex hyperedge solution.

    ``K`` is spanned by differences of positive witnesses, ``w0`` is the part
    of a positive witness orthogonal to ``K`` and ``H(x)`` is the ``+1``
    eigenspace of ``O_x``.
    """
    if len(H.vertices) != 2:
        raise InputError("span programs correspond to hyperedges on two vertices")
    require_feasible(H, W, 1e-8, "hyperedge witnesses")
    pos = [i for i in range(H.m) if np.abs(H.delta[i]).max() > STRUCT_TOL]
    if not pos:
        raise InputError("no positive input; the target vector is undefined")
    diffs = np.column_stack([W.plus[i] - W.plus[pos[0]] for i in pos])
    K = orthonormal_basis(diffs)
    w0 = W.plus[pos[0]] - K @ (K.conj().T @ W.plus[pos[0]])
    proj = []
    for i in range(H.m):
        Ox = H.oracle.dense(i)
        Q = orthonormal_basis((np.eye(H.oracle.dim) + Ox) / 2)
        proj.append(Q @ Q.conj().T)
    return SpanProgram(H.domain, np.array(proj), K, w0)


# ---------------------------------------------------------------------------
# hyperedges from database updates and function evaluation


def database_hyperedge(vertices: Sequence, domain: Sequence, xi: Sequence, eta: Sequence,
                       oracle: BlockOracle, witnesses: WitnessFamily | None = None,
                       tol: float = 1e-8) -> tuple[HyperedgeProblem, WitnessFamily | None]:
    """Hyperedge ``(1_xi - 1_eta, 1_xi + 1_eta, O_x)`` for a database update ``xi_x -> eta_x``."""
    index = {v: i for i, v in enumerate(vertices)}
    m = len(domain)
    delta = np.zeros((m, len(vertices)))
    pot = np.zeros((m, len(vertices)))
    for i, (a, b) in enumerate(zip(xi, eta)):
        delta[i, index[a]] += 1.0
        delta[i, index[b]] -= 1.0
        pot[i, index[a]] += 1.0
        pot[i, index[b]] += 1.0
    H = HyperedgeProblem(vertices, domain, delta, pot, oracle)
    if witnesses is not None:
        require_feasible(H, witnesses, tol, "database-update witnesses")
    return H, witnesses


def function_evaluation_from_conversion(P: StateConversionProblem, w, outputs: Sequence, blank="⊥",
                                        tol: float = 1e-8) -> tuple[HyperedgeProblem, WitnessFamily]:
    """Function-evaluation hyperedge from a conversion ``e_blank -> e_f(x)``.

    ``P`` must map the one-dimensional input state to the basis vector of the
    output label in ``outputs``. The reflection form is rescaled by
    ``D = I + (-I)`` and ``sqrt2``, which turns ``(e_blank +- e_f)/sqrt2`` into
    ``e_blank - e_f`` and ``e_blank + e_f``; both witness sizes become
    ``2 |w_x|^2``.
    """
    if P.sigma.shape[1] != 1:
        raise DimensionMismatch("function evaluation starts from a one-dimensional blank state")
    R, W = to_reflection(P, w, tol)
    n_out = P.tau.shape[1]
    D = np.diag(np.concatenate([np.ones(1), -np.ones(n_out)]))
    R2, W2 = rescale(R, W, D, math.sqrt(2.0), math.sqrt(2.0))
    return HyperedgeProblem((blank,) + tuple(outputs), R2.domain, R2.sigma_plus.real, R2.sigma_minus.real,
                            R2.oracle), W2


def function_evaluation(vertices: Sequence, domain: Sequence, values: Sequence, oracle: BlockOracle,
                        witnesses: WitnessFamily | None = None, blank="⊥"):
    """Database hyperedge with ``xi_x = blank`` for every input and ``eta_x = f(x)``."""
    return database_hyperedge(vertices, domain, [blank] * len(domain), values, oracle, witnesses)


def known_fraction_rescale(pi, eps: float, marked, oracle: BlockOracle, W: WitnessFamily | None,
                           vertices: Sequence | None = None, domain: Sequence | None = None,
                           blank="⊥") -> tuple[HyperedgeProblem, WitnessFamily | None]:
    """Hyperedge ``(1_blank - pi|_M/eps, 1_blank + 1_M)`` from ``blank +- psi_x``.

    ``psi_x = sum_{v in M_x} sqrt(pi_v / eps) e_v``. The diagonal rescaling
    ``D = 1 + (-diag(sqrt(pi))/sqrt(eps))`` maps one problem to the other, so
    the same witnesses stay feasible. Every marked set must carry exactly
    ``eps`` of the stationary mass.
    """
    pi = np.asarray(pi, dtype=float)
    n = len(pi)
    vertices = tuple(vertices) if vertices is not None else tuple(range(n))
    mask = _marked_mask(marked, vertices)
    m = mask.shape[0]
    domain = tuple(domain) if domain is not None else tuple(range(m))
    mass = mask @ pi
    bad = np.abs(mass - eps) > 1e-10
    if np.any(bad):
        i = int(np.argmax(bad))
        raise FractionMismatch(f"input {domain[i]!r} has marked mass {mass[i]!r}, expected {eps!r}")
    if np.any(pi <= 0):
        raise SingularScaling("stationary distribution must be positive for the rescaling to be invertible")
    R = fraction_reflection(pi, eps, mask, oracle, domain)
    D = np.diag(np.concatenate([[1.0], -np.sqrt(pi) / math.sqrt(eps)]))
    R2, W2 = rescale(R, W, D)
    H = HyperedgeProblem((blank,) + vertices, domain, R2.sigma_plus.real, R2.sigma_minus.real, oracle)
    return H, W2


def fraction_reflection(pi, eps: float, mask: np.ndarray, oracle: BlockOracle, domain) -> StateReflectionProblem:
    """The reflection problem with states ``e_blank +- psi_x``."""
    pi = np.asarray(pi, dtype=float)
    psi = mask * np.sqrt(pi)[None, :] / math.sqrt(eps)
    one = np.ones((mask.shape[0], 1))
    return StateReflectionProblem(domain, np.hstack([one, psi]), np.hstack([one, -psi]), oracle)


def known_fraction_inverse(H: HyperedgeProblem, pi, eps: float, W: WitnessFamily | None = None):
    """Undo :func:`known_fraction_rescale`: back to states ``e_blank +- psi_x``."""
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0):
        raise SingularScaling("stationary distribution must be positive")
    D = np.diag(np.concatenate([[1.0], -math.sqrt(eps) / np.sqrt(pi)]))
    return rescale(H, W, D)


def _marked_mask(marked, vertices) -> np.ndarray:
    arr = np.asarray(marked) if not isinstance(marked, (list, tuple)) or not marked or \
        not isinstance(marked[0], (set, frozenset, list, tuple)) else None
    if arr is not None and arr.ndim == 2 and arr.dtype != object:
        return arr.astype(float)
    index = {v: i for i, v in enumerate(vertices)}
    mask = np.zeros((len(marked), len(vertices)))
    for i, M in enumerate(marked):
        for v in M:
            mask[i, index[v]] = 1.0
    return mask


# ---------------------------------------------------------------------------
# generic feasible solutions


def learning_solution(R: StateReflectionProblem, rng: np.random.Generator | None = None,
                      scale: float = 1.0) -> tuple[StateReflectionProblem, WitnessFamily]:
    """Feasible witnesses for any reflection problem under an input-revealing oracle.

    The oracle is ``I_V (x) S_x`` where ``S_x`` swaps a blank symbol with the
    symbol naming ``x``. With any invertible ``G`` on ``V`` the witnesses
    ``G sigma^+_x (x) (e_blank + e_x)`` and ``G^{-H} sigma^-_x (x) (e_blank - e_x)``
    are feasible; a random ``G`` gives a random feasible family.
    """
    n = R.state_dim
    m = R.m
    if rng is None:
        G = scale * np.eye(n, dtype=complex)
    else:
        G = scale * (np.eye(n) + 0.5 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(max(n, 1)))
    Ginv_h = np.linalg.inv(G).conj().T
    k = m + 1
    e_plus = np.zeros((m, k))
    e_minus = np.zeros((m, k))
    e_plus[:, 0] = 1.0
    e_minus[:, 0] = 1.0
    e_plus[np.arange(m), np.arange(m) + 1] = 1.0
    e_minus[np.arange(m), np.arange(m) + 1] = -1.0
    a = R.sigma_plus @ G.T
    b = R.sigma_minus @ Ginv_h.T
    plus = np.einsum("xi,xj->xij", a, e_plus).reshape(m, n * k)
    minus = np.einsum("xi,xj->xij", b, e_minus).reshape(m, n * k)
    oracle = symbol_swap_oracle(m, k, np.arange(m) + 1).tiled(n)
    R2 = StateReflectionProblem(R.domain, R.sigma_plus, R.sigma_minus, oracle)
    if isinstance(R, HyperedgeProblem):
        R2 = HyperedgeProblem(R.vertices, R.domain, R.sigma_plus.real, R.sigma_minus.real, oracle)
    return R2, WitnessFamily(plus, minus)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, Rm = np.linalg.qr(Z)
    return Q * (np.diag(Rm) / np.abs(np.diag(Rm)))


@dataclass
class QueryRun:
    """Trace of a simulated query algorithm.

    ``controlled[t]`` holds the oracle-register part of the state right
    before the ``t``-th query, one row per input.
    """

    states: list
    controlled: list
    output: np.ndarray


def run_query_algorithm(initial, unitaries: Sequence[np.ndarray], oracle: BlockOracle, workspace: int) -> QueryRun:
    """Simulate ``U_T O U_{T-1} ... O U_0`` on every input.

    The state space is ``C^{workspace * d} + C^free`` where ``d`` is the oracle
    dimension; the oracle acts as ``kron(I_workspace, O_x)`` on the first
    summand and as the identity on the rest.
    """
    psi = np.asarray(initial, dtype=complex)
    d = oracle.dim
    c = workspace * d
    big = oracle.tiled(workspace)
    states = []
    controlled = []
    for t, U in enumerate(unitaries):
        psi = psi @ np.asarray(U).T
        states.append(psi)
        if t < len(unitaries) - 1:
            controlled.append(psi[:, :c].copy())
            nxt = psi.copy()
            nxt[:, :c] = big.apply(psi[:, :c])
            psi = nxt
    return QueryRun(states, controlled, psi)


def random_conversion_problem(m: int, oracle_dim: int, queries: int, rng: np.random.Generator,
                              workspace: int = 1, free: int = 1):
    """Random unit-norm conversion problem with a feasible witness.

    A random algorithm with ``queries`` oracle calls is run on random unitary
    oracles; the input and output states are its first and last states and
    the concatenated pre-query register states form the witness.
    """
    n = workspace * oracle_dim + free
    O = np.stack([random_unitary(oracle_dim, rng) for _ in range(m)])
    oracle = BlockOracle.from_dense(O)
    sigma = rng.normal(size=(1, n)) + 1j * rng.normal(size=(1, n))
    sigma = np.repeat(sigma / np.linalg.norm(sigma), m, axis=0)
    Us = [random_unitary(n, rng) for _ in range(queries + 1)]
    Us[0] = np.eye(n)
    run = run_query_algorithm(sigma, Us, oracle, workspace)
    w = np.hstack(run.controlled) if run.controlled else np.zeros((m, 0))
    return StateConversionProblem(tuple(range(m)), sigma, run.output, oracle), w


def random_involution(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian unitary with a random number of ``-1`` eigenvalues."""
    U = random_unitary(n, rng)
    k = int(rng.integers(0, n + 1))
    return (U * np.concatenate([np.ones(n - k), -np.ones(k)])) @ U.conj().T


# ---------------------------------------------------------------------------
# Las Vegas algorithms


def las_vegas_witnesses(trace: Sequence, oracle: BlockOracle, alpha: Sequence[float],
                        sigma=None, tau=None) -> tuple[WitnessFamily, tuple[np.ndarray, np.ndarray],
                                                       StateReflectionProblem | None]:
    """Reflection witnesses from the query-controlled states of an algorithm.

    ``trace[t]`` holds the controlled component before query ``t`` for every
    input. Each step contributes ``sqrt(alpha_t^{+-1}) (a + +-O a)/sqrt2`` under
    the oracle ``[[0, O^H], [O, 0]]``. When ``sigma`` and ``tau`` are given the
    matching problem with states ``(sigma +- tau)/sqrt2`` is returned too.
    """
    T = len(trace)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size < T:
        raise ScheduleMismatch(f"schedule has {alpha.size} entries but the trace has {T} steps")
    if np.any(alpha[:T] <= 0):
        raise InputError("schedule entries must be positive")
    m = oracle.m
    r2 = math.sqrt(2.0)
    plus_parts, minus_parts = [], []
    for t, a in enumerate(trace):
        a = np.asarray(a, dtype=complex)
        Oa = oracle.apply(a)
        plus_parts.append(math.sqrt(alpha[t]) * np.hstack([a, Oa]) / r2)
        minus_parts.append(np.hstack([a, -Oa]) / (r2 * math.sqrt(alpha[t])))
    if T:
        W = WitnessFamily(np.hstack(plus_parts), np.hstack(minus_parts))
    else:
        W = WitnessFamily(np.zeros((m, 0)), np.zeros((m, 0)))
    sizes = (W.sizes_plus, W.sizes_minus)
    problem = None
    if sigma is not None and tau is not None:
        bar = swap_oracle(oracle).tiled(T) if T else BlockOracle.empty(m)
        sigma = np.asarray(sigma, dtype=complex)
        tau = np.asarray(tau, dtype=complex)
        problem = StateReflectionProblem(tuple(range(sigma.shape[0])), np.hstack([sigma, tau]) / r2,
                                         np.hstack([sigma, -tau]) / r2, bar)
    return W, sizes, problem


def las_vegas_sizes(stop_dist, alpha: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Expected ``sum_{t < T_x} alpha_t^{+-1}`` for stopping-time distributions.

    ``stop_dist[x][k]`` is the probability that input ``x`` stops after ``k``
    queries.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise InputError("schedule entries must be positive")
    cp = np.concatenate([[0.0], np.cumsum(alpha)])
    cm = np.concatenate([[0.0], np.cumsum(1.0 / alpha)])
    wp, wm = [], []
    for dist in stop_dist:
        p = np.asarray(dist, dtype=float)
        if abs(p.sum() - 1.0) > 1e-9 or np.any(p < 0):
            raise InputError("stopping-time distribution must be a probability vector")
        support = np.nonzero(p > 0)[0]
        kmax = int(support.max()) if support.size else 0
        if kmax > alpha.size:
            raise ScheduleMismatch(f"schedule has {alpha.size} entries but stopping time reaches {kmax}")
        wp.append(float(p[: kmax + 1] @ cp[: kmax + 1]))
        wm.append(float(p[: kmax + 1] @ cm[: kmax + 1]))
    return np.array(wp), np.array(wm)
