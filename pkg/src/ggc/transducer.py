"""Reflection transducers built from feasible witness families.

A transducer is a unitary ``U`` on ``V + H``; it transduces ``sigma`` to
``tau`` with catalyst ``w`` when ``U (sigma + w) = tau + w``. For a
state-reflection problem with witnesses in eigenspace normal form
(``O_x w^+ = w^+``, ``O_x w^- = -w^-``) the reflection ``U = 2 Pi_A - I``
through ``A = span{sigma^+_x + w^+_x}`` makes ``U (I + O_x)`` map
``sigma^+_x -> sigma^+_x`` and ``sigma^-_x -> -sigma^-_x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotOrthogonal, NumericalFailure
from .numerics import min_norm_solve, orthonormal_basis
from .reflection import StateReflectionProblem, WitnessFamily

SANDWICH_TOL = 1e-9


@dataclass(eq=False)
class Transducer:
    U: np.ndarray
    v_dim: int
    h_dim: int

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=complex)
        if self.U.shape != (self.v_dim + self.h_dim,) * 2:
            raise DimensionMismatch(f"unitary of shape {self.U.shape} does not act on {self.v_dim}+{self.h_dim}")

    def unitarity_defect(self) -> float:
        n = self.U.shape[0]
        return float(np.abs(self.U.conj().T @ self.U - np.eye(n)).max(initial=0.0))

    def with_oracle(self, O) -> "Transducer":
        """``U (I + O)`` for an oracle matrix on ``H``."""
        O = np.asarray(O, dtype=complex)
        if O.shape != (self.h_dim, self.h_dim):
            raise DimensionMismatch(f"oracle {O.shape} does not act on the {self.h_dim}-dim workspace")
        M = self.U.copy()
        M[:, self.v_dim:] = M[:, self.v_dim:] @ O
        return Transducer(M, self.v_dim, self.h_dim)

    def blocks(self):
        n = self.v_dim
        U = self.U
        return U[:n, :n], U[:n, n:], U[n:, :n], U[n:, n:]


def sandwich_matrix(R: StateReflectionProblem, W: WitnessFamily) -> np.ndarray:
    """``<sigma^+_x + w^+_x | sigma^-_y + O_y w^-_y>`` for all ``x, y``.

    Feasibility makes this vanish for normal-form witnesses, where
    ``O_y w^-_y = -w^-_y``.
    """
    A = np.hstack([R.sigma_plus, W.plus])
    B = np.hstack([R.sigma_minus, R.oracle.apply(W.minus)])
    return A.conj() @ B.T


def build_reflection(R: StateReflectionProblem, W: WitnessFamily, tol: float = SANDWICH_TOL) -> Transducer:
    """Reflection through the span of the positive states with their witnesses.

    Raises
    ------
    NotOrthogonal
        If the positive span is not orthogonal to the negative vectors,
        which happens for infeasible families and for feasible ones not in
        eigenspace normal form.
    """
    if W.dim != R.oracle.dim:
        raise DimensionMismatch("witness dimension does not match the oracle")
    n, d = R.state_dim, W.dim
    if R.m:
        S = sandwich_matrix(R, W)
        worst = float(np.abs(S).max(initial=0.0))
        if worst > tol:
            raise NotOrthogonal(f"positive and negative vectors overlap by {worst:.3e}")
    vecs = np.hstack([R.sigma_plus, W.plus]).T if R.m else np.zeros((n + d, 0))
    Q = orthonormal_basis(vecs)
    U = 2 * (Q @ Q.conj().T) - np.eye(n + d)
    return Transducer(U, n, d)


@dataclass
class TransductionReport:
    residual_plus: float
    residual_minus: float
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residual_plus, self.residual_minus)

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tol

    def as_dict(self) -> dict:
        return {"residual_plus": self.residual_plus, "residual_minus": self.residual_minus,
                "tol": self.tol, "ok": self.ok}


def verify_transduction(T: Transducer, O, sigma_plus, sigma_minus, w_plus, w_minus,
                        tol: float = 1e-9) -> TransductionReport:
    """Check ``U (I + O)(sigma^+- + w^+-) = +-sigma^+- + w^+-``."""
    M = T.with_oracle(O).U
    res = []
    for sign, s, w in ((1, sigma_plus, w_plus), (-1, sigma_minus, w_minus)):
        s = np.asarray(s, dtype=complex)
        w = np.asarray(w, dtype=complex)
        if s.shape != (T.v_dim,) or w.shape != (T.h_dim,):
            raise DimensionMismatch("state or witness has the wrong dimension")
        out = M @ np.concatenate([s, w])
        res.append(float(np.linalg.norm(out - np.concatenate([sign * s, w]))))
    return TransductionReport(res[0], res[1], tol)


def verify_family(T: Transducer, R: StateReflectionProblem, W: WitnessFamily, tol: float = 1e-9) -> TransductionReport:
    """Worst transduction residual over every input of a problem."""
    rp = rm = 0.0
    for i in range(R.m):
        r = verify_transduction(T, R.oracle.dense(i), R.sigma_plus[i], R.sigma_minus[i], W.plus[i], W.minus[i], tol)
        rp = max(rp, r.residual_plus)
        rm = max(rm, r.residual_minus)
    return TransductionReport(rp, rm, tol)


def transduce_solve(T: Transducer, sigma, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Output and minimal catalyst of the transduction of ``sigma``.

    With ``U = [[A, B], [C, D]]`` the catalyst solves ``(I - D) w = C sigma``;
    the minimal-norm solution is the minimal catalyst and
    ``tau = A sigma + B w``.
    """
    sigma = np.asarray(sigma, dtype=complex)
    A, B, C, D = T.blocks()
    w = min_norm_solve(np.eye(T.h_dim) - D, C @ sigma) if T.h_dim else np.zeros(0, dtype=complex)
    tau = A @ sigma + B @ w
    out = T.U @ np.concatenate([sigma, w])
    err = float(np.linalg.norm(out - np.concatenate([tau, w])))
    scale = max(1.0, float(np.linalg.norm(sigma)))
    if err > tol * scale:
        raise NumericalFailure(f"transduction equation residual {err:.3e}")
    if abs(np.linalg.norm(tau) - np.linalg.norm(sigma)) > tol * scale:
        raise NumericalFailure("transduced state changed norm")
    return tau, w


@dataclass
class EmulationResult:
    output: np.ndarray
    error: float
    calls: int
    catalyst_norm: float
    scheme: str

    @property
    def bound(self) -> float:
        """``||w_min|| / sqrt(K)``, which the shared-catalyst scheme guarantees."""
        return self.catalyst_norm / np.sqrt(self.calls)

    @property
    def reference_bound(self) -> float:
        """``2 ||w_min|| / sqrt(K)``, reported for comparison only."""
        return 2 * self.catalyst_norm / np.sqrt(self.calls)

    def as_dict(self) -> dict:
        return {"K": self.calls, "error": self.error, "catalyst_norm": self.catalyst_norm,
                "bound": self.bound, "reference_bound": self.reference_bound, "scheme": self.scheme}


def emulate(T: Transducer, O, sigma, K: int, scheme: str = "shared") -> EmulationResult:
    """Approximate the transduction of ``sigma`` with ``K`` calls to ``U (I + O)``.

    ``scheme="shared"``: ``sigma`` is spread over ``K`` slices of ``V`` with
    amplitude ``1/sqrt(K)`` each and one workspace register starting at 0;
    call ``k`` acts on slice ``k`` and the workspace, and the output is the
    uniform recombination of the slices. Compared with the run that starts
    from the catalyst ``w_min/sqrt(K)`` (which is exact), the error vector
    is moved unitarily, so the output error is at most ``||w_min||/sqrt(K)``.

    ``scheme="fresh"``: every call gets a fresh zero workspace and acts on
    the running ``V`` state, which is renormalised at the end. This does not
    converge in general and is kept for comparison.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    M = T.with_oracle(O)
    sigma = np.asarray(sigma, dtype=complex)
    tau, w = transduce_solve(M, sigma)
    n = T.v_dim
    U = M.U
    if scheme == "shared":
        slices = np.tile(sigma / np.sqrt(K), (K, 1))
        h = np.zeros(T.h_dim, dtype=complex)
        for k in range(K):
            v = U @ np.concatenate([slices[k], h])
            slices[k], h = v[:n], v[n:]
        out = slices.sum(axis=0) / np.sqrt(K)
    elif scheme == "fresh":
        out = sigma.copy()
        for _ in range(K):
            out = (U @ np.concatenate([out, np.zeros(T.h_dim)]))[:n]
        nrm = np.linalg.norm(out)
        if nrm > 0:
            out = out * (np.linalg.norm(sigma) / nrm)
    else:
        raise ValueError(f"unknown emulation scheme {scheme!r}")
    return EmulationResult(out, float(np.linalg.norm(out - tau)), K, float(np.linalg.norm(w)), scheme)
