"""Acceptance suite: ten checks shared by ``ggc selftest`` and the test suite.

Each ``criterion_k(seed)`` returns a :class:`Verdict`. Wall-clock timings are
kept out of :meth:`Verdict.as_dict` so that JSON reports are reproducible
byte for byte; runtime limits enter only through the pass/fail flag.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ggc import catalog
from ggc.composition import Hyperedge, HypergraphInstance, compose
from ggc.dectree import (
    binary_analytic,
    bt20_scheme,
    random_tree,
    solve_node_sdp,
    tree_to_composition,
    validate_scheme,
    wdt,
)
from ggc.markov import (
    check_resistance_inequalities,
    random_connected_graph,
    random_reversible_chain,
    resistance_incidence,
    resistance_laplacian,
)
from ggc.qwalk import build_detection, mnrs_inequality, random_instance, unified_check, unit_rescaled
from ggc.reflection import (
    BlockOracle,
    WitnessFamily,
    check_feasibility,
    database_hyperedge,
    fraction_reflection,
    known_fraction_rescale,
    learning_solution,
    random_conversion_problem,
    single_query_span_program,
    span_to_hyperedge,
    to_reflection,
)
from ggc.transducer import build_reflection, emulate, transduce_solve, verify_family

FEAS_TOL = 1e-8
PROBE_MIN = 1e-2
EMULATION_K = (1, 4, 16, 64)
SUITE_SECONDS = 300.0


@dataclass
class Verdict:
    number: int
    name: str
    ok: bool
    metrics: dict
    failures: list = field(default_factory=list)
    report_only: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} criterion {self.number}: {self.name}"

    def as_dict(self) -> dict:
        out = {"criterion": self.number, "name": self.name, "ok": self.ok, "metrics": self.metrics,
               "failures": self.failures}
        if self.report_only:
            out["report_only"] = self.report_only
        return out


def _rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng([seed, k])


def _bits(n: int) -> tuple:
    return tuple(itertools.product((0, 1), repeat=n))


# ---------------------------------------------------------------------------
# 1-3: resistance


def criterion_1(seed: int = 0, trials: int = 100) -> Verdict:
    rng = _rng(seed, 1)
    start = time.perf_counter()
    worst, failures = 0.0, []
    for k in range(trials):
        n = int(rng.integers(2, 21))
        G = random_connected_graph(n, rng, density=float(rng.uniform(0.05, 0.5)), r_range=(0.1, 10.0))
        xi = rng.normal(size=n)
        xi -= xi.mean()
        a = resistance_laplacian(G, xi)
        b = resistance_incidence(G, xi)
        rel = abs(a - b) / max(abs(a), abs(b), 1e-300)
        worst = max(worst, rel)
        if rel > 1e-8:
            failures.append({"trial": k, "n": n, "laplacian": a, "incidence": b, "relative": rel})
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10.0
    if elapsed >= 10.0:
        failures.append({"runtime_limit_seconds": 10.0, "exceeded": True})
    return Verdict(1, "resistance routes agree", ok,
                   {"trials": trials, "max_relative_gap": worst, "runtime_within_10s": elapsed < 10.0},
                   failures, seconds=elapsed)


def _chain_draws(seed: int, trials: int):
    rng = _rng(seed, 2)
    for k in range(trials):
        n = int(rng.integers(2, 13))
        M = random_reversible_chain(n, rng, density=float(rng.uniform(0.1, 0.6)))
        xi = rng.normal(size=n)
        xi -= xi.mean()
        perm = rng.permutation(n)
        cut = int(rng.integers(1, n))
        s = np.zeros(n)
        v = np.zeros(n)
        s[perm[:cut]] = rng.dirichlet(np.ones(cut))
        v[perm[cut:]] = rng.dirichlet(np.ones(n - cut))
        yield k, M, xi, s, v


def criterion_2(seed: int = 0, trials: int = 100) -> Verdict:
    start = time.perf_counter()
    failures, checks = [], 0
    slack_ff, slack_gap = math.inf, math.inf
    for k, M, xi, _, _ in _chain_draws(seed, trials):
        for t in range(1, 6):
            rep = check_resistance_inequalities(M, xi, t)
            checks += 1
            slack_ff = min(slack_ff, rep.fast_forward_rhs - rep.r_chain)
            slack_gap = min(slack_gap, rep.gap_rhs - rep.r_chain)
            if not (rep.fast_forward_ok and rep.gap_ok):
                failures.append({"trial": k, "t": t} | rep.as_dict())
    return Verdict(2, "fast-forwarding inequalities", not failures,
                   {"checks": checks, "violations": len(failures), "min_fast_forward_slack": slack_ff,
                    "min_gap_slack": slack_gap}, failures[:5], seconds=time.perf_counter() - start)


def criterion_3(seed: int = 0, trials: int = 100) -> Verdict:
    start = time.perf_counter()
    failures, checks, slack = [], 0, math.inf
    for k, M, xi, s, v in _chain_draws(seed, trials):
        for t in range(1, 6):
            rep = check_resistance_inequalities(M, xi, t, s, v)
            checks += 1
            slack = min(slack, rep.fraction_rhs - rep.fraction_lhs)
            if not rep.fraction_ok:
                failures.append({"trial": k, "t": t, "lhs": rep.fraction_lhs, "rhs": rep.fraction_rhs})
    return Verdict(3, "fraction versus effective resistance", not failures,
                   {"checks": checks, "violations": len(failures), "min_slack": slack}, failures[:5],
                   seconds=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# 4-5: catalog values and feasibility


def criterion_4(seed: int = 0, tol: float = FEAS_TOL) -> Verdict:
    start = time.perf_counter()
    failures, worst_size, worst_feas = [], 0.0, 0.0

    def record(F, tag):
        nonlocal worst_size, worst_feas
        ep, em = F.size_errors()
        fv = F.result.feasibility.max_violation
        worst_size = max(worst_size, ep, em)
        worst_feas = max(worst_feas, fv)
        if max(ep, em) > 1e-9 or fv > tol:
            failures.append({"fixture": tag, "plus_error": ep, "minus_error": em, "feasibility": fv})

    for n in range(1, 9):
        F = catalog.dense_learning(n)
        record(F, f"dense_learning({n})")
        if np.abs(F.expected_plus - n).max() > 0 or np.abs(F.expected_minus - n).max() > 0:
            failures.append({"fixture": f"dense_learning({n})", "closed_form": "expected sizes differ from n"})
    for n in range(2, 17):
        F = catalog.minimum_finding(n, samples=6)
        record(F, f"minimum_finding({n})")
        h = sum(1.0 / j for j in range(1, n))
        if np.abs(F.result.sizes_minus - h).max() > 1e-9 or np.abs(F.result.sizes_plus - n).max() > 1e-9:
            failures.append({"fixture": f"minimum_finding({n})", "harmonic": h,
                             "minus": float(F.result.sizes_minus.max())})
    n = 32
    D = catalog.first_marked_domain(n)
    for scheme, weights in (("sqrt", catalog.sqrt_weights), ("harmonic", catalog.harmonic_weights)):
        a, b = weights(n)
        F = catalog.first_marked_index(n, a, b, domain=D)
        record(F, f"first_marked_index({n}, {scheme})")
        # independent recomputation of both closed forms from the weights
        i = np.array([catalog.first_marked(x) for x in D])
        plus = np.array([a[: k - 1].sum() + b[k - 1] for k in i])
        minus = np.array([(1 / b[: k - 1]).sum() + 1 / a[k - 1] for k in i])
        gap = max(np.abs(F.result.sizes_plus - plus).max(), np.abs(F.result.sizes_minus - minus).max())
        worst_size = max(worst_size, gap)
        if gap > 1e-9:
            failures.append({"fixture": f"first_marked_index({n}, {scheme})", "closed_form_gap": gap})
    return Verdict(4, "catalog golden values", not failures,
                   {"max_size_error": worst_size, "max_feasibility_violation": worst_feas}, failures,
                   seconds=time.perf_counter() - start)


def feasibility_corpus(seed: int = 0) -> list:
    """``(constructor, tag, problem, witnesses)`` for every constructor family."""
    rng = _rng(seed, 5)
    out = []
    for m, od, q in ((2, 2, 1), (3, 2, 2), (4, 3, 2)):
        P, w = random_conversion_problem(m, od, q, rng)
        out.append(("to_reflection", f"random({m},{od},{q})", *to_reflection(P, w)))
    for n in (2, 3):
        D = _bits(n)
        for pos in range(n):
            SP = single_query_span_program(D, pos, 1, (0, 1))
            out.append(("span_to_hyperedge", f"query(bits{n}, {pos})", *span_to_hyperedge(SP, [x[pos] for x in D])))
    for m in (2, 3, 5):
        targets = [f"T{j}" for j in range(m)]
        H, _ = database_hyperedge(["S"] + targets, range(m), ["S"] * m, targets, BlockOracle.empty(m))
        H2, W = learning_solution(H, rng)
        out.append(("database_hyperedge", f"fan({m})",
                    *database_hyperedge(H.vertices, H.domain, ["S"] * m, targets, H2.oracle, W)))
    for _ in range(3):
        a = rng.uniform(0.2, 0.8, size=3)
        pi = np.array([a[0], 1 - a[0], a[1], 1 - a[1], a[2], 1 - a[2]]) / 3
        marked = [{0, 1}, {2, 3}, {4, 5}]
        mask = np.zeros((3, 6))
        for i, M in enumerate(marked):
            mask[i, list(M)] = 1
        R, W = learning_solution(fraction_reflection(pi, 1 / 3, mask, BlockOracle.empty(3), (0, 1, 2)), rng)
        out.append(("known_fraction_rescale", "pairs(6)", *known_fraction_rescale(pi, 1 / 3, marked, R.oracle, W)))
    for k in (2, 3, 4):
        D = _bits(2)
        verts = ["s"] + [f"m{j}" for j in range(k - 1)] + ["t"]
        edges = []
        for j in range(k):
            H, _ = database_hyperedge((verts[j], verts[j + 1]), D, [verts[j]] * 4, [verts[j + 1]] * 4,
                                      BlockOracle.empty(4))
            H, W = learning_solution(H, rng)
            edges.append(Hyperedge(H, W, float(rng.uniform(0.2, 5.0))))
        inst = HypergraphInstance(verts, ("s", "t"), edges)
        res = compose(inst)
        out.append(("compose", f"path({k})", res.problem, res.witnesses))
    for F in catalog.standard_fixtures():
        out.append(("compose", f"{F.name}{F.params.get('n', '')}", F.result.problem, F.result.witnesses))
    for _ in range(4):
        T = random_tree(rng, max_depth=4, alphabet=(0, 1, 2))
        if T.nodes[T.root].is_leaf:
            continue
        _, res = tree_to_composition(T, wdt(T)[0], T.domain(full=True))
        out.append(("tree_to_composition", f"tree({len(T.nodes)})", res.problem, res.witnesses))
    for _ in range(4):
        Q = random_instance(rng)
        res, _ = build_detection(Q, rng.dirichlet(np.ones(Q.n)), rng.dirichlet(np.ones(Q.n)), concrete=True)
        out.append(("build_detection", f"walk({Q.n},{Q.m})", res.problem, res.witnesses))
    return out


def probe_applicable(problem) -> bool:
    """False when every witness family is feasible (constant oracle, orthogonal states)."""
    if problem.m == 0 or problem.oracle.dim == 0:
        return False
    O = problem.oracle.dense_all()
    overlap = np.abs(problem.sigma_plus.conj() @ problem.sigma_minus.T).max()
    return bool(np.abs(O - O[:1]).max() > 0 or overlap > 0)


def corruption_probe(problem, W: WitnessFamily, rng: np.random.Generator) -> float:
    """Largest violation over two corrupted copies of ``W``.

    One rescales the positive witness with the largest state overlap; the
    other adds noise of norm ``0.5 max(1, |w|)`` to every negative witness
    (a lone corrupted row can hide when all other witnesses vanish).
    """
    overlap = np.abs(problem.sigma_plus.conj() @ problem.sigma_minus.T)
    x, _ = np.unravel_index(np.argmax(overlap), overlap.shape)
    plus = W.plus.copy()
    plus[x] *= 1.5
    v1 = check_feasibility(problem, WitnessFamily(plus, W.minus)).max_violation
    noise = rng.normal(size=W.minus.shape) + 1j * rng.normal(size=W.minus.shape)
    noise /= np.maximum(np.linalg.norm(noise, axis=1, keepdims=True), 1e-300)
    scale = 0.5 * np.maximum(1.0, np.linalg.norm(W.minus, axis=1, keepdims=True))
    v2 = check_feasibility(problem, WitnessFamily(W.plus, W.minus + scale * noise)).max_violation
    return max(v1, v2)


def criterion_5(seed: int = 0, tol: float = FEAS_TOL) -> Verdict:
    start = time.perf_counter()
    rng = _rng(seed, 55)
    failures, per = [], {}
    for ctor, tag, P, W in feasibility_corpus(seed):
        rep = check_feasibility(P, W, tol)
        probe = corruption_probe(P, W, rng)  # drawn even when unused, to keep the stream fixed
        row = per.setdefault(ctor, {"families": 0, "max_violation": 0.0, "min_probe_violation": math.inf,
                                    "probes_not_applicable": 0})
        row["families"] += 1
        row["max_violation"] = max(row["max_violation"], rep.max_violation)
        if not probe_applicable(P):
            row["probes_not_applicable"] += 1
            probe = math.inf
        row["min_probe_violation"] = min(row["min_probe_violation"], probe)
        if rep.max_violation > tol:
            failures.append({"constructor": ctor, "family": tag, "max_violation": rep.max_violation,
                             "worst": list(rep.worst) if rep.worst else None})
        if probe < PROBE_MIN:
            failures.append({"constructor": ctor, "family": tag, "undetected_corruption": probe})
    return Verdict(5, "feasibility of every constructor", not failures, {"constructors": per}, failures,
                   seconds=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# 6, 9: transducers


def transducer_corpus(seed: int = 0) -> list:
    rng = _rng(seed, 6)
    out = []
    for m, od, q in ((3, 2, 1), (3, 2, 2)):
        P, w = random_conversion_problem(m, od, q, rng)
        out.append((f"conversion({m},{od},{q})", *to_reflection(P, w)))
    SP = single_query_span_program(_bits(2), 0, 1, (0, 1))
    out.append(("query(bits2, 0)", *span_to_hyperedge(SP, [x[0] for x in _bits(2)])))
    for F in catalog.standard_fixtures():
        out.append((f"{F.name}{F.params.get('n', '')}", F.result.problem, F.result.witnesses))
    return out


def criterion_6(seed: int = 0) -> Verdict:
    start = time.perf_counter()
    failures, worst_res, worst_cat = [], 0.0, -math.inf
    for tag, R, W in transducer_corpus(seed):
        T = build_reflection(R, W)
        rep = verify_family(T, R, W)
        worst_res = max(worst_res, rep.max_residual)
        if rep.max_residual > 1e-9:
            failures.append({"fixture": tag, "residual": rep.max_residual})
        for i in range(R.m):
            M = T.with_oracle(R.oracle.dense(i))
            for sigma, w in ((R.sigma_plus[i], W.plus[i]), (R.sigma_minus[i], W.minus[i])):
                _, w_min = transduce_solve(M, sigma)
                excess = float(np.linalg.norm(w_min) - np.linalg.norm(w))
                worst_cat = max(worst_cat, excess)
                if excess > 1e-9:
                    failures.append({"fixture": tag, "input": str(R.domain[i]), "catalyst_excess": excess})
    return Verdict(6, "transducer exactness and minimal catalyst", not failures,
                   {"max_residual": worst_res, "max_catalyst_excess": worst_cat}, failures[:10],
                   seconds=time.perf_counter() - start)


def criterion_9(seed: int = 0, Ks=EMULATION_K) -> Verdict:
    start = time.perf_counter()
    failures, rows = [], []
    for tag, R, W in transducer_corpus(seed):
        T = build_reflection(R, W)
        errors = np.zeros((R.m, len(Ks)))
        refs = np.zeros((R.m, len(Ks)))
        norms = np.zeros(R.m)
        for i in range(R.m):
            s = R.sigma_plus[i] + R.sigma_minus[i]
            s = s / max(np.linalg.norm(s), 1e-300)
            for j, K in enumerate(Ks):
                res = emulate(T, R.oracle.dense(i), s, K)
                errors[i, j], refs[i, j], norms[i] = res.error, res.reference_bound, res.catalyst_norm
        med = np.median(errors, axis=0)
        if not np.all(np.isfinite(errors)):
            failures.append({"fixture": tag, "nonfinite": True})
        if np.any(np.diff(med) > 1e-12):
            failures.append({"fixture": tag, "median_errors": med.tolist()})
        over = errors[:, 0] - 2 * norms
        if np.any(over > 1e-9):
            failures.append({"fixture": tag, "k1_excess": float(over.max())})
        rows.append({"fixture": tag, "median_error": med.tolist(),
                     "within_reference": bool(np.all(errors <= refs + 1e-9))})
    return Verdict(9, "emulation error", not failures, {"K": list(Ks), "fixtures": len(rows)}, failures,
                   report_only={"reference_comparison": rows}, seconds=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# 7: decision trees


def criterion_7(seed: int = 0, pairs: int = 100, trees: int = 20) -> Verdict:
    start = time.perf_counter()
    rng = _rng(seed, 7)
    failures = []
    golden = {(1.0, 0.0): (1 + math.sqrt(5)) / 2, (0.0, 0.0): 1.0}
    for (a, b), want in golden.items():
        got = solve_node_sdp([a, b]).weight
        if abs(got - want) > 1e-6:
            failures.append({"pair": [a, b], "sdp": got, "expected": want})
    worst_pair = 0.0
    for _ in range(pairs):
        a, b = rng.uniform(0, 10, size=2)
        d = abs(solve_node_sdp([a, b]).weight - binary_analytic(a, b)[0])
        worst_pair = max(worst_pair, d)
        if d > 1e-6:
            failures.append({"pair": [a, b], "gap": d})
    worst_gap, worst_ratio, worst_size, checked = 0.0, 0.0, -math.inf, 0
    while checked < trees:
        T = random_tree(rng, max_depth=int(rng.integers(1, 7)), alphabet=(0, 1, 2))
        if T.nodes[T.root].is_leaf:
            continue
        checked += 1
        S, _ = wdt(T)
        for v, (lo, hi) in S.duals.items():
            worst_gap = max(worst_gap, hi - lo)
            if hi - lo > 1e-6:
                failures.append({"node": str(v), "bracket": [lo, hi]})
        B = bt20_scheme(T)
        bound = 3 * math.sqrt(max(T.red_count(), 1) * T.depth())
        worst_ratio = max(worst_ratio, B.root_weight(T) / bound)
        if not validate_scheme(T, B).ok or B.root_weight(T) > bound + 1e-6:
            failures.append({"tree_nodes": len(T.nodes), "bt20_root": B.root_weight(T), "bound": bound})
        for scheme in (S, B):
            _, res = tree_to_composition(T, scheme, T.domain(full=True))
            root = scheme.root_weight(T)
            excess = float(max(res.sizes_plus.max(), res.sizes_minus.max()) - 2 * root)
            worst_size = max(worst_size, excess)
            if excess > 1e-6:
                failures.append({"tree_nodes": len(T.nodes), "size_excess": excess})
    return Verdict(7, "decision-tree weighting schemes", not failures,
                   {"pairs": pairs, "max_pair_gap": worst_pair, "trees": trees, "max_bracket_gap": worst_gap,
                    "max_bt20_ratio": worst_ratio, "max_size_excess": worst_size}, failures,
                   seconds=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# 8: walk search


def criterion_8(seed: int = 0, instances: int = 25, mnrs_trials: int = 50) -> Verdict:
    start = time.perf_counter()
    rng = _rng(seed, 8)
    failures = []
    worst_gap, worst_feas, worst_minus, worst_unified = 0.0, 0.0, 0.0, -math.inf
    for k in range(instances):
        Q = random_instance(rng)
        sigma = rng.dirichlet(np.ones(Q.n))
        tau = rng.dirichlet(np.ones(Q.n))
        res, rep = build_detection(Q, sigma, tau)
        gap = rep.extra["formula_gap"]
        worst_gap = max(worst_gap, gap)
        worst_feas = max(worst_feas, res.feasibility.max_violation)
        if gap > 1e-8 or res.feasibility.max_violation > FEAS_TOL:
            failures.append({"instance": k, "formula_gap": gap, "feasibility": res.feasibility.max_violation})
        _, unit = build_detection(unit_rescaled(Q), sigma, tau)
        worst_minus = max(worst_minus, unit.max_minus)
        if unit.max_minus > 3 + 1e-9:
            failures.append({"instance": k, "unit_cost_minus": unit.max_minus})
        U = unified_check(Q, sigma)
        for kind, t, got, bound in U.violations():
            failures.append({"instance": k, "unified": kind, "t": t, "size": got, "bound": bound})
        worst_unified = max(worst_unified, max(U.max_plus / b.plus_bound for b in U.bounds))
    worst_mnrs = -math.inf
    for k in range(mnrs_trials):
        n = int(rng.integers(2, 10))
        M = random_reversible_chain(n, rng)
        marked = set(rng.choice(M.states, size=int(rng.integers(1, n + 1)), replace=False).tolist())
        lhs, mid, rhs = mnrs_inequality(M, marked)
        worst_mnrs = max(worst_mnrs, lhs - mid)
        if lhs > mid + 1e-9 or mid > rhs + 1e-12:
            failures.append({"mnrs_trial": k, "lhs": lhs, "mid": mid, "rhs": rhs})
    return Verdict(8, "walk-search formulas and bounds", not failures,
                   {"instances": instances, "max_formula_gap": worst_gap, "max_feasibility_violation": worst_feas,
                    "max_unit_cost_minus": worst_minus, "max_unified_ratio": worst_unified,
                    "mnrs_trials": mnrs_trials, "max_mnrs_excess": worst_mnrs}, failures,
                   seconds=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# suite


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


def _run(k: int, seed: int) -> Verdict:
    start = time.perf_counter()
    v = CRITERIA[k](seed)
    v.seconds = time.perf_counter() - start
    return v


def run_criteria(seed: int = 0, jobs: int = 1, which=tuple(CRITERIA)) -> list[Verdict]:
    """Run the numbered criteria; results come back in order whatever ``jobs`` is."""
    which = list(which)
    if jobs <= 1:
        return [_run(k, seed) for k in which]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run, which, [seed] * len(which)))


def criterion_10(seed: int = 0, jobs: int = 1, first: list[Verdict] | None = None,
                 emit=None) -> Verdict:
    """Two runs of criteria 1-9 must serialize to identical JSON bytes."""
    if emit is None:
        from ggc.io import dumps

        def emit(vs):
            return dumps([v.as_dict() for v in vs]).encode()

    start = time.perf_counter()
    if first is None:
        first = run_criteria(seed, jobs)
        elapsed_first = time.perf_counter() - start
    else:
        elapsed_first = sum(v.seconds for v in first) / max(jobs, 1)
    second = run_criteria(seed, jobs)
    a, b = emit(first), emit(second)
    total = elapsed_first + (time.perf_counter() - start)
    failures = []
    if a != b:
        at = next((i for i, (p, q) in enumerate(zip(a, b)) if p != q), min(len(a), len(b)))
        failures.append({"first_difference_at_byte": at})
    if total >= SUITE_SECONDS:
        failures.append({"runtime_limit_seconds": SUITE_SECONDS, "exceeded": True})
    return Verdict(10, "deterministic reports", not failures,
                   {"identical_bytes": a == b, "report_bytes": len(a), "runtime_within_limit": total < SUITE_SECONDS},
                   failures, seconds=time.perf_counter() - start)


def selftest(seed: int = 0, jobs: int = 1) -> list[Verdict]:
    first = run_criteria(seed, jobs)
    return first + [criterion_10(seed, jobs, first)]
