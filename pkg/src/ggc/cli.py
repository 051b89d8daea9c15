"""Command-line front end.

Subcommands read one JSON document (path or ``-`` for stdin), run a check
and print a text table or a JSON report. Exit status is 0 when every
verdict passes, 1 on a failed verdict and 2 on unreadable input.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from ggc import acceptance, catalog, io
from ggc.composition import validate_instance
from ggc.dectree import bt20_scheme, tree_to_composition, validate_scheme, wdt
from ggc.errors import GGCError, InputError, InvalidColoring, SchemaError
from ggc.markov import (
    WeightedGraph,
    chain_to_graph,
    check_resistance_inequalities,
    graph_to_chain,
    resistance,
    resistance_incidence,
    resistance_laplacian,
)
from ggc.qwalk import build_detection, build_finding, mnrs_bounds, unified_check, variable_query_bounds
from ggc.reflection import check_feasibility
from ggc.transducer import build_reflection, emulate, verify_family

log = logging.getLogger("ggc")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
QWALK_MODES = ("detection", "finding", "variable", "mnrs", "unified")


@dataclass
class Result:
    """One verdict: scalar fields, an optional per-row table and a failure location."""

    name: str
    ok: bool
    fields: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    worst: object = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "ok": self.ok, **self.fields}
        if self.columns:
            out["table"] = {"columns": self.columns, "rows": self.rows}
        if self.worst is not None:
            out["max_violation_at"] = self.worst
        return out


# ---------------------------------------------------------------------------
# report rendering


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    if isinstance(v, (bool, np.bool_)):
        return "yes" if v else "no"
    return str(v)


def _table(columns, rows) -> list[str]:
    cells = [[_cell(c) for c in columns]] + [[_cell(v) for v in r] for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(columns))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return lines


def emit_report(command: str, results: list[Result], fmt: str = "text") -> bytes:
    ok = all(r.ok for r in results)
    if fmt == "json":
        doc = {"command": command, "ok": ok, "results": [r.as_dict() for r in results]}
        return (io.dumps(doc, indent=2) + "\n").encode()
    lines = [f"{command}: {'PASS' if ok else 'FAIL'} ({len(results)} result{'s' if len(results) != 1 else ''})"]
    for r in results:
        lines.append("")
        lines.append(f"[{'PASS' if r.ok else 'FAIL'}] {r.name}")
        if r.fields:
            width = max(len(k) for k in r.fields)
            for k, v in r.fields.items():
                if isinstance(v, (dict, list)):
                    v = io.dumps(v)
                lines.append(f"  {k.ljust(width)}  {_cell(v)}")
        if r.worst is not None:
            lines.append(f"  max violation at {io.dumps(r.worst)}")
        if r.columns:
            lines += ["  " + s for s in _table(r.columns, r.rows)]
    return ("\n".join(lines) + "\n").encode()


# ---------------------------------------------------------------------------
# commands


def _read(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as err:
        raise SchemaError(f"cannot read {path}: {err.strerror}") from err
    return io.parse(text)


def _as_input(x) -> str:
    return io.dumps(x) if not isinstance(x, str) else x


def cmd_verify(args) -> list[Result]:
    doc = _read(args.input)
    tol = args.tol if args.tol is not None else 1e-8
    if doc["kind"] == "reflection":
        P, W = io.problem_from_json(doc)
        if W is None:
            raise SchemaError("verify: the problem carries no witnesses")
        rep = check_feasibility(P, W, tol)
        rows = [[_as_input(x), p, q] for x, p, q in zip(P.domain, W.sizes_plus, W.sizes_minus)]
        return [Result("feasibility", rep.ok, {"max_violation": rep.max_violation, "tol": tol},
                       ["input", "R+", "R-"], rows, None if rep.ok else io.plain(rep.worst))]
    if doc["kind"] != "instance":
        raise SchemaError(f"verify expects an instance or reflection document, got {doc['kind']!r}")
    inst, builder, expected = io.instance_from_json(doc)
    out = []
    if builder == "compose":
        # the other builders choose their own flows and potentials
        val = validate_instance(inst)
        out.append(Result("instance", bool(val.ok), {"max_flow_residual": val.max_flow_residual,
                                                     "max_potential_spread": val.max_potential_spread}))
        if not val.ok:
            return out
    res = io.build(inst, builder, check=False)
    rep = check_feasibility(res.problem, res.witnesses, tol)
    columns = ["input", "R+", "R-"]
    rows = [[_as_input(x), p, q] for x, p, q in zip(inst.domain, res.sizes_plus, res.sizes_minus)]
    fields = {"builder": builder, "inputs": inst.m, "max_violation": rep.max_violation, "tol": tol}
    out.append(Result("feasibility", rep.ok, fields, columns, rows, None if rep.ok else io.plain(rep.worst)))
    if expected is not None:
        ep = np.abs(res.sizes_plus - expected[0])
        em = np.abs(res.sizes_minus - expected[1])
        gap = float(max(ep.max(initial=0.0), em.max(initial=0.0)))
        worst = None
        if gap > 1e-9:
            i = int(np.argmax(np.maximum(ep, em)))
            worst = {"input": io.plain(inst.domain[i]), "gap": gap}
        out.append(Result("expected sizes", gap <= 1e-9, {"max_gap": gap}, worst=worst))
    return out


def _net_flow(doc: dict, G: WeightedGraph, args) -> np.ndarray:
    if args.source is not None or args.sink is not None:
        if args.source is None or args.sink is None:
            raise SchemaError("--source and --sink go together")
        idx = {str(io.plain(v)): i for i, v in enumerate(G.vertices)}
        for v in (args.source, args.sink):
            if v not in idx:
                raise SchemaError(f"unknown vertex {v!r}")
        xi = np.zeros(G.n)
        xi[idx[args.source]] += 1.0
        xi[idx[args.sink]] -= 1.0
        return xi
    if doc.get("net_flow") is None:
        raise SchemaError("resistance needs a net_flow map in the document or --source/--sink")
    idx = {str(io.plain(v)): i for i, v in enumerate(G.vertices)}
    xi = np.zeros(G.n)
    for k, val in doc["net_flow"].items():
        if k not in idx:
            raise SchemaError(f"net_flow: unknown vertex {k!r}")
        xi[idx[k]] = io.real_array(val, "net_flow")
    if abs(xi.sum()) > 1e-10 * max(1.0, np.abs(xi).max()):
        raise SchemaError("net_flow must sum to zero")
    return xi


def cmd_resistance(args) -> list[Result]:
    doc = _read(args.input)
    if doc["kind"] == "graph":
        G = io.graph_from_json(doc)
        M = None
    elif doc["kind"] == "chain":
        M = io.chain_from_json(doc)
        G = chain_to_graph(M)
    else:
        raise SchemaError(f"resistance expects a graph or chain document, got {doc['kind']!r}")
    xi = _net_flow(doc, G, args)
    rtol = args.tol if args.tol is not None else 1e-8
    R, flow = resistance(G, xi)
    a = resistance_laplacian(G, xi)
    b = resistance_incidence(G, xi)
    rel = abs(a - b) / max(abs(a), abs(b), 1e-300)
    rows = [[_as_input(u), _as_input(v), r, f] for (u, v, r), f in zip(G.edges, flow.values)]
    out = [Result("effective resistance", rel <= rtol,
                  {"resistance": R, "laplacian_route": a, "incidence_route": b, "relative_gap": rel},
                  ["tail", "head", "r", "flow"], rows)]
    if M is None and G.is_connected() and G.n > 1:
        M, _ = graph_to_chain(G)
    if M is not None and M.n > 1:
        ineq_rows, ok = [], True
        for t in range(1, 6):
            rep = check_resistance_inequalities(M, xi, t)
            ok &= rep.ok
            ineq_rows.append([t, rep.r_chain, rep.fast_forward_rhs, rep.gap_rhs, rep.ok])
        out.append(Result("resistance inequalities", bool(ok), {},
                          ["t", "R(P)", "t R(P^t)", "norm/gap", "ok"], ineq_rows))
    return out


def cmd_wdt(args) -> list[Result]:
    doc = _read(args.input)
    T = io.tree_from_json(doc)
    tol = args.tol if args.tol is not None else 1e-8
    S, root = wdt(T)
    rep = validate_scheme(T, S, tol)
    rows = [[_as_input(v), S.weights[v]] for v in T.nodes]
    out = [Result("optimal weighting", rep.ok, {"value": root} | {k: v for k, v in rep.as_dict().items() if k != "ok"},
                  ["node", "weight"], rows)]
    if T.black is not None and not T.nodes[T.root].is_leaf:
        try:
            B = bt20_scheme(T)
        except InvalidColoring as err:
            raise SchemaError(f"tree coloring: {err}") from err
        bound = 3 * math.sqrt(max(T.red_count(), 1) * T.depth())
        brep = validate_scheme(T, B, tol)
        out.append(Result("colored scheme", brep.ok and B.root_weight(T) <= bound + 1e-6,
                          {"value": B.root_weight(T), "bound": bound, "red": T.red_count(), "depth": T.depth()}))
    try:
        D = T.domain(full=True)
    except InputError:
        D = T.domain()
    _, res = tree_to_composition(T, S, D)
    cap = 2 * root + 1e-6
    worst = float(max(res.sizes_plus.max(initial=0.0), res.sizes_minus.max(initial=0.0)))
    out.append(Result("composition", res.feasibility.max_violation <= tol and worst <= cap,
                      {"inputs": len(D), "max_size": worst, "size_cap": 2 * root,
                       "max_violation": res.feasibility.max_violation}))
    return out


def _walk_dist(doc, key, Q, default):
    if doc.get(key) is None:
        return default
    return io.distribution(doc[key], Q.vertices, key)


def _bound_result(name, rep, tol, extra=None) -> Result:
    ok = rep.consistency() <= tol
    rows = [[_as_input(x), bool(pi), bool(mi), p, q]
            for x, pi, mi, p, q in zip(rep.domain, rep.plus_inputs, rep.minus_inputs, rep.plus, rep.minus)]
    fields = {"max_plus": rep.max_plus, "max_minus": rep.max_minus, "objective": rep.objective,
              "consistency": rep.consistency()}
    if extra:
        fields |= extra
    return Result(name, ok, fields, ["input", "positive", "negative", "R+", "R-"], rows)


def cmd_qwalk(args) -> list[Result]:
    doc = _read(args.input)
    Q = io.qwalk_from_json(doc)
    tol = args.tol if args.tol is not None else 1e-9
    _, pi = Q.chain()
    sigma = _walk_dist(doc, "sigma", Q, pi)
    tau = _walk_dist(doc, "tau", Q, pi)
    mode = args.mode
    if mode == "detection":
        _, rep = build_detection(Q, sigma, tau)
        return [_bound_result("detection", rep, tol)]
    if mode == "finding":
        kind = doc.get("finding", "unique")
        if kind not in ("unique", "fraction"):
            raise SchemaError("finding must be 'unique' or 'fraction'")
        eps = doc.get("eps")
        _, rep = build_finding(Q, sigma, tau, kind, None if eps is None else io.real_array(eps, "eps").item())
        return [_bound_result(f"finding ({kind})", rep, tol)]
    if mode == "variable":
        variant = doc.get("variant", 1)
        if variant not in (1, 2):
            raise SchemaError("variant must be 1 or 2")
        rep = variable_query_bounds(Q, sigma, tau, variant)
        terms = {k: float(v) for k, v in rep.extra["term_max"].items()}
        res = _bound_result(f"variable query (variant {variant})", rep, tol,
                            {"R": rep.extra["R"], "eps": rep.extra["eps"], "term_max": terms})
        res.ok = res.ok and max(terms.values(), default=0.0) <= 1 + tol
        return [res]
    if mode == "mnrs":
        rep = mnrs_bounds(Q)
        res = _bound_result("mnrs", rep, tol, {"gap": rep.extra["delta"], "slack": rep.extra["inequality_slack"]})
        res.ok = res.ok and rep.extra["inequality_slack"] >= -tol
        return [res]
    U = unified_check(Q, sigma)
    rows = [[b.t, b.R, b.value, b.plus_bound, U.max_plus <= b.plus_bound * (1 + tol) + tol] for b in U.bounds]
    return [Result("unified", U.ok, {"max_plus": U.max_plus, "max_minus": U.max_minus, "minus_bound": 3.0},
                   ["t", "R", "bound", "plus bound", "dominates"], rows,
                   None if U.ok else io.plain(U.violations()[0]))]


def cmd_transduce(args) -> list[Result]:
    doc = _read(args.input)
    R, W = io.problem_from_json(doc)
    if W is None:
        raise SchemaError("transduce: the problem carries no witnesses")
    tol = args.tol if args.tol is not None else 1e-9
    T = build_reflection(R, W)
    rep = verify_family(T, R, W, tol)
    out = [Result("transduction", rep.ok, {"dim": T.U.shape[0], "v_dim": T.v_dim, "h_dim": T.h_dim}
                  | {k: v for k, v in rep.as_dict().items() if k != "ok"})]
    Ks = args.K or list(acceptance.EMULATION_K)
    rows, ok = [], True
    for i, x in enumerate(R.domain):
        s = R.sigma_plus[i] + R.sigma_minus[i]
        nrm = np.linalg.norm(s)
        if nrm == 0:
            continue
        for K in Ks:
            e = emulate(T, R.oracle.dense(i), s / nrm, K)
            ok &= bool(np.isfinite(e.error)) and (K != 1 or e.error <= 2 * e.catalyst_norm + tol)
            rows.append([_as_input(x), K, e.error, e.catalyst_norm, e.bound, e.reference_bound])
    out.append(Result("emulation", bool(ok), {"K": Ks},
                      ["input", "K", "error", "|w_min|", "bound", "reference"], rows))
    return out


GENERATORS = ("dense_learning", "minimum_finding", "first_marked_index", "bit_select")


def cmd_catalog(args) -> bytes:
    if args.name is None:
        docs = [io.fixture_to_json(F) for F in catalog.standard_fixtures()]
        return (io.dumps({"kind": "catalog", "fixtures": docs}, indent=2) + "\n").encode()
    params = {}
    if args.name != "bit_select":
        if args.n is None:
            raise SchemaError(f"{args.name} needs -n")
        params["n"] = args.n
    if args.name == "minimum_finding":
        params["seed"] = args.seed
    if args.name == "first_marked_index":
        params["weights"] = args.weights
    F = io.generate_fixture({"generator": args.name, "params": params})
    return (io.dumps(io.fixture_to_json(F), indent=2) + "\n").encode()


def cmd_selftest(args) -> list[Result]:
    verdicts = acceptance.selftest(args.seed, args.jobs)
    out = []
    for v in verdicts:
        log.info("%s (%.1fs)", v.line, v.seconds)
        fields = {"criterion": v.number, "metrics": v.metrics}
        if v.report_only:
            fields["report_only"] = v.report_only
        out.append(Result(v.name, v.ok, fields, worst=v.failures[0] if v.failures else None))
    return out


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="override the command's main tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent checks")

    ap = argparse.ArgumentParser(prog="ggc", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", parents=[common], help="feasibility of an instance or witness family")
    p.add_argument("input")
    p = sub.add_parser("resistance", parents=[common], help="effective resistance, flow and inequalities")
    p.add_argument("input")
    p.add_argument("--source")
    p.add_argument("--sink")
    p = sub.add_parser("wdt", parents=[common], help="optimal decision-tree weighting")
    p.add_argument("input")
    p = sub.add_parser("qwalk", parents=[common], help="walk-search witness sizes")
    p.add_argument("input")
    p.add_argument("--mode", choices=QWALK_MODES, default="detection")
    p = sub.add_parser("transduce", parents=[common], help="build, verify and emulate a transducer")
    p.add_argument("input")
    p.add_argument("-K", type=int, action="append", help="emulation call count (repeatable)")
    p = sub.add_parser("catalog", parents=[common], help="emit fixture instances")
    p.add_argument("name", nargs="?", choices=GENERATORS)
    p.add_argument("-n", type=int)
    p.add_argument("--weights", choices=("sqrt", "harmonic"), default="sqrt")
    sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    return ap


COMMANDS = {"verify": cmd_verify, "resistance": cmd_resistance, "wdt": cmd_wdt, "qwalk": cmd_qwalk,
            "transduce": cmd_transduce, "selftest": cmd_selftest}


def _error(args, kind: str, err: Exception, code: int) -> int:
    if getattr(args, "format", "text") == "json":
        doc = {"command": args.command, "ok": False,
               "error": {"type": type(err).__name__, "kind": kind, "message": str(err)}}
        sys.stdout.write(io.dumps(doc, indent=2) + "\n")
    else:
        sys.stderr.write(f"ggc {args.command}: {kind}: {err}\n")
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("GGC_LOG", "WARNING").upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        if args.command == "catalog":
            sys.stdout.write(cmd_catalog(args).decode())
            return EXIT_OK
        results = COMMANDS[args.command](args)
    except SchemaError as err:
        return _error(args, "schema", err, EXIT_INPUT)
    except (InputError, ValueError) as err:
        return _error(args, "input", err, EXIT_INPUT)
    except GGCError as err:
        return _error(args, "numerical", err, EXIT_FAIL)
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - start)
    sys.stdout.write(emit_report(args.command, results, args.format).decode())
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
