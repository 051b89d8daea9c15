"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import subprocess
import sys
import time

from ggc import acceptance
from ggc.acceptance import SUITE_SECONDS

SEED = 0


def report(v):
    print(v.line)
    assert v.ok, v.failures


def test_criterion_1_resistance_routes():
    report(acceptance.criterion_1(SEED))


def test_criterion_2_fast_forwarding():
    report(acceptance.criterion_2(SEED))


def test_criterion_3_fraction_bound():
    report(acceptance.criterion_3(SEED))


def test_criterion_4_catalog_values():
    report(acceptance.criterion_4(SEED))


def test_criterion_5_feasibility():
    report(acceptance.criterion_5(SEED))


def test_criterion_6_transducer():
    report(acceptance.criterion_6(SEED))


def test_criterion_7_decision_trees():
    report(acceptance.criterion_7(SEED))


def test_criterion_8_walk_search():
    report(acceptance.criterion_8(SEED))


def test_criterion_9_emulation():
    report(acceptance.criterion_9(SEED))


def test_criterion_10_cli_determinism():
    cmd = [sys.executable, "-m", "ggc", "selftest", "--format", "json", "--seed", str(SEED)]
    outs, ok = [], True
    for _ in range(2):
        start = time.perf_counter()
        proc = subprocess.run(cmd, capture_output=True, timeout=2 * SUITE_SECONDS)
        elapsed = time.perf_counter() - start
        ok &= proc.returncode == 0 and elapsed < SUITE_SECONDS
        outs.append(proc.stdout)
    ok &= outs[0] == outs[1] and len(outs[0]) > 0
    print(f"{'PASS' if ok else 'FAIL'} criterion 10: deterministic reports")
    assert proc.returncode == 0, proc.stderr.decode()[-2000:]
    assert outs[0] == outs[1]
    assert ok
