import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ggc.errors import (
    DimensionMismatch,
    FractionMismatch,
    InfeasibleInput,
    InvalidWitness,
    ScheduleMismatch,
    SingularScaling,
)
from ggc.reflection import (
    BlockOracle,
    StateConversionProblem,
    StateReflectionProblem,
    WitnessFamily,
    check_feasibility,
    database_hyperedge,
    direct_sum_oracles,
    from_reflection,
    function_evaluation_from_conversion,
    hyperedge_to_span,
    known_fraction_inverse,
    known_fraction_rescale,
    las_vegas_sizes,
    las_vegas_witnesses,
    learning_solution,
    normal_form_defect,
    normalize_witnesses,
    random_conversion_problem,
    random_involution,
    rescale,
    run_query_algorithm,
    same_problem,
    shift_potential,
    single_query_span_program,
    span_to_hyperedge,
    swap_oracle,
    to_reflection,
)


def bits(n):
    return [tuple((k >> (n - 1 - j)) & 1 for j in range(n)) for k in range(2**n)]


def test_block_oracle_matches_dense():
    rng = np.random.default_rng(0)
    A = np.stack([random_involution(3, rng) for _ in range(4)])
    B = np.stack([random_involution(2, rng) for _ in range(4)])
    O = direct_sum_oracles([BlockOracle.from_dense(A), BlockOracle.from_dense(B)])
    W = rng.normal(size=(4, 5)) + 0j
    for i in range(4):
        assert np.allclose(O.apply(W)[i], O.dense(i) @ W[i])
    S = swap_oracle(O)
    for i in range(4):
        D = O.dense(i)
        expect = np.block([[np.zeros((5, 5)), D.conj().T], [D, np.zeros((5, 5))]])
        assert np.allclose(S.dense(i), expect)
    assert S.involution_defect() < 1e-12


def test_to_reflection_single_input_zero_witness():
    P = StateConversionProblem(["x"], [[1.0]], [[1.0]], BlockOracle.from_dense(np.ones((1, 1, 1))))
    R, W = to_reflection(P, np.zeros((1, 0)))
    r2 = math.sqrt(2)
    assert np.allclose(R.sigma_plus, [[1 / r2, 1 / r2]])
    assert np.allclose(R.sigma_minus, [[1 / r2, -1 / r2]])
    assert W.dim == 0
    assert check_feasibility(R, W).ok


@pytest.mark.parametrize("seed", range(5))
def test_to_reflection_random_instances(seed):
    rng = np.random.default_rng(seed)
    P, w = random_conversion_problem(3, 2, 3, rng, workspace=2)
    assert check_feasibility(P, w).max_violation < 1e-10
    R, W = to_reflection(P, w)
    assert check_feasibility(R, W).max_violation < 1e-9
    assert normal_form_defect(R, W) < 1e-9
    size = np.linalg.norm(w, axis=1) ** 2
    assert np.allclose(W.sizes_plus, size) and np.allclose(W.sizes_minus, size)


def test_to_reflection_rejects_infeasible():
    rng = np.random.default_rng(1)
    P, w = random_conversion_problem(2, 2, 2, rng)
    with pytest.raises(InfeasibleInput):
        to_reflection(P, w + 0.1)


@pytest.mark.parametrize("seed", range(5))
def test_round_trip_preserves_sizes(seed):
    rng = np.random.default_rng(seed)
    P, w = random_conversion_problem(2, 2, 2, rng)
    R, W = to_reflection(P, w)
    P2, w2 = from_reflection(R, W, P.sigma.shape[1])
    assert check_feasibility(P2, w2).max_violation < 1e-9
    assert np.allclose(np.linalg.norm(w2, axis=1) ** 2, np.linalg.norm(w, axis=1) ** 2, atol=1e-9)
    assert np.allclose(P2.sigma, P.sigma) and np.allclose(P2.tau, P.tau)


def test_from_reflection_rejects_unbalanced_pieces():
    # (a w+, w-/a) is feasible for the reflection problem, but the four-piece
    # recombination needs the two eigen-pieces to come from the same vector
    rng = np.random.default_rng(7)
    P, w = random_conversion_problem(2, 2, 2, rng)
    R, W = to_reflection(P, w)
    W2 = W.scaled(2.0, 0.5)
    assert check_feasibility(R, W2).ok
    with pytest.raises(InfeasibleInput):
        from_reflection(R, W2, P.sigma.shape[1])


def test_from_reflection_constant_problem():
    s = np.array([[1.0, 0.0]] * 2)
    O = BlockOracle.from_dense(np.stack([np.eye(1), -np.eye(1)]))
    P = StateConversionProblem([0, 1], s, s, O)
    R, W = to_reflection(P, np.zeros((2, 0)))
    _, w = from_reflection(R, W, 2)
    assert np.allclose(w, 0)


def test_empty_domain_feasible():
    R = StateReflectionProblem((), np.zeros((0, 2)), np.zeros((0, 2)), BlockOracle(()))
    assert check_feasibility(R, WitnessFamily(np.zeros((0, 0)), np.zeros((0, 0)))).ok


def test_perturbation_detected():
    rng = np.random.default_rng(2)
    P, w = random_conversion_problem(3, 2, 2, rng)
    R, W = to_reflection(P, w)
    bad = W.plus.copy()
    bad[0] += 0.1 * rng.normal(size=W.dim)
    rep = check_feasibility(R, WitnessFamily(bad, W.minus))
    assert not rep.ok
    assert 1e-2 < rep.max_violation < 10
    assert rep.worst[0] == 0 or rep.worst[1] == 0


def test_dimension_mismatch():
    rng = np.random.default_rng(2)
    P, w = random_conversion_problem(2, 2, 2, rng)
    R, W = to_reflection(P, w)
    with pytest.raises(DimensionMismatch):
        check_feasibility(R, WitnessFamily(W.plus[:, :-1], W.minus[:, :-1]))


def test_normalize_warns_and_projects():
    rng = np.random.default_rng(3)
    P, w = random_conversion_problem(2, 2, 2, rng)
    R, W = to_reflection(P, w)
    # push a negative-eigenspace component into w+
    junk = W.minus.copy()
    with pytest.warns(UserWarning):
        W2 = normalize_witnesses(R, WitnessFamily(W.plus + junk, W.minus))
    assert np.allclose(W2.plus, W.plus)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        normalize_witnesses(R, W)


def test_rescale_scalar_and_identity():
    rng = np.random.default_rng(4)
    P, w = random_conversion_problem(3, 2, 2, rng)
    R, W = to_reflection(P, w)
    R1, W1 = rescale(R, W, None, 1.0, 1.0)
    assert same_problem(R1, R) and same_problem(W1, W)
    c = 3.0
    R2, W2 = rescale(R, W, None, c, 1 / c)
    assert np.allclose(W2.sizes_plus, c**2 * W.sizes_plus)
    assert np.allclose(W2.sizes_minus, W.sizes_minus / c**2)
    assert np.isclose(W2.sizes_plus.max() * W2.sizes_minus.max(), W.sizes_plus.max() * W.sizes_minus.max())
    assert check_feasibility(R2, W2).ok


def test_rescale_singular():
    rng = np.random.default_rng(4)
    P, w = random_conversion_problem(2, 2, 2, rng)
    R, W = to_reflection(P, w)
    D = np.eye(R.state_dim)
    D[0, 0] = 0
    with pytest.raises(SingularScaling):
        rescale(R, W, D)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_rescale_inverse_is_identity(seed):
    rng = np.random.default_rng(seed)
    P, w = random_conversion_problem(2, 2, 2, rng)
    R, W = to_reflection(P, w)
    n = R.state_dim
    D = np.eye(n) + 0.3 * rng.normal(size=(n, n))
    a, b = rng.uniform(0.5, 2, size=2)
    R2, W2 = rescale(R, W, D, a, b)
    assert check_feasibility(R2, W2).max_violation < 1e-8
    R3, W3 = rescale(R2, W2, np.linalg.inv(D), 1 / a, 1 / b)
    assert same_problem(R3, R, 1e-9) and same_problem(W3, W, 1e-9)


def test_single_query_span_edge():
    dom = [(0,), (1,)]
    SP = single_query_span_program(dom, 0, 1, [0, 1])
    H, W = span_to_hyperedge(SP, [0, 1])
    assert np.allclose(W.sizes_plus, [0, 1]) and np.allclose(W.sizes_minus, [1, 0])
    assert check_feasibility(H, W).max_violation <= 1e-12
    assert np.allclose(H.delta, [[0, 0], [1, -1]])
    assert np.allclose(H.potential, [[0, -1], [0, 0]])


def test_constant_true_span_program():
    dom = [0, 1, 2]
    P = np.repeat(np.eye(2)[None], 3, axis=0)
    from ggc.reflection import SpanProgram
    w0 = np.array([1.0, 2.0])
    SP = SpanProgram(dom, P, np.zeros((2, 0)), w0)
    H, W = span_to_hyperedge(SP, [1, 1, 1])
    assert np.allclose(W.sizes_plus, 5.0)
    assert np.allclose(W.sizes_minus, 0)
    assert check_feasibility(H, W).ok


def test_invalid_span_witness():
    SP = single_query_span_program([(0,), (1,)], 0, 1, [0, 1])
    with pytest.raises(InvalidWitness):
        span_to_hyperedge(SP, [0, 1], witnesses=[np.array([1.0, 0]), np.array([1.0, 0])])


def test_span_round_trip_complexity():
    dom = bits(2)
    SP = single_query_span_program(dom, 1, 0, [0, 1])
    f = [int(x[1] == 0) for x in dom]
    H, W = span_to_hyperedge(SP, f)
    SP2 = hyperedge_to_span(H, W)
    assert np.isclose(SP2.complexity(), SP.complexity())
    assert [SP2.evaluate(i) for i in range(4)] == f
    H2, W2 = span_to_hyperedge(SP2, f)
    assert np.allclose(W2.sizes_plus, W.sizes_plus) and np.allclose(W2.sizes_minus, W.sizes_minus)


def test_database_identity_function():
    dom = [(0,), (1,)]
    H, _ = database_hyperedge(["⊥", 0, 1], dom, ["⊥", "⊥"], [0, 1], BlockOracle.from_dense(np.ones((2, 1, 1))))
    assert np.allclose(H.delta, [[1, -1, 0], [1, 0, -1]])
    assert np.allclose(H.potential, [[1, 1, 0], [1, 0, 1]])


def test_database_noop_update():
    H, _ = database_hyperedge(["a", "b"], [0, 1], ["a", "b"], ["a", "b"], BlockOracle.from_dense(np.ones((2, 1, 1))))
    assert np.allclose(H.delta, 0)


def test_database_two_inputs_feasible():
    rng = np.random.default_rng(5)
    H, _ = database_hyperedge(["S", "T1", "T2"], [0, 1], ["S", "S"], ["T1", "T2"],
                              BlockOracle.from_dense(np.ones((2, 1, 1))))
    assert np.allclose(H.delta.sum(axis=1), 0)
    H2, W = learning_solution(H, rng)
    H3, W3 = database_hyperedge(H.vertices, H.domain, ["S", "S"], ["T1", "T2"], H2.oracle, W)
    assert check_feasibility(H3, W3).max_violation < 1e-9


def test_function_evaluation_from_conversion():
    # learn one bit: blank -> e_{x}; the oracle reveals x by a sign
    dom = [0, 1]
    O = BlockOracle.from_dense(np.array([[[1.0 + 0j]], [[-1.0]]]))
    sigma = np.ones((2, 1))
    # algorithm: prepare (e0+e1)/sqrt2 on a 2-dim register whose first coordinate
    # is controlled, query, then rotate to the output basis
    H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    # embed the 1-dim input in a 2-dim space
    init = np.hstack([sigma, np.zeros((2, 1))])
    Z = np.diag([1.0, -1.0])
    run = run_query_algorithm(init, [H, Z @ H], O, 1)
    assert np.allclose(run.output, np.eye(2))
    P = StateConversionProblem(dom, sigma, run.output, O)
    w = np.hstack(run.controlled)
    assert check_feasibility(StateConversionProblem(dom, init, run.output, O), w).max_violation < 1e-12
    He, W = function_evaluation_from_conversion(P, w, outputs=[0, 1])
    assert He.vertices == ("⊥", 0, 1)
    assert np.allclose(He.delta, [[1, -1, 0], [1, 0, -1]])
    assert np.allclose(He.potential, [[1, 1, 0], [1, 0, 1]])
    assert check_feasibility(He, W).max_violation < 1e-9
    assert np.allclose(W.sizes_plus, 2 * np.linalg.norm(w, axis=1) ** 2)


def test_shift_potential():
    rng = np.random.default_rng(6)
    H, _ = database_hyperedge(["⊥", 0, 1], [0, 1], ["⊥", "⊥"], [0, 1], BlockOracle.from_dense(np.ones((2, 1, 1))))
    H, W = learning_solution(H, rng)
    assert same_problem(shift_potential(H, 0.0), H)
    H5 = shift_potential(H, 5.0)
    assert check_feasibility(H5, W).max_violation < 1e-9
    assert same_problem(shift_potential(H5, -5.0), H)
    Hr = shift_potential(H, [1.0, -2.0])
    assert check_feasibility(Hr, W).max_violation < 1e-9


def test_known_fraction_two_vertices():
    pi = np.array([0.5, 0.5])
    O = BlockOracle.from_dense(np.ones((2, 1, 1)))
    H, _ = known_fraction_rescale(pi, 0.5, [{"v1"}, {"v1"}], O, None, vertices=("v1", "v2"))
    assert np.allclose(H.delta, [[1, -1, 0]] * 2)
    assert np.allclose(H.potential, [[1, 1, 0]] * 2)


def test_known_fraction_everything_marked():
    pi = np.array([0.2, 0.3, 0.5])
    O = BlockOracle.from_dense(np.ones((1, 1, 1)))
    H, _ = known_fraction_rescale(pi, 1.0, [{0, 1, 2}], O, None)
    assert np.allclose(H.delta[0], np.concatenate([[1], -pi]))


def test_known_fraction_mismatch():
    pi = np.full(4, 0.25)
    with pytest.raises(FractionMismatch):
        known_fraction_rescale(pi, 0.5, [{0}], BlockOracle.from_dense(np.ones((1, 1, 1))), None)


@pytest.mark.parametrize("seed", range(3))
def test_known_fraction_feasibility(seed):
    rng = np.random.default_rng(seed)
    # six vertices in three pairs of equal mass so every pair carries 1/3
    p = rng.uniform(0.2, 1.0, size=3)
    pi = np.concatenate([p, p[::-1]])
    pi = pi / pi.sum()
    a = rng.uniform(0.2, 0.8, size=3)
    pi = np.array([a[0], 1 - a[0], a[1], 1 - a[1], a[2], 1 - a[2]]) / 3
    marked = [{0, 1}, {2, 3}, {4, 5}]
    from ggc.reflection import fraction_reflection, _marked_mask
    mask = _marked_mask(marked, tuple(range(6)))
    R = fraction_reflection(pi, 1 / 3, mask, BlockOracle.from_dense(np.ones((3, 1, 1))), (0, 1, 2))
    R, W = learning_solution(R, rng)
    assert check_feasibility(R, W).max_violation < 1e-9
    H, W2 = known_fraction_rescale(pi, 1 / 3, marked, R.oracle, W)
    assert check_feasibility(H, W2).max_violation < 1e-9
    back, W3 = known_fraction_inverse(H, pi, 1 / 3, W2)
    assert np.allclose(back.sigma_plus, R.sigma_plus) and np.allclose(back.sigma_minus, R.sigma_minus)


def test_las_vegas_closed_form_sizes():
    sizes = las_vegas_sizes([[0, 0, 0, 0, 0, 1.0]], np.ones(10))
    assert np.allclose(sizes, [[5], [5]])
    T = 6
    dist = np.zeros(T + 1)
    dist[T] = 1
    wp, wm = las_vegas_sizes([dist], np.arange(1, 20))
    assert np.isclose(wp[0], T * (T + 1) / 2)
    assert np.isclose(wm[0], sum(1 / (t + 1) for t in range(T)))


def test_las_vegas_schedule_mismatch():
    with pytest.raises(ScheduleMismatch):
        las_vegas_sizes([[0, 0, 0, 1.0]], [1.0, 1.0])
    with pytest.raises(ScheduleMismatch):
        las_vegas_witnesses([np.zeros((1, 1))] * 3, BlockOracle.from_dense(np.ones((1, 1, 1))), [1.0])


def test_las_vegas_empty_trace():
    W, (wp, wm), _ = las_vegas_witnesses([], BlockOracle.from_dense(np.ones((2, 1, 1))), [])
    assert W.dim == 0 and np.allclose(wp, 0) and np.allclose(wm, 0)


@pytest.mark.parametrize("seed", range(3))
def test_las_vegas_feasible(seed):
    rng = np.random.default_rng(seed)
    P, w = random_conversion_problem(3, 2, 4, rng, workspace=1, free=2)
    # rebuild the trace in the controlled register
    d = P.oracle.dim
    trace = [w[:, t * d:(t + 1) * d] for t in range(w.shape[1] // d)]
    alpha = rng.uniform(0.5, 3, size=len(trace))
    W, (wp, wm), R = las_vegas_witnesses(trace, P.oracle, alpha, P.sigma, P.tau)
    assert check_feasibility(R, W).max_violation < 1e-9
    expect = sum(alpha[t] * np.linalg.norm(trace[t], axis=1) ** 2 for t in range(len(trace)))
    assert np.allclose(wp, expect)


def test_las_vegas_unit_schedule_counts_queries():
    # control register always fully occupied: every step contributes |psi|^2 = 1
    m, T = 2, 5
    O = BlockOracle.from_dense(np.stack([np.eye(2), np.diag([1.0, -1.0])]))
    psi = np.tile(np.array([[1.0, 1.0]]) / math.sqrt(2), (m, 1))
    run = run_query_algorithm(psi, [np.eye(2)] * (T + 1), O, 1)
    W, (wp, wm), R = las_vegas_witnesses(run.controlled, O, np.ones(T), psi, run.output)
    assert np.allclose(wp, T) and np.allclose(wm, T)
    assert check_feasibility(R, W).max_violation < 1e-9
