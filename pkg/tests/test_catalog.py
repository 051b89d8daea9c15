import math

import numpy as np
import pytest

from ggc.catalog import (
    argmin,
    bit_select,
    dense_learning,
    first_marked,
    first_marked_domain,
    first_marked_index,
    harmonic_weights,
    minimum_finding,
    sqrt_weights,
)
from ggc.errors import AllZeroInput, NotDistinct


def test_first_marked_sqrt_weights_closed_form():
    a, b = sqrt_weights(5)
    fx = first_marked_index(5, a, b)
    i = [first_marked(x) for x in fx.domain].index(3)
    expected = 1 + 1 / math.sqrt(2) + math.sqrt(3)
    assert fx.expected_plus[i] == pytest.approx(expected)
    assert fx.expected_minus[i] == pytest.approx(expected)
    assert fx.result.sizes_plus[i] == pytest.approx(3.4392, abs=1e-4)
    assert fx.result.sizes_minus[i] == pytest.approx(expected, abs=1e-9)


def test_first_marked_harmonic_weights_closed_form():
    a, b = harmonic_weights(6)
    fx = first_marked_index(6, a, b)
    i = [first_marked(x) for x in fx.domain].index(4)
    assert fx.result.sizes_plus[i] == pytest.approx(17 / 6, abs=1e-9)
    assert fx.result.sizes_minus[i] == pytest.approx(7.0, abs=1e-9)


def test_first_marked_index_one():
    rng = np.random.default_rng(0)
    a = rng.uniform(0.1, 3, size=4)
    b = rng.uniform(0.1, 3, size=4)
    fx = first_marked_index(4, a, b)
    assert fx.result.sizes_plus[0] == pytest.approx(b[0])
    assert fx.result.sizes_minus[0] == pytest.approx(1 / a[0])
    assert max(fx.size_errors()) <= 1e-9
    assert fx.result.feasibility.max_violation <= 1e-8


def test_first_marked_rejects_zero_string():
    with pytest.raises(AllZeroInput):
        first_marked_index(3, [1, 1, 1], [1, 1, 1], domain=[(0, 0, 0)])
    with pytest.raises(AllZeroInput):
        first_marked((0, 0))


def test_first_marked_sqrt_growth():
    n = 64
    a, b = sqrt_weights(n)
    fx = first_marked_index(n, a, b, domain=first_marked_domain(n, limit=64))
    i = np.array([first_marked(x) for x in fx.domain])
    # sum_{j<i} j^{-1/2} <= 2 sqrt(i - 1), plus the final sqrt(i)
    bound = 2 * np.sqrt(i - 1) + np.sqrt(i)
    assert np.all(fx.result.sizes_plus <= bound + 1e-9)
    assert np.all(fx.result.sizes_minus <= bound + 1e-9)
    assert np.all(bound <= 3 * np.sqrt(i))
    np.testing.assert_allclose(fx.result.sizes_plus, fx.expected_plus, atol=1e-9)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_dense_learning_sizes(n):
    fx = dense_learning(n)
    assert len(fx.domain) == 2 ** n
    np.testing.assert_allclose(fx.result.sizes_plus, n, atol=1e-9)
    np.testing.assert_allclose(fx.result.sizes_minus, n, atol=1e-9)
    assert fx.result.feasibility.max_violation <= 1e-8
    # the composed net-flow ends at the leaf naming x
    leaves = fx.instance.boundary[1:]
    for i, x in enumerate(fx.domain):
        j = int(np.argmin(fx.result.problem.delta[i]))
        assert fx.instance.boundary[j] == "".join(map(str, x))
        assert j >= 1 and leaves[j - 1] == "".join(map(str, x))


def test_minimum_finding_small_cases():
    fx = minimum_finding(2)
    np.testing.assert_allclose(fx.result.sizes_plus, 2.0, atol=1e-9)
    np.testing.assert_allclose(fx.result.sizes_minus, 1.0, atol=1e-9)
    fx = minimum_finding(4)
    assert len(fx.domain) == 24
    np.testing.assert_allclose(fx.result.sizes_minus, 11 / 6, atol=1e-9)
    np.testing.assert_allclose(fx.result.sizes_plus, 4.0, atol=1e-9)
    for i, x in enumerate(fx.domain):
        j = int(np.argmin(fx.result.problem.delta[i]))
        assert fx.instance.boundary[j] == f"leaf{argmin(x)}"


def test_minimum_finding_sixteen():
    fx = minimum_finding(16, samples=6)
    h15 = sum(1 / k for k in range(1, 16))
    assert h15 == pytest.approx(3.3182, abs=1e-4)
    np.testing.assert_allclose(fx.result.sizes_minus, h15, atol=1e-9)
    np.testing.assert_allclose(fx.result.sizes_plus, 16.0, atol=1e-9)
    assert fx.result.feasibility.max_violation <= 1e-8


def test_minimum_finding_logarithmic_growth():
    h = [sum(1 / k for k in range(1, n)) for n in range(2, 129)]
    for n in range(2, 65):
        assert h[2 * n - 2] - h[n - 2] <= 1.0


def test_minimum_finding_rejects_repeats():
    with pytest.raises(NotDistinct):
        minimum_finding(3, domain=[(0, 0, 1)])


def test_bit_select():
    fx = bit_select()
    f = np.array([x[1 + x[0]] for x in fx.domain])
    np.testing.assert_allclose(fx.result.problem.delta[:, 0], f, atol=1e-12)
    assert max(fx.size_errors()) <= 1e-9
    assert fx.result.feasibility.max_violation <= 1e-8
