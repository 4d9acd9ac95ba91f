"""Oracle contracts, the benchmark catalog, and derivative verification."""

import numpy as np
import pytest

from clfopt.objectives import (
    ObjectiveOracle,
    finite_difference_check,
    make_benchmark,
)

DIAG14 = make_benchmark("diagonal_quadratic", diag=(1.0, 4.0))


def quartic_1d():
    return ObjectiveOracle(
        dimension=1,
        value_fn=lambda x: float(x[0] ** 4 / 4.0),
        gradient_fn=lambda x: x**3,
        hessian_fn=lambda x: np.array([[3.0 * x[0] ** 2]]),
    )


def test_value_at_minimum_is_zero():
    assert DIAG14.oracle.value([0.0, 0.0]) == 0.0


def test_value_hand_evaluation():
    assert DIAG14.oracle.value([1.0, 1.0]) == pytest.approx(2.5, abs=0)


def test_value_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        DIAG14.oracle.value([1.0, 2.0, 3.0])


def test_value_rejects_nonfinite_point():
    with pytest.raises(ValueError):
        DIAG14.oracle.value([np.inf, 0.0])


def test_gradient_hand_evaluation():
    np.testing.assert_array_equal(DIAG14.oracle.gradient([1.0, 1.0]), [1.0, 4.0])


def test_gradient_vanishes_at_minimizer():
    np.testing.assert_array_equal(DIAG14.oracle.gradient([0.0, 0.0]), [0.0, 0.0])


def test_logistic_gradient_matches_finite_differences():
    problem = make_benchmark("logistic_l2", dim=5, n_samples=40, seed=0, reg=0.1)
    rng = np.random.default_rng(3)
    report = finite_difference_check(problem.oracle, rng.standard_normal(5))
    assert report.gradient_error < 1e-5


def test_hessian_of_quadratic_is_constant():
    for x in ([0.0, 0.0], [1.0, 1.0], [-3.0, 7.0]):
        np.testing.assert_array_equal(DIAG14.oracle.hessian(x), np.diag([1.0, 4.0]))


def test_logistic_hessian_positive_definite_with_regularization():
    problem = make_benchmark("logistic_l2", dim=5, n_samples=40, seed=0, reg=0.1)
    rng = np.random.default_rng(4)
    for _ in range(5):
        h = problem.oracle.hessian(rng.standard_normal(5))
        np.testing.assert_allclose(h, h.T, atol=1e-12)
        assert np.linalg.eigvalsh(h).min() > 0


def test_quartic_hessian_hand_evaluation():
    np.testing.assert_array_equal(quartic_1d().hessian([2.0]), [[12.0]])


def test_finite_difference_exact_on_quadratic():
    report = finite_difference_check(DIAG14.oracle, [1.3, -0.7], step=1e-5)
    assert report.gradient_error < 1e-8


def test_finite_difference_absolute_at_zero_gradient():
    # analytic gradient is zero at the minimizer; the error denominator
    # floors at 1 so the report is an absolute deviation, not 0/0
    report = finite_difference_check(DIAG14.oracle, [0.0, 0.0], step=1e-5)
    assert np.isfinite(report.gradient_error)
    assert report.gradient_error < 1e-10


def test_finite_difference_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        finite_difference_check(DIAG14.oracle, [1.0, 1.0], step=0.0)
    with pytest.raises(ValueError):
        finite_difference_check(DIAG14.oracle, [1.0, 1.0], step=-1e-5)


def test_make_diagonal_quadratic_minimizer():
    problem = make_benchmark("diagonal_quadratic", diag=(1.0, 4.0))
    assert np.max(np.abs(problem.oracle.gradient(problem.known_minimizer))) < 1e-10


def test_make_random_spd_is_strictly_convex():
    problem = make_benchmark("random_spd_quadratic", dim=8, seed=42)
    assert problem.strictly_convex
    eigs = np.linalg.eigvalsh(problem.oracle.hessian(np.zeros(8)))
    assert eigs.min() > 0


def test_rosenbrock_is_flagged_nonconvex():
    problem = make_benchmark("rosenbrock", dim=2)
    assert not problem.strictly_convex
    # indefinite Hessian at a sampled point
    eigs = np.linalg.eigvalsh(problem.oracle.hessian([0.0, 1.0]))
    assert eigs.min() < 0 < eigs.max()


def test_unknown_benchmark_name():
    with pytest.raises(KeyError):
        make_benchmark("frobnicator")


@pytest.mark.parametrize(
    "name,params",
    [
        ("diagonal_quadratic", {"diag": (1.0, 4.0)}),
        ("random_spd_quadratic", {"dim": 8, "seed": 42}),
        ("logistic_l2", {"dim": 5, "n_samples": 40, "seed": 0, "reg": 0.1}),
        ("rosenbrock", {"dim": 4}),
    ],
)
def test_catalog_derivatives_at_random_points(name, params):
    problem = make_benchmark(name, **params)
    rng = np.random.default_rng(11)
    n = problem.oracle.dimension
    for _ in range(25):
        x = problem.default_start + 0.5 * rng.standard_normal(n)
        report = finite_difference_check(problem.oracle, x)
        assert report.gradient_error < 1e-5
        assert report.hessian_error < 1e-4


def test_strict_convexity_at_random_points():
    rng = np.random.default_rng(12)
    for name, params in (
        ("random_spd_quadratic", {"dim": 8, "seed": 42}),
        ("logistic_l2", {"dim": 5, "n_samples": 40, "seed": 0, "reg": 0.1}),
    ):
        problem = make_benchmark(name, **params)
        n = problem.oracle.dimension
        for _ in range(100):
            x = rng.standard_normal(n)
            assert np.linalg.eigvalsh(problem.oracle.hessian(x)).min() > 0


def test_generation_is_deterministic_in_seed():
    a = make_benchmark("random_spd_quadratic", dim=8, seed=42)
    b = make_benchmark("random_spd_quadratic", dim=8, seed=42)
    c = make_benchmark("random_spd_quadratic", dim=8, seed=43)
    x = np.linspace(-1.0, 1.0, 8)
    assert a.oracle.value(x) == b.oracle.value(x)
    np.testing.assert_array_equal(a.oracle.hessian(x), b.oracle.hessian(x))
    np.testing.assert_array_equal(a.known_minimizer, b.known_minimizer)
    assert a.oracle.value(x) != c.oracle.value(x)


def test_logistic_determinism():
    a = make_benchmark("logistic_l2", dim=5, n_samples=40, seed=7, reg=0.1)
    b = make_benchmark("logistic_l2", dim=5, n_samples=40, seed=7, reg=0.1)
    w = np.full(5, 0.3)
    assert a.oracle.value(w) == b.oracle.value(w)
    np.testing.assert_array_equal(a.oracle.gradient(w), b.oracle.gradient(w))


def test_overflow_raises_numeric_signal():
    problem = make_benchmark("rosenbrock", dim=2)
    with pytest.raises(FloatingPointError):
        problem.oracle.value([1e100, 0.0])


def test_hessian_symmetrized():
    skew = ObjectiveOracle(
        dimension=2,
        value_fn=lambda x: 0.0,
        gradient_fn=lambda x: np.zeros(2),
        hessian_fn=lambda x: np.array([[1.0, 2.0], [0.0, 1.0]]),
    )
    h = skew.hessian([0.0, 0.0])
    np.testing.assert_array_equal(h, h.T)
