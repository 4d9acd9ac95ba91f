"""The CLF family: values, active sets, tie handling, and the unbiased
subgradient selection with its convex-hull membership oracle."""

import numpy as np
import pytest

from clfopt.clf import (
    KINDS,
    BlockStructure,
    Converged,
    LyapunovFunction,
    active_set,
    clf_value,
    extreme_subgradients,
    subdifferential_membership,
    unbiased_subgradient,
)
from clfopt.objectives import make_benchmark

VC = LyapunovFunction("max_squares")
VINF = LyapunovFunction("inf_norm")
VSMOOTH = LyapunovFunction("smooth_quadratic")


def unit_blocks(*sizes):
    return BlockStructure(sizes=sizes, matrices=tuple(np.eye(s) for s in sizes))


def make_clf(kind, dim):
    if kind == "block_max":
        half = dim // 2
        sizes = (half, dim - half) if half else (dim,)
        return LyapunovFunction(kind, blocks=unit_blocks(*sizes))
    return LyapunovFunction(kind)


def test_value_max_squares():
    assert clf_value(VC, [-1.0, -4.0]) == 8.0


def test_value_inf_norm():
    assert clf_value(VINF, [-1.0, -4.0]) == 4.0


@pytest.mark.parametrize("kind", KINDS)
def test_value_zero_at_origin(kind):
    lyap = make_clf(kind, 4)
    assert clf_value(lyap, np.zeros(4)) == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_value_positive_away_from_origin(kind):
    rng = np.random.default_rng(0)
    lyap = make_clf(kind, 6)
    for _ in range(100):
        lam = rng.standard_normal(6)
        assert clf_value(lyap, lam) > 0.0


def test_active_set_unique_maximizer():
    a = active_set(VC, [-1.0, -4.0])
    assert a.indices == (1,)
    np.testing.assert_array_equal(a.q, [0.0, 1.0])


def test_active_set_exact_tie():
    a = active_set(VC, [2.0, -2.0])
    assert a.indices == (0, 1)
    np.testing.assert_array_equal(a.q, [1.0, 1.0])


def test_active_set_blocks():
    lyap = LyapunovFunction("block_max", blocks=unit_blocks(1, 1))
    a = active_set(lyap, [-1.0, -4.0])
    assert a.indices == (1,)  # block scores 0.5 vs 8
    np.testing.assert_array_equal(a.q, [0.0, 1.0])


def test_active_set_zero_costate_signals_convergence():
    with pytest.raises(Converged):
        active_set(VC, [0.0, 0.0])
    with pytest.raises(Converged):
        unbiased_subgradient(VINF, np.zeros(3))


def test_active_set_relative_tie_tolerance():
    near = np.array([1.0, 1.0 - 2e-10])
    assert active_set(VC, near).indices == (0, 1)
    assert active_set(VC, np.array([1.0, 1.0 - 1e-3])).indices == (0,)


def test_active_indices_ascending():
    rng = np.random.default_rng(5)
    for _ in range(50):
        lam = rng.standard_normal(8)
        idx = active_set(VC, lam).indices
        assert list(idx) == sorted(idx)


def test_unbiased_subgradient_tie():
    sub = unbiased_subgradient(VC, [2.0, -2.0])
    assert sub.gamma == 0.5
    np.testing.assert_array_equal(sub.direction, [1.0, -1.0])


def test_unbiased_subgradient_singleton():
    sub = unbiased_subgradient(VC, [-1.0, -4.0])
    assert sub.gamma == 1.0
    np.testing.assert_array_equal(sub.direction, [0.0, -4.0])


def test_unbiased_subgradient_inf_norm():
    sub = unbiased_subgradient(VINF, [-1.0, -4.0])
    np.testing.assert_array_equal(sub.direction, [0.0, -1.0])


def test_unbiased_subgradient_smooth():
    lam = np.array([0.5, -2.0])
    sub = unbiased_subgradient(VSMOOTH, lam)
    assert sub.gamma == 1.0
    np.testing.assert_array_equal(sub.direction, lam)


def test_membership_tie_candidate():
    assert subdifferential_membership(VC, [2.0, -2.0], [1.0, -1.0])


def test_membership_rejects_scaled_candidate():
    # would need convex weights summing to 2
    assert not subdifferential_membership(VC, [2.0, -2.0], [2.0, -2.0])


def test_membership_unique_extreme():
    assert subdifferential_membership(VC, [-1.0, -4.0], [0.0, -4.0])


@pytest.mark.parametrize("kind", KINDS)
def test_every_selection_passes_membership(kind):
    rng = np.random.default_rng(7)
    lyap = make_clf(kind, 6)
    for trial in range(200):
        lam = rng.standard_normal(6)
        if trial % 4 == 0:  # force an exact two-way tie
            lam[1] = -lam[0]
        if trial % 8 == 0 and kind == "block_max":
            lam[3:6] = 0.0
            lam[3:5] = lam[0:2][::-1]  # equal block scores by construction
        sub = unbiased_subgradient(lyap, lam)
        assert subdifferential_membership(lyap, lam, sub.direction)


@pytest.mark.parametrize("kind", ("max_squares", "inf_norm", "block_max"))
def test_active_set_scale_invariant(kind):
    rng = np.random.default_rng(8)
    lyap = make_clf(kind, 6)
    for _ in range(50):
        lam = rng.standard_normal(6)
        base = active_set(lyap, lam).indices
        for c in (0.5, 2.0, 1024.0, float(rng.uniform(0.1, 10.0))):
            assert active_set(lyap, c * lam).indices == base


def test_gauss_southwell_selection_from_costate():
    # with lambda = -grad E, the active coordinate of the max-squares CLF is
    # the largest-magnitude gradient entry
    problem = make_benchmark("random_spd_quadratic", dim=8, seed=3)
    rng = np.random.default_rng(9)
    for _ in range(100):
        x = rng.standard_normal(8)
        g = problem.oracle.gradient(x)
        a = active_set(VC, -g)
        assert a.indices == (int(np.argmax(np.abs(g))),)


def test_hadamard_support_matches_active_set():
    rng = np.random.default_rng(10)
    for _ in range(50):
        lam = rng.standard_normal(7)
        a = active_set(VC, lam)
        support = tuple(np.flatnonzero(a.q * lam))
        assert support == a.indices


def test_extreme_subgradients_rows():
    rows = extreme_subgradients(VC, np.array([2.0, -2.0]))
    np.testing.assert_array_equal(rows, [[2.0, 0.0], [0.0, -2.0]])


def test_block_value_and_subgradient():
    lyap = LyapunovFunction("block_max", blocks=unit_blocks(2, 2))
    lam = np.array([1.0, 1.0, -3.0, -4.0])
    assert clf_value(lyap, lam) == 12.5
    sub = unbiased_subgradient(lyap, lam)
    np.testing.assert_array_equal(sub.direction, [0.0, 0.0, -3.0, -4.0])


def test_block_structure_validation():
    with pytest.raises(ValueError):
        BlockStructure(sizes=(2,), matrices=(np.array([[1.0, 2.0], [2.0, 1.0]]),))  # indefinite
    with pytest.raises(ValueError):
        BlockStructure(sizes=(2, 1), matrices=(np.eye(2),))  # count mismatch
    lyap = LyapunovFunction("block_max", blocks=unit_blocks(2, 2))
    with pytest.raises(ValueError):
        clf_value(lyap, np.zeros(5))  # dimension mismatch


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        LyapunovFunction("huber")


def test_negative_tie_tolerance_rejected():
    with pytest.raises(ValueError):
        LyapunovFunction("max_squares", tie_tolerance=-1e-9)
