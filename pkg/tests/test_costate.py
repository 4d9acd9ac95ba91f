"""Costate convention, the zero-Hamiltonian identity, and the backward
adjoint cross-check of lambda(t) = -nu0 grad E(x(t))."""

import numpy as np
import pytest

from clfopt.costate import (
    CostateState,
    costate_from_gradient,
    hamiltonian,
    integrate_adjoint,
)
from clfopt.controller import NewtonController
from clfopt.flow import FlowConfig, run_flow
from clfopt.objectives import make_benchmark

DIAG14 = make_benchmark("diagonal_quadratic", diag=(1.0, 4.0))


def test_costate_hand_evaluation():
    cs = costate_from_gradient(DIAG14.oracle, [1.0, 1.0], nu0=1.0)
    np.testing.assert_array_equal(cs.lambda_x, [-1.0, -4.0])


def test_costate_zero_at_minimizer():
    cs = costate_from_gradient(DIAG14.oracle, [0.0, 0.0])
    np.testing.assert_array_equal(cs.lambda_x, [0.0, 0.0])


def test_costate_linear_in_nu0():
    cs = costate_from_gradient(DIAG14.oracle, [1.0, 1.0], nu0=2.0)
    np.testing.assert_array_equal(cs.lambda_x, [-2.0, -8.0])


def test_costate_rejects_nonpositive_nu0():
    for nu0 in (0.0, -1.0):
        with pytest.raises(ValueError):
            costate_from_gradient(DIAG14.oracle, [1.0, 1.0], nu0=nu0)


def test_hamiltonian_zero_on_extremals():
    rng = np.random.default_rng(0)
    problem = make_benchmark("random_spd_quadratic", dim=6, seed=1)
    for _ in range(50):
        x = rng.standard_normal(6)
        u = rng.standard_normal(6)
        nu0 = float(rng.uniform(0.1, 3.0))
        cs = costate_from_gradient(problem.oracle, x, nu0)
        h = hamiltonian(cs, problem.oracle, x, u)
        bound = 1e-12 * (1.0 + np.linalg.norm(cs.lambda_x) * np.linalg.norm(u))
        assert abs(h) <= bound


def test_hamiltonian_off_extremal():
    # gradient vanishes at the minimizer, so H reduces to lambda . u
    cs = CostateState(lambda_x=np.array([1.0, 0.0]), nu0=1.0)
    h = hamiltonian(cs, DIAG14.oracle, [0.0, 0.0], [3.0, 0.0])
    assert h == pytest.approx(3.0, abs=0)


def test_hamiltonian_zero_control():
    cs = costate_from_gradient(DIAG14.oracle, [1.0, 1.0])
    assert hamiltonian(cs, DIAG14.oracle, [1.0, 1.0], [0.0, 0.0]) == 0.0


def test_hamiltonian_rejects_dimension_mismatch():
    cs = costate_from_gradient(DIAG14.oracle, [1.0, 1.0])
    with pytest.raises(ValueError):
        hamiltonian(cs, DIAG14.oracle, [1.0, 1.0], [1.0, 0.0, 0.0])


def test_adjoint_zero_dynamics():
    times = np.linspace(0.0, 1.0, 11)
    xs = np.zeros((11, 2))
    us = np.zeros((11, 2))
    lam = integrate_adjoint(DIAG14.oracle, times, xs, us, 1.0, np.zeros(2), ode_tol=1e-6)
    np.testing.assert_array_equal(lam, np.zeros((11, 2)))


def _newton_flow_trace(problem, t_final=5.0, step=0.01):
    cfg = FlowConfig(controller=NewtonController(), t_span=(0.0, t_final),
                     step=step, grad_tol=1e-12)
    return run_flow(cfg, problem, problem.default_start)


def test_adjoint_matches_integral_of_motion():
    ode_tol = 1e-5
    trace = _newton_flow_trace(DIAG14)
    xs, us = trace.states, trace.control_array
    terminal = -DIAG14.oracle.gradient(xs[-1])
    lam = integrate_adjoint(DIAG14.oracle, trace.times, xs, us, 1.0, terminal, ode_tol)
    reference = np.array([-DIAG14.oracle.gradient(x) for x in xs])
    assert np.max(np.abs(lam - reference)) <= 10.0 * ode_tol


def test_adjoint_norm_decays_monotonically_on_newton_flow():
    trace = _newton_flow_trace(DIAG14)
    norms = [np.linalg.norm(DIAG14.oracle.gradient(x)) for x in trace.states]
    assert all(a > b for a, b in zip(norms[:-1], norms[1:]))


def test_adjoint_rejects_mismatched_grids():
    times = np.linspace(0.0, 1.0, 11)
    with pytest.raises(ValueError):
        integrate_adjoint(DIAG14.oracle, times, np.zeros((10, 2)), np.zeros((11, 2)),
                          1.0, np.zeros(2), ode_tol=1e-6)


def test_adjoint_rejects_nonpositive_tol():
    times = np.linspace(0.0, 1.0, 11)
    with pytest.raises(ValueError):
        integrate_adjoint(DIAG14.oracle, times, np.zeros((11, 2)), np.zeros((11, 2)),
                          1.0, np.zeros(2), ode_tol=0.0)
