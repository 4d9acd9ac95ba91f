"""Costate bookkeeping: the multiplier convention, the Hamiltonian, and a
backward adjoint integration used to cross-check the gradient identity
lambda_x(t) = -nu0 * grad E(x(t)) along recorded trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objectives import ObjectiveOracle

Array = np.ndarray


@dataclass(frozen=True)
class CostateState:
    """Costate pair: the vector multiplier of x and the constant nu0 > 0
    multiplying the objective channel."""

    lambda_x: Array
    nu0: float


def costate_from_gradient(oracle: ObjectiveOracle, x, nu0: float = 1.0) -> CostateState:
    """Costate along an extremal: lambda_x = -nu0 * grad E(x)."""
    if nu0 <= 0:
        raise ValueError("nu0 must be positive")
    return CostateState(lambda_x=-nu0 * oracle.gradient(x), nu0=float(nu0))


def hamiltonian(costate: CostateState, oracle: ObjectiveOracle, x, u) -> float:
    """H = lambda_x . u + nu0 * grad E(x) . u.

    Identically zero whenever the costate comes from costate_from_gradient,
    for any control u.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (oracle.dimension,):
        raise ValueError(f"control has shape {u.shape}, expected ({oracle.dimension},)")
    if costate.lambda_x.shape != u.shape:
        raise ValueError("costate dimension does not match control dimension")
    return float(costate.lambda_x @ u + costate.nu0 * (oracle.gradient(x) @ u))


def integrate_adjoint(
    oracle: ObjectiveOracle,
    times,
    states,
    controls,
    nu0: float,
    terminal_lambda,
    ode_tol: float,
) -> Array:
    """Integrate d(lambda)/dt = -nu0 * hess E(x(t)) u(t) backward in time.

    `states` and `controls` are samples of a trajectory with xdot = u on the
    strictly increasing grid `times`; integration is classical fixed-step
    4th order on that grid.  Midpoint states are reconstructed by cubic
    Hermite interpolation (using xdot = u), midpoint controls by averaging.
    `ode_tol` is the caller's accuracy budget for the grid: results are
    meaningful to roughly that level and are compared against it in tests.

    Returns the costate sampled on `times`, lambda[k] at times[k], with
    lambda[-1] = terminal_lambda.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    controls = np.asarray(controls, dtype=float)
    if ode_tol <= 0:
        raise ValueError("ode_tol must be positive")
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a nonempty 1-d grid")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    n_t = times.size
    if states.shape != (n_t, oracle.dimension) or controls.shape != (n_t, oracle.dimension):
        raise ValueError("states and controls must share the time grid and dimension")

    def rhs(x, u):
        return -nu0 * (oracle.hessian(x) @ u)

    lam = np.empty((n_t, oracle.dimension))
    lam[-1] = np.asarray(terminal_lambda, dtype=float)
    for k in range(n_t - 2, -1, -1):
        h = times[k + 1] - times[k]
        x0, x1 = states[k], states[k + 1]
        u0, u1 = controls[k], controls[k + 1]
        x_mid = 0.5 * (x0 + x1) + (h / 8.0) * (u0 - u1)
        u_mid = 0.5 * (u0 + u1)
        k1 = rhs(x1, u1)
        k2 = rhs(x_mid, u_mid)
        k3 = k2
        k4 = rhs(x0, u0)
        lam[k] = lam[k + 1] - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return lam
