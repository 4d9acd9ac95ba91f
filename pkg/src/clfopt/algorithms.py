"""Euler-discretized iterations derived from the controlled flow: damped
Newton, plain gradient descent, and the max-type coordinate descent family
(largest-gradient, block, and sign updates), plus an independently coded
classical Gauss-Southwell reference for equivalence testing.

Direct steps apply the unscaled marker vector q (the convex weight gamma is
absorbed into the step size); `step_cd_via_controller` produces the same
direction through the full costate -> subgradient -> ellipsoid-maximizer
pipeline and reports the step-size bookkeeping alpha = h * sigma * gamma * nu0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from . import clf as _clf
from .controller import ControlSet, MaxPrincipleController, SingularMetricError
from .objectives import BenchmarkProblem
from .trace import IterationTrace, TraceRecord

Array = np.ndarray

ALGORITHMS = ("newton", "gradient", "cd", "block_cd", "sign_cd")

SCHEDULE_KINDS = ("constant", "backtracking", "diminishing")


@dataclass(frozen=True)
class StepSchedule:
    """Step-size policy: a constant alpha, Armijo backtracking from alpha,
    or the diminishing sequence alpha/k."""

    kind: str = "constant"
    alpha: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; one of {SCHEDULE_KINDS}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < self.sufficient_decrease < 1:
            raise ValueError("sufficient_decrease must lie in (0, 1)")


@dataclass
class RunResult:
    trace: IterationTrace
    final_x: Array
    iterations: int
    converged: bool


def step_newton(problem: BenchmarkProblem, x, alpha: float) -> Array:
    """x - alpha * [hess E]^{-1} grad E."""
    oracle = problem.oracle
    x = np.asarray(x, dtype=float)
    try:
        d = scipy.linalg.solve(oracle.hessian(x), oracle.gradient(x), assume_a="sym")
    except scipy.linalg.LinAlgError as exc:
        raise SingularMetricError(f"Hessian is singular: {exc}") from None
    return x - alpha * d


def step_gradient(problem: BenchmarkProblem, x, alpha: float) -> Array:
    x = np.asarray(x, dtype=float)
    return x - alpha * problem.oracle.gradient(x)


def _cd_active(grad: Array, kind: str, tie_tolerance: float,
               blocks: Optional[_clf.BlockStructure] = None) -> _clf.ActiveSet:
    lyap = _clf.LyapunovFunction(kind, blocks=blocks, tie_tolerance=tie_tolerance)
    return _clf.active_set(lyap, -grad)  # raises Converged when grad == 0


def step_cd(problem: BenchmarkProblem, x, alpha: float, tie_tolerance: float = 1e-9) -> Array:
    """Update every coordinate whose gradient magnitude attains the max
    (Gauss-Southwell when the maximizer is unique)."""
    x = np.asarray(x, dtype=float)
    grad = problem.oracle.gradient(x)
    active = _cd_active(grad, "max_squares", tie_tolerance)
    return x - alpha * (active.q * grad)


def step_block_cd(problem: BenchmarkProblem, x, alpha: float,
                  blocks: _clf.BlockStructure, tie_tolerance: float = 1e-9) -> Array:
    """Update the max-scoring block(s) along Q grad E."""
    x = np.asarray(x, dtype=float)
    grad = problem.oracle.gradient(x)
    active = _cd_active(grad, "block_max", tie_tolerance, blocks)
    return x - alpha * (active.q * blocks.apply(grad))


def step_sign_cd(problem: BenchmarkProblem, x, alpha: float, tie_tolerance: float = 1e-9) -> Array:
    """Move the max-gradient coordinate(s) by exactly alpha against the
    gradient sign; update components are always in {-alpha, 0, +alpha}."""
    x = np.asarray(x, dtype=float)
    grad = problem.oracle.gradient(x)
    active = _cd_active(grad, "inf_norm", tie_tolerance)
    return x - alpha * (active.q * np.sign(grad))


@dataclass(frozen=True)
class ControllerStep:
    """One Euler step produced by the full controller pipeline, with the
    step-size decomposition recorded."""

    x_next: Array
    u: Array
    h: float
    sigma: float
    gamma: float
    nu0: float

    @property
    def alpha(self) -> float:
        return self.h * self.sigma * self.gamma * self.nu0


def step_cd_via_controller(problem: BenchmarkProblem, x, delta: float = 1.0,
                           h: float = 1.0, tie_tolerance: float = 1e-9,
                           nu0: float = 1.0) -> ControllerStep:
    """Coordinate descent through the pipeline: costate, unbiased max-squares
    subgradient, Hessian-metric ellipsoid maximizer, Euler update x + h u.

    The direction is parallel to step_cd's; the realized step size is the
    product h * sigma * gamma * nu0.
    """
    x = np.asarray(x, dtype=float)
    controller = MaxPrincipleController(
        clf=_clf.LyapunovFunction("max_squares", tie_tolerance=tie_tolerance),
        control_set=ControlSet(metric_kind="hessian", delta=delta),
        nu0=nu0,
    )
    ev = controller.evaluate(problem.oracle, x)
    return ControllerStep(x_next=x + h * ev.u, u=ev.u, h=h,
                          sigma=ev.sigma, gamma=ev.gamma, nu0=nu0)


def _direction(algorithm: str, oracle, x: Array, grad: Array, hess: Array,
               blocks, tie_tolerance: float):
    """Descent direction d (the update is x - alpha d) plus the diagnostics
    recorded in traces: CLF value, active indices, gamma, and the unbiased
    subgradient direction used for the dissipation column."""
    lam = -grad
    if algorithm in ("newton", "gradient"):
        if algorithm == "newton":
            try:
                d = scipy.linalg.solve(hess, grad, assume_a="sym")
            except scipy.linalg.LinAlgError as exc:
                raise SingularMetricError(f"Hessian is singular: {exc}") from None
        else:
            d = grad
        v = 0.5 * float(lam @ lam)
        return d, v, tuple(range(grad.size)), 1.0, lam

    kind = {"cd": "max_squares", "block_cd": "block_max", "sign_cd": "inf_norm"}[algorithm]
    lyap = _clf.LyapunovFunction(kind, blocks=blocks, tie_tolerance=tie_tolerance)
    active = _clf.active_set(lyap, lam)
    sub = _clf.unbiased_subgradient(lyap, lam, active)
    if algorithm == "cd":
        d = active.q * grad
    elif algorithm == "block_cd":
        d = active.q * blocks.apply(grad)
    else:
        d = active.q * np.sign(grad)
    return d, _clf.clf_value(lyap, lam), active.indices, sub.gamma, sub.direction


def _backtrack(oracle, x: Array, d: Array, energy: float, proxy: float,
               schedule: StepSchedule) -> float:
    alpha = schedule.alpha
    if proxy <= 0:
        return alpha  # not a descent direction; no Armijo certificate exists
    for _ in range(60):
        if oracle.value(x - alpha * d) <= energy - schedule.sufficient_decrease * alpha * proxy:
            return alpha
        alpha *= schedule.shrink
    return alpha


def run(algorithm: str, problem: BenchmarkProblem, x0,
        schedule: StepSchedule = StepSchedule(kind="backtracking"),
        eps_inf: float = 1e-8, max_iter: int = 10**6,
        blocks: Optional[_clf.BlockStructure] = None,
        tie_tolerance: float = 1e-9) -> RunResult:
    """Iterate the chosen step until the gradient sup-norm drops below
    eps_inf or max_iter is exhausted (the latter is not an error).

    Every iterate is recorded; the Hamiltonian column uses the realized
    displacement as the control proxy and nu0 = 1.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; one of {ALGORITHMS}")
    if algorithm == "block_cd" and blocks is None:
        raise ValueError("block_cd requires a block structure")
    oracle = problem.oracle
    x = oracle._check_point(np.asarray(x0, dtype=float)).copy()
    trace = IterationTrace(dimension=oracle.dimension)
    converged = False
    k = 0

    while True:
        grad = oracle.gradient(x)
        grad_inf = float(np.max(np.abs(grad)))
        energy = oracle.value(x)
        lam = -grad
        if grad_inf < eps_inf or k >= max_iter:
            converged = grad_inf < eps_inf
            v_terminal = 0.0
            if algorithm in ("cd", "block_cd", "sign_cd") and grad.any():
                kind = {"cd": "max_squares", "block_cd": "block_max",
                        "sign_cd": "inf_norm"}[algorithm]
                v_terminal = _clf.clf_value(
                    _clf.LyapunovFunction(kind, blocks=blocks, tie_tolerance=tie_tolerance), lam)
            elif algorithm in ("newton", "gradient"):
                v_terminal = 0.5 * float(lam @ lam)
            trace.records.append(TraceRecord(
                step=k, x=x.copy(), energy=energy, grad_inf=grad_inf,
                clf_value=v_terminal, hamiltonian=0.0, active_set=(),
                alpha=0.0, gamma=0.0, dissipation_rate=0.0))
            break

        hess = oracle.hessian(x)
        try:
            d, v, active, gamma, subdir = _direction(
                algorithm, oracle, x, grad, hess, blocks, tie_tolerance)
        except _clf.Converged:
            converged = True
            trace.records.append(TraceRecord(
                step=k, x=x.copy(), energy=energy, grad_inf=grad_inf,
                clf_value=0.0, hamiltonian=0.0, active_set=(),
                alpha=0.0, gamma=0.0, dissipation_rate=0.0))
            break
        except SingularMetricError as err:
            err.partial_trace = trace
            raise

        if schedule.kind == "constant":
            alpha = schedule.alpha
        elif schedule.kind == "diminishing":
            alpha = schedule.alpha / (k + 1)
        else:
            alpha = _backtrack(oracle, x, d, energy, float(grad @ d), schedule)

        x_next = x - alpha * d
        u = x_next - x
        ham = float(lam @ u + grad @ u)
        diss = float(subdir @ (hess @ u))
        trace.records.append(TraceRecord(
            step=k, x=x.copy(), energy=energy, grad_inf=grad_inf,
            clf_value=v, hamiltonian=ham, active_set=active,
            alpha=alpha, gamma=gamma, dissipation_rate=diss))
        x = x_next
        k += 1

    return RunResult(trace=trace, final_x=x, iterations=k, converged=converged)


def reference_gauss_southwell(problem: BenchmarkProblem, x0,
                              schedule: Optional[StepSchedule] = None,
                              eps_inf: float = 1e-8, max_iter: int = 10**6,
                              exact_line_search: bool = False) -> RunResult:
    """Classical Gauss-Southwell coordinate descent, coded independently of
    the controller machinery: pick the coordinate with the largest gradient
    magnitude (first index on ties) and move it by alpha * grad_i, or by an
    exact 1-d line search when requested."""
    if schedule is None and not exact_line_search:
        schedule = StepSchedule(kind="backtracking")
    oracle = problem.oracle
    x = oracle._check_point(np.asarray(x0, dtype=float)).copy()
    trace = IterationTrace(dimension=oracle.dimension)
    converged = False
    k = 0

    while True:
        grad = oracle.gradient(x)
        grad_inf = float(np.max(np.abs(grad)))
        energy = oracle.value(x)
        if grad_inf < eps_inf or k >= max_iter:
            converged = grad_inf < eps_inf
            trace.records.append(TraceRecord(
                step=k, x=x.copy(), energy=energy, grad_inf=grad_inf,
                clf_value=0.5 * grad_inf**2, hamiltonian=0.0, active_set=(),
                alpha=0.0, gamma=0.0, dissipation_rate=0.0))
            break

        i = int(np.argmax(np.abs(grad)))
        gi = grad[i]
        if exact_line_search:
            def along(s, i=i, gi=gi):
                trial = x.copy()
                trial[i] = x[i] - s * gi
                return oracle.value(trial)
            alpha = float(minimize_scalar(along).x)
        elif schedule.kind == "constant":
            alpha = schedule.alpha
        elif schedule.kind == "diminishing":
            alpha = schedule.alpha / (k + 1)
        else:
            alpha = schedule.alpha
            proxy = gi * gi
            for _ in range(60):
                trial = x.copy()
                trial[i] = x[i] - alpha * gi
                if oracle.value(trial) <= energy - schedule.sufficient_decrease * alpha * proxy:
                    break
                alpha *= schedule.shrink

        x_next = x.copy()
        x_next[i] = x[i] - alpha * gi
        u = x_next - x
        hess = oracle.hessian(x)
        trace.records.append(TraceRecord(
            step=k, x=x.copy(), energy=energy, grad_inf=grad_inf,
            clf_value=0.5 * grad_inf**2, hamiltonian=float(-grad @ u + grad @ u),
            active_set=(i,), alpha=alpha, gamma=1.0,
            dissipation_rate=float(-gi * (hess @ u)[i])))
        x = x_next
        k += 1

    return RunResult(trace=trace, final_x=x, iterations=k, converged=converged)
