"""Continuous-time descent trajectories: integrate xdot = u(x) under a
state-feedback controller, recording objective, Lyapunov, and Hamiltonian
diagnostics at every accepted step."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import clf as _clf
from .controller import (
    DegenerateDriveError,
    NonSPDMetricError,
    SingularMetricError,
)
from .objectives import BenchmarkProblem
from .trace import TraceRecord

Array = np.ndarray

INTEGRATORS = ("rk4", "euler")

_DEGENERATE = (DegenerateDriveError, NonSPDMetricError, SingularMetricError)


@dataclass(frozen=True)
class FlowConfig:
    controller: object
    t_span: tuple = (0.0, 10.0)
    step: float = 1e-2
    method: str = "rk4"
    grad_tol: float = 1e-8

    def __post_init__(self):
        t0, tf = self.t_span
        if tf <= t0:
            raise ValueError("t_span must satisfy t_f > t_0")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.method not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.method!r}; one of {INTEGRATORS}")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


@dataclass
class FlowTrace:
    """Samples along a trajectory plus why it stopped.

    `controls` holds the controller output at each sample (parallel to
    `records`); the final sample's control is zero when the run terminated.
    """

    records: List[TraceRecord] = field(default_factory=list)
    controls: List[Array] = field(default_factory=list)
    terminated_reason: str = ""

    @property
    def times(self) -> Array:
        return np.array([r.step for r in self.records])

    @property
    def states(self) -> Array:
        return np.array([r.x for r in self.records])

    @property
    def control_array(self) -> Array:
        return np.array(self.controls)


@dataclass(frozen=True)
class DissipationReport:
    max_abs_hamiltonian: float
    min_clf_decrement: float
    clf_monotone: bool


def run_flow(config: FlowConfig, problem: BenchmarkProblem, x0) -> FlowTrace:
    """Integrate the trajectory from x0 until the gradient tolerance is met,
    the final time is reached, or the controller degenerates.

    The control is recomputed from the current state at every integrator
    stage.  A non-finite state raises FloatingPointError with the partial
    trace attached as `.partial_trace`.
    """
    oracle = problem.oracle
    controller = config.controller
    t0, tf = config.t_span
    x = oracle._check_point(np.asarray(x0, dtype=float)).copy()
    t = float(t0)
    trace = FlowTrace()

    def stage_u(xs):
        try:
            return controller.evaluate(oracle, xs).u
        except _clf.Converged:
            return np.zeros(oracle.dimension)

    while True:
        try:
            grad = oracle.gradient(x)
        except FloatingPointError as err:
            err.partial_trace = trace
            raise
        grad_inf = float(np.max(np.abs(grad))) if grad.size else 0.0
        energy = oracle.value(x)
        lam = -controller.nu0 * grad

        ev = None
        reason = None
        try:
            ev = controller.evaluate(oracle, x)
        except _clf.Converged:
            reason = "grad_tol"
        except _DEGENERATE:
            reason = "degenerate"
        except FloatingPointError as err:
            err.partial_trace = trace
            raise

        h = min(config.step, tf - t)
        record = TraceRecord(
            step=t,
            x=x.copy(),
            energy=energy,
            grad_inf=grad_inf,
            clf_value=ev.clf_value if ev else controller.lyapunov(lam),
            hamiltonian=ev.hamiltonian if ev else 0.0,
            active_set=ev.active if ev else (),
            alpha=h if ev else 0.0,
            gamma=ev.gamma if ev else 0.0,
            dissipation_rate=ev.dissipation_rate if ev else 0.0,
        )
        trace.records.append(record)
        trace.controls.append(ev.u.copy() if ev else np.zeros(oracle.dimension))

        if reason is None and grad_inf < config.grad_tol:
            reason = "grad_tol"
        if reason is None and t >= tf - 1e-12:
            reason = "t_f_reached"
        if reason is not None:
            record.alpha = 0.0
            trace.terminated_reason = reason
            return trace

        try:
            if config.method == "euler":
                x_next = x + h * ev.u
            else:
                k1 = ev.u
                k2 = stage_u(x + 0.5 * h * k1)
                k3 = stage_u(x + 0.5 * h * k2)
                k4 = stage_u(x + h * k3)
                x_next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        except _DEGENERATE:
            trace.terminated_reason = "degenerate"
            return trace
        except FloatingPointError as err:
            err.partial_trace = trace
            raise

        if not np.all(np.isfinite(x_next)):
            err = FloatingPointError(f"state became non-finite at t={t + h:.6g}")
            err.partial_trace = trace
            raise err
        x = x_next
        t += h


def dissipation_report(trace: FlowTrace) -> DissipationReport:
    """Summarize the trace's invariants: worst Hamiltonian magnitude and the
    smallest per-step Lyapunov decrement (monotone iff all decrements are
    strictly positive; vacuously monotone for a single sample)."""
    if not trace.records:
        raise ValueError("trace is empty")
    values = [r.clf_value for r in trace.records]
    decrements = [a - b for a, b in zip(values[:-1], values[1:])]
    return DissipationReport(
        max_abs_hamiltonian=max(abs(r.hamiltonian) for r in trace.records),
        min_clf_decrement=min(decrements) if decrements else 0.0,
        clf_monotone=all(d > 0 for d in decrements),
    )
