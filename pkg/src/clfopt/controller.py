"""Dissipation-maximizing controls over an ellipsoidal control set.

The control set is U = {u : <u, W u> <= delta} for an SPD metric W; the
maximizer of the linear dissipation objective <dV, hess E u> over U lies on
the boundary and solves W u = sigma * hess E * dV with sigma fixed by the
boundary condition.  With W equal to the Hessian the metric cancels and u
is parallel to dV, which is what makes the derived coordinate updates
Hessian-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import clf as _clf
from .costate import costate_from_gradient
from .objectives import ObjectiveOracle

Array = np.ndarray

METRIC_KINDS = ("hessian", "identity", "fixed_spd")


class DegenerateDriveError(RuntimeError):
    """hess E @ dV vanished with a nonzero costate: the dissipation
    hypothesis fails (e.g. the subgradient sits in the Hessian nullspace)."""


class NonSPDMetricError(RuntimeError):
    """The control-set metric failed its SPD factorization."""


class SingularMetricError(RuntimeError):
    """The Hessian is singular where an inverse is required."""


@dataclass(frozen=True)
class ControlSet:
    """Ellipsoidal control set {u : <u, W u> <= delta}.

    metric_kind picks W: the objective Hessian (optionally ridged), the
    identity, or a fixed SPD matrix supplied in `matrix`.
    """

    metric_kind: str = "hessian"
    delta: float = 1.0
    matrix: Optional[Array] = None
    ridge: float = 0.0

    def __post_init__(self):
        if self.metric_kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.metric_kind!r}; one of {METRIC_KINDS}")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")
        if self.metric_kind == "fixed_spd":
            if self.matrix is None:
                raise ValueError("fixed_spd requires a matrix")
            object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))

    def metric(self, oracle: ObjectiveOracle, x) -> Array:
        if self.metric_kind == "identity":
            w = np.eye(oracle.dimension)
        elif self.metric_kind == "fixed_spd":
            w = self.matrix.copy()
        else:
            w = oracle.hessian(x)
        if self.ridge > 0:
            w = w + self.ridge * np.eye(w.shape[0])
        return w


@dataclass(frozen=True)
class ControlOutput:
    """A control on the boundary of U, its multiplier, and the achieved
    dissipation rate <dV, hess E u> (positive under the dissipation
    hypothesis)."""

    u: Array
    sigma: float
    dissipation_rate: float


def max_principle_control(
    control_set: ControlSet,
    oracle: ObjectiveOracle,
    x,
    subgrad: _clf.SubgradientSelection,
) -> ControlOutput:
    """Maximize <subgrad, hess E u> over the ellipsoid.

    Solves W u0 = hess E @ subgrad and scales to the boundary:
    sigma = sqrt(delta / <u0, W u0>).
    """
    d = np.asarray(subgrad.direction, dtype=float)
    hess = oracle.hessian(x)
    g = hess @ d
    if not g.any():
        raise DegenerateDriveError("hess E @ dV is zero; cannot dissipate from here")
    w = control_set.metric(oracle, x)
    try:
        factor = scipy.linalg.cho_factor(w)
    except scipy.linalg.LinAlgError as exc:
        raise NonSPDMetricError(f"control-set metric is not SPD: {exc}") from None
    u0 = scipy.linalg.cho_solve(factor, g)
    quad = float(g @ u0)  # g^T W^{-1} g
    if not np.isfinite(quad) or quad <= 0:
        raise NonSPDMetricError("metric quadratic form is not positive")
    sigma = float(np.sqrt(control_set.delta / quad))
    u = sigma * u0
    rate = float(d @ (hess @ u))
    return ControlOutput(u=u, sigma=sigma, dissipation_rate=rate)


def verify_maximizer(
    control_set: ControlSet,
    oracle: ObjectiveOracle,
    x,
    subgrad: _clf.SubgradientSelection,
    u,
    samples: int = 10_000,
    seed: int = 0,
) -> bool:
    """Brute-force check of the maximum principle: draw boundary controls
    in random directions and return True iff none beats the candidate's
    dissipation objective by more than 1e-8 relative."""
    if samples < 1:
        raise ValueError("samples must be positive")
    u = np.asarray(u, dtype=float)
    hess = oracle.hessian(x)
    drive = hess @ np.asarray(subgrad.direction, dtype=float)
    candidate = float(drive @ u)
    w = control_set.metric(oracle, x)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, oracle.dimension))
    quad = np.einsum("ij,jk,ik->i", z, w, z)
    quad[quad == 0] = 1.0  # zero draws are infeasible directions; skip them
    scale = np.sqrt(control_set.delta / quad)
    best = float(np.max((z @ drive) * scale))
    return best <= candidate + 1e-8 * abs(candidate)


def newton_control(oracle: ObjectiveOracle, x, costate) -> ControlOutput:
    """u = [hess E]^{-1} lambda_x, the candidate control whose closed loop
    contracts the costate at rate nu0 (damped Newton after discretization).

    No boundary scaling applies (sigma = 1); the dissipation rate is
    reported against the smooth quadratic CLF, <lambda, hess E u>.
    """
    hess = oracle.hessian(x)
    lam = np.asarray(costate.lambda_x, dtype=float)
    try:
        u = scipy.linalg.solve(hess, lam, assume_a="sym")
    except scipy.linalg.LinAlgError as exc:
        raise SingularMetricError(f"Hessian is singular: {exc}") from None
    if not np.all(np.isfinite(u)):
        raise SingularMetricError("Hessian solve produced non-finite control")
    rate = float(lam @ (hess @ u))
    return ControlOutput(u=u, sigma=1.0, dissipation_rate=rate)


@dataclass(frozen=True)
class ControllerEval:
    """Everything a trajectory recorder wants to know at one state."""

    u: Array
    lambda_x: Array
    clf_value: float
    hamiltonian: float
    dissipation_rate: float
    sigma: float
    gamma: float
    active: tuple


@dataclass(frozen=True)
class MaxPrincipleController:
    """State-feedback law: costate from the gradient, unbiased CLF
    subgradient, then the ellipsoid maximizer."""

    clf: _clf.LyapunovFunction
    control_set: ControlSet = ControlSet()
    nu0: float = 1.0

    def lyapunov(self, lam) -> float:
        return _clf.clf_value(self.clf, lam)

    def evaluate(self, oracle: ObjectiveOracle, x) -> ControllerEval:
        grad = oracle.gradient(x)
        lam = -self.nu0 * grad
        active = _clf.active_set(self.clf, lam)  # raises Converged at stationarity
        subgrad = _clf.unbiased_subgradient(self.clf, lam, active)
        out = max_principle_control(self.control_set, oracle, x, subgrad)
        ham = float(lam @ out.u + self.nu0 * (grad @ out.u))
        return ControllerEval(
            u=out.u,
            lambda_x=lam,
            clf_value=_clf.clf_value(self.clf, lam),
            hamiltonian=ham,
            dissipation_rate=out.dissipation_rate,
            sigma=out.sigma,
            gamma=subgrad.gamma,
            active=active.indices,
        )


@dataclass(frozen=True)
class NewtonController:
    """State-feedback law u = [hess E]^{-1} lambda_x."""

    nu0: float = 1.0

    def lyapunov(self, lam) -> float:
        lam = np.asarray(lam, dtype=float)
        return 0.5 * float(lam @ lam)

    def evaluate(self, oracle: ObjectiveOracle, x) -> ControllerEval:
        grad = oracle.gradient(x)
        lam = -self.nu0 * grad
        if not lam.any():
            raise _clf.Converged("costate is zero")
        out = newton_control(oracle, x, costate_from_gradient(oracle, x, self.nu0))
        ham = float(lam @ out.u + self.nu0 * (grad @ out.u))
        return ControllerEval(
            u=out.u,
            lambda_x=lam,
            clf_value=self.lyapunov(lam),
            hamiltonian=ham,
            dissipation_rate=out.dissipation_rate,
            sigma=1.0,
            gamma=1.0,
            active=tuple(range(oracle.dimension)),
        )
