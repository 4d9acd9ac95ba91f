"""Objective-function oracles and the benchmark-problem catalog.

An oracle bundles analytic value/gradient/Hessian callables for a smooth
function on R^n.  The catalog provides deterministic, seed-reproducible
test problems; Rosenbrock is included as a deliberately non-convex stress
case and is flagged as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

CATALOG_NAMES = ("random_spd_quadratic", "diagonal_quadratic", "logistic_l2", "rosenbrock")


@dataclass(frozen=True)
class ObjectiveOracle:
    """Twice continuously differentiable objective with analytic derivatives.

    Evaluation points are validated for shape and finiteness; a non-finite
    result raises FloatingPointError.  The Hessian is symmetrized on return
    so callers can rely on exact symmetry.
    """

    dimension: int
    value_fn: Callable[[Array], float]
    gradient_fn: Callable[[Array], Array]
    hessian_fn: Callable[[Array], Array]

    def _check_point(self, x) -> Array:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"expected a point of dimension {self.dimension}, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("evaluation point has non-finite entries")
        return x

    def value(self, x) -> float:
        x = self._check_point(x)
        e = float(self.value_fn(x))
        if not np.isfinite(e):
            raise FloatingPointError("objective value is non-finite")
        return e

    def gradient(self, x) -> Array:
        x = self._check_point(x)
        g = np.asarray(self.gradient_fn(x), dtype=float)
        if g.shape != (self.dimension,):
            raise ValueError(f"gradient callable returned shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("gradient is non-finite")
        return g

    def hessian(self, x) -> Array:
        x = self._check_point(x)
        h = np.asarray(self.hessian_fn(x), dtype=float)
        if h.shape != (self.dimension, self.dimension):
            raise ValueError(f"hessian callable returned shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise FloatingPointError("hessian is non-finite")
        return 0.5 * (h + h.T)


@dataclass(frozen=True)
class BenchmarkProblem:
    """A cataloged objective together with what is known about it."""

    name: str
    oracle: ObjectiveOracle
    known_minimizer: Optional[Array]
    strictly_convex: bool
    default_start: Array


@dataclass(frozen=True)
class FiniteDifferenceReport:
    gradient_error: float
    hessian_error: float
    step: float


def finite_difference_check(oracle: ObjectiveOracle, x, step: float | None = None) -> FiniteDifferenceReport:
    """Compare analytic derivatives against central finite differences.

    Errors are max absolute deviations divided by the larger of 1 and the
    analytic magnitude, so near-zero derivatives are reported absolutely
    instead of blowing up a relative quotient.
    """
    x = oracle._check_point(np.asarray(x, dtype=float))
    if step is None:
        step = 1e-5 * (1.0 + float(np.max(np.abs(x))))
    if step <= 0:
        raise ValueError("finite-difference step must be positive")

    n = oracle.dimension
    g_analytic = oracle.gradient(x)
    h_analytic = oracle.hessian(x)

    g_fd = np.empty(n)
    h_fd = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        g_fd[i] = (oracle.value(x + e) - oracle.value(x - e)) / (2.0 * step)
        h_fd[:, i] = (oracle.gradient(x + e) - oracle.gradient(x - e)) / (2.0 * step)

    g_err = float(np.max(np.abs(g_analytic - g_fd)) / max(1.0, np.max(np.abs(g_analytic))))
    h_err = float(np.max(np.abs(h_analytic - h_fd)) / max(1.0, np.max(np.abs(h_analytic))))
    return FiniteDifferenceReport(gradient_error=g_err, hessian_error=h_err, step=step)


def _quadratic_oracle(matrix: Array, center: Array) -> ObjectiveOracle:
    matrix = np.asarray(matrix, dtype=float)
    center = np.asarray(center, dtype=float)
    n = center.size

    def value(x):
        d = x - center
        return 0.5 * d @ (matrix @ d)

    return ObjectiveOracle(
        dimension=n,
        value_fn=value,
        gradient_fn=lambda x: matrix @ (x - center),
        hessian_fn=lambda x: matrix.copy(),
    )


def _make_diagonal_quadratic(diag=(1.0, 4.0)) -> BenchmarkProblem:
    diag = np.asarray(diag, dtype=float)
    if diag.ndim != 1 or diag.size == 0:
        raise ValueError("diag must be a nonempty vector")
    if np.any(diag <= 0):
        raise ValueError("diag entries must be positive")
    n = diag.size
    oracle = _quadratic_oracle(np.diag(diag), np.zeros(n))
    return BenchmarkProblem(
        name="diagonal_quadratic",
        oracle=oracle,
        known_minimizer=np.zeros(n),
        strictly_convex=True,
        default_start=np.ones(n),
    )


def _make_random_spd_quadratic(dim=8, seed=0) -> BenchmarkProblem:
    # A = M^T M + c I with a small ridge c guarantees strict convexity even
    # when M happens to be near-singular.
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((dim, dim)) / (2.0 * np.sqrt(dim))
    a = m.T @ m + 1e-2 * np.eye(dim)
    center = rng.standard_normal(dim)
    offset = rng.standard_normal(dim)
    offset /= np.linalg.norm(offset)
    oracle = _quadratic_oracle(a, center)
    return BenchmarkProblem(
        name="random_spd_quadratic",
        oracle=oracle,
        known_minimizer=center,
        strictly_convex=True,
        default_start=center + offset,
    )


def _make_logistic_l2(dim=5, n_samples=40, seed=0, reg=0.1) -> BenchmarkProblem:
    if dim < 1 or n_samples < 1:
        raise ValueError("dim and n_samples must be >= 1")
    if reg < 0:
        raise ValueError("reg must be nonnegative")
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n_samples, dim)) / np.sqrt(dim)
    w_true = rng.standard_normal(dim)
    labels = np.sign(features @ w_true + 0.1 * rng.standard_normal(n_samples))
    labels[labels == 0] = 1.0

    def value(w):
        margins = labels * (features @ w)
        # compensated sum: keeps the mean accurate to its own ulp, so tiny
        # per-step decrements near convergence stay resolvable
        loss = math.fsum(np.logaddexp(0.0, -margins)) / n_samples
        return float(loss + 0.5 * reg * (w @ w))

    def gradient(w):
        margins = labels * (features @ w)
        p = 1.0 / (1.0 + np.exp(margins))  # sigmoid(-margin)
        return -(features.T @ (labels * p)) / n_samples + reg * w

    def hessian(w):
        margins = labels * (features @ w)
        p = 1.0 / (1.0 + np.exp(margins))
        weights = p * (1.0 - p)
        return (features.T * weights) @ features / n_samples + reg * np.eye(dim)

    oracle = ObjectiveOracle(dim, value, gradient, hessian)
    return BenchmarkProblem(
        name="logistic_l2",
        oracle=oracle,
        known_minimizer=None,
        strictly_convex=reg > 0,
        default_start=np.zeros(dim),
    )


def _make_rosenbrock(dim=2) -> BenchmarkProblem:
    if dim < 2:
        raise ValueError("rosenbrock needs dim >= 2")

    def value(x):
        return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))

    def gradient(x):
        g = np.zeros(dim)
        g[:-1] = -400.0 * x[:-1] * (x[1:] - x[:-1] ** 2) - 2.0 * (1.0 - x[:-1])
        g[1:] += 200.0 * (x[1:] - x[:-1] ** 2)
        return g

    def hessian(x):
        h = np.zeros((dim, dim))
        idx = np.arange(dim - 1)
        h[idx, idx] += 1200.0 * x[:-1] ** 2 - 400.0 * x[1:] + 2.0
        h[idx + 1, idx + 1] += 200.0
        h[idx, idx + 1] = -400.0 * x[:-1]
        h[idx + 1, idx] = -400.0 * x[:-1]
        return h

    start = np.ones(dim)
    start[0::2] = -1.2
    return BenchmarkProblem(
        name="rosenbrock",
        oracle=ObjectiveOracle(dim, value, gradient, hessian),
        known_minimizer=np.ones(dim),
        strictly_convex=False,
        default_start=start,
    )


_BUILDERS = {
    "diagonal_quadratic": _make_diagonal_quadratic,
    "random_spd_quadratic": _make_random_spd_quadratic,
    "logistic_l2": _make_logistic_l2,
    "rosenbrock": _make_rosenbrock,
}


def make_benchmark(name: str, **params) -> BenchmarkProblem:
    """Build a cataloged problem by name.  Unknown names raise KeyError."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown benchmark {name!r}; catalog: {sorted(_BUILDERS)}")
    return _BUILDERS[name](**params)
