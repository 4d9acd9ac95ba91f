"""Control Lyapunov functions of the costate.

Four families:

  smooth_quadratic   V(l) = ||l||^2 / 2
  max_squares        V(l) = max_i (l_i)^2 / 2
  block_max          V(l) = max_i  <l_bi, Q_i l_bi> / 2  over a block partition
  inf_norm           V(l) = ||l||_inf

The max-type families are nonsmooth: their subdifferential at a tie is the
convex hull of the active per-term gradients.  The "unbiased" selection
takes the equally weighted convex combination, written gamma * (q o s)
where q marks the active coordinates/blocks and s is the kind-appropriate
seed vector (l itself, Q l, or sign l).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import nnls

Array = np.ndarray

KINDS = ("smooth_quadratic", "max_squares", "block_max", "inf_norm")


class Converged(Exception):
    """The costate is exactly zero: stationarity holds and there is nothing
    left to dissipate.  Callers treat this as successful termination."""


@dataclass(frozen=True)
class BlockStructure:
    """Partition of the coordinates into contiguous blocks with one SPD
    matrix per block."""

    sizes: tuple
    matrices: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        matrices = tuple(np.asarray(q, dtype=float) for q in self.matrices)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "matrices", matrices)
        if len(sizes) != len(matrices) or not sizes:
            raise ValueError("need one matrix per block")
        for s, q in zip(sizes, matrices):
            if s < 1:
                raise ValueError("block sizes must be positive")
            if q.shape != (s, s):
                raise ValueError(f"block matrix shape {q.shape} does not match size {s}")
            if np.max(np.abs(q - q.T)) > 1e-12 * max(1.0, np.max(np.abs(q))):
                raise ValueError("block matrices must be symmetric")
            try:
                np.linalg.cholesky(q)
            except np.linalg.LinAlgError:
                raise ValueError("block matrices must be positive definite") from None

    @property
    def dimension(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> tuple:
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    def apply(self, vec: Array) -> Array:
        """Block-diagonal product diag(Q_1, ..., Q_m) @ vec."""
        out = np.empty_like(vec)
        for off, s, q in zip(self.offsets, self.sizes, self.matrices):
            out[off : off + s] = q @ vec[off : off + s]
        return out


@dataclass(frozen=True)
class LyapunovFunction:
    kind: str
    blocks: Optional[BlockStructure] = None
    tie_tolerance: float = 1e-9

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown CLF kind {self.kind!r}; one of {KINDS}")
        if self.tie_tolerance < 0:
            raise ValueError("tie_tolerance must be nonnegative")
        if self.kind == "block_max" and self.blocks is None:
            raise ValueError("block_max requires a BlockStructure")


@dataclass(frozen=True)
class ActiveSet:
    """Indices achieving the max (coordinates, or block indices for
    block_max), reported ascending, plus the 0/1 marker vector q."""

    indices: tuple
    q: Array


@dataclass(frozen=True)
class SubgradientSelection:
    direction: Array
    gamma: float


def _check_lambda(clf: LyapunovFunction, lam) -> Array:
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1:
        raise ValueError("costate must be a vector")
    if clf.kind == "block_max" and lam.size != clf.blocks.dimension:
        raise ValueError(
            f"costate dimension {lam.size} does not match block partition "
            f"summing to {clf.blocks.dimension}"
        )
    return lam


def _block_scores(blocks: BlockStructure, lam: Array) -> Array:
    scores = np.empty(len(blocks.sizes))
    for i, (off, s, q) in enumerate(zip(blocks.offsets, blocks.sizes, blocks.matrices)):
        seg = lam[off : off + s]
        scores[i] = 0.5 * seg @ (q @ seg)
    return scores


def clf_value(clf: LyapunovFunction, lam) -> float:
    lam = _check_lambda(clf, lam)
    if clf.kind == "smooth_quadratic":
        return 0.5 * float(lam @ lam)
    if clf.kind == "max_squares":
        return float(np.max(0.5 * lam**2))
    if clf.kind == "inf_norm":
        return float(np.max(np.abs(lam))) if lam.size else 0.0
    return float(np.max(_block_scores(clf.blocks, lam)))


def active_set(clf: LyapunovFunction, lam) -> ActiveSet:
    """Indices within relative tie tolerance of the max score.

    Raises Converged when lam is exactly zero (stationarity reached).
    For smooth_quadratic every coordinate participates.
    """
    lam = _check_lambda(clf, lam)
    if not lam.any():
        raise Converged("costate is zero")
    if clf.kind == "smooth_quadratic":
        return ActiveSet(indices=tuple(range(lam.size)), q=np.ones(lam.size))

    if clf.kind == "max_squares":
        scores = 0.5 * lam**2
    elif clf.kind == "inf_norm":
        scores = np.abs(lam)
    else:
        scores = _block_scores(clf.blocks, lam)

    top = float(np.max(scores))
    keep = np.flatnonzero(scores >= top - clf.tie_tolerance * top)
    if clf.kind == "block_max":
        q = np.zeros(lam.size)
        offs, sizes = clf.blocks.offsets, clf.blocks.sizes
        for i in keep:
            q[offs[i] : offs[i] + sizes[i]] = 1.0
    else:
        q = np.zeros(lam.size)
        q[keep] = 1.0
    return ActiveSet(indices=tuple(int(i) for i in keep), q=q)


def unbiased_subgradient(
    clf: LyapunovFunction, lam, active: Optional[ActiveSet] = None
) -> SubgradientSelection:
    """Equally weighted element of the subdifferential: gamma * (q o seed).

    gamma = 1/|active| makes the selection a convex combination of the
    active extreme subgradients (gamma = 1 for the smooth kind), which is
    verifiable through subdifferential_membership.
    """
    lam = _check_lambda(clf, lam)
    if active is None:
        active = active_set(clf, lam)
    if clf.kind == "smooth_quadratic":
        return SubgradientSelection(direction=lam.copy(), gamma=1.0)
    gamma = 1.0 / len(active.indices)
    if clf.kind == "max_squares":
        seed = lam
    elif clf.kind == "inf_norm":
        seed = np.sign(lam)
    else:
        seed = clf.blocks.apply(lam)
    return SubgradientSelection(direction=gamma * (active.q * seed), gamma=gamma)


def extreme_subgradients(clf: LyapunovFunction, lam) -> Array:
    """The active per-term gradients, one per row; their convex hull is the
    subdifferential of the max-type kinds."""
    lam = _check_lambda(clf, lam)
    if clf.kind == "smooth_quadratic":
        return lam.copy()[None, :]
    active = active_set(clf, lam)
    n = lam.size
    if clf.kind == "block_max":
        rows = np.zeros((len(active.indices), n))
        offs, sizes, mats = clf.blocks.offsets, clf.blocks.sizes, clf.blocks.matrices
        for r, i in enumerate(active.indices):
            seg = lam[offs[i] : offs[i] + sizes[i]]
            rows[r, offs[i] : offs[i] + sizes[i]] = mats[i] @ seg
        return rows
    rows = np.zeros((len(active.indices), n))
    for r, i in enumerate(active.indices):
        rows[r, i] = lam[i] if clf.kind == "max_squares" else np.sign(lam[i])
    return rows


def subdifferential_membership(clf: LyapunovFunction, lam, candidate) -> bool:
    """True iff candidate is a convex combination of the active extreme
    subgradients, to tolerance 1e-10 (relative to the candidate's size).

    Solved as a small nonnegative least-squares problem with the
    weights-sum-to-one equation appended.
    """
    lam = _check_lambda(clf, lam)
    candidate = np.asarray(candidate, dtype=float)
    if candidate.shape != lam.shape:
        raise ValueError("candidate dimension mismatch")
    extremes = extreme_subgradients(clf, lam)
    a = np.vstack([extremes.T, np.ones((1, extremes.shape[0]))])
    b = np.append(candidate, 1.0)
    _, residual = nnls(a, b)
    return residual <= 1e-10 * (1.0 + float(np.linalg.norm(candidate)))
