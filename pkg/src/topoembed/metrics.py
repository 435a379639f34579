"""Wasserstein and bottleneck distances between finite persistence diagrams."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .persistence import PersistenceDiagram

__all__ = [
    "DistanceMatrix",
    "assignment_solve",
    "augmented_cost",
    "wasserstein",
    "bottleneck",
    "distance_matrix",
]


@dataclass(frozen=True)
class DistanceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        m = np.array(self.values, dtype=float)
        n = len(self.labels)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match {n} labels")
        if not np.all(np.isfinite(m)):
            raise ValueError("distance matrix has non-finite entries")
        if n and (np.abs(m - m.T).max() > 1e-12 or np.abs(np.diag(m)).max() > 0 or m.min() < 0):
            raise ValueError("distance matrix must be symmetric, non-negative, zero on the diagonal")
        m.setflags(write=False)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        object.__setattr__(self, "values", m)

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["label", *self.labels])
            for lab, row in zip(self.labels, self.values):
                wr.writerow([lab, *(f"{x:.17g}" for x in row)])

    @classmethod
    def from_csv(cls, path: str | os.PathLike) -> "DistanceMatrix":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows:
            raise ValueError(f"{path}: empty matrix file")
        labels = rows[0][1:]
        if [r[0] for r in rows[1:]] != labels:
            raise ValueError(f"{path}: row labels do not match header")
        return cls(tuple(labels), np.array([[float(x) for x in r[1:]] for r in rows[1:]]).reshape(len(labels), len(labels)))


def assignment_solve(cost) -> tuple[np.ndarray, float]:
    """Minimum-cost perfect assignment. Returns ``(perm, total)`` with row ``i -> perm[i]``."""
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix must be finite")
    rows, cols = linear_sum_assignment(c)
    perm = np.empty(len(c), dtype=np.int64)
    perm[rows] = cols
    return perm, float(c[rows, cols].sum())


def _points(d: PersistenceDiagram) -> np.ndarray:
    if not d.is_finite:
        raise ValueError("diagram has essential (infinite) classes; finitize it first")
    return d.finite_pairs


def augmented_cost(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """L-infinity costs between ``x + diag(y)`` and ``y + diag(x)``.

    Rows are the ``m`` points of ``x`` then the diagonal projections of the
    ``n`` points of ``y``; columns are the points of ``y`` then the
    projections of ``x``. Projection-to-projection cost is 0.
    """
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    y = np.asarray(y, dtype=float).reshape(-1, 2)
    m, n = len(x), len(y)
    px = np.repeat(x.mean(axis=1, keepdims=True), 2, axis=1)
    py = np.repeat(y.mean(axis=1, keepdims=True), 2, axis=1)
    rows = np.vstack([x, py])
    cols = np.vstack([y, px])
    c = np.abs(rows[:, None, :] - cols[None, :, :]).max(axis=2) if m + n else np.zeros((0, 0))
    c[m:, n:] = 0.0
    return c


def _canonical(a: np.ndarray) -> np.ndarray:
    return a[np.lexsort((a[:, 1], a[:, 0]))] if len(a) else a


def _ordered(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # W(x, y) and W(y, x) must run the identical computation for exact symmetry
    a, b = _canonical(a), _canonical(b)
    if (len(a), a.tobytes()) > (len(b), b.tobytes()):
        a, b = b, a
    return a, b


def wasserstein(x: PersistenceDiagram, y: PersistenceDiagram, q: float = 2.0) -> float:
    """q-Wasserstein distance with L-infinity ground metric and the diagonal as a sink."""
    if not q >= 1:
        raise ValueError("q must be >= 1")
    a, b = _ordered(_points(x), _points(y))
    if len(a) + len(b) == 0:
        return 0.0
    if math.isinf(q):
        return bottleneck(x, y)
    c = augmented_cost(a, b)
    # Normalize before powering; for large q scale by the bottleneck value so
    # that relevant costs neither overflow nor underflow.
    scale = c.max() if q <= 16 else _bottleneck_cost(c)
    if scale == 0:
        return 0.0
    with np.errstate(over="ignore", under="ignore"):
        w = np.minimum((c / scale) ** q, 1e300)
    perm, _ = assignment_solve(w)
    matched = np.sort(w[np.arange(len(w)), perm])
    return float(scale * matched.sum() ** (1.0 / q))


def _perfect_matching_exists(mask: np.ndarray) -> bool:
    match = maximum_bipartite_matching(csr_matrix(mask.astype(np.int8)), perm_type="column")
    return bool(np.all(match >= 0))


def _bottleneck_cost(c: np.ndarray) -> float:
    cand = np.unique(c)
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(c <= cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


def bottleneck(x: PersistenceDiagram, y: PersistenceDiagram) -> float:
    """Smallest ``t`` admitting a perfect augmented matching with every cost ``<= t``."""
    a, b = _ordered(_points(x), _points(y))
    if len(a) + len(b) == 0:
        return 0.0
    return _bottleneck_cost(augmented_cost(a, b))


def distance_matrix(
    diagrams: Sequence[tuple[str, PersistenceDiagram]], q: float = 2.0
) -> DistanceMatrix:
    labels = [lab for lab, _ in diagrams]
    n = len(diagrams)
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = wasserstein(diagrams[i][1], diagrams[j][1], q)
    return DistanceMatrix(tuple(labels), m)
