"""Fixed-length vectorizations of finite persistence diagrams."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .persistence import PersistenceDiagram

__all__ = [
    "VectorizeGrid",
    "FeatureVector",
    "betti_curve",
    "landscape",
    "persistence_image",
    "grid_for",
    "write_feature_rows",
]


@dataclass(frozen=True)
class VectorizeGrid:
    t_min: float
    t_max: float
    resolution: int = 100

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise ValueError("grid needs t_min < t_max")
        if self.resolution < 2:
            raise ValueError("grid resolution must be >= 2")

    @property
    def samples(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.resolution)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    scheme: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValueError("feature vector has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def params_hash(self) -> str:
        blob = json.dumps({"scheme": self.scheme, **self.params}, sort_keys=True, default=float)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _pairs(d: PersistenceDiagram) -> np.ndarray:
    if not d.is_finite:
        raise ValueError("diagram has essential classes; finitize it first")
    return d.finite_pairs


def grid_for(diagrams: Iterable[PersistenceDiagram], resolution: int = 100) -> VectorizeGrid:
    """Shared grid spanning ``[min birth, max death]`` over a diagram collection."""
    pts = [_pairs(d) for d in diagrams]
    pts = np.vstack(pts) if pts else np.empty((0, 2))
    if len(pts) == 0:
        return VectorizeGrid(0.0, 1.0, resolution)
    lo, hi = float(pts[:, 0].min()), float(pts[:, 1].max())
    if hi <= lo:
        hi = lo + 1.0
    return VectorizeGrid(lo, hi, resolution)


def betti_curve(d: PersistenceDiagram, grid: VectorizeGrid) -> FeatureVector:
    """Number of pairs with ``b <= t < d`` at each grid sample."""
    p = _pairs(d)
    t = grid.samples[:, None]
    counts = ((p[:, 0] <= t) & (t < p[:, 1])).sum(axis=1)
    return FeatureVector(counts, "betti", _grid_params(grid))


def landscape(d: PersistenceDiagram, k: int, grid: VectorizeGrid) -> FeatureVector:
    """First ``k`` landscape levels on the grid, concatenated level by level."""
    if k < 1:
        raise ValueError("k must be >= 1")
    p = _pairs(d)
    t = grid.samples
    out = np.zeros((k, len(t)))
    if len(p):
        tents = np.maximum(0.0, np.minimum(t[None, :] - p[:, :1], p[:, 1:] - t[None, :]))
        tents = -np.sort(-tents, axis=0)
        m = min(k, len(p))
        out[:m] = tents[:m]
    return FeatureVector(out.ravel(), "landscape", {**_grid_params(grid), "k": int(k)})


def persistence_image(
    d: PersistenceDiagram,
    res: tuple[int, int] = (20, 20),
    sigma: float = 0.1,
    bounds: tuple[float, float, float, float] | None = None,
    max_persistence: float | None = None,
) -> FeatureVector:
    """Persistence image evaluated at pixel centers.

    Points are mapped to ``(birth, persistence)``; each contributes a
    normalized Gaussian weighted by ``persistence / max persistence``.
    ``bounds`` is ``(b_min, b_max, p_min, p_max)``; the default covers the
    diagram. Passing ``max_persistence`` fixes the weight normalizer, which
    makes images of different diagrams additive. The result is flattened
    row-major over ``(ny, nx)``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    nx, ny = int(res[0]), int(res[1])
    p = _pairs(d)
    birth, pers = p[:, 0], p[:, 1] - p[:, 0]
    if bounds is None:
        if len(p):
            b0, b1 = float(birth.min()), float(birth.max())
            p1 = float(pers.max())
        else:
            b0, b1, p1 = 0.0, 1.0, 1.0
        if b1 <= b0:
            b1 = b0 + 1.0
        if p1 <= 0:
            p1 = 1.0
        bounds = (b0, b1, 0.0, p1)
    b0, b1, p0, p1 = map(float, bounds)
    xs = b0 + (np.arange(nx) + 0.5) * (b1 - b0) / nx
    ys = p0 + (np.arange(ny) + 0.5) * (p1 - p0) / ny
    img = np.zeros((ny, nx))
    if max_persistence is not None:
        pmax = float(max_persistence)
    else:
        pmax = pers.max() if len(p) else 0.0
    if pmax > 0:
        w = pers / pmax
        gx = np.exp(-((xs[None, :] - birth[:, None]) ** 2) / (2 * sigma**2))
        gy = np.exp(-((ys[None, :] - pers[:, None]) ** 2) / (2 * sigma**2))
        img = np.einsum("k,ky,kx->yx", w, gy, gx) / (2 * np.pi * sigma**2)
    params = {"nx": nx, "ny": ny, "sigma": float(sigma), "bounds": [b0, b1, p0, p1],
              "max_persistence": None if max_persistence is None else float(max_persistence)}
    return FeatureVector(img.ravel(), "image", params)


def _grid_params(grid: VectorizeGrid) -> dict:
    return {"t_min": float(grid.t_min), "t_max": float(grid.t_max), "resolution": int(grid.resolution)}


def write_feature_rows(rows: Sequence[tuple[str, FeatureVector]], path: str | os.PathLike) -> None:
    """CSV rows ``label, scheme, params-hash, values...``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        for label, fv in rows:
            wr.writerow([label, fv.scheme, fv.params_hash, *(f"{x:.17g}" for x in fv.values)])
