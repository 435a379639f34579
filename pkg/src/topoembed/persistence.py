"""0-dimensional persistence of lower-star filtrations on graphs."""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .encoders import ScalarField
from .filtration import LowerStarFiltration, lower_star
from .graph_core import WeightedGraph

__all__ = [
    "PersistenceDiagram",
    "zero_persistence",
    "brute_force_zero_persistence",
    "finitize",
    "diagram_from_json",
    "BRUTE_FORCE_LIMIT",
]

BRUTE_FORCE_LIMIT = 1000

FinitizePolicy = Literal["cap_at_fmax", "drop_essential"]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite ``(birth, death)`` pairs plus births of classes that never die."""

    finite_pairs: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    essential_births: np.ndarray = field(default_factory=lambda: np.empty(0))
    f_max: float = 0.0

    def __post_init__(self):
        fp = np.array(self.finite_pairs, dtype=float).reshape(-1, 2)
        eb = np.array(self.essential_births, dtype=float).reshape(-1)
        if not np.all(np.isfinite(fp)):
            raise ValueError("finite pairs must not contain inf/nan")
        if np.any(fp[:, 1] < fp[:, 0]):
            raise ValueError("death before birth")
        fp.setflags(write=False)
        eb.setflags(write=False)
        object.__setattr__(self, "finite_pairs", fp)
        object.__setattr__(self, "essential_births", eb)
        object.__setattr__(self, "f_max", float(self.f_max))

    @property
    def n_points(self) -> int:
        return len(self.finite_pairs) + len(self.essential_births)

    @property
    def is_finite(self) -> bool:
        return len(self.essential_births) == 0

    @property
    def zero_length_mask(self) -> np.ndarray:
        """Flags pairs with ``birth == death``."""
        return self.finite_pairs[:, 0] == self.finite_pairs[:, 1]

    def drop_zero_length(self) -> "PersistenceDiagram":
        return PersistenceDiagram(
            self.finite_pairs[~self.zero_length_mask], self.essential_births, self.f_max
        )

    def as_multiset(self, ndigits: int | None = None) -> tuple[Counter, Counter]:
        """Counters of finite pairs and essential births, for multiset comparison."""
        r = (lambda x: round(x, ndigits)) if ndigits is not None else float
        fin = Counter((r(b), r(d)) for b, d in self.finite_pairs.tolist())
        ess = Counter(r(b) for b in self.essential_births.tolist())
        return fin, ess

    def same_as(self, other: "PersistenceDiagram") -> bool:
        return self.as_multiset() == other.as_multiset()

    def points(self) -> np.ndarray:
        """All points as an ``(n, 2)`` array, essential deaths as ``inf``."""
        ess = np.column_stack([self.essential_births, np.full(len(self.essential_births), np.inf)])
        return np.vstack([self.finite_pairs, ess])

    def to_json(self) -> str:
        fin = ", ".join(f"[{_num(b)}, {_num(d)}]" for b, d in self.finite_pairs.tolist())
        ess = ", ".join(_num(b) for b in self.essential_births.tolist())
        return f'{{"finite": [{fin}], "essential": [{ess}], "f_max": {_num(self.f_max)}}}'

    def write(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")


def _num(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("cannot serialize non-finite value")
    return f"{x:.17g}"


def diagram_from_json(obj: str | dict) -> PersistenceDiagram:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return PersistenceDiagram(
        np.array(obj.get("finite", []), dtype=float).reshape(-1, 2),
        np.array(obj.get("essential", []), dtype=float),
        float(obj.get("f_max", 0.0)),
    )


def zero_persistence(filt: LowerStarFiltration, drop_zero: bool = False) -> PersistenceDiagram:
    """Union-find sweep with the elder rule.

    At a merge the component with the larger ``(birth, creator id)`` dies at
    the edge's time.
    """
    n = filt.n_vertices
    parent = list(range(n))
    # root -> (birth, creator vertex); only valid for current roots
    elder = [(0.0, 0)] * n
    pairs = []

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for simplex, t in filt.simplex_sequence:
        if len(simplex) == 1:
            v = simplex[0]
            elder[v] = (t, v)
            continue
        ru, rv = find(simplex[0]), find(simplex[1])
        if ru == rv:
            continue
        if elder[ru] > elder[rv]:
            ru, rv = rv, ru
        # rv is younger and dies
        pairs.append((elder[rv][0], t))
        parent[rv] = ru

    essential = sorted(elder[r][0] for r in range(n) if find(r) == r)
    f_max = float(filt.vertex_time.max()) if n else 0.0
    dgm = PersistenceDiagram(np.array(pairs).reshape(-1, 2), np.array(essential), f_max)
    return dgm.drop_zero_length() if drop_zero else dgm


def _sublevel_components(g: WeightedGraph, vt: np.ndarray, t: float) -> dict[int, int]:
    """Map each vertex with ``f <= t`` to the min-(f, id) vertex of its sublevel component."""
    alive = [v for v in range(g.n_vertices) if vt[v] <= t]
    alive_set = set(alive)
    rep = {}
    for s in sorted(alive, key=lambda v: (vt[v], v)):
        if s in rep:
            continue
        rep[s] = s
        stack = [s]
        while stack:
            x = stack.pop()
            for y in g.adjacency[x]:
                if y in alive_set and y not in rep:
                    rep[y] = s
                    stack.append(y)
    return rep


def brute_force_zero_persistence(g: WeightedGraph, f: ScalarField) -> PersistenceDiagram:
    """Diff sublevel-set component snapshots at every distinct entry time.

    Slow reference used to check :func:`zero_persistence`.
    """
    f.check(g)
    if g.n_vertices > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} vertices")
    vt = np.asarray(f.values, dtype=float)
    times = sorted(set(vt.tolist()) | {max(vt[u], vt[v]) for u, v, _ in g.edges})
    pairs = []
    prev: dict[int, int] = {}
    for t in times:
        cur = _sublevel_components(g, vt, t)
        old_reps = set(prev.values())
        for r in old_reps:
            if cur[r] != r:
                pairs.append((float(vt[r]), t))
        for v in cur:
            if v not in prev and cur[v] != v:
                pairs.append((float(vt[v]), t))
        prev = cur
    essential = sorted(float(vt[r]) for r in set(prev.values()))
    f_max = float(vt.max()) if len(vt) else 0.0
    return PersistenceDiagram(np.array(pairs).reshape(-1, 2), np.array(essential), f_max)


def finitize(d: PersistenceDiagram, policy: FinitizePolicy = "cap_at_fmax") -> PersistenceDiagram:
    """Remove infinite deaths: cap them at ``f_max`` or drop the classes."""
    if policy in ("cap_at_fmax", "cap"):
        capped = np.column_stack([d.essential_births, np.full(len(d.essential_births), d.f_max)])
        return PersistenceDiagram(np.vstack([d.finite_pairs, capped]), np.empty(0), d.f_max)
    if policy in ("drop_essential", "drop"):
        return PersistenceDiagram(d.finite_pairs, np.empty(0), d.f_max)
    raise ValueError(f"unknown finitize policy {policy!r}")
