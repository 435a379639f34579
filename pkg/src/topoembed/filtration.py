"""Lower-star filtration of a graph under a vertex scalar field."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .encoders import ScalarField
from .graph_core import WeightedGraph

__all__ = ["LowerStarFiltration", "lower_star"]


@dataclass(frozen=True)
class LowerStarFiltration:
    """Vertices enter at their field value, edges at the max over their endpoints.

    ``simplex_sequence`` is a list of ``(simplex, time)`` where a simplex is
    ``(v,)`` or ``(u, v)`` with ``u < v``. Within equal times vertices come
    before edges, vertices by id and edges lexicographically.
    """

    n_vertices: int
    vertex_order: np.ndarray
    vertex_time: np.ndarray
    edges: np.ndarray
    edge_time: np.ndarray
    simplex_sequence: tuple[tuple[tuple[int, ...], float], ...]

    def dump(self) -> str:
        out = []
        for simplex, t in self.simplex_sequence:
            if len(simplex) == 1:
                out.append(f"V {simplex[0]} {t:.17g}")
            else:
                out.append(f"E {simplex[0]} {simplex[1]} {t:.17g}")
        return "\n".join(out) + ("\n" if out else "")

    def write(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dump())


def lower_star(g: WeightedGraph, f: ScalarField) -> LowerStarFiltration:
    f.check(g)
    vt = np.asarray(f.values, dtype=float)
    n = g.n_vertices
    ids = np.arange(n)
    vorder = np.lexsort((ids, vt))

    if g.edges:
        e = np.array([(u, v) for u, v, _ in g.edges], dtype=np.int64)
    else:
        e = np.empty((0, 2), dtype=np.int64)
    et = np.maximum(vt[e[:, 0]], vt[e[:, 1]]) if len(e) else np.empty(0)
    eorder = np.lexsort((e[:, 1], e[:, 0], et)) if len(e) else np.empty(0, dtype=np.int64)

    seq = []
    i = j = 0
    while i < n or j < len(eorder):
        # vertices win ties against edges
        if j >= len(eorder) or (i < n and vt[vorder[i]] <= et[eorder[j]]):
            v = int(vorder[i])
            seq.append(((v,), float(vt[v])))
            i += 1
        else:
            k = int(eorder[j])
            seq.append(((int(e[k, 0]), int(e[k, 1])), float(et[k])))
            j += 1

    for arr in (vorder, vt, e, et):
        arr.setflags(write=False)
    return LowerStarFiltration(n, vorder, vt.copy(), e, et, tuple(seq))
