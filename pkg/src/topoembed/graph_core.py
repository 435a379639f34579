"""Weighted undirected graphs, file loaders and k-hop ego networks."""

from __future__ import annotations

import hashlib
import math
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "GraphFormatError",
    "WeightedGraph",
    "MeshSpec",
    "load_edge_list",
    "parse_edge_list",
    "write_edge_list",
    "load_off_mesh",
    "parse_off",
    "mesh_to_graph",
    "ego_network",
    "connected_components",
]


class GraphFormatError(ValueError):
    """Raised for malformed graph or mesh input."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected simple graph on vertices ``0..n_vertices-1``.

    Edges are stored canonically as ``(u, v, w)`` with ``u < v``, sorted,
    with at most one edge per unordered pair and ``w >= 0``.
    """

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...] = ()
    labels: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        n = self.n_vertices
        if n < 0:
            raise ValueError(f"n_vertices must be >= 0, got {n}")
        canon = {}
        for e in self.edges:
            u, v, w = int(e[0]), int(e[1]), float(e[2]) if len(e) > 2 else 1.0
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
            if not (w >= 0.0 and math.isfinite(w)):
                raise ValueError(f"edge ({u}, {v}) has invalid weight {w}")
            key = (u, v) if u < v else (v, u)
            if key in canon:
                raise ValueError(f"duplicate edge {key}")
            canon[key] = w
        object.__setattr__(
            self, "edges", tuple((u, v, canon[(u, v)]) for (u, v) in sorted(canon))
        )
        if self.labels is not None:
            if len(self.labels) != n:
                raise ValueError("labels must have one entry per vertex")
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[Sequence], labels=None) -> "WeightedGraph":
        return cls(n_vertices, tuple(tuple(e) for e in edges), labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Sorted neighbor tuples per vertex."""
        nbrs: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v, _ in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    def degree(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    @cached_property
    def fingerprint(self) -> str:
        """SHA-256 over the canonical vertex count and edge list."""
        h = hashlib.sha256()
        h.update(f"n={self.n_vertices}\n".encode())
        for u, v, w in self.edges:
            h.update(f"{u} {v} {w!r}\n".encode())
        return h.hexdigest()


@dataclass(frozen=True)
class MeshSpec:
    vertex_positions: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.vertex_positions, dtype=float).reshape(-1, 3)
        tri = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if tri.size and (tri.min() < 0 or tri.max() >= len(pos)):
            raise GraphFormatError("triangle index out of range")
        for t in tri:
            if len(set(t.tolist())) != 3:
                raise GraphFormatError(f"degenerate triangle {t.tolist()}")
        object.__setattr__(self, "vertex_positions", pos)
        object.__setattr__(self, "triangles", tri)


# ---------------------------------------------------------------------------
# Edge lists
# ---------------------------------------------------------------------------


def parse_edge_list(text: str) -> WeightedGraph:
    """Parse ``u v [w]`` lines; ``#`` starts a comment, ``#n N`` fixes the vertex count."""
    n_header = None
    seen: dict[tuple[int, int], float] = {}
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tok = line[1:].split()
            if len(tok) == 2 and tok[0] == "n":
                try:
                    n_header = int(tok[1])
                except ValueError:
                    raise GraphFormatError(f"line {lineno}: bad vertex-count header {line!r}") from None
                if n_header < 0:
                    raise GraphFormatError(f"line {lineno}: negative vertex count")
            continue
        tok = line.split()
        if len(tok) not in (2, 3):
            raise GraphFormatError(f"line {lineno}: expected 'u v [w]', got {line!r}")
        try:
            u, v = int(tok[0]), int(tok[1])
            w = float(tok[2]) if len(tok) == 3 else 1.0
        except ValueError:
            raise GraphFormatError(f"line {lineno}: cannot parse {line!r}") from None
        if u < 0 or v < 0:
            raise GraphFormatError(f"line {lineno}: negative vertex id")
        if u == v:
            raise GraphFormatError(f"line {lineno}: self-loop at vertex {u}")
        if not math.isfinite(w) or w < 0:
            raise GraphFormatError(f"line {lineno}: invalid weight {tok[2]}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"line {lineno}: duplicate edge {key}")
        seen[key] = w
        max_id = max(max_id, u, v)
    n = max_id + 1 if n_header is None else n_header
    if max_id >= n:
        raise GraphFormatError(f"vertex id {max_id} exceeds header count {n}")
    return WeightedGraph(n, tuple((u, v, w) for (u, v), w in seen.items()))


def load_edge_list(path: str | os.PathLike) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def write_edge_list(g: WeightedGraph, path: str | os.PathLike) -> None:
    """Write the canonical edge-list form (``#n`` header, 17 significant digits)."""
    lines = [f"#n {g.n_vertices}"]
    lines += [f"{u} {v} {w:.17g}" for u, v, w in g.edges]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# OFF meshes
# ---------------------------------------------------------------------------


def parse_off(text: str) -> MeshSpec:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines or lines[0].split()[0] != "OFF":
        raise GraphFormatError("missing 'OFF' header")
    head = lines[0].split()[1:]
    rest = lines[1:]
    if not head:
        if not rest:
            raise GraphFormatError("missing counts line")
        head, rest = rest[0].split(), rest[1:]
    try:
        n_v, n_f = int(head[0]), int(head[1])
    except (ValueError, IndexError):
        raise GraphFormatError(f"unparsable counts line {' '.join(head)!r}") from None
    if n_v < 0 or n_f < 0 or len(rest) < n_v + n_f:
        raise GraphFormatError("file shorter than declared vertex/face counts")
    try:
        pos = np.array([[float(t) for t in rest[i].split()[:3]] for i in range(n_v)], dtype=float)
    except ValueError:
        raise GraphFormatError("unparsable vertex coordinates") from None
    if n_v and pos.shape != (n_v, 3):
        raise GraphFormatError("vertex lines need three coordinates")
    tris = []
    for i in range(n_f):
        tok = rest[n_v + i].split()
        try:
            k = int(tok[0])
            idx = [int(t) for t in tok[1 : 1 + k]]
        except (ValueError, IndexError):
            raise GraphFormatError(f"unparsable face line {rest[n_v + i]!r}") from None
        if k != 3 or len(idx) != 3:
            raise GraphFormatError(f"non-triangle face with {k} vertices")
        if min(idx) < 0 or max(idx) >= n_v:
            raise GraphFormatError(f"face index out of range in {idx}")
        tris.append(idx)
    return MeshSpec(pos.reshape(n_v, 3), np.array(tris, dtype=np.int64).reshape(-1, 3))


def mesh_to_graph(mesh: MeshSpec) -> WeightedGraph:
    """1-skeleton of a triangle mesh, edges weighted by Euclidean length."""
    pairs = set()
    for a, b, c in mesh.triangles.tolist():
        for u, v in ((a, b), (b, c), (a, c)):
            pairs.add((min(u, v), max(u, v)))
    pos = mesh.vertex_positions
    edges = tuple(
        (u, v, float(np.linalg.norm(pos[u] - pos[v]))) for u, v in sorted(pairs)
    )
    return WeightedGraph(len(pos), edges)


def load_off_mesh(path: str | os.PathLike) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return mesh_to_graph(parse_off(fh.read()))


def load_graph(path: str | os.PathLike) -> WeightedGraph:
    """Dispatch on extension: ``.off`` is a mesh, anything else an edge list."""
    if str(path).lower().endswith(".off"):
        return load_off_mesh(path)
    return load_edge_list(path)


# ---------------------------------------------------------------------------
# Traversal
# ---------------------------------------------------------------------------


def _bfs_hops(g: WeightedGraph, source: int, limit: Optional[int] = None) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    adj = g.adjacency
    while queue:
        x = queue.popleft()
        if limit is not None and dist[x] >= limit:
            continue
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def ego_network(g: WeightedGraph, w: int, k: int) -> tuple[WeightedGraph, np.ndarray]:
    """Induced subgraph on ``w`` and every vertex within ``k`` unweighted hops.

    Returns the subgraph and an array mapping new vertex ids to original ids
    (sorted by original id).
    """
    if not (0 <= w < g.n_vertices):
        raise ValueError(f"vertex {w} not in graph with {g.n_vertices} vertices")
    if k < 0:
        raise ValueError("k must be >= 0")
    keep = np.array(sorted(_bfs_hops(g, w, k)), dtype=np.int64)
    new_id = {int(old): i for i, old in enumerate(keep)}
    edges = tuple(
        (new_id[u], new_id[v], wt) for u, v, wt in g.edges if u in new_id and v in new_id
    )
    labels = tuple(g.labels[i] for i in keep) if g.labels is not None else None
    return WeightedGraph(len(keep), edges, labels), keep


def connected_components(g: WeightedGraph) -> list[list[int]]:
    """Vertex partition into connected components, each sorted, ordered by min id."""
    seen = np.zeros(g.n_vertices, dtype=bool)
    parts = []
    for s in range(g.n_vertices):
        if not seen[s]:
            comp = sorted(_bfs_hops(g, s))
            seen[comp] = True
            parts.append(comp)
    return parts
