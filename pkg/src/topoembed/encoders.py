"""Scalar node encoders ``enc: V -> R``.

Random-walk corpora in the DeepWalk, Node2Vec and Diff2Vec styles are turned
into one real number per vertex by skip-gram with negative sampling (SGNS)
in one dimension. ``degree_encoder`` is a deterministic baseline.
"""

from __future__ import annotations

import csv
import logging
import os
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .graph_core import WeightedGraph

logger = logging.getLogger(__name__)

__all__ = [
    "FingerprintMismatch",
    "ScalarField",
    "WalkConfig",
    "deepwalk_walks",
    "node2vec_walks",
    "node2vec_transition",
    "diff2vec_sequences",
    "euler_tour",
    "skipgram_pairs",
    "negative_distribution",
    "init_embedding",
    "sgns_objective",
    "sgns_gradient",
    "train_sgns_1d",
    "degree_encoder",
    "encode",
    "ENCODERS",
    "write_corpus",
]

CLAMP = 50.0
DEGREE_JITTER = 1e-9


class FingerprintMismatch(ValueError):
    """A scalar field was applied to a graph it was not computed on."""


@dataclass(frozen=True)
class ScalarField:
    values: np.ndarray
    graph_fingerprint: str

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("scalar field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def on(cls, g: WeightedGraph, values) -> "ScalarField":
        vals = np.asarray(values, dtype=float).reshape(-1)
        if len(vals) != g.n_vertices:
            raise ValueError(f"expected {g.n_vertices} values, got {len(vals)}")
        return cls(vals, g.fingerprint)

    def __len__(self):
        return len(self.values)

    def check(self, g: WeightedGraph) -> None:
        if self.graph_fingerprint != g.fingerprint or len(self.values) != g.n_vertices:
            raise FingerprintMismatch("scalar field is bound to a different graph")

    def restrict(self, sub: WeightedGraph, remap: np.ndarray) -> "ScalarField":
        """Field on a subgraph whose vertex ``i`` is original vertex ``remap[i]``."""
        return ScalarField.on(sub, self.values[np.asarray(remap, dtype=np.int64)])

    def shifted(self, c: float) -> "ScalarField":
        return ScalarField(self.values + c, self.graph_fingerprint)

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["vertex", "value"])
            for i, x in enumerate(self.values):
                wr.writerow([i, f"{x:.17g}"])

    @classmethod
    def from_csv(cls, path: str | os.PathLike, g: WeightedGraph) -> "ScalarField":
        vals = np.full(g.n_vertices, np.nan)
        with open(path, newline="", encoding="utf-8") as fh:
            rows = csv.reader(fh)
            header = next(rows, None)
            if header is None or [h.strip() for h in header[:2]] != ["vertex", "value"]:
                raise ValueError(f"{path}: expected header 'vertex,value'")
            for row in rows:
                if not row:
                    continue
                i = int(row[0])
                if not 0 <= i < g.n_vertices:
                    raise ValueError(f"{path}: vertex {i} out of range")
                vals[i] = float(row[1])
        if np.isnan(vals).any():
            raise ValueError(f"{path}: missing values for some vertices")
        return cls.on(g, vals)


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 40
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0
    p: float = 1.0
    q: float = 1.0
    diffusion_size: int = 40
    batch_size: int = 64

    def __post_init__(self):
        for name in ("walks_per_node", "walk_length", "window", "negatives", "epochs",
                     "diffusion_size", "batch_size"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not (self.p > 0 and self.q > 0):
            raise ValueError("p and q must be > 0")

    def with_seed(self, seed: int) -> "WalkConfig":
        return replace(self, seed=int(seed))


def _seed_words(seed: int) -> list[int]:
    # SeedSequence entropy must be non-negative; fold a signed 64-bit seed.
    return [int(seed) & 0xFFFFFFFFFFFFFFFF]


def _walk_rng(seed: int, start: int, index: int) -> np.random.Generator:
    return np.random.default_rng(_seed_words(seed) + [start, index])


# ---------------------------------------------------------------------------
# Walk corpora
# ---------------------------------------------------------------------------


def deepwalk_walks(g: WeightedGraph, cfg: WalkConfig) -> list[list[int]]:
    """Uniform random walks, ``walks_per_node`` per start vertex."""
    if g.n_vertices == 0:
        raise ValueError("graph is empty")
    adj = g.adjacency
    corpus = []
    for start in range(g.n_vertices):
        for r in range(cfg.walks_per_node):
            rng = _walk_rng(cfg.seed, start, r)
            walk = [start]
            while len(walk) < cfg.walk_length:
                nbrs = adj[walk[-1]]
                if not nbrs:
                    break
                walk.append(nbrs[rng.integers(len(nbrs))])
            corpus.append(walk)
    return corpus


def node2vec_transition(g: WeightedGraph, prev: int, cur: int, p: float, q: float) -> np.ndarray:
    """Normalized probabilities over ``g.adjacency[cur]`` after the step ``prev -> cur``."""
    nbrs = g.adjacency[cur]
    prev_nbrs = g.neighbor_sets[prev]
    w = np.array(
        [1.0 / p if x == prev else (1.0 if x in prev_nbrs else 1.0 / q) for x in nbrs]
    )
    return w / w.sum()


def node2vec_walks(g: WeightedGraph, cfg: WalkConfig) -> list[list[int]]:
    """Second-order walks biased by return parameter ``p`` and in-out parameter ``q``."""
    if g.n_vertices == 0:
        raise ValueError("graph is empty")
    adj = g.adjacency
    cache: dict[tuple[int, int], np.ndarray] = {}
    corpus = []
    for start in range(g.n_vertices):
        for r in range(cfg.walks_per_node):
            rng = _walk_rng(cfg.seed, start, r)
            walk = [start]
            while len(walk) < cfg.walk_length:
                cur = walk[-1]
                nbrs = adj[cur]
                if not nbrs:
                    break
                if len(walk) == 1:
                    walk.append(nbrs[rng.integers(len(nbrs))])
                    continue
                key = (walk[-2], cur)
                cdf = cache.get(key)
                if cdf is None:
                    cdf = np.cumsum(node2vec_transition(g, walk[-2], cur, cfg.p, cfg.q))
                    cache[key] = cdf
                j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
                walk.append(nbrs[min(j, len(nbrs) - 1)])
            corpus.append(walk)
    return corpus


def euler_tour(root: int, children: dict[int, list[int]]) -> list[int]:
    """Vertex sequence of a depth-first Euler tour; ``2m - 1`` entries for ``m`` vertices."""
    tour = [root]
    stack = [(root, iter(children.get(root, ())))]
    while stack:
        node, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            if stack:
                tour.append(stack[-1][0])
        else:
            tour.append(child)
            stack.append((child, iter(children.get(child, ()))))
    return tour


def _diffusion_tree(g: WeightedGraph, start: int, size: int, rng) -> dict[int, list[int]]:
    adj = g.adjacency
    in_tree = {start}
    children: dict[int, list[int]] = {start: []}
    frontier = [start]
    while len(in_tree) < size and frontier:
        i = int(rng.integers(len(frontier)))
        x = frontier[i]
        outside = [y for y in adj[x] if y not in in_tree]
        if not outside:
            frontier[i] = frontier[-1]
            frontier.pop()
            continue
        y = outside[int(rng.integers(len(outside)))]
        in_tree.add(y)
        children[x].append(y)
        children[y] = []
        frontier.append(y)
    return children


def diff2vec_sequences(g: WeightedGraph, cfg: WalkConfig) -> list[list[int]]:
    """One diffusion subtree per start vertex, emitted as its Euler tour."""
    if g.n_vertices == 0:
        raise ValueError("graph is empty")
    corpus = []
    for start in range(g.n_vertices):
        rng = _walk_rng(cfg.seed, start, 0)
        children = _diffusion_tree(g, start, cfg.diffusion_size, rng)
        corpus.append(euler_tour(start, children))
    return corpus


def write_corpus(corpus: Sequence[Sequence[int]], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for walk in corpus:
            fh.write(" ".join(map(str, walk)) + "\n")


# ---------------------------------------------------------------------------
# 1-d skip-gram with negative sampling
# ---------------------------------------------------------------------------


def skipgram_pairs(corpus: Sequence[Sequence[int]], window: int) -> np.ndarray:
    """All ``(center, context)`` pairs within ``window`` positions, shape ``(m, 2)``."""
    chunks = []
    for walk in corpus:
        a = np.asarray(walk, dtype=np.int64)
        for off in range(1, window + 1):
            if off >= len(a):
                break
            chunks.append(np.stack([a[:-off], a[off:]], axis=1))
            chunks.append(np.stack([a[off:], a[:-off]], axis=1))
    if not chunks:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(chunks)


def negative_distribution(corpus: Sequence[Sequence[int]], n_vertices: int, power: float = 0.75) -> np.ndarray:
    counts = np.zeros(n_vertices)
    for walk in corpus:
        np.add.at(counts, np.asarray(walk, dtype=np.int64), 1.0)
    weights = counts**power
    return weights / weights.sum()


def init_embedding(n_vertices: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(_seed_words(seed) + [0x5EED])
    return rng.uniform(-0.5, 0.5, size=n_vertices)


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sgns_objective(z: np.ndarray, pairs: np.ndarray, negs: np.ndarray) -> float:
    """Sum of ``log s(z_u z_v) + sum_n log s(-z_u z_n)``; ``negs`` has one row per pair."""
    zu = z[pairs[:, 0]]
    pos = _log_sigmoid(zu * z[pairs[:, 1]]).sum()
    neg = _log_sigmoid(-zu[:, None] * z[negs]).sum()
    return float(pos + neg)


def sgns_gradient(z: np.ndarray, pairs: np.ndarray, negs: np.ndarray) -> np.ndarray:
    u, v = pairs[:, 0], pairs[:, 1]
    zu, zv, zn = z[u], z[v], z[negs]
    g_pos = 1.0 - _sigmoid(zu * zv)
    g_neg = -_sigmoid(zu[:, None] * zn)
    n = len(z)
    return (
        np.bincount(u, g_pos * zv + (g_neg * zn).sum(axis=1), minlength=n)
        + np.bincount(v, g_pos * zu, minlength=n)
        + np.bincount(negs.ravel(), (g_neg * zu[:, None]).ravel(), minlength=n)
    )


def train_sgns_1d(
    corpus: Sequence[Sequence[int]],
    n_vertices: int,
    cfg: WalkConfig,
    init: np.ndarray | None = None,
) -> np.ndarray:
    """Fit one real value per vertex by mini-batch stochastic gradient ascent.

    The learning rate decays linearly to ``1e-4 * learning_rate`` over all
    batches; values are clamped to ``[-50, 50]`` after every step. Returns the
    raw value array (wrap it with :meth:`ScalarField.on`).
    """
    if not corpus or all(len(w) == 0 for w in corpus):
        raise ValueError("empty corpus")
    for walk in corpus:
        if walk and (min(walk) < 0 or max(walk) >= n_vertices):
            raise ValueError("corpus contains vertex ids outside the graph")
    z = init_embedding(n_vertices, cfg.seed) if init is None else np.array(init, dtype=float)
    probs = negative_distribution(corpus, n_vertices)
    unseen = np.flatnonzero(probs == 0)
    if len(unseen):
        warnings.warn(
            f"{len(unseen)} vertices never appear in the corpus; keeping their initial values",
            RuntimeWarning,
            stacklevel=2,
        )
    pairs = skipgram_pairs(corpus, cfg.window)
    if len(pairs) == 0:
        return np.clip(z, -CLAMP, CLAMP)
    cdf = np.cumsum(probs)
    rng = np.random.default_rng(_seed_words(cfg.seed) + [0x5C9A])
    n_batches = -(-len(pairs) // cfg.batch_size)
    total = cfg.epochs * n_batches
    step = 0
    for epoch in range(cfg.epochs):
        shuffled = pairs[rng.permutation(len(pairs))]
        all_negs = np.searchsorted(cdf, rng.random((len(pairs), cfg.negatives)) * cdf[-1], side="right")
        np.minimum(all_negs, n_vertices - 1, out=all_negs)
        for b in range(n_batches):
            sl = slice(b * cfg.batch_size, (b + 1) * cfg.batch_size)
            batch, negs = shuffled[sl], all_negs[sl]
            lr = cfg.learning_rate * max(1e-4, 1.0 - step / total)
            z += lr * sgns_gradient(z, batch, negs)
            np.clip(z, -CLAMP, CLAMP, out=z)
            step += 1
        logger.debug("sgns epoch %d done", epoch)
    return z


# ---------------------------------------------------------------------------
# Encoders
# ---------------------------------------------------------------------------


def degree_encoder(g: WeightedGraph) -> ScalarField:
    """Vertex degree plus ``id * 1e-9`` so that values are distinct."""
    return ScalarField.on(g, g.degree() + DEGREE_JITTER * np.arange(g.n_vertices))


_WALKERS = {
    "deepwalk": deepwalk_walks,
    "node2vec": node2vec_walks,
    "diff2vec": diff2vec_sequences,
}

ENCODERS = ("deepwalk", "node2vec", "diff2vec", "degree")


def encode(g: WeightedGraph, encoder: str, cfg: WalkConfig | None = None) -> ScalarField:
    """Run a named encoder on ``g``."""
    if encoder == "degree":
        return degree_encoder(g)
    if encoder not in _WALKERS:
        raise ValueError(f"unknown encoder {encoder!r}; choose from {ENCODERS}")
    cfg = cfg or WalkConfig()
    corpus = _WALKERS[encoder](g, cfg)
    return ScalarField.on(g, train_sgns_1d(corpus, g.n_vertices, cfg))
