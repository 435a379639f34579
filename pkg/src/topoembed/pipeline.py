"""Graph- and node-level descriptors, the seed-robustness experiment, MDS and batch runs."""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import os
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .encoders import ENCODERS, ScalarField, WalkConfig, encode
from .filtration import lower_star
from .graph_core import WeightedGraph, ego_network, load_graph
from .metrics import DistanceMatrix, distance_matrix, wasserstein
from .persistence import PersistenceDiagram, finitize, zero_persistence

logger = logging.getLogger(__name__)

__all__ = [
    "ExperimentSpec",
    "parse_spec",
    "load_spec",
    "diagram_of",
    "graph_descriptor",
    "node_descriptor",
    "stability_experiment",
    "mds_project",
    "write_projection",
    "run_experiment",
]

RAW = None  # pass as finitize_policy to skip finitization


@dataclass(frozen=True)
class ExperimentSpec:
    inputs: tuple[tuple[str, str], ...] = ()
    encoder: str = "degree"
    walk: WalkConfig = field(default_factory=WalkConfig)
    k: int = 1
    q: float = 2.0
    finitize: str = "cap_at_fmax"
    seeds: tuple[int, ...] = (0,)
    output: str = "out"

    def __post_init__(self):
        if self.encoder not in ENCODERS:
            raise ValueError(f"unknown encoder {self.encoder!r}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not self.q >= 1:
            raise ValueError("q must be >= 1")
        if self.finitize not in ("cap_at_fmax", "drop_essential"):
            raise ValueError(f"unknown finitize policy {self.finitize!r}")

    @property
    def stochastic(self) -> bool:
        return self.encoder != "degree"

    def config(self, seed: Optional[int] = None) -> WalkConfig:
        return self.walk.with_seed(self.seeds[0] if seed is None else seed)

    def canonical(self) -> str:
        d = asdict(self)
        d["inputs"] = [list(x) for x in self.inputs]
        d["seeds"] = list(self.seeds)
        return json.dumps(d, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


_WALK_KEYS = {f.name: f.type for f in fields(WalkConfig)}


def parse_spec(text: str, base_dir: str | os.PathLike = ".") -> ExperimentSpec:
    """Parse the flat ``key = value`` spec format.

    ``input = <label> <path>`` may repeat; ``seeds`` is a comma-separated
    list. ``q`` is the Wasserstein order; the node2vec in-out parameter is
    ``walk_q``. Relative paths resolve against ``base_dir``.
    """
    base = Path(base_dir)
    inputs = []
    walk = {}
    top: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"spec line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "input":
                label, path = value.split(None, 1)
                inputs.append((label, str(base / path.strip())))
            elif key == "seeds":
                top["seeds"] = tuple(int(s) for s in value.replace(",", " ").split())
            elif key == "encoder":
                top["encoder"] = value
            elif key == "k":
                top["k"] = int(value)
            elif key == "q":
                top["q"] = float(value)
            elif key == "finitize":
                top["finitize"] = {"cap": "cap_at_fmax", "drop": "drop_essential"}.get(value, value)
            elif key == "output":
                top["output"] = str(base / value)
            elif key == "walk_q":
                walk["q"] = float(value)
            elif key in _WALK_KEYS and key not in ("seed", "q"):
                walk[key] = float(value) if key in ("learning_rate", "p") else int(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"spec line {lineno}: {exc}") from None
    if not inputs:
        raise ValueError("spec has no inputs")
    return ExperimentSpec(inputs=tuple(inputs), walk=WalkConfig(**walk), **top)


def load_spec(path: str | os.PathLike) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read(), Path(path).parent)


# ---------------------------------------------------------------------------
# Descriptors
# ---------------------------------------------------------------------------


def diagram_of(g: WeightedGraph, f: ScalarField, finitize_policy: Optional[str] = "cap_at_fmax") -> PersistenceDiagram:
    d = zero_persistence(lower_star(g, f))
    return d if finitize_policy is None else finitize(d, finitize_policy)


def graph_descriptor(
    g: WeightedGraph,
    spec: ExperimentSpec,
    seed: Optional[int] = None,
    finitize_policy: Optional[str] = "spec",
    scalar: Optional[ScalarField] = None,
) -> PersistenceDiagram:
    """Encoder, lower-star filtration, 0-dim persistence, finitization."""
    f = scalar if scalar is not None else encode(g, spec.encoder, spec.config(seed))
    policy = spec.finitize if finitize_policy == "spec" else finitize_policy
    return diagram_of(g, f, policy)


def node_descriptor(
    g: WeightedGraph,
    w: int,
    spec: ExperimentSpec,
    seed: Optional[int] = None,
    finitize_policy: Optional[str] = "spec",
    scalar: Optional[ScalarField] = None,
) -> PersistenceDiagram:
    """Diagram of the graph-level field restricted to the ``k``-hop ego network of ``w``."""
    sub, remap = ego_network(g, w, spec.k)
    f = scalar if scalar is not None else encode(g, spec.encoder, spec.config(seed))
    f.check(g)
    policy = spec.finitize if finitize_policy == "spec" else finitize_policy
    return diagram_of(sub, f.restrict(sub, remap), policy)


def stability_experiment(g: WeightedGraph, spec: ExperimentSpec) -> dict:
    """Pairwise spread of diagrams and raw fields across ``spec.seeds``.

    Returns mean/max pairwise ``W_q`` between the diagrams and mean/max
    pairwise sup-norm distance between the scalar fields.
    """
    seeds = list(spec.seeds)
    if len(seeds) < 2:
        raise ValueError("stability experiment needs at least two seeds")
    fields_ = [encode(g, spec.encoder, spec.config(s)) for s in seeds]
    dgms = [diagram_of(g, f, spec.finitize).drop_zero_length() for f in fields_]
    dw, df = [], []
    for i, j in itertools.combinations(range(len(seeds)), 2):
        dw.append(wasserstein(dgms[i], dgms[j], spec.q))
        df.append(float(np.abs(fields_[i].values - fields_[j].values).max()) if g.n_vertices else 0.0)
    dw, df = np.array(dw), np.array(df)
    return {
        "encoder": spec.encoder,
        "q": spec.q,
        "n_runs": len(seeds),
        "n_pairs": len(dw),
        "diagram_wasserstein": {"mean": float(dw.mean()), "max": float(dw.max())},
        "field_sup_norm": {"mean": float(df.mean()), "max": float(df.max())},
    }


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------


def _top_eigenpairs(b: np.ndarray, dim: int, tol: float = 1e-10, max_iter: int = 10000):
    """Largest algebraic eigenpairs of symmetric ``b`` by shifted power iteration with deflation."""
    n = len(b)
    shift = float(np.abs(b).sum(axis=1).max()) if n else 0.0  # Gershgorin bound
    a = b + shift * np.eye(n)
    start = np.random.default_rng(12345).standard_normal(n)
    vals, vecs = [], []
    for _ in range(min(dim, n)):
        v = start.copy()
        for u in vecs:
            v -= (u @ v) * u
        nv = np.linalg.norm(v)
        if nv == 0 or shift == 0:
            vals.append(0.0)
            vecs.append(np.zeros(n))
            continue
        v /= nv
        lam = v @ a @ v
        for it in range(max_iter):
            w = a @ v
            for u in vecs:
                w -= (u @ w) * u
            nw = np.linalg.norm(w)
            if nw == 0:
                break
            w /= nw
            aw = a @ w
            for u in vecs:
                aw -= (u @ aw) * u
            lam_new = w @ aw
            # residual of the deflated operator; earlier vectors carry their own error
            done = np.linalg.norm(aw - lam_new * w) <= tol * max(1.0, abs(lam_new))
            v, lam = w, lam_new
            if done:
                break
        else:
            # typical cause: eigenvalues clustered across the dim cutoff
            warnings.warn(
                f"power iteration did not converge for eigenpair {len(vecs)} "
                f"(residual {np.linalg.norm(aw - lam * w):.3g})",
                RuntimeWarning,
                stacklevel=3,
            )
        vals.append(float(lam - shift))
        vecs.append(v)
    return np.array(vals), vecs


def mds_project(m: DistanceMatrix, dim: int = 2) -> np.ndarray:
    """Classical MDS coordinates, one row per label, shape ``(n, dim)``."""
    d = np.asarray(m.values, dtype=float)
    if not np.allclose(d, d.T, atol=1e-12, rtol=0):
        raise ValueError("distance matrix is not symmetric")
    n = len(d)
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d**2) @ j
    b = 0.5 * (b + b.T)
    vals, vecs = _top_eigenpairs(b, dim)
    out = np.zeros((n, dim))
    for i, (lam, v) in enumerate(zip(vals, vecs)):
        out[:, i] = v * np.sqrt(max(lam, 0.0))
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("MDS produced non-finite coordinates")
    return out


def write_projection(labels: Sequence[str], coords: np.ndarray, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["label"] + [f"x{i}" for i in range(coords.shape[1])])
        for lab, row in zip(labels, coords):
            wr.writerow([lab, *(f"{x:.17g}" for x in row)])


# ---------------------------------------------------------------------------
# Batch runs
# ---------------------------------------------------------------------------


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_experiment(spec: ExperimentSpec) -> dict:
    """Compute every artifact for ``spec`` and write them under ``spec.output``.

    Files: ``diagrams.json`` (raw diagrams), ``distances.csv``,
    ``projection.csv``, ``stats.json`` and ``manifest.json``. An input that
    fails to load or encode is recorded in the manifest and skipped.
    """
    out = Path(spec.output)
    out.mkdir(parents=True, exist_ok=True)
    failures: dict[str, str] = {}
    inputs_meta = []
    raw: list[tuple[str, PersistenceDiagram]] = []
    stats: dict = {"encoder": spec.encoder, "q": spec.q, "finitize": spec.finitize, "graphs": {}}
    for label, source in spec.inputs:
        try:
            g = load_graph(source)
            inputs_meta.append({"label": label, "sha256": _sha256_file(Path(source))})
            d = graph_descriptor(g, spec, finitize_policy=RAW)
        except (OSError, ValueError, ArithmeticError) as exc:
            logger.warning("input %s failed: %s", label, exc)
            failures[label] = f"{type(exc).__name__}: {exc}"
            continue
        raw.append((label, d))
        entry = {
            "n_vertices": g.n_vertices,
            "n_edges": g.n_edges,
            "n_finite_pairs": len(d.finite_pairs),
            "n_essential": len(d.essential_births),
        }
        if spec.stochastic and len(spec.seeds) >= 2:
            entry["stability"] = stability_experiment(g, spec)
        stats["graphs"][label] = entry

    finite = [(lab, finitize(d, spec.finitize).drop_zero_length()) for lab, d in raw]
    dm = distance_matrix(finite, spec.q)
    coords = mds_project(dm, 2) if len(finite) else np.zeros((0, 2))

    files = {
        "diagrams.json": "{" + ", ".join(f"{json.dumps(lab)}: {d.to_json()}" for lab, d in raw) + "}\n",
        "stats.json": json.dumps(stats, indent=2, sort_keys=True) + "\n",
    }
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    dm.to_csv(out / "distances.csv")
    write_projection(dm.labels, coords, out / "projection.csv")

    manifest = {
        "spec_sha256": spec.digest(),
        "inputs": inputs_meta,
        "failures": failures,
        "files": {
            name: _sha256_file(out / name)
            for name in ("diagrams.json", "distances.csv", "projection.csv", "stats.json")
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
