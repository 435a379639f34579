"""Command-line interface: ``topoembed <command> ...``.

Exit codes: 0 success, 1 input error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import encoders as enc
from .graph_core import load_graph, write_edge_list
from .metrics import DistanceMatrix, distance_matrix
from .persistence import diagram_from_json, finitize
from .pipeline import (
    ExperimentSpec,
    diagram_of,
    load_spec,
    mds_project,
    node_descriptor,
    run_experiment,
    stability_experiment,
    write_projection,
)
from .vectorize import VectorizeGrid, betti_curve, grid_for, landscape, persistence_image, write_feature_rows

logger = logging.getLogger("topoembed")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

_POLICY = {"cap": "cap_at_fmax", "drop": "drop_essential", "none": None}


def _add_walk_args(p: argparse.ArgumentParser, encoder_default: str = "degree") -> None:
    d = enc.WalkConfig()
    p.add_argument("--encoder", choices=enc.ENCODERS, default=encoder_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--walks-per-node", type=int, default=d.walks_per_node)
    p.add_argument("--walk-length", type=int, default=d.walk_length)
    p.add_argument("--window", type=int, default=d.window)
    p.add_argument("--negatives", type=int, default=d.negatives)
    p.add_argument("--epochs", type=int, default=d.epochs)
    p.add_argument("--learning-rate", type=float, default=d.learning_rate)
    p.add_argument("--p", type=float, default=d.p, help="node2vec return parameter")
    p.add_argument("--walk-q", type=float, default=d.q, help="node2vec in-out parameter")
    p.add_argument("--diffusion-size", type=int, default=d.diffusion_size)


def _walk_config(a) -> enc.WalkConfig:
    return enc.WalkConfig(
        walks_per_node=a.walks_per_node,
        walk_length=a.walk_length,
        window=a.window,
        negatives=a.negatives,
        epochs=a.epochs,
        learning_rate=a.learning_rate,
        seed=a.seed,
        p=a.p,
        q=a.walk_q,
        diffusion_size=a.diffusion_size,
    )


def _read_diagram(path: str):
    return diagram_from_json(Path(path).read_text(encoding="utf-8"))


def cmd_ingest(a) -> None:
    g = load_graph(a.input)
    write_edge_list(g, a.output)
    logger.info("wrote %d vertices, %d edges to %s", g.n_vertices, g.n_edges, a.output)


def cmd_embed(a) -> None:
    g = load_graph(a.graph)
    cfg = _walk_config(a)
    if a.corpus_dump and a.encoder != "degree":
        walker = {"deepwalk": enc.deepwalk_walks, "node2vec": enc.node2vec_walks,
                  "diff2vec": enc.diff2vec_sequences}[a.encoder]
        enc.write_corpus(walker(g, cfg), a.corpus_dump)
    enc.encode(g, a.encoder, cfg).to_csv(a.output)


def cmd_diagram(a) -> None:
    g = load_graph(a.graph)
    f = enc.ScalarField.from_csv(a.field, g) if a.field else enc.encode(g, a.encoder, _walk_config(a))
    policy = _POLICY[a.finitize]
    if a.node is not None:
        spec = ExperimentSpec(encoder=a.encoder, k=a.k, walk=_walk_config(a), seeds=(a.seed,))
        d = node_descriptor(g, a.node, spec, finitize_policy=policy, scalar=f)
    else:
        if a.filtration_dump:
            from .filtration import lower_star

            lower_star(g, f).write(a.filtration_dump)
        d = diagram_of(g, f, policy)
    d.write(a.output)


def cmd_dist(a) -> None:
    policy = _POLICY[a.finitize]
    items = []
    for path in a.diagrams:
        d = _read_diagram(path)
        if policy is not None:
            d = finitize(d, policy)
        items.append((Path(path).stem, d.drop_zero_length()))
    distance_matrix(items, a.q).to_csv(a.output)


def cmd_vectorize(a) -> None:
    policy = _POLICY[a.finitize] or "cap_at_fmax"
    dgms = [(Path(p).stem, finitize(_read_diagram(p), policy)) for p in a.diagrams]
    if a.t_min is not None and a.t_max is not None:
        grid = VectorizeGrid(a.t_min, a.t_max, a.resolution)
    else:
        grid = grid_for([d for _, d in dgms], a.resolution)
    # images share bounds and weight normalizer so rows are comparable
    pts = np.vstack([d.finite_pairs for _, d in dgms])
    pers = pts[:, 1] - pts[:, 0]
    pmax = float(pers.max()) if len(pts) else 0.0
    if len(pts):
        b0, b1 = float(pts[:, 0].min()), float(pts[:, 0].max())
        bounds = (b0, b1 if b1 > b0 else b0 + 1.0, 0.0, pmax if pmax > 0 else 1.0)
    else:
        bounds = (0.0, 1.0, 0.0, 1.0)
    rows = []
    for label, d in dgms:
        if a.scheme == "betti":
            fv = betti_curve(d, grid)
        elif a.scheme == "landscape":
            fv = landscape(d, a.levels, grid)
        else:
            fv = persistence_image(d, (a.pixels, a.pixels), a.sigma, bounds, pmax)
        rows.append((label, fv))
    write_feature_rows(rows, a.output)


def cmd_project(a) -> None:
    m = DistanceMatrix.from_csv(a.matrix)
    write_projection(m.labels, mds_project(m, a.dim), a.output)


def cmd_stability(a) -> None:
    g = load_graph(a.graph)
    cfg = _walk_config(a)
    spec = ExperimentSpec(
        encoder=a.encoder, walk=cfg, q=a.q, finitize=_POLICY[a.finitize] or "cap_at_fmax",
        seeds=tuple(a.seed + i for i in range(a.runs)),
    )
    text = json.dumps(stability_experiment(g, spec), indent=2, sort_keys=True)
    if a.output:
        Path(a.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_run(a) -> None:
    spec = load_spec(a.spec)
    manifest = run_experiment(spec)
    print(json.dumps(manifest, indent=2, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="topoembed", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="edge list or OFF mesh -> canonical edge list")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("embed", help="graph -> scalar field CSV")
    p.add_argument("graph")
    _add_walk_args(p, "node2vec")
    p.add_argument("--corpus-dump")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("diagram", help="graph + field or encoder -> diagram JSON")
    p.add_argument("graph")
    p.add_argument("--field", help="scalar field CSV; overrides --encoder")
    _add_walk_args(p)
    p.add_argument("--node", type=int, help="node-level descriptor of this vertex")
    p.add_argument("--k", type=int, default=1, help="ego-network hops")
    p.add_argument("--finitize", choices=sorted(_POLICY), default="none")
    p.add_argument("--filtration-dump")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("dist", help="diagram set -> Wasserstein distance matrix CSV")
    p.add_argument("diagrams", nargs="+")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--finitize", choices=["cap", "drop"], default="cap")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("vectorize", help="diagrams -> feature CSV")
    p.add_argument("diagrams", nargs="+")
    p.add_argument("--scheme", choices=["betti", "landscape", "image"], default="betti")
    p.add_argument("--finitize", choices=["cap", "drop"], default="cap")
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--levels", type=int, default=3, help="landscape levels")
    p.add_argument("--pixels", type=int, default=20, help="image side length")
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_vectorize)

    p = sub.add_parser("project", help="distance matrix CSV -> MDS coordinates CSV")
    p.add_argument("matrix")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("stability", help="seed robustness statistics as JSON")
    p.add_argument("graph")
    _add_walk_args(p, "node2vec")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--finitize", choices=["cap", "drop"], default="cap")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("run", help="run an experiment spec file")
    p.add_argument("spec")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
