"""Acceptance criteria. Each test records one PASS/FAIL line, echoed in the run summary."""

import time
from itertools import combinations

import numpy as np

from graphs import cycle, grid, path, random_graph, random_tree
from oracles import brute_wasserstein, random_diagram
from topoembed.encoders import (
    ScalarField,
    WalkConfig,
    encode,
    sgns_gradient,
    sgns_objective,
    skipgram_pairs,
    train_sgns_1d,
)
from topoembed.filtration import lower_star
from topoembed.graph_core import write_edge_list
from topoembed.metrics import DistanceMatrix, bottleneck, wasserstein
from topoembed.persistence import PersistenceDiagram, brute_force_zero_persistence, finitize, zero_persistence
from topoembed.pipeline import ExperimentSpec, graph_descriptor, load_spec, mds_project, run_experiment

RESULTS = []


def record(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def D(points):
    return PersistenceDiagram(np.array(points, dtype=float).reshape(-1, 2))


def test_oracle_equivalence():
    rng = np.random.default_rng(2024)
    mismatches = 0
    t0 = time.perf_counter()
    for i in range(1000):
        n = int(rng.integers(1, 13))
        g = random_graph(n, float(rng.uniform(0.1, 0.8)), rng)
        # every other field is integer-valued so ties get exercised
        vals = rng.integers(0, 4, n).astype(float) if i % 2 else rng.normal(size=n)
        f = ScalarField.on(g, vals)
        fast = zero_persistence(lower_star(g, f))
        if not fast.same_as(brute_force_zero_persistence(g, f)):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    record("persistence oracle equivalence", mismatches == 0 and elapsed < 10,
           f"{mismatches} mismatches on 1000 graphs in {elapsed:.2f}s (limit 10s)")


def test_hand_diagram():
    g = path(3)
    d = zero_persistence(lower_star(g, ScalarField.on(g, [0, 2, 1])))
    fin, ess = d.as_multiset()
    ok = fin == {(1.0, 2.0): 1, (2.0, 2.0): 1} and ess == {0.0: 1}
    record("hand-derived diagram", ok, f"finite={sorted(fin)} essential={sorted(ess)}")


def test_wasserstein_exactness():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(500):
        x, y = random_diagram(rng, 5), random_diagram(rng, 5)
        worst = max(worst, abs(wasserstein(D(x), D(y), 2) - brute_wasserstein(x, y, 2)))
    ex1 = wasserstein(D([[1, 3]]), D([]), 2)
    ex2 = wasserstein(D([[0, 4]]), D([[0, 2]]), 2)
    ok = worst <= 1e-9 and ex1 == 1.0 and ex2 == 2.0
    record("Wasserstein exactness", ok, f"max |W2 - brute| = {worst:.2e} on 500 pairs; examples {ex1!r}, {ex2!r}")


def test_metric_axioms():
    rng = np.random.default_rng(31)
    asym = 0
    slack = -np.inf
    for _ in range(500):
        x, y, z = (D(random_diagram(rng, 6)) for _ in range(3))
        xy, yx = wasserstein(x, y), wasserstein(y, x)
        asym += xy != yx
        slack = max(slack, wasserstein(x, z) - xy - wasserstein(y, z))
    ok = asym == 0 and slack <= 1e-9
    record("metric axioms", ok, f"{asym} asymmetric triples; max triangle excess {slack:.2e}")


def test_stability_probe():
    rng = np.random.default_rng(55)
    worst = -np.inf
    for _ in range(200):
        n = int(rng.integers(1, 16))
        g = random_graph(n, 0.3, rng)
        f = rng.normal(size=n)
        delta = rng.uniform(-0.5, 0.5, n) * rng.random()
        a = finitize(zero_persistence(lower_star(g, ScalarField.on(g, f))))
        b = finitize(zero_persistence(lower_star(g, ScalarField.on(g, f + delta))))
        worst = max(worst, bottleneck(a, b) - np.abs(delta).max())
    record("stability probe", worst <= 1e-9, f"max bottleneck - max|delta| = {worst:.2e} on 200 triples")


def families(rng):
    sizes = rng.integers(30, 61, 20)
    cycles = [cycle(int(n), 1 + 0.1 * rng.random(int(n))) for n in sizes[:10]]
    trees = [random_tree(int(n), rng) for n in sizes[10:]]
    dims = [(5, 6), (5, 7), (6, 6), (5, 8), (6, 7), (5, 9), (7, 7), (6, 8), (5, 10), (6, 9)]
    grids = []
    for r, c in dims:
        m = r * (c - 1) + c * (r - 1)
        grids.append(grid(r, c, 1 + 0.1 * rng.random(m)))
    return {"cycle": cycles, "tree": trees, "grid": grids}


def test_family_separation():
    t0 = time.perf_counter()
    spec = ExperimentSpec(encoder="degree", q=2.0, finitize="cap_at_fmax")
    fams = families(np.random.default_rng(5))
    dg = {k: [graph_descriptor(g, spec).drop_zero_length() for g in v] for k, v in fams.items()}

    def mean_w(a, b, same):
        pairs = combinations(range(len(a)), 2) if same else ((i, j) for i in range(len(a)) for j in range(len(b)))
        return float(np.mean([wasserstein(a[i], b[j], 2) for i, j in pairs]))

    within = {k: mean_w(v, v, True) for k, v in dg.items()}
    ratios = {}
    for a, b in combinations(dg, 2):
        between = mean_w(dg[a], dg[b], False)
        ratios[f"{a}/{b}"] = max(within[a], within[b]) / between
    elapsed = time.perf_counter() - t0
    ok = all(r < 1 for r in ratios.values()) and elapsed < 60
    detail = ", ".join(f"{k} {v:.3g}" for k, v in ratios.items())
    record("family separation", ok, f"separation ratios {detail}; {elapsed:.2f}s (limit 60s)")


def test_robustness_across_seeds():
    rng = np.random.default_rng(9)
    g = grid(5, 10, 1 + 0.1 * rng.random(85))
    fields, diagrams = [], []
    for seed in range(10):
        f = encode(g, "node2vec", WalkConfig(seed=seed))
        fields.append(f.values)
        diagrams.append(finitize(zero_persistence(lower_star(g, f))).drop_zero_length())
    pairs = list(combinations(range(10), 2))
    w2 = float(np.mean([wasserstein(diagrams[i], diagrams[j], 2) for i, j in pairs]))
    sup = float(np.mean([np.abs(fields[i] - fields[j]).max() for i, j in pairs]))
    record("robustness across seeds", w2 <= sup, f"mean W2 = {w2:.4g}, mean sup-norm = {sup:.4g}")


def test_mds():
    tri = mds_project(DistanceMatrix(tuple("abc"), [[0, 3, 4], [3, 0, 5], [4, 5, 0]]))
    got = [np.linalg.norm(tri[i] - tri[j]) for i, j in combinations(range(3), 2)]
    err3 = float(np.abs(np.array(got) - [3, 4, 5]).max())
    two = mds_project(DistanceMatrix(("a", "b"), [[0, 2.5], [2.5, 0]]))
    err2 = abs(float(np.linalg.norm(two[0] - two[1])) - 2.5)
    record("MDS correctness", err3 < 1e-6 and err2 <= 1e-8, f"3-4-5 max error {err3:.2e}; two-point error {err2:.2e}")


def test_run_determinism(tmp_path):
    rng = np.random.default_rng(3)
    write_edge_list(cycle(12, 1 + rng.random(12)), tmp_path / "c.txt")
    write_edge_list(random_tree(15, rng), tmp_path / "t.txt")
    write_edge_list(grid(3, 4), tmp_path / "g.txt")
    (tmp_path / "exp.spec").write_text(
        "input = c c.txt\ninput = t t.txt\ninput = g g.txt\n"
        "encoder = node2vec\nwalks_per_node = 4\nwalk_length = 15\nepochs = 2\n"
        "seeds = 7, 8\noutput = out\n"
    )
    first = run_experiment(load_spec(tmp_path / "exp.spec"))
    on_disk = (tmp_path / "out" / "manifest.json").read_text()
    second = run_experiment(load_spec(tmp_path / "exp.spec"))
    ok = first == second and on_disk == (tmp_path / "out" / "manifest.json").read_text()
    record("run determinism", ok, f"{len(first['files'])} artifact checksums identical across two runs: {ok}")


def test_sgns_gradient():
    corpus = [[0, 1, 2, 3, 4], [4, 3, 2], [1, 0, 1, 2], [3, 4, 3, 2, 1]]
    cfg = WalkConfig(window=2, negatives=3, epochs=3, seed=11)
    z = train_sgns_1d(corpus, 5, cfg)
    pairs = skipgram_pairs(corpus, cfg.window)
    negs = np.random.default_rng(99).integers(0, 5, size=(len(pairs), cfg.negatives))
    grad = sgns_gradient(z, pairs, negs)
    h = 1e-5
    fd = np.array([
        (sgns_objective(z + h * e, pairs, negs) - sgns_objective(z - h * e, pairs, negs)) / (2 * h)
        for e in np.eye(5)
    ])
    rel = float((np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-8)).max())
    record("SGNS gradient check", rel < 1e-4, f"max relative error {rel:.2e}")
