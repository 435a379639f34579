import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphs import path, random_graph, random_tree
from topoembed.encoders import ScalarField
from topoembed.filtration import lower_star
from topoembed.graph_core import WeightedGraph, connected_components
from topoembed.persistence import (
    PersistenceDiagram,
    brute_force_zero_persistence,
    diagram_from_json,
    finitize,
    zero_persistence,
)


def pd(g, vals, **kw):
    return zero_persistence(lower_star(g, ScalarField.on(g, vals)), **kw)


def test_path_example():
    d = pd(path(3), [0, 2, 1])
    fin, ess = d.as_multiset()
    assert fin == Counter({(1.0, 2.0): 1, (2.0, 2.0): 1})
    assert ess == Counter({0.0: 1})
    assert d.zero_length_mask.tolist().count(True) == 1
    assert d.f_max == 2.0


def test_path_example_brute_force():
    g = path(3)
    f = ScalarField.on(g, [0, 2, 1])
    assert brute_force_zero_persistence(g, f).same_as(zero_persistence(lower_star(g, f)))


def test_single_vertex():
    d = pd(WeightedGraph(1), [3.5])
    assert len(d.finite_pairs) == 0
    assert d.essential_births.tolist() == [3.5]


def test_two_isolated():
    d = pd(WeightedGraph(2), [0, 1])
    assert sorted(d.essential_births.tolist()) == [0.0, 1.0]


def test_drop_zero():
    d = pd(path(3), [0, 2, 1], drop_zero=True)
    assert d.finite_pairs.tolist() == [[1.0, 2.0]]


def test_elder_tie_break():
    # vertex 1 is born and merged at t=1, then births 0 and 0 meet: vertex 2 dies
    g = path(3)
    d = pd(g, [0, 1, 0])
    assert d.finite_pairs.tolist() == [[1.0, 1.0], [0.0, 1.0]]
    assert d.essential_births.tolist() == [0.0]


def test_empty_edge_graph_brute_force():
    g = WeightedGraph(5)
    f = ScalarField.on(g, [3, 1, 4, 1, 5])
    d = brute_force_zero_persistence(g, f)
    assert len(d.finite_pairs) == 0
    assert sorted(d.essential_births.tolist()) == [1, 1, 3, 4, 5]


def test_brute_force_scale_limit():
    g = WeightedGraph(1001)
    with pytest.raises(ValueError):
        brute_force_zero_persistence(g, ScalarField.on(g, np.zeros(1001)))


@pytest.mark.parametrize("ties", [False, True])
def test_oracle_equivalence_randomized(ties):
    rng = np.random.default_rng(2024 + ties)
    for _ in range(300):
        n = int(rng.integers(1, 13))
        g = random_graph(n, float(rng.uniform(0, 0.6)), rng)
        vals = rng.integers(0, 3, n).astype(float) if ties else rng.normal(size=n)
        f = ScalarField.on(g, vals)
        assert zero_persistence(lower_star(g, f)).same_as(brute_force_zero_persistence(g, f))


case = st.tuples(st.integers(1, 12), st.floats(0.0, 0.7), st.integers(0, 2**32 - 1))


@settings(max_examples=150, deadline=None)
@given(case)
def test_counts_and_values(c):
    n, p, seed = c
    rng = np.random.default_rng(seed)
    g = random_graph(n, p, rng)
    vals = rng.normal(size=n)
    d = pd(g, vals)
    assert d.n_points == n
    assert len(d.essential_births) == len(connected_components(g))
    edge_times = {max(vals[u], vals[v]) for u, v, _ in g.edges}
    assert set(d.finite_pairs[:, 1].tolist()) <= edge_times
    births = np.concatenate([d.finite_pairs[:, 0], d.essential_births])
    assert set(births.tolist()) <= set(vals.tolist())
    assert np.all(d.finite_pairs[:, 1] >= d.finite_pairs[:, 0])


@settings(max_examples=80, deadline=None)
@given(case, st.integers(-50, 50))
def test_translation(c, shift):
    n, p, seed = c
    rng = np.random.default_rng(seed)
    g = random_graph(n, p, rng)
    vals = rng.integers(-20, 20, n).astype(float)
    a, b = pd(g, vals), pd(g, vals + shift)
    fa, ea = a.as_multiset()
    assert b.as_multiset() == (
        Counter({(x + shift, y + shift): k for (x, y), k in fa.items()}),
        Counter({x + shift: k for x, k in ea.items()}),
    )


def test_tree_has_one_essential():
    rng = np.random.default_rng(0)
    g = random_tree(20, rng)
    d = pd(g, rng.normal(size=20))
    assert len(d.essential_births) == 1
    assert d.essential_births[0] == min(np.concatenate([d.finite_pairs[:, 0], d.essential_births]))


class TestFinitize:
    def test_cap(self):
        d = PersistenceDiagram(np.empty((0, 2)), [0.0], 2.0)
        assert finitize(d, "cap_at_fmax").finite_pairs.tolist() == [[0.0, 2.0]]

    def test_drop(self):
        d = PersistenceDiagram(np.empty((0, 2)), [0.0], 2.0)
        out = finitize(d, "drop_essential")
        assert out.n_points == 0 and out.is_finite

    @pytest.mark.parametrize("policy", ["cap_at_fmax", "drop_essential"])
    def test_identity_without_essentials(self, policy):
        d = PersistenceDiagram([[0.0, 1.0], [0.5, 0.7]], [], 1.0)
        assert finitize(d, policy).same_as(d)

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            finitize(PersistenceDiagram(), "clip")


class TestDiagram:
    def test_rejects_bad_pairs(self):
        with pytest.raises(ValueError):
            PersistenceDiagram([[1.0, 0.0]])
        with pytest.raises(ValueError):
            PersistenceDiagram([[0.0, np.inf]])

    def test_json_roundtrip(self):
        d = PersistenceDiagram([[0.1, 1 / 3], [2.0, 2.0]], [-0.7], 1e-17 + 2)
        text = d.to_json()
        obj = json.loads(text)
        assert set(obj) == {"finite", "essential", "f_max"}
        assert "0.33333333333333331" in text
        back = diagram_from_json(text)
        assert back.same_as(d) and back.f_max == d.f_max

    def test_points(self):
        d = PersistenceDiagram([[0.0, 1.0]], [0.5], 1.0)
        pts = d.points()
        assert pts.shape == (2, 2) and np.isinf(pts[1, 1])
