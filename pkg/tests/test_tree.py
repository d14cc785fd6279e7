import itertools

import networkx as nx
import pytest

from src.core.types import FactorTag
from src.groups.tree import (
    base_vertex,
    edge_between,
    materialize_tree,
    neighbours,
    normal_form_path,
    path_to_json,
    tree_distance,
    vertex_action,
    vertex_of,
)
from src.groups.words import normal_form, parse_word

SL2Z_WORDS = ["S", "U", "S U", "U S", "S U^-1 S", "U S U", "S U S U^-1"]


def _vertices(p, words, kind):
    return [vertex_of(normal_form(parse_word(p, w)), kind) for w in words]


class TestAmalgamTree:
    def test_base_vertices_are_adjacent(self, sl2z):
        assert tree_distance(base_vertex(sl2z, FactorTag.A), base_vertex(sl2z, FactorTag.B)) == 1

    def test_stabilizer_fixes_base(self, sl2z):
        # S stabilizes the base A vertex
        v = vertex_of(normal_form(parse_word(sl2z, "S")), FactorTag.A)
        assert v == base_vertex(sl2z, FactorTag.A)

    def test_distance_formula(self, sl2z):
        v = vertex_of(normal_form(parse_word(sl2z, "S U")), FactorTag.A)
        assert tree_distance(base_vertex(sl2z, FactorTag.A), v) == 2
        w = vertex_of(normal_form(parse_word(sl2z, "S U S")), FactorTag.B)
        assert tree_distance(base_vertex(sl2z, FactorTag.B), w) == 4

    def test_metric_axioms(self, sl2z):
        vs = _vertices(sl2z, SL2Z_WORDS, FactorTag.A) + _vertices(sl2z, SL2Z_WORDS, FactorTag.B)
        for u, w in itertools.product(vs, repeat=2):
            assert tree_distance(u, w) == tree_distance(w, u)
            assert (tree_distance(u, w) == 0) == (u == w)
        for u, v, w in itertools.combinations(vs, 3):
            assert tree_distance(u, w) <= tree_distance(u, v) + tree_distance(v, w)

    def test_action_is_isometric(self, sl2z):
        g = normal_form(parse_word(sl2z, "U S U^-1"))
        vs = _vertices(sl2z, SL2Z_WORDS, FactorTag.A)
        for u, w in itertools.combinations(vs, 2):
            assert tree_distance(vertex_action(g, u), vertex_action(g, w)) == tree_distance(u, w)

    def test_normal_form_path_is_a_geodesic(self, sl2z):
        nf = normal_form(parse_word(sl2z, "S U S U^-1"))
        path = normal_form_path(nf)
        assert len(path) == nf.rl + 2
        for a, b in zip(path, path[1:]):
            assert tree_distance(a, b) == 1
            assert edge_between(a, b) is not None
        assert tree_distance(path[0], path[-1]) == len(path) - 1
        assert len(path_to_json(path)) == len(path)

    def test_neighbour_counts_are_coset_indices(self, sl2z):
        # [Z/4 : Z/2] = 2 and [Z/6 : Z/2] = 3
        assert len(neighbours(base_vertex(sl2z, FactorTag.A))) == 2
        assert len(neighbours(base_vertex(sl2z, FactorTag.B))) == 3

    def test_materialized_ball_is_a_tree(self, sl2z):
        graph = materialize_tree(sl2z, 3)
        assert nx.is_tree(graph)
        # 1 + 2 + 2*2 + 4*1 vertices within distance 3 of the A vertex
        assert graph.number_of_nodes() == 1 + 2 + 4 + 4

    def test_vertex_kind_must_be_a_factor(self, sl2z):
        with pytest.raises(ValueError):
            vertex_of(normal_form(parse_word(sl2z, "S U")), FactorTag.M)


class TestHnnTree:
    def test_distance_is_stable_letter_count(self, bs12):
        base = base_vertex(bs12)
        for text, expected in [("a", 0), ("f", 1), ("f a f", 2), ("f^-1 a f", 2), ("f a f^-1", 0)]:
            v = vertex_of(normal_form(parse_word(bs12, text)))
            assert tree_distance(base, v) == expected

    def test_path_steps(self, bs12):
        nf = normal_form(parse_word(bs12, "f^-1 a f a"))
        path = normal_form_path(nf)
        assert len(path) == nf.rl + 1
        for a, b in zip(path, path[1:]):
            assert tree_distance(a, b) == 1

    def test_base_valence(self, bs12):
        # [<a> : <a^2>] + [<a> : <a>] = 2 + 1
        assert len(neighbours(base_vertex(bs12))) == 3
