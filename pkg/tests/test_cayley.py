import networkx as nx
import numpy as np
import pytest

from src.core.errors import OutOfBall
from src.core.types import FactorTag
from src.groups import matrices as mx
from src.groups.cayley import CayleyBall, four_point_delta_nb
from src.groups.words import normal_form
from src.certify import fixtures


@pytest.fixture(scope="module")
def free_ball():
    rep = fixtures.f2_sanov()
    return CayleyBall.build([rep.matrix("x"), rep.matrix("y")], radius=3, names=rep.names)


class TestCayleyBall:
    def test_free_group_sphere_sizes(self, free_ball):
        assert free_ball.sphere_sizes == [1, 4, 12, 36]
        assert len(free_ball) == 53
        assert free_ball.words[0] == ()

    def test_word_lengths_are_distances_to_identity(self, free_ball):
        for i in range(len(free_ball)):
            assert free_ball.distance(0, i) == len(free_ball.words[i])

    def test_lookup_by_matrix_and_word(self, free_ball):
        i = free_ball.index_of_word((1, -2))
        assert free_ball.word(i) == (1, -2)
        assert mx.matrices_equal(free_ball.element(i), free_ball.letters[1] @ free_ball.letters[-2])
        with pytest.raises(OutOfBall):
            free_ball.index(mx.as_matrix([[1, 16], [0, 1]]))

    def test_geodesic_endpoints(self, free_ball):
        i, j = free_ball.index_of_word((1, 2)), free_ball.index_of_word((-2, 1))
        path = free_ball.geodesic(i, j)
        assert path[0] == i and path[-1] == j
        assert len(path) == free_ball.distance(i, j) + 1

    def test_free_group_ball_is_zero_hyperbolic(self, free_ball):
        assert free_ball.delta(2) == 0.0

    def test_cyclic_subgroup_is_convex(self, free_ball):
        trace = free_ball.subgroup_trace([(1,)], "x")
        # x^-3 .. x^3
        assert len(trace) == 7
        assert free_ball.index_of_word((-1, -1)) in trace
        assert free_ball.index_of_word((2,)) not in trace
        assert trace.members == frozenset(trace.indices)
        assert free_ball.quasiconvexity_constant(trace) == 0
        g = free_ball.index_of_word((1, 2))
        assert free_ball.nearest_point_projection(g, trace) == free_ball.index_of_word((1,))
        assert free_ball.projection_inequality_defect(g, trace) <= 0

    def test_gromov_products(self, free_ball):
        x, y = free_ball.index_of_word((1,)), free_ball.index_of_word((2,))
        xy = free_ball.index_of_word((1, 2))
        assert free_ball.gromov_product(x, y, 0) == 0.0
        assert free_ball.gromov_product(xy, x, 0) == 1.0

    def test_projection_displacement(self, free_ball):
        trace = free_ball.subgroup_trace([(1,)], "x")
        assert free_ball.projection_displacement(free_ball.index_of_word((1, 1, 2)), trace) == 2
        assert free_ball.projection_displacement(free_ball.index_of_word((2, 1)), trace) == 0

    def test_projection_lies_on_geodesics_to_the_subgroup(self, free_ball):
        trace = free_ball.subgroup_trace([(1,)], "x")
        for word in [(1, 1, 2), (2, -1), (-1, 2, 2)]:
            assert free_ball.projection_geodesic_gap(free_ball.index_of_word(word), trace) == 0

    def test_fellow_travel_margin(self, free_ball):
        w = free_ball.index_of_word
        seq1 = [w((1,)), w((1, 2)), w((1, 2, 2))]
        seq2 = [w((1,)), w((1, 1)), w((1, 1, 1))]
        assert free_ball.fellow_travel_profile(seq1, seq2) == [1.0, 1.0, 1.0]
        assert free_ball.fellow_travel_margin(seq1, seq2) == 1.0
        with pytest.raises(ValueError):
            free_ball.fellow_travel_margin(seq1, seq2[:2])

    def test_networkx_export_is_a_tree(self, free_ball):
        graph = free_ball.to_networkx()
        assert nx.is_tree(graph)
        assert graph.nodes[0]["word"] == []

    def test_stats_payload(self, free_ball):
        stats = free_ball.stats([free_ball.subgroup_trace([(1,)], "x")])
        assert stats["size"] == 53
        assert stats["quasiconvexity"] == {"x": 0}


class TestAmalgamBall:
    def test_letters_remember_their_factor(self, sl2z):
        ball = CayleyBall.from_amalgam(sl2z, radius=2)
        w = ball.amalgam_word(ball.index_of_word((1, 2)))
        assert [s.factor for s in w.syllables] == [FactorTag.A, FactorTag.B]

    def test_projection_to_a_factor_is_bounded(self, sl2z):
        ball = CayleyBall.from_amalgam(sl2z, radius=8)
        assert len(ball) == 212
        trace = ball.subgroup_trace([(1,)], "A")
        worst = {}
        for i, word in enumerate(ball.words):
            if normal_form(ball.amalgam_word(i)).rl < 3:
                continue
            worst[len(word)] = max(worst.get(len(word), 0), ball.projection_displacement(i, trace))
        assert sorted(worst) == [3, 4, 5, 6, 7, 8]
        assert worst[8] <= worst[6] <= 2


class TestFourPointKernel:
    def test_path_metric_has_zero_defect(self):
        n = 6
        dist = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
        assert four_point_delta_nb(dist, np.arange(n, dtype=np.int64)) == 0.0

    def test_cycle_metric_has_positive_defect(self):
        n = 8
        k = np.arange(n)
        diff = np.abs(np.subtract.outer(k, k))
        dist = np.minimum(diff, n - diff).astype(float)
        assert four_point_delta_nb(dist, np.arange(n, dtype=np.int64)) > 0.0
