import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.core.errors import NotInCentralizer, OrderUnavailable, PresentationInvalid, UnboundGenerator
from src.core.types import SplitKind
from src.certify import fixtures
from src.geometry import flags as fl
from src.geometry.flags import FlagType
from src.geometry.reps import (
    GENUS2_RELATOR,
    BoundaryCircle,
    CentralizerChart,
    MatrixRep,
    arc_net,
    arc_split,
    arc_split_four,
    axis_flags,
    bend,
    commutator_defect,
    enumerate_reduced_words,
    evaluate,
    four_arcs,
    fuchsian_genus2,
    genus2_amalgam_split,
    genus2_hnn_split,
    lift_rep,
    limit_set_sample,
    name_word,
    on_arc,
    sym_power_lift,
)
from src.groups import matrices as mx
from src.certify.checks import antipodality_audit


class TestMatrixRep:
    def test_exact_evaluation(self):
        rep = fixtures.sl2z_rep()
        assert rep.exact
        assert mx.matrices_equal(evaluate(rep, "S S"), -mx.identity(2, True))
        assert mx.matrices_equal(evaluate(rep, "U^3"), -mx.identity(2, True))

    def test_reduced_word_enumeration(self):
        words = list(enumerate_reduced_words(fixtures.schottky_rep(), 2))
        assert len(words) == 4 + 12
        assert len(words[0]) == 1 and len(words[-1]) == 2

    def test_unbound_generator(self):
        with pytest.raises(UnboundGenerator):
            evaluate(fixtures.sl2z_rep(), "S T")

    def test_shapes_must_agree(self):
        with pytest.raises(PresentationInvalid):
            MatrixRep({"a": np.eye(2), "b": np.eye(3)})

    def test_name_word_of_syllable_word(self, bs12):
        from src.groups.words import parse_word
        assert name_word(parse_word(bs12, "f a^2")) == (("f", 1), ("a", 1), ("a", 1))


class TestSymmetricPowers:
    def test_unipotent_lift(self):
        lifted = sym_power_lift(mx.as_matrix([[1, 1], [0, 1]]), 3)
        assert mx.matrices_equal(lifted, mx.as_matrix([[1, 1, 1], [0, 1, 2], [0, 0, 1]]))

    def test_lift_is_a_homomorphism(self, rng):
        for d in (3, 4, 5):
            m, n = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
            assert_allclose(sym_power_lift(m @ n, d), sym_power_lift(m, d) @ sym_power_lift(n, d), atol=1e-10)

    def test_genus2_relator(self):
        rep = fuchsian_genus2()
        assert mx.is_identity(evaluate(rep, GENUS2_RELATOR), tol=1e-8, projective=True)
        lifted = lift_rep(rep, 3)
        assert mx.is_identity(evaluate(lifted, GENUS2_RELATOR), tol=1e-8)

    def test_genus2_splittings_are_consistent(self):
        rep = lift_rep(fuchsian_genus2(), 3)
        # constructing a presentation checks the edge relations numerically
        genus2_amalgam_split().presentation(rep)
        genus2_hnn_split().presentation(rep)


class TestBending:
    def test_centralizer_chart_commutes(self):
        rep = lift_rep(fuchsian_genus2(), 3)
        split = genus2_amalgam_split()
        eta = evaluate(rep, split.edge_word)
        chart = CentralizerChart(eta)
        assert chart.dimension == 2
        assert commutator_defect(chart(np.array([0.3, -0.2])), eta) < 1e-9
        assert_allclose(chart(np.zeros(2)), np.eye(3), atol=1e-10)

    def test_bent_amalgam_keeps_the_relator(self):
        rep = lift_rep(fuchsian_genus2(), 3)
        split = genus2_amalgam_split()
        t = CentralizerChart(evaluate(rep, split.edge_word))(np.array([0.2, 0.1]))
        bent = bend(rep, split, t)
        assert mx.is_identity(evaluate(bent, GENUS2_RELATOR), tol=1e-7)
        split.presentation(bent)

    def test_bent_hnn_keeps_the_relation(self):
        rep = lift_rep(fuchsian_genus2(), 3)
        split = genus2_hnn_split()
        t = CentralizerChart(evaluate(rep, split.edge_word))(np.array([0.1, 0.1]))
        bent = bend(rep, split, t)
        assert split.kind is SplitKind.HNN
        split.presentation(bent)

    def test_non_commuting_element_rejected(self):
        rep = lift_rep(fuchsian_genus2(), 3)
        with pytest.raises(NotInCentralizer):
            bend(rep, genus2_amalgam_split(), np.diag([2.0, 1.0, 0.5]))


class TestAxisFlags:
    def test_diagonal_axis(self):
        t = FlagType.full(3)
        data = axis_flags(np.diag([4.0, 1.0, 0.25]), t)
        assert fl.flag_distance(data.attracting, fl.standard_flag(t)) < 1e-9
        assert fl.flag_distance(data.repelling, fl.reversed_flag(t)) < 1e-9
        assert_allclose(data.moduli, [4.0, 1.0, 0.25])
        assert fl.antipodality_margin(data.attracting, data.repelling) > 0


class TestLimitSets:
    def test_schottky_sample(self):
        sample = limit_set_sample(fixtures.schottky_rep(), 3, FlagType.full(2))
        assert sample.skipped == 0
        # powers of one generator share an attracting line
        assert 0 < len(sample) < 4 + 12 + 36
        audit = antipodality_audit(sample)
        assert audit["margin"] > 0
        assert audit["verdict"] == "PASS"
        frame = sample.to_frame()
        assert list(frame.columns[-2:]) == ["gap", "word"]

    def test_unipotent_words_are_skipped(self):
        sample = limit_set_sample(fixtures.unipotent_rep(), 3)
        assert len(sample) == 0
        assert sample.skipped == 2 * 3

    def test_duplicate_flags_are_exempt(self):
        sample = limit_set_sample(fixtures.cyclic_rep(), 2, FlagType.full(3))
        # f, f^-1, f^2, f^-2 collapse to the standard and reversed flags
        assert len(sample) == 2
        audit = antipodality_audit(sample)
        assert audit["margin"] == pytest.approx(1.0)


class TestBoundaryCircle:
    def test_fixed_angles(self):
        circle = BoundaryCircle(fixtures.schottky_rep())
        plus, minus = circle.fixed_angles("g1")
        assert plus == pytest.approx(0.0, abs=1e-12) or plus == pytest.approx(math.pi, abs=1e-12)
        assert minus == pytest.approx(math.pi / 2)
        assert circle.angle_of("g2") == pytest.approx(math.pi / 4)

    def test_needs_a_2x2_shadow(self):
        with pytest.raises(OrderUnavailable):
            BoundaryCircle(lift_rep(fixtures.schottky_rep(), 3))

    def test_on_arc_wraps(self):
        assert on_arc(0.1, 3.0, 0.5)
        assert not on_arc(1.0, 3.0, 0.5)

    def test_four_arcs(self):
        arcs = four_arcs((0.1, 0.5), (2.0, 1.0))
        assert arcs == {"A+": (2.0, 0.1), "A-": (0.5, 1.0), "B+": (1.0, 2.0), "B-": (0.1, 0.5)}

    def test_arc_split(self):
        rep = fixtures.schottky_rep()
        circle = BoundaryCircle(rep)
        sample = limit_set_sample(rep, 2, FlagType.full(2))
        # g1 fixes 0 and pi/2; g2's attracting line sits at pi/4
        c_a, c_b = arc_split(sample, 0.0, math.pi / 2, circle, reference=math.pi / 4)
        assert c_a and c_b
        assert set(c_a) | set(c_b) == set(range(len(sample)))
        assert all(on_arc(circle.angle_of(sample.words[i]), 0.0, math.pi / 2) for i in c_a)
        swapped = arc_split(sample, 0.0, math.pi / 2, circle, reference=3 * math.pi / 4)
        assert swapped == (c_b, c_a)

    def test_arc_split_four(self):
        rep = fixtures.schottky_rep()
        circle = BoundaryCircle(rep)
        sample = limit_set_sample(rep, 2, FlagType.full(2))
        sigma, sigma_prime = (0.0, math.pi / 2), (math.pi / 4, 3 * math.pi / 4)
        arcs = four_arcs(sigma, sigma_prime)
        parts = arc_split_four(sample, sigma, sigma_prime, circle)
        assert set(parts) == {"A+", "A-", "B+", "B-"}
        assert set().union(*parts.values()) == set(range(len(sample)))
        for key, idx in parts.items():
            assert all(on_arc(circle.angle_of(sample.words[i]), *arcs[key]) for i in idx)

    def test_arc_net(self):
        S = arc_net(0.0, math.pi / 2, 2, size=10, label="A")
        assert len(S) == 10
        assert S.r == pytest.approx(2.0 * math.sin(math.pi / 18))
        assert len(S.boundary) == 2
        assert S.meta["arc"] == pytest.approx([0.0, math.pi / 2])
        # every net point is a Veronese flag of a line on the arc
        assert fl.flag_distance(S.flag(0), fl.veronese_flag((1.0, 0.0), 2)) < 1e-12
