import dataclasses

import numpy as np
import pytest

from src.core.errors import SceneInvalid
from src.core.types import FactorTag, Verdict
from src.certify import fixtures
from src.certify.checks import (
    antipodality_audit,
    hnn_cyclic_check,
    inside_margins,
    ping_pong_injectivity,
    union_set,
    verify_interactive_pair,
    verify_interactive_triple,
)
from src.certify.diagnostics import anosov_gap_scan, bend_scan, shrink_diagnostic
from src.certify.scenes import ConditionResult, PairScene, TripleScene, decide
from src.geometry import flags as fl
from src.geometry.flags import FlagSet, FlagType
from src.geometry.reps import LimitSetSample
from src.groups.words import SequenceSpec, alternating_sequence
from src.utils import dumps_report

PAIR_CONDITIONS = ["disjoint_interiors", "h_invariance", "alpha_B_in_A", "beta_A_in_B",
                   "antipodal_interiors", "antipodal_limit"]
TRIPLE_CONDITIONS = ["disjoint_interiors", "B_plus_B_minus_disjoint", "h_invariance", "mu_B_in_A",
                     "stable_letter_maps", "antipodal_interiors", "antipodal_limit"]


class TestDecide:
    def test_falsified_names_first_failure(self):
        conds = [ConditionResult("a", 0.5, 3), ConditionResult("b", -0.1, 2, {"reason": "x"}),
                 ConditionResult("c", -0.2, 1)]
        verdict, witness = decide(conds, 0.01)
        assert verdict is Verdict.FALSIFIED
        assert witness == {"reason": "x", "condition": "b", "margin": -0.1}

    def test_certified_and_inconclusive(self):
        assert decide([ConditionResult("a", 0.5, 3)], 0.01)[0] is Verdict.CERTIFIED_AT_DEPTH
        assert decide([ConditionResult("a", 0.005, 3)], 0.01)[0] is Verdict.INCONCLUSIVE

    def test_skipped_conditions_do_not_count(self):
        conds = [ConditionResult("a", 0.5, 3), ConditionResult("b", float("inf"), 0, skipped=True)]
        assert decide(conds, 0.01)[0] is Verdict.CERTIFIED_AT_DEPTH

    def test_exit_codes(self):
        assert Verdict.CERTIFIED.exit_code == 0
        assert Verdict.CERTIFIED_AT_DEPTH.exit_code == 0
        assert Verdict.FALSIFIED.exit_code == 2
        assert Verdict.FAIL.exit_code == 2
        assert Verdict.INCONCLUSIVE.exit_code == 3


class TestScenes:
    def test_pair_needs_amalgam(self):
        triple = fixtures.cyclic_triple_scene()
        with pytest.raises(SceneInvalid):
            PairScene(triple.presentation, triple.rep, triple.set_a, triple.set_plus)

    def test_type_must_be_invariant(self):
        scene = fixtures.cyclic_triple_scene()
        t = FlagType((1,), 3)
        bad = FlagSet(np.array([np.eye(3)]), t, 0.1, "A")
        with pytest.raises(SceneInvalid):
            dataclasses.replace(scene, set_a=bad, set_plus=bad, set_minus=bad)

    def test_sets_share_a_type(self):
        scene = fixtures.cyclic_triple_scene()
        other = FlagSet(np.array([np.eye(3)]), FlagType((1, 2), 3), 0.1, "A")
        other_type = FlagSet(np.array([np.eye(4)]), FlagType.full(4), 0.1, "B+")
        with pytest.raises(SceneInvalid):
            TripleScene(scene.presentation, scene.rep, other, other_type, scene.set_minus)

    def test_empty_net(self):
        scene = fixtures.schottky_scene()
        empty = FlagSet(np.zeros((0, 2, 2)), FlagType.full(2), 0.1, "A")
        with pytest.raises(SceneInvalid):
            dataclasses.replace(scene, set_a=empty)


class TestInteractivePair:
    @pytest.fixture(scope="class")
    def report(self):
        return verify_interactive_pair(fixtures.schottky_scene())

    def test_schottky_certified(self, report):
        assert report.verdict is Verdict.CERTIFIED
        assert [c.name for c in report.conditions] == PAIR_CONDITIONS
        assert all(m > 0 for m in report.margins.values())

    def test_trivial_edge_group_makes_invariance_vacuous(self, report):
        cond = report.condition("h_invariance")
        assert cond.skipped and cond.note == "vacuous"

    def test_full_ping_pong_recorded(self, report):
        assert report.diagnostics["full_ping_pong"]["margin"] > 0
        assert report.diagnostics["elements_checked"]["A"] > 0

    def test_report_serializes(self, report):
        data = report.to_dict()
        assert data["verdict"] == "certified"
        assert data["kind"] == "pair"
        assert len(data["assumptions"]) == 2

    def test_equal_sets_are_falsified(self):
        report = verify_interactive_pair(fixtures.schottky_scene(same_sets=True))
        assert report.verdict is Verdict.FALSIFIED
        assert report.witness["condition"] == "disjoint_interiors"
        assert report.witness["reason"] == "interiors not disjoint"
        assert report.witness["margin"] < 0

    def test_deeper_checks_never_raise_margins(self):
        shallow = verify_interactive_pair(fixtures.schottky_scene(depth=2))
        deep = verify_interactive_pair(fixtures.schottky_scene(depth=4))
        for name in ("alpha_B_in_A", "beta_A_in_B"):
            assert deep.condition(name).margin <= shallow.condition(name).margin
            assert deep.condition(name).checked > shallow.condition(name).checked

    def test_relaxed_mode_skips_limit_condition(self):
        scene = dataclasses.replace(fixtures.schottky_scene(depth=2), relaxed=True)
        report = verify_interactive_pair(scene)
        cond = report.condition("antipodal_limit")
        assert cond.skipped
        assert "relaxed" in cond.note
        assert any("relaxed" in n for n in report.notes)

    def test_sl2z_touches_the_boundary(self):
        report = verify_interactive_pair(fixtures.sl2z_scene(depth=3))
        # S maps B exactly onto A, so the interior margin vanishes
        assert report.verdict is Verdict.INCONCLUSIVE
        assert report.condition("alpha_B_in_A").margin == pytest.approx(0.0, abs=1e-6)
        assert report.condition("antipodal_limit").skipped


class TestInteractiveTriple:
    def test_cyclic_triple_certified(self):
        report = verify_interactive_triple(fixtures.cyclic_triple_scene())
        assert report.verdict is Verdict.CERTIFIED
        assert [c.name for c in report.conditions] == TRIPLE_CONDITIONS
        assert report.condition("mu_B_in_A").skipped
        assert report.condition("B_plus_B_minus_disjoint").margin == pytest.approx(0.1)

    def test_coinciding_b_sets_are_falsified(self):
        report = verify_interactive_triple(fixtures.cyclic_triple_scene(same_b=True))
        assert report.verdict is Verdict.FALSIFIED
        assert report.witness["condition"] == "B_plus_B_minus_disjoint"
        assert report.witness["reason"] == "B+ and B- meet"


class TestGenus2Hnn:
    @pytest.fixture(scope="class")
    def scene(self):
        return fixtures.genus2_hnn_scene(d=3, depth=4)

    @pytest.fixture(scope="class")
    def report(self, scene):
        return verify_interactive_triple(scene)

    def test_certified_at_depth(self, scene, report):
        assert report.verdict is Verdict.CERTIFIED_AT_DEPTH
        assert [c.name for c in report.conditions] == TRIPLE_CONDITIONS
        assert report.threshold == pytest.approx(scene.threshold)
        assert all(c.margin > report.threshold for c in report.conditions if not c.skipped)

    def test_nets_share_one_radius(self, scene):
        assert scene.set_a.r == scene.set_plus.r == scene.set_minus.r
        assert len(scene.set_minus) > len(scene.set_plus) >= 17

    def test_threshold_decays_with_depth(self, scene):
        # a1 has eigenvalue ratio about 9.55 on each stage of the Veronese lift
        assert scene.margin_decay == pytest.approx(2.257, abs=0.01)
        assert dataclasses.replace(scene, depth=1).threshold == scene.margin
        assert scene.threshold == pytest.approx(scene.margin * np.exp(-3 * scene.margin_decay))

    def test_frozen_margins(self, report):
        margins = report.margins
        assert margins["disjoint_interiors"] > 0.03
        assert margins["B_plus_B_minus_disjoint"] > 0.3
        assert margins["h_invariance"] > 0.01
        assert margins["stable_letter_maps"] > 0.01
        assert margins["antipodal_interiors"] > 0.01
        # a1^-4 B+ hugs the endpoint shared by A- and B-
        assert 1e-5 < margins["mu_B_in_A"] < 1e-3

    def test_edge_group_need_not_preserve_a(self, scene, report):
        # a1 moves part of A into B-; only B+- must be invariant
        a1 = scene.rep.matrix("a1")
        moved = inside_margins(fl.batch_act(np.asarray(a1, dtype=float), scene.set_a.net), scene.set_a)
        assert moved.min() < 0
        assert report.condition("h_invariance").margin > 0


class TestGenus2Amalgam:
    @pytest.fixture(scope="class")
    def scene(self):
        return fixtures.genus2_amalgam_scene(d=3, depth=4)

    @pytest.fixture(scope="class")
    def report(self, scene):
        return verify_interactive_pair(scene)

    def test_certified_at_depth(self, report):
        assert report.verdict is Verdict.CERTIFIED_AT_DEPTH
        assert [c.name for c in report.conditions] == PAIR_CONDITIONS
        assert all(c.margin > 1e-3 for c in report.conditions)

    def test_frozen_margins(self, report):
        margins = report.margins
        assert margins["disjoint_interiors"] > 0.2
        assert margins["h_invariance"] > 0.05
        assert margins["alpha_B_in_A"] > 0.02
        assert margins["beta_A_in_B"] > 0.02
        assert margins["antipodal_interiors"] > 0.1
        # the two factors are swapped by an isometry of the octagon
        assert margins["alpha_B_in_A"] == pytest.approx(margins["beta_A_in_B"], abs=1e-6)

    def test_injective_on_generator_words(self, scene):
        gens = [(1,), (-1,), (2,), (-2,)]
        sweep = ping_pong_injectivity(scene, depth=5, letters={FactorTag.A: gens, FactorTag.B: gens})
        assert sweep.verdict is Verdict.CERTIFIED_AT_DEPTH
        assert sweep.diagnostics["normal_forms"] == 2728
        assert sweep.diagnostics["identity_matrices"] == 0
        assert not sweep.diagnostics["truncated"]

    def test_alternating_images_shrink(self, scene):
        seq = alternating_sequence(SequenceSpec("A", alphas=[(1,)], betas=[(1,)]), 12, scene.presentation)
        result = shrink_diagnostic(seq, scene)
        assert result.verdict is Verdict.PASS
        assert len(result.diameters) == 12
        assert min(result.nesting) > 0.05
        assert all(b <= a for a, b in zip(result.diameters, result.diameters[1:]))
        assert result.diameters[-1] < 0.05 * result.diameters[0]

    def test_gap_grows_linearly(self, scene):
        scan = anosov_gap_scan(scene.rep, length=12, seed=scene.seed)
        assert scan.verdict is Verdict.PASS
        assert scan.slope > 0.05

    def test_bending_keeps_the_certificate(self, scene):
        scan = bend_scan(scene, gap_length=12)
        assert scan.verdict is Verdict.PASS
        assert scan.s_max > 0
        assert len(scan.ray) == 5
        assert all(point["verdict"] == Verdict.CERTIFIED_AT_DEPTH.value for point in scan.ray)
        assert scan.gap_slope > 0.05

    def test_reports_are_deterministic(self, scene):
        first = dumps_report({"report": verify_interactive_pair(scene).to_dict()})
        again = fixtures.genus2_amalgam_scene(d=3, depth=4)
        assert dumps_report({"report": verify_interactive_pair(again).to_dict()}) == first


class TestInjectivity:
    def test_sl2z_sweep(self):
        scene = fixtures.sl2z_scene()
        report = ping_pong_injectivity(scene, depth=4)
        assert report.verdict is Verdict.CERTIFIED_AT_DEPTH
        assert report.diagnostics["normal_forms"] > 0
        assert report.diagnostics["identity_matrices"] == 0
        assert report.condition("oracle_agreement").margin == 1.0

    def test_bs12_sweep_moves_every_element(self):
        report = ping_pong_injectivity(fixtures.bs12_scene(), depth=3)
        assert report.condition("displacement").margin > 0
        assert report.condition("oracle_agreement").margin == 1.0
        assert report.diagnostics["identity_matrices"] == 0


class TestAudit:
    def test_standard_and_reversed(self, full3):
        net = np.array([np.eye(3), np.eye(3)[:, ::-1]])
        audit = antipodality_audit(LimitSetSample(net, [(("f", 1),), (("f", -1),)], full3))
        assert audit["margin"] == pytest.approx(1.0)
        assert audit["verdict"] == "PASS"
        assert audit["worst_pair"] == ["f", "f^-1"]

    def test_duplicates_are_exempt(self, full3):
        net = np.array([np.eye(3), np.eye(3)])
        audit = antipodality_audit(LimitSetSample(net, [], full3))
        assert audit["exempt_pairs"] == 1
        assert audit["pairs"] == 0
        assert audit["margin"] == 0.0
        assert audit["verdict"] == "FAIL"


class TestHnnCyclic:
    def test_cyclic_limits_match_axis(self):
        scene = fixtures.cyclic_triple_scene()
        report = hnn_cyclic_check(scene.rep.matrix("f"), scene.set_plus, scene.set_minus)
        assert report.verdict is Verdict.PASS
        assert report.condition("limit_in_interior").margin == pytest.approx(0.45)

    def test_swapped_sets_fail(self):
        scene = fixtures.cyclic_triple_scene()
        report = hnn_cyclic_check(scene.rep.matrix("f"), scene.set_minus, scene.set_plus)
        assert report.verdict is Verdict.FAIL


class TestUnion:
    def test_union_keeps_largest_radius_and_boundaries(self):
        a = FlagSet(np.array([np.eye(2)]), FlagType.full(2), 0.1, "a", boundary=np.array([np.eye(2)]))
        b = FlagSet(np.array([np.eye(2)[:, ::-1]]), FlagType.full(2), 0.3, "b")
        u = union_set([a, b], "u")
        assert len(u) == 2 and u.r == 0.3 and len(u.boundary) == 1
