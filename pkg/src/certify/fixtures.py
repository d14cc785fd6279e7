"""
Ready-made groups and scenes.

Exact fixtures (SL(2,Z), BS(1,2), the Sanov free group) back the word-problem
oracles; the Schottky pair and the cyclic triple are classical ping-pong
configurations; the genus-2 scenes run the full Hitchin pipeline.
"""
import math
from typing import Optional, Tuple

import numpy as np

from src.config.logging_config import setup_logging
from src.certify.checks import union_set
from src.certify.scenes import PairScene, TripleScene
from src.config.settings import settings
from src.core.types import FactorTag
from src.geometry.flags import Flag, FlagSet, FlagType, eigen_moduli, reversed_flag, standard_flag
from src.geometry.reps import (
    BoundaryCircle,
    MatrixRep,
    arc_net,
    arc_nets,
    conjugate_rep,
    evaluate,
    four_arcs,
    fuchsian_genus2,
    genus2_amalgam_split,
    genus2_hnn_split,
    lift_rep,
    on_arc,
    symmetric_frame,
)
from src.groups import matrices as mx
from src.groups.presentations import AmalgamPresentation, FactorGroup, HnnPresentation

logger = setup_logging(__name__)

BS12_BUDGET = 128


# ----------------------------------------------------------------
# Exact groups
# ----------------------------------------------------------------

def sl2z_rep() -> MatrixRep:
    """S of order 4 and U of order 6 with S^2 = U^3 = -I."""
    return MatrixRep({
        "S": mx.as_matrix([[0, -1], [1, 0]]),
        "U": mx.as_matrix([[0, -1], [1, 1]]),
    })


def sl2z_amalgam() -> AmalgamPresentation:
    """SL(2,Z) = Z/4 *_{Z/2} Z/6, the edge group {+-I} embedded as S^2 and U^3."""
    rep = sl2z_rep()
    fa = FactorGroup(FactorTag.A, ["S"], [rep.matrix("S")])
    fb = FactorGroup(FactorTag.B, ["U"], [rep.matrix("U")])
    return AmalgamPresentation(fa, fb, [(1, 1)], [(1, 1, 1)])


def bs12_rep() -> MatrixRep:
    return MatrixRep({
        "a": mx.as_matrix([[1, 1], [0, 1]]),
        "f": mx.as_matrix([[2, 0], [0, 1]]),
    })


def bs12_hnn(budget: int = BS12_BUDGET) -> HnnPresentation:
    """BS(1,2) = <a, f | f a f^-1 = a^2> with H_- = <a> and H_+ = <a^2>."""
    rep = bs12_rep()
    fm = FactorGroup(FactorTag.M, ["a"], [rep.matrix("a")])
    return HnnPresentation(fm, rep.matrix("f"), [(1,)], [(1, 1)], "f", budget)


def f2_sanov() -> MatrixRep:
    """Free basis of a rank-2 free subgroup of SL(2,Z)."""
    return MatrixRep({
        "x": mx.as_matrix([[1, 2], [0, 1]]),
        "y": mx.as_matrix([[1, 0], [2, 1]]),
    })


def unipotent_rep() -> MatrixRep:
    return MatrixRep({"u": mx.as_matrix([[1, 1], [0, 1]])})


def cyclic_rep() -> MatrixRep:
    return MatrixRep({"f": mx.as_matrix([[4, 0, 0], [0, 1, 0], [0, 0, "1/4"]])})


# ----------------------------------------------------------------
# Flag nets on RP^1
# ----------------------------------------------------------------

def _line_flag(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def degree_net(ranges, label: str, r: float) -> FlagSet:
    """Lines of R^2 at integer-degree angles start..stop (inclusive) with the given step."""
    angles = [a for start, stop, step in ranges for a in np.arange(start, stop + step / 2.0, step)]
    net = np.array([_line_flag(math.radians(a)) for a in angles])
    return FlagSet(net, FlagType((1,), 2), r, label)


# ----------------------------------------------------------------
# Scenes
# ----------------------------------------------------------------

def schottky_rep() -> MatrixRep:
    """g1 = diag(3, 1/3) and its conjugate by the rotation through 45 degrees."""
    return MatrixRep({
        "g1": mx.as_matrix([[3, 0], [0, "1/3"]]),
        "g2": mx.as_matrix([["5/3", "4/3"], ["4/3", "5/3"]]),
    })


def schottky_scene(depth: Optional[int] = None, margin: Optional[float] = None, seed: int = 0,
                   same_sets: bool = False) -> PairScene:
    """
    Classical Schottky pair: A is a neighbourhood of the fixed lines of g1
    (angles 0 and 90 degrees), B of those of g2 (45 and 135 degrees).
    """
    rep = schottky_rep()
    fa = FactorGroup(FactorTag.A, ["g1"], [rep.matrix("g1")], projective=True)
    fb = FactorGroup(FactorTag.B, ["g2"], [rep.matrix("g2")], projective=True)
    p = AmalgamPresentation(fa, fb, [], [], projective=True)
    r = math.sin(math.radians(2.0))
    A = degree_net([(-18, 18, 2), (72, 108, 2)], "A", r)
    B = A if same_sets else degree_net([(27, 63, 2), (117, 153, 2)], "B", r)
    return PairScene(p, rep, A, B, _depth(depth), _margin(margin), seed, label="schottky")


def sl2z_scene(depth: Optional[int] = None, size: Optional[int] = None, seed: int = 0) -> PairScene:
    """SL(2,Z) acting on RP^1 with A = [0, inf] and B = [-inf, 0]."""
    rep = sl2z_rep()
    A = arc_net(0.0, math.pi / 2.0, 2, size, "A")
    B = arc_net(math.pi / 2.0, math.pi, 2, size, "B")
    return PairScene(sl2z_amalgam(), rep, A, B, _depth(depth), seed=seed, label="sl2z")


def bs12_scene(depth: Optional[int] = None, size: Optional[int] = None, seed: int = 0) -> TripleScene:
    """BS(1,2) with arcs around the fixed lines of f; used for injectivity sweeps only."""
    deg = math.radians
    B_plus = arc_net(deg(160), deg(20), 2, size, "B+")
    B_minus = arc_net(deg(60), deg(120), 2, size, "B-")
    A = union_set([arc_net(deg(25), deg(55), 2, size), arc_net(deg(125), deg(155), 2, size)], "A")
    return TripleScene(bs12_hnn(), bs12_rep(), A, B_plus, B_minus, _depth(depth), seed=seed, label="bs12")


def cyclic_triple_scene(depth: Optional[int] = None, margin: Optional[float] = None, seed: int = 0,
                        same_b: bool = False) -> TripleScene:
    """
    M trivial, f = diag(4, 1, 1/4): B+ and B- are balls about the standard and
    reversed full flags, A a small ball about a flag in general position.
    """
    rep = cyclic_rep()
    ftype = FlagType.full(3)
    fm = FactorGroup(FactorTag.M, [], [], d=3)
    p = HnnPresentation(fm, rep.matrix("f"), [], [], "f")
    general = Flag.from_matrix(np.column_stack([[1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 0.0, -1.0]]), ftype)
    A = FlagSet(general.basis[None], ftype, 0.1, "A")
    B_plus = FlagSet(standard_flag(ftype).basis[None], ftype, 0.45, "B+")
    B_minus = B_plus if same_b else FlagSet(reversed_flag(ftype).basis[None], ftype, 0.45, "B-")
    return TripleScene(p, rep, A, B_plus, B_minus, _depth(depth), _margin(margin), seed, label="cyclic")


def _framed_genus2(edge_word: str) -> Tuple[MatrixRep, BoundaryCircle]:
    rep2 = fuchsian_genus2()
    rep2 = conjugate_rep(rep2, symmetric_frame(rep2, edge_word))
    return rep2, BoundaryCircle(rep2)


def genus2_amalgam_scene(d: int = 3, depth: Optional[int] = None, margin: Optional[float] = None,
                         size: Optional[int] = None, seed: int = 0, relaxed: bool = False) -> PairScene:
    """
    Hitchin lift of the octagon group split along the separating curve [a1, b1].

    A is the arc cut out by the fixed points of the edge element on the side of
    the a1 attractor, B the complementary arc; both become Veronese flag nets.
    """
    split = genus2_amalgam_split()
    rep2, circle = _framed_genus2(split.edge_word)
    sigma_plus, sigma_minus = circle.fixed_angles(split.edge_word)
    reference = circle.angle_of("a1")
    if on_arc(reference, sigma_plus, sigma_minus):
        a_arc = (sigma_plus, sigma_minus)
    else:
        a_arc = (sigma_minus, sigma_plus)
    A = arc_net(a_arc[0], a_arc[1], d, size, "A")
    B = arc_net(a_arc[1], a_arc[0], d, size, "B")
    rep = lift_rep(rep2, d)
    logger.info("Built genus-2 amalgam scene in dimension %d (A arc %.4f..%.4f)", d, *a_arc)
    return PairScene(split.presentation(rep), rep, A, B, _depth(depth), _margin(margin), seed,
                     split=split, relaxed=relaxed, label="genus2-amalgam")


def genus2_hnn_scene(d: int = 3, depth: Optional[int] = None, margin: Optional[float] = None,
                     intervals: Optional[int] = None, seed: int = 0, relaxed: bool = False) -> TripleScene:
    """
    Hitchin lift split along the non-separating curve a1 with stable letter b1.

    B- is the arc between the fixed points of a1 avoiding those of
    phi(a1) = b1 a1 b1^-1, B+ the mirror arc, A the two arcs in between. The
    four nets share one spacing and one inflation radius.

    Powers of a1 push B+ toward the common endpoint of A- and B-, so the
    membership margin at depth L shrinks by the eigenvalue ratio of a1 per
    level; the threshold decays at that rate.
    """
    split = genus2_hnn_split()
    rep2, circle = _framed_genus2(split.edge_word)
    arcs = four_arcs(circle.fixed_angles(split.minus[0]), circle.fixed_angles(split.plus[0]))
    nets = arc_nets(arcs, d, intervals)
    A = union_set([nets["A+"], nets["A-"]], "A")
    rep = lift_rep(rep2, d)
    decay = _contraction_rate(evaluate(rep, split.edge_word))
    logger.info("Built genus-2 HNN scene in dimension %d (%d net flags, decay %.3f)",
                d, sum(len(S) for S in nets.values()), decay)
    return TripleScene(split.presentation(rep), rep, A, nets["B+"], nets["B-"], _depth(depth), _margin(margin), seed,
                       split=split, relaxed=relaxed, label="genus2-hnn", margin_decay=decay)


def _contraction_rate(g) -> float:
    """Smallest log ratio of consecutive eigenvalue moduli."""
    moduli = eigen_moduli(mx.to_float(g))
    return float(np.min(np.log(moduli[:-1] / moduli[1:])))


def _depth(depth: Optional[int]) -> int:
    return settings.CHECK_DEPTH if depth is None else depth


def _margin(margin: Optional[float]) -> float:
    return settings.MEMBERSHIP_MARGIN if margin is None else margin


SCENES = {
    "schottky": schottky_scene,
    "sl2z": sl2z_scene,
    "bs12": bs12_scene,
    "cyclic": cyclic_triple_scene,
    "genus2-amalgam": genus2_amalgam_scene,
    "genus2-hnn": genus2_hnn_scene,
}

PRESENTATIONS = {
    "sl2z": sl2z_amalgam,
    "bs12": bs12_hnn,
}

REPS = {
    "sl2z": sl2z_rep,
    "bs12": bs12_rep,
    "f2": f2_sanov,
    "unipotent": unipotent_rep,
    "cyclic": cyclic_rep,
    "schottky": schottky_rep,
    "genus2": fuchsian_genus2,
}
