"""
Finite-margin verification of interactive pairs and triples.

Every quantified condition is checked over group elements of factor word
length <= depth and reduced to one number: the smallest margin met. Positive
margins mean the condition holds on the net model with room to spare.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from src.config.settings import settings
from src.config.logging_config import setup_logging
from src.core.errors import MembershipUndecidable, NoGap, TypeMismatch
from src.core.types import FactorTag, Verdict
from src.certify.scenes import (
    CertReport,
    ConditionResult,
    PairScene,
    TripleScene,
    decide,
    flag_witness,
)
from src.geometry import flags as fl
from src.geometry.flags import FlagSet, FlagType
from src.geometry.reps import LimitSetSample, limit_set_sample, name_word
from src.groups import matrices as mx
from src.groups.alphabet import Letters, format_name_word, reduced_words
from src.groups.presentations import FactorGroup, SubgroupOracle
from src.groups.words import enumerate_normal_forms, hnn_parts

logger = setup_logging(__name__)

QUASICONVEX_ASSUMPTION = "edge groups are quasiconvex in their vertex groups (assumed, not checked)"
NET_ASSUMPTION = "containments are checked on net points; sets are modelled as inflated nets"


# ----------------------------------------------------------------
# Margin bookkeeping
# ----------------------------------------------------------------

class _Tracker:
    """Running minimum of one condition's margin with the witness that attained it."""

    def __init__(self, name: str):
        self.name = name
        self.margin = np.inf
        self.checked = 0
        self.witness: Optional[dict] = None
        self.notes: List[str] = []

    def update(self, margins: np.ndarray, points: Optional[np.ndarray] = None, **witness) -> None:
        margins = np.atleast_1d(np.asarray(margins, dtype=float))
        if margins.size == 0:
            return
        self.checked += int(margins.size)
        i = int(np.argmin(margins))
        if margins[i] < self.margin:
            self.margin = float(margins[i])
            self.witness = dict(witness)
            if points is not None:
                self.witness["flag"] = flag_witness(points[i])

    def result(self) -> ConditionResult:
        note = "; ".join(self.notes)
        if self.checked == 0:
            return ConditionResult(self.name, float("inf"), 0, skipped=True, note=note or "vacuous")
        return ConditionResult(self.name, self.margin, self.checked, self.witness, note=note)


def inside_margins(points: np.ndarray, target: FlagSet, interior: bool = False) -> np.ndarray:
    """
    Membership margins of flags in a set; with ``interior`` the distance to the
    recorded boundary flags caps the margin.
    """
    out = target.membership_margins(points)
    if interior and target.boundary is not None and len(target.boundary):
        to_boundary = fl.pairwise_distances(points, target.ftype, target.boundary).min(axis=1)
        out = np.minimum(out, to_boundary)
    return out


def clearance(S: FlagSet) -> float:
    return max(settings.INTERIOR_CLEARANCE * S.r, settings.INTERIOR_FRACTION * S.diameter())


def union_set(sets: Sequence[FlagSet], label: str = "") -> FlagSet:
    """Union of flag sets sharing a type; the inflation radius is the largest one."""
    ftype = sets[0].ftype
    boundaries = [s.boundary for s in sets if s.boundary is not None]
    boundary = np.concatenate(boundaries, axis=0) if boundaries else None
    return FlagSet(np.concatenate([s.net for s in sets], axis=0), ftype, max(s.r for s in sets),
                   label, boundary)


# ----------------------------------------------------------------
# Group elements
# ----------------------------------------------------------------

def factor_elements(factor: FactorGroup, depth: int,
                    exclude: Optional[SubgroupOracle] = None) -> Tuple[List[Letters], List[np.ndarray], int]:
    """
    Distinct nontrivial factor elements of word length <= depth outside the excluded subgroup.

    Returns:
        (words, float matrices, number of words skipped because membership was undecided)
    """
    if factor.rank == 0:
        return [], [], 0
    if factor.enumerable:
        table = factor.table()
        candidates = [w for w in table.words if 0 < len(w) <= depth]
    else:
        candidates = list(reduced_words(factor.rank, depth, 1))
    words, mats, undecided = [], [], 0
    seen = set()
    for w in candidates:
        m = factor.evaluate(w)
        key = mx.matrix_key(m) if mx.is_exact(m) else None
        if key is not None:
            if key in seen:
                continue
            seen.add(key)
        if mx.is_identity(m, projective=factor.projective):
            continue
        if exclude is not None:
            try:
                if exclude.contains(m, w) is not None:
                    continue
            except MembershipUndecidable:
                undecided += 1
                continue
        words.append(w)
        mats.append(mx.to_float(m))
    return words, mats, undecided


def subgroup_generators(oracle: SubgroupOracle) -> List[Tuple[str, np.ndarray]]:
    """Edge-group generators and their inverses as (name, float matrix)."""
    out = []
    for i, (w, m) in enumerate(zip(oracle.words, oracle.matrices), start=1):
        if mx.is_identity(m, projective=oracle.projective):
            continue
        name = format_name_word(oracle.factor.name_word(w))
        out.append((name, mx.to_float(m)))
        out.append((f"({name})^-1", mx.to_float(mx.inverse(m))))
    return out


def _limit_flags(g: np.ndarray, ftype: FlagType) -> List[np.ndarray]:
    try:
        return [fl.attracting_flag(g, ftype).basis, fl.repelling_flag(g, ftype).basis]
    except NoGap:
        return []


def subgroup_limit_flags(oracle: SubgroupOracle, ftype: FlagType) -> np.ndarray:
    """Fixed flags of the loxodromic edge-group generators (the limit set of a cyclic edge group)."""
    pts = []
    for m in oracle.matrices:
        pts.extend(_limit_flags(mx.to_float(m), ftype))
    return np.array(pts).reshape(-1, ftype.d, ftype.d)


def factor_limit_sample(scene, factor: FactorGroup, ftype: FlagType) -> LimitSetSample:
    if factor.rank == 0:
        return LimitSetSample(np.zeros((0, ftype.d, ftype.d)), [], ftype)
    return limit_set_sample(scene.rep, scene.limit_depth, ftype, names=factor.names)


def _word_label(factor: FactorGroup, w: Letters) -> str:
    return format_name_word(factor.name_word(w))


# ----------------------------------------------------------------
# Shared condition kernels
# ----------------------------------------------------------------

def _disjoint(tracker: _Tracker, left: FlagSet, right: FlagSet) -> None:
    """Interior sample of each set kept outside the other."""
    for src, dst in ((left, right), (right, left)):
        pts = src.interior_sample()
        dist = fl.pairwise_distances(pts, src.ftype, dst.net).min(axis=1)
        tracker.update(dist - dst.r, pts, reason="interiors not disjoint", sets=[src.label, dst.label])


def _invariance(tracker: _Tracker, gens: List[Tuple[str, np.ndarray]], S: FlagSet) -> None:
    for name, h in gens:
        pts = fl.batch_act(h, S.net)
        tracker.update(inside_margins(pts, S), pts, word=name, set=S.label)


def _mapped_into(tracker: _Tracker, factor: FactorGroup, words: List[Letters], mats: List[np.ndarray],
                 source: FlagSet, target: FlagSet, interior: bool = True) -> None:
    for w, g in zip(words, mats):
        pts = fl.batch_act(g, source.net)
        tracker.update(inside_margins(pts, target, interior), pts,
                       word=_word_label(factor, w), source=source.label, target=target.label)


def _antipodal(tracker: _Tracker, left: np.ndarray, right: np.ndarray, ftype: FlagType, **witness) -> None:
    if len(left) == 0 or len(right) == 0:
        return
    margins = fl.batch_antipodality(left, ftype, right)
    i, j = np.unravel_index(int(np.argmin(margins)), margins.shape)
    tracker.checked += int(margins.size)
    if margins[i, j] < tracker.margin:
        tracker.margin = float(margins[i, j])
        tracker.witness = dict(witness, flag=flag_witness(left[i]), partner=flag_witness(right[j]))


def _away_from(points: np.ndarray, ftype: FlagType, avoid: np.ndarray, radius: float) -> np.ndarray:
    if len(points) == 0 or len(avoid) == 0:
        return points
    keep = fl.pairwise_distances(points, ftype, avoid).min(axis=1) > radius
    return points[keep]


def _finish(kind: str, scene, trackers: List[_Tracker], diagnostics: Dict[str, object],
            notes: List[str]) -> CertReport:
    conditions = [t.result() for t in trackers]
    verdict, witness = decide(conditions, scene.threshold, scene.falsify_tol)
    for c in conditions:
        logger.debug("Condition %s: margin %.6g over %d checks", c.name, c.margin, c.checked)
    report = CertReport(kind, verdict, scene.depth, scene.threshold, conditions, witness, diagnostics,
                        [QUASICONVEX_ASSUMPTION, NET_ASSUMPTION], notes)
    return report


# ----------------------------------------------------------------
# Interactive pairs
# ----------------------------------------------------------------

def verify_interactive_pair(scene: PairScene) -> CertReport:
    """
    Check the interactive-pair conditions and the antipodality hypotheses of
    the amalgam combination theorem up to factor word length scene.depth.

    Conditions: disjoint interiors, H-invariance of A and B, alpha B in A° for
    alpha in Gamma_A - H, beta A in B° for beta in Gamma_B - H, antipodal
    interiors, and A antipodal to the limit set of Gamma_B away from the limit
    set of H (and symmetrically).
    """
    p = scene.presentation
    A, B = scene.set_a, scene.set_b
    ftype = A.ftype
    fa, fb = p.factors[FactorTag.A], p.factors[FactorTag.B]
    oa, ob = p.oracles[FactorTag.A], p.oracles[FactorTag.B]
    notes: List[str] = []

    disjoint = _Tracker("disjoint_interiors")
    _disjoint(disjoint, A, B)

    invariance = _Tracker("h_invariance")
    gens = subgroup_generators(oa)
    _invariance(invariance, gens, A)
    _invariance(invariance, gens, B)

    alpha = _Tracker("alpha_B_in_A")
    words_a, mats_a, undecided_a = factor_elements(fa, scene.depth, oa)
    _mapped_into(alpha, fa, words_a, mats_a, B, A)
    beta = _Tracker("beta_A_in_B")
    words_b, mats_b, undecided_b = factor_elements(fb, scene.depth, ob)
    _mapped_into(beta, fb, words_b, mats_b, A, B)
    if undecided_a or undecided_b:
        msg = f"{undecided_a + undecided_b} factor words skipped: edge-group membership undecided"
        logger.warning(msg)
        notes.append(msg)

    interiors = _Tracker("antipodal_interiors")
    _antipodal(interiors, A.interior_sample(), B.interior_sample(), ftype, sets=["A", "B"])

    limit = _Tracker("antipodal_limit")
    limit_a = factor_limit_sample(scene, fa, ftype)
    limit_b = factor_limit_sample(scene, fb, ftype)
    if scene.relaxed:
        limit.notes.append("skipped: relaxed mode, boundary condition asserted by the caller")
        notes.append("relaxed mode: limit-set antipodality not checked")
    else:
        lam_h = subgroup_limit_flags(oa, ftype)
        _antipodal(limit, A.net, _away_from(limit_b.net, ftype, lam_h, clearance(B)), ftype,
                   sets=["A", "limit(Gamma_B)"])
        _antipodal(limit, B.net, _away_from(limit_a.net, ftype, lam_h, clearance(A)), ftype,
                   sets=["B", "limit(Gamma_A)"])

    trackers = [disjoint, invariance, alpha, beta, interiors, limit]
    diagnostics = {
        "limit_containment": limit_containment({"A": (limit_a, A), "B": (limit_b, B)}),
        "elements_checked": {"A": len(words_a), "B": len(words_b)},
    }
    report = _finish("pair", scene, trackers, diagnostics, notes)
    if report.verdict is Verdict.CERTIFIED_AT_DEPTH:
        upgrade = pair_full_ping_pong(scene)
        if upgrade is not None:
            report.diagnostics["full_ping_pong"] = upgrade.to_dict()
            if upgrade.margin > scene.threshold:
                report.verdict = Verdict.CERTIFIED
                report.notes.append("trivial edge group with cyclic factors: generator-level ping-pong holds")
    logger.info("Pair scene %s: %s at depth %d", scene.label or "-", report.verdict.value, scene.depth)
    return report


def _split_by_axis(S: FlagSet, g: np.ndarray) -> Optional[Tuple[FlagSet, FlagSet]]:
    flags = _limit_flags(g, S.ftype)
    if not flags:
        return None
    attracting, repelling = flags
    to_att = fl.pairwise_distances(S.net, S.ftype, attracting[None]).ravel()
    to_rep = fl.pairwise_distances(S.net, S.ftype, repelling[None]).ravel()
    plus, minus = S.net[to_att <= to_rep], S.net[to_att > to_rep]
    if len(plus) == 0 or len(minus) == 0:
        return None
    return (FlagSet(plus, S.ftype, S.r, f"{S.label}+"), FlagSet(minus, S.ftype, S.r, f"{S.label}-"))


def pair_full_ping_pong(scene: PairScene) -> Optional[ConditionResult]:
    """
    Generator-level ping-pong for a trivial edge group and infinite cyclic factors.

    With S = S+ u S- split along the axis of the factor generator g,
    g(T u S+) in S+ and g^-1(T u S-) in S- (T the other set) make every
    nontrivial power map T into S, which is the whole quantifier.
    """
    p = scene.presentation
    if not p.oracles[FactorTag.A].is_trivial:
        return None
    tracker = _Tracker("full_ping_pong")
    for tag, own, other in ((FactorTag.A, scene.set_a, scene.set_b), (FactorTag.B, scene.set_b, scene.set_a)):
        factor = p.factors[tag]
        if factor.rank != 1:
            return None
        g = mx.to_float(factor.generators[0])
        halves = _split_by_axis(own, g)
        if halves is None:
            return None
        plus, minus = halves
        for h, half, name in ((g, plus, factor.names[0]), (np.linalg.inv(g), minus, f"{factor.names[0]}^-1")):
            pts = fl.batch_act(h, np.concatenate([other.net, half.net], axis=0))
            tracker.update(inside_margins(pts, half), pts, word=name, target=half.label)
    return tracker.result()


# ----------------------------------------------------------------
# Interactive triples
# ----------------------------------------------------------------

def verify_interactive_triple(scene: TripleScene) -> CertReport:
    """
    Check the interactive-triple conditions and antipodality hypotheses of the
    HNN combination theorem up to word length scene.depth in M.
    """
    p = scene.presentation
    A, Bp, Bm = scene.set_a, scene.set_plus, scene.set_minus
    ftype = A.ftype
    factor = p.factor
    f = mx.to_float(p.stable)
    f_inv = mx.to_float(p.stable_inverse)
    notes: List[str] = []

    disjoint = _Tracker("disjoint_interiors")
    _disjoint(disjoint, A, Bp)
    _disjoint(disjoint, A, Bm)
    separated = _Tracker("B_plus_B_minus_disjoint")
    dist = fl.pairwise_distances(Bp.net, ftype, Bm.net)
    i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
    separated.update(dist.ravel() - (Bp.r + Bm.r), reason="B+ and B- meet",
                     flag=flag_witness(Bp.net[i]), partner=flag_witness(Bm.net[j]))

    invariance = _Tracker("h_invariance")
    for oracle, S in ((p.plus, Bp), (p.minus, Bm)):
        _invariance(invariance, subgroup_generators(oracle), S)

    mu = _Tracker("mu_B_in_A")
    counts = {}
    undecided = 0
    for sign, oracle, S in ((1, p.plus, Bp), (-1, p.minus, Bm)):
        words, mats, skipped = factor_elements(factor, scene.depth, oracle)
        undecided += skipped
        counts["H+" if sign > 0 else "H-"] = len(words)
        _mapped_into(mu, factor, words, mats, S, A)
    if undecided:
        msg = f"{undecided} M-words skipped: edge-group membership undecided"
        logger.warning(msg)
        notes.append(msg)

    stable = _Tracker("stable_letter_maps")
    name = p.stable_name
    for g, label, source, target, interior in (
        (f, name, A, Bp, False),
        (f_inv, f"{name}^-1", A, Bm, False),
        (f, name, Bp, Bp, True),
        (f_inv, f"{name}^-1", Bm, Bm, True),
    ):
        pts = fl.batch_act(g, source.net)
        stable.update(inside_margins(pts, target, interior), pts, word=label, source=source.label,
                      target=target.label)

    interiors = _Tracker("antipodal_interiors")
    a_int = A.interior_sample()
    _antipodal(interiors, a_int, Bp.interior_sample(), ftype, sets=["A", "B+"])
    _antipodal(interiors, a_int, Bm.interior_sample(), ftype, sets=["A", "B-"])
    _antipodal(interiors, Bp.net, Bm.net, ftype, sets=["B+", "B-"])

    limit = _Tracker("antipodal_limit")
    limit_m = factor_limit_sample(scene, factor, ftype)
    if scene.relaxed:
        limit.notes.append("skipped: relaxed mode, boundary condition asserted by the caller")
        notes.append("relaxed mode: limit-set antipodality not checked")
    else:
        for oracle, S, label in ((p.plus, Bp, "B+"), (p.minus, Bm, "B-")):
            lam_h = subgroup_limit_flags(oracle, ftype)
            _antipodal(limit, S.net, _away_from(limit_m.net, ftype, lam_h, clearance(S)), ftype,
                       sets=[label, "limit(M)"])

    trackers = [disjoint, separated, invariance, mu, stable, interiors, limit]
    diagnostics = {
        "limit_containment": limit_containment({"A": (limit_m, A)}),
        "elements_checked": counts,
    }
    report = _finish("triple", scene, trackers, diagnostics, notes)
    if report.verdict is Verdict.CERTIFIED_AT_DEPTH and factor.rank == 0:
        report.verdict = Verdict.CERTIFIED
        report.notes.append("trivial vertex group: the stable-letter conditions cover every element")
    logger.info("Triple scene %s: %s at depth %d", scene.label or "-", report.verdict.value, scene.depth)
    return report


# ----------------------------------------------------------------
# Injectivity
# ----------------------------------------------------------------

def syllable_matrices(nf) -> List[np.ndarray]:
    """Float matrices of the syllables of a word, left to right."""
    return [mx.to_float(s.matrix) for s in nf.syllables]


def _source_set(scene, nf) -> FlagSet:
    if isinstance(scene, PairScene):
        last = nf.syllables[-1].factor
        return scene.set_b if last is FactorTag.A else scene.set_a
    _, eps = hnn_parts(nf)
    return scene.set_for(eps[-1])


def ping_pong_injectivity(scene, depth: Optional[int] = None, report: Optional[CertReport] = None,
                          letters: Optional[Dict[FactorTag, Sequence[Letters]]] = None,
                          max_words: Optional[int] = None) -> CertReport:
    """
    Every nontrivial normal form of relative length <= depth moves some flag.

    For each form gamma the designated source set (the set opposite the last
    syllable, or B_{e_n} for HNN words) is mapped by gamma one syllable at a
    time; its image must lie in the union of the scene's sets, and some net
    point must be displaced. The matrix of gamma is compared with the identity
    independently. ``letters`` restricts the syllables to the given generator
    words; otherwise the transversal normal forms are swept.
    """
    depth = settings.INJECTIVITY_DEPTH if depth is None else depth
    max_words = settings.INJECTIVITY_MAX_WORDS if max_words is None else max_words
    p = scene.presentation
    if report is not None and report.verdict not in (Verdict.CERTIFIED, Verdict.CERTIFIED_AT_DEPTH):
        logger.warning("Injectivity sweep on a scene that was not certified (%s)", report.verdict.value)
    union = union_set(list(scene.sets.values()), "union")
    image = _Tracker("image_in_union")
    moved = _Tracker("displacement")
    agree = _Tracker("oracle_agreement")
    count = 0
    identities = 0
    truncated = False
    for nf in enumerate_normal_forms(p, depth, letters):
        if count >= max_words:
            logger.warning("Injectivity sweep truncated at %d normal forms", count)
            truncated = True
            break
        count += 1
        m = nf.matrix()
        source = _source_set(scene, nf)
        pts = fl.act_chain(syllable_matrices(nf), source.net)
        label = format_name_word(name_word(nf))
        image.update(inside_margins(pts, union), pts, word=label)
        shift = float(np.max(np.diag(fl.pairwise_distances(pts, source.ftype, source.net))))
        moved.update(np.array([shift]), word=label)
        is_id = mx.is_identity(m, projective=p.projective)
        identities += int(is_id)
        nontrivial = shift > settings.DISPLACEMENT_TOL
        agree.update(np.array([1.0 if nontrivial != is_id else -1.0]), word=label,
                     displacement=shift, matrix_identity=bool(is_id))
    conditions = [image.result(), moved.result(), agree.result()]
    verdict, witness = decide(conditions, 0.0, scene.falsify_tol)
    logger.info("Injectivity sweep over %d normal forms: %s", count, verdict.value)
    notes = [f"truncated at {count} normal forms"] if truncated else []
    return CertReport("injectivity", verdict, depth, 0.0, conditions, witness,
                      {"normal_forms": count, "identity_matrices": identities, "truncated": truncated},
                      [NET_ASSUMPTION], notes)


# ----------------------------------------------------------------
# Limit sets
# ----------------------------------------------------------------

def limit_containment(pairs: Dict[str, Tuple[LimitSetSample, FlagSet]]) -> dict:
    """Smallest membership margin of each sampled limit set in its set (nonnegative when contained)."""
    out = {}
    for name, (sample, S) in pairs.items():
        if len(sample) == 0:
            out[name] = {"margin": None, "points": 0}
            continue
        margins = S.membership_margins(sample.net)
        i = int(np.argmin(margins))
        out[name] = {"margin": float(margins[i]), "points": len(sample),
                     "worst_word": format_name_word(sample.words[i])}
    return out


def antipodality_audit(sample: LimitSetSample, tol: Optional[float] = None) -> dict:
    """
    Minimum antipodality margin over distinct pairs of a limit sample.

    Pairs closer than the dedup tolerance count as one point and are exempt.
    Samples up to AUDIT_EXHAUSTIVE_MAX flags are audited exhaustively, larger
    ones against their AUDIT_NEIGHBOURS nearest neighbours (the least
    transverse partners).
    """
    tol = settings.DEDUP_TOL if tol is None else tol
    ftype = sample.ftype
    if not ftype.is_invariant:
        raise TypeMismatch(f"flag type {ftype.dims} is not invariant under the opposition involution")
    net = sample.net
    n = len(net)
    best, exempt, checked = np.inf, 0, 0
    worst: Optional[Tuple[int, int]] = None
    if n <= settings.AUDIT_EXHAUSTIVE_MAX:
        mode = "exhaustive"
        for start in range(0, n, 256):
            block = net[start:start + 256]
            margins = fl.batch_antipodality(block, ftype, net)
            dist = fl.pairwise_distances(block, ftype, net)
            rows = np.arange(len(block))[:, None] + start
            mask = np.arange(n)[None, :] > rows
            dup = mask & (dist < tol)
            exempt += int(dup.sum())
            valid = mask & ~dup
            checked += int(valid.sum())
            if valid.any():
                masked = np.where(valid, margins, np.inf)
                i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
                if masked[i, j] < best:
                    best, worst = float(masked[i, j]), (start + int(i), int(j))
    else:
        mode = "neighbours"
        tree = cKDTree(fl.projector_features(net, ftype))
        k = min(settings.AUDIT_NEIGHBOURS + 1, n)
        _, idx = tree.query(fl.projector_features(net, ftype), k=k)
        for i in range(n):
            others = [int(j) for j in np.atleast_1d(idx[i]) if j != i]
            dist = fl.pairwise_distances(net[i:i + 1], ftype, net[others]).ravel()
            margins = fl.batch_antipodality(net[i:i + 1], ftype, net[others]).ravel()
            exempt += int(np.sum(dist < tol))
            valid = dist >= tol
            checked += int(valid.sum())
            if valid.any():
                j = int(np.argmin(np.where(valid, margins, np.inf)))
                if margins[j] < best:
                    best, worst = float(margins[j]), (i, others[j])
        logger.warning("Antipodality audit of %d flags used nearest-neighbour pairs only", n)
    margin = best if np.isfinite(best) else 0.0
    out = {
        "margin": margin,
        "pairs": checked,
        "exempt_pairs": exempt,
        "mode": mode,
        "verdict": (Verdict.PASS if margin > 0 else Verdict.FAIL).value,
    }
    if worst is not None and sample.words:
        out["worst_pair"] = [format_name_word(sample.words[worst[0]]), format_name_word(sample.words[worst[1]])]
    return out


# ----------------------------------------------------------------
# Cyclic HNN dynamics
# ----------------------------------------------------------------

def _limit_of_images(g: np.ndarray, S: FlagSet, iterations: int) -> np.ndarray:
    net = S.net
    for _ in range(iterations):
        net = fl.batch_act(g, net)
    return net[fl.flag_medoid(net, S.ftype)]


def hnn_cyclic_check(f: np.ndarray, set_plus: FlagSet, set_minus: FlagSet,
                     margin: Optional[float] = None, iterations: Optional[int] = None) -> CertReport:
    """
    Limit flags of the cyclic group generated by the stable letter.

    The iterates f^n B+ and f^-n B- are pushed until they collapse; the
    resulting flags must agree with the attracting and repelling flags of f
    and sit inside B+ and B- respectively.
    """
    margin = settings.MEMBERSHIP_MARGIN if margin is None else margin
    iterations = settings.HNN_ITERATIONS if iterations is None else iterations
    f = mx.to_float(f)
    ftype = set_plus.ftype
    sigma_plus = fl.attracting_flag(f, ftype).basis
    sigma_minus = fl.repelling_flag(f, ftype).basis
    tau_plus = _limit_of_images(f, set_plus, iterations)
    tau_minus = _limit_of_images(np.linalg.inv(f), set_minus, iterations)
    axis = _Tracker("axis_match")
    inside = _Tracker("limit_in_interior")
    for tau, sigma, S, label in ((tau_plus, sigma_plus, set_plus, "B+"), (tau_minus, sigma_minus, set_minus, "B-")):
        gap = fl.pairwise_distances(tau[None], ftype, sigma[None])[0, 0]
        axis.update(np.array([settings.AXIS_MATCH_TOL - gap]), tau[None], set=label, distance=float(gap))
        inside.update(inside_margins(sigma[None], S, interior=True), sigma[None], set=label)
    conditions = [axis.result(), inside.result()]
    verdict, witness = decide(conditions, 0.0)
    if verdict is Verdict.CERTIFIED_AT_DEPTH:
        verdict = Verdict.PASS if conditions[1].margin > margin else Verdict.INCONCLUSIVE
    elif verdict is Verdict.FALSIFIED:
        verdict = Verdict.FAIL
    return CertReport("hnn-cyclic", verdict, iterations, margin, conditions, witness,
                      {"sigma_plus": flag_witness(sigma_plus), "sigma_minus": flag_witness(sigma_minus)},
                      [], [])
