"""
Numerical diagnostics of the dynamics predicted by the combination theorems:
shrinking nested image sets, linear growth of singular-value gaps, and the
persistence of a certificate under bending.
"""
import dataclasses
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.config.settings import settings
from src.config.logging_config import setup_logging
from src.core.errors import NotNested, SceneInvalid
from src.core.types import FactorTag, Verdict
from src.certify.checks import (
    inside_margins,
    syllable_matrices,
    union_set,
    verify_interactive_pair,
    verify_interactive_triple,
)
from src.certify.scenes import PairScene, TripleScene, flag_witness
from src.geometry import flags as fl
from src.geometry.flags import FlagSet, FlagType
from src.geometry.reps import CentralizerChart, MatrixRep, bend, evaluate, letters_to_names
from src.groups import matrices as mx
from src.groups.alphabet import alphabet, format_name_word, reduced_words
from src.groups.words import NormalForm, hnn_parts, normal_form

logger = setup_logging(__name__)


# ----------------------------------------------------------------
# Shrinking sequences
# ----------------------------------------------------------------

@dataclass
class ShrinkResult:
    diameters: List[float]
    nesting: List[float]
    limit_flag: Optional[np.ndarray]
    verdict: Verdict
    ratio: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "diameters": list(self.diameters),
            "nesting_margins": list(self.nesting),
            "limit_flag": flag_witness(self.limit_flag) if self.limit_flag is not None else None,
            "contraction_ratio": self.ratio,
            "verdict": self.verdict.value,
        }

    def to_frame(self) -> pd.DataFrame:
        n = len(self.diameters)
        return pd.DataFrame({
            "n": np.arange(1, n + 1),
            "diameter": self.diameters,
            "nesting_margin": [np.nan] + list(self.nesting),
        })


def _shrink_source(scene: Union[PairScene, TripleScene], nf: NormalForm) -> FlagSet:
    """Set whose image under the n-th prefix is the n-th nested set."""
    if isinstance(scene, PairScene):
        return scene.set_b if nf.syllables[-1].factor is FactorTag.A else scene.set_a
    _, eps = hnn_parts(nf)
    return union_set([scene.set_a, scene.set_for(eps[-1])], f"A u B{'+' if eps[-1] > 0 else '-'}")


def _net_diameter(net: np.ndarray, ftype: FlagType) -> float:
    if len(net) < 2:
        return 0.0
    return float(fl.pairwise_distances(net, ftype).max())


def _appended(prev: NormalForm, nf: NormalForm) -> List[np.ndarray]:
    """Syllable matrices of prev^-1 nf: the new tail when prev is a syllable prefix of nf."""
    k = len(prev.syllables)
    if nf.key()[:k] == prev.key():
        return syllable_matrices(NormalForm(nf.syllables[k:], nf.rl - prev.rl, nf.presentation))
    return syllable_matrices(normal_form(prev.inverse().as_word() + nf.as_word()))


def shrink_diagnostic(seq: Sequence[NormalForm], scene: Union[PairScene, TripleScene],
                      tol: Optional[float] = None, ratio: Optional[float] = None) -> ShrinkResult:
    """
    Diameters of the nested images omega_n X_n along an alternating sequence.

    X_n is the set opposite the last syllable (amalgam) or A u B_{e_n} (HNN).
    Nesting omega_{n+1} X_{n+1} in omega_n X_n is checked in the coordinates
    of X_n: the letters appended at step n+1 must map X_{n+1} into X_n.
    Images are built one syllable at a time. Diameters are those of the image
    nets; the inflation radius is not carried along since the action does not
    preserve it.

    Raises:
        NotNested: if some nesting margin is below -tol.
    """
    if tol is None:
        tol = settings.FALSIFY_TOL if scene.falsify_tol is None else scene.falsify_tol
    ratio = settings.SHRINK_RATIO if ratio is None else ratio
    if not seq:
        raise ValueError("shrink diagnostic needs a nonempty sequence")
    ftype = scene.set_a.ftype
    diameters, nesting = [], []
    prev, prev_source = None, None
    image = None
    for n, nf in enumerate(seq):
        source = _shrink_source(scene, nf)
        image = fl.act_chain(syllable_matrices(nf), source.net)
        diameters.append(_net_diameter(image, ftype))
        if prev is not None:
            pts = fl.act_chain(_appended(prev, nf), source.net)
            margin = float(np.min(inside_margins(pts, prev_source)))
            nesting.append(margin)
            if margin < -tol:
                raise NotNested(f"image set {n + 1} leaves image set {n} (margin {margin:.3e})", n + 1, margin)
        prev, prev_source = nf, source
    limit = image[fl.flag_medoid(image, ftype)]
    fitted = _contraction_ratio(diameters)
    verdict = Verdict.PASS
    if len(diameters) > 1:
        monotone = all(b <= a + tol for a, b in zip(diameters, diameters[1:]))
        if not monotone or not diameters[-1] < ratio * diameters[0]:
            verdict = Verdict.FAIL
    logger.info("Shrink diagnostic over %d steps: %s (final diameter %.3e)", len(seq), verdict.value, diameters[-1])
    return ShrinkResult(diameters, nesting, limit, verdict, fitted)


def _contraction_ratio(diameters: Sequence[float]) -> Optional[float]:
    """exp of the least-squares slope of log diameter over the second half of the series."""
    values = np.asarray(diameters, dtype=float)
    n = np.arange(1, len(values) + 1)
    keep = (n >= math.ceil(len(values) / 2)) & (values > 0)
    if keep.sum() < 2:
        return None
    slope = np.polyfit(n[keep], np.log(values[keep]), 1)[0]
    return float(np.exp(slope))


# ----------------------------------------------------------------
# Singular-value gap growth
# ----------------------------------------------------------------

@dataclass
class GapScan:
    lengths: List[int]
    min_gaps: List[float]
    counts: List[int]
    slope: float
    window_slope: float
    floor: float
    verdict: Verdict
    worst_words: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lengths": list(self.lengths),
            "min_gaps": list(self.min_gaps),
            "words_per_length": list(self.counts),
            "slope": self.slope,
            "window_slope": self.window_slope,
            "floor": self.floor,
            "worst_words": list(self.worst_words),
            "verdict": self.verdict.value,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"length": self.lengths, "min_gap": self.min_gaps,
                             "words": self.counts, "worst_word": self.worst_words})


def _random_reduced_word(rng: np.random.Generator, rank: int, n: int) -> tuple:
    letters = alphabet(rank)
    word = [int(letters[rng.integers(len(letters))])]
    while len(word) < n:
        x = int(letters[rng.integers(len(letters))])
        if x != -word[-1]:
            word.append(x)
    return tuple(word)


def _words_of_length(rank: int, n: int, samples: int, rng: np.random.Generator) -> List[tuple]:
    total = 2 * rank * (2 * rank - 1) ** (n - 1)
    if total <= samples:
        return list(reduced_words(rank, n, n))
    seen, out = set(), []
    while len(out) < samples:
        w = _random_reduced_word(rng, rank, n)
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def _min_gap(mats: np.ndarray, ftype: FlagType) -> np.ndarray:
    sv = np.linalg.svd(mats, compute_uv=False)
    sv = np.maximum(sv, np.finfo(float).tiny)
    dims = list(ftype.dims)
    return np.min(np.log(sv[:, [k - 1 for k in dims]] / sv[:, dims]), axis=1)


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    if len(x) < 2:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def anosov_gap_scan(rep: MatrixRep, length: Optional[int] = None, t: Optional[FlagType] = None,
                    names: Optional[Sequence[str]] = None, samples: Optional[int] = None, seed: int = 0,
                    floor: Optional[float] = None) -> GapScan:
    """
    Least-squares growth rate of the smallest singular-value gap along word length.

    Each length n <= L contributes the minimum over its (sampled) reduced
    words of min_k log(sigma_k / sigma_{k+1}). The verdict uses the
    least-squares slope over all n; the slope over n >= ceil(L/2) is reported
    as a diagnostic only. PASS needs the full-range slope above the floor and
    every sampled word of length >= 3 with a positive gap.
    """
    length = settings.GAP_SCAN_LENGTH if length is None else length
    samples = settings.GAP_SAMPLES if samples is None else samples
    floor = settings.SLOPE_FLOOR if floor is None else floor
    sub = rep.restrict(names) if names else rep
    t = t or FlagType.full(sub.d)
    letters = {x: mx.to_float(m) for x, m in sub.letter_matrices().items()}
    rng = np.random.default_rng(seed)
    lengths, gaps, counts, worst = [], [], [], []
    for n in range(1, length + 1):
        words = _words_of_length(len(sub.names), n, samples, rng)
        mats = np.empty((len(words), sub.d, sub.d))
        for i, w in enumerate(words):
            m = np.eye(sub.d)
            for x in w:
                m = m @ letters[x]
                m = m / np.linalg.norm(m)
            mats[i] = m
        values = _min_gap(mats, t)
        i = int(np.argmin(values))
        lengths.append(n)
        gaps.append(float(values[i]))
        counts.append(len(words))
        worst.append(format_name_word(letters_to_names(sub, words[i])))
    x, y = np.array(lengths, dtype=float), np.array(gaps)
    window = x >= math.ceil(length / 2)
    slope, windowed = _slope(x, y), _slope(x[window], y[window])
    tail_ok = all(g > 0 for n, g in zip(lengths, gaps) if n >= 3)
    verdict = Verdict.PASS if slope > floor and tail_ok else Verdict.FAIL
    logger.info("Gap scan to length %d: slope %.4f (window %.4f) -> %s", length, slope, windowed, verdict.value)
    return GapScan(lengths, gaps, counts, slope, windowed, floor, verdict, worst)


# ----------------------------------------------------------------
# Bending
# ----------------------------------------------------------------

@dataclass
class BendScan:
    s_max: float
    direction: List[float]
    ray: List[dict]
    gap_slope: Optional[float]
    verdict: Verdict

    def to_dict(self) -> dict:
        return {
            "s_max": self.s_max,
            "direction": list(self.direction),
            "ray": list(self.ray),
            "gap_slope": self.gap_slope,
            "verdict": self.verdict.value,
        }


def bent_scene(scene: Union[PairScene, TripleScene], t: np.ndarray):
    """Same sets and parameters over the representation bent by t along the scene's split."""
    if scene.split is None:
        raise SceneInvalid("bending needs a scene built from a generator split")
    rep = bend(scene.rep, scene.split, t)
    return dataclasses.replace(scene, rep=rep, presentation=scene.split.presentation(rep))


def _certifies(scene) -> tuple:
    verify = verify_interactive_pair if isinstance(scene, PairScene) else verify_interactive_triple
    report = verify(scene)
    margins = [c.margin for c in report.conditions if not c.skipped]
    ok = report.verdict in (Verdict.CERTIFIED, Verdict.CERTIFIED_AT_DEPTH)
    return ok, report, (min(margins) if margins else None)


def bend_scan(scene: Union[PairScene, TripleScene], direction: Optional[Sequence[float]] = None,
              s_hi: float = 1.0, iterations: Optional[int] = None, ray_points: Optional[int] = None,
              gap_length: Optional[int] = None) -> BendScan:
    """
    Largest bending parameter along a ray that keeps the certificate.

    Bisection on s in [0, s_hi] over t(s) = exp of s * direction in the
    centralizer of the edge element, then a check of ray_points equally
    spaced parameters up to s_max and a gap scan of the representation bent
    by s_max.
    """
    iterations = settings.BEND_ITERATIONS if iterations is None else iterations
    ray_points = settings.BEND_RAY_POINTS if ray_points is None else ray_points
    if scene.split is None:
        raise SceneInvalid("bending needs a scene built from a generator split")
    chart = CentralizerChart(evaluate(scene.rep, scene.split.edge_word))
    if direction is None:
        direction = np.ones(chart.dimension)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)

    def at(s: float):
        return bent_scene(scene, chart(s * direction))

    base_ok, _, _ = _certifies(scene)
    if not base_ok:
        logger.warning("Unbent scene is not certified; bending range is empty")
        return BendScan(0.0, direction.tolist(), [], None, Verdict.FAIL)
    if _certifies(at(s_hi))[0]:
        s_max = s_hi
    else:
        lo, hi = 0.0, s_hi
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if _certifies(at(mid))[0]:
                lo = mid
            else:
                hi = mid
        s_max = lo
    ray = []
    for k in range(1, ray_points + 1):
        s = s_max * k / ray_points
        ok, report, worst = _certifies(at(s))
        ray.append({"s": s, "verdict": report.verdict.value, "min_margin": worst})
    slope = None
    all_ok = s_max > 0 and all(r["verdict"] in (Verdict.CERTIFIED.value, Verdict.CERTIFIED_AT_DEPTH.value) for r in ray)
    if s_max > 0:
        scan = anosov_gap_scan(at(s_max).rep, gap_length, scene.set_a.ftype, seed=scene.seed)
        slope = scan.slope
        all_ok = all_ok and scan.verdict is Verdict.PASS
    verdict = Verdict.PASS if all_ok else Verdict.FAIL
    logger.info("Bend scan: s_max = %.4g, %s", s_max, verdict.value)
    return BendScan(s_max, direction.tolist(), ray, slope, verdict)
