"""
Matrix representations: word evaluation, the principal symmetric-power lift,
the genus-2 Fuchsian octagon group, loxodromic axis data, centralizer charts,
bending and limit-set sampling.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from src.config.settings import settings
from src.config.logging_config import setup_logging
from src.core.errors import NoGap, NotInCentralizer, OrderUnavailable, PresentationInvalid, UnboundGenerator
from src.core.types import FactorTag, SplitKind
from src.geometry import flags as fl
from src.geometry.flags import Flag, FlagSet, FlagType
from src.groups import matrices as mx
from src.groups.matrices import sym_power_lift
from src.groups.alphabet import Letters, alphabet, parse_name_word, reduced_words
from src.groups.presentations import AmalgamPresentation, FactorGroup, HnnPresentation
from src.groups.words import NormalForm, Word

logger = setup_logging(__name__)

NameWord = Tuple[Tuple[str, int], ...]


@dataclass
class MatrixRep:
    """Named generator matrices; exact when every entry is rational."""
    generators: Dict[str, np.ndarray]

    def __post_init__(self):
        if not self.generators:
            raise PresentationInvalid("a representation needs at least one generator")
        shapes = {g.shape for g in self.generators.values()}
        if len(shapes) != 1:
            raise PresentationInvalid(f"generator shapes differ: {sorted(shapes)}")
        if not self.exact:
            self.generators = {k: mx.to_float(v) for k, v in self.generators.items()}

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self.generators)

    @property
    def d(self) -> int:
        return next(iter(self.generators.values())).shape[0]

    @property
    def exact(self) -> bool:
        return all(mx.is_exact(g) for g in self.generators.values())

    def matrix(self, name: str, exponent: int = 1) -> np.ndarray:
        if name not in self.generators:
            raise UnboundGenerator(f"generator {name!r} is not bound (have {list(self.generators)})")
        g = self.generators[name]
        base = g if exponent >= 0 else mx.inverse(g)
        out = mx.identity(self.d, self.exact)
        for _ in range(abs(exponent)):
            out = out @ base
        return out

    def restrict(self, names: Sequence[str]) -> "MatrixRep":
        return MatrixRep({n: self.matrix(n) for n in names})

    def letter_matrices(self) -> Dict[int, np.ndarray]:
        out = {}
        for i, name in enumerate(self.names, start=1):
            out[i] = self.generators[name]
            out[-i] = mx.inverse(self.generators[name])
        return out

    def to_dict(self) -> dict:
        return {name: mx.to_rows(m) for name, m in self.generators.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "MatrixRep":
        return cls({name: mx.as_matrix(rows) for name, rows in data.items()})


def name_word(w) -> NameWord:
    """(name, exponent) pairs of a text word, a syllable word or a pair sequence."""
    if isinstance(w, str):
        return parse_name_word(w)
    if isinstance(w, (Word, NormalForm)):
        p = w.presentation
        out = []
        for s in w.syllables:
            if s.is_stable:
                out.append((p.stable_name, s.exponent))
            else:
                names = p.factors[s.factor].names
                out.extend((names[abs(x) - 1], 1 if x > 0 else -1) for x in s.word)
        return tuple(out)
    return tuple((str(n), int(e)) for n, e in w)


def evaluate(rep: MatrixRep, w: Union[str, Word, NormalForm, Sequence[Tuple[str, int]]]) -> np.ndarray:
    """Left-to-right product; syllable words are read through their factors' generator names."""
    out = mx.identity(rep.d, rep.exact)
    for name, exp in name_word(w):
        out = out @ rep.matrix(name, exp)
    return out


def evaluate_letters(rep: MatrixRep, word: Sequence[int]) -> np.ndarray:
    """Product over a word in signed indices of rep.names."""
    letters = rep.letter_matrices()
    out = mx.identity(rep.d, rep.exact)
    for x in word:
        out = out @ letters[x]
    return out


def letters_to_names(rep: MatrixRep, word: Sequence[int]) -> NameWord:
    return tuple((rep.names[abs(x) - 1], 1 if x > 0 else -1) for x in word)


# ----------------------------------------------------------------
# Symmetric powers
# ----------------------------------------------------------------

def lift_rep(rep: MatrixRep, d: int) -> MatrixRep:
    return MatrixRep({name: sym_power_lift(g, d) for name, g in rep.generators.items()})


# ----------------------------------------------------------------
# Genus-2 octagon group
# ----------------------------------------------------------------

def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, s], [-s, c]])


def _side_pairing(j: int, k: int, translation: np.ndarray) -> np.ndarray:
    """Maps side j of the regular octagon onto side k (sides centred at angles i * pi / 4)."""
    return _rotation(k * math.pi / 4.0) @ translation @ _rotation(math.pi - j * math.pi / 4.0)


def fuchsian_genus2() -> MatrixRep:
    """
    Side pairings of the regular hyperbolic octagon with angles pi/4.

    The inradius r satisfies cosh r = 1 + sqrt(2); generators are
    a1 = g(3->1)^-1, b1 = g(2->0), a2 = g(7->5)^-1, b2 = g(6->4), and
    [a1, b1][a2, b2] = +-I.
    """
    cosh_r = 1.0 + math.sqrt(2.0)
    e_r = cosh_r + math.sqrt(cosh_r * cosh_r - 1.0)
    translation = np.diag([e_r, 1.0 / e_r])
    return MatrixRep({
        "a1": np.linalg.inv(_side_pairing(3, 1, translation)),
        "b1": _side_pairing(2, 0, translation),
        "a2": np.linalg.inv(_side_pairing(7, 5, translation)),
        "b2": _side_pairing(6, 4, translation),
    })


GENUS2_RELATOR = "a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1"


# ----------------------------------------------------------------
# Splittings
# ----------------------------------------------------------------

@dataclass(frozen=True)
class Split:
    """
    How the generators of a representation form an amalgam or an HNN extension.

    Amalgam: factor_a / factor_b name lists and the edge element as a word in
    each factor. HNN: factor_m names, stable letter name, and the H_- / H_+
    generators as words in the M names (H_+ = stable * H_- * stable^-1).
    """
    kind: SplitKind
    factor_a: Tuple[str, ...] = ()
    factor_b: Tuple[str, ...] = ()
    edge_a: Tuple[str, ...] = ()
    edge_b: Tuple[str, ...] = ()
    factor_m: Tuple[str, ...] = ()
    stable: str = "f"
    minus: Tuple[str, ...] = ()
    plus: Tuple[str, ...] = ()

    @property
    def edge_word(self) -> str:
        """The edge element eta: the amalgam edge (A side) or the H_- generator."""
        return self.edge_a[0] if self.kind is SplitKind.AMALGAM else self.minus[0]

    def presentation(self, rep: MatrixRep, budget: Optional[int] = None):
        projective = rep.d % 2 == 0
        if self.kind is SplitKind.AMALGAM:
            fa = FactorGroup(FactorTag.A, self.factor_a, [rep.matrix(n) for n in self.factor_a], projective=projective)
            fb = FactorGroup(FactorTag.B, self.factor_b, [rep.matrix(n) for n in self.factor_b], projective=projective)
            return AmalgamPresentation(fa, fb, [_local_word(fa, w) for w in self.edge_a],
                                       [_local_word(fb, w) for w in self.edge_b], budget, projective)
        fm = FactorGroup(FactorTag.M, self.factor_m, [rep.matrix(n) for n in self.factor_m],
                         d=rep.d, projective=projective)
        return HnnPresentation(fm, rep.matrix(self.stable), [_local_word(fm, w) for w in self.minus],
                               [_local_word(fm, w) for w in self.plus], self.stable, budget, projective)

    def to_dict(self) -> dict:
        return {k: (v.value if isinstance(v, SplitKind) else list(v) if isinstance(v, tuple) else v)
                for k, v in self.__dict__.items()}


def _local_word(factor: FactorGroup, text: str) -> Letters:
    out = []
    for name, exp in parse_name_word(text):
        idx = factor.index_of(name)
        out.extend([idx if exp > 0 else -idx] * abs(exp))
    return tuple(out)


def genus2_amalgam_split() -> Split:
    """Separating curve [a1, b1] = [b2, a2]."""
    return Split(SplitKind.AMALGAM, factor_a=("a1", "b1"), factor_b=("a2", "b2"),
                 edge_a=("a1 b1 a1^-1 b1^-1",), edge_b=("b2 a2 b2^-1 a2^-1",))


def genus2_hnn_split() -> Split:
    """Non-separating curve a1 with stable letter b1: b1 a1 b1^-1 = [a2, b2] a1."""
    return Split(SplitKind.HNN, factor_m=("a1", "a2", "b2"), stable="b1",
                 minus=("a1",), plus=("a2 b2 a2^-1 b2^-1 a1",))


# ----------------------------------------------------------------
# Loxodromics, centralizers, bending
# ----------------------------------------------------------------

@dataclass
class LoxodromicData:
    element: np.ndarray
    attracting: Flag
    repelling: Flag
    moduli: np.ndarray

    def to_dict(self) -> dict:
        return {
            "attracting": self.attracting.to_list(),
            "repelling": self.repelling.to_list(),
            "moduli": self.moduli.tolist(),
        }


def axis_flags(g: np.ndarray, t: FlagType) -> LoxodromicData:
    """Attracting flag of type t and repelling flag of the opposite type."""
    g = mx.to_float(g)
    return LoxodromicData(g, fl.attracting_flag(g, t), fl.repelling_flag(g, t), fl.eigen_moduli(g))


class CentralizerChart:
    """
    Identity component of the centralizer of a real-diagonalizable eta:
    s in R^{d-1} -> P diag(e^{s_1}, ..., e^{s_{d-1}}, e^{-sum s}) P^-1.
    """

    def __init__(self, eta: np.ndarray):
        eta = mx.to_float(eta)
        values, vectors = np.linalg.eig(eta)
        if np.max(np.abs(values.imag)) > settings.COMMUTATOR_TOL * max(1.0, float(np.max(np.abs(values)))):
            raise NoGap("edge element has non-real eigenvalues")
        order = np.argsort(-np.abs(values.real))
        moduli = np.abs(values.real[order])
        if np.any(np.log(moduli[:-1] / moduli[1:]) < settings.GAP_FLOOR):
            raise NoGap("edge element has repeated eigenvalue moduli")
        self.eta = eta
        self.P = vectors.real[:, order]
        self.P_inv = np.linalg.inv(self.P)

    @property
    def dimension(self) -> int:
        return self.eta.shape[0] - 1

    def __call__(self, s: Sequence[float]) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.shape != (self.dimension,):
            raise ValueError(f"centralizer parameter must have {self.dimension} entries")
        diag = np.exp(np.append(s, -np.sum(s)))
        return self.P @ np.diag(diag) @ self.P_inv


def commutator_defect(t: np.ndarray, eta: np.ndarray) -> float:
    t, eta = mx.to_float(t), mx.to_float(eta)
    return float(np.max(np.abs(t @ eta - eta @ t))) / max(1.0, float(np.max(np.abs(eta))) * float(np.max(np.abs(t))))


def bend(rep: MatrixRep, split: Split, t: np.ndarray) -> MatrixRep:
    """
    Amalgam: conjugate the B generators by t. HNN: replace the stable letter f by f t.

    Raises:
        NotInCentralizer: if t does not commute with the edge element.
    """
    t = mx.to_float(t)
    eta = evaluate(rep, split.edge_word)
    defect = commutator_defect(t, eta)
    if defect > settings.COMMUTATOR_TOL:
        raise NotInCentralizer(f"bending element misses the centralizer (defect {defect:.3e})")
    gens = {name: mx.to_float(g) for name, g in rep.generators.items()}
    if split.kind is SplitKind.AMALGAM:
        t_inv = np.linalg.inv(t)
        for name in split.factor_b:
            gens[name] = t @ gens[name] @ t_inv
    else:
        gens[split.stable] = gens[split.stable] @ t
    return MatrixRep(gens)


def conjugate_rep(rep: MatrixRep, c: np.ndarray) -> MatrixRep:
    c_inv = mx.inverse(c)
    return MatrixRep({name: c @ g @ c_inv for name, g in rep.generators.items()})


def symmetric_frame(rep2: MatrixRep, eta_word: str) -> np.ndarray:
    """
    Conjugator C in SL(2,R) moving the attracting and repelling fixed points of
    eta to angles 0 and pi/2 on RP^1.
    """
    eta = mx.to_float(evaluate(rep2, eta_word))
    values, vectors = np.linalg.eig(eta)
    order = np.argsort(-np.abs(values.real))
    p = vectors.real[:, order]
    det = np.linalg.det(p)
    if abs(det) < settings.SINGULAR_TOL:
        raise NoGap("edge element is not hyperbolic")
    if det < 0:
        p[:, 1] = -p[:, 1]
        det = -det
    p = p / math.sqrt(det)
    return np.linalg.inv(p)


# ----------------------------------------------------------------
# Limit sets
# ----------------------------------------------------------------

@dataclass
class LimitSetSample:
    net: np.ndarray
    words: List[NameWord]
    ftype: FlagType
    skipped: int = 0
    gaps: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.net)

    def as_flag_set(self, r: float = 0.0, label: str = "") -> FlagSet:
        return FlagSet(self.net, self.ftype, r, label)

    def to_frame(self) -> pd.DataFrame:
        d = self.ftype.d
        cols = [f"b{i}{j}" for i in range(d) for j in range(d)]
        frame = pd.DataFrame(self.net.reshape(len(self), d * d), columns=cols)
        frame["gap"] = self.gaps
        frame["word"] = [" ".join(n if e == 1 else f"{n}^{e}" for n, e in w) for w in self.words]
        return frame


def enumerate_reduced_words(rep: MatrixRep, max_length: int, min_length: int = 1) -> Iterator[Letters]:
    return reduced_words(len(rep.names), max_length, min_length)


def _layered_products(rep: MatrixRep, depth: int) -> Tuple[List[Letters], np.ndarray]:
    """All reduced words of length 1..depth in shortlex order with their float products."""
    letters = rep.letter_matrices()
    keys = list(alphabet(len(rep.names)))
    stack = np.array([mx.to_float(letters[x]) for x in keys])
    layer_words = [(x,) for x in keys]
    layer_mats = stack
    words, mats = list(layer_words), [layer_mats]
    for _ in range(1, depth):
        nxt_words, src, dst = [], [], []
        for i, w in enumerate(layer_words):
            for j, x in enumerate(keys):
                if w[-1] == -x:
                    continue
                nxt_words.append(w + (x,))
                src.append(i)
                dst.append(j)
        layer_mats = layer_mats[src] @ stack[dst]
        scale = np.linalg.norm(layer_mats, axis=(1, 2))[:, None, None]
        layer_mats = layer_mats / scale
        layer_words = nxt_words
        words.extend(layer_words)
        mats.append(layer_mats)
    return words, np.concatenate(mats, axis=0)


def dedup_flags(net: np.ndarray, ftype: FlagType, tol: Optional[float] = None) -> np.ndarray:
    """Indices of the first representative of each flag-distance cluster below tol."""
    tol = settings.DEDUP_TOL if tol is None else tol
    if len(net) == 0:
        return np.zeros(0, dtype=int)
    feats = fl.projector_features(net, ftype)
    tree = cKDTree(feats)
    radius = math.sqrt(2.0 * sum(ftype.dims)) * tol
    keep, dropped = [], np.zeros(len(net), dtype=bool)
    for i in range(len(net)):
        if dropped[i]:
            continue
        keep.append(i)
        for j in tree.query_ball_point(feats[i], radius):
            if j > i and not dropped[j]:
                if fl.flag_distance(Flag(net[i], ftype), Flag(net[j], ftype)) < tol:
                    dropped[j] = True
    return np.array(keep, dtype=int)


def limit_set_sample(rep: MatrixRep, depth: Optional[int] = None, t: Optional[FlagType] = None,
                     names: Optional[Sequence[str]] = None) -> LimitSetSample:
    """
    Attracting flags of all reduced words of length <= depth, shortlex order.

    Words without a modulus gap at every stage are skipped and counted;
    flags within DEDUP_TOL of an earlier one are dropped.
    """
    depth = settings.LIMIT_SET_DEPTH if depth is None else depth
    sub = rep.restrict(names) if names else rep
    t = t or FlagType.full(sub.d)
    words, mats = _layered_products(sub, depth)
    bases, ok = fl.batch_attracting_flags(mats, t)
    sv = np.linalg.svd(mats, compute_uv=False)
    gaps = np.min(np.log(sv[:, [k - 1 for k in t.dims]] / sv[:, list(t.dims)]), axis=1)
    idx = np.nonzero(ok)[0]
    keep = idx[dedup_flags(bases[idx], t)]
    skipped = int(len(words) - len(idx))
    if skipped:
        logger.warning("Limit set sample skipped %d of %d words without eigenvalue gaps", skipped, len(words))
    return LimitSetSample(
        net=bases[keep],
        words=[letters_to_names(sub, words[i]) for i in keep],
        ftype=t,
        skipped=skipped,
        gaps=[float(gaps[i]) for i in keep],
    )


# ----------------------------------------------------------------
# Boundary circle and arcs
# ----------------------------------------------------------------

def _angle(v: np.ndarray) -> float:
    return float(math.atan2(v[1], v[0]) % math.pi)


class BoundaryCircle:
    """
    Circular order on limit points read from a Fuchsian 2x2 shadow.

    Points of RP^1 are angles in [0, pi); the shadow of a word is the
    attracting eigenline of its 2x2 evaluation.
    """

    def __init__(self, shadow: MatrixRep):
        if shadow.d != 2:
            raise OrderUnavailable("the boundary circle needs a 2x2 Fuchsian shadow")
        self.shadow = shadow

    def fixed_angles(self, w) -> Tuple[float, float]:
        """(attracting, repelling) angles of the shadow of w."""
        try:
            g = mx.to_float(evaluate(self.shadow, w))
        except UnboundGenerator as exc:
            raise OrderUnavailable(str(exc))
        values, vectors = np.linalg.eig(g)
        if np.max(np.abs(values.imag)) > 0 or abs(abs(values[0]) - abs(values[1])) < settings.GAP_FLOOR:
            raise OrderUnavailable("shadow element is not hyperbolic")
        order = np.argsort(-np.abs(values.real))
        return _angle(vectors.real[:, order[0]]), _angle(vectors.real[:, order[1]])

    def angle_of(self, w) -> float:
        return self.fixed_angles(w)[0]


def on_arc(theta: float, start: float, end: float, tol: float = 1e-12) -> bool:
    """Whether theta lies on the counterclockwise arc of RP^1 from start to end."""
    span = (end - start) % math.pi
    delta = (theta - start) % math.pi
    return delta <= span + tol or delta >= math.pi - tol


def arc_split(sample: LimitSetSample, sigma_plus: float, sigma_minus: float, circle: BoundaryCircle,
              reference: float) -> Tuple[List[int], List[int]]:
    """
    Split a limit sample into the two closed arcs cut out by sigma_+ and sigma_-.

    The arc containing the reference angle (a point of the A factor's limit
    set) is c_A. Returns index lists (c_A, c_B); the endpoints belong to both.
    """
    a_arc = (sigma_plus, sigma_minus) if on_arc(reference, sigma_plus, sigma_minus) else (sigma_minus, sigma_plus)
    c_a, c_b = [], []
    for i, w in enumerate(sample.words):
        theta = circle.angle_of(w)
        if on_arc(theta, *a_arc):
            c_a.append(i)
        if on_arc(theta, a_arc[1], a_arc[0]):
            c_b.append(i)
    return c_a, c_b


def arc_split_four(sample: LimitSetSample, sigma: Tuple[float, float], sigma_prime: Tuple[float, float],
                   circle: BoundaryCircle) -> Dict[str, List[int]]:
    """
    Four arcs cut out by the fixed points of eta (sigma) and of phi(eta) (sigma_prime).

    B- joins sigma_+ and sigma_- avoiding sigma_prime, B+ joins sigma'_+ and
    sigma'_- avoiding sigma, A+ joins sigma_+ and sigma'_+, A- joins sigma_- and sigma'_-.
    """
    arcs = four_arcs(sigma, sigma_prime)
    out: Dict[str, List[int]] = {k: [] for k in arcs}
    for i, w in enumerate(sample.words):
        theta = circle.angle_of(w)
        for key, (start, end) in arcs.items():
            if on_arc(theta, start, end):
                out[key].append(i)
    return out


def four_arcs(sigma: Tuple[float, float], sigma_prime: Tuple[float, float]) -> Dict[str, Tuple[float, float]]:
    """Counterclockwise (start, end) angles of the arcs A+, A-, B+, B-."""
    sp, sm = sigma
    tp, tm = sigma_prime
    b_minus = (sp, sm) if not on_arc(tp, sp, sm) else (sm, sp)
    b_plus = (tp, tm) if not on_arc(sp, tp, tm) else (tm, tp)
    a_plus = (sp, tp) if not on_arc(sm, sp, tp) else (tp, sp)
    a_minus = (sm, tm) if not on_arc(sp, sm, tm) else (tm, sm)
    return {"A+": a_plus, "A-": a_minus, "B+": b_plus, "B-": b_minus}


def arc_net(start: float, end: float, d: int, size: Optional[int] = None, label: str = "") -> FlagSet:
    """
    Veronese flags at equally spaced angles on the counterclockwise arc from start to end.

    The inflation radius is INFLATION_FACTOR times the largest spacing between
    consecutive net flags; the endpoint flags are recorded as the boundary.
    """
    size = settings.ARC_NET_SIZE if size is None else size
    span = (end - start) % math.pi
    angles = start + span * np.linspace(0.0, 1.0, size)
    net = np.array([fl.veronese_flag((math.cos(a), math.sin(a)), d).basis for a in angles])
    ftype = FlagType.full(d)
    spacing = max(fl.flag_distance(Flag(net[i], ftype), Flag(net[i + 1], ftype)) for i in range(size - 1))
    boundary = np.array([net[0], net[-1]])
    return FlagSet(net, ftype, settings.INFLATION_FACTOR * spacing, label, boundary,
                   {"arc": [float(start), float(start + span)]})


def arc_nets(arcs: Dict[str, Tuple[float, float]], d: int, intervals: Optional[int] = None) -> Dict[str, FlagSet]:
    """
    Arc nets sharing one angular step and one inflation radius.

    The shortest arc is cut into ``intervals`` steps and longer arcs get
    proportionally more points, so unions of the nets keep the common radius.
    """
    intervals = settings.ARC_MIN_INTERVALS if intervals is None else intervals
    spans = {name: (end - start) % math.pi for name, (start, end) in arcs.items()}
    shortest = min(spans.values())
    if shortest <= 0:
        raise ValueError("arcs must have positive length")
    step = shortest / intervals
    nets = {name: arc_net(start, end, d, int(math.ceil(spans[name] / step - 1e-9)) + 1, name)
            for name, (start, end) in arcs.items()}
    r = max(S.r for S in nets.values())
    for S in nets.values():
        S.r = r
    return nets
