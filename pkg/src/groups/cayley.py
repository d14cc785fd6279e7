"""
Bounded Cayley balls of matrix groups.

Elements are stored with their shortlex geodesic words; distances between
stored elements are path lengths inside the ball graph (scipy csgraph), which
agree with the word metric whenever a geodesic between the two elements stays
in the ball (always the case in free groups).
"""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
import networkx as nx
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from src.config.settings import settings
from src.config.logging_config import setup_logging
from src.core.errors import OutOfBall
from src.core.types import FactorTag
from src.groups import matrices as mx
from src.groups.alphabet import Letters
from src.groups.presentations import AmalgamPresentation, enumerate_ball
from src.groups.words import Word, make_word

logger = setup_logging(__name__)

ElementRef = Union[int, np.ndarray]


@njit
def four_point_delta_nb(dist, base):
    """
    Max over x, y, z of min((x,z)_w, (y,z)_w) - (x,y)_w for each base point w in ``base``.

    Args:
        dist (float array): symmetric distance matrix.
        base (int array): indices used as base points.

    Returns:
        float: the four-point hyperbolicity defect.
    """
    n = dist.shape[0]
    best = 0.0
    for bi in range(base.shape[0]):
        w = base[bi]
        for x in range(n):
            dxw = dist[x, w]
            for y in range(x, n):
                gxy = 0.5 * (dxw + dist[y, w] - dist[x, y])
                for z in range(n):
                    dzw = dist[z, w]
                    gxz = 0.5 * (dxw + dzw - dist[x, z])
                    gyz = 0.5 * (dist[y, w] + dzw - dist[y, z])
                    m = gxz if gxz < gyz else gyz
                    if m - gxy > best:
                        best = m - gxy
    return best


@dataclass
class SubgroupTrace:
    """Intersection of a subgroup with a Cayley ball, closed under inverses inside the ball."""
    generator_words: Tuple[Letters, ...]
    indices: Tuple[int, ...]
    label: str = ""
    members: FrozenSet[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.members = frozenset(self.indices)

    def __contains__(self, i: int) -> bool:
        return i in self.members

    def __len__(self) -> int:
        return len(self.indices)


@dataclass
class CayleyBall:
    """
    Ball of a given radius in the word metric of a finitely generated matrix group.

    words[i] is the shortlex geodesic word of elements[i]; index 0 is the identity.
    """
    names: Tuple[str, ...]
    letters: Dict[int, np.ndarray]
    radius: int
    words: List[Letters]
    elements: List[np.ndarray]
    sphere_sizes: List[int]
    projective: bool = False
    keys: Dict[Tuple, int] = field(default_factory=dict, repr=False)
    letter_syllables: Optional[Dict[int, Tuple[FactorTag, int]]] = field(default=None, repr=False)
    presentation: Optional[AmalgamPresentation] = field(default=None, repr=False)
    _dist: Optional[np.ndarray] = field(default=None, repr=False)
    _pred: Optional[np.ndarray] = field(default=None, repr=False)
    _delta: Dict[int, float] = field(default_factory=dict, repr=False)

    # ----------------------------------------------------------------
    # Construction
    # ----------------------------------------------------------------

    @classmethod
    def build(cls, generators: Sequence[np.ndarray], radius: Optional[int] = None,
              names: Optional[Sequence[str]] = None, projective: bool = False) -> "CayleyBall":
        """Shortlex BFS over the symmetric generating set {g_i, g_i^-1}."""
        radius = settings.BALL_RADIUS if radius is None else radius
        gens = list(generators)
        names = tuple(names) if names else tuple(f"g{i + 1}" for i in range(len(gens)))
        exact = all(mx.is_exact(g) for g in gens)
        if not exact:
            gens = [mx.to_float(g) for g in gens]
        letters: Dict[int, np.ndarray] = {}
        for i, g in enumerate(gens, start=1):
            letters[i] = g
            letters[-i] = mx.inverse(g)
        d = gens[0].shape[0]
        ball = enumerate_ball(letters, d, exact, radius, max_elements=10 ** 7, projective=projective)
        out = cls(names=names, letters=letters, radius=radius, words=list(ball.words),
                  elements=list(ball.elements), sphere_sizes=list(ball.sphere_sizes),
                  projective=projective, keys=dict(ball.keys))
        logger.info("Cayley ball of radius %d: %d elements", radius, len(out.words))
        return out

    @classmethod
    def from_amalgam(cls, p: AmalgamPresentation, radius: Optional[int] = None) -> "CayleyBall":
        """Ball over the union of both factors' generators; letters remember their syllable factor."""
        gens, names, mapping = [], [], {}
        for tag in p.tags:
            factor = p.factors[tag]
            for j, (name, g) in enumerate(zip(factor.names, factor.generators), start=1):
                gens.append(g)
                names.append(name)
                mapping[len(gens)] = (tag, j)
        ball = cls.build(gens, radius, names, projective=p.projective)
        ball.letter_syllables = mapping
        ball.presentation = p
        return ball

    # ----------------------------------------------------------------
    # Lookup
    # ----------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.words)

    def _key(self, m: np.ndarray) -> Tuple:
        if self.projective:
            return min(mx.matrix_key(m), mx.matrix_key(-m))
        return mx.matrix_key(m)

    def index(self, g: ElementRef) -> int:
        if isinstance(g, (int, np.integer)):
            if not 0 <= int(g) < len(self.words):
                raise OutOfBall(f"index {g} outside a ball of {len(self.words)} elements")
            return int(g)
        i = self.keys.get(self._key(g))
        if i is None:
            raise OutOfBall("element is not stored in the ball")
        return i

    def index_of_word(self, word: Sequence[int]) -> int:
        m = self.elements[0]
        for x in word:
            m = m @ self.letters[x]
        return self.index(m)

    def word(self, g: ElementRef) -> Letters:
        return self.words[self.index(g)]

    def element(self, g: ElementRef) -> np.ndarray:
        return self.elements[self.index(g)]

    def length(self, g: ElementRef) -> int:
        return len(self.words[self.index(g)])

    def amalgam_word(self, g: ElementRef) -> Word:
        """The geodesic word of g as a syllable word over the amalgam it was built from."""
        if self.letter_syllables is None:
            raise ValueError("ball was not built from an amalgam presentation")
        parts: List[Tuple[FactorTag, List[int]]] = []
        for x in self.word(g):
            tag, j = self.letter_syllables[abs(x)]
            letter = j if x > 0 else -j
            if parts and parts[-1][0] is tag:
                parts[-1][1].append(letter)
            else:
                parts.append((tag, [letter]))
        return make_word(self.presentation, parts)

    # ----------------------------------------------------------------
    # Metric
    # ----------------------------------------------------------------

    def _graph(self) -> csr_matrix:
        rows, cols = [], []
        for i, m in enumerate(self.elements):
            for x, g in self.letters.items():
                j = self.keys.get(self._key(m @ g))
                if j is not None and j != i:
                    rows.append(i)
                    cols.append(j)
        n = len(self.elements)
        return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))

    def to_networkx(self) -> nx.Graph:
        """Undirected Cayley graph of the ball; nodes carry their shortlex words."""
        graph = nx.Graph()
        for i, w in enumerate(self.words):
            graph.add_node(i, word=list(w))
        coo = self._graph().tocoo()
        graph.add_edges_from(zip(coo.row.tolist(), coo.col.tolist()))
        return graph

    def _ensure_metric(self) -> None:
        if self._dist is None:
            self._dist, self._pred = shortest_path(self._graph(), method="D", directed=False,
                                                   unweighted=True, return_predecessors=True)

    @property
    def distance_matrix(self) -> np.ndarray:
        self._ensure_metric()
        return self._dist

    def distance(self, f: ElementRef, g: ElementRef) -> int:
        self._ensure_metric()
        return int(self._dist[self.index(f), self.index(g)])

    def geodesic(self, f: ElementRef, g: ElementRef) -> List[int]:
        """Indices along the stored geodesic from f to g (both included)."""
        self._ensure_metric()
        i, j = self.index(f), self.index(g)
        path = [j]
        while path[-1] != i:
            path.append(int(self._pred[i, path[-1]]))
        return path[::-1]

    def gromov_product(self, f: ElementRef, g: ElementRef, w: ElementRef) -> float:
        """(f, g)_w = (d(f, w) + d(g, w) - d(f, g)) / 2."""
        return 0.5 * (self.distance(f, w) + self.distance(g, w) - self.distance(f, g))

    def delta(self, radius: Optional[int] = None) -> float:
        """Four-point hyperbolicity defect on the sub-ball of the given radius, all base points."""
        radius = settings.DELTA_RADIUS if radius is None else min(radius, self.radius)
        if radius not in self._delta:
            idx = np.array([i for i, w in enumerate(self.words) if len(w) <= radius], dtype=np.int64)
            sub = np.ascontiguousarray(self.distance_matrix[np.ix_(idx, idx)])
            self._delta[radius] = float(four_point_delta_nb(sub, np.arange(len(idx), dtype=np.int64)))
            logger.debug("delta estimate %.1f on %d elements", self._delta[radius], len(idx))
        return self._delta[radius]

    # ----------------------------------------------------------------
    # Subgroups and projections
    # ----------------------------------------------------------------

    def subgroup_trace(self, generator_words: Sequence[Sequence[int]], label: str = "") -> SubgroupTrace:
        """Elements of the subgroup reachable inside the ball by multiplying generators."""
        gens = []
        for w in generator_words:
            m = self.elements[0]
            for x in w:
                m = m @ self.letters[x]
            gens.extend([m, mx.inverse(m)])
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                for g in gens:
                    j = self.keys.get(self._key(self.elements[i] @ g))
                    if j is not None and j not in seen:
                        seen.add(j)
                        nxt.append(j)
            frontier = nxt
        for i in list(seen):
            j = self.keys.get(self._key(mx.inverse(self.elements[i])))
            if j is not None:
                seen.add(j)
        return SubgroupTrace(tuple(tuple(w) for w in generator_words), tuple(sorted(seen)), label)

    def nearest_point_projection(self, g: ElementRef, trace: SubgroupTrace) -> int:
        """Closest trace element to g; ties go to the shortlex-first word."""
        i = self.index(g)
        if not trace.indices:
            raise OutOfBall("empty subgroup trace")
        self._ensure_metric()
        row = self._dist[i]
        return min(trace.indices, key=lambda y: (row[y], y))

    def projection_displacement(self, g: ElementRef, trace: SubgroupTrace) -> int:
        return self.distance(self.nearest_point_projection(g, trace), 0)

    def projection_inequality_defect(self, g: ElementRef, trace: SubgroupTrace) -> float:
        """
        max over eta in the trace of d(pr(g), g) - d(eta, pr(g)^-1 g).

        Nonpositive when the projection inequality holds; pairs leaving the ball are skipped.
        """
        i = self.index(g)
        pr = self.nearest_point_projection(i, trace)
        try:
            shifted = self.index(mx.inverse(self.elements[pr]) @ self.elements[i])
        except OutOfBall:
            return float("-inf")
        base = self.distance(pr, i)
        return max(base - self.distance(eta, shifted) for eta in trace.indices)

    def quasiconvexity_constant(self, trace: SubgroupTrace) -> int:
        """Max distance to the trace along stored geodesics between trace elements."""
        self._ensure_metric()
        idx = list(trace.indices)
        to_trace = self._dist[:, idx].min(axis=1)
        k = 0
        for a_pos, a in enumerate(idx):
            for b in idx[a_pos + 1:]:
                k = max(k, int(max(to_trace[v] for v in self.geodesic(a, b))))
        return k

    def projection_geodesic_gap(self, g: ElementRef, trace: SubgroupTrace) -> int:
        """Max over y in the trace of the distance from pr(g) to the stored geodesic [y, g]."""
        i = self.index(g)
        pr = self.nearest_point_projection(i, trace)
        self._ensure_metric()
        return int(max(min(self._dist[pr, v] for v in self.geodesic(y, i)) for y in trace.indices))

    # ----------------------------------------------------------------
    # Fellow travelling
    # ----------------------------------------------------------------

    def fellow_travel_profile(self, seq1: Sequence[ElementRef], seq2: Sequence[ElementRef]) -> List[float]:
        if len(seq1) != len(seq2):
            raise ValueError("fellow-travel sequences must have equal length")
        return [self.gromov_product(a, b, 0) for a, b in zip(seq1, seq2)]

    def fellow_travel_margin(self, seq1: Sequence[ElementRef], seq2: Sequence[ElementRef]) -> float:
        return min(self.fellow_travel_profile(seq1, seq2))

    def stats(self, traces: Sequence[SubgroupTrace] = ()) -> dict:
        return {
            "radius": self.radius,
            "size": len(self.words),
            "sphere_sizes": list(self.sphere_sizes),
            "delta": self.delta(),
            "delta_radius": min(settings.DELTA_RADIUS, self.radius),
            "quasiconvexity": {t.label or str(t.generator_words): self.quasiconvexity_constant(t) for t in traces},
        }
