"""
Bass-Serre tree of an amalgam or HNN extension, navigated symbolically.

Vertices are left cosets gX (X a factor) held by a canonical transversal
representative, so vertex equality is equality of representatives. Distances
and geodesic paths come from normal forms; ``materialize_tree`` builds a
finite ball as a networkx graph for cross-checks.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import networkx as nx

from src.config.logging_config import setup_logging
from src.core.types import FactorTag
from src.groups.presentations import AmalgamPresentation, HnnPresentation
from src.groups.words import (
    NormalForm,
    Presentation,
    Word,
    assemble_hnn,
    canonical_form,
    coset_representative,
    coset_transversal,
    hnn_parts,
    make_syllable,
    normal_form,
    stable_syllable,
    word_to_json,
)

logger = setup_logging(__name__)


@dataclass(frozen=True)
class TreeVertex:
    """The coset rep * kind; rep is the canonical transversal representative."""
    rep: NormalForm
    kind: FactorTag
    presentation: Presentation = field(compare=False, repr=False)

    def key(self) -> Tuple:
        return (self.kind.value, self.rep.key())

    def __eq__(self, other) -> bool:
        return isinstance(other, TreeVertex) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


@dataclass(frozen=True)
class TreeEdge:
    """Edge g*H (amalgam) or g*H_+ (HNN, joining gM and gfM)."""
    label: NormalForm
    subgroup: str
    endpoints: Tuple[TreeVertex, TreeVertex]


def _as_normal_form(g: Union[Word, NormalForm]) -> NormalForm:
    return g if isinstance(g, NormalForm) else normal_form(g)


def base_vertex(p: Presentation, kind: Optional[FactorTag] = None) -> TreeVertex:
    kind = kind or (FactorTag.A if isinstance(p, AmalgamPresentation) else FactorTag.M)
    return TreeVertex(NormalForm((), 0, p), kind, p)


def vertex_of(nf: Union[NormalForm, Word], which: Optional[FactorTag] = None) -> TreeVertex:
    """
    Vertex nf * X for the factor X = which (M for HNN extensions).

    The last syllable is dropped when it lies in X, otherwise replaced by its
    coset representative modulo the edge group; for HNN the trailing M-syllable
    is dropped.
    """
    nf = _as_normal_form(nf)
    p = nf.presentation
    if isinstance(p, HnnPresentation):
        if nf.rl == 0:
            return base_vertex(p)
        mus, eps = hnn_parts(canonical_form(nf))
        mus[-1] = make_syllable(p, FactorTag.M, ())
        return TreeVertex(assemble_hnn(p, mus, eps), FactorTag.M, p)
    which = which or FactorTag.A
    if which not in (FactorTag.A, FactorTag.B):
        raise ValueError(f"amalgam vertices have type A or B, not {which.value}")
    if nf.rl == 0:
        return base_vertex(p, which)
    syl = list(canonical_form(nf).syllables)
    last = syl.pop()
    if last.factor is not which:
        factor, oracle = p.factors[last.factor], p.oracles[last.factor]
        t_word, _, _ = coset_representative(factor, oracle, last.matrix, last.word)
        syl.append(make_syllable(p, last.factor, t_word))
    return TreeVertex(NormalForm(tuple(syl), len(syl), p), which, p)


def vertex_action(g: Union[Word, NormalForm], v: TreeVertex) -> TreeVertex:
    """Left translation g * v."""
    word = Word(tuple(g.syllables) + v.rep.syllables, v.presentation)
    return vertex_of(normal_form(word), v.kind)


def _relative(v: TreeVertex, w: TreeVertex) -> NormalForm:
    word = Word(v.rep.inverse().syllables + w.rep.syllables, v.presentation)
    return normal_form(word)


def tree_distance(v: TreeVertex, w: TreeVertex) -> int:
    """
    Combinatorial distance between two vertices.

    For gamma = rep(v)^-1 rep(w) with syllables g_1..g_l in factors F_1..F_l,
    the geodesic runs X, F_1, g_1 F_2, ..., g_1..g_{l-1} F_l, gamma Y, so the
    distance is l - 1 + [X != F_1] + [Y != F_l]. HNN distance equals rl(gamma).
    """
    gamma = _relative(v, w)
    if isinstance(v.presentation, HnnPresentation):
        return gamma.rl
    if gamma.rl == 0:
        return 0 if v.kind is w.kind else 1
    first, last = gamma.syllables[0].factor, gamma.syllables[-1].factor
    return gamma.rl - 1 + int(v.kind is not first) + int(w.kind is not last)


def normal_form_path(nf: NormalForm) -> List[TreeVertex]:
    """
    Vertex path induced by a normal form.

    Amalgam with syllables in F_1..F_l: other(F_1), F_1, g_1 F_2, ...,
    g_1..g_l other(F_l). HNN: M, mu_0 f^{e_1} M, ..., one vertex per stable letter.
    """
    p = nf.presentation
    if isinstance(p, HnnPresentation):
        path = [base_vertex(p)]
        prefix = []
        for s in nf.syllables:
            prefix.append(s)
            if s.is_stable:
                path.append(vertex_of(NormalForm(tuple(prefix), len(path), p)))
        return path
    if nf.rl == 0:
        return [base_vertex(p, FactorTag.A)]
    syl = nf.syllables
    first = syl[0].factor
    path = [base_vertex(p, first.other), base_vertex(p, first)]
    for k in range(1, len(syl) + 1):
        path.append(vertex_of(NormalForm(syl[:k], k, p), syl[k - 1].factor.other))
    return path


def edge_between(u: TreeVertex, w: TreeVertex) -> Optional[TreeEdge]:
    """The edge joining two adjacent vertices, or None if they are not adjacent."""
    p = u.presentation
    if tree_distance(u, w) != 1:
        return None
    if isinstance(p, AmalgamPresentation):
        for g in (u, w):
            other = w if g is u else u
            if vertex_of(g.rep, other.kind) == other:
                return TreeEdge(g.rep, "H", (u, w))
        return None
    for g, other in ((u, w), (w, u)):
        word = Word(g.rep.syllables + (stable_syllable(p, 1),), p)
        if vertex_of(normal_form(word)) == other:
            return TreeEdge(g.rep, "H+", (g, other))
    return None


def neighbours(v: TreeVertex) -> List[TreeVertex]:
    """Adjacent vertices, one per coset of the edge group in the vertex stabilizer."""
    p = v.presentation
    out = []
    if isinstance(p, AmalgamPresentation):
        factor, oracle = p.factors[v.kind], p.oracles[v.kind]
        for t in coset_transversal(factor, oracle):
            word = Word(v.rep.syllables + (make_syllable(p, v.kind, t),), p)
            out.append(vertex_of(normal_form(word), v.kind.other))
        return out
    for sign, oracle in ((1, p.plus), (-1, p.minus)):
        for t in coset_transversal(p.factor, oracle):
            word = Word(v.rep.syllables + (make_syllable(p, FactorTag.M, t), stable_syllable(p, sign)), p)
            out.append(vertex_of(normal_form(word)))
    return out


def materialize_tree(p: Presentation, radius: int) -> nx.Graph:
    """Breadth-first ball of the given radius around the base vertex."""
    root = base_vertex(p)
    graph = nx.Graph()
    graph.add_node(root.key(), vertex=root, depth=0)
    queue = deque([root])
    while queue:
        v = queue.popleft()
        depth = graph.nodes[v.key()]["depth"]
        if depth >= radius:
            continue
        for w in neighbours(v):
            if w.key() not in graph:
                graph.add_node(w.key(), vertex=w, depth=depth + 1)
                queue.append(w)
            graph.add_edge(v.key(), w.key())
    logger.debug("Materialized tree ball of radius %d with %d vertices", radius, graph.number_of_nodes())
    return graph


def vertex_to_json(v: TreeVertex) -> dict:
    return {"rep": word_to_json(v.rep), "type": v.kind.value}


def path_to_json(path: List[TreeVertex]) -> list:
    return [vertex_to_json(v) for v in path]
