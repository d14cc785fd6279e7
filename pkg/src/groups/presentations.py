"""
Matrix factor groups, subgroup membership oracles and the two splitting
presentations (amalgamated product and HNN extension).
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import settings
from src.config.logging_config import setup_logging
from src.core.errors import FactorMismatch, MembershipUndecidable, PresentationInvalid
from src.core.types import FactorTag
from src.groups import matrices as mx
from src.groups.alphabet import Letters, alphabet, free_reduce, invert_word

logger = setup_logging(__name__)


@dataclass
class BallEnumeration:
    """Result of a breadth-first enumeration of a finitely generated matrix group."""
    words: List[Letters]
    elements: List[np.ndarray]
    sphere_sizes: List[int]
    closed: bool
    keys: Dict[Tuple, int] = field(default_factory=dict)
    stacked: Optional[np.ndarray] = None

    @property
    def radius(self) -> int:
        return len(self.sphere_sizes) - 1


def enumerate_ball(
    letter_matrices: Dict[int, np.ndarray],
    d: int,
    exact: bool,
    radius: int,
    max_elements: int,
    projective: bool = False,
    norm_ceiling: Optional[float] = None,
) -> BallEnumeration:
    """
    Shortlex breadth-first enumeration of the group generated by letter_matrices.

    Words are extended by letters in shortlex order, so the first word reaching
    an element is its shortlex-minimal geodesic word. ``closed`` is True only
    when the group was exhausted (a finite group) within the limits.
    """
    def key(m):
        k = mx.matrix_key(m)
        return min(k, mx.matrix_key(-m)) if projective else k

    order = sorted(letter_matrices, key=lambda x: (abs(x), x < 0))
    start = mx.identity(d, exact)
    words: List[Letters] = [()]
    elements = [start]
    keys = {key(start): 0}
    sphere = [0]
    sizes = [1]
    truncated = False
    for _ in range(radius):
        nxt = []
        for idx in sphere:
            w, m = words[idx], elements[idx]
            if norm_ceiling is not None and mx.frobenius_norm(m) > norm_ceiling:
                truncated = True
                continue
            for x in order:
                if w and w[-1] == -x:
                    continue
                g = m @ letter_matrices[x]
                k = key(g)
                if k in keys:
                    continue
                if len(words) >= max_elements:
                    truncated = True
                    break
                keys[k] = len(words)
                words.append(w + (x,))
                elements.append(g)
                nxt.append(len(words) - 1)
        sphere = nxt
        if not sphere:
            return BallEnumeration(words, elements, sizes, closed=not truncated, keys=keys)
        sizes.append(len(sphere))
        if truncated:
            break
    return BallEnumeration(words, elements, sizes, closed=False, keys=keys)


class FactorGroup:
    """
    A vertex group given by named generator matrices.

    Words are tuples of signed 1-based indices into ``names``. Evaluations are
    cached; small factors are tabulated so their elements have canonical
    shortlex words.
    """

    def __init__(self, tag: FactorTag, names: Sequence[str], generators: Sequence[np.ndarray],
                 d: Optional[int] = None, projective: bool = False):
        if not generators and d is None:
            raise PresentationInvalid(f"factor {tag.value} has no generators and no dimension")
        self.tag = tag
        self.names = tuple(names)
        self.generators = tuple(generators)
        if len(self.names) != len(self.generators):
            raise PresentationInvalid("generator names and matrices differ in count")
        self.d = int(d if d is not None else self.generators[0].shape[0])
        self.exact = all(mx.is_exact(g) for g in self.generators) if self.generators else True
        self.projective = projective
        if not self.exact:
            self.generators = tuple(mx.to_float(g) for g in self.generators)
        for g in self.generators:
            if g.shape != (self.d, self.d):
                raise PresentationInvalid(f"generator of factor {tag.value} has shape {g.shape}")
        self._letters = {}
        for i, g in enumerate(self.generators, start=1):
            self._letters[i] = g
            self._letters[-i] = mx.inverse(g)
        self._cache: Dict[Letters, np.ndarray] = {(): mx.identity(self.d, self.exact)}
        self._table: Optional[BallEnumeration] = None

    @property
    def rank(self) -> int:
        return len(self.generators)

    def identity(self) -> np.ndarray:
        return self._cache[()]

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise FactorMismatch(f"{name!r} is not a generator of factor {self.tag.value}")

    def letter(self, x: int) -> np.ndarray:
        if x not in self._letters:
            raise FactorMismatch(f"letter {x} is outside factor {self.tag.value} (rank {self.rank})")
        return self._letters[x]

    def evaluate(self, word: Sequence[int]) -> np.ndarray:
        word = tuple(word)
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        n = len(word)
        while n > 0 and word[:n] not in self._cache:
            n -= 1
        m = self._cache[word[:n]]
        for i in range(n, len(word)):
            m = m @ self.letter(word[i])
            if i < 64:
                self._cache[word[:i + 1]] = m
        self._cache[word] = m
        return m

    def table(self) -> BallEnumeration:
        if self._table is None:
            self._table = enumerate_ball(
                {x: self.letter(x) for x in alphabet(self.rank)}, self.d, self.exact,
                radius=settings.ORACLE_BUDGET * 2, max_elements=settings.FACTOR_TABLE_MAX,
                projective=False, norm_ceiling=settings.ORACLE_NORM_CEILING,
            )
            if not self.exact:
                self._table.stacked = np.array(self._table.elements, dtype=float)
        return self._table

    @property
    def enumerable(self) -> bool:
        """Finite factors and cyclic factors have complete enough tables to locate elements."""
        return self.rank <= 1 or self.table().closed

    def locate(self, matrix: np.ndarray) -> Optional[Letters]:
        """Shortlex-minimal word for matrix among the tabulated elements, or None."""
        table = self.table()
        if self.exact and mx.is_exact(matrix):
            idx = table.keys.get(mx.matrix_key(matrix))
            return None if idx is None else table.words[idx]
        target = mx.to_float(matrix)
        diff = np.max(np.abs(table.stacked - target), axis=(1, 2))
        hits = np.nonzero(diff <= settings.FLOAT_MATCH_TOL * max(1.0, float(np.max(np.abs(target)))))[0]
        return table.words[int(hits[0])] if len(hits) else None

    def canonical_word(self, word: Sequence[int]) -> Letters:
        """Free reduction, then the tabulated shortlex word when the factor is enumerable."""
        reduced = free_reduce(word)
        if len(reduced) <= 1 or not self.enumerable:
            return reduced
        located = self.locate(self.evaluate(reduced))
        return reduced if located is None else located

    def name_word(self, word: Sequence[int]) -> Tuple[Tuple[str, int], ...]:
        return tuple((self.names[abs(x) - 1], 1 if x > 0 else -1) for x in word)


class SubgroupOracle:
    """
    Decides membership in the subgroup of a factor generated by some words.

    Returns the membership witness as a word in the subgroup generators
    (signed 1-based indices into ``generator_words``), or None.

    Strategy:
      * a subgroup generated by the full generator set answers by relabelling;
      * the trivial subgroup answers by identity comparison;
      * otherwise the subgroup ball up to ``budget`` is enumerated. A closed
        ball is the whole (finite) subgroup. For an infinite cyclic subgroup an
        element absent from the ball whose norm is below every norm on the
        outermost sphere is not a member. Anything else raises
        MembershipUndecidable.
    """

    def __init__(self, factor: FactorGroup, generator_words: Sequence[Sequence[int]],
                 budget: Optional[int] = None, projective: Optional[bool] = None):
        self.factor = factor
        self.words: Tuple[Letters, ...] = tuple(free_reduce(w) for w in generator_words)
        self.budget = settings.ORACLE_BUDGET if budget is None else int(budget)
        self.projective = factor.projective if projective is None else projective
        self.matrices = tuple(factor.evaluate(w) for w in self.words)
        self._relabel = self._whole_factor_relabel()
        self._ball: Optional[BallEnumeration] = None
        self._frontier_norm: Optional[float] = None
        self._cache: Dict[Tuple, Optional[Letters]] = {}
        # coset representatives keyed by matrix, filled by words.coset_representative
        self.coset_reps: Dict[Tuple, Tuple[Letters, np.ndarray, Letters]] = {}

    def _whole_factor_relabel(self) -> Optional[Dict[int, int]]:
        rank = self.factor.rank
        if rank == 0 or len(self.words) < rank:
            return None
        relabel = {}
        for j, w in enumerate(self.words, start=1):
            if len(w) == 1:
                relabel.setdefault(abs(w[0]), j if w[0] > 0 else -j)
        if set(relabel) != set(range(1, rank + 1)):
            return None
        return relabel

    @property
    def is_whole_factor(self) -> bool:
        return self._relabel is not None

    @property
    def is_trivial(self) -> bool:
        return not self.words or all(mx.is_identity(m) for m in self.matrices)

    def embed(self, h_word: Sequence[int]) -> Letters:
        """Evaluate a subgroup word as a word in the factor generators."""
        out: List[int] = []
        for x in h_word:
            w = self.words[abs(x) - 1]
            out.extend(w if x > 0 else invert_word(w))
        return free_reduce(out)

    def _relabelled(self, word: Sequence[int]) -> Letters:
        out = []
        for x in word:
            j = self._relabel[abs(x)]
            out.append(j if x > 0 else -j)
        return free_reduce(out)

    def ball(self) -> BallEnumeration:
        if self._ball is None:
            letters = {}
            for j, m in enumerate(self.matrices, start=1):
                letters[j] = m
                letters[-j] = mx.inverse(m)
            self._ball = enumerate_ball(
                letters, self.factor.d, self.factor.exact, radius=self.budget,
                max_elements=settings.ORACLE_MAX_ELEMENTS, projective=self.projective,
                norm_ceiling=settings.ORACLE_NORM_CEILING,
            )
            if not self.factor.exact:
                self._ball.stacked = np.array(self._ball.elements, dtype=float)
            if not self._ball.closed and len(self.words) == 1:
                self._frontier_norm = self._cyclic_frontier_norm(self._ball)
            logger.debug("Subgroup ball of factor %s: %d elements, closed=%s",
                         self.factor.tag.value, len(self._ball.words), self._ball.closed)
        return self._ball

    @staticmethod
    def _cyclic_frontier_norm(ball: BallEnumeration) -> Optional[float]:
        # Norm certificate applies only if norms grow monotonically with |k|.
        by_length: Dict[int, float] = {}
        for w, m in zip(ball.words, ball.elements):
            n = mx.frobenius_norm(m)
            by_length[len(w)] = min(n, by_length.get(len(w), np.inf))
        lengths = sorted(by_length)
        tail = [by_length[k] for k in lengths[-4:]]
        if len(tail) < 2 or any(b < a for a, b in zip(tail, tail[1:])):
            return None
        return by_length[lengths[-1]]

    def _lookup(self, matrix: np.ndarray) -> Optional[Letters]:
        ball = self.ball()
        if self.factor.exact and mx.is_exact(matrix):
            idx = ball.keys.get(mx.matrix_key(matrix))
            if idx is None and self.projective:
                idx = ball.keys.get(mx.matrix_key(-matrix))
            return None if idx is None else ball.words[idx]
        target = mx.to_float(matrix)
        tol = settings.FLOAT_MATCH_TOL * max(1.0, float(np.max(np.abs(target))))
        with np.errstate(over="ignore", invalid="ignore"):
            diff = np.max(np.abs(ball.stacked - target), axis=(1, 2))
            if self.projective:
                diff = np.minimum(diff, np.max(np.abs(ball.stacked + target), axis=(1, 2)))
        hits = np.nonzero(diff <= tol)[0]
        return ball.words[int(hits[0])] if len(hits) else None

    def contains(self, matrix: np.ndarray, word: Optional[Sequence[int]] = None) -> Optional[Letters]:
        """
        Membership witness for an element of the factor.

        Args:
            matrix: the element.
            word: optional factor word for the element (used by whole-factor subgroups).

        Returns:
            Subgroup word evaluating to the element, or None if it is not a member.

        Raises:
            MembershipUndecidable: if the search budget gives no verdict.
        """
        if self.is_whole_factor:
            if word is None:
                word = self.factor.locate(matrix)
                if word is None:
                    raise MembershipUndecidable(
                        f"element of factor {self.factor.tag.value} could not be located for relabelling")
            return self._relabelled(word)
        if not self.words:
            return () if mx.is_identity(matrix, projective=self.projective) else None
        cache_key = mx.matrix_key(matrix) if mx.is_exact(matrix) else None
        if cache_key is not None and cache_key in self._cache:
            return self._cache[cache_key]
        found = self._lookup(matrix)
        if found is None and not self.ball().closed:
            bound = self._frontier_norm
            if bound is None or not mx.frobenius_norm(matrix) < bound:
                raise MembershipUndecidable(
                    f"membership in subgroup of factor {self.factor.tag.value} undecided "
                    f"within budget {self.budget}")
        if cache_key is not None:
            self._cache[cache_key] = found
        return found


def _check_consistent(lhs: np.ndarray, rhs: np.ndarray, projective: bool, what: str) -> None:
    if not mx.matrices_equal(lhs, rhs, projective=projective):
        raise PresentationInvalid(f"{what} do not evaluate to the same matrix")


class AmalgamPresentation:
    """
    Gamma_A *_H Gamma_B with H given by paired generator words phi_A(eta), phi_B(eta).
    """
    kind = "amalgam"

    def __init__(self, factor_a: FactorGroup, factor_b: FactorGroup,
                 edge_words_a: Sequence[Sequence[int]], edge_words_b: Sequence[Sequence[int]],
                 budget: Optional[int] = None, projective: bool = False):
        if factor_a.d != factor_b.d:
            raise PresentationInvalid("factors act in different dimensions")
        if len(edge_words_a) != len(edge_words_b):
            raise PresentationInvalid("edge embeddings list different numbers of generators")
        self.factors = {FactorTag.A: factor_a, FactorTag.B: factor_b}
        self.d = factor_a.d
        self.exact = factor_a.exact and factor_b.exact
        self.projective = projective
        self.oracles = {
            FactorTag.A: SubgroupOracle(factor_a, edge_words_a, budget, projective),
            FactorTag.B: SubgroupOracle(factor_b, edge_words_b, budget, projective),
        }
        for i, (ma, mb) in enumerate(zip(self.oracles[FactorTag.A].matrices, self.oracles[FactorTag.B].matrices)):
            _check_consistent(ma, mb, projective, f"edge generator {i + 1} embeddings")

    @property
    def tags(self) -> Tuple[FactorTag, FactorTag]:
        return (FactorTag.A, FactorTag.B)

    @property
    def edge_rank(self) -> int:
        return len(self.oracles[FactorTag.A].words)

    def identity(self) -> np.ndarray:
        return mx.identity(self.d, self.exact)

    def embed(self, tag: FactorTag, h_word: Sequence[int]) -> Letters:
        return self.oracles[tag].embed(h_word)

    def edge_matrix(self, i: int) -> np.ndarray:
        return self.oracles[FactorTag.A].matrices[i]


class HnnPresentation:
    """
    M *_phi with stable letter f and f * eta * f^-1 = phi(eta) for eta in H_-.

    ``minus_words[i]`` and ``plus_words[i]`` are the M-words of the i-th generator
    of H_- and of its image phi of it in H_+.
    """
    kind = "hnn"

    def __init__(self, factor_m: FactorGroup, stable: np.ndarray,
                 minus_words: Sequence[Sequence[int]], plus_words: Sequence[Sequence[int]],
                 stable_name: str = "f", budget: Optional[int] = None, projective: bool = False):
        if len(minus_words) != len(plus_words):
            raise PresentationInvalid("H_- and H_+ list different numbers of generators")
        self.factor = factor_m
        self.factors = {FactorTag.M: factor_m}
        self.d = factor_m.d
        self.exact = factor_m.exact and mx.is_exact(stable)
        self.stable = stable if self.exact else mx.to_float(stable)
        self.stable_inverse = mx.inverse(self.stable)
        self.stable_name = stable_name
        self.projective = projective
        self.minus = SubgroupOracle(factor_m, minus_words, budget, projective)
        self.plus = SubgroupOracle(factor_m, plus_words, budget, projective)
        for i, (hm, hp) in enumerate(zip(self.minus.matrices, self.plus.matrices)):
            conj = self.stable @ hm @ self.stable_inverse
            _check_consistent(conj, hp, projective, f"f * eta_{i + 1} * f^-1 and phi(eta_{i + 1})")

    @property
    def tags(self) -> Tuple[FactorTag, ...]:
        return (FactorTag.M,)

    def identity(self) -> np.ndarray:
        return mx.identity(self.d, self.exact)

    def stable_matrix(self, exponent: int) -> np.ndarray:
        return self.stable if exponent > 0 else self.stable_inverse

    def oracle_for(self, sign: int) -> SubgroupOracle:
        """H_+ for sign +1, H_- for sign -1."""
        return self.plus if sign > 0 else self.minus
