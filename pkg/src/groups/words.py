"""
Syllable words, normal forms and relative length for amalgamated products and
HNN extensions of matrix groups.

Reduction is a single left-to-right stack pass (leftmost-innermost): adjacent
syllables of one factor merge, syllables in the edge group are absorbed into
their left neighbour, and HNN pinches are removed as soon as they appear on
top of the stack.
"""
import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config.settings import settings
from src.config.logging_config import setup_logging
from src.core.errors import FactorMismatch, LetterRejected
from src.core.types import FactorTag
from src.groups import matrices as mx
from src.groups.alphabet import Letters, free_reduce, invert_word, parse_name_word, reduced_words, shortlex_key
from src.groups.presentations import AmalgamPresentation, FactorGroup, HnnPresentation, SubgroupOracle

logger = setup_logging(__name__)

Presentation = Union[AmalgamPresentation, HnnPresentation]


@dataclass(frozen=True)
class Syllable:
    """One letter of a splitting word: a factor element given by a generator word, or f^{+-1}."""
    factor: FactorTag
    word: Letters
    matrix: np.ndarray = field(compare=False, repr=False)

    @property
    def is_stable(self) -> bool:
        return self.factor is FactorTag.STABLE

    @property
    def exponent(self) -> int:
        if not self.is_stable:
            raise FactorMismatch("only stable-letter syllables carry an exponent")
        return self.word[0]

    def to_json(self) -> dict:
        if self.is_stable:
            return {"factor": self.factor.value, "exponent": self.exponent}
        return {"factor": self.factor.value, "word": list(self.word)}


@dataclass(frozen=True)
class Word:
    syllables: Tuple[Syllable, ...]
    presentation: Presentation = field(compare=False, repr=False)

    def matrix(self) -> np.ndarray:
        return evaluate_syllables(self.presentation, self.syllables)

    def inverse(self) -> "Word":
        return Word(_invert_syllables(self.presentation, self.syllables), self.presentation)

    def __add__(self, other: "Word") -> "Word":
        return Word(self.syllables + other.syllables, self.presentation)

    def to_json(self) -> list:
        return [s.to_json() for s in self.syllables]


@dataclass(frozen=True)
class NormalForm:
    """
    Reduced syllable sequence with its relative length.

    Amalgam: alternating factors, no syllable in H unless the form is a single
    H-syllable (rl = 0). HNN: M-syllables and stable letters without Britton
    pinches; identity M-syllables are omitted.
    """
    syllables: Tuple[Syllable, ...]
    rl: int
    presentation: Presentation = field(compare=False, repr=False)

    def matrix(self) -> np.ndarray:
        return evaluate_syllables(self.presentation, self.syllables)

    def as_word(self) -> Word:
        return Word(self.syllables, self.presentation)

    def inverse(self) -> "NormalForm":
        return NormalForm(_invert_syllables(self.presentation, self.syllables), self.rl, self.presentation)

    def key(self) -> Tuple:
        return tuple((s.factor.value, s.word) for s in self.syllables)

    def to_json(self) -> dict:
        return {"rl": self.rl, "syllables": [s.to_json() for s in self.syllables]}


# ----------------------------------------------------------------
# Construction and evaluation
# ----------------------------------------------------------------

def _factor(p: Presentation, tag: FactorTag) -> FactorGroup:
    try:
        return p.factors[tag]
    except KeyError:
        raise FactorMismatch(f"factor {tag.value} does not occur in a {p.kind} presentation")


def make_syllable(p: Presentation, tag: FactorTag, word: Sequence[int]) -> Syllable:
    if tag is FactorTag.STABLE:
        if not isinstance(p, HnnPresentation):
            raise FactorMismatch("stable letters only occur in HNN words")
        if len(word) != 1 or word[0] not in (1, -1):
            raise FactorMismatch("a stable-letter syllable is f or f^-1")
        return Syllable(tag, (int(word[0]),), p.stable_matrix(word[0]))
    factor = _factor(p, tag)
    reduced = free_reduce(word)
    return Syllable(tag, reduced, factor.evaluate(reduced))


def stable_syllable(p: HnnPresentation, exponent: int) -> Syllable:
    return make_syllable(p, FactorTag.STABLE, (exponent,))


def syllable_from_matrix(p: Presentation, tag: FactorTag, matrix: np.ndarray) -> Syllable:
    """Locate a matrix in a tabulated factor; FactorMismatch if it is not found there."""
    factor = _factor(p, tag)
    word = factor.locate(matrix)
    if word is None:
        raise FactorMismatch(f"matrix is not generated by factor {tag.value} within its table")
    return Syllable(tag, word, factor.evaluate(word))


def make_word(p: Presentation, parts: Sequence[Tuple[FactorTag, Sequence[int]]]) -> Word:
    return Word(tuple(make_syllable(p, tag, w) for tag, w in parts), p)


def evaluate_syllables(p: Presentation, syllables: Sequence[Syllable]) -> np.ndarray:
    out = p.identity()
    for s in syllables:
        out = out @ s.matrix
    return out


def _invert_syllable(p: Presentation, s: Syllable) -> Syllable:
    if s.is_stable:
        return stable_syllable(p, -s.exponent)
    factor = _factor(p, s.factor)
    return Syllable(s.factor, factor.canonical_word(invert_word(s.word)), mx.inverse(s.matrix))


def _invert_syllables(p: Presentation, syllables: Sequence[Syllable]) -> Tuple[Syllable, ...]:
    return tuple(_invert_syllable(p, s) for s in reversed(syllables))


def _merge(p: Presentation, left: Syllable, right: Syllable) -> Syllable:
    factor = _factor(p, left.factor)
    return Syllable(left.factor, factor.canonical_word(left.word + right.word), left.matrix @ right.matrix)


def _identity_syllable(p: Presentation, tag: FactorTag) -> Syllable:
    return Syllable(tag, (), _factor(p, tag).identity())


def _embedded(p: Presentation, tag: FactorTag, oracle: SubgroupOracle, h_word: Sequence[int]) -> Syllable:
    factor = _factor(p, tag)
    word = factor.canonical_word(oracle.embed(h_word))
    return Syllable(tag, word, factor.evaluate(word))


# ----------------------------------------------------------------
# Parsing and JSON
# ----------------------------------------------------------------

def parse_word(p: Presentation, text: str) -> Word:
    """
    Parse generator names, e.g. "S U S^-1" or "f a^2 f^-1".

    Consecutive letters of one factor form one syllable.
    """
    parts: List[Tuple[FactorTag, List[int]]] = []
    for name, exp in parse_name_word(text):
        if isinstance(p, HnnPresentation) and name == p.stable_name:
            for _ in range(abs(exp)):
                parts.append((FactorTag.STABLE, [1 if exp > 0 else -1]))
            continue
        owners = [tag for tag, f in p.factors.items() if name in f.names]
        if len(owners) != 1:
            raise FactorMismatch(f"generator {name!r} matches {len(owners)} factors")
        tag = owners[0]
        idx = p.factors[tag].index_of(name)
        letters = [idx if exp > 0 else -idx] * abs(exp)
        if parts and parts[-1][0] is tag:
            parts[-1][1].extend(letters)
        else:
            parts.append((tag, letters))
    return make_word(p, parts)


def word_from_json(p: Presentation, data: Sequence[dict]) -> Word:
    parts = []
    for item in data:
        tag = FactorTag(item["factor"])
        if tag is FactorTag.STABLE:
            parts.append((tag, (int(item["exponent"]),)))
        else:
            parts.append((tag, tuple(int(x) for x in item.get("word", []))))
    return make_word(p, parts)


def word_to_json(w: Union[Word, NormalForm]) -> list:
    return [s.to_json() for s in w.syllables]


# ----------------------------------------------------------------
# Amalgamated products
# ----------------------------------------------------------------

def amalgam_normal_form(w: Word, p: AmalgamPresentation, order: str = "leftmost") -> NormalForm:
    """
    Normal form of an amalgam word.

    Args:
        w: word over p.
        p: the presentation.
        order: "leftmost" stack reduction, or "rightmost" (reduce the inverse
            word and invert the result); both yield the same element and rl.

    Raises:
        MembershipUndecidable: if an edge-group oracle gives no verdict.
        FactorMismatch: if a syllable does not belong to an amalgam factor.
    """
    if order == "rightmost":
        return _amalgam_leftmost(_invert_syllables(p, w.syllables), p).inverse()
    if order != "leftmost":
        raise ValueError(f"unknown rewriting order {order!r}")
    return _amalgam_leftmost(w.syllables, p)


def _amalgam_leftmost(syllables: Sequence[Syllable], p: AmalgamPresentation) -> NormalForm:
    stack: List[Syllable] = []
    prefix: Letters = ()
    for s in syllables:
        if s.factor not in (FactorTag.A, FactorTag.B):
            raise FactorMismatch(f"syllable of {s.factor.value} in an amalgam word")
        cur = s
        if stack and stack[-1].factor is cur.factor:
            cur = _merge(p, stack.pop(), cur)
        oracle = p.oracles[cur.factor]
        h = oracle.contains(cur.matrix, cur.word)
        if h is not None:
            if stack:
                top = stack.pop()
                stack.append(_merge(p, top, _embedded(p, top.factor, p.oracles[top.factor], h)))
            else:
                prefix = free_reduce(prefix + h)
            continue
        if not stack and prefix:
            cur = _merge(p, _embedded(p, cur.factor, oracle, prefix), cur)
            prefix = ()
        stack.append(cur)
    if stack:
        return NormalForm(tuple(stack), len(stack), p)
    if prefix:
        h_syl = _embedded(p, FactorTag.A, p.oracles[FactorTag.A], prefix)
        if not mx.is_identity(h_syl.matrix):
            return NormalForm((h_syl,), 0, p)
    return NormalForm((), 0, p)


# ----------------------------------------------------------------
# HNN extensions
# ----------------------------------------------------------------

def hnn_britton_reduce(w: Word, p: HnnPresentation, order: str = "leftmost") -> NormalForm:
    """
    Britton reduction: remove every pinch f^-1 (H_+) f and f (H_-) f^-1.

    The replacement of a pinch is read off the membership witness:
    f^-1 phi(eta) f = eta and f eta f^-1 = phi(eta).
    """
    if order == "rightmost":
        return _britton_leftmost(_invert_syllables(p, w.syllables), p).inverse()
    if order != "leftmost":
        raise ValueError(f"unknown rewriting order {order!r}")
    return _britton_leftmost(w.syllables, p)


def _britton_leftmost(syllables: Sequence[Syllable], p: HnnPresentation) -> NormalForm:
    mus: List[Syllable] = [_identity_syllable(p, FactorTag.M)]
    eps: List[int] = []
    for s in syllables:
        if s.factor is FactorTag.M:
            mus[-1] = _merge(p, mus[-1], s)
            continue
        if not s.is_stable:
            raise FactorMismatch(f"syllable of {s.factor.value} in an HNN word")
        e = s.exponent
        if eps and eps[-1] == -e:
            mu = mus[-1]
            source, target = (p.plus, p.minus) if e > 0 else (p.minus, p.plus)
            h = source.contains(mu.matrix, mu.word)
            if h is not None:
                mus.pop()
                eps.pop()
                mus[-1] = _merge(p, mus[-1], _embedded(p, FactorTag.M, target, h))
                continue
        eps.append(e)
        mus.append(_identity_syllable(p, FactorTag.M))
    return assemble_hnn(p, mus, eps)


def assemble_hnn(p: HnnPresentation, mus: Sequence[Syllable], eps: Sequence[int]) -> NormalForm:
    """Interleave mu_0..mu_n with f^{eps_i}, omitting identity M-syllables."""
    out: List[Syllable] = []
    for i, e in enumerate(eps):
        if mus[i].word:
            out.append(mus[i])
        out.append(stable_syllable(p, e))
    if mus[len(eps)].word:
        out.append(mus[len(eps)])
    return NormalForm(tuple(out), len(eps), p)


def hnn_parts(nf: Union[NormalForm, Word]) -> Tuple[List[Syllable], List[int]]:
    """Split an HNN word into (mu_0..mu_n, eps_1..eps_n), inserting identity M-syllables."""
    p = nf.presentation
    mus = [_identity_syllable(p, FactorTag.M)]
    eps: List[int] = []
    for s in nf.syllables:
        if s.is_stable:
            eps.append(s.exponent)
            mus.append(_identity_syllable(p, FactorTag.M))
        else:
            mus[-1] = _merge(p, mus[-1], s) if mus[-1].word else s
    return mus, eps


# ----------------------------------------------------------------
# Dispatch, validation, rl
# ----------------------------------------------------------------

def normal_form(w: Word, order: str = "leftmost") -> NormalForm:
    p = w.presentation
    if isinstance(p, AmalgamPresentation):
        return amalgam_normal_form(w, p, order)
    return hnn_britton_reduce(w, p, order)


def relative_length(nf: NormalForm) -> int:
    """Syllable count for amalgams, stable-letter count for HNN extensions."""
    return nf.rl


def is_normal_form(nf: NormalForm) -> bool:
    """Check the alternation / Britton conditions and the recorded rl without reducing."""
    p = nf.presentation
    if isinstance(p, AmalgamPresentation):
        syl = nf.syllables
        if any(s.factor not in (FactorTag.A, FactorTag.B) for s in syl):
            return False
        if len(syl) == 0:
            return nf.rl == 0
        in_h = [p.oracles[s.factor].contains(s.matrix, s.word) is not None for s in syl]
        if len(syl) == 1 and in_h[0]:
            return nf.rl == 0
        if any(in_h):
            return False
        if any(a.factor is b.factor for a, b in zip(syl, syl[1:])):
            return False
        return nf.rl == len(syl)
    mus, eps = hnn_parts(nf)
    if nf.rl != len(eps):
        return False
    for i in range(1, len(eps)):
        mu = mus[i]
        if eps[i - 1] == -1 and eps[i] == 1 and p.plus.contains(mu.matrix, mu.word) is not None:
            return False
        if eps[i - 1] == 1 and eps[i] == -1 and p.minus.contains(mu.matrix, mu.word) is not None:
            return False
    return True


# ----------------------------------------------------------------
# Coset transversals and transversal normal forms
# ----------------------------------------------------------------

def _located_length(factor: FactorGroup, m: np.ndarray) -> Optional[int]:
    w = factor.locate(m)
    return None if w is None else len(w)


def coset_representative(factor: FactorGroup, oracle: SubgroupOracle, matrix: np.ndarray,
                         word: Sequence[int] = ()) -> Tuple[Letters, np.ndarray, Letters]:
    """
    Shortlex-minimal representative t of the left coset matrix * H.

    Returns:
        (t_word, t_matrix, h_word) with matrix = t * h and h_word a word in the
        subgroup generators.
    """
    word = free_reduce(word)
    if oracle.is_whole_factor:
        return (), factor.identity(), oracle.contains(matrix, word or None)
    if oracle.is_trivial:
        w = factor.canonical_word(word) if word else (factor.locate(matrix) or ())
        return w, matrix, ()
    cache_key = mx.matrix_key(matrix) if mx.is_exact(matrix) else None
    if cache_key is not None and cache_key in oracle.coset_reps:
        return oracle.coset_reps[cache_key]
    own = factor.locate(matrix) if factor.enumerable else None
    best_word: Letters = own if own is not None else word
    best_matrix, best_h = matrix, ()
    limit = 2 * len(best_word)
    ball = oracle.ball()
    for h_word, h_matrix in zip(ball.words, ball.elements):
        if not h_word:
            continue
        h_len = _located_length(factor, h_matrix) if factor.enumerable else None
        if h_len is None or h_len > limit:
            continue
        cand = matrix @ h_matrix
        cand_word = factor.locate(cand)
        if cand_word is not None and shortlex_key(cand_word) < shortlex_key(best_word):
            best_word, best_matrix, best_h = cand_word, cand, invert_word(h_word)
    result = (best_word, best_matrix, best_h)
    if cache_key is not None:
        oracle.coset_reps[cache_key] = result
    return result


def coset_transversal(factor: FactorGroup, oracle: SubgroupOracle,
                      radius: Optional[int] = None) -> List[Letters]:
    """Shortlex-first representatives of the left cosets of H met by the factor ball of the given radius."""
    radius = settings.TRANSVERSAL_RADIUS if radius is None else radius
    table = factor.table()
    reps: List[Tuple[Letters, np.ndarray]] = []
    for w, m in zip(table.words, table.elements):
        if len(w) > radius:
            break
        if any(oracle.contains(mx.inverse(tm) @ m) is not None for _, tm in reps):
            continue
        reps.append((w, m))
    return [w for w, _ in reps]


def canonical_form(nf: NormalForm) -> NormalForm:
    """
    Transversal normal form: every syllable but the last is the shortlex coset
    representative (modulo H, or modulo H_+ before f and H_- before f^-1), the
    remainder being pushed right.
    """
    p = nf.presentation
    if nf.rl == 0:
        return nf
    if isinstance(p, AmalgamPresentation):
        return _canonical_amalgam(nf, p)
    return _canonical_hnn(nf, p)


def _canonical_amalgam(nf: NormalForm, p: AmalgamPresentation) -> NormalForm:
    out: List[Syllable] = []
    carry: Letters = ()
    last = len(nf.syllables) - 1
    for i, s in enumerate(nf.syllables):
        factor, oracle = p.factors[s.factor], p.oracles[s.factor]
        word = factor.canonical_word(oracle.embed(carry) + s.word)
        m = factor.evaluate(word)
        if i == last:
            out.append(Syllable(s.factor, word, m))
            break
        t_word, t_matrix, carry = coset_representative(factor, oracle, m, word)
        out.append(Syllable(s.factor, t_word, t_matrix))
    return NormalForm(tuple(out), nf.rl, p)


def _canonical_hnn(nf: NormalForm, p: HnnPresentation) -> NormalForm:
    mus, eps = hnn_parts(nf)
    factor = p.factor
    new_mus: List[Syllable] = []
    carry_word: Letters = ()
    for i, e in enumerate(eps):
        word = factor.canonical_word(carry_word + mus[i].word)
        oracle = p.plus if e > 0 else p.minus
        t_word, t_matrix, h = coset_representative(factor, oracle, factor.evaluate(word), word)
        new_mus.append(Syllable(FactorTag.M, t_word, t_matrix))
        # h f = f (f^-1 h f) for h in H_+, h f^-1 = f^-1 phi(h) for h in H_-
        carry_word = (p.minus if e > 0 else p.plus).embed(h)
    word = factor.canonical_word(carry_word + mus[-1].word)
    new_mus.append(Syllable(FactorTag.M, word, factor.evaluate(word)))
    return assemble_hnn(p, new_mus, eps)


# ----------------------------------------------------------------
# Alternating sequences
# ----------------------------------------------------------------

@dataclass
class SequenceSpec:
    """
    Letter source for alternating sequences.

    kind is "A", "B" (amalgam, first letter from that factor) or "HNN".
    Explicit letter lists are cycled; missing lists are filled by a seeded
    generator drawing words of length <= letter_length.
    """
    kind: str
    alphas: Optional[List[Letters]] = None
    betas: Optional[List[Letters]] = None
    mus: Optional[List[Letters]] = None
    epsilons: Optional[List[int]] = None
    seed: int = 0
    letter_length: int = 1


def _letter_pool(factor: FactorGroup, max_length: int, include_identity: bool) -> List[Letters]:
    return [w for w in reduced_words(factor.rank, max_length) if w or include_identity]


def alternating_sequence(spec: SequenceSpec, n: int, p: Presentation) -> List[NormalForm]:
    """
    Prefixes omega_1..omega_n of one infinite alternating string.

    Amalgam: alpha_1 beta_1 alpha_2 ... (type A) or beta_1 alpha_1 ... (type B).
    HNN: omega_k = mu_0 f^{e_1} mu_1 ... mu_{k-1} f^{e_k}, subject to
    "e_i = -1 and mu_i in H_+ forces e_{i+1} = -1" and the mirror rule for H_-.

    Raises:
        LetterRejected: an explicit letter lies in the edge group or breaks a sign rule.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind in ("A", "B"):
        if not isinstance(p, AmalgamPresentation):
            raise LetterRejected(f"type {spec.kind} sequences need an amalgam presentation")
        return _alternating_amalgam(spec, n, p, rng)
    if spec.kind == "HNN":
        if not isinstance(p, HnnPresentation):
            raise LetterRejected("HNN sequences need an HNN presentation")
        return _alternating_hnn(spec, n, p, rng)
    raise LetterRejected(f"unknown sequence type {spec.kind!r}")


def _alternating_amalgam(spec, n, p: AmalgamPresentation, rng) -> List[NormalForm]:
    first = FactorTag(spec.kind)
    sources = {FactorTag.A: spec.alphas, FactorTag.B: spec.betas}
    pools: Dict[FactorTag, List[Letters]] = {}
    counters = {FactorTag.A: 0, FactorTag.B: 0}
    letters: List[Syllable] = []
    tag = first
    for i in range(n):
        explicit = sources[tag]
        if explicit:
            word = tuple(explicit[counters[tag] % len(explicit)])
            syl = make_syllable(p, tag, word)
            if p.oracles[tag].contains(syl.matrix, syl.word) is not None:
                raise LetterRejected(f"letter {i + 1} ({tag.value}, {word}) lies in the edge group", i)
        else:
            if tag not in pools:
                pools[tag] = [w for w in _letter_pool(p.factors[tag], spec.letter_length, False)
                              if p.oracles[tag].contains(p.factors[tag].evaluate(w), w) is None]
                if not pools[tag]:
                    raise LetterRejected(f"factor {tag.value} has no letters outside the edge group", i)
            syl = make_syllable(p, tag, pools[tag][int(rng.integers(len(pools[tag])))])
        counters[tag] += 1
        letters.append(syl)
        tag = tag.other
    return [NormalForm(tuple(letters[:k]), k, p) for k in range(1, n + 1)]


def _alternating_hnn(spec, n, p: HnnPresentation, rng) -> List[NormalForm]:
    factor = p.factor
    pool = None
    mus: List[Syllable] = []
    eps: List[int] = []
    for i in range(n):
        if spec.mus:
            mu = make_syllable(p, FactorTag.M, spec.mus[i % len(spec.mus)])
            e = int(spec.epsilons[i % len(spec.epsilons)]) if spec.epsilons else 1
            if e not in (1, -1):
                raise LetterRejected(f"exponent {e} at position {i + 1} is not +-1", i)
            if i > 0 and not _britton_step_ok(p, eps[-1], mu, e):
                raise LetterRejected(f"letter {i + 1} creates a pinch after f^{eps[-1]}", i)
        else:
            if pool is None:
                pool = _letter_pool(factor, spec.letter_length, True)
            for _ in range(256):
                mu = make_syllable(p, FactorTag.M, pool[int(rng.integers(len(pool)))])
                e = int(spec.epsilons[i % len(spec.epsilons)]) if spec.epsilons else int(rng.choice((1, -1)))
                if i == 0 or _britton_step_ok(p, eps[-1], mu, e):
                    break
            else:
                raise LetterRejected(f"no admissible letter found at position {i + 1}", i)
        mus.append(mu)
        eps.append(e)
    out = []
    for k in range(1, n + 1):
        syl: List[Syllable] = []
        for mu, e in zip(mus[:k], eps[:k]):
            if mu.word:
                syl.append(mu)
            syl.append(stable_syllable(p, e))
        out.append(NormalForm(tuple(syl), k, p))
    return out


def _britton_step_ok(p: HnnPresentation, prev: int, mu: Syllable, nxt: int) -> bool:
    if prev == -1 and nxt == 1:
        return p.plus.contains(mu.matrix, mu.word or None) is None
    if prev == 1 and nxt == -1:
        return p.minus.contains(mu.matrix, mu.word or None) is None
    return True


# ----------------------------------------------------------------
# Enumeration
# ----------------------------------------------------------------

def enumerate_normal_forms(p: Presentation, max_rl: int,
                           letters: Optional[Dict[FactorTag, Sequence[Sequence[int]]]] = None,
                           last_radius: int = 1) -> Iterator[NormalForm]:
    """
    All normal forms with 1 <= rl <= max_rl, by increasing rl.

    Without ``letters`` the forms are transversal normal forms (each element
    exactly once): inner syllables run over coset transversals and the last
    syllable over factor elements of word length <= last_radius.
    With ``letters`` (factor tag -> generator words) every position draws from
    those lists; words that would break the normal-form conditions are skipped.
    """
    if isinstance(p, AmalgamPresentation):
        yield from _enumerate_amalgam(p, max_rl, letters, last_radius)
    else:
        yield from _enumerate_hnn(p, max_rl, letters, last_radius)


def _ball_words(factor: FactorGroup, radius: int) -> List[Letters]:
    if factor.enumerable:
        return [w for w in factor.table().words if len(w) <= radius]
    return list(reduced_words(factor.rank, radius))


def _enumerate_amalgam(p: AmalgamPresentation, max_rl, letters, last_radius) -> Iterator[NormalForm]:
    inner: Dict[FactorTag, List[Syllable]] = {}
    last: Dict[FactorTag, List[Syllable]] = {}
    for tag in p.tags:
        factor, oracle = p.factors[tag], p.oracles[tag]
        if letters is not None:
            syls = [make_syllable(p, tag, w) for w in letters.get(tag, [])]
            syls = [s for s in syls if oracle.contains(s.matrix, s.word) is None]
            inner[tag] = last[tag] = syls
        else:
            inner[tag] = [make_syllable(p, tag, w) for w in coset_transversal(factor, oracle) if w]
            cands = [make_syllable(p, tag, w) for w in _ball_words(factor, last_radius) if w]
            last[tag] = [s for s in cands if oracle.contains(s.matrix, s.word) is None]
    for l in range(1, max_rl + 1):
        for first in p.tags:
            tags = [first if i % 2 == 0 else first.other for i in range(l)]
            pools = [inner[t] for t in tags[:-1]] + [last[tags[-1]]]
            for combo in itertools.product(*pools):
                yield NormalForm(tuple(combo), l, p)


def _enumerate_hnn(p: HnnPresentation, max_rl, letters, last_radius) -> Iterator[NormalForm]:
    factor = p.factor
    if letters is not None:
        pool = [make_syllable(p, FactorTag.M, w) for w in letters.get(FactorTag.M, [])]
        if not any(not s.word for s in pool):
            pool = [_identity_syllable(p, FactorTag.M)] + pool
        before = {1: pool, -1: pool}
        lasts = pool
    else:
        before = {
            1: [make_syllable(p, FactorTag.M, w) for w in coset_transversal(factor, p.plus)],
            -1: [make_syllable(p, FactorTag.M, w) for w in coset_transversal(factor, p.minus)],
        }
        lasts = [make_syllable(p, FactorTag.M, w) for w in _ball_words(factor, last_radius)]
    in_plus = {s.word: p.plus.contains(s.matrix, s.word or None) is not None for s in before[1] + before[-1]}
    in_minus = {s.word: p.minus.contains(s.matrix, s.word or None) is not None for s in before[1] + before[-1]}
    for n in range(1, max_rl + 1):
        for eps in itertools.product((1, -1), repeat=n):
            pools = [before[e] for e in eps] + [lasts]
            for combo in itertools.product(*pools):
                ok = True
                for i in range(1, n):
                    mu = combo[i]
                    if eps[i - 1] == -1 and eps[i] == 1 and in_plus[mu.word]:
                        ok = False
                        break
                    if eps[i - 1] == 1 and eps[i] == -1 and in_minus[mu.word]:
                        ok = False
                        break
                if ok:
                    yield assemble_hnn(p, list(combo), list(eps))
