"""
Letter-level word utilities.

A generator word is a tuple of signed, 1-based generator indices: ``(1, -2)``
means ``g1 * g2^-1``. Shortlex order ranks shorter words first, then compares
letters by generator index with a generator placed before its inverse.
"""
import re
from typing import Iterator, List, Sequence, Tuple

Letters = Tuple[int, ...]

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")


def free_reduce(word: Sequence[int]) -> Letters:
    out: List[int] = []
    for x in word:
        if x == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_word(word: Sequence[int]) -> Letters:
    return tuple(-x for x in reversed(word))


def letter_key(x: int) -> Tuple[int, bool]:
    return (abs(x), x < 0)


def shortlex_key(word: Sequence[int]) -> Tuple[int, List[Tuple[int, bool]]]:
    return (len(word), [letter_key(x) for x in word])


def alphabet(rank: int) -> Letters:
    """Letters of a free basis of the given rank in shortlex order: 1, -1, 2, -2, ..."""
    return tuple(x for i in range(1, rank + 1) for x in (i, -i))


def reduced_words(rank: int, max_length: int, min_length: int = 0) -> Iterator[Letters]:
    """All freely reduced words up to max_length, in shortlex order."""
    letters = alphabet(rank)
    layer: List[Letters] = [()]
    if min_length == 0:
        yield ()
    for length in range(1, max_length + 1):
        nxt = []
        for w in layer:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        layer = nxt
        if length >= min_length:
            yield from layer


def power(word: Sequence[int], k: int) -> Letters:
    base = tuple(word) if k >= 0 else invert_word(word)
    return free_reduce(base * abs(k))


def parse_name_word(text: str) -> Tuple[Tuple[str, int], ...]:
    """
    Parse "a1 b1 a1^-1 b1^-1" into ((name, exponent), ...).

    Exponents may be any integer; "x^0" is dropped.
    """
    out = []
    for token in text.replace("*", " ").split():
        match = _TOKEN.match(token)
        if not match:
            raise ValueError(f"cannot parse word token {token!r}")
        name, exp = match.group(1), int(match.group(2) or 1)
        if exp != 0:
            out.append((name, exp))
    return tuple(out)


def format_name_word(pairs: Sequence[Tuple[str, int]]) -> str:
    return " ".join(name if exp == 1 else f"{name}^{exp}" for name, exp in pairs)
