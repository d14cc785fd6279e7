"""
Exact and floating matrix helpers.

Exact matrices are numpy object arrays of ``fractions.Fraction``; floating
matrices are ``float64`` arrays. Every group-theoretic routine accepts both
and only asks this module whether two elements agree.
"""
from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
import sympy

from src.config.settings import settings

Entry = Union[int, float, str, Fraction]


def parse_entry(value: Entry) -> Union[Fraction, float]:
    """Integers, "p/q" strings and decimal strings become Fractions; floats stay floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a matrix entry")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        return float(value)
    raise ValueError(f"unsupported matrix entry {value!r}")


def as_matrix(rows: Sequence[Sequence[Entry]]) -> np.ndarray:
    """Build an exact matrix when every entry is rational, a float matrix otherwise."""
    parsed = [[parse_entry(x) for x in row] for row in rows]
    n = len(parsed)
    if n == 0 or any(len(row) != n for row in parsed):
        raise ValueError("matrix must be square and nonempty")
    if all(isinstance(x, Fraction) for row in parsed for x in row):
        out = np.empty((n, n), dtype=object)
        for i, row in enumerate(parsed):
            for j, x in enumerate(row):
                out[i, j] = x
        return out
    return np.array([[float(x) for x in row] for row in parsed], dtype=float)


def is_exact(m: np.ndarray) -> bool:
    return m.dtype == object


def identity(d: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((d, d), dtype=object)
        for i in range(d):
            for j in range(d):
                out[i, j] = Fraction(int(i == j))
        return out
    return np.eye(d)


def to_float(m: np.ndarray) -> np.ndarray:
    return m.astype(float) if is_exact(m) else np.asarray(m, dtype=float)


def inverse(m: np.ndarray) -> np.ndarray:
    if not is_exact(m):
        return np.linalg.inv(m)
    if m.shape == (2, 2):
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det == 0:
            raise ZeroDivisionError("singular exact matrix")
        out = np.empty((2, 2), dtype=object)
        out[0, 0], out[0, 1] = m[1, 1] / det, -m[0, 1] / det
        out[1, 0], out[1, 1] = -m[1, 0] / det, m[0, 0] / det
        return out
    inv = sympy.Matrix(m.tolist()).inv()
    d = m.shape[0]
    out = np.empty((d, d), dtype=object)
    for i in range(d):
        for j in range(d):
            q = sympy.Rational(inv[i, j])
            out[i, j] = Fraction(int(q.p), int(q.q))
    return out


def determinant(m: np.ndarray) -> Union[Fraction, float]:
    if is_exact(m):
        q = sympy.Rational(sympy.Matrix(m.tolist()).det())
        return Fraction(int(q.p), int(q.q))
    return float(np.linalg.det(m))


def matrix_key(m: np.ndarray) -> Tuple:
    """Hashable key for exact matrices (rounded entries for floats)."""
    if is_exact(m):
        return tuple(m.flat)
    return tuple(np.round(m, 9).flat)


def scale(m: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(to_float(m)))))


def matrices_equal(m: np.ndarray, n: np.ndarray, tol: float = None, projective: bool = False) -> bool:
    """Exact equality for exact inputs, relative entrywise tolerance otherwise."""
    if projective:
        return matrices_equal(m, n, tol) or matrices_equal(m, -n, tol)
    if is_exact(m) and is_exact(n):
        return bool(np.all(m == n))
    tol = settings.FLOAT_MATCH_TOL if tol is None else tol
    a, b = to_float(m), to_float(n)
    return bool(np.max(np.abs(a - b)) <= tol * max(scale(a), scale(b)))


def is_identity(m: np.ndarray, tol: float = None, projective: bool = False) -> bool:
    return matrices_equal(m, identity(m.shape[0], is_exact(m)), tol, projective)


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(to_float(m)))


def product(matrices: Iterable[np.ndarray], d: int, exact: bool) -> np.ndarray:
    out = identity(d, exact)
    for m in matrices:
        out = out @ m
    return out


def to_rows(m: np.ndarray) -> list:
    """Row-major nested lists; Fractions print as "p/q" strings."""
    if is_exact(m):
        return [[str(x) if x.denominator != 1 else x.numerator for x in row] for row in m]
    return m.tolist()


def _poly_mul(p: list, q: list) -> list:
    out = [p[0] * 0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def _poly_pow(p: list, n: int, one) -> list:
    out = [one]
    for _ in range(n):
        out = _poly_mul(out, p)
    return out


def sym_power_lift(m: np.ndarray, d: int) -> np.ndarray:
    """
    Action of a 2x2 matrix on degree d-1 binary forms, basis x^{d-1}, x^{d-2} y, ..., y^{d-1}.

    Column k holds the coefficients of (a x + c y)^{d-1-k} (b x + d y)^k, so
    lift(mn) = lift(m) lift(n) and [[1,1],[0,1]] lifts to [[1,1,1],[0,1,2],[0,0,1]] for d = 3.
    """
    if d < 2:
        raise ValueError("lift dimension must be at least 2")
    exact = is_exact(m)
    a, b, c, e = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if not exact:
        a, b, c, e = float(a), float(b), float(c), float(e)
    one = Fraction(1) if exact else 1.0
    n = d - 1
    out = np.empty((d, d), dtype=object) if exact else np.zeros((d, d))
    for k in range(d):
        col = _poly_mul(_poly_pow([a, c], n - k, one), _poly_pow([b, e], k, one))
        for j in range(d):
            out[j, k] = col[j]
    return out
