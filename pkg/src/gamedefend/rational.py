"""Small exact linear algebra over the rationals.

Only what support enumeration needs: row reduction, unique solves and brute
force vertex enumeration of tiny polytopes.  Arithmetic runs on gmpy2's mpq;
results come back as Fractions.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from gmpy2 import mpq

Matrix = list[list]


_MPQ = type(mpq(0))


def _q(x):
    if type(x) is _MPQ:
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def rref(rows: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns of an augmented matrix."""
    m = [list(r) for r in rows] if _converted(rows) else [[_q(x) for x in r] for r in rows]
    pivots = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        pivot = next((k for k in range(r, len(m)) if m[k][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for k in range(len(m)):
            if k != r and m[k][c] != 0:
                f = m[k][c]
                m[k] = [a - f * b for a, b in zip(m[k], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def _converted(rows) -> bool:
    return all(type(x) is _MPQ for r in rows for x in r)


def rank(rows: Matrix) -> int:
    return len(rref(rows)[1])


def solve_unique(a: Matrix, b: list) -> list | None:
    """The unique solution of a x = b, or None if none or infinitely many."""
    n = len(a[0])
    red, piv = rref([row + [rhs] for row, rhs in zip(a, b)])
    if n in piv:
        return None
    if len(piv) < n:
        return None
    x = [mpq(0)] * n
    for row, c in zip(red, piv):
        x[c] = row[-1]
    return x


def polytope_vertices(eq_a: Matrix, eq_b: list, le_a: Matrix, le_b: list,
                      n: int) -> list[tuple[Fraction, ...]]:
    """Vertices of {x : eq_a x = eq_b, le_a x <= le_b} in R^n (bounded case).

    Tries every choice of tight inequalities that completes the equality
    system to full rank; fine for the handful of constraints a small bimatrix
    support produces.
    """
    eq_a = [[_q(x) for x in row] for row in eq_a]
    le_a = [[_q(x) for x in row] for row in le_a]
    eq_b = [_q(x) for x in eq_b]
    le_b = [_q(x) for x in le_b]
    base_rank = rank(eq_a) if eq_a else 0
    need = n - base_rank
    found = []
    seen = set()
    for tight in itertools.combinations(range(len(le_a)), need):
        a = eq_a + [le_a[k] for k in tight]
        b = list(eq_b) + [le_b[k] for k in tight]
        x = solve_unique(a, b)
        if x is None:
            continue
        if any(sum(c * v for c, v in zip(row, x)) != rhs for row, rhs in zip(eq_a, eq_b)):
            continue
        if any(sum(c * v for c, v in zip(row, x)) > rhs for row, rhs in zip(le_a, le_b)):
            continue
        key = tuple(Fraction(int(v.numerator), int(v.denominator)) for v in x)
        if key not in seen:
            seen.add(key)
            found.append(key)
    return found
