"""Exact linear algebra over the rationals: fraction-free rank, row echelon form, null space."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence


def _integer_rows(rows: Sequence[Sequence]) -> list:
    """Clear denominators row by row; scaling a row never changes the rank."""
    out = []
    for row in rows:
        fr = [Fraction(x) for x in row]
        den = 1
        for x in fr:
            if x:
                den = lcm(den, x.denominator)
        out.append([int(x * den) for x in fr])
    return out


def bareiss_rank(rows: Sequence[Sequence]) -> int:
    """Rank via fraction-free Gaussian elimination (Bareiss), exact for rational input."""
    a = _integer_rows(rows)
    if not a:
        return 0
    nrows, ncols = len(a), len(a[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        piv = next((r for r in range(rank, nrows) if a[r][col]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, nrows):
            f = a[r][col]
            row_r = a[r]
            row_p = a[rank]
            for c in range(col + 1, ncols):
                row_r[c] = (p * row_r[c] - f * row_p[c]) // prev
            row_r[col] = 0
        prev = p
        rank += 1
    return rank


def rref(rows: Sequence[Sequence]) -> tuple:
    """Reduced row echelon form over Fractions; returns (matrix, pivot columns)."""
    a = [[Fraction(x) for x in row] for row in rows]
    if not a:
        return [], []
    nrows, ncols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a[:r], pivots


def nullspace(rows: Sequence[Sequence], ncols: int) -> list:
    """Basis of {v : A v = 0}, one vector per free column, scaled to integers."""
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(_primitive(v))
    return basis


def _primitive(v: list) -> list:
    den = 1
    for x in v:
        if x:
            den = lcm(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    g = g or 1
    return [Fraction(x // g) for x in ints]
