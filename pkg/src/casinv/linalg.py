"""Exact linear algebra over Expr entries and over plain Fractions.

Everything here is small and dense: pivot blocks of structure matrices and
coefficient systems extracted from closedness conditions.  Gaussian
elimination with exact arithmetic is entirely adequate at these sizes; the
Expr type keeps quotients gcd-reduced at every step, which is what stops
intermediate expression swell.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import EXPR_ONE, EXPR_ZERO, Expr

__all__ = ["det_exact", "solve_exact", "nullspace_fractions", "SingularMatrixError"]


class SingularMatrixError(Exception):
    pass


def det_exact(rows: list) -> Expr:
    """Determinant of a square Expr matrix by elimination with row pivoting."""
    n = len(rows)
    if n == 0:
        return EXPR_ONE
    m = [list(r) for r in rows]
    sign = 1
    det = EXPR_ONE
    for k in range(n):
        p = next((i for i in range(k, n) if not m[i][k].is_zero()), None)
        if p is None:
            return EXPR_ZERO
        if p != k:
            m[k], m[p] = m[p], m[k]
            sign = -sign
        pivot = m[k][k]
        det = det * pivot
        for i in range(k + 1, n):
            if m[i][k].is_zero():
                continue
            f = m[i][k] / pivot
            for j in range(k + 1, n):
                m[i][j] = m[i][j] - f * m[k][j]
            m[i][k] = EXPR_ZERO
    return det if sign > 0 else -det


def solve_exact(a: list, b: list) -> list:
    """Solve A X = B exactly for Expr matrices.

    `b` is a list of right-hand-side columns (each a list of Exprs); the
    result is the list of solution columns.  Raises SingularMatrixError when
    A is symbolically singular.
    """
    n = len(a)
    cols = len(b)
    m = [list(a[i]) + [b[j][i] for j in range(cols)] for i in range(n)]
    for k in range(n):
        p = next((i for i in range(k, n) if not m[i][k].is_zero()), None)
        if p is None:
            raise SingularMatrixError(f"no pivot in column {k}")
        if p != k:
            m[k], m[p] = m[p], m[k]
        pivot = m[k][k]
        for i in range(n):
            if i == k or m[i][k].is_zero():
                continue
            f = m[i][k] / pivot
            for j in range(k, n + cols):
                m[i][j] = m[i][j] - f * m[k][j]
            m[i][k] = EXPR_ZERO
    out = []
    for j in range(cols):
        out.append([m[i][n + j] / m[i][i] for i in range(n)])
    return out


def nullspace_fractions(rows: list) -> list:
    """Basis of the right nullspace of a Fraction matrix.

    Returns tuples, one per free column of the reduced row echelon form,
    ordered by free-column index.  The basis is the canonical RREF one: each
    vector has a 1 in its own free column and zeros in the others.
    """
    if not rows:
        return []
    ncols = len(rows[0])
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            v[pc] = -m[ri][fc]
        basis.append(tuple(v))
    return basis
