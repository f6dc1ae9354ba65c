"""Equation counting: the Pfaffian route versus componentwise integration.

A structure matrix of dimension n and rank 2m carries n - 2m invariants,
and the degeneracy relations deliver each one through a single Pfaffian
equation, so

    N_a = n - 2m.

Attacking the defining system J grad(C) = 0 componentwise instead means
working through the 2m independent characteristic equations, each coupled
to n - 2 of the remaining coordinates,

    N_c = 2m * (n - 2).

The ratio N_a / N_c is the headline: it stays below 1 for every degenerate
even rank 2 <= 2m < n.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["CostReport", "quadrature_cost"]


@dataclass(frozen=True)
class CostReport:
    n: int
    rank: int
    casimir_count: int
    pfaffian_equations: int  # N_a
    classical_equations: int  # N_c
    ratio: Fraction | None  # N_a / N_c, None when N_c == 0
    note: str


def quadrature_cost(n: int, rank: int) -> CostReport:
    """Equation counts for extracting the invariants of an n-dim system of the given rank."""
    if n < 1:
        raise ValueError("dimension must be positive")
    if rank < 0 or rank > n:
        raise ValueError(f"rank must lie in 0..{n}")
    if rank % 2:
        raise ValueError("a skew-symmetric matrix has even rank")

    casimirs = n - rank
    n_a = casimirs
    n_c = rank * (n - 2)
    if n_c == 0:
        note = (
            "null structure matrix: every coordinate is an invariant"
            if rank == 0
            else "no comparison: the componentwise count degenerates"
        )
        return CostReport(n, rank, casimirs, n_a, n_c, None, note)
    ratio = Fraction(n_a, n_c)
    return CostReport(n, rank, casimirs, n_a, n_c, ratio, "")
