"""Structure matrices: skewness, the Jacobi identity, rank, pivot blocks.

A StructureMatrix holds the n x n matrix of bracket coefficients J[i][j] as
exact expressions.  Three facts about it drive everything downstream:

* it must be skew-symmetric and satisfy the Jacobi identity (checked here),
* its rank 2m is even and generically constant, found by sampling,
* some 2m x 2m principal block is invertible; the rows outside that block
  are the dependent ones whose degeneracy relations yield the invariants.

Row/column indices are 0-based internally.  Everything user-facing (reports,
error messages, returned row labels) is 1-based, matching the way systems
are written down in the input files.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .expr import (
    Domain,
    EXPR_ONE,
    EXPR_ZERO,
    EvalDomainError,
    Expr,
    Point,
    VariableSet,
    ZeroVerdict,
    differentiate,
    evaluate,
    random_point,
    zero_verdict,
)
from .linalg import det_exact

__all__ = [
    "StructureError",
    "RankInstabilityError",
    "PivotCertificationError",
    "SkewViolation",
    "JacobiFailure",
    "JacobiReport",
    "PivotDecomposition",
    "StructureMatrix",
]


class StructureError(Exception):
    pass


class RankInstabilityError(StructureError):
    pass


class PivotCertificationError(StructureError):
    pass


@dataclass(frozen=True)
class SkewViolation:
    row: int  # 1-based
    col: int
    residual: Expr


@dataclass(frozen=True)
class JacobiFailure:
    triple: tuple[int, int, int]  # 1-based
    verdict: ZeroVerdict


@dataclass(frozen=True)
class JacobiReport:
    ok: bool
    triples_checked: int
    failures: tuple
    sampled_only: tuple  # triples passed only by sampling (ln atoms in play)

    def failed_triples(self) -> list:
        return [f.triple for f in self.failures]


@dataclass(frozen=True)
class PivotDecomposition:
    rank: int
    pivot_rows: tuple  # 0-based, ascending
    dependent_rows: tuple
    pivot_block: tuple  # rank x rank tuple of Exprs
    pivot_det: Expr
    rank_samples: tuple

    @property
    def pivot_rows_1based(self) -> tuple:
        return tuple(i + 1 for i in self.pivot_rows)

    @property
    def dependent_rows_1based(self) -> tuple:
        return tuple(i + 1 for i in self.dependent_rows)


class StructureMatrix:
    """Skew matrix of bracket coefficients over a variable set."""

    def __init__(self, symbols: VariableSet, rows, domain: Domain | None = None, name: str = ""):
        n = symbols.n
        rows = tuple(tuple(r) for r in rows)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise StructureError(f"matrix must be {n}x{n} to match the {n} variables")
        self.symbols = symbols
        self.rows = rows
        self.domain = domain or Domain()
        self.name = name

    @classmethod
    def from_upper(
        cls,
        symbols: VariableSet,
        upper: dict,
        domain: Domain | None = None,
        name: str = "",
    ) -> "StructureMatrix":
        """Build the full skew matrix from entries J[i][j] with 1 <= i < j <= n."""
        n = symbols.n
        grid = [[EXPR_ZERO for _ in range(n)] for _ in range(n)]
        for (i, j), e in upper.items():
            if not (1 <= i < j <= n):
                raise StructureError(
                    f"entry J[{i}][{j}] is out of place: need 1 <= i < j <= {n} "
                    "(only the upper triangle is given, the rest is implied)"
                )
            grid[i - 1][j - 1] = e
            grid[j - 1][i - 1] = -e
        return cls(symbols, grid, domain, name)

    @property
    def n(self) -> int:
        return self.symbols.n

    def entry(self, i: int, j: int) -> Expr:
        return self.rows[i][j]

    # -- numerics ------------------------------------------------------------

    def numeric(self, point) -> np.ndarray:
        values = point.values if isinstance(point, Point) else dict(point)
        n = self.n
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if not self.rows[i][j].is_zero():
                    out[i, j] = evaluate(self.rows[i][j], values)
        return out

    def sample_points(self, k: int, seed: int = 0, lo: int = 1, hi: int = 10) -> list:
        """k random rational points where every entry evaluates cleanly."""
        rng = random.Random(f"structure-sample:{seed}")
        pts = []
        tries = 0
        while len(pts) < k:
            tries += 1
            if tries > 50 * max(k, 1):
                raise StructureError("could not sample points where the matrix is regular")
            pt = random_point(self.symbols, self.domain, rng, lo, hi)
            try:
                self.numeric(pt)
            except EvalDomainError:
                continue
            pts.append(pt)
        return pts

    # -- structural checks -----------------------------------------------------

    def check_skew(self) -> list:
        """Violations of J[i][j] = -J[j][i] (empty list means skew)."""
        out = []
        for i in range(self.n):
            for j in range(i, self.n):
                r = self.rows[i][j] + self.rows[j][i] if i != j else self.rows[i][i]
                if not r.is_zero():
                    out.append(SkewViolation(i + 1, j + 1, r))
        return out

    def jacobi_sum(self, i: int, j: int, k: int) -> Expr:
        """Left side of the Jacobi identity for the triple (i, j, k), 0-based."""
        names = self.symbols.variables
        total = EXPR_ZERO
        for l in range(self.n):
            d_jk = differentiate(self.rows[j][k], names[l], self.symbols)
            d_ki = differentiate(self.rows[k][i], names[l], self.symbols)
            d_ij = differentiate(self.rows[i][j], names[l], self.symbols)
            total = (
                total
                + self.rows[l][i] * d_jk
                + self.rows[l][j] * d_ki
                + self.rows[l][k] * d_ij
            )
        return total

    def jacobi_report(self, samples: int = 20, tol: float = 1e-9, seed: int = 0) -> JacobiReport:
        """Check the Jacobi identity over every index triple."""
        failures = []
        sampled = []
        count = 0
        for i, j, k in itertools.combinations(range(self.n), 3):
            count += 1
            s = self.jacobi_sum(i, j, k)
            rng = random.Random(f"jacobi:{seed}:{i}:{j}:{k}")
            v = zero_verdict(s, self.symbols, self.domain, samples=samples, tol=tol, rng=rng)
            if v.is_nonzero:
                failures.append(JacobiFailure((i + 1, j + 1, k + 1), v))
            elif v.status == "probably-zero":
                sampled.append((i + 1, j + 1, k + 1))
        return JacobiReport(
            ok=not failures,
            triples_checked=count,
            failures=tuple(failures),
            sampled_only=tuple(sampled),
        )

    # -- rank and pivot selection ------------------------------------------------

    def _rank_profile(self, samples: int, tol: float, seed: int):
        pts = self.sample_points(samples, seed)
        mats = [self.numeric(pt) for pt in pts]
        ranks = []
        for m in mats:
            s = np.linalg.svd(m, compute_uv=False)
            top = float(s[0]) if s.size else 0.0
            ranks.append(int(np.sum(s > tol * top)) if top > 0.0 else 0)
        counts = Counter(ranks)
        best, cnt = counts.most_common(1)[0]
        if cnt * 2 <= len(ranks):
            raise RankInstabilityError(
                f"numeric rank is unstable across sample points: {sorted(counts.items())}"
            )
        if best % 2:
            raise RankInstabilityError(
                f"numeric rank {best} is odd; a skew-symmetric matrix has even rank "
                "(tolerance or domain trouble)"
            )
        return best, tuple(ranks), pts, mats

    def rank_numeric(self, samples: int = 7, tol: float = 1e-9, seed: int = 0) -> int:
        return self._rank_profile(samples, tol, seed)[0]

    def decompose(
        self,
        samples: int = 7,
        tol: float = 1e-9,
        seed: int = 0,
        candidate_budget: int = 5000,
    ) -> PivotDecomposition:
        """Find the rank and a certified invertible principal block.

        Among all numerically invertible principal blocks of size rank we
        prefer the structurally simplest one: fewest symbolically nonzero
        entries, then fewest monomials, then lowest row indices.  That keeps
        the degeneracy relations (and hence the invariants) as plain as the
        matrix allows.  The winner's determinant is certified symbolically;
        candidates whose determinant cannot be certified nonzero are skipped.

        When C(n, rank) exceeds candidate_budget, a greedy pass grows the
        block two rows at a time instead of enumerating.
        """
        rank, ranks, pts, mats = self._rank_profile(samples, tol, seed)
        n = self.n
        if rank == 0:
            return PivotDecomposition(0, (), tuple(range(n)), (), EXPR_ONE, ranks)

        if math.comb(n, rank) <= candidate_budget:
            candidates = itertools.combinations(range(n), rank)
        else:
            candidates = [self._greedy_pivot(mats, rank, tol)]

        scored = []
        for subset in candidates:
            good = 0
            for m in mats:
                block = m[np.ix_(subset, subset)]
                s = np.linalg.svd(block, compute_uv=False)
                if s[0] > 0.0 and s[-1] > tol * s[0]:
                    good += 1
            if good * 2 <= len(mats):
                continue
            sym = [[self.rows[p][q] for q in subset] for p in subset]
            nnz = sum(1 for row in sym for e in row if not e.is_zero())
            monos = sum(e.monomial_count() for row in sym for e in row if not e.is_zero())
            scored.append(((nnz, monos, subset), subset, sym))
        if not scored:
            raise PivotCertificationError(
                f"no numerically invertible {rank}x{rank} principal block found"
            )
        scored.sort(key=lambda t: t[0])

        for _, subset, sym in scored:
            det = det_exact(sym)
            if det.is_zero():
                continue
            v = zero_verdict(det, self.symbols, self.domain, rng=random.Random(f"pivot:{seed}"))
            if v.is_nonzero:
                chosen = set(subset)
                dep = tuple(i for i in range(n) if i not in chosen)
                return PivotDecomposition(
                    rank=rank,
                    pivot_rows=tuple(subset),
                    dependent_rows=dep,
                    pivot_block=tuple(tuple(r) for r in sym),
                    pivot_det=det,
                    rank_samples=ranks,
                )
        raise PivotCertificationError(
            "every numerically invertible principal block failed symbolic certification"
        )

    def _greedy_pivot(self, mats, rank: int, tol: float) -> tuple:
        """Grow a principal block two rows at a time (odd skew blocks are singular)."""
        m = mats[0]
        n = self.n
        row_nnz = [sum(1 for e in self.rows[i] if not e.is_zero()) for i in range(n)]
        chosen: list = []
        while len(chosen) < rank:
            found = None
            pairs = itertools.combinations((i for i in range(n) if i not in chosen), 2)
            for i, j in sorted(pairs, key=lambda p: (row_nnz[p[0]] + row_nnz[p[1]], p)):
                trial = sorted(chosen + [i, j])
                block = m[np.ix_(trial, trial)]
                s = np.linalg.svd(block, compute_uv=False)
                if s[0] > 0.0 and s[-1] > tol * s[0]:
                    found = (i, j)
                    break
            if found is None:
                raise PivotCertificationError(
                    f"greedy pivot growth stalled at size {len(chosen)} (target {rank})"
                )
            chosen = sorted(chosen + list(found))
        return tuple(chosen)
