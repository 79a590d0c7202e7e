"""Exact rational linear programming (two-phase simplex, Bland's rule).

Feasible problems come back with a witness checked in exact arithmetic;
infeasible ones with a Farkas vector ``y`` (one multiplier per row) such that

* ``y[i] >= 0`` on ``<=`` rows, ``y[i] <= 0`` on ``>=`` rows, free on ``==`` rows,
* ``sum_i y[i] * A[i][j] >= 0`` for every nonnegative variable ``j``
  (``== 0`` for free variables),
* ``sum_i y[i] * b[i] < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import StructuralError

SENSES = ("<=", ">=", "==")


@dataclass
class LinearProgram:
    A: list[list[Fraction]]
    senses: list[str]
    b: list[Fraction]
    c: list[Fraction] | None = None  # minimised when given
    free: frozenset[int] = frozenset()

    def __post_init__(self):
        self.A = [[Fraction(v) for v in row] for row in self.A]
        self.b = [Fraction(v) for v in self.b]
        if self.c is not None:
            self.c = [Fraction(v) for v in self.c]
        self.free = frozenset(self.free)
        n = self.n_vars
        if len(self.senses) != len(self.A) or len(self.b) != len(self.A):
            raise StructuralError("A, senses and b must have one entry per row")
        if any(len(row) != n for row in self.A):
            raise StructuralError("ragged constraint matrix")
        if self.c is not None and len(self.c) != n:
            raise StructuralError("objective length differs from variable count")
        if any(s not in SENSES for s in self.senses):
            raise StructuralError(f"senses must be in {SENSES}")
        if any(not 0 <= j < n for j in self.free):
            raise StructuralError("free variable index out of range")

    @property
    def n_vars(self) -> int:
        if self.A:
            return len(self.A[0])
        return len(self.c) if self.c is not None else 0

    def is_feasible_point(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.n_vars:
            return False
        if any(x[j] < 0 for j in range(self.n_vars) if j not in self.free):
            return False
        for row, s, rhs in zip(self.A, self.senses, self.b):
            lhs = sum(a * v for a, v in zip(row, x) if a)
            if (s == "<=" and lhs > rhs) or (s == ">=" and lhs < rhs) or (s == "==" and lhs != rhs):
                return False
        return True

    def is_farkas_certificate(self, y: Sequence[Fraction]) -> bool:
        if len(y) != len(self.A):
            return False
        for yi, s in zip(y, self.senses):
            if (s == "<=" and yi < 0) or (s == ">=" and yi > 0):
                return False
        for j in range(self.n_vars):
            col = sum(yi * row[j] for yi, row in zip(y, self.A) if yi and row[j])
            if j in self.free and col != 0:
                return False
            if col < 0:
                return False
        return sum(yi * bi for yi, bi in zip(y, self.b)) < 0


@dataclass
class LPResult:
    feasible: bool
    x: list[Fraction] | None = None
    y: list[Fraction] | None = None  # Farkas vector when infeasible
    objective: Fraction | None = None
    unbounded: bool = False
    pivots: int = 0
    senses: list[str] = field(default_factory=list, repr=False)

    @property
    def multipliers(self) -> list[Fraction] | None:
        """Nonnegative multipliers for the rows rewritten in ``<=`` form
        (``>=`` rows negated); free for equality rows."""
        if self.y is None:
            return None
        return [-v if s == ">=" else v for v, s in zip(self.y, self.senses)]


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, col: int, obj: list[Fraction]):
        prow = self.rows[r]
        pv = prow[col]
        if pv != 1:
            self.rows[r] = prow = [v / pv for v in prow]
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i != r and row[col]:
                f = row[col]
                for j in nz:
                    row[j] -= f * prow[j]
        if obj[col]:
            f = obj[col]
            for j in nz:
                obj[j] -= f * prow[j]
        self.basis[r] = col
        self.pivots += 1

    def optimise(self, obj: list[Fraction], allowed: set[int]) -> bool:
        """Minimise; ``obj`` holds reduced costs with -z in the last slot.
        Returns False if unbounded."""
        while True:
            col = next((j for j in sorted(allowed) if obj[j] < 0), None)
            if col is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                if row[col] > 0:
                    ratio = row[-1] / row[col]
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], col, obj)


def _solve_transposed(B: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve B^T y = rhs by Gauss-Jordan elimination (B square, nonsingular)."""
    m = len(B)
    M = [[B[j][i] for j in range(m)] + [rhs[i]] for i in range(m)]
    for c in range(m):
        p = next(r for r in range(c, m) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        pv = M[c][c]
        M[c] = [v / pv for v in M[c]]
        for r in range(m):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return [M[i][m] for i in range(m)]


def solve_lp(lp: LinearProgram) -> LPResult:
    m, n = len(lp.A), lp.n_vars
    # column layout: split variables, then slack/surplus, then artificials
    cols: list[tuple[str, int, int]] = []  # (kind, source, sign)
    for j in range(n):
        cols.append(("x", j, 1))
        if j in lp.free:
            cols.append(("x", j, -1))
    n_struct = len(cols)

    sigma, senses = [], []
    for s, bi in zip(lp.senses, lp.b):
        flip = bi < 0 or (bi == 0 and s == ">=")
        sigma.append(-1 if flip else 1)
        senses.append({"<=": ">=", ">=": "<=", "==": "=="}[s] if flip else s)

    slack_of = {}
    for i, s in enumerate(senses):
        if s != "==":
            slack_of[i] = len(cols)
            cols.append(("s", i, 1 if s == "<=" else -1))
    art_of = {}
    for i, s in enumerate(senses):
        if s != "<=":
            art_of[i] = len(cols)
            cols.append(("a", i, 1))
    N = len(cols)
    artificial = set(art_of.values())

    def column(k: int) -> list[Fraction]:
        kind, src, sign = cols[k]
        if kind == "x":
            return [Fraction(sigma[i] * sign) * lp.A[i][src] for i in range(m)]
        return [Fraction(sign) if i == src else Fraction(0) for i in range(m)]

    std_cols = [column(k) for k in range(N)]
    rhs = [sigma[i] * lp.b[i] for i in range(m)]
    rows = [[std_cols[k][i] for k in range(N)] + [rhs[i]] for i in range(m)]
    basis = [art_of[i] if i in art_of else slack_of[i] for i in range(m)]
    tab = _Tableau(rows, basis)

    # phase 1: minimise the sum of artificials
    obj = [Fraction(0)] * (N + 1)
    for k in artificial:
        obj[k] = Fraction(1)
    for i, bk in enumerate(basis):
        if bk in artificial:
            obj = [o - v for o, v in zip(obj, rows[i])]
    tab.optimise(obj, set(range(N)))
    phase1 = -obj[-1]

    if phase1 > 0:
        B = [[std_cols[bk][i] for bk in tab.basis] for i in range(m)]
        cB = [Fraction(1) if bk in artificial else Fraction(0) for bk in tab.basis]
        dual = _solve_transposed(B, cB)
        y = [-sigma[i] * dual[i] for i in range(m)]
        if not lp.is_farkas_certificate(y):
            raise AssertionError("simplex produced an invalid infeasibility certificate")
        return LPResult(False, y=y, pivots=tab.pivots, senses=list(lp.senses))

    # drive zero-level artificials out of the basis where possible
    for r, bk in enumerate(list(tab.basis)):
        if bk in artificial:
            col = next((j for j in range(N) if j not in artificial and tab.rows[r][j] != 0), None)
            if col is not None:
                tab.pivot(r, col, [Fraction(0)] * (N + 1))

    allowed = set(range(N)) - artificial
    objective = None
    unbounded = False
    if lp.c is not None:
        cost = [Fraction(0)] * (N + 1)
        for k, (kind, src, sign) in enumerate(cols):
            if kind == "x":
                cost[k] = sign * lp.c[src]
        for i, bk in enumerate(tab.basis):
            if cost[bk]:
                f = cost[bk]
                cost = [o - f * v for o, v in zip(cost, tab.rows[i])]
        unbounded = not tab.optimise(cost, allowed)

    values = [Fraction(0)] * N
    for i, bk in enumerate(tab.basis):
        values[bk] = tab.rows[i][-1]
    x = [Fraction(0)] * n
    for k in range(n_struct):
        _, src, sign = cols[k]
        x[src] += sign * values[k]
    if not lp.is_feasible_point(x):
        raise AssertionError("simplex produced an infeasible witness")
    if lp.c is not None and not unbounded:
        objective = sum(ci * xi for ci, xi in zip(lp.c, x))
    return LPResult(True, x=x, objective=objective, unbounded=unbounded, pivots=tab.pivots, senses=list(lp.senses))
