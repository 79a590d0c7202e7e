import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bellepr.errors import StructuralError
from bellepr.lp import LinearProgram, solve_lp


def solve_square(M, rhs):
    """Gaussian elimination over the rationals; None if singular."""
    n = len(M)
    A = [list(map(Fraction, row)) + [Fraction(r)] for row, r in zip(M, rhs)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return None
        A[c], A[p] = A[p], A[c]
        A[c] = [v / A[c][c] for v in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [A[i][n] for i in range(n)]


def vertices(lp: LinearProgram):
    """Basic feasible solutions of {Ax ~ b, x >= 0} by brute force."""
    n = lp.n_vars
    rows = [(row, b) for row, b in zip(lp.A, lp.b)]
    rows += [([int(i == j) for i in range(n)], 0) for j in range(n)]
    for subset in itertools.combinations(range(len(rows)), n):
        x = solve_square([rows[i][0] for i in subset], [rows[i][1] for i in subset])
        if x is not None and lp.is_feasible_point(x):
            yield x


def random_lp(rng: random.Random, bounded: bool) -> LinearProgram:
    n = rng.randint(1, 4)
    m = rng.randint(1, 4)
    A = [[rng.choice([-2, -1, 0, 0, 1, 1, 2]) for _ in range(n)] for _ in range(m)]
    b = [rng.choice([-2, -1, 0, 0, 0, 1, 2]) for _ in range(m)]  # many zeros: degenerate
    senses = [rng.choice(["<=", ">=", "=="]) for _ in range(m)]
    if bounded:
        for j in range(n):
            A.append([int(i == j) for i in range(n)])
            b.append(3)
            senses.append("<=")
    c = [rng.randint(-3, 3) for _ in range(n)]
    return LinearProgram(A, senses, b, c)


def test_trivial_feasible():
    res = solve_lp(LinearProgram([[1], [1]], [">=", "<="], [0, 1], free={0}))
    assert res.feasible and res.x == [0]


def test_trivial_infeasible_certificate():
    lp = LinearProgram([[1], [1]], [">=", "<="], [1, 0])
    res = solve_lp(lp)
    assert not res.feasible
    assert lp.is_farkas_certificate(res.y)
    assert res.multipliers == [1, 1]


def test_optimum():
    # max x + 2y st x + y <= 4, x - y <= 1, y <= 3/2  (min of the negation)
    lp = LinearProgram([[1, 1], [1, -1], [0, 1]], ["<="] * 3, [4, 1, Fraction(3, 2)], c=[-1, -2])
    res = solve_lp(lp)
    assert res.x == [Fraction(5, 2), Fraction(3, 2)]
    assert res.objective == Fraction(-11, 2)


def test_unbounded_flagged():
    res = solve_lp(LinearProgram([[1, -1]], ["<="], [1], c=[-1, 0]))
    assert res.feasible and res.unbounded


def test_free_variable_negative_value():
    res = solve_lp(LinearProgram([[1]], ["=="], [-3], free={0}))
    assert res.x == [-3]


def test_structural_errors():
    with pytest.raises(StructuralError):
        LinearProgram([[1, 2], [1]], ["<=", "<="], [0, 0])
    with pytest.raises(StructuralError):
        LinearProgram([[1]], ["<"], [0])
    with pytest.raises(StructuralError):
        LinearProgram([[1]], ["<="], [0, 1])


def test_degenerate_cycling_example():
    # Beale's cycling instance; Bland's rule must terminate
    lp = LinearProgram(
        [
            [Fraction(1, 4), -8, -1, 9],
            [Fraction(1, 2), -12, Fraction(-1, 2), 3],
            [0, 0, 1, 0],
        ],
        ["<=", "<=", "<="],
        [0, 0, 1],
        c=[Fraction(-3, 4), 20, Fraction(-1, 2), 6],
    )
    res = solve_lp(lp)
    assert res.objective == Fraction(-5, 4)


@pytest.mark.parametrize("seed", range(100))
def test_vertex_oracle_feasibility(seed):
    lp = random_lp(random.Random(seed), bounded=False)
    res = solve_lp(lp)
    assert res.feasible == any(True for _ in vertices(lp))
    if res.feasible:
        assert lp.is_feasible_point(res.x)
    else:
        assert lp.is_farkas_certificate(res.y)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_vertex_oracle_optimum(seed):
    lp = random_lp(random.Random(seed), bounded=True)
    res = solve_lp(lp)
    verts = list(vertices(lp))
    assert res.feasible == bool(verts)
    if verts:
        best = min(sum(c * v for c, v in zip(lp.c, x)) for x in verts)
        assert not res.unbounded
        assert res.objective == best
