import random

import sympy
from hypothesis import given, strategies as st

from fanic.linalg import (SparseMap, dense_solve, det, intersection, kernel, quotient_basis, rank,
                          solve_affine, solve_columns, span, subspace_sum)
from oracles import frac, sympy_rank

small_ints = st.integers(-3, 3)


@st.composite
def matrices(draw, max_dim=6):
    m = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    return [[draw(small_ints) for _ in range(n)] for _ in range(m)]


def test_rank_of_identity():
    for n in range(6):
        assert rank(SparseMap.identity(n)) == n


def test_quotient_of_plane_by_diagonal():
    diag = span([{0: 1, 1: 1}])
    assert len(quotient_basis(diag, 2)) == 1


@given(matrices())
def test_rank_matches_sympy(rows):
    assert rank(SparseMap.from_dense(rows)) == sympy.Matrix(rows).rank()


@given(matrices(), st.randoms(use_true_random=False))
def test_rank_independent_of_column_order(rows, rnd):
    cols = list(range(len(rows[0])))
    rnd.shuffle(cols)
    permuted = [[r[c] for c in cols] for r in rows]
    assert rank(SparseMap.from_dense(rows)) == rank(SparseMap.from_dense(permuted))


@given(matrices())
def test_kernel_vectors_are_killed_and_count_matches(rows):
    m = SparseMap.from_dense(rows)
    ker = kernel(m)
    assert len(ker) == m.ncols - sympy.Matrix(rows).rank()
    for v in ker:
        assert m.apply(v) == {}
    assert sympy_rank([[v.get(j, 0) for j in range(m.ncols)] for v in ker] or [[0]]) == len(ker)


@given(matrices(max_dim=5))
def test_det_matches_sympy(rows):
    n = min(len(rows), len(rows[0]))
    sq = [r[:n] for r in rows[:n]]
    assert frac(det(sq)) == sympy.Matrix(sq).det()


@given(matrices(max_dim=5), st.lists(small_ints, min_size=5, max_size=5))
def test_solve_columns_reproduces_targets(rows, coeffs):
    m = SparseMap.from_dense(rows)
    x = {j: c for j, c in enumerate(coeffs[:m.ncols]) if c}
    target = m.apply(x)
    sol = solve_columns(m, [target])
    assert sol is not None and m.apply(sol[0]) == target


def test_dense_solve_inconsistent_and_unique():
    assert dense_solve([[1, 1], [1, 1]], [1, 2]) is None
    assert [frac(x) for x in dense_solve([[2, 0], [0, 3]], [1, 1])] == [sympy.Rational(1, 2), sympy.Rational(1, 3)]


def test_solve_affine():
    # x0 + x1 = 3, x0 − x1 = 1
    sol = solve_affine([({0: 1, 1: 1}, 3), ({0: 1, 1: -1}, 1)], 2)
    assert [frac(x) for x in sol] == [2, 1]
    assert solve_affine([({0: 1}, 1), ({0: 1}, 2)], 1) is None


@given(st.integers(0, 1000))
def test_sum_and_intersection_dimensions(seed):
    rnd = random.Random(seed)
    n = 5
    a = [{j: rnd.randint(-2, 2) for j in range(n) if rnd.random() < 0.6} for _ in range(rnd.randint(0, 4))]
    b = [{j: rnd.randint(-2, 2) for j in range(n) if rnd.random() < 0.6} for _ in range(rnd.randint(0, 4))]
    a = [{k: x for k, x in v.items() if x} for v in a]
    b = [{k: x for k, x in v.items() if x} for v in b]
    ea, eb = span(a), span(b)
    dense = lambda vs: [[v.get(j, 0) for j in range(n)] for v in vs] or [[0] * n]
    ra, rb, rab = (sympy.Matrix(dense(a)).rank(), sympy.Matrix(dense(b)).rank(),
                   sympy.Matrix(dense(a + b)).rank())
    assert len(ea) == ra and len(eb) == rb
    assert len(subspace_sum(ea, eb)) == rab
    assert len(intersection(ea, eb)) == ra + rb - rab
