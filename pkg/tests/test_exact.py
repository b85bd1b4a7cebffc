from fractions import Fraction as F

import sympy
from hypothesis import given
from hypothesis import strategies as st

from artifact import exact as ex

small = st.integers(-5, 5)
matrices = st.integers(1, 5).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=m, max_size=m)))


def test_frac_rejects_float():
    import pytest
    with pytest.raises(TypeError):
        ex.frac(0.5)
    assert ex.frac("3/6") == F(1, 2)


@given(matrices)
def test_rank_and_nullspace_match_sympy(a):
    m = sympy.Matrix(a)
    assert ex.rank(a) == m.rank()
    ns = ex.nullspace(a)
    assert len(ns) == len(a[0]) - m.rank()
    for v in ns:
        assert all(x == 0 for x in ex.matvec(ex.to_matrix(a), v))


@given(st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_det_and_inverse_match_sympy(a):
    d = ex.det(a)
    assert d == sympy.Matrix(a).det()
    if d:
        inv = ex.inverse(ex.to_matrix(a))
        assert ex.matmul(ex.to_matrix(a), inv) == ex.identity(len(a))


@given(matrices)
def test_sparse_kernel_agrees_with_dense(a):
    rows = [{j: v for j, v in enumerate(r) if v} for r in a]
    k = ex.sparse_kernel(rows, len(a[0]))
    assert len(k) == len(ex.nullspace(a))
    assert ex.span_equal(k, ex.nullspace(a)) or not k


def test_solve_inconsistent():
    assert ex.solve([[F(1), F(1)], [F(2), F(2)]], [1, 3]) is None
    assert ex.solve([[F(1), F(1)], [F(1), F(-1)]], [3, 1]) == [2, 1]


def test_gram_schmidt_orthogonal():
    g = ex.identity(3)
    vs = ex.gram_schmidt([[1, 1, 0], [1, 0, 1], [0, 1, 1]], g)
    for i in range(3):
        for j in range(i):
            assert ex.dot(vs[i], vs[j]) == 0


def test_fmt():
    assert ex.fmt(F(-3, 6)) == "-1/2"
    assert ex.fmt(4) == "4/1"
