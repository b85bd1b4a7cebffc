import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from artifact import counting as ct
from artifact.lie_core import algebra

from conftest import RADII

P = ct.DELTA49_POLY
A2 = algebra("A2")

# Frozen from the row-solve engine; T <= 5 also matches the brute-force oracle below.
FROZEN_N = {10: 13416, 15: 45648, 20: 105336, 25: 209352, 30: 355608, 40: 830256}


def test_reference_cubic():
    assert P.discriminant == 49 and P.irreducible and P.split_over_R
    x = sympy.symbols("x")
    assert sympy.discriminant(x ** 3 - x ** 2 - 2 * x + 1, x) == 49
    roots = P.roots()
    assert np.allclose(sorted(-2 * np.cos(2 * np.pi * k / 7) for k in (1, 2, 3)), roots)


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_companion_round_trip(a2, a1, a0):
    p = ct.CubicPoly(a2, a1, a0)
    m = ct.companion(p)
    assert ct.char_poly(m) == (a2, a1, a0)
    x = sympy.symbols("x")
    cp = sympy.Matrix(m).charpoly(x).all_coeffs()
    assert [int(c) for c in cp] == [1, a2, a1, a0]


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_irreducibility_oracle(a2, a1, a0):
    x = sympy.symbols("x")
    poly = sympy.Poly(x ** 3 + a2 * x ** 2 + a1 * x + a0, x)
    assert ct.CubicPoly(a2, a1, a0).irreducible == poly.is_irreducible


def test_parse():
    assert ct.CubicPoly.parse("-1, -2, 1") == P
    with pytest.raises(ValueError):
        ct.CubicPoly.parse("1,2")


@pytest.mark.parametrize("T", [3, 4, 5])
def test_row_solve_matches_brute_force(T):
    assert ct.enumerate_count(P, T, threads=2) == ct.brute_force_count(P, T)


@pytest.mark.parametrize("T", [3, 4])
def test_matrix_sets_agree(T):
    a = ct.enumerate_matrices(P, T, threads=2)
    b = ct.brute_force_count(P, T, return_matrices=True)
    assert a.shape == b.shape and np.array_equal(a, b)


@pytest.mark.parametrize("T,expected", [(2, 109), (3, 877), (4, 2953)])
def test_nilpotent_singular_fibres(T, expected):
    # x^3 makes almost every fibre singular, which exercises the fallback path
    p = ct.CubicPoly(0, 0, 0)
    res = ct.enumerate_rows(p, T, threads=2, allow_reducible=True)
    assert res.singular > 0 and res.failed_verification == 0
    assert res.total == expected == ct.brute_force_count(p, T)


def test_symmetry_reduction_is_exact():
    full = ct.enumerate_rows(P, 8, threads=2, symmetric=False)
    sym = ct.enumerate_rows(P, 8, threads=2, symmetric=True)
    assert np.array_equal(full.hist, sym.hist)


def test_hits_are_solutions_and_transpose_closed():
    hits = ct.enumerate_matrices(P, 5, threads=2)
    T2 = 25
    keys = set()
    for h in hits:
        m = h.reshape(3, 3)
        assert ct.char_poly(m.tolist()) == (P.a2, P.a1, P.a0)
        assert ct.frobenius_sq(m.tolist()) < T2
        keys.add(tuple(h))
    assert {tuple(h.reshape(3, 3).T.ravel()) for h in hits} == keys
    assert len(keys) == len(hits)


def test_brute_force_guard():
    with pytest.raises(ValueError):
        ct.brute_force_count(P, 7)


def test_reducible_rejected():
    with pytest.raises(ValueError):
        ct.enumerate_rows(ct.CubicPoly(0, -1, 0), 5)


def test_frozen_counts(count_runs):
    res = count_runs[8]
    assert res.failed_verification == 0
    got = {T: res.count_below(T) for T in RADII}
    assert got == FROZEN_N
    assert all(a < b for a, b in zip([got[T] for T in RADII], [got[T] for T in RADII][1:]))


def test_count_below_monotone(count_runs):
    res = count_runs[1]
    vals = [res.count_below(t) for t in range(1, 41)]
    assert vals == sorted(vals)
    assert res.count_below(F(79, 2)) == res.count_below(40) - int(res.hist[1561:1600].sum())
    with pytest.raises(ValueError):
        res.count_below(41)


def test_thread_independence(count_runs):
    base = count_runs[1].hist
    for k in (2, 8):
        assert np.array_equal(count_runs[k].hist, base)


def test_single_pass_table_matches_separate():
    a = ct.count_table(P, [5, 8, 10], threads=2)
    b = ct.count_table(P, [5, 8, 10], threads=2, single_pass=True)
    assert [r.N for r in a] == [r.N for r in b] == [ct.brute_force_count(P, 5), a[1].N, 13416]


def test_unit_invariants_constant():
    unit = ct.FieldInvariants(1, 1, 1.0, "unit test invariants")
    assert ct.cp_n3(unit) == pytest.approx(167.26, abs=0.01)
    assert ct.cp_value(3, unit) == pytest.approx(ct.cp_n3(unit), rel=1e-12)


def test_constant_is_linear_in_h_reg():
    base = ct.FieldInvariants(49, 1, 0.5, "x")
    double = ct.FieldInvariants(49, 2, 0.5, "x")
    treg = ct.FieldInvariants(49, 1, 1.5, "x")
    assert ct.cp_n3(double) == pytest.approx(2 * ct.cp_n3(base))
    assert ct.cp_n3(treg) == pytest.approx(3 * ct.cp_n3(base))
    quad = ct.FieldInvariants(196, 1, 0.5, "x")
    assert ct.cp_n3(quad) == pytest.approx(ct.cp_n3(base) / 2)


@pytest.mark.parametrize("disc", [23, 49, 81, 148])
@pytest.mark.parametrize("reg", [0.3, 1.0, 2.7])
def test_general_formula_matches_cubic_form(disc, reg):
    inv = ct.FieldInvariants(disc, 1, reg, "grid")
    assert ct.cp_report(inv)["rel_diff"] < 1e-12


def test_reference_constant():
    assert ct.cp_n3(ct.DELTA49) == pytest.approx(12.5557, abs=1e-4)


def test_invariants_validation():
    with pytest.raises(ValueError):
        ct.FieldInvariants(49, 1, 0.5, " ")
    with pytest.raises(ValueError):
        ct.FieldInvariants(49, 0, 0.5, "x")


def test_regulator_from_cyclotomic_units():
    c = [2 * math.cos(2 * math.pi * k / 7) for k in (1, 2, 3)]
    # eps1 = 2cos(2pi/7), eps2 = 2cos(4pi/7), conjugates by k -> 2k, 3k
    u1 = [c[0], c[1], c[2]]
    u2 = [c[1], 2 * math.cos(8 * math.pi / 7), 2 * math.cos(12 * math.pi / 7)]
    assert ct.regulator_from_units([u1, u2]) == pytest.approx(ct.DELTA49.reg, rel=1e-12)


def test_ball_volume():
    assert ct.unit_ball_volume(2) == pytest.approx(math.pi)
    assert ct.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_fit_synthetic():
    rows = [(t, 7 * t ** 3) for t in RADII]
    fit = ct.fit_leading(rows)
    assert fit.slope == pytest.approx(3) and fit.constant == pytest.approx(7)
    assert fit.constant_at == pytest.approx(7) and fit.residual < 1e-9
    fit = ct.fit_leading([(t, 7 * t ** 3 + t ** 2) for t in RADII])
    assert 2.9 < fit.slope < 3.0
    with pytest.raises(ValueError):
        ct.fit_leading(rows[:3])


# ---------------------------------------------------------------- Psi

def E(i, j):
    m = [[0] * 3 for _ in range(3)]
    m[i - 1][j - 1] = 1
    return A2.from_matrix(m)


V0 = ct.trace_free_diagonal([3, 1, -2])


def test_psi_example():
    assert ct.psi_map(E(1, 2).scale(5), V0).matrix() == E(1, 2).scale(10).matrix()
    assert ct.psi_map(A2.zero(), V0).is_zero()


@given(st.lists(st.integers(-9, 9), min_size=3, max_size=3),
       st.lists(st.integers(-5, 5).filter(bool), min_size=3, max_size=3, unique=True))
def test_psi_round_trip(nu_c, diag):
    v0 = ct.trace_free_diagonal(diag)
    nu = E(1, 2).scale(nu_c[0]) + E(2, 3).scale(nu_c[1]) + E(1, 3).scale(nu_c[2])
    img = ct.psi_map(nu, v0)
    assert ct.psi_inverse(img, v0).matrix() == nu.matrix()
    assert ct.psi_map(ct.psi_inverse(nu, v0), v0).matrix() == nu.matrix()


def sparse(alg, d):
    return alg.element([d.get(i, F(0)) for i in range(alg.dim)])


@pytest.mark.parametrize("tag", ["A2", "A3", "C2"])
def test_jacobian_structure(tag):
    alg = algebra(tag)
    rng = random.Random(2)
    while True:
        v0 = sparse(alg, {i: F(rng.randint(-6, 6)) for i in range(alg.rank)})
        try:
            ct.psi_map(alg.zero(), v0)
            break
        except ct.SingularPointError:
            pass
    for _ in range(3):
        nu = sparse(alg, {i: F(rng.randint(-4, 4)) for i in alg.positive_indices})
        jc = ct.jacobian_check(nu, v0)
        assert jc["unit_upper_triangular"] and jc["det_normalized"] == 1
        assert jc["det_raw"] == jc["det_raw_expected"]


def test_jacobian_raw_constant():
    nu = E(1, 2).scale(2) + E(2, 3).scale(-1) + E(1, 3).scale(3)
    jc = ct.jacobian_check(nu, V0)
    assert jc["det_raw"] == 30 == jc["det_raw_expected"]


def test_derivative_against_sympy():
    x, y, z = sympy.symbols("x y z")
    mats = {k: sympy.Matrix(E(*k).matrix()) for k in ((1, 2), (2, 3), (1, 3))}
    N = x * mats[(1, 2)] + y * mats[(2, 3)] + z * mats[(1, 3)]
    V = sympy.Matrix(V0.matrix())
    expN = sympy.eye(3) + N + N * N / 2
    expmN = sympy.eye(3) - N + N * N / 2
    psi = expmN * V * expN - V
    # coordinates in the height-ordered basis E12, E23, E13
    out = [psi[0, 1], psi[1, 2], psi[0, 2]]
    pt = {x: 2, y: -3, z: 5}
    jac = [[sympy.nsimplify(sympy.diff(o, s).subs(pt)) for o in out] for s in (x, y, z)]
    nu = E(1, 2).scale(2) + E(2, 3).scale(-3) + E(1, 3).scale(5)
    got = ct.psi_derivative(nu, V0)
    assert [[F(str(v)) for v in row] for row in jac] == got


def test_psi_rejects_singular_v0():
    with pytest.raises(ct.SingularPointError, match="vanish"):
        ct.psi_map(E(1, 2), ct.trace_free_diagonal([1, 1, -2]))
    with pytest.raises(ValueError):
        ct.psi_map(E(2, 1), V0)
    with pytest.raises(ValueError):
        ct.psi_map(E(1, 2), V0 + E(1, 2))


# ---------------------------------------------------------------- sandwich

@pytest.mark.parametrize("T", [10, 20, 40])
def test_sandwich_roots(T):
    res = ct.star_ball_sandwich(np.diag(P.roots()), T, samples=80)
    assert res["holds"] and res["dim"] == 3
    assert res["estimate"] == pytest.approx(res["exact"], rel=res["grid_tol"] + 1e-9)


def test_sandwich_zero_and_rotated():
    res = ct.star_ball_sandwich(np.zeros((3, 3)), 10, samples=80)
    assert res["holds"] and res["lower"] == res["upper"]
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(3, 3)))
    res = ct.star_ball_sandwich(np.diag(P.roots()), 20, samples=80, k=q)
    assert res["holds"]
    with pytest.raises(ValueError):
        ct.star_ball_sandwich(np.diag(P.roots()), 1)
