"""The eleven acceptance criteria, each at its stated tolerance and time budget.

Every test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import random
import time
from fractions import Fraction as F

import numpy as np
import pytest
import sympy

from artifact import cli
from artifact import counting as ct
from artifact import good_functions as gf
from artifact import limiting as lim
from artifact import regular_forms as rf
from artifact.lie_core import LieElement, ad_matrix, algebra

from conftest import RADII

SEED = cli.DEFAULT_SEED
QCP_TYPES = ("A1", "A2", "A3", "C2", "A1xA1")
JORDAN_TYPES = QCP_TYPES + ("G2",)
A2 = algebra("A2")


def E(i, j):
    m = [[0] * 3 for _ in range(3)]
    m[i - 1][j - 1] = 1
    return A2.from_matrix(m)


def samples(tag, k=100):
    alg = algebra(tag)
    rng = random.Random(f"{SEED}-{tag}")
    return [rf.random_regular(alg, rng) for _ in range(k)]


@pytest.fixture(scope="module")
def qcp_runs():
    t0 = time.perf_counter()
    out = {tag: [(n, lim.classify(n, with_float_checks=False)) for n in samples(tag)]
           for tag in QCP_TYPES}
    g2 = lim.g2_counterexample()
    out["G2"] = [(g2, lim.classify(g2, with_float_checks=False))]
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def jordan_runs():
    t0 = time.perf_counter()
    out = {tag: [rf.jordan_decompose(n, "float") for n in samples(tag)] for tag in JORDAN_TYPES}
    return out, time.perf_counter() - t0


# ---------------------------------------------------------------- 1

@pytest.mark.criterion(1)
def test_c1_sl3_worked_example():
    t0 = time.perf_counter()
    tau = A2.from_matrix([[-1, 0, 0], [0, 0, 0], [0, 0, 1]])
    for x, y, z in [(1, 1, 5), (2, -3, 7), (-1, 4, -2)]:
        n = E(1, 2).scale(x) + E(2, 3).scale(y) + E(1, 3).scale(z)
        line = lim.leading_subspace(lim.orbit_curve(n, [tau])).subspace_basis
        assert len(line) == 1
        d = line[0]
        # exact proportionality to (x, y, 2z) in the E12, E23, E13 coordinates
        target = E(1, 2).scale(x) + E(2, 3).scale(y) + E(1, 3).scale(2 * z)
        k = next(i for i, c in enumerate(target.coeffs) if c)
        assert d.scale(target.coeffs[k] / d.coeffs[k]) == target
        res = lim.classify(n, with_float_checks=False)
        assert lim.same_span(res.subspace_basis, [E(1, 2).scale(x) + E(2, 3).scale(y), E(1, 3)])
    assert time.perf_counter() - t0 < 1


# ---------------------------------------------------------------- 2

@pytest.mark.criterion(2)
@pytest.mark.parametrize("tag", QCP_TYPES)
def test_c2_height_at_most_three_is_qcp(qcp_runs, tag):
    runs, _ = qcp_runs
    assert algebra(tag).height <= 3
    assert len(runs[tag]) == 100
    assert all(res.is_quasi_centralizing for _, res in runs[tag])


@pytest.mark.criterion(2)
def test_c2_g2_counterexample(qcp_runs):
    runs, elapsed = qcp_runs
    (n, res), = runs["G2"]
    assert n.algebra.height == 5
    assert not rf.vanishing_simple_roots(n) and len(rf.centralizer(n)) == n.algebra.rank
    assert not res.is_quasi_centralizing
    assert elapsed < 60


# ---------------------------------------------------------------- 3

@pytest.mark.criterion(3)
@pytest.mark.parametrize("tag", JORDAN_TYPES)
def test_c3_float_reconstruction(jordan_runs, tag):
    runs, elapsed = jordan_runs
    assert len(runs[tag]) == 100
    for cd in runs[tag]:
        assert (cd.reconstruct() - cd.n).norm() <= 1e-9
    assert elapsed < 60


@pytest.mark.criterion(3)
@pytest.mark.parametrize("tag", JORDAN_TYPES)
def test_c3_exact_on_rational_scale(tag):
    family = [n for n in samples(tag) if rf.jordan_decompose(n, "float").rational_scale]
    if tag == "A1":
        assert len(family) == 100
    for n in family:
        cd = rf.jordan_decompose(n, "exact")
        assert cd.reconstruct() == n


@pytest.mark.criterion(3)
@pytest.mark.parametrize("tag", JORDAN_TYPES)
def test_c3_omega_off_simple_roots(jordan_runs, tag):
    runs, _ = jordan_runs
    bad = sum(not cd.omega_simple_part_zero() for cd in runs[tag])
    assert bad == 0, f"{bad} of {len(runs[tag])} samples have omega on a simple root space"


# ---------------------------------------------------------------- 4

def sympy_centralizer(n):
    alg = n.algebra
    ns = sympy.Matrix(ad_matrix(n)).nullspace()
    return [LieElement(alg, tuple(F(int(v.p), int(v.q)) for v in col)) for col in ns]


@pytest.mark.criterion(4)
@pytest.mark.parametrize("tag", QCP_TYPES)
def test_c4_limit_structure(qcp_runs, tag):
    t0 = time.perf_counter()
    runs, _ = qcp_runs
    for n, res in runs[tag]:
        assert res.is_lie_algebra and res.is_abelian
        if tag in ("A1", "A2"):
            assert lim.same_span(res.subspace_basis, sympy_centralizer(n))
    assert time.perf_counter() - t0 < 60


# ---------------------------------------------------------------- 5

@pytest.mark.criterion(5)
def test_c5_convergence_rate():
    t0 = time.perf_counter()
    for n in samples("A2", 10):
        for row in lim.convergence_report(n, [10, 10 ** 2, 10 ** 3, 10 ** 4]):
            assert row["distance"] <= row["bound"] + 1e-9
    assert time.perf_counter() - t0 < 10


# ---------------------------------------------------------------- 6

@pytest.mark.criterion(6)
@pytest.mark.parametrize("T", [3, 4])
def test_c6_oracle_equivalence(T):
    t0 = time.perf_counter()
    p = ct.DELTA49_POLY
    assert ct.enumerate_count(p, T) == ct.brute_force_count(p, T)
    assert time.perf_counter() - t0 < 300


# ---------------------------------------------------------------- 7

@pytest.mark.criterion(7)
def test_c7_asymptotics(count_runs):
    res = count_runs[8]
    assert res.seconds <= 7200
    rows = [(T, res.count_below(T)) for T in RADII]
    fit = ct.fit_leading(rows)
    cp = ct.cp_n3(ct.DELTA49)
    print(f"slope {fit.slope:.4f} constant {fit.constant:.4f} cp_n3 {cp:.4f}")
    assert 2.8 <= fit.slope <= 3.2
    assert 1 / 1.5 <= fit.constant / cp <= 1.5


# ---------------------------------------------------------------- 8

@pytest.mark.criterion(8)
def test_c8_cp_consistency():
    t0 = time.perf_counter()
    grid = [ct.FieldInvariants(d, h, r, "grid point")
            for d in (49, 81, 148) for h in (1, 2, 3) for r in (0.5254546821225724, 1.0, 2.5)]
    assert len(grid) == 27
    for inv in grid:
        g, s = ct.cp_value(3, inv), ct.cp_n3(inv)
        assert abs(g - s) <= 1e-12 * abs(s)
    assert time.perf_counter() - t0 < 1


# ---------------------------------------------------------------- 9

@pytest.mark.criterion(9)
def test_c9_good_functions():
    t0 = time.perf_counter()
    for L in (1, 2, 4):
        for d in (F(1, 4), F(1, 2), F(1)):
            c = gf.certificate(L, d)
            assert c.is_valid() and all(v > 0 for v in (c.C, c.alpha, c.b, c.B, c.eta))
    rng = random.Random(SEED)
    for _ in range(1000):
        L = rng.choice((1, 2, 4))
        d = rng.choice((F(1, 4), F(1, 2), F(1)))
        k = rng.randint(1, int(2 * L / d) + 1)
        # k admissible exponents in [-L, L] with gaps >= d
        slack = 2 * L - (k - 1) * d
        pts = sorted(F(rng.randint(0, 1000), 1000) * slack for _ in range(k))
        lams = [-L + p + i * d for i, p in enumerate(pts)]
        assert all(abs(l) <= L for l in lams)
        assert gf.vandermonde_floor(lams, d).passed
    res = gf.good_suite(seed=SEED, functions=50, balls=50, Lambda=1, delta=1)
    assert res["failed"] == 0 and res["passed"] == 50 * 50 * 5
    assert time.perf_counter() - t0 < 60


# ---------------------------------------------------------------- 10

@pytest.mark.criterion(10)
def test_c10_psi_machinery():
    t0 = time.perf_counter()
    v0 = ct.trace_free_diagonal([3, 1, -2])
    rng = random.Random(SEED)
    for _ in range(50):
        nu = (E(1, 2).scale(F(rng.randint(-9, 9), rng.randint(1, 9)))
              + E(2, 3).scale(F(rng.randint(-9, 9), rng.randint(1, 9)))
              + E(1, 3).scale(F(rng.randint(-9, 9), rng.randint(1, 9))))
        assert ct.psi_inverse(ct.psi_map(nu, v0), v0) == nu
        jc = ct.jacobian_check(nu, v0)
        assert jc["det_normalized"] == 1 and jc["unit_upper_triangular"]
    for T in (10, 20, 40):
        assert ct.star_ball_sandwich(np.diag(ct.DELTA49_POLY.roots()), T)["holds"]
    assert time.perf_counter() - t0 < 30


# ---------------------------------------------------------------- 11

def cli_bytes(tmp_path, monkeypatch, argv, threads):
    monkeypatch.setenv(ct.THREADS_ENV, str(threads))
    path = tmp_path / f"out-{threads}-{time.perf_counter_ns()}"
    assert cli.run(argv + ["--out", str(path)]) == 0
    return path.read_bytes()


@pytest.mark.criterion(11)
@pytest.mark.parametrize("tag", QCP_TYPES + ("G2",))
def test_c11_qcp_deterministic(tmp_path, monkeypatch, tag):
    argv = ["qcp", "--type", tag] + (["--counterexample"] if tag == "G2" else ["--samples", "100"])
    outs = {cli_bytes(tmp_path, monkeypatch, argv, k) for k in (1, 2, 8)}
    assert len(outs) == 1


@pytest.mark.criterion(11)
def test_c11_oracle_counts_deterministic(tmp_path, monkeypatch):
    argv = ["count", "--tmin", "3", "--tstep", "1", "--tmax", "4", "--no-timing"]
    outs = {cli_bytes(tmp_path, monkeypatch, argv + ["--threads", str(k)], k) for k in (1, 2, 8)}
    outs |= {cli_bytes(tmp_path, monkeypatch, argv + ["--threads", "2"], 2)}
    assert len(outs) == 1
    assert outs.pop().split(b"\r\n")[1:3] == [
        f"{T},{ct.brute_force_count(ct.DELTA49_POLY, T)},".encode() for T in (3, 4)]


@pytest.mark.criterion(11)
def test_c11_asymptotic_table_deterministic(tmp_path, monkeypatch, count_runs):
    for k in (2, 8):
        assert np.array_equal(count_runs[k].hist, count_runs[1].hist)
    argv = ["count", "--tmin", "10", "--tstep", "5", "--tmax", "40", "--single-pass", "--no-timing"]
    outs = {cli_bytes(tmp_path, monkeypatch, argv + ["--threads", str(k)], k) for k in (1, 2, 8)}
    assert len(outs) == 1
    body = outs.pop().decode()
    got = {int(r.split(",")[0]): int(r.split(",")[1]) for r in body.split("\r\n")[1:] if r}
    assert all(got[T] == count_runs[1].count_below(T) for T in RADII)
