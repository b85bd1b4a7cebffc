"""Integral 3x3 matrices with prescribed characteristic polynomial.

N(T) = #{M in M_3(Z) : char poly of M is p, ||M||_F < T}.  For p irreducible
over Q and split over R, N(T) ~ c_p T^3, with c_p given in closed form by
the class number, regulator and discriminant of Q(alpha).

Also here: the polynomial change of variables Psi(nu) = Ad(exp(-nu)) v0 - v0
on the upper nilpotent part w of a split algebra, its inverse and Jacobian,
and a grid check of the ball sandwich for the sets it carries balls to.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath import zeta

from . import _count_kernel as K
from .exact import det as exact_det
from .lie_core import LieElement, SplitLieAlgebra, ad_matrix, algebra, bracket

THREADS_ENV = "ARTIFACT_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True)
class CubicPoly:
    """p(x) = x^3 + a2 x^2 + a1 x + a0 with integer coefficients."""

    a2: int
    a1: int
    a0: int

    @classmethod
    def parse(cls, text: str) -> "CubicPoly":
        parts = [int(s) for s in text.replace(" ", "").split(",")]
        if len(parts) != 3:
            raise ValueError("expected three coefficients a2,a1,a0")
        return cls(*parts)

    @property
    def power_sums(self) -> tuple[int, int, int]:
        """(trace, sum of principal 2-minors, determinant) of any matrix with this char poly."""
        return -self.a2, self.a1, -self.a0

    def __call__(self, x):
        return ((x + self.a2) * x + self.a1) * x + self.a0

    @property
    def discriminant(self) -> int:
        a, b, c = self.a2, self.a1, self.a0
        return 18 * a * b * c - 4 * a ** 3 * c + a * a * b * b - 4 * b ** 3 - 27 * c * c

    @property
    def irreducible(self) -> bool:
        # a monic integer cubic is reducible over Q iff it has an integer root dividing a0
        if self.a0 == 0:
            return False
        n = abs(self.a0)
        for d in range(1, math.isqrt(n) + 1):
            if n % d == 0:
                for r in (d, -d, n // d, -(n // d)):
                    if self(r) == 0:
                        return False
        return True

    @property
    def split_over_R(self) -> bool:
        return self.discriminant > 0

    def roots(self) -> np.ndarray:
        return np.sort(np.roots([1, self.a2, self.a1, self.a0]).real)

    def to_json(self) -> dict:
        return {"a2": self.a2, "a1": self.a1, "a0": self.a0, "irreducible": self.irreducible,
                "split_over_R": self.split_over_R, "discriminant": self.discriminant}


def companion(p: CubicPoly) -> list[list[int]]:
    return [[0, 0, -p.a0], [1, 0, -p.a1], [0, 1, -p.a2]]


def char_poly(m: Sequence[Sequence]) -> tuple:
    """(a2, a1, a0) of det(x I - m), exact."""
    tr = m[0][0] + m[1][1] + m[2][2]
    m2 = sum(m[i][i] * m[j][j] - m[i][j] * m[j][i] for i, j in ((0, 1), (0, 2), (1, 2)))
    d = exact_det([list(r) for r in m])
    d = int(d) if d.denominator == 1 else d
    return -tr, m2, -d


def frobenius_sq(m) -> int:
    return sum(x * x for row in m for x in row)


# ---------------------------------------------------------------- enumeration

@dataclass
class Enumeration:
    T: int
    hist: np.ndarray            # hist[k] = #solutions with squared norm k
    hits: np.ndarray            # (stored, 9) when collected, else empty
    singular: int
    failed_verification: int
    seconds: float

    def count_below(self, T) -> int:
        """N(T) for any T up to the enumerated radius: squared norms < T^2."""
        if T > self.T:
            raise ValueError("radius exceeds the enumerated one")
        k = math.ceil(T * T) if isinstance(T, (int, Fraction)) else math.ceil(T * T - 1e-12)
        return int(self.hist[:k].sum())

    @property
    def total(self) -> int:
        return int(self.hist.sum())


def _check_poly(p: CubicPoly, allow_reducible: bool):
    if not allow_reducible and not p.irreducible:
        raise ValueError(f"{p} is reducible over Q; fibres may be positive dimensional")


def _chunks(T: int, threads: int):
    # interleaved first-entry values give each worker a similar mix of heavy and light rows
    values = np.arange(-(T - 1), T, dtype=np.int64) if T > 0 else np.zeros(0, np.int64)
    values = values[np.argsort(np.abs(values), kind="stable")]
    pieces = max(1, 4 * threads)
    return [values[i::pieces] for i in range(pieces) if len(values[i::pieces])]


def enumerate_rows(p: CubicPoly, T: int, threads: int | None = None, collect: int = 0,
                   allow_reducible: bool = False, symmetric: bool | None = None) -> Enumeration:
    """Row-solve enumeration of all M with char poly p and ||M||_F < T (T an integer).

    ``collect`` > 0 keeps up to that many matrices, which turns the sign
    symmetry off.  The histogram is an integer sum over chunks, so the result
    does not depend on ``threads``.
    """
    _check_poly(p, allow_reducible)
    if T <= 0 or int(T) != T:
        raise ValueError("T must be a positive integer")
    T = int(T)
    threads = default_threads() if threads is None else threads
    if symmetric is None:
        symmetric = collect == 0
    if collect and symmetric:
        raise ValueError("collecting matrices requires symmetric=False")
    s1, s2, s3 = p.power_sums
    T2 = T * T
    chunks = _chunks(T, threads)

    def work(vals):
        hist, hits, state = K.new_buffers(T2, collect)
        K.count_rows(s1, s2, s3, T2, vals, symmetric, hist, hits, state)
        return hist, hits[:min(state[0], collect)], state

    t0 = time.perf_counter()
    if threads == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    seconds = time.perf_counter() - t0
    hist = np.zeros(T2, dtype=np.int64)
    for h, _, _ in parts:
        hist += h
    hits = np.concatenate([h for _, h, _ in parts]) if collect else np.zeros((0, 9), np.int64)
    if collect:
        hits = hits[np.lexsort(hits.T[::-1])]
        if len(hits) < hist.sum():
            raise RuntimeError("hit buffer too small for the requested radius")
    return Enumeration(T, hist, hits, int(sum(s[2] for _, _, s in parts)),
                       int(sum(s[1] for _, _, s in parts)), seconds)


def enumerate_count(p: CubicPoly, T: int, threads: int | None = None,
                    allow_reducible: bool = False) -> int:
    res = enumerate_rows(p, T, threads, allow_reducible=allow_reducible)
    if res.failed_verification:
        raise RuntimeError(f"{res.failed_verification} row-solve hits failed verification")
    return res.total


def enumerate_matrices(p: CubicPoly, T: int, threads: int | None = None,
                       capacity: int = 100_000, allow_reducible: bool = False) -> np.ndarray:
    """All matrices as an (N, 9) array, rows in lexicographic order."""
    return enumerate_rows(p, T, threads, collect=capacity, allow_reducible=allow_reducible,
                          symmetric=False).hits


def _ball_points(dim: int, T: int) -> np.ndarray:
    r = np.arange(-(T - 1), T)
    mesh = np.stack(np.meshgrid(*([r] * dim), indexing="ij"), -1).reshape(-1, dim)
    return mesh[(mesh * mesh).sum(1) < T * T]


def brute_force_count(p: CubicPoly, T: int, allow_large: bool = False,
                      return_matrices: bool = False):
    """Independent oracle: every integer matrix in the box, filtered by norm and char poly.

    Rows one and two come from the integer ball, the third row is vectorised,
    and the char poly is read off the defining minors (no cofactor solve).
    """
    if T > 6 and not allow_large:
        raise ValueError("brute force beyond T = 6 needs allow_large=True")
    T = int(math.ceil(T))
    rows = _ball_points(3, T)
    sq = (rows * rows).sum(1)
    T2 = T * T
    s1, s2, s3 = p.power_sums
    total = 0
    found = []
    for i in range(len(rows)):
        r1 = rows[i]
        budget = T2 - sq[i]
        for j in np.nonzero(sq < budget)[0]:
            r2 = rows[j]
            third = rows[sq < budget - sq[j]]
            a, b, c = r1
            d, e, f = r2
            g, h, k = third[:, 0], third[:, 1], third[:, 2]
            tr = a + e + k
            m2 = a * e - b * d + a * k - c * g + e * k - f * h
            det = a * (e * k - f * h) - b * (d * k - f * g) + c * (d * h - e * g)
            ok = (tr == s1) & (m2 == s2) & (det == s3)
            total += int(ok.sum())
            if return_matrices and ok.any():
                for t in third[ok]:
                    found.append(np.concatenate([r1, r2, t]))
    if return_matrices:
        out = np.array(found, dtype=np.int64).reshape(-1, 9)
        return out[np.lexsort(out.T[::-1])] if len(out) else out
    return total


@dataclass
class CountRow:
    T: int
    N: int
    seconds: float


def count_table(p: CubicPoly, radii: Sequence[int], threads: int | None = None,
                single_pass: bool = False) -> list[CountRow]:
    """N(T) per radius.  ``single_pass`` enumerates once at max(radii) and reads
    every N(T) off the norm histogram; the time column is then the shared pass."""
    radii = sorted(set(int(t) for t in radii))
    if single_pass:
        res = enumerate_rows(p, radii[-1], threads)
        _raise_on_failures(res)
        return [CountRow(t, res.count_below(t), res.seconds) for t in radii]
    out = []
    for t in radii:
        res = enumerate_rows(p, t, threads)
        _raise_on_failures(res)
        out.append(CountRow(t, res.total, res.seconds))
    return out


def _raise_on_failures(res: Enumeration):
    if res.failed_verification:
        raise RuntimeError(f"{res.failed_verification} row-solve hits failed verification")


# ---------------------------------------------------------------- constants

@dataclass(frozen=True)
class FieldInvariants:
    disc: float
    h: int
    reg: float
    provenance: str

    def __post_init__(self):
        if not self.provenance.strip():
            raise ValueError("field invariants need a provenance note")
        if self.disc <= 0 or self.h < 1 or self.reg <= 0:
            raise ValueError("invariants must be positive")


# Q(alpha) for alpha a root of x^3 - x^2 - 2x + 1; alpha = -2 cos(2 pi k / 7).
DELTA49 = FieldInvariants(
    disc=49, h=1, reg=0.5254546821225724,
    provenance=("Cubic field 3.3.49.1 in the LMFDB, the real subfield of Q(zeta_7): "
                "discriminant 49, class number 1. Regulator evaluated to 30 digits from the "
                "cyclotomic units 2cos(2pi/7), 2cos(4pi/7), which generate the unit group "
                "because the class number is 1. The polynomial discriminant is also 49, so "
                "Z[alpha] is the maximal order."),
)
DELTA49_POLY = CubicPoly(-1, -2, 1)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def cp_value(n: int, inv: FieldInvariants) -> float:
    """c_p for degree n from the general closed form (beta_n: unit ball in dim n(n-1)/2)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    denom = math.sqrt(inv.disc)
    for k in range(2, n + 1):
        denom *= math.pi ** (-k / 2) * math.gamma(k / 2) * float(zeta(k))
    return 2 ** (n - 1) * inv.h * inv.reg * unit_ball_volume(n * (n - 1) // 2) / denom


def cp_n3(inv: FieldInvariants) -> float:
    return 64 * math.pi / float(zeta(3)) * inv.h * inv.reg / math.sqrt(inv.disc)


def cp_report(inv: FieldInvariants) -> dict:
    g, s = cp_value(3, inv), cp_n3(inv)
    return {"cp_general": g, "cp_n3": s, "rel_diff": abs(g - s) / abs(s)}


def regulator_from_units(units: Sequence[Sequence[float]]) -> float:
    """|det log|sigma_i(eps_j)|| over r embeddings, for r units given by their conjugates."""
    m = np.log(np.abs(np.asarray(units, dtype=float)))[:, :-1]
    return abs(float(np.linalg.det(m)))


@dataclass
class Fit:
    slope: float
    constant: float
    residual: float
    constant_at: float      # constant with the slope pinned to ``exponent``
    exponent: float


def fit_leading(rows: Sequence, exponent: float = 3.0) -> Fit:
    """Least squares on (log T, log N)."""
    pts = [(r.T, r.N) if isinstance(r, CountRow) else (r[0], r[1]) for r in rows]
    pts = [(t, n) for t, n in pts if n > 0]
    if len(pts) < 4:
        raise ValueError("need at least four rows with N > 0")
    x = np.log([t for t, _ in pts])
    y = np.log([n for _, n in pts])
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    pinned = float(np.exp(np.mean(y - exponent * x)))
    return Fit(float(slope), float(np.exp(icpt)), resid, pinned, exponent)


# ---------------------------------------------------------------- Psi

class SingularPointError(ValueError):
    pass


def _check_v0(v0: LieElement) -> dict:
    alg = v0.algebra
    if any(v0.coeffs[i] for i in range(alg.rank, alg.dim)):
        raise ValueError("v0 must lie in the Cartan subalgebra")
    vals = {}
    for i in alg.positive_indices:
        beta = alg.root_of_index[i]
        vals[i] = sum(v0.coeffs[j] * alg.root_value(beta, j) for j in range(alg.rank))
    bad = [alg.root_of_index[i] for i, v in vals.items() if v == 0]
    if bad:
        raise SingularPointError(f"v0 is not regular: root(s) {bad} vanish on it")
    return vals


def _in_w(nu: LieElement):
    alg = nu.algebra
    pos = set(alg.positive_indices)
    if any(c for i, c in enumerate(nu.coeffs) if i not in pos):
        raise ValueError("nu must lie in the positive nilpotent part")


def psi_map(nu: LieElement, v0: LieElement) -> LieElement:
    """Psi(nu) = Ad(exp(-nu)) v0 - v0."""
    _check_v0(v0)
    _in_w(nu)
    out = v0.algebra.zero()
    term = v0
    minus = nu.scale(-1)
    for k in range(1, nu.algebra.dim + 2):
        term = bracket(minus, term).scale(Fraction(1, k) if term.exact and nu.exact else 1 / k)
        if term.is_zero():
            return out
        out = out + term
    raise ValueError("nu is not nilpotent")


def psi_inverse(target: LieElement, v0: LieElement) -> LieElement:
    """Solve Psi(nu) = target height by height.

    The height-k part of Psi(nu) is beta(v0) nu_beta E_beta plus a polynomial
    in the components of nu of height < k.
    """
    vals = _check_v0(v0)
    _in_w(target)
    alg = v0.algebra
    exact = target.exact and v0.exact
    coeffs = [Fraction(0) if exact else 0.0] * alg.dim
    for k in range(1, alg.height + 1):
        cur = psi_map(LieElement(alg, tuple(coeffs)), v0)
        for i in alg.indices_of_height(k):
            coeffs[i] = (target.coeffs[i] - cur.coeffs[i]) / vals[i]
    return LieElement(alg, tuple(coeffs))


def _height_order(alg: SplitLieAlgebra) -> list[int]:
    return sorted(alg.positive_indices, key=lambda i: (alg.root_height(i), i))


def psi_derivative(nu: LieElement, v0: LieElement) -> list[list]:
    """Row i is dPsi_nu(b_i) in the height-ordered positive basis b.

    dPsi_nu(e) = sum_k 1/k! sum_{i<k} A^i B A^{k-1-i} v0 with A = ad(-nu),
    B = ad(-e), evaluated exactly.
    """
    _check_v0(v0)
    _in_w(nu)
    alg = nu.algebra
    order = _height_order(alg)
    A = ad_matrix(nu.scale(-1))
    exact = nu.exact and v0.exact
    if not exact:
        A = np.asarray(A, dtype=float)
    v = list(v0.coeffs)

    def mv(m, x):
        if exact:
            return [sum((a * b for a, b in zip(row, x) if a and b), Fraction(0)) for row in m]
        return list(np.asarray(m, dtype=float) @ np.asarray(x, dtype=float))

    # powers A^j v0
    pw = [v]
    while any(pw[-1]) and len(pw) <= alg.dim + 1:
        pw.append(mv(A, pw[-1]))
    rows = []
    for bi in order:
        e = LieElement(alg, tuple(Fraction(int(j == bi)) if exact else float(j == bi)
                                  for j in range(alg.dim)))
        B = ad_matrix(e.scale(-1))
        total = [0] * alg.dim
        fact = 1
        for k in range(1, len(pw) + 1):
            fact *= k
            for i in range(k):
                if k - 1 - i >= len(pw):
                    continue
                x = mv(B, pw[k - 1 - i])
                for _ in range(i):
                    x = mv(A, x)
                coef = Fraction(1, fact) if exact else 1 / fact
                total = [t + coef * xi for t, xi in zip(total, x)]
        rows.append([total[j] for j in order])
    return rows


def jacobian_check(nu: LieElement, v0: LieElement) -> dict:
    """Structure of dPsi at nu.

    In the target basis beta(v0) b_beta (the image of b under ad(-.) v0) the
    derivative is exactly unit upper triangular, hence of determinant one.
    Read against b itself the determinant is the constant prod_beta beta(v0).
    """
    vals = _check_v0(v0)
    alg = nu.algebra
    order = _height_order(alg)
    raw = psi_derivative(nu, v0)
    norm = [[raw[i][j] / vals[order[j]] for j in range(len(order))] for i in range(len(order))]
    n = len(order)
    unit_upper = all(norm[i][i] == 1 for i in range(n)) and \
        all(norm[i][j] == 0 for i in range(n) for j in range(i))
    exact = nu.exact and v0.exact
    if exact:
        d_norm, d_raw = exact_det(norm), exact_det(raw)
    else:
        d_norm = float(np.linalg.det(np.asarray(norm, dtype=float)))
        d_raw = float(np.linalg.det(np.asarray(raw, dtype=float)))
    expected = 1
    for i in order:
        expected *= vals[i]
    return {"normalized": norm, "raw": raw, "unit_upper_triangular": unit_upper,
            "det_normalized": d_norm, "det_raw": d_raw, "det_raw_expected": expected}


def trace_free_diagonal(diag: Sequence, alg: SplitLieAlgebra | None = None) -> LieElement:
    """The sl_n Cartan element with the trace-free part of diag(diag)."""
    alg = alg or algebra(f"A{len(diag) - 1}")
    n = len(diag)
    exact = all(isinstance(d, (int, Fraction)) for d in diag)
    mean = sum(Fraction(d) for d in diag) / n if exact else sum(diag) / n
    m = [[(d - mean) if i == j else (Fraction(0) if exact else 0.0) for j in range(n)]
         for i, d in enumerate(diag)]
    if exact:
        return alg.from_matrix(m)
    return LieElement(alg, tuple(np.linalg.lstsq(
        np.array([np.asarray(b.matrix(), dtype=float).ravel() for b in alg.basis]).T,
        np.asarray(m, dtype=float).ravel(), rcond=None)[0]))


# ---------------------------------------------------------------- ball sandwich

def star_ball_sandwich(v0: Sequence[Sequence[float]], T: float, samples: int = 160,
                       k: np.ndarray | None = None) -> dict:
    """Grid volume of C_T = {nu strictly upper triangular : ||nu + Ad(k^-1) v0||_F < T}.

    v0 is an n x n matrix (for the counting problem, the diagonal of the
    roots of p).  The grid counts cell centres of a uniform grid on the box
    of half-width T + ||v_k||; lower and upper are the volumes of the balls
    of radius T -/+ ||v_k|| in the coordinates of w.
    """
    v0 = np.asarray(v0, dtype=float)
    vk = v0 if k is None else k.T @ v0 @ k
    nv = float(np.linalg.norm(vk))
    if T <= nv:
        raise ValueError("T must exceed ||v0||")
    n = v0.shape[0]
    iu = np.triu_indices(n, 1)
    dim = len(iu[0])
    shift = vk[iu]
    outside = nv ** 2 - float((shift ** 2).sum())
    R = T + nv
    h = 2 * R / samples
    axis = -R + h * (np.arange(samples) + 0.5)
    count = 0
    # slab by slab along the first coordinate keeps memory flat
    rest = np.stack(np.meshgrid(*([axis] * (dim - 1)), indexing="ij"), -1).reshape(-1, dim - 1)
    rest_sq = ((rest + shift[1:]) ** 2).sum(1)
    for x in axis:
        count += int(np.count_nonzero((x + shift[0]) ** 2 + rest_sq + outside < T * T))
    estimate = count * h ** dim
    c = unit_ball_volume(dim)
    exact = c * max(T * T - outside, 0) ** (dim / 2)
    lower, upper = c * (T - nv) ** dim, c * (T + nv) ** dim
    # every misclassified cell meets the boundary sphere, so the relative error
    # is at most about dim * (half the cell diagonal) / radius
    tol = dim * (math.sqrt(dim) * h / 2) / math.sqrt(max(T * T - outside, 1e-300))
    holds = lower * (1 - tol) <= estimate <= upper * (1 + tol)
    return {"T": T, "estimate": estimate, "exact": exact, "lower": lower, "upper": upper,
            "grid_tol": tol, "holds": holds, "dim": dim, "v_norm": nv,
            "ratio": estimate / T ** dim}
