"""Limits of t -> Ad(exp(t n)) a in the Grassmannian and the QCP checks.

The curve is written in Plücker coordinates as a polynomial in t, one
coefficient per degree.  Each coefficient is an exact ``WedgeVector``.  The
limit at infinity is read off the top coefficient P as the kernel of
v -> v ^ P.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import exact as ex
from .lie_core import (
    LieElement,
    SplitLieAlgebra,
    Ad_exp,
    ad_matrix,
    algebra,
    bracket,
    exp_ad_nilpotent,
    h_natural,
)
from .regular_forms import (
    centralizer,
    complete_triple,
    epsilon_regularity,
    in_positive_part,
    jordan_decompose,
    natural_triple,
    vanishing_simple_roots,
)


def _sign_insert(key: tuple, i: int) -> int:
    """Sign of e_i ^ e_key -> e_sorted(key + i)."""
    return -1 if sum(1 for k in key if k < i) % 2 else 1


@dataclass
class WedgeVector:
    grade: int
    dim: int
    coords: dict = field(default_factory=dict)  # sorted index tuple -> Fraction

    @classmethod
    def from_vector(cls, v: Sequence) -> "WedgeVector":
        return cls(1, len(v), {(i,): Fraction(c) for i, c in enumerate(v) if c})

    @classmethod
    def from_vectors(cls, vs: Sequence[Sequence]) -> "WedgeVector":
        w = cls.from_vector(vs[0])
        for v in vs[1:]:
            w = w.wedge(v)
        return w

    def wedge(self, v: Sequence) -> "WedgeVector":
        """self ^ v for a grade-one vector v."""
        out: dict = {}
        nz = [(i, c) for i, c in enumerate(v) if c]
        for key, a in self.coords.items():
            for i, c in nz:
                if i in key:
                    continue
                # e_key ^ e_i = (-1)^{#k > i} e_sorted
                s = -1 if sum(1 for k in key if k > i) % 2 else 1
                nk = tuple(sorted(key + (i,)))
                out[nk] = out.get(nk, 0) + s * a * c
        return WedgeVector(self.grade + 1, self.dim, {k: x for k, x in out.items() if x})

    def __add__(self, other):
        out = dict(self.coords)
        for k, v in other.coords.items():
            out[k] = out.get(k, 0) + v
        return WedgeVector(self.grade, self.dim, {k: v for k, v in out.items() if v})

    def scale(self, c):
        return WedgeVector(self.grade, self.dim, {k: c * v for k, v in self.coords.items() if c * v})

    def is_zero(self) -> bool:
        return not self.coords

    def inner(self, other: "WedgeVector", alg: SplitLieAlgebra):
        """Induced inner product: sum_{I,J} x_I y_J det(G[I, J])."""
        return _wedge_inner(self.coords, other.coords, alg)

    def norm2(self, alg: SplitLieAlgebra):
        return self.inner(self, alg)

    def norm(self, alg: SplitLieAlgebra) -> float:
        return math.sqrt(float(self.norm2(alg)))

    def annihilator(self) -> list[list[Fraction]]:
        """Exact basis of {v : v ^ self = 0}."""
        rows: dict = {}
        for key, a in self.coords.items():
            for i in range(self.dim):
                if i in key:
                    continue
                u = tuple(sorted(key + (i,)))
                row = rows.setdefault(u, {})
                row[i] = row.get(i, 0) + _sign_insert(key, i) * a
        return ex.sparse_kernel(rows.values(), self.dim)

    def is_pure(self) -> bool:
        return not self.is_zero() and len(self.annihilator()) == self.grade

    def plucker_residuals(self) -> list:
        """Quadratic Plücker relations p_ij p_kl - p_ik p_jl + p_il p_jk (grade 2 only)."""
        if self.grade != 2:
            raise ValueError("quadratic relations implemented for grade 2")
        p = lambda i, j: self.coords.get((i, j), 0)
        return [p(i, j) * p(k, l) - p(i, k) * p(j, l) + p(i, l) * p(j, k)
                for i, j, k, l in itertools.combinations(range(self.dim), 4)]

    def to_json(self) -> dict:
        return {"grade": self.grade,
                "coords": {",".join(map(str, k)): ex.fmt(v) for k, v in sorted(self.coords.items())}}


def _cartan_minor(alg: SplitLieAlgebra, rows: tuple, cols: tuple):
    cache = alg.__dict__.setdefault("_minor_cache", {})
    key = (rows, cols)
    if key not in cache:
        cache[key] = ex.det([[alg.gram[i][j] for j in cols] for i in rows]) if rows else Fraction(1)
    return cache[key]


def _wedge_inner(x: dict, y: dict, alg: SplitLieAlgebra):
    r = alg.rank
    groups: dict = {}
    for key, v in y.items():
        cart = tuple(k for k in key if k < r)
        rest = key[len(cart):]
        groups.setdefault(rest, []).append((cart, v))
    tot = Fraction(0)
    for key, a in x.items():
        cart = tuple(k for k in key if k < r)
        rest = key[len(cart):]
        if rest not in groups:
            continue
        diag = Fraction(1)
        for k in rest:
            diag *= alg.gram[k][k]
        for cart2, b in groups[rest]:
            m = _cartan_minor(alg, cart, cart2)
            if m:
                tot += a * b * diag * m
    return tot


@dataclass
class GrassmannCurve:
    algebra: SplitLieAlgebra
    grade: int
    coefficients: list  # WedgeVector per power of t

    @property
    def degree(self) -> int:
        nz = [k for k, c in enumerate(self.coefficients) if not c.is_zero()]
        if not nz:
            raise ValueError("zero curve")
        return nz[-1]

    def evaluate(self, t) -> WedgeVector:
        out = WedgeVector(self.grade, self.algebra.dim, {})
        p = Fraction(1) if isinstance(t, (int, Fraction)) else 1.0
        for c in self.coefficients:
            out = out + c.scale(p)
            p = p * t
        return out


def orthogonal_cartan(alg: SplitLieAlgebra) -> list[LieElement]:
    """Exact orthogonal basis of the Cartan subalgebra (Gram-Schmidt on the coroots)."""
    vecs = [[Fraction(int(i == j)) for i in range(alg.dim)] for j in range(alg.rank)]
    return [LieElement(alg, tuple(v)) for v in ex.gram_schmidt(vecs, alg.gram)]


def orbit_curve(n: LieElement, subspace: Sequence[LieElement] | None = None) -> GrassmannCurve:
    """Plücker curve of Ad(exp(t n)) applied to span(subspace), default the Cartan subalgebra."""
    alg = n.algebra
    if not n.exact:
        raise TypeError("orbit_curve works over the rationals")
    taus = orthogonal_cartan(alg) if subspace is None else list(subspace)
    if ex.rank([list(t.coeffs) for t in taus]) != len(taus):
        raise ValueError("subspace basis is linearly dependent")
    cap = alg.height
    factors = []
    for tau in taus:
        terms = [tau]
        k = 0
        while True:
            k += 1
            nxt = bracket(n, terms[-1]).scale(Fraction(1, k))
            if nxt.is_zero():
                break
            terms.append(nxt)
            if k > 2 * alg.height + 1:
                raise ValueError("element is not ad-nilpotent")
        factors.append([list(t.coeffs) for t in terms])
    # polynomial wedge, coefficient lists indexed by degree
    cur = [WedgeVector.from_vector(c) for c in factors[0]]
    for fac in factors[1:]:
        nxt = [WedgeVector(cur[0].grade + 1, alg.dim, {}) for _ in range(len(cur) + len(fac) - 1)]
        for a, w in enumerate(cur):
            if w.is_zero():
                continue
            for b, v in enumerate(fac):
                nxt[a + b] = nxt[a + b] + w.wedge(v)
        cur = nxt
    while len(cur) > 1 and cur[-1].is_zero():
        cur.pop()
    curve = GrassmannCurve(alg, len(taus), cur)
    if in_positive_part(n) and curve.degree > len(taus) * cap:
        raise AssertionError("curve degree exceeds the rank times height cap")
    return curve


@dataclass
class LimitingResult:
    algebra: SplitLieAlgebra
    subspace_basis: list
    leading_degree: int
    c_phi: float
    leading: WedgeVector | None = None
    is_lie_algebra: bool | None = None
    is_abelian: bool | None = None
    is_quasi_centralizing: bool | None = None
    is_centralizing: bool | None = None
    witness: LieElement | None = None
    projection_norm: float | None = None
    pairing: float | None = None

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra.type_tag,
            "subspace_basis": [v.to_json()["coeffs"] for v in self.subspace_basis],
            "leading_degree": self.leading_degree,
            "c_phi": self.c_phi,
            "is_lie_algebra": self.is_lie_algebra,
            "is_abelian": self.is_abelian,
            "is_quasi_centralizing": self.is_quasi_centralizing,
            "is_centralizing": self.is_centralizing,
            "witness": None if self.witness is None else self.witness.to_json()["coeffs"],
        }


def c_phi(curve: GrassmannCurve) -> float:
    """4 max{1, D |x_k| / |x_D|}, the constant of the 1/t convergence bound."""
    alg = curve.algebra
    deg = curve.degree
    top = curve.coefficients[deg].norm(alg)
    vals = [1.0] + [deg * c.norm(alg) / top for c in curve.coefficients[:deg]]
    return 4.0 * max(vals)


def leading_subspace(curve: GrassmannCurve) -> LimitingResult:
    alg = curve.algebra
    deg = curve.degree
    top = curve.coefficients[deg]
    ker = top.annihilator()
    if len(ker) != curve.grade:
        raise AssertionError("leading coefficient is not a pure wedge")
    basis = [LieElement(alg, tuple(v)) for v in _normalize_basis(ker)]
    return LimitingResult(alg, basis, deg, c_phi(curve), leading=top)


def _normalize_basis(vs: list[list[Fraction]]) -> list[list[Fraction]]:
    red, piv = ex.rref(vs)
    out = []
    for row in red:
        den = 1
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
        ints = [int(x * den) for x in row]
        g = functools.reduce(math.gcd, ints, 0) or 1
        out.append([Fraction(x // g) for x in ints])
    return out


def span_contains(basis: Sequence[LieElement], x: LieElement) -> bool:
    return ex.in_span([list(b.coeffs) for b in basis], list(x.coeffs))


def same_span(a: Sequence[LieElement], b: Sequence[LieElement]) -> bool:
    return ex.span_equal([list(v.coeffs) for v in a], [list(v.coeffs) for v in b])


def fubini_study(x: WedgeVector, y: WedgeVector, alg: SplitLieAlgebra) -> float:
    """min(|x^ - y^|, |x^ + y^|) for the normalized vectors, computed from exact Gram data."""
    xy = x.inner(y, alg)
    xx, yy = x.norm2(alg), y.norm2(alg)
    c2 = xy * xy / (xx * yy)          # exact cos^2
    one_minus = (1 - c2)              # exact, >= 0
    cos = math.sqrt(float(c2))
    return math.sqrt(max(0.0, 2.0 * float(one_minus) / (1.0 + cos)))


def classify(n: LieElement, with_float_checks: bool = True) -> LimitingResult:
    """Limit of Ad(exp(t n)) a plus the Lie algebra and QCP flags."""
    alg = n.algebra
    if vanishing_simple_roots(n):
        raise ValueError("classification needs a regular element")
    res = leading_subspace(orbit_curve(n))
    lim = res.subspace_basis
    res.is_lie_algebra = all(span_contains(lim, bracket(a, b)) for a, b in itertools.combinations(lim, 2))
    res.is_abelian = all(bracket(a, b).is_zero() for a, b in itertools.combinations(lim, 2))

    cd = jordan_decompose(n, "float")
    # complement of u_n = Z(n): image of ad of the lowering element of n's triple
    h0 = h_natural(alg)
    m0 = complete_triple(cd.n_simple, h0)
    g = exp_ad_nilpotent(cd.omega_prime)
    m = LieElement(alg, tuple(ex.matvec(g, m0.coeffs)))
    adm = ad_matrix(m)
    image = [list(col) for col in ex.transpose(adm)]
    rows = [list(v.coeffs) for v in lim] + image
    res.is_quasi_centralizing = ex.rank(rows) == alg.dim and ex.rank(image) == alg.dim - alg.rank
    if res.is_quasi_centralizing:
        # n' in the limit with projection onto Z(n) equal to n
        a = ex.transpose([list(v.coeffs) for v in lim] + ex.rref(image)[0])
        sol = ex.solve(a, list(n.coeffs))
        coeffs = [Fraction(0)] * alg.dim
        for c, v in zip(sol[:len(lim)], lim):
            for i, x in enumerate(v.coeffs):
                coeffs[i] += c * x
        w = LieElement(alg, tuple(coeffs))
        res.witness = w
        res.is_centralizing = (in_positive_part(w) and not vanishing_simple_roots(w)
                               and same_span(lim, centralizer(w)))
    else:
        res.is_centralizing = False
    if with_float_checks:
        res.projection_norm, res.pairing = _float_checks(alg, cd, lim, m, n)
    return res


def _float_checks(alg, cd, lim, m, n):
    """Operator norm of the projection restricted to the limit, and the pairing value.

    Both use the pushed-forward inner product <g^-1 x, g^-1 y> with
    g = Ad(e^sigma) Ad(exp omega), in which the weight spaces of n's triple
    are orthogonal.
    """
    d = alg.dim
    ident = np.eye(d)
    sig_inv = np.array([cd.apply_sigma(LieElement(alg, tuple(ident[:, i])), -1).array() for i in range(d)]).T
    om_inv = np.asarray(exp_ad_nilpotent(cd.omega, -1.0))
    ginv = om_inv @ sig_inv
    rr = alg.orthonormalizer
    to_frame = rr @ ginv                       # coordinates -> orthonormal frame of <.,.>_n
    z = np.array([v.array() for v in centralizer(n)]).T
    im = np.asarray(ad_matrix(LieElement(alg, tuple(m.array()))))
    # projection onto Z(n) along im ad(m)
    basis = np.hstack([z, _col_basis(im)])
    coords = np.linalg.solve(basis, np.eye(d))
    proj = z @ coords[: z.shape[1], :]
    l = np.array([v.array() for v in lim]).T
    q, _ = np.linalg.qr(to_frame @ l)         # orthonormal basis of the limit in the new frame
    pf = to_frame @ proj @ np.linalg.inv(to_frame)
    op = float(np.linalg.norm(pf @ q, 2))
    zq, _ = np.linalg.qr(to_frame @ z)
    pairing = float(abs(np.linalg.det(q.T @ zq)))
    return op, pairing


def _col_basis(a: np.ndarray) -> np.ndarray:
    u, s, vt = np.linalg.svd(a)
    k = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    return u[:, :k]


def g2_counterexample(alg: SplitLieAlgebra | None = None) -> LieElement:
    """Regular element of G2 whose limit is not quasi-centralizing.

    n = Ad(exp u) n_0 where n_0 is the sum of the simple root vectors and u
    spans the weight-one space of the 11-dimensional irreducible summand
    under the principal triple through n_0.
    """
    alg = algebra("G2") if alg is None else alg
    if alg.factors != ("G2",):
        raise ValueError("the counterexample lives in G2")
    tr = natural_triple(alg)
    top = next(ir for ir in tr.irreps if ir.kappa == 5)
    u = top.vectors[1]
    den = 1
    for c in u.coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    u = u.scale(den)
    g = functools.reduce(math.gcd, [int(c) for c in u.coeffs], 0)
    u = u.scale(Fraction(1, g))
    return Ad_exp(u, tr.n_hat)


def weight_coordinates(data, x: LieElement) -> dict:
    """Coefficients of x in the weight basis {V_j(k)} of a triple's decomposition."""
    vecs, labels = [], []
    for ir in data.irreps:
        for k, v in sorted(ir.vectors.items()):
            vecs.append(list(v.coeffs))
            labels.append((ir.index, ir.kappa, k))
    sol = ex.solve(ex.transpose(vecs), list(x.coeffs))
    return dict(zip(labels, sol))


def convergence_report(n: LieElement, t_grid: Iterable) -> list[dict]:
    """d(l(t), l(infinity)) against C_phi/|t| for each t."""
    curve = orbit_curve(n)
    res = leading_subspace(curve)
    alg = n.algebra
    rows = []
    for t in t_grid:
        t = Fraction(t)
        if t == 0:
            raise ValueError("t must be nonzero")
        d = fubini_study(curve.evaluate(t), res.leading, alg)
        bound = res.c_phi / abs(float(t))
        rows.append({"t": float(t), "distance": d, "bound": bound, "d_times_t": d * abs(float(t)),
                     "ok": d <= bound + 1e-9})
    return rows


def expansion_floor(n: LieElement, T: float) -> float:
    """min over unit chi in the Cartan subalgebra of |Ad(exp(T n/|n|)) chi|."""
    alg = n.algebra
    unit = LieElement(alg, tuple(n.array() / n.norm()))
    e = np.asarray(exp_ad_nilpotent(unit, float(T)))
    cart = np.array([t.array() / t.norm() for t in orthogonal_cartan(alg)]).T
    rr = alg.orthonormalizer
    s = np.linalg.svd(rr @ e @ cart, compute_uv=False)
    return float(s[-1])
