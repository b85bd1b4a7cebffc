"""Split semisimple Lie algebras as exact rational matrix algebras.

Supported simple types are A1, A2, A3 (as sl2, sl3, sl4), C2 (as sp4) and G2
(inside gl7), plus products of these realized block-diagonally.  The ordered
basis has the Cartan elements (simple coroots) first.  Positive root vectors
follow, sorted by height and then by root coordinates (descending, so
alpha_1 comes before alpha_2).  Negative root vectors come last, in the same
order as their positive partners.

Elements carry exact ``Fraction`` coefficients, or float coefficients once
a norm-dependent quantity has entered; arithmetic keeps whichever view is
possible.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _g2_data
from . import exact as ex

HEIGHTS = {"A1": 1, "A2": 2, "A3": 3, "C2": 3, "G2": 5}
EXPONENTS = {"A1": (1,), "A2": (1, 2), "A3": (1, 2, 3), "C2": (1, 3), "G2": (1, 5)}
ALIASES = {"SL2": "A1", "SL3": "A2", "SL4": "A3", "SP4": "C2", "B2": "C2", "SO5": "C2"}


def _unit(n: int, i: int, j: int, v=1) -> list[list[Fraction]]:
    m = ex.zeros(n, n)
    m[i][j] = Fraction(v)
    return m


def _add(a, b, s=1):
    return [[x + s * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _comm(a, b):
    return _add(ex.matmul(a, b), ex.matmul(b, a), -1)


def _simple_factor(tag: str):
    """(rep_dim, metric, [(local root, positive root vector)], form) with simple roots first."""
    if tag in ("A1", "A2", "A3"):
        n = int(tag[1]) + 1
        roots = []
        for i in range(n):
            for j in range(i + 1, n):
                coord = tuple(1 if i <= k < j else 0 for k in range(n - 1))
                roots.append((coord, _unit(n, i, j)))
        roots.sort(key=lambda rv: (sum(rv[0]) != 1, [-c for c in rv[0]]))
        return n, (1,) * n, roots, None
    if tag == "C2":
        e = lambda i, j: _unit(4, i, j)
        roots = [
            ((1, 0), _add(e(0, 1), e(2, 3), -1)),
            ((0, 1), e(1, 2)),
            ((1, 1), _add(e(0, 2), e(1, 3))),
            ((2, 1), e(0, 3)),
        ]
        form = ex.to_matrix([[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]])
        return 4, (1,) * 4, roots, form
    if tag == "G2":
        roots = []
        for coord, entries in _g2_data.POSITIVE:
            m = ex.zeros(7, 7)
            for i, j, v in entries:
                m[i][j] = Fraction(v)
            roots.append((coord, m))
        return 7, _g2_data.METRIC, roots, None
    raise ValueError(f"unknown simple type {tag!r}")


def parse_type(tag: str) -> tuple[str, ...]:
    parts = [p for p in re.split(r"[x×*]", tag.replace(" ", "")) if p]
    out = []
    for p in parts:
        q = ALIASES.get(p.upper(), p.upper())
        if q not in HEIGHTS:
            raise ValueError(f"unknown Lie type {p!r}")
        out.append(q)
    if not out:
        raise ValueError("empty Lie type")
    return tuple(out)


class SplitLieAlgebra:
    """Split semisimple Lie algebra in a faithful rational matrix representation."""

    def __init__(self, factors: Sequence[str]):
        self.factors = tuple(factors)
        self.type_tag = "x".join(self.factors)
        blocks = [_simple_factor(f) for f in self.factors]
        self.rep_dim = sum(b[0] for b in blocks)
        n = self.rep_dim

        offsets, off = [], 0
        for b in blocks:
            offsets.append(off)
            off += b[0]
        self.metric = tuple(Fraction(s) for b in blocks for s in b[1])
        self.block_of_rep = tuple(k for k, b in enumerate(blocks) for _ in range(b[0]))

        def embed(m, k):
            out = ex.zeros(n, n)
            o = offsets[k]
            for i, row in enumerate(m):
                for j, v in enumerate(row):
                    if v:
                        out[o + i][o + j] = v
            return out

        simple_counts = [len(EXPONENTS[f]) for f in self.factors]
        self.rank = sum(simple_counts)
        r = self.rank
        pos = []  # (global root, matrix, factor)
        s_off = 0
        for k, (b, sc) in enumerate(zip(blocks, simple_counts)):
            for coord, m in b[2]:
                g = [0] * r
                g[s_off:s_off + sc] = coord
                pos.append((tuple(g), embed(m, k), k))
            s_off += sc
        pos.sort(key=lambda t: (sum(t[0]), [-c for c in t[0]]))
        self.positive_roots = tuple(t[0] for t in pos)
        self.simple_roots = tuple(t for t in self.positive_roots if sum(t) == 1)
        pos_mats = [t[1] for t in pos]
        neg_mats = [self.theta_transpose(m) for m in pos_mats]

        # simple coroots: hat h_a = [E_a, E_-a], rescaled so that a(h_a) = 2
        simple_idx = [self.positive_roots.index(a) for a in self.simple_roots]
        cartan = []
        for i in simple_idx:
            h = _comm(pos_mats[i], neg_mats[i])
            val = self._eigen(h, pos_mats[i])
            cartan.append([[x * 2 / val for x in row] for row in h])

        self.basis = tuple(cartan + pos_mats + neg_mats)
        self.dim = len(self.basis)
        self.roots = self.positive_roots + tuple(tuple(-c for c in b) for b in self.positive_roots)
        self.root_of_index = (None,) * r + self.roots
        self.index_of_root = {b: r + i for i, b in enumerate(self.roots)}
        self.height_table = tuple(sum(b) for b in self.positive_roots)
        self.height = max(self.height_table)
        self.root_factor = tuple(t[2] for t in pos) * 2
        self.forms = [(b[3], offsets[k], b[0]) for k, b in enumerate(blocks) if b[3] is not None]

        # alpha_i(h_j) for simple alpha_i and Cartan basis h_j
        self.cartan_matrix = [[self._eigen(cartan[j], pos_mats[i]) for j in range(r)]
                              for i in simple_idx]
        self._setup_coordinates()
        self._self_test()

    # -- construction helpers --------------------------------------------
    def theta_transpose(self, m):
        """S^-1 m^T S; equals m^T whenever the metric is trivial."""
        s = self.metric
        n = len(m)
        return [[m[j][i] * s[j] / s[i] for j in range(n)] for i in range(n)]

    @staticmethod
    def _eigen(h, e):
        c = _comm(h, e)
        for ci, ei in zip(c, e):
            for x, y in zip(ci, ei):
                if y:
                    return x / y
        raise ValueError("zero root vector")

    def _setup_coordinates(self):
        n, r = self.rep_dim, self.rank
        self._pivot = []
        for m in self.basis[r:]:
            p = next((i, j) for i in range(n) for j in range(n) if m[i][j])
            self._pivot.append(p)
        diag = [[h[i][i] for h in self.basis[:r]] for i in range(n)]
        red, piv = ex.rref(ex.transpose(diag))
        if len(piv) != r:
            raise ValueError("Cartan basis is degenerate")
        self._diag_rows = piv
        self._diag_inv = ex.inverse([diag[i] for i in piv])

    def coords_of_matrix(self, m) -> list[Fraction]:
        n, r = self.rep_dim, self.rank
        m = [[ex.frac(x) for x in row] for row in m]
        c = ex.matvec(self._diag_inv, [m[i][i] for i in self._diag_rows])
        for b, (i, j) in zip(self.basis[r:], self._pivot):
            c.append(m[i][j] / b[i][j])
        recon = ex.zeros(n, n)
        for ci, b in zip(c, self.basis):
            if ci:
                for i in range(n):
                    bi, ri = b[i], recon[i]
                    for j in range(n):
                        if bi[j]:
                            ri[j] += ci * bi[j]
        if recon != m:
            raise ValueError("matrix is not in the span of the basis")
        return c

    def _self_test(self):
        n, r, d = self.rep_dim, self.rank, self.dim
        flat = [[x for row in b for x in row] for b in self.basis]
        if ex.rank(flat) != d:
            raise AssertionError("basis is linearly dependent")
        for i, beta in enumerate(self.roots):
            e = self.basis[r + i]
            for j, h in enumerate(self.basis[:r]):
                want = self.root_value(beta, j)
                if _comm(h, e) != [[want * x for x in row] for row in e]:
                    raise AssertionError(f"[h_{j}, E_{beta}] is not beta(h) E_beta")
        sc = [[None] * d for _ in range(d)]
        for i in range(d):
            for j in range(i, d):
                c = self.coords_of_matrix(_comm(self.basis[i], self.basis[j]))
                sc[i][j] = {k: v for k, v in enumerate(c) if v}
                sc[j][i] = {k: -v for k, v in sc[i][j].items()}
        self._sc = sc
        gram = ex.zeros(d, d)
        s = self.metric
        for i in range(d):
            for j in range(i, d):
                a, b = self.basis[i], self.basis[j]
                v = sum((a[p][q] * b[p][q] * s[p] / s[q] for p in range(n) for q in range(n)
                         if a[p][q] and b[p][q]), Fraction(0))
                gram[i][j] = gram[j][i] = v
        self.gram = gram
        for form, o, k in self.forms:
            for b in self.basis:
                blk = [row[o:o + k] for row in b[o:o + k]]
                if _add(ex.matmul(ex.transpose(blk), form), ex.matmul(form, blk)) != ex.zeros(k, k):
                    raise AssertionError("basis element does not preserve the defining form")
        expect = tuple(HEIGHTS[f] for f in self.factors)
        if self.height != max(expect):
            raise AssertionError("unexpected height")
        self._adf = None

    # -- metadata ----------------------------------------------------------
    def root_value(self, beta: Sequence[int], j: int) -> Fraction:
        """beta(h_j) for the j-th Cartan basis element."""
        return sum((c * self.cartan_matrix[i][j] for i, c in enumerate(beta) if c), Fraction(0))

    def root_height(self, i: int) -> int:
        """Height of basis index i (0 for Cartan, negative for negative roots)."""
        b = self.root_of_index[i]
        return 0 if b is None else sum(b)

    def indices_of_height(self, k: int) -> list[int]:
        return [i for i in range(self.dim) if self.root_height(i) == k]

    @property
    def positive_indices(self) -> list[int]:
        return list(range(self.rank, self.rank + len(self.positive_roots)))

    @property
    def simple_indices(self) -> list[int]:
        return [self.index_of_root[a] for a in self.simple_roots]

    def __repr__(self):
        return f"SplitLieAlgebra({self.type_tag})"

    # -- structure constants in float form ---------------------------------
    @property
    def structure_tensor(self) -> np.ndarray:
        if self._adf is None:
            t = np.zeros((self.dim, self.dim, self.dim))
            for i in range(self.dim):
                for j in range(self.dim):
                    for k, v in self._sc[i][j].items():
                        t[i, j, k] = float(v)
            self._adf = t
        return self._adf

    @functools.cached_property
    def gram_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.gram])

    @functools.cached_property
    def orthonormalizer(self) -> np.ndarray:
        """Upper-triangular R with gram = R^T R; R maps coordinates to an orthonormal frame."""
        return np.linalg.cholesky(self.gram_float).T

    def zero(self) -> "LieElement":
        return LieElement(self, (Fraction(0),) * self.dim)

    def basis_element(self, i: int) -> "LieElement":
        return LieElement(self, tuple(Fraction(int(k == i)) for k in range(self.dim)))

    def root_vector(self, beta: Sequence[int]) -> "LieElement":
        return self.basis_element(self.index_of_root[tuple(beta)])

    def element(self, coeffs: Iterable) -> "LieElement":
        return LieElement(self, tuple(coeffs))

    def from_matrix(self, m) -> "LieElement":
        return LieElement(self, tuple(self.coords_of_matrix(m)))


@functools.lru_cache(maxsize=None)
def _algebra(factors: tuple[str, ...]) -> SplitLieAlgebra:
    return SplitLieAlgebra(factors)


def algebra(tag: str) -> SplitLieAlgebra:
    """Algebra for a type tag such as 'A2', 'sl3', 'C2', 'G2' or 'A1xA1' (cached)."""
    return _algebra(parse_type(tag))


def _is_exact(coeffs) -> bool:
    return all(isinstance(c, (Fraction, int)) for c in coeffs)


@dataclass(frozen=True, eq=False)
class LieElement:
    algebra: SplitLieAlgebra
    coeffs: tuple
    tol: float = field(default=1e-9)

    def __post_init__(self):
        if len(self.coeffs) != self.algebra.dim:
            raise ValueError("coefficient count does not match the algebra dimension")
        if _is_exact(self.coeffs):
            object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        else:
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def exact(self) -> bool:
        return bool(self.coeffs) and isinstance(self.coeffs[0], Fraction)

    def array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def agrees_with(self, values: Sequence[float], tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        return float(np.max(np.abs(self.array() - np.asarray(values, dtype=float)), initial=0.0)) <= tol

    def _combine(self, other, s):
        if other.algebra is not self.algebra:
            raise ValueError("elements of different algebras")
        if self.exact and other.exact:
            return LieElement(self.algebra, tuple(a + s * b for a, b in zip(self.coeffs, other.coeffs)))
        return LieElement(self.algebra, tuple(self.array() + s * other.array()))

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        if self.exact and isinstance(c, (int, Fraction)):
            return LieElement(self.algebra, tuple(Fraction(c) * a for a in self.coeffs))
        return LieElement(self.algebra, tuple(float(c) * self.array()))

    __rmul__ = scale

    def __mul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return (isinstance(other, LieElement) and other.algebra is self.algebra
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.algebra.type_tag, self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def matrix(self):
        alg = self.algebra
        n = alg.rep_dim
        if self.exact:
            out = ex.zeros(n, n)
            for c, b in zip(self.coeffs, alg.basis):
                if c:
                    out = _add(out, [[c * x for x in row] for row in b])
            return out
        mats = np.array([[[float(x) for x in row] for row in b] for b in alg.basis])
        return np.tensordot(self.array(), mats, axes=1)

    def bracket(self, other) -> "LieElement":
        return bracket(self, other)

    def norm2(self):
        return inner_product(self, self)

    def norm(self) -> float:
        return float(np.sqrt(float(self.norm2())))

    def support(self) -> list[int]:
        return [i for i, c in enumerate(self.coeffs) if c != 0]

    def to_json(self) -> dict:
        if self.exact:
            return {"algebra": self.algebra.type_tag, "coeffs": [ex.fmt(c) for c in self.coeffs]}
        return {"algebra": self.algebra.type_tag, "coeffs": [repr(c) for c in self.coeffs], "tol": self.tol}

    def __repr__(self):
        alg = self.algebra
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                lab = f"h{i}" if i < alg.rank else "E" + "".join(str(x) for x in alg.root_of_index[i])
                terms.append(f"{c}*{lab}")
        return f"<{alg.type_tag}: {' + '.join(terms) or '0'}>"


def from_json(doc: Mapping) -> LieElement:
    alg = algebra(doc["algebra"])
    coeffs = doc["coeffs"]
    if len(coeffs) != alg.dim:
        raise ValueError(f"expected {alg.dim} coefficients, got {len(coeffs)}")
    vals = [Fraction(c) if "." not in str(c) and "e" not in str(c).lower() else float(c) for c in coeffs]
    return LieElement(alg, tuple(vals))


def from_root_map(alg: SplitLieAlgebra, mapping: Mapping[str, str]) -> LieElement:
    """Element from {"1,0": "3/1", ...}: root coordinates to coefficients."""
    coeffs = [Fraction(0)] * alg.dim
    for key, val in mapping.items():
        root = tuple(int(x) for x in str(key).split(","))
        if root not in alg.index_of_root:
            raise ValueError(f"{key!r} is not a root of {alg.type_tag}")
        coeffs[alg.index_of_root[root]] = Fraction(val)
    return LieElement(alg, tuple(coeffs))


def bracket(x: LieElement, y: LieElement) -> LieElement:
    alg = x.algebra
    if y.algebra is not alg:
        raise ValueError("elements of different algebras")
    if x.exact and y.exact:
        out = [Fraction(0)] * alg.dim
        ys = [(j, b) for j, b in enumerate(y.coeffs) if b]
        for i, a in enumerate(x.coeffs):
            if not a:
                continue
            row = alg._sc[i]
            for j, b in ys:
                ab = a * b
                for k, v in row[j].items():
                    out[k] += ab * v
        return LieElement(alg, tuple(out))
    t = alg.structure_tensor
    return LieElement(alg, tuple(np.einsum("i,j,ijk->k", x.array(), y.array(), t)))


def root_decompose(x: LieElement) -> dict:
    """Components of x keyed by 'cartan' and by every root tuple; they sum to x."""
    alg = x.algebra
    zero = 0 if not x.exact else Fraction(0)
    out = {"cartan": LieElement(alg, tuple(c if i < alg.rank else zero for i, c in enumerate(x.coeffs)))}
    for beta in alg.roots:
        k = alg.index_of_root[beta]
        out[beta] = LieElement(alg, tuple(c if i == k else zero for i, c in enumerate(x.coeffs)))
    return out


def ad_matrix(x: LieElement):
    """Matrix of ad(x); column i holds the coordinates of [x, basis_i]."""
    alg = x.algebra
    d = alg.dim
    if x.exact:
        m = ex.zeros(d, d)
        for i, a in enumerate(x.coeffs):
            if not a:
                continue
            row = alg._sc[i]
            for j in range(d):
                for k, v in row[j].items():
                    m[k][j] += a * v
        return m
    return np.einsum("i,ijk->kj", x.array(), alg.structure_tensor)


def _nilpotent_powers(a, exact: bool):
    d = len(a)
    powers = [ex.identity(d) if exact else np.eye(d)]
    for _ in range(d + 1):
        nxt = ex.matmul(a, powers[-1]) if exact else a @ powers[-1]
        if (exact and all(v == 0 for row in nxt for v in row)) or (not exact and not np.any(np.abs(nxt) > 1e-12)):
            return powers
        powers.append(nxt)
    raise ValueError("element is not ad-nilpotent")


def exp_ad_nilpotent(n: LieElement, t=1):
    """exp(t ad n) as a matrix; exact when n and t are rational."""
    exact = n.exact and isinstance(t, (int, Fraction))
    a = ad_matrix(n) if exact else np.asarray(ad_matrix(n), dtype=float)
    powers = _nilpotent_powers(a, exact)
    d = n.algebra.dim
    if exact:
        t = Fraction(t)
        out = ex.zeros(d, d)
        fact = Fraction(1)
        for k, p in enumerate(powers):
            if k:
                fact *= Fraction(t, k)
            out = _add(out, [[fact * v for v in row] for row in p])
        return out
    out = np.zeros((d, d))
    fact = 1.0
    for k, p in enumerate(powers):
        if k:
            fact *= float(t) / k
        out += fact * p
    return out


def apply(m, x: LieElement) -> LieElement:
    """Apply a coordinate matrix (e.g. from exp_ad_nilpotent) to an element."""
    if isinstance(m, np.ndarray) or not x.exact:
        return LieElement(x.algebra, tuple(np.asarray(m, dtype=float) @ x.array()))
    return LieElement(x.algebra, tuple(ex.matvec(m, x.coeffs)))


def Ad_exp(n: LieElement, x: LieElement, t=1) -> LieElement:
    """Ad(exp(t n)) x = exp(t ad n) x, by the finite series."""
    exact = n.exact and x.exact and isinstance(t, (int, Fraction))
    out = x if exact else LieElement(x.algebra, tuple(x.array()))
    term = out
    for k in range(1, n.algebra.dim + 2):
        term = bracket(n, term).scale(Fraction(t) / k if exact else float(t) / k)
        if term.is_zero():
            return out
        out = out + term
    raise ValueError("element is not ad-nilpotent")


def h_natural(alg: SplitLieAlgebra) -> LieElement:
    """Cartan element with alpha(h) = 1 for every simple root alpha."""
    r = alg.rank
    sol = ex.solve(alg.cartan_matrix, [1] * r)
    if sol is None:
        raise ValueError("simple-root evaluation matrix is singular")
    return LieElement(alg, tuple(sol) + (Fraction(0),) * (alg.dim - r))


def inner_product(x: LieElement, y: LieElement):
    """Frobenius-type pairing tr(X S^-1 Y^T S) on the defining representation.

    Exact (``Fraction``) for exact inputs.  S is the identity except for G2.
    """
    alg = x.algebra
    if x.exact and y.exact:
        g = alg.gram
        tot = Fraction(0)
        xs = [(i, a) for i, a in enumerate(x.coeffs) if a]
        ys = [(j, b) for j, b in enumerate(y.coeffs) if b]
        for i, a in xs:
            gi = g[i]
            for j, b in ys:
                if gi[j]:
                    tot += a * b * gi[j]
        return tot
    return float(x.array() @ alg.gram_float @ y.array())


def theta(x: LieElement) -> LieElement:
    """Cartan involution X -> -S^-1 X^T S, in coordinates."""
    alg = x.algebra
    return alg.from_matrix([[-v for v in row] for row in alg.theta_transpose(x.matrix())])


def killing_multiples(alg: SplitLieAlgebra) -> list[Fraction]:
    """Per simple factor, the constant c with B(X, -theta Y) = c <X, Y>.

    B is the Killing form tr(ad X ad Y).  The constant is read off a
    simple root vector of each factor.
    """
    out = []
    for k in range(len(alg.factors)):
        i = next(j for j, f in enumerate(alg.root_factor) if f == k)
        e = alg.basis_element(alg.rank + i)
        te = theta(e)
        a, b = ad_matrix(e), ad_matrix(te)
        kill = sum((a[p][q] * b[q][p] for p in range(alg.dim) for q in range(alg.dim)), Fraction(0))
        out.append(-kill / inner_product(e, e))
    return out
