"""Regularity, principal sl2-triples and the conjugation to the natural form.

Triples use the half-normalized convention

    [h, n] = n,    [h, m] = -m,    [n, m] = 2h

(``m`` is the lowering element).  For a regular nilpotent ``n`` the module
computes a decomposition

    n = Ad(e^sigma) Ad(exp omega) n_nat

where n_nat has all simple components of norm 1/sqrt(r), sigma lies in
the Cartan subalgebra, and omega is the least-norm solution at every
height.

sigma is never formed.  Only the scale factors e^{beta(sigma)} are kept,
as exact squares.  The algebra is also done in a rescaled frame where
everything is rational: there n = Ad(exp omega') n_simple, with n_simple
the simple part of n and omega' = Ad(e^sigma) omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact as ex
from .lie_core import (
    LieElement,
    SplitLieAlgebra,
    Ad_exp,
    ad_matrix,
    bracket,
    exp_ad_nilpotent,
    h_natural,
    inner_product,
)


class NotRegularError(ValueError):
    pass


def _square_root(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None."""
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def simple_part(n: LieElement) -> LieElement:
    alg = n.algebra
    keep = set(alg.simple_indices)
    zero = Fraction(0) if n.exact else 0.0
    return LieElement(alg, tuple(c if i in keep else zero for i, c in enumerate(n.coeffs)))


def in_positive_part(x: LieElement) -> bool:
    alg = x.algebra
    pos = set(alg.positive_indices)
    return all(c == 0 for i, c in enumerate(x.coeffs) if i not in pos)


def epsilon_regularity_sq(n: LieElement):
    """Square of the regularity constant; exact for exact input."""
    alg = n.algebra
    if not in_positive_part(n):
        raise ValueError("element is not in the positive nilpotent part")
    tot = n.norm2()
    if tot == 0:
        return Fraction(0) if n.exact else 0.0
    g = alg.gram if n.exact else alg.gram_float
    low = min(n.coeffs[i] ** 2 * g[i][i] for i in alg.simple_indices)
    return alg.rank * low / tot


def epsilon_regularity(n: LieElement) -> float:
    """sqrt(r) * min over simple roots of |n_alpha| / |n|; zero if n is not regular."""
    return math.sqrt(float(epsilon_regularity_sq(n)))


def sl3_regular_convenience(x, y, z, eps) -> bool:
    """Coordinate predicate |x|, |y| > eps * sqrt(x^2 + y^2 + z^2) for x E12 + y E23 + z E13."""
    r = math.sqrt(float(x) ** 2 + float(y) ** 2 + float(z) ** 2)
    return abs(float(x)) > eps * r and abs(float(y)) > eps * r


def vanishing_simple_roots(n: LieElement) -> list[tuple]:
    alg = n.algebra
    return [alg.root_of_index[i] for i in alg.simple_indices if n.coeffs[i] == 0]


# ---------------------------------------------------------------------------
# sl2-triples

@dataclass
class Irrep:
    index: int
    kappa: int
    vectors: dict  # weight k -> LieElement spanning V_j(k)


@dataclass
class Sl2Data:
    n_hat: LieElement
    h: LieElement
    n_check: LieElement
    irreps: list = field(default_factory=list)
    centralizer_basis: list = field(default_factory=list)
    u_n_basis: list = field(default_factory=list)

    @property
    def kappas(self) -> list[int]:
        return [ir.kappa for ir in self.irreps]

    def relations_hold(self) -> bool:
        n, h, m = self.n_hat, self.h, self.n_check
        if n.exact and h.exact and m.exact:
            return (bracket(h, n) == n and bracket(h, m) == -m
                    and bracket(n, m) == h.scale(2))
        res = [bracket(h, n) - n, bracket(h, m) + m, bracket(n, m) - h.scale(2)]
        return all(np.max(np.abs(r.array())) <= 1e-9 for r in res)

    def lowering_image_basis(self) -> list[LieElement]:
        """Basis of im ad(n_check), the sum of all non-highest weight spaces."""
        return [v for ir in self.irreps for k, v in ir.vectors.items() if k < ir.kappa]

    def to_json(self) -> dict:
        return {
            "n_hat": self.n_hat.to_json(),
            "h": self.h.to_json(),
            "n_check": self.n_check.to_json(),
            "kappas": self.kappas,
            "irreps": [{"index": ir.index, "kappa": ir.kappa,
                        "vectors": {str(k): v.to_json() for k, v in sorted(ir.vectors.items())}}
                       for ir in self.irreps],
            "centralizer_basis": [v.to_json() for v in self.centralizer_basis],
        }


def complete_triple(n_hat: LieElement, h: LieElement) -> LieElement:
    """The unique m with [h, m] = -m and [n_hat, m] = 2h."""
    alg = n_hat.algebra
    d = alg.dim
    if n_hat.exact and h.exact:
        adh, adn = ad_matrix(h), ad_matrix(n_hat)
        rows = [[adh[i][j] + (1 if i == j else 0) for j in range(d)] for i in range(d)]
        rows += [list(r) for r in adn]
        rhs = [Fraction(0)] * d + [2 * c for c in h.coeffs]
        sol = ex.solve(rows, rhs)
        if sol is None:
            raise ValueError("no lowering element completes this pair")
        kernel = ex.nullspace(rows, d)
        if kernel:
            raise ValueError("lowering element is not unique")
        return LieElement(alg, tuple(sol))
    adh, adn = np.asarray(ad_matrix(h)), np.asarray(ad_matrix(n_hat))
    a = np.vstack([adh + np.eye(d), adn])
    b = np.concatenate([np.zeros(d), 2 * h.array()])
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.max(np.abs(a @ sol - b)) > 1e-9:
        raise ValueError("no lowering element completes this pair")
    return LieElement(alg, tuple(sol))


def _eigenspace(adh, k, d, exact):
    if exact:
        rows = [[adh[i][j] - (k if i == j else 0) for j in range(d)] for i in range(d)]
        return ex.nullspace(rows, d)
    m = np.asarray(adh) - k * np.eye(d)
    u, s, vt = np.linalg.svd(m)
    return [vt[i] for i in range(d) if s[i] <= 1e-9]


def weight_decompose(n_hat: LieElement, h: LieElement, n_check: LieElement) -> Sl2Data:
    """Split the adjoint representation into irreducibles under the triple."""
    alg = n_hat.algebra
    d = alg.dim
    exact = n_hat.exact and h.exact and n_check.exact
    data = Sl2Data(n_hat, h, n_check)
    if not data.relations_hold():
        raise ValueError("input is not an sl2-triple")
    adh = ad_matrix(h)
    adn = ad_matrix(n_hat)
    irreps = []
    top = 2 * alg.height + 1
    found = 0
    for k in range(top, -1, -1):
        eig = _eigenspace(adh, k, d, exact)
        if not eig:
            continue
        # highest weight vectors: kernel of ad(n_hat) inside the eigenspace
        if exact:
            img = [ex.matvec(adn, v) for v in eig]
            comb = ex.nullspace(ex.transpose(img), len(eig))
            hw = [[sum((c * v[i] for c, v in zip(cv, eig)), Fraction(0)) for i in range(d)] for cv in comb]
        else:
            e = np.array(eig).T
            u, s, vt = np.linalg.svd(np.asarray(adn) @ e)
            null = [vt[i] for i in range(len(eig)) if (s[i] if i < len(s) else 0.0) <= 1e-9]
            hw = [e @ c for c in null]
        for v in hw:
            vec = LieElement(alg, tuple(v))
            vectors = {k: vec}
            cur = vec
            for w in range(k - 1, -k - 1, -1):
                cur = bracket(n_check, cur)
                vectors[w] = cur
            irreps.append(Irrep(len(irreps), k, vectors))
            found += 2 * k + 1
    if found != d:
        raise ValueError("weight decomposition does not exhaust the algebra")
    data.irreps = irreps
    data.centralizer_basis = [ir.vectors[ir.kappa] for ir in irreps]
    data.u_n_basis = list(data.centralizer_basis)
    return data


def natural_triple(alg: SplitLieAlgebra, normalized: bool = False) -> Sl2Data:
    """Principal triple through h_nat.

    ``normalized=False`` gives the exact triple with n_hat the sum of the
    simple root vectors.  ``normalized=True`` rescales n_hat so every simple
    component has norm 1/sqrt(r) (float).
    """
    h = h_natural(alg)
    n_hat = alg.zero()
    for i in alg.simple_indices:
        n_hat = n_hat + alg.basis_element(i)
    if normalized:
        r = alg.rank
        c = [0.0] * alg.dim
        for i in alg.simple_indices:
            c[i] = 1.0 / math.sqrt(r * float(alg.gram[i][i]))
        n_hat = LieElement(alg, tuple(c))
        h = LieElement(alg, tuple(h.array()))
    m = complete_triple(n_hat, h)
    return weight_decompose(n_hat, h, m)


def centralizer(n: LieElement) -> list[LieElement]:
    """Basis of Z(n) = ker ad(n), exact for exact n."""
    alg = n.algebra
    if n.exact:
        return [LieElement(alg, tuple(v)) for v in ex.nullspace(ad_matrix(n), alg.dim)]
    u, s, vt = np.linalg.svd(np.asarray(ad_matrix(n)))
    return [LieElement(alg, tuple(vt[i])) for i in range(alg.dim) if s[i] <= 1e-9]


def surjectivity_check(n: LieElement) -> list[bool]:
    """For k = 0..height-1: ad(n) maps the height-k sum onto the height-(k+1) sum."""
    alg = n.algebra
    out = []
    for k in range(alg.height):
        src = alg.indices_of_height(k)
        dst = alg.indices_of_height(k + 1)
        a = ad_matrix(n)
        block = [[a[i][j] for j in src] for i in dst]
        if n.exact:
            out.append(ex.rank(block) == len(dst))
        else:
            out.append(np.linalg.matrix_rank(np.array(block, dtype=float), tol=1e-9) == len(dst))
    return out


# ---------------------------------------------------------------------------
# conjugation to the natural form

@dataclass
class ConjugationData:
    n: LieElement
    n_natural: LieElement
    sigma_sq: dict            # positive root -> e^{2 beta(sigma)}, exact
    omega: LieElement
    epsilon: float
    n_simple: LieElement      # rational frame: n = Ad(exp omega_prime) n_simple
    omega_prime: LieElement
    weights: dict             # basis index -> squared norm weight used for omega_prime
    tol: float = 1e-9

    @property
    def sigma_action(self) -> dict:
        """e^{beta(sigma)} per positive root; exact Fractions when possible."""
        out = {}
        for b, q in self.sigma_sq.items():
            s = _square_root(q)
            out[b] = s if s is not None else math.sqrt(q)
        return out

    @property
    def rational_scale(self) -> bool:
        return all(_square_root(q) is not None for q in self.sigma_sq.values())

    def apply_sigma(self, x: LieElement, sign: int = 1) -> LieElement:
        """Ad(e^{sign*sigma}) x."""
        alg = x.algebra
        act = self.sigma_action
        exact = x.exact and all(isinstance(v, Fraction) for v in act.values())
        out = list(x.coeffs) if exact else list(x.array())
        for i in range(alg.rank, alg.dim):
            beta = alg.root_of_index[i]
            pos = beta if sum(beta) > 0 else tuple(-c for c in beta)
            f = act[pos] if sum(beta) > 0 else 1 / act[pos]
            if sign < 0:
                f = 1 / f
            out[i] = out[i] * (f if exact else float(f))
        return LieElement(alg, tuple(out))

    def reconstruct(self) -> LieElement:
        return self.apply_sigma(Ad_exp(self.omega, self.n_natural))

    def reconstruction_error(self) -> float:
        return float(np.max(np.abs((self.reconstruct() - self.n).array()), initial=0.0))

    def omega_heights(self) -> list[int]:
        alg = self.n.algebra
        return sorted({alg.root_height(i) for i in self.omega_prime.support()})

    def omega_simple_part_zero(self) -> bool:
        alg = self.n.algebra
        return all(self.omega_prime.coeffs[i] == 0 for i in alg.simple_indices)

    def omega_orthogonal_to_centralizer(self) -> bool:
        """Exact check that omega is orthogonal to Z(n_nat).

        In the rescaled frame this is weighted orthogonality of omega' to
        ker ad(n_simple).
        """
        for z in centralizer(self.n_simple):
            if sum((self.weights.get(i, 0) * a * b for i, (a, b)
                    in enumerate(zip(self.omega_prime.coeffs, z.coeffs)) if a and b), Fraction(0)) != 0:
                return False
        return True

    def triple(self) -> Sl2Data:
        """Principal triple through n: Ad(exp omega') applied to (n_simple, h_nat, m_simple)."""
        alg = self.n.algebra
        h0 = h_natural(alg)
        m0 = complete_triple(self.n_simple, h0)
        g = exp_ad_nilpotent(self.omega_prime)
        h = LieElement(alg, tuple(ex.matvec(g, h0.coeffs)))
        m = LieElement(alg, tuple(ex.matvec(g, m0.coeffs)))
        return weight_decompose(self.n, h, m)

    def to_json(self) -> dict:
        act = self.sigma_action
        return {
            "n": self.n.to_json(),
            "epsilon": self.epsilon,
            "sigma_action": {",".join(map(str, b)): (ex.fmt(v) if isinstance(v, Fraction) else repr(v))
                             for b, v in act.items()},
            "sigma_action_squared": {",".join(map(str, b)): ex.fmt(v) for b, v in self.sigma_sq.items()},
            "omega": self.omega.to_json(),
            "omega_prime": self.omega_prime.to_json(),
            "n_natural": self.n_natural.to_json(),
            "n_simple": self.n_simple.to_json(),
            "rational_scale": self.rational_scale,
            "tol": self.tol,
        }


def _least_norm(a, b, w):
    """min sum w_i x_i^2 subject to a x = b (a surjective), exact."""
    winv_at = [[ai / wi for ai, wi in zip(row, w)] for row in a]      # rows of A W^-1
    m = ex.matmul(winv_at, ex.transpose(a))                            # A W^-1 A^T
    y = ex.solve(m, b)
    if y is None:
        raise ValueError("system is not surjective")
    return [sum((winv_at[k][i] * y[k] for k in range(len(a))), Fraction(0)) for i in range(len(w))]


def jordan_decompose(n: LieElement, backend: str = "float") -> ConjugationData:
    """Write a regular n as Ad(e^sigma) Ad(exp omega) n_nat.

    Input must be exact.  backend='exact' requires every sqrt(r)|n_alpha| to
    be rational and returns exact omega and n_nat; backend='float' returns
    them in double precision.
    """
    alg = n.algebra
    if not n.exact:
        raise TypeError("jordan_decompose needs an exact input element")
    if not in_positive_part(n):
        raise ValueError("element is not in the positive nilpotent part")
    vanish = vanishing_simple_roots(n)
    if vanish:
        raise NotRegularError(f"not regular: the component on simple root {vanish[0]} vanishes")
    r = alg.rank
    g = alg.gram
    simple = alg.simple_roots
    scale_sq = {a: r * n.coeffs[alg.index_of_root[a]] ** 2 * g[alg.index_of_root[a]][alg.index_of_root[a]]
                for a in simple}
    sigma_sq = {}
    for beta in alg.positive_roots:
        q = Fraction(1)
        for a, c in zip(simple, beta):
            q *= scale_sq[a] ** c
        sigma_sq[beta] = q
    weights = {i: g[i][i] / sigma_sq[alg.root_of_index[i]] for i in alg.positive_indices}

    n_simple = simple_part(n)
    omega_p = alg.zero()
    adn = ad_matrix(n_simple)
    for j in range(1, alg.height):
        partial = Ad_exp(omega_p, n_simple)
        src = alg.indices_of_height(j)
        dst = alg.indices_of_height(j + 1)
        target = [n.coeffs[i] - partial.coeffs[i] for i in dst]
        if all(t == 0 for t in target):
            continue
        a = [[adn[i][k] for k in src] for i in dst]
        # [x, n_simple] = -ad(n_simple) x
        a = [[-v for v in row] for row in a]
        x = _least_norm(a, target, [weights[k] for k in src])
        coeffs = list(omega_p.coeffs)
        for k, v in zip(src, x):
            coeffs[k] = v
        omega_p = LieElement(alg, tuple(coeffs))
    if Ad_exp(omega_p, n_simple) != n:
        raise AssertionError("rational-frame reconstruction failed")

    eps = epsilon_regularity(n)
    probe = ConjugationData(n, n, sigma_sq, omega_p, eps, n_simple, omega_p, weights)
    if backend == "exact":
        if not probe.rational_scale:
            raise ValueError("scale factors are irrational; use the float backend")
        n_nat = probe.apply_sigma(n_simple, -1)
        omega = probe.apply_sigma(omega_p, -1)
    elif backend == "float":
        n_nat = probe.apply_sigma(LieElement(alg, tuple(n_simple.array())), -1)
        omega = probe.apply_sigma(LieElement(alg, tuple(omega_p.array())), -1)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return ConjugationData(n, n_nat, sigma_sq, omega, eps, n_simple, omega_p, weights)


# ---------------------------------------------------------------------------
# operator norms

def operator_norm(m, alg: SplitLieAlgebra, rows: Sequence[int] | None = None,
                  cols: Sequence[int] | None = None) -> float:
    """Operator norm of a coordinate matrix w.r.t. the invariant inner product."""
    a = np.array([[float(x) for x in row] for row in m]) if not isinstance(m, np.ndarray) else m
    rr = alg.orthonormalizer
    b = rr @ a @ np.linalg.inv(rr)
    if rows is not None or cols is not None:
        # restrict to coordinate subspaces that are orthogonal blocks of the frame
        rows = list(range(alg.dim)) if rows is None else list(rows)
        cols = list(range(alg.dim)) if cols is None else list(cols)
        b = b[np.ix_(rows, cols)]
    return float(np.linalg.norm(b, 2))


def operator_bound_report(n: LieElement, eps: float | None = None) -> dict:
    """Measured operator norms of Ad(e^{+-sigma}), Ad(e^{+-omega}) against the power-law ceilings.

    H is the height.  The sigma ceilings are (sqrt(r)|n|)^H and eps^-H |n|^H.
    They are compared on the Cartan plus positive part, where the root
    heights are positive; the full-algebra sigma norms are reported without
    a ceiling.  The omega ceilings are eps^(-4H(H-1)) on g and
    eps^(-2H(H-1)) on the Cartan plus positive part.  The ratios
    measured/ceiling let an implicit constant be fitted over a sweep.
    """
    alg = n.algebra
    cd = jordan_decompose(n, "float")
    eps = cd.epsilon if eps is None else eps
    H = alg.height
    nn = n.norm()
    if nn < 1 - 1e-12:
        raise ValueError("operator bounds are stated for |n| >= 1")
    act = [float(v) for v in cd.sigma_action.values()]
    up = max([1.0] + act)
    down = max([1.0] + [1 / v for v in act])
    om = cd.omega
    e_plus = np.asarray(exp_ad_nilpotent(om, 1.0))
    e_minus = np.asarray(exp_ad_nilpotent(om, -1.0))
    aw = list(range(alg.rank)) + alg.positive_indices
    # sigma acts by e^{beta(sigma)} on each root space: the norms are read off
    # directly.  On the negative root spaces the roles of up and down swap, so
    # on all of g both one-sided norms equal max(up, down).
    measured = {
        "Ad(e^sigma)|a+w": up,
        "Ad(e^-sigma)|a+w": down,
        "Ad(e^sigma)": max(up, down),
        "Ad(e^-sigma)": max(up, down),
        "Ad(e^omega)": operator_norm(e_plus, alg),
        "Ad(e^-omega)": operator_norm(e_minus, alg),
        "Ad(e^omega)|a+w": operator_norm(e_plus, alg, aw, aw),
        "Ad(e^-omega)|a+w": operator_norm(e_minus, alg, aw, aw),
    }
    ceiling = {
        "Ad(e^sigma)|a+w": (math.sqrt(alg.rank) * nn) ** H,
        "Ad(e^-sigma)|a+w": eps ** (-H) * nn ** H,
        "Ad(e^omega)": eps ** (-4 * H * (H - 1)),
        "Ad(e^-omega)": eps ** (-4 * H * (H - 1)),
        "Ad(e^omega)|a+w": eps ** (-2 * H * (H - 1)),
        "Ad(e^-omega)|a+w": eps ** (-2 * H * (H - 1)),
    }
    return {
        "epsilon": eps,
        "norm": nn,
        "measured": measured,
        "ceiling": ceiling,
        "ratio": {k: measured[k] / ceiling[k] for k in ceiling},
    }


def fit_envelope(reports: Sequence[dict]) -> dict:
    """Smallest implicit constant per quantity that covers every report."""
    keys = reports[0]["ratio"].keys()
    return {k: max(r["ratio"][k] for r in reports) for k in keys}


def random_regular(alg: SplitLieAlgebra, rng, low: int = -9, high: int = 9) -> LieElement:
    """Integer coefficients in [low, high] on every positive root space, simple ones nonzero.

    ``rng`` is a ``random.Random``; draws are resampled until regular.
    """
    while True:
        coeffs = [Fraction(0)] * alg.dim
        for i in alg.positive_indices:
            coeffs[i] = Fraction(rng.randint(low, high))
        x = LieElement(alg, tuple(coeffs))
        if not vanishing_simple_roots(x):
            return x
