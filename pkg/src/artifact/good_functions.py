"""(C, alpha)-good certificates for exponential polynomials.

A function f on U is (C, alpha)-good if for every ball B in U and eps > 0

    Leb{x in B : |f(x)| < eps} <= C (eps / sup_B |f|)^alpha Leb(B).

Here f(x) = sum_j c_j exp(<lambda_j, x>) with |lambda_jk| <= Lambda and the
exponents of distinct terms at least delta apart in every coordinate.  In one
variable such f is good on every interval of radius eta with explicit
constants depending only on (Lambda, delta); ``certificate`` evaluates them.

The closed forms involve numbers like (delta/Lambda)**(Lambda/delta)**2 which
underflow a double long before the grid of interest is exhausted, so the
constants are carried as mpmath floats.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

mpmath.mp.dps = 30


@dataclass(frozen=True)
class ExpPolynomial:
    """sum_j c_j exp(<lambda_j, x>) on R^dim, checked for membership in E(dim, Lambda, delta)."""

    dim: int
    terms: tuple  # ((c_j, (lambda_j1, ..., lambda_jr)), ...)
    Lambda: float
    delta: float

    def __post_init__(self):
        terms = tuple((c, tuple(lam)) for c, lam in self.terms)
        object.__setattr__(self, "terms", terms)
        if self.Lambda < 1 or self.delta <= 0:
            raise ValueError("need Lambda >= 1 and delta > 0")
        for _, lam in terms:
            if len(lam) != self.dim:
                raise ValueError("exponent vector has the wrong dimension")
            if any(abs(x) > self.Lambda for x in lam):
                raise ValueError(f"exponent {lam} exceeds Lambda = {self.Lambda}")
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                for k in range(self.dim):
                    if abs(terms[i][1][k] - terms[j][1][k]) < self.delta:
                        raise ValueError(f"terms {i}, {j} closer than delta in coordinate {k}")
        if len(terms) - 1 > 2 * self.Lambda / self.delta:
            raise ValueError("too many terms for the given Lambda, delta")

    @property
    def n(self) -> int:
        return len(self.terms) - 1

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points x of shape (..., dim); dim 1 also accepts shape (...)."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        out = np.zeros(x.shape[:-1])
        for c, lam in self.terms:
            out += float(c) * np.exp(x @ np.asarray(lam, dtype=float))
        return out

    def scaled(self, s) -> "ExpPolynomial":
        return ExpPolynomial(self.dim, tuple((s * c, lam) for c, lam in self.terms),
                             self.Lambda, self.delta)

    def translated(self, t0: Sequence[float]) -> "ExpPolynomial":
        """The function x -> f(x + t0), again written as an exponential sum."""
        t0 = [t0] if self.dim == 1 and not isinstance(t0, (list, tuple, np.ndarray)) else list(t0)
        terms = tuple((c * math.exp(sum(l * t for l, t in zip(lam, t0))), lam)
                      for c, lam in self.terms)
        return ExpPolynomial(self.dim, terms, self.Lambda, self.delta)

    def slice(self, axis: int, point: Sequence[float]) -> "ExpPolynomial":
        """Restriction to the line through ``point`` parallel to coordinate ``axis``."""
        terms = []
        for c, lam in self.terms:
            w = sum(l * p for k, (l, p) in enumerate(zip(lam, point)) if k != axis)
            terms.append((c * math.exp(w), (lam[axis],)))
        return ExpPolynomial(1, tuple(terms), self.Lambda, self.delta)

    def to_json(self) -> dict:
        return {"dim": self.dim, "Lambda": self.Lambda, "delta": self.delta,
                "terms": [{"c": float(c), "lambda": [float(l) for l in lam]}
                          for c, lam in self.terms]}


def _separated(rng: random.Random, k: int, Lambda: float, delta: float) -> list[float]:
    # k points in [-Lambda, Lambda] with consecutive gaps >= delta
    slack = 2 * Lambda - (k - 1) * delta
    pts = sorted(rng.uniform(0, slack) for _ in range(k))
    return [-Lambda + p + i * delta for i, p in enumerate(pts)]


def random_member(rng: random.Random, Lambda: float = 1, delta: float = 1, dim: int = 1,
                  terms: int | None = None) -> ExpPolynomial:
    kmax = int(math.floor(2 * Lambda / delta + 1e-12)) + 1
    k = terms if terms is not None else rng.randint(1, kmax)
    cols = []
    for _ in range(dim):
        col = _separated(rng, k, Lambda, delta)
        rng.shuffle(col)
        cols.append(col)
    coeffs = [rng.gauss(0, 1) for _ in range(k)]
    return ExpPolynomial(dim, tuple((coeffs[j], tuple(col[j] for col in cols)) for j in range(k)),
                         Lambda, delta)


@dataclass(frozen=True)
class GoodCertificate:
    Lambda: float
    delta: float
    C: mpmath.mpf
    alpha: mpmath.mpf
    b: mpmath.mpf
    B: mpmath.mpf
    eta: mpmath.mpf

    def is_valid(self) -> bool:
        vals = (self.C, self.alpha, self.b, self.B, self.eta)
        return all(mpmath.isfinite(v) and v > 0 for v in vals) and \
            mpmath.almosteq(self.alpha, mpmath.mpf(self.delta) / (2 * self.Lambda), 1e-25)

    def lifted(self, dim: int) -> tuple[float, float]:
        """(C, alpha) for sup-norm balls in R^dim when f is good along every axis."""
        return float(dim * self.C), float(self.alpha) / dim

    def to_json(self) -> dict:
        return {"Lambda": self.Lambda, "delta": self.delta,
                **{k: mpmath.nstr(getattr(self, k), 15) for k in ("C", "alpha", "b", "B", "eta")}}


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def certificate(Lambda, delta) -> GoodCertificate:
    if Lambda < 1:
        raise ValueError("Lambda must be at least 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    L, d = _mpf(Lambda), _mpf(delta)
    m = 2 * L / d
    b = ((m + 1) ** mpmath.mpf(-1.5) * m ** (-L / d) * (d / L) ** ((L / d) * (m + 1))) / 2
    B = (m + 1) ** mpmath.mpf(0.5) * L ** (m + 1) * mpmath.e ** L / L
    eta = b * (m + 1) ** mpmath.mpf(-0.5) * L ** (-(m + 1)) * mpmath.e ** (-L)
    C = m * (m + 1) * (B / b * (m + 1) * (2 * m ** m + 1)) ** (1 / m)
    return GoodCertificate(float(Lambda), float(delta), C, 1 / m, b, B, eta)


@dataclass(frozen=True)
class VandermondeCheck:
    det: object
    bound: object
    passed: bool


def vandermonde_floor(lams: Sequence, delta) -> VandermondeCheck:
    """|det L| = prod_{j<k} |lambda_k - lambda_j| against delta^(n(n+1)/2).

    Exact when the inputs are rationals.
    """
    lams = list(lams)
    n = len(lams) - 1
    det = 1
    for j in range(len(lams)):
        for k in range(j + 1, len(lams)):
            diff = lams[k] - lams[j]
            if diff == 0:
                raise ValueError(f"repeated exponent {lams[j]}")
            det *= abs(diff)
    bound = delta ** (n * (n + 1) // 2)
    return VandermondeCheck(det, bound, det >= bound)


@dataclass
class GoodCheck:
    passed: bool
    measured: float       # sublevel mass / Leb(B)
    bound: float          # C (eps / sup)^alpha
    sup: float
    eps: float
    within_eta: bool
    extra: dict = field(default_factory=dict)


def _grid(center, radius, points_per_axis):
    axes = [np.linspace(c - radius, c + radius, points_per_axis) for c in center]
    if len(axes) == 1:
        return axes[0][:, None]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


def sublevel_profile(f: ExpPolynomial, center, radius, points: int | None = None):
    """Grid values of |f| on the ball, finest level first.

    The grid has 2^k + 1 points per axis, so dropping every other point gives
    the next coarser level of a nested refinement.
    """
    center = [center] if f.dim == 1 and not isinstance(center, (list, tuple, np.ndarray)) \
        else list(center)
    if radius <= 0:
        raise ValueError("degenerate ball")
    if points is None:
        points = 100_000 if f.dim == 1 else 10_000
    per_axis = max(3, int(round(points ** (1 / f.dim))))
    k = math.ceil(math.log2(per_axis - 1))
    per_axis = 2 ** k + 1
    return np.abs(f(_grid(center, radius, per_axis))).reshape((per_axis,) * f.dim)


def _mass(vals: np.ndarray, eps: float) -> float:
    return float(np.count_nonzero(vals < eps)) / vals.size


def empirical_good_check(f: ExpPolynomial, ball, eps: float, cert: GoodCertificate,
                         points: int | None = None, values: np.ndarray | None = None) -> GoodCheck:
    """Compare the grid sublevel mass of |f| < eps on ``ball`` with the certificate.

    ``ball`` is (center, radius); for dim > 1 it is the sup-norm ball and the
    constants are lifted coordinatewise.  The reported mass is the larger of
    the two finest nested grid levels.
    """
    center, radius = ball
    if eps <= 0:
        raise ValueError("eps must be positive")
    vals = values if values is not None else sublevel_profile(f, center, radius, points)
    sup = float(vals.max())
    if sup == 0:
        return GoodCheck(True, 1.0, math.inf, 0.0, eps, True)
    coarse = vals[(slice(None, None, 2),) * vals.ndim]
    measured = max(_mass(vals, eps), _mass(coarse, eps))
    C, alpha = cert.lifted(f.dim)
    bound = C * (eps / sup) ** alpha
    return GoodCheck(measured <= bound, measured, bound, sup, eps, radius <= float(cert.eta),
                     {"levels": [coarse.size, vals.size]})


def good_suite(seed: int = 0, functions: int = 50, balls: int = 50, Lambda=1, delta=1,
               domain: float = 3.0, eps_ratios=(1e-4, 1e-3, 1e-2, 0.1, 0.5),
               points: int = 100_000) -> dict:
    """Seeded sweep over random members of E(Lambda, delta) on [-domain, domain]."""
    rng = random.Random(seed)
    cert = certificate(Lambda, delta)
    eta = float(cert.eta)
    passed = failed = 0
    worst = 0.0
    for _ in range(functions):
        f = random_member(rng, Lambda, delta)
        # half of the balls sit next to a sign change, where the sublevel sets are not empty
        xs = np.linspace(-domain, domain, 4097)
        ys = f(xs)
        roots = xs[:-1][np.sign(ys[:-1]) != np.sign(ys[1:])]
        for i in range(balls):
            radius = rng.uniform(0.1, 1.0) * eta
            if i % 2 and len(roots):
                center = float(rng.choice(roots)) + rng.uniform(-radius, radius)
                center = min(max(center, -domain + radius), domain - radius)
            else:
                center = rng.uniform(-domain + radius, domain - radius)
            vals = sublevel_profile(f, center, radius, points)
            sup = float(vals.max())
            for q in eps_ratios:
                res = empirical_good_check(f, (center, radius), q * sup, cert, values=vals)
                passed += res.passed
                failed += not res.passed
                worst = max(worst, res.measured / res.bound)
    return {"seed": seed, "passed": passed, "failed": failed, "worst_ratio": worst,
            "certificate": cert.to_json()}
