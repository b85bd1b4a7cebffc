"""Small dense linear algebra over the rationals.

Matrices are lists of rows, entries are ``Fraction`` (ints are accepted on
input).  Everything here is exact; sizes in this package stay below a few
hundred rows so plain Gaussian elimination is adequate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = list
Matrix = list


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("refusing to convert a float to an exact rational")
    return Fraction(x)


def to_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[frac(x) for x in row] for row in rows]


def zeros(m: int, n: int) -> Matrix:
    return [[Fraction(0)] * n for _ in range(m)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col) if x and y), Fraction(0)) for col in bt]
            for row in a]


def matvec(a: Matrix, v: Sequence) -> Vector:
    return [sum((x * y for x, y in zip(row, v) if x and y), Fraction(0)) for row in a]


def dot(u: Sequence, v: Sequence):
    return sum((x * y for x, y in zip(u, v) if x and y), Fraction(0))


def rref(a: Matrix, ncols: int | None = None):
    """Reduced row echelon form.  Returns (rows, pivot_columns)."""
    m = [list(map(frac, row)) for row in a]
    if not m:
        return [], []
    n = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(n):
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        pr = m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], pr)]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1]) if a else 0


def nullspace(a: Matrix, ncols: int | None = None) -> list[Vector]:
    """Basis of {x : a x = 0}, one vector per free column."""
    n = ncols if ncols is not None else (len(a[0]) if a else 0)
    if not a:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    red, piv = rref(a, n)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(red, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Sequence) -> Vector | None:
    """One solution of a x = b (free variables set to zero) or None."""
    n = len(a[0])
    aug = [list(row) + [frac(bi)] for row, bi in zip(a, b)]
    red, piv = rref(aug, n + 1)
    if piv and piv[-1] == n:
        return None
    x = [Fraction(0)] * n
    for row, pc in zip(red, piv):
        x[pc] = row[n]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    red, piv = rref(aug, n)
    if piv != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def det(a: Matrix) -> Fraction:
    m = [list(map(frac, row)) for row in a]
    n = len(m)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        out *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return sign * out


def in_span(vectors: Sequence[Sequence], v: Sequence) -> bool:
    if not vectors:
        return all(x == 0 for x in v)
    return rank([list(u) for u in vectors] + [list(v)]) == rank([list(u) for u in vectors])


def span_equal(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    ra, rb = rank([list(u) for u in a]), rank([list(u) for u in b])
    return ra == rb == rank([list(u) for u in a] + [list(u) for u in b])


def sparse_kernel(rows: Iterable[dict], n: int, stop_rank: int | None = None) -> list[Vector]:
    """Kernel of a sparse system.  Each row is a {column: value} dict.

    Pivot rows are kept fully reduced against each other, so reducing a new
    row by the pivots it touches never reintroduces another pivot column.
    ``stop_rank`` stops consuming rows once that rank is reached.
    """
    pivots: dict[int, dict] = {}

    def axpy(target: dict, f, src: dict):
        for k, v in src.items():
            nv = target.get(k, 0) - f * v
            if nv:
                target[k] = nv
            else:
                target.pop(k, None)

    for row in rows:
        row = {c: frac(v) for c, v in row.items() if v}
        for c in [c for c in row if c in pivots]:
            axpy(row, row[c], pivots[c])
        if not row:
            continue
        c0 = min(row)
        inv = 1 / row[c0]
        row = {k: v * inv for k, v in row.items()}
        for prow in pivots.values():
            f = prow.get(c0)
            if f:
                axpy(prow, f, row)
        pivots[c0] = row
        if stop_rank is not None and len(pivots) >= stop_rank:
            break
    basis = []
    for f in (c for c in range(n) if c not in pivots):
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for pc, prow in pivots.items():
            if f in prow:
                v[pc] = -prow[f]
        basis.append(v)
    return basis


def gram_schmidt(vectors: Sequence[Sequence], gram: Matrix) -> list[Vector]:
    """Exact orthogonalization (no normalization) under the form ``gram``."""
    out: list[Vector] = []
    norms: list[Fraction] = []
    for v in vectors:
        w = [frac(x) for x in v]
        for u, nu in zip(out, norms):
            c = dot(matvec(gram, w), u) / nu
            w = [x - c * y for x, y in zip(w, u)]
        nw = dot(matvec(gram, w), w)
        if nw == 0:
            raise ValueError("vectors are linearly dependent")
        out.append(w)
        norms.append(nw)
    return out


def fmt(x: Fraction) -> str:
    x = frac(x)
    return f"{x.numerator}/{x.denominator}"
