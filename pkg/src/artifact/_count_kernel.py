"""Compiled inner loop for counting integer 3x3 matrices with given char poly.

Write M = [[a, b, c], [d, e, u], [x, y, z]].  Given rows one and two, the
trace fixes z and the remaining two conditions are linear in (x, y):

    c x + u y = e2 := ae - bd + (a + e) z - s2
    C31 x + C32 y = e3 := s3 - z (ae - bd)

with C31 = bu - ce and C32 = cd - au the row-three cofactors.  Generic
fibres are solved by Cramer's rule; singular ones enumerate x (and y if
needed) inside the remaining norm budget.
"""

import math

import numba as nb
import numpy as np


@nb.njit(nogil=True, cache=True)
def _isqrt(n):
    if n < 0:
        return -1
    r = int(math.sqrt(n))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@nb.njit(nogil=True, cache=True)
def _verify(a, b, c, d, e, u, x, y, z, s1, s2, s3):
    tr = a + e + z
    m2 = (a * e - b * d) + (a * z - c * x) + (e * z - u * y)
    det = a * (e * z - u * y) - b * (d * z - u * x) + c * (d * y - e * x)
    return tr == s1 and m2 == s2 and det == s3


@nb.njit(nogil=True, cache=True)
def _record(a, b, c, d, e, u, x, y, z, w, lim, rho, s1, s2, s3, hist, hits, state):
    # state: [hits stored, verification failures, singular fibres]
    q = rho - x * x - y * y
    if q < 0:
        return
    if not _verify(a, b, c, d, e, u, x, y, z, s1, s2, s3):
        state[1] += 1
        return
    hist[lim - q] += w
    k = state[0]
    if k < hits.shape[0]:
        hits[k, 0] = a
        hits[k, 1] = b
        hits[k, 2] = c
        hits[k, 3] = d
        hits[k, 4] = e
        hits[k, 5] = u
        hits[k, 6] = x
        hits[k, 7] = y
        hits[k, 8] = z
    state[0] = k + 1


@nb.njit(nogil=True, cache=True)
def _singular(a, b, c, d, e, u, z, e2, e3, C31, C32, w, lim, rho, s1, s2, s3,
              hist, hits, state):
    bx = _isqrt(rho)
    for x in range(-bx, bx + 1):
        r = rho - x * x
        if u != 0:
            num = e2 - c * x
            if num % u != 0:
                continue
            y = num // u
            if y * y <= r and C31 * x + C32 * y == e3:
                _record(a, b, c, d, e, u, x, y, z, w, lim, rho, s1, s2, s3, hist, hits, state)
        elif C32 != 0:
            num = e3 - C31 * x
            if num % C32 != 0:
                continue
            y = num // C32
            if y * y <= r and c * x == e2:
                _record(a, b, c, d, e, u, x, y, z, w, lim, rho, s1, s2, s3, hist, hits, state)
        else:
            if c * x != e2 or C31 * x != e3:
                continue
            by = _isqrt(r)
            for y in range(-by, by + 1):
                _record(a, b, c, d, e, u, x, y, z, w, lim, rho, s1, s2, s3, hist, hits, state)


@nb.njit(nogil=True, cache=True)
def count_rows(s1, s2, s3, T2, a_values, symmetric, hist, hits, state):
    """Add every solution with first entry in ``a_values`` and squared norm < T2 to ``hist``.

    hist[k] counts solutions of squared Frobenius norm k.  With ``symmetric``
    only b, c >= 0 is visited and each hit is weighted by its orbit size under
    conjugation by diag(1, -1, 1) and diag(1, 1, -1).
    """
    lim = T2 - 1
    for ia in range(a_values.shape[0]):
        a = a_values[ia]
        r0 = lim - a * a
        if r0 < 0:
            continue
        be = _isqrt(r0)
        for e in range(-be, be + 1):
            z = s1 - a - e
            r1 = r0 - e * e - z * z
            if r1 < 0:
                continue
            bb = _isqrt(r1)
            b_lo = 0 if symmetric else -bb
            for b in range(b_lo, bb + 1):
                r2 = r1 - b * b
                bd = _isqrt(r2)
                for d in range(-bd, bd + 1):
                    r3 = r2 - d * d
                    C33 = a * e - b * d
                    e2 = C33 + (a + e) * z - s2
                    e3 = s3 - z * C33
                    bc = _isqrt(r3)
                    c_lo = 0 if symmetric else -bc
                    for c in range(c_lo, bc + 1):
                        w = 1
                        if symmetric:
                            if b > 0:
                                w *= 2
                            if c > 0:
                                w *= 2
                        r4 = r3 - c * c
                        bu = _isqrt(r4)
                        for u in range(-bu, bu + 1):
                            rho = r4 - u * u
                            C31 = b * u - c * e
                            C32 = c * d - a * u
                            D = c * C32 - u * C31
                            if D == 0:
                                state[2] += 1
                                _singular(a, b, c, d, e, u, z, e2, e3, C31, C32, w, lim, rho,
                                          s1, s2, s3, hist, hits, state)
                                continue
                            N1 = e2 * C32 - u * e3
                            N2 = c * e3 - e2 * C31
                            D2 = D * D
                            if N1 * N1 > rho * D2 or N2 * N2 > rho * D2:
                                continue
                            if N1 % D != 0 or N2 % D != 0:
                                continue
                            _record(a, b, c, d, e, u, N1 // D, N2 // D, z, w, lim, rho,
                                    s1, s2, s3, hist, hits, state)


def new_buffers(T2: int, capacity: int = 0):
    return (np.zeros(T2, dtype=np.int64), np.zeros((capacity, 9), dtype=np.int64),
            np.zeros(3, dtype=np.int64))
