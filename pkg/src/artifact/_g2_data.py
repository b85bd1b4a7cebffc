"""Precomputed split G2 inside gl(7).

G2 is realized as the stabilizer of the 3-form

    phi = e1^e4^e7 + e2^e4^e6 + e3^e4^e5 + e2^e3^e7 + e1^e5^e6

on Q^7, where e1..e7 carry the weights (2a+b, a+b, a, 0, -a, -a-b, -2a-b)
(a short, b long).  The stabilizer has dimension 14 and a diagonal Cartan.

It is not closed under plain transposition.  It is closed under
X -> S^-1 X^T S with S = METRIC, and the pairing tr(X S^-1 Y^T S) is the
Frobenius pairing after conjugating by sqrt(S).  Conjugating by sqrt(S)
would put sqrt(2) into the short root vectors, so we keep this frame and
carry S in the inner product instead.

Entries are 0-based (row, col, value).  Negative root vectors are generated
as S^-1 E^T S.  The scaling of each positive root vector fixes the first
nonzero entry at 1.
"""

METRIC = (1, 1, 1, 2, 1, 1, 1)

PHI = (
    ((0, 3, 6), 1),
    ((1, 3, 5), 1),
    ((2, 3, 4), 1),
    ((1, 2, 6), 1),
    ((0, 4, 5), 1),
)

# simple roots first: (1, 0) short, (0, 1) long
POSITIVE = (
    ((1, 0), ((0, 1, "1"), (2, 3, "-2"), (3, 4, "-1"), (5, 6, "1"))),
    ((0, 1), ((1, 2, "1"), (4, 5, "-1"))),
    ((1, 1), ((0, 2, "1"), (1, 3, "2"), (3, 5, "1"), (4, 6, "1"))),
    ((2, 1), ((0, 3, "1"), (1, 4, "1/2"), (2, 5, "-1/2"), (3, 6, "-1/2"))),
    ((3, 1), ((0, 4, "1"), (2, 6, "1"))),
    ((3, 2), ((0, 5, "1"), (1, 6, "1"))),
)
