"""The eight-entry products used in the martingale CLT argument.

Rows 1..4 stand for distinct indices; columns 1, 2 are k, k+1 and 3, 4 are
l, l+1 for a second, non-adjacent column pair.
"""

LYAPUNOV = {
    "L1": ((1, 1, 2, 2, 3, 3, 4, 4), (1, 2, 1, 2, 1, 2, 1, 2), -6),
    "L2": ((1, 1, 2, 2, 3, 3, 4, 4), (1, 2, 1, 2, 1, 1, 2, 2), -5),
    "L3": ((1, 1, 1, 1, 2, 2, 3, 3), (1, 2, 2, 2, 1, 2, 1, 1), -5),
    "L4": ((1, 1, 2, 2, 2, 2, 2, 2), (1, 2, 1, 1, 1, 2, 2, 2), -5),
    "L5": ((1, 1, 1, 1, 2, 2, 2, 2), (1, 2, 2, 2, 1, 1, 1, 2), -5),
    "L6": ((1, 1, 2, 2, 3, 3, 4, 4), (1, 1, 2, 2, 1, 1, 2, 2), -4),
    "L7": ((1, 1, 2, 2, 2, 2, 3, 3), (1, 1, 2, 2, 2, 2, 1, 1), -4),
    "L8": ((1, 1, 1, 1, 2, 2, 2, 2), (1, 1, 1, 1, 2, 2, 2, 2), -4),
}

PAIRWISE = {
    "P1": ((1, 1, 2, 2, 3, 3, 4, 4), (1, 2, 1, 2, 3, 4, 3, 4), -6),
    "P2": ((1, 3, 2, 4, 1, 3, 2, 4), (1, 2, 1, 2, 3, 4, 3, 4), -6),
    "P3": ((1, 1, 2, 3, 2, 3, 4, 4), (1, 2, 1, 2, 3, 4, 3, 4), -7),
    "P4": ((1, 3, 2, 4, 1, 2, 3, 4), (1, 2, 1, 2, 3, 4, 3, 4), -7),
    "P5": ((1, 1, 2, 3, 2, 3, 4, 4), (1, 2, 1, 2, 3, 3, 4, 4), -6),
    "P6": ((1, 1, 2, 2, 3, 3, 4, 4), (1, 2, 1, 2, 3, 3, 4, 4), -5),
    "P7": ((1, 2, 3, 3, 1, 2, 4, 4), (1, 1, 2, 2, 3, 3, 4, 4), -5),
    "P8": ((1, 1, 2, 2, 3, 3, 4, 4), (1, 1, 2, 2, 3, 3, 4, 4), -4),
}

ALL = {**LYAPUNOV, **PAIRWISE}

# small-order specs checked against Monte Carlo
REGRESSION = [
    ((1, 1), (1, 1)),
    ((1, 1, 1, 1), (1, 1, 2, 2)),
    ((1, 1, 2, 2), (1, 1, 2, 2)),
    ((1, 1, 2, 2), (1, 2, 1, 2)),
    ((1, 2, 1, 2), (1, 2, 2, 1)),
    ((1, 1, 1, 1), (1, 1, 1, 1)),
    ((1, 1, 1, 1, 1, 1), (1, 1, 1, 1, 1, 1)),
    ((1, 1, 2, 2, 3, 3), (1, 1, 2, 2, 3, 3)),
    ((1, 1, 1, 1, 2, 2), (1, 1, 2, 2, 1, 1)),
    ((1, 1, 1, 1), (1, 1, 1, 2)),
]
