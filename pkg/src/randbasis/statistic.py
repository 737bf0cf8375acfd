"""Coefficient matrices and the statistics Tr(A M P M^T), entries, increments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import Permutation
from .weingarten import haar_moment

NORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """Coefficient matrix A with its diagonal constants.

    s_n = sum_i A_ii / n and c_n = sum_{i != j} A_ii A_jj / n**2; after
    normalization norm_sq = Tr(A A^T) equals n.
    """

    a: np.ndarray
    s_n: float
    c_n: float
    norm_sq: float

    @property
    def n(self) -> int:
        return self.a.shape[0]


def _square(m) -> np.ndarray:
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"coefficient must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("coefficient entries must be finite")
    return a


def make_coefficient(m, normalize: bool = True) -> CoefficientMatrix:
    a = _square(m)
    n = a.shape[0]
    norm_sq = float(np.sum(a * a))
    if normalize:
        if norm_sq == 0.0:
            raise ValueError("cannot normalize the zero matrix")
        if abs(norm_sq - n) > NORM_TOL:
            a *= math.sqrt(n / norm_sq)
            norm_sq = float(np.sum(a * a))
    d = np.diagonal(a)
    tr = float(d.sum())
    c_n = (tr * tr - float(np.dot(d, d))) / (n * n)
    a.flags.writeable = False
    return CoefficientMatrix(a=a, s_n=tr / n, c_n=c_n, norm_sq=norm_sq)


def _check_pair(a: CoefficientMatrix, m: np.ndarray):
    if m.ndim != 2 or m.shape[0] != a.n or m.shape[1] != a.n:
        raise ValueError(f"matrix shape {m.shape} does not match coefficient dimension {a.n}")


def conjugated(a: CoefficientMatrix, m: np.ndarray) -> np.ndarray:
    """B = M^T A M; then Tr(A M P M^T) = sum_k B[k, sigma(k)]."""
    _check_pair(a, m)
    return m.T @ a.a @ m


def trace_from_conjugated(b: np.ndarray, images: np.ndarray) -> float:
    return float(b[np.arange(b.shape[0]), images].sum())


def trace_statistic(a: CoefficientMatrix, m: np.ndarray, p: Permutation) -> float:
    """Tr(A M P M^T) in O(n^3) for M^T A M plus O(n) for the permutation."""
    if p.n != a.n:
        raise ValueError(f"permutation size {p.n} does not match dimension {a.n}")
    return trace_from_conjugated(conjugated(a, m), p.images)


def entry_statistic(row: int, col: int, m: np.ndarray, p: Permutation) -> float:
    """sqrt(n) (M P M^T)_{row,col} with 1-based indices."""
    n = m.shape[0]
    if p.n != n or m.shape[1] != n:
        raise ValueError("matrix and permutation dimensions disagree")
    if not (1 <= row <= n and 1 <= col <= n):
        raise IndexError(f"entry ({row}, {col}) outside 1..{n}")
    return math.sqrt(n) * float(m[row - 1, p.images] @ m[col - 1])


def single_entry_matrix(row: int, col: int, n: int) -> np.ndarray:
    """A with Tr(A X) = sqrt(n) X_{row,col}: sqrt(n) at position (col, row)."""
    if not (1 <= row <= n and 1 <= col <= n):
        raise IndexError(f"entry ({row}, {col}) outside 1..{n}")
    a = np.zeros((n, n))
    a[col - 1, row - 1] = math.sqrt(n)
    return a


def martingale_increments(a: CoefficientMatrix, m: np.ndarray) -> np.ndarray:
    """X_k = sum_{i,j} A_ij M[i,k] M[j,k+1], column k+1 taken cyclically.

    With P[sigma(k), k] = 1 and sigma(k) = k+1 these sum to Tr(A M C_n M^T).
    """
    _check_pair(a, m)
    return np.einsum("ik,ik->k", m, a.a @ np.roll(m, -1, axis=1))


def first_increment(a: CoefficientMatrix, frame: np.ndarray) -> float:
    """X_1 from the first two columns of M alone."""
    if frame.shape[0] != a.n or frame.shape[1] < 2:
        raise ValueError("need the first two columns of M")
    return float(frame[:, 0] @ a.a @ frame[:, 1])


def increment_moments(n: int) -> dict[str, object]:
    """Exact second-order moments entering E[X_{n,k}^2]."""
    return {
        "same_row": haar_moment(((1, 1, 1, 1), (1, 1, 2, 2)), n),
        "distinct_rows": haar_moment(((1, 1, 2, 2), (1, 1, 2, 2)), n),
        "cross": haar_moment(((1, 1, 2, 2), (1, 2, 1, 2)), n),
    }


def variance_prediction(a: CoefficientMatrix, n: int | None = None) -> float:
    """Exact E[X_{n,k}^2] at finite n.

    sum_{i,j} A_ij^2 E[M_jk^2 M_{i,k+1}^2]
      + w * sum_{i != j} (A_ij A_ji + A_ii A_jj),  w = -1/((n-1) n (n+2)),
    with the same-row and distinct-row fourth moments kept exact.
    """
    if n is None:
        n = a.n
    if n != a.n:
        raise ValueError(f"dimension {n} does not match coefficient dimension {a.n}")
    if n < 4:
        raise ValueError(f"variance prediction needs n >= 4, got n={n}")
    mom = increment_moments(n)
    sq = a.a * a.a
    diag_sq = float(np.trace(sq))
    d = np.diagonal(a.a)
    tr = float(d.sum())
    off_sq = float(sq.sum()) - diag_sq
    transpose_sum = float(np.sum(a.a * a.a.T)) - float(np.dot(d, d))
    diag_pairs = tr * tr - float(np.dot(d, d))
    return (
        float(mom["same_row"]) * diag_sq
        + float(mom["distinct_rows"]) * off_sq
        + float(mom["cross"]) * (transpose_sum + diag_pairs)
    )
