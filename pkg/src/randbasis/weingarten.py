"""Exact moments of Haar orthogonal matrix entries.

E[M_{i1 j1} ... M_{i2r j2r}] is the sum of Wg(m, nn) over pair partitions m
that pair equal row indices and nn that pair equal column indices. The
Weingarten matrix Wg is the inverse of the Gram matrix G[m, nn] =
n**loops(m, nn), computed here with exact integer (Bareiss) elimination.

Pair partitions are tuples of 0-based position pairs ``((a, b), ...)`` with
``a < b``, pairs sorted by their first element.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .sampling import derive_stream, haar_frame

MAX_ORDER = 4

PairPartition = tuple[tuple[int, int], ...]


class WeingartenError(ValueError):
    """Requested moment lies outside the supported exact regime."""


@dataclass(frozen=True)
class MomentSpec:
    """Entry positions (1-based) of a monomial in Haar matrix entries."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(int(i) for i in self.rows)
        cols = tuple(int(j) for j in self.cols)
        if len(rows) != len(cols):
            raise ValueError(f"rows and cols differ in length ({len(rows)} vs {len(cols)})")
        if not rows or len(rows) % 2:
            raise ValueError(f"moment needs a positive even number of entries, got {len(rows)}")
        if min(rows + cols) < 1:
            raise ValueError("indices are 1-based and must be positive")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def order(self) -> int:
        return len(self.rows) // 2

    def parity_zero(self) -> bool:
        """True when some row or column index occurs an odd number of times."""
        return any(c % 2 for c in Counter(self.rows).values()) or any(
            c % 2 for c in Counter(self.cols).values()
        )


def _check_order(r):
    if not 1 <= r <= MAX_ORDER:
        raise WeingartenError(f"order r={r} unsupported (need 1 <= r <= {MAX_ORDER})")


def _matchings(items):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for tail in _matchings(rest[:k] + rest[k + 1:]):
            yield ((first, partner),) + tail


def enumerate_pairings(size: int) -> list[PairPartition]:
    """All (size-1)!! perfect matchings of {0..size-1} in lexicographic order."""
    if size <= 0 or size % 2:
        raise WeingartenError(f"pairings need a positive even size, got {size}")
    _check_order(size // 2)
    return list(_matchings(tuple(range(size))))


def loop_count(m: PairPartition, nn: PairPartition) -> int:
    """Connected components of the multigraph with edge set m + nn."""
    if len(m) != len(nn):
        raise ValueError(f"pair partitions differ in size ({len(m)} vs {len(nn)})")
    parent = list(range(2 * len(m)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = len(parent)
    for a, b in m + nn:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            components -= 1
    return components


def _loop_table(r):
    pairings = enumerate_pairings(2 * r)
    return pairings, [[loop_count(p, q) for q in pairings] for p in pairings]


def gram_matrix(r: int, n: int) -> list[list[int]]:
    """G[m][nn] = n**loops(m, nn) over the pairings of {0..2r-1}."""
    _check_order(r)
    _, loops = _loop_table(r)
    return [[n**x for x in row] for row in loops]


def _bareiss_inverse(g: list[list[int]]) -> tuple[list[list[int]], int]:
    """Fraction-free Gauss-Jordan on [g | I].

    Every intermediate entry is a minor of the augmented matrix, so the
    divisions by the previous pivot are exact. Returns (adj, d) with
    g**-1 = adj / d.
    """
    size = len(g)
    a = [list(row) + [int(i == j) for j in range(size)] for i, row in enumerate(g)]
    prev = 1
    for k in range(size):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i][k] != 0), None)
            if swap is None:
                raise ZeroDivisionError("Gram matrix is singular")
            a[k], a[swap] = a[swap], a[k]
        rowk = a[k]
        piv = rowk[k]
        for i in range(size):
            if i == k:
                continue
            ri = a[i]
            f = ri[k]
            if f == 0:
                a[i] = [piv * x // prev for x in ri]
            else:
                a[i] = [(piv * x - f * y) // prev for x, y in zip(ri, rowk)]
        prev = piv
    # left block is now prev * I
    return [row[size:] for row in a], prev


_cache: dict[tuple[int, int], tuple[tuple[Fraction, ...], ...]] = {}
_cache_lock = threading.Lock()


def weingarten_matrix(r: int, n: int) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse of ``gram_matrix(r, n)``; memoized per (r, n)."""
    _check_order(r)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError("dimension must be an integer")
    n = int(n)
    if n < 2 * r:
        raise WeingartenError(
            f"Weingarten matrix for r={r} needs n >= {2 * r}, got n={n}"
        )
    key = (r, n)
    wg = _cache.get(key)
    if wg is not None:
        return wg
    with _cache_lock:
        wg = _cache.get(key)
        if wg is None:
            adj, det = _bareiss_inverse(gram_matrix(r, n))
            wg = tuple(tuple(Fraction(x, det) for x in row) for row in adj)
            _cache[key] = wg
    return wg


def _admissible(labels, pairings):
    return [
        idx for idx, p in enumerate(pairings) if all(labels[a] == labels[b] for a, b in p)
    ]


def _as_spec(spec):
    if isinstance(spec, MomentSpec):
        return spec
    rows, cols = spec
    return MomentSpec(tuple(rows), tuple(cols))


def haar_moment(spec, n: int) -> Fraction:
    """Exact E[prod M_{rows[k], cols[k]}] for an n x n Haar orthogonal M."""
    spec = _as_spec(spec)
    r = spec.order
    _check_order(r)
    if spec.parity_zero():
        return Fraction(0)
    if max(spec.rows + spec.cols) > n:
        raise WeingartenError(f"index exceeds dimension n={n}")
    wg = weingarten_matrix(r, n)
    pairings = enumerate_pairings(2 * r)
    row_ok = _admissible(spec.rows, pairings)
    col_ok = _admissible(spec.cols, pairings)
    return sum((wg[i][j] for i in row_ok for j in col_ok), Fraction(0))


def moment_order(spec) -> int | None:
    """Exponent e with haar_moment = Theta(n**e), from the largest loop count.

    Returns None when no admissible pairing exists (the moment is exactly 0).
    """
    spec = _as_spec(spec)
    r = spec.order
    _check_order(r)
    pairings, loops = _loop_table(r)
    row_ok = _admissible(spec.rows, pairings)
    col_ok = _admissible(spec.cols, pairings)
    if not row_ok or not col_ok:
        return None
    return max(loops[i][j] for i in row_ok for j in col_ok) - 2 * r


def monte_carlo_moments(specs, n: int, replicates: int, seed: int):
    """Sample means and standard errors of several entry products.

    All specs share the same draws; replicate ``i`` uses stream ``i`` and
    only the leading columns of M that the specs touch.
    """
    specs = [_as_spec(s) for s in specs]
    if replicates < 2:
        raise ValueError("need at least 2 replicates for a standard error")
    width = max(max(s.cols) for s in specs)
    if max(max(s.rows) for s in specs) > n or width > n:
        raise ValueError(f"index exceeds dimension n={n}")
    rows = [np.array(s.rows) - 1 for s in specs]
    cols = [np.array(s.cols) - 1 for s in specs]
    values = np.empty((len(specs), replicates))
    for i in range(replicates):
        m = haar_frame(n, width, derive_stream(seed, i))
        for k in range(len(specs)):
            values[k, i] = np.prod(m[rows[k], cols[k]])
    means = values.mean(axis=1)
    ses = values.std(axis=1, ddof=1) / math.sqrt(replicates)
    return [(float(a), float(b)) for a, b in zip(means, ses)]


def monte_carlo_moment(spec, n: int, replicates: int, seed: int) -> tuple[float, float]:
    return monte_carlo_moments([spec], n, replicates, seed)[0]
