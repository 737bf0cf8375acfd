"""Seeded random streams, Haar orthogonal matrices and permutations."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from . import _kernels

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit avalanche mix."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def _check_u64(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if not 0 <= value <= MASK64:
        raise ValueError(f"{name} must lie in [0, 2**64), got {value}")
    return value


class RngStream:
    """Counter-based generator owned by a single unit of work.

    The stream key is fixed at derivation; ``counter`` counts 64-bit words
    consumed so far. Gaussians come in polar pairs, so an odd-sized request
    leaves one value cached for the next call.
    """

    __slots__ = ("key", "counter", "origin", "_spare")

    def __init__(self, key: int, origin: tuple[int, int] | None = None):
        self.key = _check_u64(key, "key")
        self.counter = 0
        self.origin = origin
        self._spare = None

    def __repr__(self):
        return f"RngStream(origin={self.origin}, counter={self.counter})"

    def copy(self) -> "RngStream":
        return copy.copy(self)

    def uint64s(self, count: int) -> np.ndarray:
        out = _kernels.words(self.key, self.counter, count)
        self.counter += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        out = np.empty(count)
        self.counter = _kernels.uniform_fill(self.key, self.counter, out)
        return out

    def gaussians(self, count: int) -> np.ndarray:
        out = np.empty(count)
        if count == 0:
            return out
        start = 0
        if self._spare is not None:
            out[0] = self._spare
            self._spare = None
            start = 1
        if start < count:
            self.counter, spare = _kernels.polar_fill(self.key, self.counter, out[start:])
            if spare == spare:  # not nan
                self._spare = spare
        return out


def derive_stream(seed: int, index: int) -> RngStream:
    """Stream ``index`` of ``seed``.

    key = mix64(seed XOR mix64((index + 1) * GAMMA)); every step is a
    bijection of 64-bit words, so distinct indices give distinct keys.
    """
    seed = _check_u64(seed, "seed")
    index = _check_u64(index, "index")
    key = mix64(seed ^ mix64((index + 1) * GAMMA))
    return RngStream(key, origin=(seed, index))


def standard_gaussian(stream: RngStream) -> float:
    return float(stream.gaussians(1)[0])


def _check_dim(n, name="n"):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def _sign_fixed_qr(g: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r))
    d[d == 0] = 1.0
    q *= d
    return q


def haar_orthogonal(n: int, stream: RngStream) -> np.ndarray:
    """Haar-distributed n x n orthogonal matrix.

    Fills a Gaussian matrix column by column, takes its Householder QR and
    flips column signs so that R has a positive diagonal. Without the sign
    flip the result is not Haar distributed.
    """
    n = _check_dim(n)
    g = stream.gaussians(n * n).reshape((n, n), order="F")
    q = _sign_fixed_qr(g)
    q.flags.writeable = False
    return q


def haar_frame(n: int, k: int, stream: RngStream) -> np.ndarray:
    """First ``k`` columns of ``haar_orthogonal(n, stream)``.

    The Gaussian fill is column-major, so the first ``k`` columns only use
    a prefix of the stream; they agree with the full sample up to roundoff.
    """
    n = _check_dim(n)
    k = _check_dim(k, "k")
    if k > n:
        raise ValueError(f"frame width {k} exceeds dimension {n}")
    g = stream.gaussians(n * k).reshape((n, k), order="F")
    q = _sign_fixed_qr(g)
    q.flags.writeable = False
    return q


class Permutation:
    """Bijection of {0..n-1} stored by images: ``images[k] = sigma(k)``.

    As a matrix it acts on basis vectors, ``P e_k = e_sigma(k)``, i.e.
    ``P[sigma(k), k] = 1``. One-line notation in and out is 1-based.
    """

    __slots__ = ("images",)

    def __init__(self, images):
        arr = np.array(images, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("permutation needs a non-empty 1-d image array")
        if not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise ValueError("images are not a bijection of 0..n-1")
        arr.flags.writeable = False
        self.images = arr

    @classmethod
    def _trusted(cls, images: np.ndarray) -> "Permutation":
        # skips validation; images must come from a bijection-producing kernel
        self = object.__new__(cls)
        images.flags.writeable = False
        self.images = images
        return self

    @classmethod
    def from_one_line(cls, values) -> "Permutation":
        return cls(np.asarray(values, dtype=np.int64) - 1)

    @property
    def n(self) -> int:
        return self.images.shape[0]

    def one_line(self) -> list[int]:
        return (self.images + 1).tolist()

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.n, self.n))
        p[self.images, np.arange(self.n)] = 1.0
        return p

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.images, other.images)

    def __hash__(self):
        return hash(self.images.tobytes())

    def __repr__(self):
        return f"Permutation({self.one_line()})"


@dataclass(frozen=True)
class CycleType:
    """Cycle lengths of a permutation, stored in decreasing order."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts:
            raise ValueError("empty cycle type")
        if any(p < 1 for p in parts):
            raise ValueError(f"cycle lengths must be positive, got {parts}")
        object.__setattr__(self, "parts", tuple(sorted(parts, reverse=True)))

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def cycles(self) -> int:
        return len(self.parts)

    @property
    def fixed_points(self) -> int:
        return self.parts.count(1)


def uniform_permutation(n: int, stream: RngStream) -> Permutation:
    """Uniform draw from S_n by Fisher-Yates with unbiased index sampling."""
    n = _check_dim(n)
    images, stream.counter = _kernels.shuffle(stream.key, stream.counter, n)
    return Permutation._trusted(images)


def cycle_type(p: Permutation) -> CycleType:
    return CycleType(tuple(_kernels.cycle_lengths(p.images).tolist()))


def cycle_count(p: Permutation) -> int:
    return _kernels.cycle_count(p.images)


def fixed_points(p: Permutation) -> int:
    return int(np.count_nonzero(p.images == np.arange(p.n)))


def canonical_permutation(ct) -> Permutation:
    """Consecutive-block permutation (1..n1)(n1+1..n2)... with cycle type ``ct``.

    Blocks follow the decreasing part order; within a block k -> k+1 and the
    last element wraps to the first.
    """
    if not isinstance(ct, CycleType):
        ct = CycleType(tuple(ct))
    images = np.empty(ct.n, dtype=np.int64)
    start = 0
    for length in ct.parts:
        block = np.arange(start, start + length)
        images[block] = np.roll(block, -1)
        start += length
    return Permutation._trusted(images)
