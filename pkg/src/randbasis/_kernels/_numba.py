"""numba-compiled kernels; same streams as ``_numpy`` word for word."""

import math

import numpy as np
from numba import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0

_jit = njit(cache=True, nogil=True)


@_jit
def _word(key, k):
    z = key + (np.uint64(k) + np.uint64(1)) * GAMMA
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@_jit
def _unit(w):
    return np.float64(w >> np.uint64(11)) * _INV53


@_jit
def words(key, counter, count):
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = _word(key, counter + i)
    return out


@_jit
def uniform_fill(key, counter, out):
    for i in range(out.shape[0]):
        out[i] = _unit(_word(key, counter))
        counter += 1
    return counter


@_jit
def polar_fill(key, counter, out):
    m = out.shape[0]
    i = 0
    spare = np.nan
    while i < m:
        u = 2.0 * _unit(_word(key, counter)) - 1.0
        v = 2.0 * _unit(_word(key, counter + 1)) - 1.0
        counter += 2
        s = u * u + v * v
        if s >= 1.0 or s == 0.0:
            continue
        f = math.sqrt(-2.0 * math.log(s) / s)
        out[i] = u * f
        if i + 1 < m:
            out[i + 1] = v * f
        else:
            spare = v * f
        i += 2
    return counter, spare


@_jit
def shuffle(key, counter, n):
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        bound = np.uint64(i + 1)
        thresh = (np.uint64(0) - bound) % bound
        x = _word(key, counter)
        counter += 1
        while x < thresh:
            x = _word(key, counter)
            counter += 1
        j = np.int64(x % bound)
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
    return perm, counter


@_jit
def cycle_lengths(images):
    n = images.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    out = np.empty(n, dtype=np.int64)
    c = 0
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = images[k]
            length += 1
        out[c] = length
        c += 1
    return out[:c]


@_jit
def cycle_count(images):
    n = images.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    c = 0
    for start in range(n):
        if seen[start]:
            continue
        k = start
        while not seen[k]:
            seen[k] = True
            k = images[k]
        c += 1
    return c
