"""Pure-numpy reference kernels.

Every generator here is counter based: word ``k`` of a stream with key ``key``
is ``mix64(key + (k + 1) * GAMMA)`` (SplitMix64 output function), so a batch
of words can be produced with vectorized uint64 arithmetic and still match the
sequential numba kernels word for word.
"""

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def words(key, counter, count):
    """Words ``counter .. counter + count - 1`` of the stream as uint64."""
    idx = np.arange(count, dtype=np.uint64)
    idx += np.uint64(counter + 1)
    return mix64(np.uint64(key) + idx * GAMMA)


def to_unit(w):
    """Map uint64 words to doubles in [0, 1) using the top 53 bits."""
    return (w >> _S11).astype(np.float64) * _INV53


def uniform_fill(key, counter, out):
    m = out.shape[0]
    out[:] = to_unit(words(key, counter, m))
    return counter + m


def polar_fill(key, counter, out):
    """Fill ``out`` with N(0,1) draws by the Marsaglia polar method.

    Candidate pair ``j`` uses words ``2j`` and ``2j+1``. Returns the new
    counter and the unused second value of the last pair (nan if none).
    """
    m = out.shape[0]
    pairs = (m + 1) // 2
    buf = np.empty(2 * pairs)
    got = 0
    while got < pairs:
        need = pairs - got
        batch = int(need * 1.3) + 16
        w = words(key, counter, 2 * batch)
        u = 2.0 * to_unit(w[0::2]) - 1.0
        v = 2.0 * to_unit(w[1::2]) - 1.0
        s = u * u + v * v
        ok = np.flatnonzero((s < 1.0) & (s > 0.0))[:need]
        st = s[ok]
        f = np.sqrt(-2.0 * np.log(st) / st)
        k = ok.shape[0]
        buf[2 * got:2 * (got + k):2] = u[ok] * f
        buf[2 * got + 1:2 * (got + k):2] = v[ok] * f
        got += k
        if k == need:
            counter += 2 * (int(ok[-1]) + 1)
        else:
            counter += 2 * batch
    out[:] = buf[:m]
    spare = buf[m] if 2 * pairs > m else np.nan
    return counter, spare


def shuffle(key, counter, n):
    """Fisher-Yates shuffle of ``0..n-1`` with rejection-sampled indices.

    Index for position ``i`` is drawn uniformly from ``0..i`` by rejecting
    words below ``2**64 mod (i + 1)`` and reducing modulo ``i + 1``.
    """
    perm = list(range(n))
    if n < 2:
        return np.array(perm, dtype=np.int64), counter
    w = words(key, counter, n - 1).tolist()
    pos = 0
    for i in range(n - 1, 0, -1):
        bound = i + 1
        thresh = ((1 << 64) - bound) % bound
        while True:
            if pos == len(w):
                w = words(key, counter + pos, 64).tolist()
                counter += pos
                pos = 0
            x = w[pos]
            pos += 1
            if x >= thresh:
                break
        j = x % bound
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64), counter + pos


def cycle_lengths(images):
    """Orbit lengths, in order of the smallest element of each orbit."""
    images = images.tolist()
    n = len(images)
    seen = [False] * n
    out = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = images[k]
            length += 1
        out.append(length)
    return np.array(out, dtype=np.int64)


def cycle_count(images):
    return cycle_lengths(images).shape[0]
