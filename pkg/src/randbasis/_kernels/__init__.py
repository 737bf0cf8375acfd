"""Hot inner loops, numba-compiled by default.

Set ``LAB_DISABLE_NUMBA=1`` before import to run the pure-numpy path. Both
backends consume identical word streams; gaussian draws may differ between
backends in the last ulp because ``log`` comes from different libm builds.
"""

import os

import numpy as np

from . import _numpy

_flag = os.environ.get("LAB_DISABLE_NUMBA", "").strip().lower()

if _flag in ("1", "true", "yes", "on"):
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl
    except ImportError:  # numba missing: fall back silently
        _impl = _numpy
        BACKEND = "numpy"
    else:
        BACKEND = "numba"


def _u64(key):
    return np.uint64(key)


def words(key, counter, count):
    return _impl.words(_u64(key), counter, count)


def uniform_fill(key, counter, out):
    return int(_impl.uniform_fill(_u64(key), counter, out))


def polar_fill(key, counter, out):
    counter, spare = _impl.polar_fill(_u64(key), counter, out)
    return int(counter), float(spare)


def shuffle(key, counter, n):
    perm, counter = _impl.shuffle(_u64(key), counter, n)
    return perm, int(counter)


def cycle_lengths(images):
    return _impl.cycle_lengths(images)


def cycle_count(images):
    return int(_impl.cycle_count(images))
