"""Limit laws N(0, v), Z + mu and Z + sY (Y ~ Poisson(1)) and fit statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

TAIL_TOL = 1e-12
_SQRT2 = math.sqrt(2.0)


def normal_cdf(x, variance: float = 1.0):
    """P(N(0, variance) <= x) via erfc; variance 0 gives the step at 0."""
    if variance < 0:
        raise ValueError(f"negative variance {variance}")
    x = np.asarray(x, dtype=np.float64)
    if variance == 0:
        out = (x >= 0).astype(np.float64)
    else:
        out = 0.5 * erfc(-x / (_SQRT2 * math.sqrt(variance)))
    return out if out.ndim else float(out)


def poisson_pmf(f: int) -> float:
    """P(Y = f) for Y ~ Poisson(1)."""
    if f < 0:
        raise ValueError(f"negative count {f}")
    return math.exp(-1.0 - math.lgamma(f + 1))


def poisson_cutoff(tol: float = TAIL_TOL) -> int:
    """Smallest F with P(Y > F) < tol, summing the tail term by term."""
    f = 0
    while sum(poisson_pmf(g) for g in range(f + 1, f + 40)) >= tol:
        f += 1
    return f


DEFAULT_CUTOFF = poisson_cutoff()


@dataclass(frozen=True)
class LimitLaw:
    """One of: gaussian(variance), shifted_gaussian(variance, shift),
    poisson_gaussian(s) meaning N(0, 1 - s^2) + s * Poisson(1)."""

    kind: str
    variance: float = 1.0
    shift: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "shifted_gaussian", "poisson_gaussian"):
            raise ValueError(f"unknown limit law {self.kind!r}")
        if self.kind == "poisson_gaussian":
            if self.s * self.s > 1.0 + 1e-12:
                raise ValueError(f"poisson_gaussian needs s^2 <= 1, got s={self.s}")
            object.__setattr__(self, "variance", max(0.0, 1.0 - self.s * self.s))
        elif self.variance < 0:
            raise ValueError(f"negative variance {self.variance}")

    @classmethod
    def gaussian(cls, variance: float = 1.0) -> "LimitLaw":
        return cls("gaussian", variance=float(variance))

    @classmethod
    def shifted_gaussian(cls, variance: float, shift: float) -> "LimitLaw":
        return cls("shifted_gaussian", variance=float(variance), shift=float(shift))

    @classmethod
    def poisson_gaussian(cls, s: float) -> "LimitLaw":
        return cls("poisson_gaussian", s=float(s))

    @property
    def params(self) -> dict:
        if self.kind == "poisson_gaussian":
            return {"s": self.s, "variance": self.variance}
        if self.kind == "shifted_gaussian":
            return {"variance": self.variance, "shift": self.shift}
        return {"variance": self.variance}

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "LimitLaw":
        kind, p = d["kind"], d.get("params", {})
        if kind == "poisson_gaussian":
            return cls.poisson_gaussian(p["s"])
        if kind == "shifted_gaussian":
            return cls.shifted_gaussian(p["variance"], p["shift"])
        if kind == "gaussian":
            return cls.gaussian(p.get("variance", 1.0))
        raise ValueError(f"unknown limit law {kind!r}")

    def cdf(self, x, cutoff: int | None = None):
        return limit_cdf(self, x, cutoff=cutoff)


def limit_cdf(law: LimitLaw, x, cutoff: int | None = None):
    """CDF of ``law``; the Poisson mixture sums f = 0..cutoff.

    The default cutoff leaves tail mass below 1e-12.
    """
    if law.kind == "gaussian":
        return normal_cdf(x, law.variance)
    if law.kind == "shifted_gaussian":
        return normal_cdf(np.asarray(x, dtype=np.float64) - law.shift, law.variance)
    if law.s == 0.0:
        # every shifted term is the same Gaussian
        return normal_cdf(x, law.variance)
    if cutoff is None:
        cutoff = DEFAULT_CUTOFF
    xs = np.asarray(x, dtype=np.float64)
    total = np.zeros_like(xs)
    for f in range(cutoff + 1):
        total += poisson_pmf(f) * normal_cdf(xs - f * law.s, law.variance)
    return total if total.ndim else float(total)


class EmpiricalDistribution:
    """Sorted sample values."""

    def __init__(self, values):
        v = np.sort(np.asarray(values, dtype=np.float64).ravel())
        if v.size == 0:
            raise ValueError("empirical distribution needs at least one value")
        v.flags.writeable = False
        self.values = v

    @property
    def count(self) -> int:
        return self.values.shape[0]


def ks_distance(emp, law: LimitLaw) -> float:
    """sup_i max(|i/N - F(x_i)|, |(i-1)/N - F(x_i)|) over sorted samples."""
    if not isinstance(emp, EmpiricalDistribution):
        emp = EmpiricalDistribution(emp)
    n = emp.count
    f = np.asarray(limit_cdf(law, emp.values), dtype=np.float64)
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max(np.max(np.abs(i / n - f)), np.max(np.abs((i - 1) / n - f))))


def total_variation(counts, cutoff: int | None = None) -> float:
    """TV distance between a count histogram and Poisson(1).

    ``counts[f]`` for f = 0..F followed by one overflow bucket (values > F).
    A histogram of length F+1 is taken to have an empty overflow bucket.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if cutoff is None:
        cutoff = counts.shape[0] - 2
    if counts.shape[0] == cutoff + 1:
        counts = np.append(counts, 0.0)
    if counts.shape[0] != cutoff + 2 or cutoff < 0:
        raise ValueError("histogram must hold buckets 0..F plus an overflow bucket")
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty histogram")
    emp = counts / total
    pmf = np.array([poisson_pmf(f) for f in range(cutoff + 1)])
    tail = sum(poisson_pmf(f) for f in range(cutoff + 1, cutoff + 60))
    return 0.5 * (float(np.abs(emp[:-1] - pmf).sum()) + abs(float(emp[-1]) - tail))


def histogram(values, cutoff: int) -> np.ndarray:
    """Counts of the non-negative integers 0..cutoff plus an overflow bucket."""
    v = np.asarray(values)
    k = np.rint(v).astype(np.int64)
    if np.any(k < 0):
        raise ValueError("histogram needs non-negative integer values")
    counts = np.bincount(np.minimum(k, cutoff + 1), minlength=cutoff + 2)
    return counts.astype(np.int64)


def quantile(law: LimitLaw, u: float, lo: float = -60.0, hi: float = 60.0, iters: int = 200) -> float:
    """Smallest x with F(x) >= u, by bisection on the CDF."""
    if not 0.0 < u < 1.0:
        raise ValueError("quantile level must lie in (0, 1)")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if limit_cdf(law, mid) >= u:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-13:
            break
    return hi
