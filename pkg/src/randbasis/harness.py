"""Reproducible Monte Carlo experiments and their on-disk artifacts.

Replicate ``i`` of every experiment draws from ``derive_stream(seed, i)``;
when a scenario needs both a random permutation and a Haar matrix the
permutation is drawn first. Results are stored by replicate index, so the
samples do not depend on how replicates are spread over worker threads.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from . import limitdist as ld
from .sampling import (
    CycleType,
    canonical_permutation,
    cycle_count,
    derive_stream,
    haar_frame,
    haar_orthogonal,
    uniform_permutation,
)
from .statistic import (
    CoefficientMatrix,
    first_increment,
    make_coefficient,
    single_entry_matrix,
    variance_prediction,
)
from .weingarten import MomentSpec, haar_moment

SCENARIOS = (
    "single_entry",
    "cycle_trace",
    "fixed_cycle_type",
    "uniform_perm_trace",
    "goncharov",
    "fixed_points",
    "lyapunov_scaling",
    "variance_check",
    "moment_check",
)
FAMILIES = ("identity", "single_entry", "diagonal_alpha", "zero_diagonal_random", "csv")
CONFIG_KEYS = ("scenario", "scenario_params", "n", "replicates", "seed", "coefficient", "output_dir")
SAMPLES_HEADER = "replicate,value"

# replicate streams use small indices; the random coefficient draws from the top one
COEFFICIENT_STREAM = (1 << 64) - 1
_TV_CUTOFF = 20
_COEFFICIENT_FREE = ("goncharov", "fixed_points", "single_entry", "moment_check")


class ConfigError(ValueError):
    """Experiment configuration is malformed or inconsistent."""


class PersistError(OSError):
    """Writing experiment artifacts failed."""


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("LAB_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    return threads


def _int(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def normalize_family(spec) -> dict:
    """Coefficient family as a dict with a ``family`` key."""
    if spec is None:
        spec = "identity"
    if isinstance(spec, str):
        spec = {"family": spec}
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError(f"coefficient must be a family name or an object with 'family', got {spec!r}")
    spec = dict(spec)
    family = spec["family"]
    if family not in FAMILIES:
        raise ConfigError(f"unknown coefficient family {family!r}; expected one of {FAMILIES}")
    if family == "diagonal_alpha":
        alpha = spec.get("alpha")
        if not isinstance(alpha, (int, float)) or isinstance(alpha, bool) or not 0 < alpha <= 1:
            raise ConfigError(f"diagonal_alpha needs alpha in (0, 1], got {alpha!r}")
    elif family == "single_entry":
        _int(spec.get("a"), "single_entry a", 1)
        _int(spec.get("b"), "single_entry b", 1)
    elif family == "csv":
        if not isinstance(spec.get("path"), str):
            raise ConfigError("csv coefficient needs a 'path'")
    return spec


def read_matrix_csv(path) -> np.ndarray:
    """n rows of n comma-separated decimals."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read coefficient CSV {path}: {exc}") from exc
    rows = [line for line in text.splitlines() if line.strip()]
    try:
        a = np.array([[float(x) for x in line.split(",")] for line in rows])
    except ValueError as exc:
        raise ConfigError(f"malformed coefficient CSV {path}: {exc}") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.size == 0:
        raise ConfigError(f"coefficient CSV {path} is not a square matrix")
    return a


def write_matrix_csv(path, a: np.ndarray) -> None:
    lines = [",".join(format(x, ".17g") for x in row) for row in a]
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def build_coefficient(family, n: int, seed: int = 0) -> CoefficientMatrix:
    """Normalized coefficient matrix of the given family at dimension n."""
    spec = normalize_family(family)
    kind = spec["family"]
    if kind == "identity":
        a = np.eye(n)
    elif kind == "single_entry":
        if spec["a"] > n or spec["b"] > n:
            raise ConfigError(f"single_entry ({spec['a']}, {spec['b']}) outside dimension {n}")
        a = single_entry_matrix(spec["a"], spec["b"], n)
    elif kind == "diagonal_alpha":
        alpha = float(spec["alpha"])
        # alpha * n is rounded half up when not integral (n=202, alpha=1/4
        # gives 51 entries); entries sqrt(n/k) keep Tr(A A^T) = n exactly.
        k = max(1, math.floor(alpha * n + 0.5 + 1e-9))
        a = np.zeros((n, n))
        idx = np.arange(k)
        a[idx, idx] = math.sqrt(n / k)
    elif kind == "zero_diagonal_random":
        stream = derive_stream(int(spec.get("seed", seed)), COEFFICIENT_STREAM)
        a = stream.gaussians(n * n).reshape(n, n)
        np.fill_diagonal(a, 0.0)
    else:
        a = read_matrix_csv(spec["path"])
        if a.shape[0] != n:
            raise ConfigError(f"coefficient CSV has dimension {a.shape[0]}, expected {n}")
    try:
        return make_coefficient(a, normalize=True)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    n: int
    replicates: int
    seed: int
    scenario_params: dict = field(default_factory=dict)
    coefficient: dict | str | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        _int(self.n, "n", 2)
        _int(self.replicates, "replicates", 1)
        _int(self.seed, "seed", 0)
        if self.seed >= 1 << 64:
            raise ConfigError("seed must fit in 64 bits")
        if not isinstance(self.scenario_params, dict):
            raise ConfigError("scenario_params must be an object")
        p = self.scenario_params
        if self.scenario == "single_entry":
            a, b = _int(p.get("a", 1), "a", 1), _int(p.get("b", 1), "b", 1)
            if max(a, b) > self.n:
                raise ConfigError(f"entry ({a}, {b}) outside dimension {self.n}")
        elif self.scenario == "fixed_cycle_type":
            parts = p.get("cycle_type")
            if not isinstance(parts, list) or not parts:
                raise ConfigError("fixed_cycle_type needs a non-empty 'cycle_type' list")
            try:
                ct = CycleType(tuple(parts))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad cycle type {parts!r}: {exc}") from exc
            if ct.n != self.n:
                raise ConfigError(f"cycle type sums to {ct.n}, expected n={self.n}")
        elif self.scenario == "moment_check":
            try:
                spec = MomentSpec(tuple(p["rows"]), tuple(p["cols"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"moment_check needs equal even-length 'rows' and 'cols': {exc}") from exc
            if max(spec.rows + spec.cols) > self.n:
                raise ConfigError(f"moment indices exceed dimension {self.n}")
        if self.scenario == "goncharov" and self.n < 10:
            warnings.warn("goncharov at n < 10 is a diagnostic only", stacklevel=2)
        if self.coefficient is not None:
            normalize_family(self.coefficient)

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}; allowed {list(CONFIG_KEYS)}")
        missing = [k for k in ("scenario", "n", "replicates", "seed") if k not in d]
        if missing:
            raise ConfigError(f"missing config fields {missing}")
        coefficient = d.get("coefficient")
        if base_dir is not None and isinstance(coefficient, dict) and coefficient.get("family") == "csv":
            path = Path(coefficient.get("path", ""))
            if not path.is_absolute():
                coefficient = dict(coefficient, path=str(Path(base_dir) / path))
        return cls(
            scenario=d["scenario"],
            n=d["n"],
            replicates=d["replicates"],
            seed=d["seed"],
            scenario_params=d.get("scenario_params") or {},
            coefficient=coefficient,
            output_dir=d.get("output_dir"),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in CONFIG_KEYS}


@dataclass
class EmpiricalSummary:
    scenario: str
    scenario_params: dict
    n: int
    replicates: int
    seed: int
    mean: float
    variance: float
    fit: str | None
    fit_value: float | None
    limit: dict
    s_n: float | None
    c_n: float | None
    elapsed_seconds: float

    def to_dict(self) -> dict:
        d = {
            "scenario": self.scenario,
            "scenario_params": self.scenario_params,
            "n": self.n,
            "replicates": self.replicates,
            "seed": self.seed,
            "mean": self.mean,
            "variance": self.variance,
        }
        d[self.fit or "ks"] = self.fit_value
        d.update(limit=self.limit, s_n=self.s_n, c_n=self.c_n, elapsed_seconds=self.elapsed_seconds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EmpiricalSummary":
        fit = "tv" if "tv" in d else ("ks" if d.get("ks") is not None else None)
        return cls(
            scenario=d["scenario"],
            scenario_params=d.get("scenario_params", {}),
            n=d["n"],
            replicates=d["replicates"],
            seed=d["seed"],
            mean=d["mean"],
            variance=d["variance"],
            fit=fit,
            fit_value=d.get(fit) if fit else None,
            limit=d["limit"],
            s_n=d["s_n"],
            c_n=d["c_n"],
            elapsed_seconds=d["elapsed_seconds"],
        )

    def deterministic_dict(self) -> dict:
        d = self.to_dict()
        d.pop("elapsed_seconds")
        return d


@dataclass
class _Plan:
    value: Callable[[int], float]
    coefficient: CoefficientMatrix | None
    limit: dict
    fit: Callable[[np.ndarray], tuple[str, float]] | None


def _trace_value(amat: np.ndarray, diag: np.ndarray | None, m: np.ndarray, images: np.ndarray) -> float:
    # sum_k (M^T A M)[k, sigma(k)] = sum_{i,k} M[i, k] (A M)[i, sigma(k)]
    am = diag[:, None] * m if diag is not None else amat @ m
    return float(np.sum(m * am[:, images]))


def _ks_fit(law: ld.LimitLaw, transform=None):
    def fit(values):
        v = values if transform is None else transform(values)
        return "ks", ld.ks_distance(v, law)

    return fit


def _tv_fit(scale: float = 1.0):
    def fit(values):
        return "tv", ld.total_variation(ld.histogram(values / scale, _TV_CUTOFF))

    return fit


def _plan(config: ExperimentConfig) -> _Plan:
    n, seed, p = config.n, config.seed, config.scenario_params
    scenario = config.scenario
    if scenario in _COEFFICIENT_FREE and config.coefficient is not None:
        warnings.warn(f"scenario {scenario} ignores the coefficient setting", stacklevel=3)

    if scenario == "single_entry":
        a, b = p.get("a", 1), p.get("b", 1)
        coef = build_coefficient({"family": "single_entry", "a": a, "b": b}, n)
        width = max(a, b)
        root_n = math.sqrt(n)

        def value(i):
            st = derive_stream(seed, i)
            images = uniform_permutation(n, st).images
            # M := Q^T is Haar too; rows a, b of M are columns a, b of Q
            q = haar_frame(n, width, st)
            return root_n * float(q[images, a - 1] @ q[:, b - 1])

        law = ld.LimitLaw.gaussian(1.0)
        return _Plan(value, coef, law.to_dict(), _ks_fit(law))

    if scenario in ("goncharov", "fixed_points"):
        if scenario == "goncharov":

            def value(i):
                return float(cycle_count(uniform_permutation(n, derive_stream(seed, i))))

            log_n = math.log(n)
            law = ld.LimitLaw.gaussian(1.0)
            limit = dict(law.to_dict(), statistic="(K_n - log n) / sqrt(log n)")
            return _Plan(value, None, limit, _ks_fit(law, lambda v: (v - log_n) / math.sqrt(log_n)))

        def value(i):
            images = uniform_permutation(n, derive_stream(seed, i)).images
            return float(np.count_nonzero(images == np.arange(n)))

        return _Plan(value, None, ld.LimitLaw.poisson_gaussian(1.0).to_dict(), _tv_fit())

    if scenario == "moment_check":
        spec = MomentSpec(tuple(p["rows"]), tuple(p["cols"]))
        exact = haar_moment(spec, n)
        rows, cols = np.array(spec.rows) - 1, np.array(spec.cols) - 1
        width = int(cols.max()) + 1

        def value(i):
            m = haar_frame(n, width, derive_stream(seed, i))
            return float(np.prod(m[rows, cols]))

        limit = {"kind": "exact_moment", "params": {"value": float(exact), "fraction": str(exact)}}
        return _Plan(value, None, limit, None)

    coef = build_coefficient(config.coefficient, n, seed=seed)
    amat = coef.a
    offdiag = amat - np.diag(np.diagonal(amat))
    diag = np.diagonal(amat).copy() if not offdiag.any() else None

    if scenario in ("lyapunov_scaling", "variance_check"):
        power = 4 if scenario == "lyapunov_scaling" else 1

        def value(i):
            return first_increment(coef, haar_frame(n, 2, derive_stream(seed, i))) ** power

        if scenario == "variance_check":
            exact = variance_prediction(coef, n) if n >= 4 else None
            limit = {"kind": "exact_variance", "params": {"value": exact}}
        else:
            limit = {"kind": "none", "params": {}}
        return _Plan(value, coef, limit, None)

    if scenario == "uniform_perm_trace":

        def value(i):
            st = derive_stream(seed, i)
            images = uniform_permutation(n, st).images
            return _trace_value(amat, diag, haar_orthogonal(n, st), images)

        law = ld.LimitLaw.poisson_gaussian(max(-1.0, min(1.0, coef.s_n)))
        degenerate = 1.0 - coef.s_n * coef.s_n < 1e-12
        fit = _tv_fit(coef.s_n) if degenerate else _ks_fit(law)
        return _Plan(value, coef, law.to_dict(), fit)

    # cycle_trace / fixed_cycle_type: a fixed permutation
    if scenario == "cycle_trace":
        perm = canonical_permutation(CycleType((n,)))
        law = ld.LimitLaw.gaussian(max(0.0, 1.0 - coef.c_n))
    else:
        ct = CycleType(tuple(p["cycle_type"]))
        perm = canonical_permutation(ct)
        law = ld.LimitLaw.shifted_gaussian(max(0.0, 1.0 - coef.s_n**2), ct.fixed_points * coef.s_n)
    images = perm.images

    def value(i):
        return _trace_value(amat, diag, haar_orthogonal(n, derive_stream(seed, i)), images)

    return _Plan(value, coef, law.to_dict(), _ks_fit(law))


def map_replicates(value: Callable[[int], float], replicates: int, threads: int | None = None) -> np.ndarray:
    """Evaluate ``value(i)`` for every replicate, stored by index.

    BLAS is pinned to one thread so each replicate's arithmetic is the same
    whatever the number of workers.
    """
    threads = worker_count(threads)
    out = np.empty(replicates)
    with threadpool_limits(limits=1, user_api="blas"):
        if threads == 1 or replicates == 1:
            for i in range(replicates):
                out[i] = value(i)
        else:
            chunk = max(1, -(-replicates // (threads * 4)))

            def work(start):
                for i in range(start, min(replicates, start + chunk)):
                    out[i] = value(i)

            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(work, range(0, replicates, chunk)))
    return out


def simulate(config: ExperimentConfig, threads: int | None = None):
    """Run the experiment in memory; returns (summary, samples, coefficient)."""
    t0 = time.perf_counter()
    plan = _plan(config)
    samples = map_replicates(plan.value, config.replicates, threads)
    if not np.all(np.isfinite(samples)):
        raise FloatingPointError("non-finite statistic value encountered")
    fit_name, fit_value = plan.fit(samples) if plan.fit else (None, None)
    coef = plan.coefficient
    summary = EmpiricalSummary(
        scenario=config.scenario,
        scenario_params=dict(config.scenario_params),
        n=config.n,
        replicates=config.replicates,
        seed=config.seed,
        mean=float(np.mean(samples)),
        variance=float(np.var(samples, ddof=1)) if config.replicates > 1 else 0.0,
        fit=fit_name,
        fit_value=fit_value,
        limit=plan.limit,
        s_n=coef.s_n if coef is not None else None,
        c_n=coef.c_n if coef is not None else None,
        elapsed_seconds=time.perf_counter() - t0,
    )
    return summary, samples, coef


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> EmpiricalSummary:
    """Simulate and, when ``output_dir`` is set, persist the artifacts."""
    summary, samples, coef = simulate(config, threads)
    if config.output_dir is not None:
        persist(summary, samples, config.output_dir, coefficient=coef)
    return summary


def _atomic_write(path: Path, text: str) -> None:
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise PersistError(f"cannot write {path}: {exc}") from exc


def format_samples(samples: np.ndarray) -> str:
    lines = [SAMPLES_HEADER]
    lines.extend(f"{i},{v:.17g}" for i, v in enumerate(samples.tolist()))
    return "\n".join(lines) + "\n"


def read_samples(path) -> np.ndarray:
    """Values column of a samples.csv file."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read samples {path}: {exc}") from exc
    if not lines:
        raise ConfigError(f"samples file {path} is empty")
    if lines[0].strip() != SAMPLES_HEADER:
        raise ConfigError(f"samples file {path}: expected header {SAMPLES_HEADER!r}, got {lines[0]!r}")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        try:
            if len(parts) != 2:
                raise ValueError("expected two columns")
            int(parts[0])
            values.append(float(parts[1]))
        except ValueError as exc:
            raise ConfigError(f"samples file {path} line {lineno}: {exc}") from exc
    if not values:
        raise ConfigError(f"samples file {path} has no rows")
    return np.array(values)


def persist(summary: EmpiricalSummary, samples: np.ndarray, output_dir, coefficient=None) -> dict[str, Path]:
    """Write samples.csv, summary.json (and coefficient.csv) atomically."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PersistError(f"cannot create output directory {out}: {exc}") from exc
    paths = {"samples": out / "samples.csv", "summary": out / "summary.json"}
    _atomic_write(paths["samples"], format_samples(np.asarray(samples)))
    _atomic_write(paths["summary"], json.dumps(summary.to_dict(), indent=2) + "\n")
    if coefficient is not None:
        paths["coefficient"] = out / "coefficient.csv"
        write_matrix_csv(paths["coefficient"], coefficient.a)
    return paths


def load_summary(path) -> EmpiricalSummary:
    return EmpiricalSummary.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class LyapunovRow:
    n: int
    estimate: float
    stderr: float


def lyapunov_diagnostic(family, ns, replicates: int, seed: int, threads: int | None = None) -> list[LyapunovRow]:
    """Monte Carlo E[X_{n,1}^4] for the first martingale increment at each n."""
    if replicates < 1:
        raise ValueError("lyapunov diagnostic needs at least one replicate")
    ns = list(ns)
    if len(ns) < 2 or min(ns) < 4:
        raise ValueError("need at least two dimensions, each >= 4")
    rows = []
    for n in ns:
        cfg = ExperimentConfig("lyapunov_scaling", n, replicates, seed, coefficient=family)
        _, x4, _ = simulate(cfg, threads)
        se = float(np.std(x4, ddof=1) / math.sqrt(replicates)) if replicates > 1 else float("nan")
        rows.append(LyapunovRow(n, float(np.mean(x4)), se))
    return rows


@dataclass(frozen=True)
class VarianceCheck:
    n: int
    empirical: float
    exact: float
    stderr: float
    rel_gap: float

    def within(self, k: float = 3.0, floor: float = 1e-12) -> bool:
        """|empirical - exact| within k standard errors (floored for exact zeros)."""
        return abs(self.empirical - self.exact) <= max(k * self.stderr, floor)


def variance_check(family, n: int, replicates: int, seed: int, threads: int | None = None) -> VarianceCheck:
    """Empirical Var(X_{n,1}) over Haar draws against the exact prediction."""
    if n < 4:
        raise ValueError(f"variance check needs n >= 4, got {n}")
    cfg = ExperimentConfig("variance_check", n, replicates, seed, coefficient=family)
    summary, x, _ = simulate(cfg, threads)
    exact = summary.limit["params"]["value"]
    emp = summary.variance
    centered = x - x.mean()
    m4 = float(np.mean(centered**4))
    se = math.sqrt(max(m4 - emp * emp, 0.0) / replicates)
    gap = abs(emp - exact) / abs(exact) if exact else abs(emp - exact)
    return VarianceCheck(n, emp, exact, se, gap)


@dataclass(frozen=True)
class GoncharovSummary:
    n: int
    replicates: int
    mean: float
    variance: float
    stderr: float
    harmonic: float
    frac_above_2logn: float
    ks: float


def goncharov_check(n: int, replicates: int, seed: int, threads: int | None = None) -> GoncharovSummary:
    """Cycle counts K_n of uniform permutations against Goncharov's CLT."""
    cfg = ExperimentConfig("goncharov", n, replicates, seed)
    summary, k, _ = simulate(cfg, threads)
    harmonic = math.fsum(1.0 / j for j in range(1, n + 1))
    return GoncharovSummary(
        n=n,
        replicates=replicates,
        mean=summary.mean,
        variance=summary.variance,
        stderr=math.sqrt(summary.variance / replicates),
        harmonic=harmonic,
        frac_above_2logn=float(np.mean(k > 2.0 * math.log(n))),
        ks=summary.fit_value,
    )


def summary_json(summary: EmpiricalSummary) -> str:
    return json.dumps(summary.to_dict(), indent=2)

