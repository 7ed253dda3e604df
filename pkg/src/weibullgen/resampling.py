"""Seeded nonparametric bootstrap of fitted parameters and the u-quantile.

Random streams come from NumPy's Philox4x64 counter-based generator. Each
replicate ``b`` draws from its own stream keyed by ``SeedSequence(seed,
spawn_key=(b,))``, so results do not depend on execution order and
replicates can run in worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import Family
from .errors import ConvergenceError, DegenerateSampleError, WeibullGenError
from .estimation import FitResult, OptimizerConfig, Sample, as_sample, fit_mle


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    seed: int = 0
    level: float = 0.95
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 100:
            raise ValueError("replicates must be >= 100")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class BootstrapStat:
    point: float
    lower: float
    upper: float
    sd: float
    n_effective: int

    def to_dict(self) -> dict:
        return {"point": self.point, "lower": self.lower, "upper": self.upper,
                "sd": self.sd, "n_effective": self.n_effective}


@dataclass
class BootstrapResult:
    family: Family
    stats: dict[str, BootstrapStat]
    replicates: np.ndarray  # (n_effective, n_stats), rows in replicate order
    n_requested: int
    n_failed: int
    seed: int
    level: float
    u: float
    names: list[str] = field(default_factory=list)

    @property
    def n_effective(self) -> int:
        return self.n_requested - self.n_failed

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "replicates": self.n_requested,
            "effective": self.n_effective,
            "failed": self.n_failed,
            "seed": self.seed,
            "level": self.level,
            "u": self.u,
            "stats": {k: v.to_dict() for k, v in self.stats.items()},
        }


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for bootstrap replicate ``index`` under master ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def resample_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` indices drawn uniformly with replacement from ``[0, n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.integers(0, n, size=n)


def _refit_stats(family: Family, values: np.ndarray, start, u: float, optimizer: OptimizerConfig):
    try:
        fit = fit_mle(family, Sample(values), optimizer, starts=[start])
    except (DegenerateSampleError, ConvergenceError):
        return None
    if not fit.converged:
        return None
    try:
        y = float(fit.params.quantile(u))
    except WeibullGenError:
        return None
    row = np.append(fit.params.as_array(), y)
    return row if np.all(np.isfinite(row)) else None


def _replicate(args):
    family, values, start, u, optimizer, seed, index = args
    rng = replicate_rng(seed, index)
    idx = resample_indices(values.size, rng)
    return _refit_stats(family, values[idx], start, u, optimizer)


def bootstrap_fit(family, sample, config: BootstrapConfig | None = None, *, base_fit: FitResult | None = None,
                  u: float = 0.25, optimizer: OptimizerConfig | None = None) -> BootstrapResult:
    """Percentile bootstrap for the MLEs and the ``u``-quantile.

    Each resample is refit from the base MLE as the only start. Refits that
    fail or do not converge are dropped and counted; fewer than 80% usable
    replicates raises ``ConvergenceError``.
    """
    family = Family.parse(family)
    sample = as_sample(sample)
    config = config or BootstrapConfig()
    if base_fit is None:
        base_fit = fit_mle(family, sample)
    if not base_fit.converged:
        raise ConvergenceError(f"{family.value}: base fit did not converge; bootstrap needs a converged fit")
    refit_config = optimizer or OptimizerConfig(n_starts=1)
    start = base_fit.params.as_array()
    jobs = [(family, sample.values, start, u, refit_config, config.seed, b) for b in range(config.replicates)]
    workers = min(config.workers, os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_replicate, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_replicate(job) for job in jobs]

    good = [r for r in rows if r is not None]
    n_failed = config.replicates - len(good)
    if len(good) < 0.8 * config.replicates:
        raise ConvergenceError(f"only {len(good)} of {config.replicates} bootstrap refits converged")
    reps = np.vstack(good)
    names = list(base_fit.params.names()) + ["y_star"]
    points = np.append(base_fit.params.as_array(), float(base_fit.params.quantile(u)))
    tail = (1.0 - config.level) / 2.0
    lower = np.quantile(reps, tail, axis=0)
    upper = np.quantile(reps, 1.0 - tail, axis=0)
    if not np.all(lower < upper):
        raise ConvergenceError("bootstrap distribution is degenerate (an interval has zero width)")
    sd = reps.std(axis=0, ddof=1)
    stats = {
        nm: BootstrapStat(float(p), float(lo), float(hi), float(s), len(good))
        for nm, p, lo, hi, s in zip(names, points, lower, upper, sd)
    }
    return BootstrapResult(family=family, stats=stats, replicates=reps, n_requested=config.replicates,
                           n_failed=n_failed, seed=config.seed, level=config.level, u=u, names=names)


def percentile_interval(values, level: float) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(values, [tail, 1.0 - tail])
    return float(lo), float(hi)


def interval_width(result: BootstrapResult, name: str = "y_star") -> float:
    s = result.stats[name]
    return s.upper - s.lower if math.isfinite(s.upper - s.lower) else math.inf
