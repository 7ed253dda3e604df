"""TTT transform, Kolmogorov-Smirnov test, AIC/AICc and model ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .distributions import Family, FamilyParams
from .errors import DegenerateSampleError, DomainError, NoAdmissibleModelError
from .estimation import FitResult, Sample, as_sample

KS_ALPHA = 0.05


@dataclass(frozen=True)
class TttCurve:
    r_over_n: np.ndarray
    g: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.r_over_n.tolist(), self.g.tolist()))

    def __len__(self):
        return int(self.r_over_n.size)


def ttt_transform(sample) -> TttCurve:
    """Scaled total-time-on-test curve of the order statistics.

    ``G(r/n) = (t_(1) + ... + t_(r) + (n - r) t_(r)) / sum(t)`` for r = 1..n.
    """
    t = as_sample(sample).sorted
    n = t.size
    total = float(t.sum())
    if not total > 0:
        raise DegenerateSampleError("total time on test is zero")
    r = np.arange(1, n + 1)
    g = (np.cumsum(t) + (n - r) * t) / total
    g[-1] = 1.0
    return TttCurve(r_over_n=r / n, g=g)


def diagnose_ttt_shape(curve: TttCurve, band: float | None = None) -> str:
    """Read the hazard shape off the sign pattern of ``G - diagonal``.

    Points within ``band`` of the diagonal (default 1.36/sqrt(n)) count as
    on it. Returns one of "approximately constant", "concave", "convex",
    "bathtub", "inverse bathtub" or "irregular".
    """
    n = len(curve)
    if band is None:
        band = 1.36 / math.sqrt(n)
    diff = curve.g - curve.r_over_n
    signs = []
    for d in diff:
        s = 1 if d > band else -1 if d < -band else 0
        if s and (not signs or signs[-1] != s):
            signs.append(s)
    if not signs:
        return "approximately constant"
    return {
        (1,): "concave",
        (-1,): "convex",
        (-1, 1): "bathtub",
        (1, -1): "inverse bathtub",
    }.get(tuple(signs), "irregular")


HAZARD_READING = {
    "approximately constant": "constant hazard",
    "concave": "increasing hazard",
    "convex": "decreasing hazard",
    "bathtub": "bathtub-shaped hazard",
    "inverse bathtub": "unimodal (upside-down bathtub) hazard",
    "irregular": "no single monotone or bathtub pattern",
}


def ks_statistic(sample, model: FamilyParams | Callable) -> float:
    """Kolmogorov-Smirnov distance between the sample EDF and a model CDF.

    ``model`` is a parameter object or any callable CDF. Ties are handled by
    evaluating at the distinct values with cumulative counts.
    """
    t = as_sample(sample).sorted
    n = t.size
    cdf = model.cdf if isinstance(model, FamilyParams) else model
    values, counts = np.unique(t, return_counts=True)
    upper = np.cumsum(counts) / n
    lower = upper - counts / n
    f = np.asarray([cdf(v) for v in values], dtype=float)
    d = np.max(np.maximum(np.abs(upper - f), np.abs(lower - f)))
    return float(min(1.0, d))


def kolmogorov_sf(x: float) -> float:
    """Survival function of the limiting Kolmogorov distribution."""
    if x <= 0:
        return 1.0
    if x < 1.18:
        # Jacobi-theta form, fast for small x.
        total = 0.0
        j = 1
        while True:
            term = math.exp(-((2 * j - 1) ** 2) * math.pi ** 2 / (8 * x * x))
            total += term
            if term < 1e-10 * max(total, 1e-300) or j > 1000:
                break
            j += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2 * math.pi) / x * total))
    total = 0.0
    sign = 1.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * x * x)
        total += sign * term
        if term < 1e-10:
            break
        sign = -sign
        j += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_pvalue(d: float, n: int) -> float:
    """Asymptotic KS p-value with the (sqrt(n) + 0.12 + 0.11/sqrt(n)) argument."""
    if not 0.0 <= d <= 1.0:
        raise DomainError(f"KS distance must lie in [0, 1], got {d}")
    if n < 1:
        raise DomainError("n must be >= 1")
    en = math.sqrt(n)
    return kolmogorov_sf((en + 0.12 + 0.11 / en) * d)


def aic(loglik: float, k: int) -> float:
    if k < 1:
        raise DomainError("k must be >= 1")
    return -2.0 * loglik + 2.0 * k


def aicc(aic_value: float, k: int, n: int) -> float:
    if n <= k + 1:
        raise DomainError(f"AICc needs n > k + 1 (n={n}, k={k})")
    return aic_value + 2.0 * k * (k + 1) / (n - k - 1)


@dataclass(frozen=True)
class GofResult:
    family: Family
    ks_stat: float
    ks_pvalue: float
    aic: float
    aicc: float
    k: int
    n: int
    loglik: float = math.nan
    score_residual: float = 0.0
    converged: bool = True

    @property
    def admissible(self) -> bool:
        return self.ks_pvalue >= KS_ALPHA

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "loglik": self.loglik,
            "k": self.k,
            "n": self.n,
            "aic": self.aic,
            "aicc": self.aicc,
            "ks_d": self.ks_stat,
            "ks_p": self.ks_pvalue,
            "admissible": self.admissible,
            "converged": self.converged,
        }


def goodness_of_fit(fit: FitResult, sample) -> GofResult:
    sample = as_sample(sample)
    d = ks_statistic(sample, fit.params)
    a = aic(fit.loglik, fit.k)
    return GofResult(
        family=fit.family, ks_stat=d, ks_pvalue=ks_pvalue(d, sample.n), aic=a,
        aicc=aicc(a, fit.k, sample.n), k=fit.k, n=sample.n, loglik=fit.loglik,
        score_residual=fit.score_residual, converged=fit.converged,
    )


@dataclass
class SelectionReport:
    results: dict[Family, GofResult]
    ranking: list[Family]
    best: Family
    admissible: dict[Family, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ranking": [f.value for f in self.ranking],
            "best": self.best.value,
            "results": [self.results[f].to_dict() for f in self.ranking],
        }


def _rank_key(g: GofResult):
    return (g.aicc, g.aic, abs(g.score_residual), g.family.value)


def select_best(results: Mapping[Family, GofResult] | list[GofResult]) -> SelectionReport:
    """Rank by AICc then AIC; the best is the top-ranked KS-admissible family.

    Fits that failed the convergence check stay in the ranking but are never
    chosen as the best.
    """
    if not isinstance(results, Mapping):
        results = {g.family: g for g in results}
    results = {Family.parse(k): v for k, v in results.items()}
    if not results:
        raise NoAdmissibleModelError("no candidate families supplied")
    ordered = sorted(results.values(), key=_rank_key)
    ranking = [g.family for g in ordered]
    admissible = {g.family: g.admissible for g in ordered}
    winners = [g for g in ordered if g.admissible and g.converged]
    if not winners:
        raise NoAdmissibleModelError("no converged family passes the KS test at the 5% level")
    return SelectionReport(results=dict(results), ranking=ranking, best=winners[0].family, admissible=admissible)
