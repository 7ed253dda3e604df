"""Quantile-based preventive-maintenance recommendations."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import Family, FamilyParams
from .errors import ConvergenceError, DomainError
from .estimation import FitResult
from .resampling import BootstrapResult

DEFAULT_U = 0.25


def round_days(days: float) -> int:
    """Nearest whole day (halves round up), never below 1."""
    return max(1, int(math.floor(days + 0.5)))


@dataclass(frozen=True)
class MaintenancePlan:
    family: Family
    params: FamilyParams
    u: float
    y_star: float
    ci: tuple[float, float] | None = None
    level: float | None = None
    replicates: int | None = None
    effective: int | None = None
    seed: int | None = None

    @property
    def y_star_days(self) -> int:
        return round_days(self.y_star)

    @property
    def ci_days(self) -> tuple[int, int] | None:
        if self.ci is None:
            return None
        return round_days(self.ci[0]), round_days(self.ci[1])

    def recommendation(self) -> str:
        text = (f"preventive maintenance in ~{self.y_star_days} days after the last failure "
                f"({self.u:.0%} failure quantile of the {self.family.value} fit, {self.y_star:.3f} days)")
        if self.ci is not None:
            text += f", {self.level:.0%} CI [{self.ci[0]:.3f}, {self.ci[1]:.3f}]"
        return text

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "params": self.params.as_dict(),
            "u": self.u,
            "y_star": self.y_star,
            "y_star_days": self.y_star_days,
            "ci": list(self.ci) if self.ci is not None else None,
            "level": self.level,
            "replicates": self.replicates,
            "effective": self.effective,
            "seed": self.seed,
            "recommendation": self.recommendation(),
        }


def predict_maintenance(fit: FitResult, u: float = DEFAULT_U, boot: BootstrapResult | None = None) -> MaintenancePlan:
    """Maintenance interval as the ``u``-quantile of the fitted lifetime law.

    The bootstrap result, when given, must come from the same family and
    quantile level; its percentile interval for ``y_star`` becomes the plan CI.
    """
    if not 0 < u < 1:
        raise DomainError("u must lie strictly inside (0, 1)")
    if not fit.converged:
        raise ConvergenceError(f"{fit.family.value} fit did not converge: {fit.message}")
    y_star = float(fit.params.quantile(u))
    if boot is None:
        return MaintenancePlan(fit.family, fit.params, u, y_star)
    if boot.family is not fit.family:
        raise ValueError(f"bootstrap family {boot.family.value} does not match fit {fit.family.value}")
    if not math.isclose(boot.u, u):
        raise ValueError(f"bootstrap quantile level {boot.u} does not match u={u}")
    stat = boot.stats["y_star"]
    return MaintenancePlan(fit.family, fit.params, u, y_star, ci=(stat.lower, stat.upper), level=boot.level,
                           replicates=boot.n_requested, effective=boot.n_effective, seed=boot.seed)
