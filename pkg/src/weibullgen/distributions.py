"""The five three-parameter Weibull generalizations.

Each family is a frozen dataclass holding its parameters and exposing
``log_pdf``, ``pdf``, ``cdf``, ``survival``, ``log_survival``, ``hazard`` and
``quantile``. Methods accept a scalar or an array of times (in days) and
return a float or an ``ndarray`` accordingly.

============  =====================  ==========================================
family        fields                 density
============  =====================  ==========================================
GG            phi, mu, alpha         alpha mu^(alpha phi) t^(alpha phi - 1)
                                     exp(-(mu t)^alpha) / Gamma(phi)
GW            lam, phi, alpha        (alpha phi)^-1 (t/phi)^(1/alpha - 1)
                                     (1 - lam (t/phi)^(1/alpha))^(1/lam - 1)
EW            sigma, phi, alpha      Weibull(sigma, alpha) cdf raised to phi
MOW           lam, alpha, gamma      Marshall-Olkin tilt alpha of a Weibull
EPW           lam, alpha, beta       extended Poisson-Weibull
============  =====================  ==========================================
"""

from __future__ import annotations

import enum
import math
from dataclasses import astuple, dataclass, fields
from typing import ClassVar

import numpy as np
from scipy import integrate

from . import special
from .errors import ConvergenceError, DomainError, ParameterError, SupportError

# Below this magnitude the GW shape lam is treated as exactly zero (Weibull).
GW_LAMBDA_ZERO = 1e-12


class Family(str, enum.Enum):
    GG = "GG"
    GW = "GW"
    EW = "EW"
    MOW = "MOW"
    EPW = "EPW"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown family {value!r}; expected one of "
                             f"{', '.join(f.value for f in cls)}") from None


def _as_times(t):
    arr = np.asarray(t, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0)):
        raise DomainError("times must be finite and strictly positive")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _check_u(u):
    arr = np.asarray(u, dtype=float)
    if np.any(~(arr > 0)) or np.any(~(arr < 1)):
        raise DomainError("quantile level must lie strictly inside (0, 1)")
    return arr


def _log_abs_expm1(x):
    """log|exp(x) - 1|, stable for large |x|."""
    x = np.asarray(x, dtype=float)
    big = x > 30.0
    with np.errstate(divide="ignore"):
        return np.where(big, x + np.log1p(-np.exp(-np.where(big, x, 30.0))),
                        np.log(np.abs(np.expm1(np.where(big, 0.0, x)))))


@dataclass(frozen=True)
class FamilyParams:
    """Common behaviour of the five families; not instantiated directly."""

    family: ClassVar[Family]
    positive: ClassVar[tuple[str, ...]] = ()

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise ParameterError(f"{self.family.value}: {f.name} must be a finite real, got {value!r}")
            object.__setattr__(self, f.name, float(value))
        for name in self.positive:
            if getattr(self, name) <= 0:
                raise ParameterError(f"{self.family.value}: {name} must be > 0, got {getattr(self, name)}")

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names(), astuple(self)))

    @property
    def upper_bound(self) -> float:
        """Right end of the support (infinite unless overridden)."""
        return math.inf

    def _times(self, t):
        arr = _as_times(t)
        if np.any(arr > self.upper_bound):
            raise SupportError(f"{self.family.value}: time beyond support bound {self.upper_bound:g}")
        return arr

    # Family-specific kernels operate on validated float arrays.
    def _log_pdf(self, t): raise NotImplementedError
    def _log_sf(self, t): raise NotImplementedError
    def _cdf(self, t): raise NotImplementedError
    def _quantile(self, u): raise NotImplementedError

    def log_pdf(self, t):
        arr = self._times(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _out(self._log_pdf(arr), t)

    def pdf(self, t):
        arr = self._times(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _out(np.exp(self._log_pdf(arr)), t)

    def cdf(self, t):
        arr = self._times(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _out(np.clip(self._cdf(arr), 0.0, 1.0), t)

    def log_survival(self, t):
        arr = self._times(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _out(self._log_sf(arr), t)

    def survival(self, t):
        arr = self._times(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _out(np.clip(np.exp(self._log_sf(arr)), 0.0, 1.0), t)

    def hazard(self, t):
        arr = self._times(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            log_sf = self._log_sf(arr)
            if np.any(~np.isfinite(log_sf)):
                raise DomainError(f"{self.family.value}: survival underflows to zero; hazard undefined")
            return _out(np.exp(self._log_pdf(arr) - log_sf), t)

    def quantile(self, u):
        arr = _check_u(u)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _out(self._quantile(arr), u)

    def rvs(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw by quantile inversion of uniforms from ``rng``."""
        u = rng.uniform(size=size)
        u = np.clip(u, 1e-300, 1 - 1e-16)
        return np.asarray(self.quantile(u), dtype=float)


@dataclass(frozen=True)
class GGParams(FamilyParams):
    """Generalized gamma: shape ``phi``, rate ``mu`` (1/days), power ``alpha``."""

    phi: float
    mu: float
    alpha: float
    family: ClassVar[Family] = Family.GG
    positive: ClassVar[tuple[str, ...]] = ("phi", "mu", "alpha")

    def _power(self, t):
        return np.exp(self.alpha * np.log(self.mu * t))

    def _log_pdf(self, t):
        a, phi = self.alpha, self.phi
        return (math.log(a) - math.lgamma(phi) + a * phi * math.log(self.mu)
                + (a * phi - 1.0) * np.log(t) - self._power(t))

    def _cdf(self, t):
        x = np.atleast_1d(self._power(t))
        out = np.array([special.reg_lower_incomplete_gamma(self.phi, xi) for xi in x.ravel()])
        return out.reshape(np.shape(t))

    def _log_sf(self, t):
        x = np.atleast_1d(self._power(t))
        out = np.array([special.reg_upper_incomplete_gamma(self.phi, xi) for xi in x.ravel()])
        with np.errstate(divide="ignore"):
            return np.log(out).reshape(np.shape(t))

    def _quantile(self, u):
        flat = np.atleast_1d(u).ravel()
        x = np.array([_gamma_inverse(self.phi, ui) for ui in flat]).reshape(np.shape(u))
        return np.exp(np.log(x) / self.alpha) / self.mu


def _gamma_inverse(a: float, u: float) -> float:
    """Solve P(a, x) = u for x by bracketed Newton iteration."""
    upper = u > 0.5
    target = 1.0 - u if upper else u

    def resid(x):
        if upper:
            return target - special.reg_upper_incomplete_gamma(a, x)
        return special.reg_lower_incomplete_gamma(a, x) - target

    lo, hi = 0.0, max(1.0, a)
    while resid(hi) < 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ConvergenceError(f"cannot bracket gamma quantile (a={a}, u={u})")
    x = 0.5 * (lo + hi)
    log_gamma_a = math.lgamma(a)
    for _ in range(200):
        r = resid(x)
        if r == 0.0:
            return x
        if r < 0.0:
            lo = x
        else:
            hi = x
        dens = math.exp((a - 1.0) * math.log(x) - x - log_gamma_a) if x > 0 else 0.0
        step = r / dens if dens > 0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * x or hi - lo <= 1e-15 * hi:
            return x_new
        x = x_new
    raise ConvergenceError(f"gamma quantile did not converge (a={a}, u={u})")


@dataclass(frozen=True)
class GWParams(FamilyParams):
    """Generalized Weibull: real shape ``lam``, scale ``phi`` (days), power ``alpha``.

    For ``lam > 0`` the support is ``(0, phi * lam**-alpha)``; ``|lam| < 1e-12``
    is evaluated on the exact Weibull branch.
    """

    lam: float
    phi: float
    alpha: float
    family: ClassVar[Family] = Family.GW
    positive: ClassVar[tuple[str, ...]] = ("phi", "alpha")

    @property
    def is_weibull(self) -> bool:
        return abs(self.lam) < GW_LAMBDA_ZERO

    @property
    def upper_bound(self) -> float:
        if self.lam > 0 and not self.is_weibull:
            return math.exp(math.log(self.phi) - self.alpha * math.log(self.lam))
        return math.inf

    def _z(self, t):
        return np.exp(np.log(t / self.phi) / self.alpha)

    def _log_pdf(self, t):
        base = -math.log(self.alpha * self.phi) + (1.0 / self.alpha - 1.0) * np.log(t / self.phi)
        z = self._z(t)
        if self.is_weibull:
            return base - z
        return base + (1.0 / self.lam - 1.0) * np.log1p(-self.lam * z)

    def _log_sf(self, t):
        z = self._z(t)
        if self.is_weibull:
            return -z
        return np.log1p(-self.lam * z) / self.lam

    def _cdf(self, t):
        return -np.expm1(self._log_sf(t))

    def _quantile(self, u):
        if self.is_weibull:
            core = -np.log1p(-u)
        else:
            core = -np.expm1(self.lam * np.log1p(-u)) / self.lam
        return self.phi * core ** self.alpha


@dataclass(frozen=True)
class EWParams(FamilyParams):
    """Exponentiated Weibull: scale ``sigma`` (days), exponent ``phi``, shape ``alpha``."""

    sigma: float
    phi: float
    alpha: float
    family: ClassVar[Family] = Family.EW
    positive: ClassVar[tuple[str, ...]] = ("sigma", "phi", "alpha")

    def _z(self, t):
        return np.exp(self.alpha * np.log(t / self.sigma))

    def _log_base_cdf(self, z):
        return np.log(-np.expm1(-z))

    def _log_pdf(self, t):
        z = self._z(t)
        return (math.log(self.alpha * self.phi / self.sigma) + (self.alpha - 1.0) * np.log(t / self.sigma)
                - z + (self.phi - 1.0) * self._log_base_cdf(z))

    def _log_cdf(self, t):
        return self.phi * self._log_base_cdf(self._z(t))

    def _cdf(self, t):
        return np.exp(self._log_cdf(t))

    def _log_sf(self, t):
        return np.log(-np.expm1(self._log_cdf(t)))

    def _quantile(self, u):
        return self.sigma * (-np.log1p(-u ** (1.0 / self.phi))) ** (1.0 / self.alpha)


@dataclass(frozen=True)
class MOWParams(FamilyParams):
    """Marshall-Olkin Weibull: rate ``lam``, tilt ``alpha``, Weibull shape ``gamma``."""

    lam: float
    alpha: float
    gamma: float
    family: ClassVar[Family] = Family.MOW
    positive: ClassVar[tuple[str, ...]] = ("lam", "alpha", "gamma")

    def _s(self, t):
        return self.lam * np.exp(self.gamma * np.log(t))

    def _log_denominator(self, s):
        # log(1 - (1 - alpha) e^-s)
        return np.log1p(-(1.0 - self.alpha) * np.exp(-s))

    def _log_pdf(self, t):
        s = self._s(t)
        return (math.log(self.alpha * self.gamma * self.lam) + (self.gamma - 1.0) * np.log(t)
                - s - 2.0 * self._log_denominator(s))

    def _log_sf(self, t):
        s = self._s(t)
        return math.log(self.alpha) - s - self._log_denominator(s)

    def _cdf(self, t):
        s = self._s(t)
        return -np.expm1(-s) / np.exp(self._log_denominator(s))

    def _quantile(self, u):
        core = np.log1p(self.alpha * u / (1.0 - u)) / self.lam
        return core ** (1.0 / self.gamma)


def _epw_log_norm(lam: float) -> float:
    """log(lam / (1 - e^-lam)), continuous through lam = 0."""
    if lam == 0.0:
        return 0.0
    if lam > 0:
        return math.log(lam / -math.expm1(-lam))
    return lam + math.log(lam / math.expm1(lam))


@dataclass(frozen=True)
class EPWParams(FamilyParams):
    """Extended Poisson-Weibull: nonzero real ``lam``, shape ``alpha``, rate ``beta``."""

    lam: float
    alpha: float
    beta: float
    family: ClassVar[Family] = Family.EPW
    positive: ClassVar[tuple[str, ...]] = ("alpha", "beta")

    def __post_init__(self):
        super().__post_init__()
        if self.lam == 0.0:
            raise ParameterError("EPW: lam must be nonzero")

    def _s(self, t):
        return self.beta * np.exp(self.alpha * np.log(t))

    def _log_pdf(self, t):
        s = self._s(t)
        return (math.log(self.alpha * self.beta) + _epw_log_norm(self.lam)
                + (self.alpha - 1.0) * np.log(t) - s - self.lam * np.exp(-s))

    def _log_sf(self, t):
        # S = expm1(-lam w) / expm1(-lam), w = e^-s
        w = np.exp(-self._s(t))
        return _log_abs_expm1(-self.lam * w) - float(_log_abs_expm1(-self.lam))

    def _cdf(self, t):
        # F = e^{-lam w} expm1(-lam (1 - w)) / expm1(-lam)
        s = self._s(t)
        w = np.exp(-s)
        one_minus_w = -np.expm1(-s)
        log_f = -self.lam * w + _log_abs_expm1(-self.lam * one_minus_w) - float(_log_abs_expm1(-self.lam))
        return np.exp(log_f)

    def _quantile(self, u):
        lam = self.lam
        if lam > 0:
            log_term = lam + np.log(u + (1.0 - u) * math.exp(-lam))
        else:
            log_term = np.log1p(u * math.expm1(lam))
        s = -np.log1p(-log_term / lam)
        return (s / self.beta) ** (1.0 / self.alpha)


PARAM_CLASSES: dict[Family, type[FamilyParams]] = {
    Family.GG: GGParams,
    Family.GW: GWParams,
    Family.EW: EWParams,
    Family.MOW: MOWParams,
    Family.EPW: EPWParams,
}


def params_class(family) -> type[FamilyParams]:
    return PARAM_CLASSES[Family.parse(family)]


def make_params(family, values) -> FamilyParams:
    """Build the parameter object of ``family`` from a sequence in field order."""
    return params_class(family)(*[float(v) for v in values])


# Functional surface mirroring the methods.

def pdf(params: FamilyParams, t):
    return params.pdf(t)


def log_pdf(params: FamilyParams, t):
    return params.log_pdf(t)


def cdf(params: FamilyParams, t):
    return params.cdf(t)


def survival(params: FamilyParams, t):
    return params.survival(t)


def hazard(params: FamilyParams, t):
    return params.hazard(t)


def quantile(params: FamilyParams, u):
    return params.quantile(u)


def gg_mean_variance(params: GGParams) -> tuple[float, float]:
    """Closed-form mean and variance of the generalized gamma."""
    phi, mu, alpha = params.phi, params.mu, params.alpha
    lg = math.lgamma(phi)
    try:
        r1 = math.exp(math.lgamma(phi + 1.0 / alpha) - lg)
        r2 = math.exp(math.lgamma(phi + 2.0 / alpha) - lg)
    except OverflowError as exc:
        raise OverflowError(f"GG moments overflow for {params}") from exc
    mean = r1 / mu
    var = (r2 - r1 * r1) / (mu * mu)
    return mean, var


def ew_kth_moment(params: EWParams, k: int) -> float:
    """E[T^k] for the exponentiated Weibull by quadrature of Q(u)^k on (0, 1)."""
    if int(k) != k or k < 1:
        raise DomainError(f"moment order must be a positive integer, got {k!r}")

    def integrand(u):
        return float(params.quantile(u)) ** k

    total, err = 0.0, 0.0
    for lo, hi in ((0.0, 0.5), (0.5, 1.0)):
        val, e = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
        total += val
        err += e
    if not math.isfinite(total) or err > 1e-8 * max(1.0, abs(total)):
        raise ConvergenceError(f"EW moment quadrature error {err:.3g} exceeds tolerance")
    return total


def ew_kth_moment_series(params: EWParams, k: int, max_terms: int = 10_000) -> tuple[float, float]:
    """Series form of the EW k-th moment.

    ``phi sigma^k Gamma(k/alpha + 1) sum_{i>=0} a_i (i + 1)^-(k/alpha + 1)`` with
    ``a_0 = 1`` and ``a_i = (-1)^i (phi-1)(phi-2)...(phi-i) / i!``.

    Returns ``(value, bound)`` where ``bound`` caps the neglected tail: once
    ``i > phi`` the |a_i| are nonincreasing, so the tail is at most
    ``|a_N| * N^(1-s) / (s-1)`` with ``s = k/alpha + 1``.
    """
    phi, sigma, alpha = params.phi, params.sigma, params.alpha
    s = k / alpha + 1.0
    a = 1.0
    total = 1.0
    n_used = max_terms
    for i in range(1, max_terms + 1):
        a *= -(phi - i) / i
        term = a * (i + 1) ** (-s)
        total += term
        if a == 0.0:
            n_used = i
            break
    if a == 0.0:
        bound = 0.0
    else:
        bound = abs(a) * n_used ** (1.0 - s) / (s - 1.0) if n_used > phi else math.inf
    scale = phi * sigma ** k * math.gamma(s)
    return scale * total, scale * bound
