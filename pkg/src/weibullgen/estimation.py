"""Maximum-likelihood estimation for the five families.

Fits maximize the log-likelihood with a multi-start Nelder-Mead simplex
search in transformed coordinates (log for positive parameters, identity
for the real-valued ``lam`` of GW and EPW). A fit is declared converged only
when the score at the optimum is near zero and the observed information is
positive semidefinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import special
from .distributions import Family, FamilyParams, GGParams, make_params, params_class
from .errors import (
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    ParameterError,
    SingularInformationError,
    SupportError,
)

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class Sample:
    """Validated positive lifetimes (days)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).ravel()
        if arr.size == 0:
            raise DomainError("sample is empty")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("lifetimes must be finite and strictly positive")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def sorted(self) -> np.ndarray:
        out = np.sort(self.values)
        out.setflags(write=False)
        return out

    def summary(self) -> dict[str, float]:
        v = self.values
        return {"n": self.n, "min": float(v.min()), "max": float(v.max()), "mean": float(v.mean())}

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, Sample) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


def as_sample(data) -> Sample:
    return data if isinstance(data, Sample) else Sample(data)


@dataclass(frozen=True)
class OptimizerConfig:
    max_iter: int = 4000
    tol: float = 1e-8
    n_starts: int = 8
    seed: int = 20180101

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass
class FitResult:
    family: Family
    params: FamilyParams
    loglik: float
    n: int
    score_residual: float
    observed_info: np.ndarray
    std_errors: np.ndarray
    wald_ci_95: list[tuple[float, float]]
    converged: bool
    n_restarts_used: int
    message: str = ""
    score: np.ndarray = field(default_factory=lambda: np.full(3, np.nan))

    @property
    def k(self) -> int:
        return len(self.params.names())

    def to_dict(self) -> dict:
        names = self.params.names()
        return {
            "family": self.family.value,
            "params": self.params.as_dict(),
            "loglik": self.loglik,
            "n": self.n,
            "std_errors": dict(zip(names, _floats(self.std_errors))),
            "wald_ci_95": {nm: list(ci) for nm, ci in zip(names, self.wald_ci_95)},
            "observed_info": [_floats(row) for row in self.observed_info],
            "score": dict(zip(names, _floats(self.score))),
            "score_residual": self.score_residual,
            "converged": self.converged,
            "n_restarts_used": self.n_restarts_used,
            "message": self.message,
        }


def _floats(values) -> list:
    return [None if not math.isfinite(v) else float(v) for v in np.asarray(values, dtype=float)]


# ---------------------------------------------------------------------------
# Closed-form log-likelihoods (natural parameters, arrays t and log t).
# These are the expanded sums; ``log_likelihood`` is the sum of log_pdf and
# the two are cross-checked in the tests.

def _ll_gg(theta, t, log_t):
    phi, mu, alpha = theta
    if min(phi, mu, alpha) <= 0:
        return -math.inf
    n = t.size
    power = np.exp(alpha * (math.log(mu) + log_t))
    return (n * math.log(alpha) - n * math.lgamma(phi) + n * alpha * phi * math.log(mu)
            + (alpha * phi - 1.0) * log_t.sum() - power.sum())


def _ll_gw(theta, t, log_t):
    lam, phi, alpha = theta
    if phi <= 0 or alpha <= 0:
        return -math.inf
    n = t.size
    log_ratio = log_t - math.log(phi)
    z = np.exp(log_ratio / alpha)
    base = (1.0 / alpha - 1.0) * log_ratio.sum() - n * math.log(alpha * phi)
    if abs(lam) < 1e-12:
        return base - z.sum()
    inner = 1.0 - lam * z
    if np.any(inner <= 0):
        return -math.inf
    return (1.0 / lam - 1.0) * np.log(inner).sum() + base


def _ll_ew(theta, t, log_t):
    sigma, phi, alpha = theta
    if min(sigma, phi, alpha) <= 0:
        return -math.inf
    n = t.size
    log_ratio = log_t - math.log(sigma)
    z = np.exp(alpha * log_ratio)
    return (n * math.log(alpha * phi) - n * alpha * math.log(sigma) + (alpha - 1.0) * log_t.sum()
            - z.sum() + (phi - 1.0) * np.log(-np.expm1(-z)).sum())


def _ll_mow(theta, t, log_t):
    lam, alpha, gamma = theta
    if min(lam, alpha, gamma) <= 0:
        return -math.inf
    n = t.size
    s = lam * np.exp(gamma * log_t)
    return (n * math.log(alpha) + n * math.log(gamma) + n * math.log(lam) + (gamma - 1.0) * log_t.sum()
            - s.sum() - 2.0 * np.log1p(-(1.0 - alpha) * np.exp(-s)).sum())


def _ll_epw(theta, t, log_t):
    from .distributions import _epw_log_norm

    lam, alpha, beta = theta
    if alpha <= 0 or beta <= 0:
        return -math.inf
    n = t.size
    s = beta * np.exp(alpha * log_t)
    return (n * (math.log(alpha * beta) + _epw_log_norm(lam)) + (alpha - 1.0) * log_t.sum()
            - s.sum() - lam * np.exp(-s).sum())


_LOGLIK: dict[Family, Callable] = {
    Family.GG: _ll_gg,
    Family.GW: _ll_gw,
    Family.EW: _ll_ew,
    Family.MOW: _ll_mow,
    Family.EPW: _ll_epw,
}

# Coordinates left untransformed during optimization.
_IDENTITY_COORDS = {Family.GW: (0,), Family.EPW: (0,)}


def _check_params(family: Family, params: FamilyParams) -> FamilyParams:
    if params.family is not family:
        raise ParameterError(f"expected {family.value} parameters, got {params.family.value}")
    return params


def log_likelihood(family, params: FamilyParams, sample) -> float:
    """Sum of log densities of ``sample`` under ``params``."""
    family = Family.parse(family)
    _check_params(family, params)
    sample = as_sample(sample)
    if sample.values.max() > params.upper_bound:
        raise SupportError(f"{family.value}: observation {sample.values.max():g} beyond support "
                           f"bound {params.upper_bound:g}")
    return float(np.sum(params.log_pdf(sample.values)))


def _loglik_fast(family: Family, theta, sample: Sample) -> float:
    t = sample.values
    with np.errstate(all="ignore"):
        value = _LOGLIK[family](tuple(float(x) for x in theta), t, np.log(t))
    return value if np.isfinite(value) else -math.inf


# ---------------------------------------------------------------------------
# Score vectors

def _score_gg(theta, t, log_t):
    phi, mu, alpha = theta
    n = t.size
    log_mu_t = math.log(mu) + log_t
    power = np.exp(alpha * log_mu_t)
    d_phi = -n * special.digamma(phi) + n * alpha * math.log(mu) + alpha * log_t.sum()
    d_mu = n * alpha * phi / mu - alpha / mu * power.sum()
    d_alpha = n / alpha + phi * log_mu_t.sum() - (power * log_mu_t).sum()
    return np.array([d_phi, d_mu, d_alpha])


def _score_ew(theta, t, log_t):
    sigma, phi, alpha = theta
    n = t.size
    log_ratio = log_t - math.log(sigma)
    z = np.exp(alpha * log_ratio)
    weight = z / np.expm1(z)  # z e^-z / (1 - e^-z)
    d_sigma = (alpha / sigma) * (-n + z.sum() - (phi - 1.0) * weight.sum())
    d_phi = n / phi + np.log(-np.expm1(-z)).sum()
    d_alpha = (n / alpha + log_ratio.sum() - (z * log_ratio).sum()
               + (phi - 1.0) * (weight * log_ratio).sum())
    return np.array([d_sigma, d_phi, d_alpha])


def _score_mow(theta, t, log_t):
    lam, alpha, gamma = theta
    n = t.size
    t_gamma = np.exp(gamma * log_t)
    e = np.exp(-lam * t_gamma)
    denom = 1.0 - (1.0 - alpha) * e
    d_lam = n / lam - t_gamma.sum() - 2.0 * (1.0 - alpha) * (t_gamma * e / denom).sum()
    d_alpha = n / alpha - 2.0 * (e / denom).sum()
    d_gamma = (n / gamma + log_t.sum() - lam * (t_gamma * log_t).sum()
               - 2.0 * (1.0 - alpha) * lam * (t_gamma * log_t * e / denom).sum())
    return np.array([d_lam, d_alpha, d_gamma])


def _score_epw(theta, t, log_t):
    lam, alpha, beta = theta
    n = t.size
    t_alpha = np.exp(alpha * log_t)
    w = np.exp(-beta * t_alpha)
    # n/lam + n/(1 - e^lam), written to stay finite near lam = 0
    if abs(lam) < 1e-6:
        norm_term = n * (0.5 - lam / 12.0)
    else:
        norm_term = n / lam - n / math.expm1(lam)
    d_lam = norm_term - w.sum()
    d_alpha = (n / alpha + log_t.sum() - beta * (t_alpha * log_t).sum()
               + beta * lam * (t_alpha * log_t * w).sum())
    d_beta = n / beta - t_alpha.sum() + lam * (t_alpha * w).sum()
    return np.array([d_lam, d_alpha, d_beta])


_SCORES: dict[Family, Callable] = {
    Family.GG: _score_gg,
    Family.EW: _score_ew,
    Family.MOW: _score_mow,
    Family.EPW: _score_epw,
}


def _fd_step(theta, family: Family | None = None) -> np.ndarray:
    """Central-difference steps: max(1e-5, 1e-5 |theta|), capped at 1% of
    strictly positive parameters so tiny scales stay inside the domain."""
    theta = np.abs(np.asarray(theta, dtype=float))
    h = np.maximum(1e-5, 1e-5 * theta)
    ident = _IDENTITY_COORDS.get(family, ()) if family is not None else ()
    for j in range(theta.size):
        if j not in ident and theta[j] > 0:
            h[j] = min(h[j], 0.01 * theta[j])
    return h


def numerical_score(family, params: FamilyParams, sample) -> np.ndarray:
    """Central finite-difference gradient of the log-likelihood."""
    family = Family.parse(family)
    sample = as_sample(sample)
    theta = params.as_array()
    h = _fd_step(theta, family)
    grad = np.empty(theta.size)
    for j in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[j] += h[j]
        down[j] -= h[j]
        grad[j] = (_loglik_fast(family, up, sample) - _loglik_fast(family, down, sample)) / (2 * h[j])
    return grad


def score(family, params: FamilyParams, sample) -> np.ndarray:
    """Gradient of the log-likelihood in the natural parameter order.

    Analytic for GG, EW, MOW and EPW; central finite differences for GW.
    """
    family = Family.parse(family)
    _check_params(family, params)
    sample = as_sample(sample)
    if sample.values.max() > params.upper_bound:
        raise SupportError(f"{family.value}: sample outside support")
    if family is Family.GW:
        return numerical_score(family, params, sample)
    t = sample.values
    with np.errstate(all="ignore"):
        return _SCORES[family](tuple(params.as_array()), t, np.log(t))


# ---------------------------------------------------------------------------
# Information matrices

def observed_information(family, params: FamilyParams, sample) -> np.ndarray:
    """Negative Hessian of the log-likelihood by central differences."""
    family = Family.parse(family)
    sample = as_sample(sample)
    theta = params.as_array()
    h = _fd_step(theta, family)
    k = theta.size

    def ll(shift):
        return _loglik_fast(family, theta + shift, sample)

    f0 = ll(np.zeros(k))
    hess = np.empty((k, k))
    with np.errstate(invalid="ignore"):
        _fill_hessian(ll, f0, h, hess)
    info = -hess
    return 0.5 * (info + info.T)


def _fill_hessian(ll, f0, h, hess) -> None:
    k = h.size
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        hess[i, i] = (ll(ei) - 2.0 * f0 + ll(-ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            hess[i, j] = (ll(ei + ej) - ll(ei - ej) - ll(-ei + ej) + ll(-ei - ej)) / (4.0 * h[i] * h[j])
            hess[j, i] = hess[i, j]


def gg_fisher_information(params: GGParams) -> np.ndarray:
    """Per-observation expected information of the GG, order (alpha, mu, phi).

    Off-diagonal signs follow from E[Y log Y] = phi psi(phi) + 1 with
    Y = (mu T)^alpha ~ Gamma(phi, 1).
    """
    if not isinstance(params, GGParams):
        raise ParameterError("gg_fisher_information requires GGParams")
    phi, mu, alpha = params.phi, params.mu, params.alpha
    psi = special.digamma(phi)
    psi1 = special.trigamma(phi)
    return np.array([
        [(1 + 2 * psi + phi * psi1 + phi * psi ** 2) / alpha ** 2, (1 + phi * psi) / mu, -psi / alpha],
        [(1 + phi * psi) / mu, phi * alpha ** 2 / mu ** 2, -alpha / mu],
        [-psi / alpha, -alpha / mu, psi1],
    ])


def _covariance(info: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(info)):
        raise SingularInformationError("information matrix has non-finite entries")
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError("observed information is singular") from exc
    if np.linalg.cond(info) > 1e14 or np.any(np.diag(cov) <= 0):
        raise SingularInformationError("observed information is singular or indefinite")
    return cov


def _wald(theta, se, level: float) -> list[tuple[float, float]]:
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    z = NormalDist().inv_cdf((1 + level) / 2) if level > 0 else 0.0
    return [(float(m - z * s), float(m + z * s)) for m, s in zip(theta, se)]


def wald_intervals(fit: FitResult, level: float = 0.95) -> list[tuple[float, float]]:
    """Symmetric normal-approximation intervals from the observed information."""
    se = np.sqrt(np.diag(_covariance(fit.observed_info)))
    return _wald(fit.params.as_array(), se, level)


# ---------------------------------------------------------------------------
# GG profile equations

def gg_profile_equations(alpha: float, sample) -> tuple[float, float, float]:
    """Closed-form ``mu_hat(alpha)``, ``phi_hat(alpha)`` and the residual of
    the remaining stationarity equation in alpha."""
    sample = as_sample(sample)
    if not alpha > 0:
        raise DomainError("alpha must be > 0")
    t = sample.values
    n = t.size
    log_t = np.log(t)
    t_alpha = np.exp(alpha * log_t)
    s = t_alpha.sum()
    spread = (t_alpha * log_t).sum() - s / n * log_t.sum()
    if not spread > 1e-12 * max(1.0, s):
        raise DegenerateSampleError("sample has no spread; GG profile equations are undefined")
    mu_hat = (n / (alpha * spread)) ** (1.0 / alpha)
    phi_hat = s / (alpha * spread)
    residual = n * alpha * math.log(mu_hat) + alpha * log_t.sum() - n * special.digamma(phi_hat)
    return mu_hat, phi_hat, residual


def gg_profile_mle(sample, alpha_grid: Sequence[float] | None = None) -> GGParams:
    """GG MLE by root-finding the profile residual in alpha."""
    sample = as_sample(sample)
    grid = np.geomspace(0.02, 50.0, 200) if alpha_grid is None else np.asarray(alpha_grid)

    def resid(a):
        return gg_profile_equations(a, sample)[2]

    values = [resid(a) for a in grid]
    best = None
    for a0, a1, r0, r1 in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if np.sign(r0) != np.sign(r1):
            root = optimize.brentq(resid, a0, a1, xtol=1e-14, rtol=1e-14)
            mu, phi, _ = gg_profile_equations(root, sample)
            cand = GGParams(phi, mu, root)
            ll = _loglik_fast(Family.GG, cand.as_array(), sample)
            if best is None or ll > best[0]:
                best = (ll, cand)
    if best is None:
        raise ConvergenceError("GG profile residual has no sign change on the alpha grid")
    return best[1]


# ---------------------------------------------------------------------------
# Fitting

def _to_internal(family: Family, theta) -> np.ndarray:
    x = np.array(theta, dtype=float)
    ident = _IDENTITY_COORDS.get(family, ())
    for j in range(x.size):
        if j not in ident:
            x[j] = math.log(x[j])
    return x


def _from_internal(family: Family, x) -> np.ndarray:
    theta = np.array(x, dtype=float)
    ident = _IDENTITY_COORDS.get(family, ())
    for j in range(theta.size):
        if j not in ident:
            theta[j] = math.exp(theta[j])
    return theta


# Box on internal coordinates keeps ridge-chasing runs inside float range.
_LOG_LIMIT = 40.0
_LAMBDA_LIMIT = 1e4
# For GW with lam > 1 the density is unbounded at the support edge, so the
# likelihood has no maximum there; the search stays in lam < 1.
_GW_LAMBDA_MAX = 1.0


def _objective(family: Family, sample: Sample) -> Callable[[np.ndarray], float]:
    t = sample.values
    log_t = np.log(t)
    fn = _LOGLIK[family]
    ident = _IDENTITY_COORDS.get(family, ())

    def neg_ll(x):
        for j, xj in enumerate(x):
            limit = _LAMBDA_LIMIT if j in ident else _LOG_LIMIT
            if not abs(xj) <= limit:
                return math.inf
        theta = _from_internal(family, x)
        if family is Family.GW and theta[0] >= _GW_LAMBDA_MAX:
            return math.inf
        with np.errstate(all="ignore"):
            value = fn(tuple(theta), t, log_t)
        return -value if np.isfinite(value) else math.inf

    return neg_ll


def weibull_log_moments(sample) -> tuple[float, float]:
    """Weibull (shape, scale) matched to the mean and sd of log lifetimes."""
    sample = as_sample(sample)
    log_t = np.log(sample.values)
    sd = float(np.std(log_t, ddof=1)) if sample.n > 1 else 0.0
    if not sd > 0:
        sd = 1.0
    shape = math.pi / (sd * math.sqrt(6.0))
    scale = math.exp(float(np.mean(log_t)) + EULER_GAMMA / shape)
    return shape, scale


def _weibull_embedding(family: Family, shape: float, scale: float, lam: float = 0.0) -> list[float]:
    """Parameters of ``family`` reproducing (or approximating) a Weibull."""
    if family is Family.GG:
        return [1.0, 1.0 / scale, shape]
    if family is Family.GW:
        return [lam, scale, 1.0 / shape]
    if family is Family.EW:
        return [scale, 1.0, shape]
    if family is Family.MOW:
        return [scale ** -shape, 1.0, shape]
    return [lam if lam != 0 else 0.5, shape, scale ** -shape]


def initial_points(family, sample, config: OptimizerConfig) -> list[np.ndarray]:
    """Deterministic list of starting points in natural coordinates."""
    family = Family.parse(family)
    sample = as_sample(sample)
    shape, scale = weibull_log_moments(sample)
    mean = float(sample.values.mean())
    starts = [_weibull_embedding(family, shape, scale), _weibull_embedding(family, 1.0, mean)]
    if family is Family.EPW:
        starts.insert(1, _weibull_embedding(family, shape, scale, lam=-0.5))
    if family is Family.GW:
        # keep lam > 0 starts feasible: lam < (phi / t_max)^(1/alpha)
        bound = (scale / sample.values.max()) ** shape
        starts.insert(1, _weibull_embedding(family, shape, scale, lam=0.5 * bound))
    rng = np.random.default_rng([config.seed, list(Family).index(family)])
    base = _to_internal(family, starts[0])
    ident = _IDENTITY_COORDS.get(family, ())
    while len(starts) < config.n_starts:
        jitter = rng.normal(0.0, 0.75, size=base.size)
        x = base + jitter
        for j in ident:
            x[j] = rng.normal(0.0, 1.0)
        starts.append(list(_from_internal(family, x)))
    starts = starts[: config.n_starts]
    return [np.asarray(s, dtype=float) for s in starts]


def _nelder_mead(neg_ll, x0, config: OptimizerConfig, step: float = 0.25):
    x0 = np.asarray(x0, dtype=float)
    simplex = np.vstack([x0] + [x0 + step * np.eye(x0.size)[j] for j in range(x0.size)])
    # inf vertices outside the feasible set make scipy's convergence test warn
    with np.errstate(invalid="ignore"):
        return optimize.minimize(
            neg_ll, x0, method="Nelder-Mead",
            options={"maxiter": config.max_iter, "maxfev": 2 * config.max_iter,
                     "xatol": config.tol, "fatol": config.tol * 1e-2, "initial_simplex": simplex},
        )


def _polish(neg_ll, x, fun, config: OptimizerConfig, max_rounds: int = 5):
    """Restart the simplex at the incumbent until it stops improving."""
    runs = 0
    for _ in range(max_rounds):
        res = _nelder_mead(neg_ll, x, config, step=0.05)
        runs += 1
        if res.fun < fun - 1e-10:
            x, fun = res.x, res.fun
        else:
            break
    return x, fun, runs


def _score_residual(family: Family, params: FamilyParams, sample: Sample) -> tuple[float, np.ndarray]:
    try:
        g = score(family, params, sample)
    except (DomainError, ParameterError):
        return math.inf, np.full(3, np.nan)
    if not np.all(np.isfinite(g)):
        return math.inf, g
    return float(np.max(np.abs(g))), g


def _is_psd(info: np.ndarray) -> bool:
    if not np.all(np.isfinite(info)):
        return False
    eig = np.linalg.eigvalsh(info)
    return bool(eig.min() >= -1e-8 * max(1.0, float(np.abs(eig).max())))


def _build_result(family, x, fun, sample, runs) -> FitResult:
    theta = _from_internal(family, x)
    params = make_params(family, theta)
    loglik = -float(fun)
    resid, g = _score_residual(family, params, sample)
    info = observed_information(family, params, sample)
    tol_score = 1e-4 * (1.0 + abs(loglik))
    psd = _is_psd(info)
    converged = resid <= tol_score and psd
    try:
        se = np.sqrt(np.diag(_covariance(info)))
        ci = _wald(theta, se, 0.95)
        msg = ""
    except SingularInformationError as exc:
        se = np.full(theta.size, np.nan)
        ci = [(math.nan, math.nan)] * theta.size
        msg = str(exc)
    if not converged:
        reason = f"score residual {resid:.3g} > {tol_score:.3g}" if resid > tol_score else "information not PSD"
        msg = "; ".join(m for m in (reason, msg) if m)
    return FitResult(family=family, params=params, loglik=loglik, n=sample.n, score_residual=resid,
                     observed_info=info, std_errors=se, wald_ci_95=ci, converged=converged,
                     n_restarts_used=runs, message=msg, score=g)


def fit_mle(family, sample, config: OptimizerConfig | None = None,
            starts: Sequence[Sequence[float]] | None = None) -> FitResult:
    """Maximum-likelihood fit of ``family`` to ``sample``.

    ``starts`` overrides the default seeds (natural coordinates), e.g. to
    warm-start bootstrap refits from a previous estimate.
    """
    family = Family.parse(family)
    sample = as_sample(sample)
    config = config or OptimizerConfig()
    if sample.n < 3:
        raise DegenerateSampleError("fitting needs at least 3 observations")
    if np.ptp(sample.values) == 0:
        raise DegenerateSampleError("all observations are identical")
    neg_ll = _objective(family, sample)
    if starts is None:
        starts = initial_points(family, sample, config)

    candidates = []
    runs = 0
    for idx, s in enumerate(starts):
        try:
            x0 = _to_internal(family, s)
        except ValueError:
            continue
        if not math.isfinite(neg_ll(x0)):
            continue
        res = _nelder_mead(neg_ll, x0, config)
        runs += 1
        if math.isfinite(res.fun):
            candidates.append((res.fun, idx, res.x))
    if not candidates:
        raise ConvergenceError(f"{family.value}: every start failed (infeasible or non-finite likelihood)")

    candidates.sort(key=lambda c: (c[0], c[1]))
    fun, _, x = candidates[0]
    x, fun, extra = _polish(neg_ll, x, fun, config)
    runs += extra
    result = _build_result(family, x, fun, sample, runs)

    # Escalate with fresh simplexes around the incumbent if the score check fails.
    rng = np.random.default_rng([config.seed, 7919])
    attempts = 0
    while not result.converged and attempts < config.n_starts:
        attempts += 1
        x_try = x + rng.normal(0.0, 0.1, size=x.size)
        res = _nelder_mead(neg_ll, x_try, config, step=0.1)
        runs += 1
        if res.fun < fun:
            x, fun = res.x, res.fun
            x, fun, extra = _polish(neg_ll, x, fun, config)
            runs += extra
            result = _build_result(family, x, fun, sample, runs)
    result.n_restarts_used = runs
    if not result.converged and not result.message:
        result.message = "score check failed after escalation"
    at_box = [name for name, xj, j in zip(result.params.names(), x, range(x.size))
              if abs(xj) >= 0.999 * (_LAMBDA_LIMIT if j in _IDENTITY_COORDS.get(family, ()) else _LOG_LIMIT)]
    if at_box:
        note = f"search-box limit reached for {', '.join(at_box)} (likelihood rises toward the parameter-space boundary)"
        result.message = "; ".join(m for m in (result.message, note) if m)
    return result
