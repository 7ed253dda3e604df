"""Scalar special functions: log-gamma, regularized incomplete gamma,
digamma and trigamma.

All functions take and return Python floats and are pure.
"""

from __future__ import annotations

import math
import sys

from .errors import ConvergenceError, DomainError

_EPS = sys.float_info.epsilon
_FPMIN = sys.float_info.min / _EPS
_MAX_ITER = 100_000

# Asymptotic expansion switch point for the polygamma functions.
_ASYMPTOTIC_X = 6.0


def _check_positive(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} requires a finite positive argument, got {x!r}")
    return x


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    x = _check_positive("log_gamma", x)
    return math.lgamma(x)


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by the power series; good for x < a + 1.
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _gamma_continued_fraction(a: float, x: float) -> float:
    # Q(a, x) by the modified Lentz continued fraction; good for x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def _check_incomplete_args(a: float, x: float) -> tuple[float, float]:
    a = _check_positive("incomplete gamma shape", a)
    x = float(x)
    if math.isnan(x) or x < 0.0:
        raise DomainError(f"incomplete gamma requires x >= 0, got {x!r}")
    return a, x


def reg_lower_incomplete_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma ``P(a, x) = gamma(a, x) / Gamma(a)``."""
    a, x = _check_incomplete_args(a, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_continued_fraction(a, x))


def reg_upper_incomplete_gamma(a: float, x: float) -> float:
    """Regularized upper incomplete gamma ``Q(a, x) = Gamma(a, x) / Gamma(a)``."""
    a, x = _check_incomplete_args(a, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_continued_fraction(a, x))


def digamma(x: float) -> float:
    """Digamma function psi(x) for ``x > 0``.

    Upward recurrence ``psi(x) = psi(x + 1) - 1/x`` moves the argument past
    6, where the asymptotic Bernoulli expansion is accurate to ~1e-13.
    """
    x = _check_positive("digamma", x)
    shift = 0.0
    while x < _ASYMPTOTIC_X:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = inv2 * (
        1.0 / 12
        - inv2 * (1.0 / 120
        - inv2 * (1.0 / 252
        - inv2 * (1.0 / 240
        - inv2 * (1.0 / 132
        - inv2 * (691.0 / 32760
        - inv2 * (1.0 / 12)))))))
    return shift + math.log(x) - 0.5 / x - tail


def trigamma(x: float) -> float:
    """Trigamma function psi'(x) for ``x > 0``."""
    x = _check_positive("trigamma", x)
    shift = 0.0
    while x < _ASYMPTOTIC_X:
        shift += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    # 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
    series = inv2 * inv * (
        1.0 / 6
        - inv2 * (1.0 / 30
        - inv2 * (1.0 / 42
        - inv2 * (1.0 / 30
        - inv2 * (5.0 / 66
        - inv2 * (691.0 / 2730
        - inv2 * (7.0 / 6)))))))
    return shift + inv + 0.5 * inv2 + series
