"""Closed forms for blockage of the direct (LOS) BS-UE links.

All statistics are for a UE at the centre of a disc of radius R holding a
Poisson number of BSs, each independently subject to static, self and
dynamic blockage. Conditional statistics are conditioned on coverage: at
least one BS in the disc that is neither statically nor self-blocked.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import gammaln, logsumexp

from .params import DerivedConstants, ParameterError
from .quadrature import adaptive_simpson
from .results import NOT_OPEN_PARK, ZERO_COVERAGE, LosReport, Value, is_defined

QUAD_RTOL = 1e-10
LOG_SPACE_THRESHOLD = 700.0
DENSITY_BRACKET = (1e-8, 1e-1)  # BS per m^2
BISECTION_STEPS = 60


class InfeasibleTargetError(ValueError):
    """No BS density in the search bracket meets the requested target."""

    def __init__(self, message: str, infimum: float):
        super().__init__(message)
        self.infimum = infimum


def _is_open_park(consts: DerivedConstants) -> bool:
    return consts.beta == 0 and consts.beta0 == 0


def available_mean(consts: DerivedConstants) -> float:
    """Mean number of BSs neither statically nor self-blocked, p q lambda_T pi R^2."""
    return consts.p * consts.q * consts.disc_mean


def coverage_los(consts: DerivedConstants) -> float:
    return -math.expm1(-available_mean(consts))


def a_integral(consts: DerivedConstants, rtol: float = QUAD_RTOL) -> float:
    """Disc average of the probability that a link survives static and dynamic blockage."""
    R, beta, beta0, k = consts.R, consts.beta, consts.beta0, consts.C / consts.mu
    norm = 2.0 / R ** 2

    def integrand(r: float) -> float:
        return math.exp(-(beta * r + beta0)) / (1.0 + k * r) * norm * r

    return adaptive_simpson(integrand, 0.0, R, rtol=rtol)


def a_prime(consts: DerivedConstants) -> float:
    """Closed form of the disc-averaged dynamic survival probability (no static blockage)."""
    x = consts.rc_over_mu
    if x == 0:
        return 1.0
    if x < 0.05:
        # 2/x - 2 ln(1+x)/x^2 cancels catastrophically; use sum 2 (-x)^k / (k+2)
        return sum(2.0 * (-x) ** k / (k + 2) for k in range(16))
    return 2.0 / x - 2.0 / x ** 2 * math.log1p(x)


def a_prime_approx(consts: DerivedConstants) -> float:
    x = consts.rc_over_mu
    if x >= 1:
        warnings.warn(f"RC/mu = {x:.3g} >= 1; first-order approximation of a' is poor",
                      RuntimeWarning, stacklevel=2)
    return 1.0 - 2.0 * x / 3.0


def conditional_prob(uncond_exponent: float, coverage_exponent: float) -> Value:
    """(e^{-u} - e^{-c}) / (1 - e^{-c}) with u <= c, stable for large exponents."""
    if coverage_exponent == 0:
        return ZERO_COVERAGE
    num = math.exp(-uncond_exponent) * -math.expm1(-(coverage_exponent - uncond_exponent))
    return num / -math.expm1(-coverage_exponent)


def blockage_prob_los(consts: DerivedConstants, a: float | None = None) -> tuple[float, Value]:
    """Unconditional and coverage-conditioned probability that every LOS link is blocked.

    ``a`` defaults to the quadrature value :func:`a_integral`; pass
    :func:`a_prime` to get the open-park closed form.
    """
    if a is None:
        a = a_integral(consts)
    x = consts.disc_mean
    uncond = math.exp(-a * consts.p * x)
    return uncond, conditional_prob(a * consts.p * x, available_mean(consts))


def blockage_prob_open_park(consts: DerivedConstants) -> tuple[float, Value]:
    if not _is_open_park(consts):
        raise ParameterError("open-park closed form needs static_density_lambda_S = 0")
    return blockage_prob_los(consts, a=a_prime(consts))


def min_bs_density(consts: DerivedConstants, target_block_prob: float,
                   mode: str = "closed-form") -> float:
    """BS density (per m^2) needed to push blockage probability down to the target.

    ``closed-form`` uses the first-order expansion in RC/mu and is only
    defined without static blockage. ``exact`` bisects the conditional
    blockage probability on a log density scale.
    """
    if not 0 < target_block_prob < 1:
        raise ValueError(f"target must lie in (0, 1), got {target_block_prob!r}")
    if mode == "closed-form":
        if not _is_open_park(consts):
            raise ParameterError("closed-form density needs static_density_lambda_S = 0")
        x = consts.rc_over_mu
        return -math.log(target_block_prob) * (1 + 2 * x / 3) / (consts.p * math.pi * consts.R ** 2)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")

    a = a_prime(consts) if _is_open_park(consts) else a_integral(consts)
    area = math.pi * consts.R ** 2

    def cond(lam: float) -> float:
        x = lam * area
        value = conditional_prob(a * consts.p * x, consts.p * consts.q * x)
        return 1.0 if not isinstance(value, float) else value

    return bisect_density(lambda lam: cond(lam) <= target_block_prob,
                          describe=lambda lam: cond(lam))


def bisect_density(ok, describe=None, bracket=DENSITY_BRACKET, steps=BISECTION_STEPS) -> float:
    """Smallest density in ``bracket`` where the monotone predicate ``ok`` holds.

    Bisection runs on log10(density); the returned point always satisfies
    ``ok``.
    """
    lo, hi = (math.log10(b) for b in bracket)
    if not ok(10 ** hi):
        inf = describe(10 ** hi) if describe else None
        raise InfeasibleTargetError(
            f"target not met even at {10 ** hi:g} BS/m^2 (achieved {inf!r})", inf)
    if ok(10 ** lo):
        return 10 ** lo
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if ok(10 ** mid):
            hi = mid
        else:
            lo = mid
    return 10 ** hi


def ei_series_log(x: float) -> float:
    """log of sum_{n>=1} x^n / (n n!), for x > 0."""
    if x <= 0:
        raise ValueError("log of the series needs x > 0")
    if x <= LOG_SPACE_THRESHOLD:
        return math.log(ei_series(x))
    n_max = int(x + 40 * math.sqrt(x) + 50)
    n = np.arange(1, n_max + 1, dtype=float)
    return float(logsumexp(n * math.log(x) - np.log(n) - gammaln(n + 1)))


def ei_series(x: float) -> float:
    """sum_{n>=1} x^n / (n n!), which equals Ei(x) - ln(x) - EulerGamma for x > 0."""
    if x < 0:
        raise ValueError(f"series defined here for x >= 0, got {x!r}")
    if x == 0:
        return 0.0
    if x > LOG_SPACE_THRESHOLD:
        try:
            return math.exp(ei_series_log(x))
        except OverflowError:
            return math.inf
    term = x
    total = x
    n = 1
    while True:
        term *= x * n / (n + 1) ** 2
        n += 1
        if term < 1e-14 * total:
            break
        total += term
    return total


def expected_duration_los(consts: DerivedConstants) -> Value:
    """Mean length (s) of an all-LOS-links-blocked interval, given coverage."""
    x = available_mean(consts)
    if x == 0:
        return ZERO_COVERAGE
    return math.exp(-x + ei_series_log(x)) / (consts.mu * -math.expm1(-x))


def expected_duration_los_approx(consts: DerivedConstants) -> Value:
    x = available_mean(consts)
    if x == 0:
        return ZERO_COVERAGE
    return 1.0 / (consts.mu * x * -math.expm1(-x))


def expected_frequency(consts: DerivedConstants) -> Value:
    """Rate (1/s) of all-links-blocked events given coverage, open park only."""
    if not _is_open_park(consts):
        raise ParameterError("blockage frequency closed form needs static_density_lambda_S = 0")
    x = consts.p * consts.disc_mean
    if x == 0:
        return ZERO_COVERAGE
    ap = a_prime(consts)
    return consts.mu * (1 - ap) * x * math.exp(-ap * x) / -math.expm1(-x)


def los_report(consts: DerivedConstants, open_park: bool = False) -> LosReport:
    ap = a_prime(consts)
    if open_park:
        if not _is_open_park(consts):
            raise ParameterError("open-park report needs static_density_lambda_S = 0")
        a, a_how = ap, "closed form (open park)"
    else:
        a, a_how = a_integral(consts), "adaptive Simpson quadrature"
    uncond, cond = blockage_prob_los(consts, a=a)
    freq = expected_frequency(consts) if _is_open_park(consts) else NOT_OPEN_PARK
    return LosReport(
        coverage_prob=coverage_los(consts),
        block_prob_uncond=uncond,
        block_prob_cond=cond,
        exp_duration_s=expected_duration_los(consts),
        exp_frequency_hz=freq,
        a_integral=a,
        a_prime=ap,
        provenance={
            "a_integral": a_how,
            "block_prob_uncond": "Poisson average of per-link product",
            "exp_duration_s": "exact series over available-BS count",
            "exp_frequency_hz": "closed form (open park)" if is_defined(freq) else str(freq),
        },
    )

