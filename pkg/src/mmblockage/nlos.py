"""Blockage with reflected (NLOS) paths added to the LOS links.

Each real BS within the NLOS range ``R_tilde`` contributes a random number
of virtual BSs (reflection images) at its own distance from the UE. Virtual
links see only dynamic blockage, which makes the blockage probability here
a lower bound.
"""

from __future__ import annotations

import math

from .los import QUAD_RTOL, available_mean, conditional_prob
from .params import DerivedConstants
from .quadrature import adaptive_simpson
from .results import ZERO_COVERAGE, NlosReport, Value


def nlos_path_count_pmf(kappa: float, k: int) -> float:
    """P(K = k) for K = max(Poisson(kappa), 1)."""
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa!r}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k!r}")
    if k == 0:
        return 0.0
    if k == 1:
        return math.exp(-kappa) * (1.0 + kappa)
    return math.exp(-kappa + k * math.log(kappa) - math.lgamma(k + 1)) if kappa > 0 else 0.0


def b_tilde(consts: DerivedConstants, r: float) -> float:
    """Probability that one virtual link of a BS at distance ``r`` is not dynamically blocked."""
    if r > consts.R_tilde:
        return 0.0
    return 1.0 / (1.0 + consts.C * r / consts.mu)


def nlos_all_blocked(b: float, kappa: float) -> float:
    """P(all virtual links of one BS blocked), averaged over the path count."""
    return math.exp(-b * kappa) - b * math.exp(-kappa)


def coverage_nlos(consts: DerivedConstants) -> float:
    return -math.expm1(-consts.q_tilde * consts.disc_mean)


def a_tilde(consts: DerivedConstants, rtol: float = QUAD_RTOL) -> float:
    """Exponent coefficient of the LOS+NLOS all-blocked probability.

    The integrand jumps at ``R_tilde`` so the two sides are integrated
    separately.
    """
    R, R_t, kappa = consts.R, consts.R_tilde, consts.kappa
    beta, beta0, p, k = consts.beta, consts.beta0, consts.p, consts.C / consts.mu
    norm = 2.0 / R ** 2

    def los_blocked(r: float) -> float:
        return 1.0 - p * math.exp(-(beta * r + beta0)) / (1.0 + k * r)

    def inner(r: float) -> float:
        return los_blocked(r) * nlos_all_blocked(1.0 / (1.0 + k * r), kappa) * norm * r

    def outer(r: float) -> float:
        return los_blocked(r) * norm * r

    total = adaptive_simpson(inner, 0.0, R_t, rtol=rtol) if R_t > 0 else 0.0
    if R_t < R:
        total += adaptive_simpson(outer, R_t, R, rtol=rtol)
    return 1.0 - total


def blockage_prob_nlos(consts: DerivedConstants, at: float | None = None) -> tuple[float, Value]:
    if at is None:
        at = a_tilde(consts)
    x = consts.disc_mean
    return math.exp(-at * x), conditional_prob(at * x, consts.q_tilde * x)


def expected_duration_nlos(consts: DerivedConstants) -> Value:
    """First-order mean blocked-interval length (s) counting LOS and NLOS paths."""
    x = consts.disc_mean
    if x == 0:
        return ZERO_COVERAGE
    paths = available_mean(consts) + consts.kappa * consts.lambda_T * math.pi * consts.R_tilde ** 2
    return 1.0 / (-math.expm1(-consts.q_tilde * x) * consts.mu * paths)


def nlos_report(consts: DerivedConstants) -> NlosReport:
    at = a_tilde(consts)
    uncond, cond = blockage_prob_nlos(consts, at=at)
    return NlosReport(
        coverage_prob=coverage_nlos(consts),
        block_prob_uncond=uncond,
        block_prob_cond=cond,
        exp_duration_s=expected_duration_nlos(consts),
        a_tilde=at,
        q_tilde=consts.q_tilde,
        R_tilde=consts.R_tilde,
        provenance={
            "a_tilde": "adaptive Simpson split at R_tilde",
            "exp_duration_s": "first-order approximation in path count",
        },
    )
