"""Model inputs and the constants derived from them.

Everything in here is SI: metres, seconds, per-square-metre densities and
radians. Conversion from the per-km^2 / degree units used on the command
line happens in :mod:`mmblockage.config`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace


class ParameterError(ValueError):
    """Raised when a parameter set violates a model precondition."""


@dataclass(frozen=True)
class SystemParams:
    los_range_R: float = 100.0
    bs_density_lambda_T: float = 2e-4
    blocker_density_lambda_B: float = 0.01
    static_density_lambda_S: float = 0.0
    blocker_speed_V: float = 1.0
    height_blocker_hB: float = 1.8
    height_ue_hR: float = 1.4
    height_bs_hT: float = 5.0
    inv_mu: float = 0.5
    self_block_angle_omega: float = math.pi / 3
    mean_block_length_l: float = 10.0
    mean_block_width_w: float = 10.0
    nlos_kappa: float = 3.0
    nlos_attenuation_gamma_dB: float = 5.0
    path_loss_exponent_PLE: float = 2.69

    def __post_init__(self):
        validate(self)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @property
    def mu(self) -> float:
        return 1.0 / self.inv_mu


PARAM_NAMES = tuple(f.name for f in fields(SystemParams))


def validate(params: SystemParams) -> None:
    for name in ("bs_density_lambda_T", "blocker_density_lambda_B",
                 "static_density_lambda_S", "blocker_speed_V"):
        value = getattr(params, name)
        if not (value >= 0 and math.isfinite(value)):
            raise ParameterError(f"{name} must be finite and >= 0, got {value!r}")
    for name in ("los_range_R", "height_blocker_hB", "height_ue_hR", "height_bs_hT",
                 "inv_mu", "mean_block_length_l", "mean_block_width_w",
                 "path_loss_exponent_PLE"):
        value = getattr(params, name)
        if not (value > 0 and math.isfinite(value)):
            raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
    if not params.height_ue_hR < params.height_blocker_hB:
        raise ParameterError(
            f"need height_ue_hR < height_blocker_hB, got "
            f"{params.height_ue_hR} >= {params.height_blocker_hB}")
    if not params.height_blocker_hB < params.height_bs_hT:
        raise ParameterError(
            f"need height_blocker_hB < height_bs_hT (BS above blockers), got "
            f"{params.height_blocker_hB} >= {params.height_bs_hT}")
    if not 0 <= params.self_block_angle_omega < 2 * math.pi:
        raise ParameterError(
            f"self_block_angle_omega must lie in [0, 2*pi), got {params.self_block_angle_omega!r}")
    if not params.nlos_kappa >= 0:
        raise ParameterError(f"nlos_kappa must be >= 0, got {params.nlos_kappa!r}")
    if not math.isfinite(params.nlos_attenuation_gamma_dB):
        raise ParameterError("nlos_attenuation_gamma_dB must be finite")


def _disc_survival_factor(x: float) -> float:
    """2 [1 - (1 + x) e^{-x}] / x^2, the disc average of e^{-beta r} with x = beta R.

    Direct evaluation cancels badly for small x, so a Taylor series is used
    there; the x -> 0 limit is 1.
    """
    if x < 1e-2:
        # 2 * sum_{k>=2} (-1)^k (k-1) x^(k-2) / k!
        total, fact = 0.0, 2.0
        for k in range(2, 14):
            total += (-1) ** k * (k - 1) * x ** (k - 2) / fact
            fact *= k + 1
        return 2.0 * total
    return 2.0 * (-math.expm1(-x) - x * math.exp(-x)) / (x * x)


@dataclass(frozen=True)
class DerivedConstants:
    """Constants computed once from a :class:`SystemParams`.

    ``C`` is the dynamic blockage-rate coefficient (1/(m s)), ``beta`` and
    ``beta0`` describe static blockage, ``p`` is the fraction of BSs outside
    the self-blockage sector, ``q`` the disc-averaged static survival
    probability and ``q_tilde`` the per-BS availability once NLOS paths are
    counted.
    """

    params: SystemParams
    C: float
    beta: float
    beta0: float
    p: float
    q: float
    q_tilde: float
    R_tilde: float
    eff_fraction: float

    @property
    def R(self) -> float:
        return self.params.los_range_R

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def lambda_T(self) -> float:
        return self.params.bs_density_lambda_T

    @property
    def kappa(self) -> float:
        return self.params.nlos_kappa

    @property
    def disc_mean(self) -> float:
        """Mean number of BSs in the LOS disc, lambda_T * pi * R^2."""
        return self.lambda_T * math.pi * self.R ** 2

    @property
    def rc_over_mu(self) -> float:
        return self.R * self.C / self.mu

    def with_R_tilde(self, R_tilde: float) -> "DerivedConstants":
        """Copy with a different NLOS range (q_tilde recomputed)."""
        if not 0 <= R_tilde <= self.R:
            raise ParameterError(f"R_tilde must lie in [0, R], got {R_tilde!r}")
        return replace(self, R_tilde=R_tilde,
                       q_tilde=nlos_availability(self.beta, self.beta0, self.p, self.R, R_tilde))


def nlos_range(R: float, gamma_dB: float, ple: float) -> float:
    return R * 10.0 ** (-gamma_dB / (10.0 * ple))


def nlos_availability(beta: float, beta0: float, p: float, R: float, R_tilde: float) -> float:
    """Probability that a uniformly placed BS in the disc is LOS- or NLOS-available.

    BSs inside ``R_tilde`` always have an NLOS path; outside it they count
    only when LOS is neither statically nor self-blocked.
    """
    inner = (R_tilde / R) ** 2
    # integral of e^{-beta r} 2r/R^2 over [R_tilde, R], via the disc factor
    outer = _disc_survival_factor(beta * R) - inner * _disc_survival_factor(beta * R_tilde)
    return inner + p * math.exp(-beta0) * outer


def derive(params: SystemParams) -> DerivedConstants:
    validate(params)
    eff = ((params.height_blocker_hB - params.height_ue_hR)
           / (params.height_bs_hT - params.height_ue_hR))
    C = (2.0 / math.pi) * params.blocker_density_lambda_B * params.blocker_speed_V * eff
    lam_s = params.static_density_lambda_S
    beta = (2.0 / math.pi) * lam_s * (params.mean_block_length_l + params.mean_block_width_w)
    beta0 = lam_s * params.mean_block_length_l * params.mean_block_width_w
    p = 1.0 - params.self_block_angle_omega / (2.0 * math.pi)
    R = params.los_range_R
    if lam_s == 0:
        q = 1.0
    else:
        q = math.exp(-beta0) * _disc_survival_factor(beta * R)
    R_tilde = nlos_range(R, params.nlos_attenuation_gamma_dB, params.path_loss_exponent_PLE)
    if R_tilde > R:
        raise ParameterError(
            f"NLOS range {R_tilde:.6g} m exceeds LOS range {R:.6g} m; "
            "nlos_attenuation_gamma_dB must be >= 0")
    return DerivedConstants(
        params=params, C=C, beta=beta, beta0=beta0, p=p, q=q,
        q_tilde=nlos_availability(beta, beta0, p, R, R_tilde),
        R_tilde=R_tilde, eff_fraction=eff,
    )


def alpha_i(consts: DerivedConstants, r: float) -> float:
    """Blocker arrival rate (1/s) on a link of 2D length ``r``."""
    return consts.C * r


def single_link_block_prob(consts: DerivedConstants, r: float) -> float:
    x = consts.C * r / consts.mu
    return x / (1.0 + x)
