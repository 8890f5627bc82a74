"""Independence-sampling cross-check for the closed-form blockage probabilities.

Draws the BS count, distances and per-link blocked states directly from
the model's independence assumptions and counts how often every path is
blocked. It shares no code with the closed forms, so agreement checks the
Poisson averaging and the radial integrals.
"""

from __future__ import annotations

import math

import numpy as np

from .mobility import SimEstimate
from .params import SystemParams, derive


def run_sampling_oracle(params: SystemParams, samples: int = 1_000_000, model: str = "los",
                        seed: int = 0, batch: int = 250_000) -> SimEstimate:
    """Empirical unconditional all-blocked probability with its binomial standard deviation.

    ``model="los"`` blocks each link independently with its combined
    self/static/dynamic probability. ``model="nlos"`` additionally gives
    every BS within the NLOS range ``max(Poisson(kappa), 1)`` virtual links,
    each unblocked with probability 1 / (1 + C r / mu).
    """
    if samples < 10_000:
        raise ValueError("use at least 10^4 samples")
    if model not in ("los", "nlos"):
        raise ValueError(f"model must be 'los' or 'nlos', got {model!r}")
    consts = derive(params)
    rng = np.random.default_rng(seed)
    R, k = params.los_range_R, consts.C / consts.mu
    mean_m = params.bs_density_lambda_T * math.pi * R * R
    blocked = 0
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        m = rng.poisson(mean_m, size=n)
        owner = np.repeat(np.arange(n), m)
        r = R * np.sqrt(rng.uniform(size=owner.size))
        p_up = consts.p * np.exp(-(consts.beta * r + consts.beta0)) / (1.0 + k * r)
        link_up = rng.uniform(size=owner.size) < p_up
        if model == "nlos":
            paths = np.maximum(rng.poisson(consts.kappa, size=owner.size), 1)
            b = np.where(r <= consts.R_tilde, 1.0 / (1.0 + k * r), 0.0)
            link_up |= rng.binomial(paths, b) > 0
        up_count = np.bincount(owner[link_up], minlength=n)
        blocked += int((up_count == 0).sum())
        done += n
    p_hat = blocked / samples
    return SimEstimate(f"{model}_block_prob_uncond", p_hat, math.sqrt(p_hat * (1 - p_hat)),
                       samples, seed)
