"""Network planning: how many BSs per km^2 a reliability/latency target needs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from . import los, nlos
from .los import InfeasibleTargetError, bisect_density
from .params import ParameterError, SystemParams, derive
from .results import is_defined

MODELS = ("open-park", "urban-los", "urban-nlos")
PER_KM2 = 1e6


@dataclass(frozen=True)
class QosTarget:
    reliability: float
    max_latency_ms: float
    caching_allowed: bool = False
    name: str = ""

    def __post_init__(self):
        if not 0 < self.reliability < 1:
            raise ValueError(f"reliability must lie in (0, 1), got {self.reliability!r}")
        if not self.max_latency_ms > 0:
            raise ValueError(f"max_latency_ms must be > 0, got {self.max_latency_ms!r}")

    @property
    def max_block_prob(self) -> float:
        return 1.0 - self.reliability


@dataclass(frozen=True)
class PlanResult:
    required_density: float  # BS per km^2
    binding_constraint: str  # "reliability" or "duration"
    achieved_block_prob: float
    achieved_duration_s: float


def _evaluator(params: SystemParams, model: str) -> Callable[[float], tuple[float, float]]:
    """(conditional blockage probability, expected duration) as a function of BS density.

    The radial integrals do not depend on BS density, so they are computed
    once here.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    if model == "open-park":
        params = params.with_(static_density_lambda_S=0.0)
    base = derive(params)
    if model == "open-park":
        coeff = los.a_prime(base)
    elif model == "urban-los":
        coeff = los.a_integral(base)
    else:
        coeff = nlos.a_tilde(base)

    def evaluate(lam: float) -> tuple[float, float]:
        consts = derive(params.with_(bs_density_lambda_T=lam))
        if model == "urban-nlos":
            _, cond = nlos.blockage_prob_nlos(consts, at=coeff)
            dur = nlos.expected_duration_nlos(consts)
        else:
            _, cond = los.blockage_prob_los(consts, a=coeff)
            dur = los.expected_duration_los(consts)
        return (cond if is_defined(cond) else 1.0), (dur if is_defined(dur) else math.inf)

    return evaluate


def plan_density(params: SystemParams, target: QosTarget, model: str = "open-park") -> PlanResult:
    """Smallest BS density meeting the blockage target and, without caching, the latency budget.

    Each constraint is solved by bisection on log density; the larger
    answer is returned together with the constraint that set it. Raises
    :class:`InfeasibleTargetError` (carrying the best achievable pair) if
    the densest deployment considered still misses the target.
    """
    evaluate = _evaluator(params, model)
    max_dur = target.max_latency_ms / 1000.0
    need_duration = not target.caching_allowed

    def meets(lam: float) -> bool:
        cond, dur = evaluate(lam)
        return cond <= target.max_block_prob and (not need_duration or dur <= max_dur)

    try:
        lam_rel = bisect_density(lambda lam: evaluate(lam)[0] <= target.max_block_prob,
                                 describe=evaluate)
        lam_dur = bisect_density(lambda lam: evaluate(lam)[1] <= max_dur,
                                 describe=evaluate) if need_duration else 0.0
    except InfeasibleTargetError as exc:
        raise InfeasibleTargetError(
            f"{target.name or 'target'} infeasible under {model}: best (block prob, duration s) "
            f"= {exc.infimum}", exc.infimum) from None
    lam = max(lam_rel, lam_dur)
    assert meets(lam)
    cond, dur = evaluate(lam)
    return PlanResult(
        required_density=lam * PER_KM2,
        binding_constraint="duration" if lam_dur > lam_rel else "reliability",
        achieved_block_prob=cond,
        achieved_duration_s=dur,
    )


def height_density_tradeoff(params: SystemParams, target_block_prob: float,
                            height_grid: Iterable[float],
                            model: str = "open-park") -> list[tuple[float, float]]:
    """(BS height m, required BS/km^2) pairs at a fixed conditional blockage probability."""
    target = QosTarget(1.0 - target_block_prob, max_latency_ms=1e9, caching_allowed=True)
    curve = []
    for h in height_grid:
        if not h > params.height_blocker_hB:
            raise ParameterError(f"BS height {h} must exceed blocker height {params.height_blocker_hB}")
        res = plan_density(params.with_(height_bs_hT=float(h)), target, model)
        curve.append((float(h), res.required_density))
    return curve


def handover_rate(params: SystemParams) -> float:
    """Blockage rate (1/s) of a link at the mean BS distance 2R/3."""
    consts = derive(params)
    return consts.C * 2.0 * params.los_range_R / 3.0


def read_qos_table(path: str | Path) -> list[QosTarget]:
    """Read application rows: application, reliability_pct, max_latency_ms, caching_allowed."""
    targets = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            caching = row["caching_allowed"].strip().lower() in ("1", "true", "yes", "y")
            targets.append(QosTarget(
                reliability=round(float(row["reliability_pct"]) / 100.0, 12),
                max_latency_ms=float(row["max_latency_ms"]),
                caching_allowed=caching,
                name=row["application"].strip(),
            ))
    return targets
