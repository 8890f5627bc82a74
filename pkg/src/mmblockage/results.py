"""Report containers and the tagged value used for undefined statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Undefined:
    """Stand-in for a statistic that has no value at this parameter point.

    Conditional statistics are undefined when the conditioning event has
    probability zero (no BS can ever serve the UE). Using a tagged value
    instead of NaN keeps CSV sweeps through the origin readable.
    """

    reason: str

    def __str__(self) -> str:
        return f"undefined: {self.reason}"

    def __float__(self) -> float:
        return float("nan")


ZERO_COVERAGE = Undefined("zero coverage")
NOT_OPEN_PARK = Undefined("requires open park (no static blockage)")

Value = Union[float, Undefined]


def is_defined(value) -> bool:
    return not isinstance(value, Undefined)


LOS_FIELDS = ("coverage_prob", "block_prob_uncond", "block_prob_cond",
              "exp_duration_s", "exp_frequency_hz", "a_integral", "a_prime")
NLOS_FIELDS = ("coverage_prob", "block_prob_uncond", "block_prob_cond",
               "exp_duration_s", "a_tilde", "q_tilde", "R_tilde")


@dataclass(frozen=True)
class LosReport:
    coverage_prob: float
    block_prob_uncond: float
    block_prob_cond: Value
    exp_duration_s: Value
    exp_frequency_hz: Value
    a_integral: float
    a_prime: float
    # statistic name -> short description of how it was computed
    provenance: dict = field(default_factory=dict, compare=False)

    def row(self) -> dict:
        return {name: getattr(self, name) for name in LOS_FIELDS}


@dataclass(frozen=True)
class NlosReport:
    coverage_prob: float
    block_prob_uncond: float
    block_prob_cond: Value
    exp_duration_s: Value
    a_tilde: float
    q_tilde: float
    R_tilde: float
    provenance: dict = field(default_factory=dict, compare=False)

    def row(self) -> dict:
        return {name: getattr(self, name) for name in NLOS_FIELDS}
