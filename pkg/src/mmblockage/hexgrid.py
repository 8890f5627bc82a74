"""Planned deployment: 37 BSs on a hexagonal grid around a central cell.

Geometry convention: the central cell is a flat-topped hexagon of
circumradius ``d`` (corners at angles 0, +-pi/3, +-2pi/3, pi), so first-ring
neighbours sit at distance sqrt(3) d and angles +-pi/6, +-pi/2, +-5pi/6.
One cell has area 3 sqrt(3) d^2 / 2, which fixes the BS density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DerivedConstants, ParameterError

_SQ3 = math.sqrt(3.0)
_ODD = [math.pi / 6, -math.pi / 6, math.pi / 2, -math.pi / 2, 5 * math.pi / 6, -5 * math.pi / 6]
_EVEN = [0.0, math.pi / 3, -math.pi / 3, 2 * math.pi / 3, -2 * math.pi / 3, math.pi]
_OFF = 0.06 * math.pi
# (distance in units of d, angles)
LEVELS = (
    (0.0, [0.0]),
    (_SQ3, _ODD),
    (3.0, _EVEN),
    (2 * _SQ3, _ODD),
    (math.sqrt(21.0), [a + s * _OFF for a in _EVEN for s in (1, -1)]),
    (3 * _SQ3, _ODD),
)
GRID_POINTS = 128
_CHUNK = 2048


@dataclass(frozen=True)
class HexLayout:
    inter_site_half_d: float
    levels: np.ndarray     # (37,) int
    distances: np.ndarray  # (37,) metres from the central BS
    angles: np.ndarray     # (37,) radians from the x-axis

    @property
    def d(self) -> float:
        return self.inter_site_half_d

    @property
    def bs_list(self) -> list[tuple[int, float, float]]:
        return list(zip(self.levels.tolist(), self.distances.tolist(), self.angles.tolist()))

    @property
    def cell_area(self) -> float:
        return 1.5 * _SQ3 * self.d ** 2

    @property
    def bs_density(self) -> float:
        return 1.0 / self.cell_area

    def rotated(self, angle: float) -> "HexLayout":
        return HexLayout(self.d, self.levels, self.distances, self.angles + angle)

    def xy(self) -> np.ndarray:
        return np.column_stack([self.distances * np.cos(self.angles),
                                self.distances * np.sin(self.angles)])


@dataclass(frozen=True)
class UePosition:
    delta: float
    rho: float


def build_layout(d: float) -> HexLayout:
    if not d > 0:
        raise ParameterError(f"d must be > 0, got {d!r}")
    levels, dist, ang = [], [], []
    for level, (scale, angles) in enumerate(LEVELS):
        for a in angles:
            levels.append(level)
            dist.append(scale * d)
            ang.append(a)
    return HexLayout(d, np.array(levels), np.array(dist), np.array(ang))


def d_for_density(density: float) -> float:
    """Half inter-site distance giving ``density`` BSs per m^2."""
    if not density > 0:
        raise ParameterError(f"density must be > 0, got {density!r}")
    return math.sqrt(1.0 / (1.5 * _SQ3 * density))


def ue_bs_distance(layout: HexLayout, pos: UePosition, bs_index: int) -> float:
    di, psi = layout.distances[bs_index], layout.angles[bs_index]
    sq = di * di + pos.delta ** 2 - 2 * di * pos.delta * math.cos(psi - pos.rho)
    return math.sqrt(max(sq, 0.0))


def _boundary_radius(d: float, theta: np.ndarray) -> np.ndarray:
    """Distance from the centre to the cell edge along direction ``theta``."""
    apothem = d * _SQ3 / 2
    # edge normals point at pi/6 + k pi/3
    rel = np.mod(theta, math.pi / 3) - math.pi / 6
    return apothem / np.cos(rel)


def position_grid(d: float, n: int = GRID_POINTS) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Midpoint polar grid scaled to the hexagon: returns (delta, rho, weight).

    A point is s h(rho) (cos rho, sin rho) with s, rho on an n x n midpoint
    grid and h the boundary radius; the area element s h^2 ds drho gives the
    weights, normalised to sum to one.
    """
    s = (np.arange(n) + 0.5) / n
    rho = (np.arange(n) + 0.5) * 2 * math.pi / n
    h = _boundary_radius(d, rho)
    S, RHO = np.meshgrid(s, rho, indexing="ij")
    H = np.broadcast_to(h, S.shape)
    w = S * H ** 2
    return (S * H).ravel(), RHO.ravel(), (w / w.sum()).ravel()


def _distances_and_bearings(layout: HexLayout, delta: np.ndarray, rho: np.ndarray):
    ue = np.column_stack([delta * np.cos(rho), delta * np.sin(rho)])
    rel = layout.xy()[None, :, :] - ue[:, None, :]
    return np.hypot(rel[..., 0], rel[..., 1]), np.arctan2(rel[..., 1], rel[..., 0])


def worst_case_exclusion(bearings: np.ndarray, in_range: np.ndarray, omega: float,
                         link_block: np.ndarray) -> np.ndarray:
    """Mask of BSs hidden by the worst-placed self-blockage sector, per position.

    The sector is half-open [phi, phi + omega). An optimal sector can always
    be rotated until its leading edge touches a BS, so only those anchors
    are tried. Among anchors hiding the most in-range BSs, the one that
    leaves the largest residual blockage probability wins, which favours
    hiding the nearest BSs.
    """
    n_pos, n_bs = bearings.shape
    out = np.zeros((n_pos, n_bs), dtype=bool)
    if omega <= 0:
        return out
    log_pb = np.log(np.clip(link_block, 1e-300, 1.0))
    for start in range(0, n_pos, _CHUNK):
        sl = slice(start, start + _CHUNK)
        b, ok = bearings[sl], in_range[sl]
        # gap[p, j, k]: angle from anchor BS j to BS k, in [0, 2 pi)
        gap = np.mod(b[:, None, :] - b[:, :, None], 2 * math.pi)
        hidden = (gap < omega) & ok[:, None, :] & ok[:, :, None]
        count = hidden.sum(axis=2)
        # harm in (0, 1): larger when the hidden links are rarely blocked
        harm = -np.einsum("pjk,pk->pj", hidden, log_pb[sl])
        score = count + harm / (1.0 + harm) * 0.5
        best = np.argmax(np.where(ok, score, -1.0), axis=1)
        out[sl] = hidden[np.arange(len(best)), best]
    return out


def hex_blockage_prob(layout: HexLayout, consts: DerivedConstants, omega: float | None = None,
                      mode: str = "no-self", n_grid: int = GRID_POINTS,
                      return_details: bool = False):
    """Probability that every usable BS is dynamically blocked, averaged over the UE cell.

    ``mode`` is ``no-self`` (ignore self-blockage) or ``worst-case-self``
    (at every UE position hide the largest set of BSs an ``omega`` sector
    can cover, giving an upper bound). Only BSs within range R count.
    """
    if mode not in ("no-self", "worst-case-self"):
        raise ValueError(f"unknown mode {mode!r}")
    if consts.beta != 0 or consts.beta0 != 0:
        raise ParameterError("hexagonal model is open park only (static_density_lambda_S = 0)")
    if omega is None:
        omega = consts.params.self_block_angle_omega
    delta, rho, weight = position_grid(layout.d, n_grid)
    r, bearing = _distances_and_bearings(layout, delta, rho)
    k = consts.C / consts.mu
    link_block = k * r / (1.0 + k * r)
    usable = r <= consts.R
    excluded = np.zeros_like(usable)
    if mode == "worst-case-self":
        excluded = worst_case_exclusion(bearing, usable, omega, link_block)
        usable = usable & ~excluded
    per_pos = np.where(usable, link_block, 1.0).prod(axis=1)
    prob = float(np.dot(weight, per_pos))
    if return_details:
        return prob, {"max_excluded": int(excluded.sum(axis=1).max()),
                      "min_usable": int(usable.sum(axis=1).min())}
    return prob
