"""Monte-Carlo check of the open-park model with random-waypoint blockers.

A run places a Poisson number of BSs uniformly in the disc of radius R
around a UE at the centre of a square arena, drops a random self-blockage
sector, and moves Poisson-many blockers by random waypoint: each leg has a
uniform heading and a uniform duration, at constant speed, with specular
reflection at the arena walls. A blocker interacts with link i only on the
part of the BS-UE segment within ``eff_fraction * r_i`` of the UE, the
stretch where its height still cuts the ray.

Two blockage mechanisms are available. ``exponential-mark`` starts an
independent Exp(mu) blocked interval on a link at each crossing of its
effective segment (overlaps merge), which is the queueing picture behind
the closed forms. ``geometric-disc`` treats blockers as discs of diameter
``blocker_diameter_wB`` and blocks the link while the disc touches the
effective segment, sampled on a ``time_step`` grid.

Statistics are collected after a warm-up and averaged over covered runs
(at least one BS outside the self-blockage sector).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .params import ParameterError, SystemParams, derive

MODES = ("exponential-mark", "geometric-disc")
_TAIL = 30.0  # seconds simulated past the window so late intervals finish


@dataclass(frozen=True)
class SimConfig:
    arena_side: float = 200.0
    num_runs: int = 10_000
    run_duration: float = 10_800.0
    move_time_bounds: tuple[float, float] = (0.0, 60.0)
    rng_seed: int = 0
    blockage_mode: str = "exponential-mark"
    blocker_diameter_wB: float = 0.5
    time_step: float = 0.01
    warmup: float = 60.0

    def __post_init__(self):
        lo, hi = self.move_time_bounds
        if not (0 <= lo < hi):
            raise ParameterError(f"move_time_bounds must satisfy 0 <= lo < hi, got {self.move_time_bounds}")
        if self.num_runs < 1:
            raise ParameterError("num_runs must be >= 1")
        if not (self.run_duration > 0 and self.arena_side > 0 and self.warmup >= 0):
            raise ParameterError("run_duration and arena_side must be > 0, warmup >= 0")
        if self.blockage_mode not in MODES:
            raise ParameterError(f"blockage_mode must be one of {MODES}, got {self.blockage_mode!r}")
        if self.blockage_mode == "geometric-disc" and not (self.blocker_diameter_wB > 0 and self.time_step > 0):
            raise ParameterError("geometric-disc mode needs blocker_diameter_wB > 0 and time_step > 0")


@dataclass(frozen=True)
class SimEstimate:
    name: str
    point_estimate: float
    std_dev: float
    num_runs: int
    seed: int

    @property
    def std_error(self) -> float:
        return self.std_dev / math.sqrt(self.num_runs) if self.num_runs > 0 else math.nan


@dataclass
class RunRecord:
    run_id: int
    seed: int
    num_bs: int
    num_active: int
    covered: bool
    blocked_fraction: float = 0.0
    frequency: float = 0.0
    num_events: int = 0
    mean_duration: float = math.nan
    # per active link, inside the window
    link_r: np.ndarray = field(default_factory=lambda: np.zeros(0))
    link_crossings: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    link_blocked_fraction: np.ndarray = field(default_factory=lambda: np.zeros(0))
    link_interval_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    num_blockers: int = 0
    trace: list | None = None


@dataclass
class SimResult:
    estimates: dict[str, SimEstimate]
    runs: list[RunRecord]
    seed: int

    @property
    def prob(self) -> SimEstimate:
        return self.estimates["prob"]

    @property
    def freq(self) -> SimEstimate:
        return self.estimates["freq"]

    @property
    def duration(self) -> SimEstimate:
        return self.estimates["duration"]


def run_seed_sequence(master_seed: int, run_id: int) -> np.random.SeedSequence:
    """Independent substream for one run: SeedSequence(master_seed, spawn_key=(run_id,))."""
    return np.random.SeedSequence(master_seed, spawn_key=(run_id,))


# --- trajectories -----------------------------------------------------------

def _fold(y: np.ndarray, side: float) -> np.ndarray:
    """Map an unfolded coordinate (origin at the wall) into [0, side] by reflection."""
    m = np.mod(y, 2 * side)
    return np.where(m <= side, m, 2 * side - m)


def _legs(rng: np.random.Generator, n: int, side: float, speed: float,
          bounds: tuple[float, float], horizon: float):
    """Random-waypoint legs for ``n`` blockers in unfolded wall coordinates.

    Returns flattened arrays (t0, tau, x0, y0, vx, vy). Reflection is applied
    later by folding; a fresh uniform heading reflected in a wall is still a
    fresh uniform heading, so unfolded legs carry the same law.
    """
    lo, hi = bounds
    mean = 0.5 * (lo + hi)
    k = int(math.ceil(horizon / max(mean, 1e-9) * 1.2)) + 5
    start = rng.uniform(0.0, side, size=(n, 2))
    taus, heads = [], []
    total = np.zeros(n)
    while True:
        tau = rng.uniform(lo, hi, size=(n, k))
        head = rng.uniform(0.0, 2 * math.pi, size=(n, k))
        taus.append(tau)
        heads.append(head)
        total = total + tau.sum(axis=1)
        if n == 0 or total.min() >= horizon:
            break
        k = max(k // 4, 4)
    tau = np.concatenate(taus, axis=1)
    head = np.concatenate(heads, axis=1)
    t_end = np.cumsum(tau, axis=1)
    t0 = t_end - tau
    vx, vy = speed * np.cos(head), speed * np.sin(head)
    x_end = start[:, :1] + np.cumsum(vx * tau, axis=1)
    y_end = start[:, 1:] + np.cumsum(vy * tau, axis=1)
    x0, y0 = x_end - vx * tau, y_end - vy * tau
    keep = t0 < horizon
    return t0[keep], tau[keep], x0[keep], y0[keep], vx[keep], vy[keep]


def _near_legs(legs, side: float, reach: float):
    """Drop legs that cannot come within ``reach`` (L-inf) of the arena centre.

    Folding is 1-Lipschitz, so every folded point of a leg lies within the
    leg length of its folded start.
    """
    t0, tau, x0, y0, vx, vy = legs
    length = np.hypot(vx, vy) * tau
    dist = np.maximum(np.abs(_fold(x0, side) - side / 2), np.abs(_fold(y0, side) - side / 2))
    keep = dist <= reach + length + 1e-9
    return tuple(arr[keep] for arr in legs)


def _wall_times(p0: np.ndarray, v: np.ndarray, tau: np.ndarray, side: float) -> np.ndarray:
    """Times within each leg at which the unfolded coordinate crosses a wall line k * side."""
    p1 = p0 + v * tau
    crossings = np.abs(np.floor(p1 / side) - np.floor(p0 / side)).astype(int)
    kmax = int(crossings.max(initial=0))
    out = np.full((len(p0), kmax), np.inf)
    base = np.floor(p0 / side)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(kmax):
            line = np.where(v > 0, base + 1 + j, base - j) * side
            t = (line - p0) / v
            out[:, j] = np.where((j < crossings) & (t > 0) & (t < tau), t, np.inf)
    return out


def _pieces(t0, tau, x0, y0, vx, vy, side):
    """Split unfolded legs at wall lines; return straight folded pieces.

    Output coordinates are centred on the arena (UE at the origin):
    (start time, duration, px, py, vx, vy).
    """
    bx = _wall_times(x0, vx, tau, side)
    by = _wall_times(y0, vy, tau, side)
    cuts = np.concatenate([np.zeros((len(t0), 1)), bx, by, tau[:, None]], axis=1)
    cuts = np.sort(np.minimum(cuts, tau[:, None]), axis=1)
    a, b = cuts[:, :-1], cuts[:, 1:]
    valid = b > a
    leg = np.broadcast_to(np.arange(len(t0))[:, None], a.shape)[valid]
    a, b = a[valid], b[valid]
    tm = 0.5 * (a + b)
    xm, ym = x0[leg] + vx[leg] * tm, y0[leg] + vy[leg] * tm
    sx = np.where(np.mod(np.floor(xm / side), 2) == 0, 1.0, -1.0)
    sy = np.where(np.mod(np.floor(ym / side), 2) == 0, 1.0, -1.0)
    fvx, fvy = vx[leg] * sx, vy[leg] * sy
    px = _fold(xm, side) - fvx * (tm - a) - side / 2
    py = _fold(ym, side) - fvy * (tm - a) - side / 2
    return t0[leg] + a, b - a, px, py, fvx, fvy


# --- link interaction -------------------------------------------------------

def _crossings(pieces, ux, uy, length):
    """Absolute times at which pieces cross each effective segment.

    Returns a list (one array per link) of sorted crossing times.
    """
    ts, dur, px, py, vx, vy = pieces
    out = []
    for k in range(len(ux)):
        cross_v = vx * uy[k] - vy * ux[k]
        cross_p = px * uy[k] - py * ux[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -cross_p / cross_v
        s = (px + vx * t) * ux[k] + (py + vy * t) * uy[k]
        hit = (cross_v != 0) & (t >= 0) & (t < dur) & (s >= 0) & (s <= length[k])
        out.append(np.sort(ts[hit] + t[hit]))
    return out


def _line_interval_disc(px, py, vx, vy, cx, cy, rad):
    """t-interval where |p + v t - c| <= rad (empty -> lo > hi)."""
    dx, dy = px - cx, py - cy
    a = vx * vx + vy * vy
    b = 2 * (dx * vx + dy * vy)
    c = dx * dx + dy * dy - rad * rad
    disc = b * b - 4 * a * c
    ok = (disc >= 0) & (a > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(ok, (-b - sq) / (2 * a), np.inf)
        hi = np.where(ok, (-b + sq) / (2 * a), -np.inf)
    return lo, hi


def _contact_intervals(pieces, ux, uy, length, rad, dt):
    """Blocked intervals per link for disc blockers, quantised to the step grid."""
    ts, dur, px, py, vx, vy = pieces
    out = []
    for k in range(len(ux)):
        # slab: |perp| <= rad and 0 <= along <= length
        perp0 = px * uy[k] - py * ux[k]
        perp_v = vx * uy[k] - vy * ux[k]
        along0 = px * ux[k] + py * uy[k]
        along_v = vx * ux[k] + vy * uy[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            ta, tb = (-rad - perp0) / perp_v, (rad - perp0) / perp_v
            sa, sb = -along0 / along_v, (length[k] - along0) / along_v
        still_p = perp_v == 0
        lo1 = np.where(still_p, np.where(np.abs(perp0) <= rad, -np.inf, np.inf), np.minimum(ta, tb))
        hi1 = np.where(still_p, np.where(np.abs(perp0) <= rad, np.inf, -np.inf), np.maximum(ta, tb))
        still_a = along_v == 0
        inside_a = (along0 >= 0) & (along0 <= length[k])
        lo2 = np.where(still_a, np.where(inside_a, -np.inf, np.inf), np.minimum(sa, sb))
        hi2 = np.where(still_a, np.where(inside_a, np.inf, -np.inf), np.maximum(sa, sb))
        lo, hi = np.maximum(lo1, lo2), np.minimum(hi1, hi2)
        # end caps
        for cx, cy in ((0.0, 0.0), (length[k] * ux[k], length[k] * uy[k])):
            clo, chi = _line_interval_disc(px, py, vx, vy, cx, cy, rad)
            has_slab, has_cap = lo <= hi, clo <= chi
            lo = np.where(has_slab & has_cap, np.minimum(lo, clo), np.where(has_cap, clo, lo))
            hi = np.where(has_slab & has_cap, np.maximum(hi, chi), np.where(has_cap, chi, hi))
        lo, hi = np.maximum(lo, 0.0), np.minimum(hi, dur)
        hit = lo <= hi
        t_in, t_out = ts[hit] + lo[hit], ts[hit] + hi[hit]
        # a stepped simulator sees contact at grid instants j * dt
        k_in, k_out = np.ceil(t_in / dt - 1e-9), np.floor(t_out / dt + 1e-9)
        seen = k_in <= k_out
        starts, ends = k_in[seen] * dt, (k_out[seen] + 1) * dt
        order = np.argsort(starts)
        out.append(_merge(starts[order], ends[order]))
    return out


# --- interval algebra -------------------------------------------------------

def _merge(starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Union of intervals given sorted starts; returns an (n, 2) array."""
    if len(starts) == 0:
        return np.zeros((0, 2))
    run_end = np.maximum.accumulate(ends)
    new = np.ones(len(starts), dtype=bool)
    new[1:] = starts[1:] > run_end[:-1]
    idx = np.flatnonzero(new)
    merged_ends = run_end[np.append(idx[1:] - 1, len(starts) - 1)]
    return np.column_stack([starts[idx], merged_ends])


def _intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Intersection of two sorted disjoint interval lists."""
    i = j = 0
    out = []
    while i < len(a) and j < len(b):
        lo = max(a[i, 0], b[j, 0])
        hi = min(a[i, 1], b[j, 1])
        if lo < hi:
            out.append((lo, hi))
        if a[i, 1] < b[j, 1]:
            i += 1
        else:
            j += 1
    return np.array(out).reshape(-1, 2)


def _clip_length(iv: np.ndarray, lo: float, hi: float) -> float:
    if len(iv) == 0:
        return 0.0
    return float(np.clip(np.minimum(iv[:, 1], hi) - np.maximum(iv[:, 0], lo), 0.0, None).sum())


# --- one run ----------------------------------------------------------------

def simulate_run(params: SystemParams, sim: SimConfig, run_id: int,
                 fixed_bs: Sequence[tuple[float, float]] | None = None,
                 trace: bool = False) -> RunRecord:
    """Simulate one independent replication; see the module docstring."""
    consts = derive(params)
    seed_seq = run_seed_sequence(sim.rng_seed, run_id)
    rng = np.random.default_rng(seed_seq)
    R = params.los_range_R
    side = sim.arena_side

    if fixed_bs is None:
        n_bs = int(rng.poisson(params.bs_density_lambda_T * math.pi * R * R))
        r = R * np.sqrt(rng.uniform(size=n_bs))
        theta = rng.uniform(0.0, 2 * math.pi, size=n_bs)
    else:
        r = np.array([b[0] for b in fixed_bs], dtype=float)
        theta = np.array([b[1] for b in fixed_bs], dtype=float)
        n_bs = len(r)
    facing = rng.uniform(0.0, 2 * math.pi)
    active = np.mod(theta - facing, 2 * math.pi) >= params.self_block_angle_omega
    r, theta = r[active], theta[active]
    record = RunRecord(run_id=run_id, seed=sim.rng_seed, num_bs=n_bs,
                       num_active=int(active.sum()), covered=bool(active.any()))
    if not record.covered:
        return record

    n_blockers = int(rng.poisson(params.blocker_density_lambda_B * side * side))
    record.num_blockers = n_blockers
    t_lo = sim.warmup
    t_hi = sim.warmup + sim.run_duration
    horizon = t_hi + _TAIL
    legs = _legs(rng, n_blockers, side, params.blocker_speed_V, sim.move_time_bounds, horizon)
    ux, uy = np.cos(theta), np.sin(theta)
    length = consts.eff_fraction * r
    reach = float(length.max()) + (sim.blocker_diameter_wB / 2 if sim.blockage_mode == "geometric-disc" else 0.0)
    pieces = _pieces(*_near_legs(legs, side, reach), side)
    ts, dur, px, py, vx, vy = pieces
    qx, qy = px + vx * dur, py + vy * dur
    near = ((np.minimum(px, qx) <= reach) & (np.maximum(px, qx) >= -reach)
            & (np.minimum(py, qy) <= reach) & (np.maximum(py, qy) >= -reach) & (ts < horizon))
    pieces = tuple(arr[near] for arr in pieces)

    if sim.blockage_mode == "exponential-mark":
        hits = _crossings(pieces, ux, uy, length)
        link_iv = []
        for times in hits:
            ends = times + rng.exponential(params.inv_mu, size=len(times))
            link_iv.append(_merge(times, ends))
        record.link_crossings = np.array([int(((t >= t_lo) & (t < t_hi)).sum()) for t in hits])
    else:
        link_iv = _contact_intervals(pieces, ux, uy, length, sim.blocker_diameter_wB / 2, sim.time_step)
        record.link_crossings = np.array([int(((iv[:, 0] >= t_lo) & (iv[:, 0] < t_hi)).sum())
                                          for iv in link_iv])

    record.link_r = r
    record.link_blocked_fraction = np.array([_clip_length(iv, t_lo, t_hi) / sim.run_duration
                                             for iv in link_iv])
    record.link_interval_mean = np.array([
        float(np.mean(np.diff(iv[(iv[:, 0] >= t_lo) & (iv[:, 0] < t_hi)], axis=1)))
        if ((iv[:, 0] >= t_lo) & (iv[:, 0] < t_hi)).any() else math.nan
        for iv in link_iv])

    all_iv = link_iv[0]
    for iv in link_iv[1:]:
        all_iv = _intersect(all_iv, iv)
    in_window = (all_iv[:, 0] >= t_lo) & (all_iv[:, 0] < t_hi)
    events = all_iv[in_window]
    record.blocked_fraction = _clip_length(all_iv, t_lo, t_hi) / sim.run_duration
    record.num_events = len(events)
    record.frequency = len(events) / sim.run_duration
    if len(events):
        record.mean_duration = float(np.mean(events[:, 1] - events[:, 0]))
    if trace:
        rows = []
        for k, iv in enumerate(link_iv):
            for s, e in iv:
                rows.append((float(s), str(k), "block"))
                rows.append((float(e), str(k), "unblock"))
        for s, e in all_iv:
            rows.append((float(s), "all", "block"))
            rows.append((float(e), "all", "unblock"))
        record.trace = sorted(rows)
    return record


def _run_chunk(args):
    params, sim, ids, fixed_bs, trace = args
    return [simulate_run(params, sim, i, fixed_bs=fixed_bs, trace=trace) for i in ids]


def _estimate(name: str, values: list[float], seed: int) -> SimEstimate:
    arr = np.asarray(values, dtype=float)
    if len(arr) == 0:
        return SimEstimate(name, math.nan, math.nan, 0, seed)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return SimEstimate(name, float(arr.mean()), std, len(arr), seed)


def summarize(runs: list[RunRecord], seed: int) -> dict[str, SimEstimate]:
    """Across-run means and standard deviations over covered runs.

    Duration is averaged over covered runs that saw at least one
    all-blocked interval, since a run without one has no duration sample.
    """
    covered = [r for r in runs if r.covered]
    return {
        "prob": _estimate("prob", [r.blocked_fraction for r in covered], seed),
        "freq": _estimate("freq", [r.frequency for r in covered], seed),
        "duration": _estimate("duration", [r.mean_duration for r in covered if r.num_events], seed),
        "coverage": _estimate("coverage", [float(r.covered) for r in runs], seed),
    }


def run_open_park_sim(params: SystemParams, sim: SimConfig, workers: int = 1,
                      fixed_bs: Sequence[tuple[float, float]] | None = None,
                      trace: bool = False) -> SimResult:
    """Run ``sim.num_runs`` replications and summarise them.

    Results depend only on (params, sim) because every run owns a substream
    of ``sim.rng_seed``; ``workers`` only changes wall-clock time.
    """
    if params.static_density_lambda_S != 0:
        raise ParameterError("mobility simulation covers the open park only (static_density_lambda_S = 0)")
    if sim.arena_side < 2 * params.los_range_R:
        raise ParameterError(
            f"arena_side {sim.arena_side} < 2 R = {2 * params.los_range_R}: the disc must fit in the arena")
    ids = list(range(sim.num_runs))
    if workers <= 1:
        runs = _run_chunk((params, sim, ids, fixed_bs, trace))
    else:
        size = max(1, len(ids) // (workers * 8))
        chunks = [ids[i:i + size] for i in range(0, len(ids), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = [rec for part in pool.map(_run_chunk, [(params, sim, c, fixed_bs, trace) for c in chunks])
                    for rec in part]
    return SimResult(summarize(runs, sim.rng_seed), runs, sim.rng_seed)


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))
