"""Compare the random-waypoint simulation with the open-park closed forms.

    python3 scripts/validate_simulation.py --blocker-density 0.01 --runs 2000 --duration 600

Prints, for each (BS density, self-blockage angle), the simulated
conditional blockage probability, frequency and duration with their
standard errors next to the closed-form values, plus the per-BS-count
duration check 1 / (n mu).
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from mmblockage import los
from mmblockage.mobility import SimConfig, default_workers, run_open_park_sim
from mmblockage.params import SystemParams, derive


def compare(params: SystemParams, sim: SimConfig, workers: int) -> dict:
    consts = derive(params)
    res = run_open_park_sim(params, sim, workers=workers)
    analytic = {"prob": los.blockage_prob_open_park(consts)[1],
                "freq": los.expected_frequency(consts),
                "duration": los.expected_duration_los(consts)}
    out = {}
    for name, ref in analytic.items():
        est = res.estimates[name]
        out[name] = (est.point_estimate, est.std_error, ref,
                     (est.point_estimate - ref) / est.std_error, est.point_estimate / ref - 1)
    per_n = {}
    for n in (1, 2, 3):
        d = np.array([r.mean_duration for r in res.runs if r.num_active == n and r.num_events])
        if len(d) > 1:
            per_n[n] = (d.mean(), d.std(ddof=1) / math.sqrt(len(d)), params.inv_mu / n)
    out["per_n"] = per_n
    return out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--blocker-density", type=float, default=0.01)
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--duration", type=float, default=600.0)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--workers", type=int, default=default_workers())
    args = ap.parse_args(argv)
    sim = SimConfig(num_runs=args.runs, run_duration=args.duration, rng_seed=args.seed)
    for lam_t in (100, 200, 300):
        for omega_deg in (0, 60):
            params = SystemParams(blocker_density_lambda_B=args.blocker_density,
                                  bs_density_lambda_T=lam_t * 1e-6,
                                  self_block_angle_omega=math.radians(omega_deg))
            t0 = time.perf_counter()
            out = compare(params, sim, args.workers)
            print(f"lambda_T={lam_t} BS/km^2 omega={omega_deg} deg ({time.perf_counter() - t0:.0f} s)")
            for name in ("prob", "freq", "duration"):
                est, se, ref, z, rel = out[name]
                print(f"  {name:<9} sim {est:.4g} +- {se:.2g}  closed form {ref:.4g}  z={z:+.2f}  rel={rel:+.1%}")
            for n, (m, se, ref) in out["per_n"].items():
                print(f"  duration | n={n}: {m:.4f} +- {se:.4f} vs 1/(n mu) = {ref:.4f}")


if __name__ == "__main__":
    main()
