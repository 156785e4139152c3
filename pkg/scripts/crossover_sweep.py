#!/usr/bin/env python3
"""Certified radius of ``G[0,K] p_f`` as the window K grows.

The sweep contrasts three monitors calibrated on the same 500 simulated
episodes: one fed per-step predicate predictions (pays for every extra
step in the window), one fed window-aggregate predictions (roughly flat
in K), and the per-coordinate interval observer baseline. The per-step
predictors carry i.i.d. noise with a conservative negative bias so their
one-sided errors are rare-but-real events whose window maxima grow with K.

Typical runs:

    python3 scripts/crossover_sweep.py
    python3 scripts/crossover_sweep.py --episodes 1000 --level 1 --csv sweep.csv
"""

import argparse
import sys

import numpy as np

from ptmon.benchmark import (
    DEFAULT_INTERVALS,
    PREDICATE_NAMES,
    CrossroadConfig,
    PredictorStub,
    simulate_episode,
)
from ptmon.conformal import ScoreConfig, calibrate, observer_calibrate
from ptmon.fragment import build_depth1_dictionary
from ptmon.logic import Always, Predicate, TimeInterval
from ptmon.metrics import horizon_sweep, write_sweep_csv


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=500)
    ap.add_argument("--horizon", type=int, default=30, help="steps per episode")
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--level", type=int, default=2, choices=(1, 2))
    ap.add_argument("--seed", type=int, default=7000, help="first episode seed")
    ap.add_argument("--tau-seed", type=int, default=3)
    ap.add_argument("--roll-scale", type=float, default=0.25)
    ap.add_argument("--roll-bias", type=float, default=-0.3125)
    ap.add_argument("--sem-scale", type=float, default=0.12)
    ap.add_argument("--ks", default="1,2,4,8,16")
    ap.add_argument("--csv", help="also write the sweep rows here")
    args = ap.parse_args(argv)

    ks = [int(k) for k in args.ks.split(",")]
    d = build_depth1_dictionary(7, DEFAULT_INTERVALS, PREDICATE_NAMES)
    cfg = CrossroadConfig(T=args.horizon)
    print(f"simulating {args.episodes} episodes (T={cfg.T}) ...", flush=True)
    eps = [simulate_episode(cfg, args.seed + i) for i in range(args.episodes)]

    stub_roll = PredictorStub(
        mode="predicates", scale=args.roll_scale, bias=args.roll_bias, seed=21
    )
    stub_sem = PredictorStub(
        mode="semantic", scale=args.sem_scale, bias=0.0, seed=22, dictionary=d
    )
    hist_dim = 7 * (d.K_max + 1)
    mon_roll = calibrate(
        eps,
        stub_roll,
        ScoreConfig(sigma=np.ones(hist_dim), alpha=args.alpha, level=args.level),
        (7, d.K_max),
        tau_seed=args.tau_seed,
    )
    mon_sem = calibrate(
        eps,
        stub_sem,
        ScoreConfig(sigma=np.ones(d.r), alpha=args.alpha, level=args.level),
        d,
        tau_seed=args.tau_seed,
    )
    monitors = {"rolling": mon_roll, "semantic": mon_sem}
    if args.level == 2:
        widest = Always(TimeInterval(0, d.K_max), Predicate("p_f", 1))
        monitors["observer"] = observer_calibrate(
            eps, stub_roll, widest, args.alpha, k_max=d.K_max, tau_seed=args.tau_seed
        )

    rows = horizon_sweep(monitors, ks, Predicate("p_f", 1))
    q = {(r.monitor, r.k): r.q_phi for r in rows}

    names = list(monitors)
    print(f"\nradius of G[0,K] p_f   (alpha={args.alpha}, level {args.level})")
    print("  K  " + "".join(f"{n:>12}" for n in names))
    for k in ks:
        cells = [q.get((n, k)) for n in names]
        print(f"{k:3d}  " + "".join("         n/a" if c is None else f"{c:12.4f}" for c in cells))
    for n in names:
        lo, hi = q.get((n, ks[0])), q.get((n, ks[-1]))
        if lo and hi:
            print(f"{n}: q(K={ks[-1]}) / q(K={ks[0]}) = {hi / lo:.2f}")

    if args.csv:
        write_sweep_csv(rows, args.csv)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
