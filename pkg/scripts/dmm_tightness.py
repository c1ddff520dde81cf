"""Bound gap and termination mass on the drunk man and mouse model vs horizon."""

import argparse

from fkppg.experiments import bound_gap as gap, dmm_horizon_reports as horizon_reports


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=10 ** 5)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--horizons", default="100,250,500,1000")
    args = ap.parse_args()
    horizons = [int(x) for x in args.horizons.split(",")]
    print("seed  t  beta_lower  beta_upper  gap  p_term  ess")
    for seed in range(1, args.seeds + 1):
        reps = horizon_reports(args.N, seed, horizons)
        for t in horizons:
            r = reps[t]
            print(f"{seed} {t} {r.beta_lower:.6f} {r.beta_upper:.6f} {gap(r):.6f} "
                  f"{r.p_term:.6f} {r.ess:.1f}", flush=True)


if __name__ == "__main__":
    main()
