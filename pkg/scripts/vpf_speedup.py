"""Wall time of the vectorised engine vs the per-particle loop on DMM.

The scalar loop at N = 10**6 costs tens of seconds per step, so by default it
runs only a short prefix of the same run.  A horizon-t run does all the work
of every shorter run with the same seed, so the prefix time is a lower bound
on the full scalar time and the comparison is conservative.
"""

import argparse
import time

from fkppg.bench import build_dmm
from fkppg.engine import run_scalar_pf, run_vpf


def timed(fn, *args, **kw):
    start = time.perf_counter()
    fn(*args, **kw)
    return time.perf_counter() - start


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=10 ** 6)
    ap.add_argument("--t", type=int, default=100)
    ap.add_argument("--scalar-t", type=int, default=3, help="horizon of the scalar prefix run")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    g = build_dmm().ppg()
    vpf = timed(run_vpf, g, args.t, args.N, args.seed, threads=args.threads)
    scalar = timed(run_scalar_pf, g, args.scalar_t, args.N, args.seed)
    vpf_step = vpf / max(args.t - 1, 1)
    scalar_step = scalar / max(args.scalar_t - 1, 1)
    print(f"vpf    t={args.t:<5d} N={args.N}  {vpf:8.2f} s  ({vpf_step * 1e3:.1f} ms/step)")
    print(f"scalar t={args.scalar_t:<5d} N={args.N}  {scalar:8.2f} s  ({scalar_step * 1e3:.1f} ms/step)")
    print(f"vpf full run <= scalar prefix: {vpf <= scalar}")
    print(f"per-step speedup: {scalar_step / vpf_step:.1f}x")


if __name__ == "__main__":
    main()
