"""Seed sweeps comparing particle estimates with the exact oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

from .bench import BenchModel, build_dmm, build_rw1, fuzz_models
from .engine import estimate, infer, run_vpf
from .oracle import enumerate_paths, semantics_bounds

FLOOR = 1e-12  # absorbs float noise when sigma_hat is exactly zero


@dataclass
class SweepResult:
    name: str
    t: int
    oracle: float
    estimates: List[float] = field(default_factory=list)
    h_std: List[float] = field(default_factory=list)
    ess: List[float] = field(default_factory=list)

    def run_failures(self, k=4.0):
        """Seeds whose estimate misses the oracle by more than ``k * sigma_hat / sqrt(ESS)``."""
        return [
            i
            for i, (e, s, n) in enumerate(zip(self.estimates, self.h_std, self.ess))
            if abs(e - self.oracle) > k * s / math.sqrt(n) + FLOOR
        ]

    @property
    def mean(self):
        return math.fsum(self.estimates) / len(self.estimates)

    def mean_tolerance(self, k=2.0):
        s = math.fsum(self.h_std) / len(self.h_std)
        n = math.fsum(self.ess) / len(self.ess)
        return k * s / math.sqrt(len(self.estimates) * n) + FLOOR

    def mean_fails(self, k=2.0):
        return abs(self.mean - self.oracle) > self.mean_tolerance(k)


def sweep_model(bm: BenchModel, seeds, n, resampler="systematic", engine="vpf") -> SweepResult:
    g = bm.ppg(samples=2_000)
    q = bm.lifted_query(g)
    exact = semantics_bounds(enumerate_paths(g, bm.t), q).beta_lower
    res = SweepResult(bm.name, bm.t, exact)
    for seed in seeds:
        rep = infer(g, q, bm.t, n, seed, engine, resampler)
        res.estimates.append(rep.estimate)
        res.h_std.append(rep.h_std)
        res.ess.append(rep.ess)
    return res


def consistency_models(fuzzed=50):
    """RW1 followed by `fuzzed` random discrete graphs (fixed seed order)."""
    yield build_rw1()
    for _, bm in fuzz_models(fuzzed):
        yield bm


def dmm_horizon_reports(n, seed, horizons, resampler="multinomial"):
    """`estimate` at each horizon, read off a single run up to max(horizons)."""
    bm = build_dmm()
    g = bm.ppg()
    q = bm.lifted_query(g)
    wanted, out = set(horizons), {}

    def grab(e):
        if e.step in wanted:
            out[e.step] = estimate(e, g, q)

    run_vpf(g, max(horizons), n, seed, resampler, on_step=grab)
    return out


def bound_gap(rep):
    """``beta_upper - beta_lower``, or None when the upper bound is unavailable."""
    return None if rep.beta_upper is None else rep.beta_upper - rep.beta_lower
