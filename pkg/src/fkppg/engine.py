"""Bootstrap particle filtering on program graphs.

Two engines implement the same algorithm:

* `run_scalar_pf` loops over particles one state at a time;
* `run_vpf` keeps the ensemble as arrays ``V`` (N x m stores), ``Z`` (N
  checkpoint ids) and ``W`` (N weights) and performs every step as
  whole-array operations driven by one boolean mask per transition.

Both start all particles at the zero store on the initial checkpoint, then run
``t - 1`` rounds.  Each round resamples on the current weights and moves every
particle one transition; the new weight is the score of the new state.  Particle ``j`` at step ``k`` draws from the RNG address
``(seed, k, j, statement index)``, so the two engines produce bit-identical
ensembles, independent of how the vectorised engine chunks its work.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dist import execute_measure_vector
from .errors import PartitionViolation, ScoreOutOfRange, ZeroWeightEnsemble
from .expr import eval_predicate_vector, eval_vector
from .oracle import EXACT_TOL
from .ppg import LiftedQuery, Ppg, combined_score, kernel_step
from .resample import RESAMPLERS, resample, resample_scalar
from .rng import CounterRNG

ENGINES = ("scalar", "vpf")


@dataclass
class ParticleEnsemble:
    V: np.ndarray  # (N, m) stores
    Z: np.ndarray  # (N,) checkpoint ids
    W: np.ndarray  # (N,) per-step weights in [0, 1]
    step: int

    @property
    def n(self):
        return len(self.W)

    def same_as(self, other) -> bool:
        """Bitwise equality of (V, Z, W)."""
        return (
            self.V.shape == other.V.shape
            and self.V.tobytes() == other.V.tobytes()
            and self.Z.tobytes() == other.Z.tobytes()
            and self.W.tobytes() == other.W.tobytes()
        )


@dataclass
class EstimateReport:
    estimate: float
    beta_lower: float
    beta_upper: Optional[float]
    alpha: Optional[float]  # None when no particle has terminated
    p_term: float
    ess: float
    h_std: float  # weighted standard deviation of h over the ensemble
    n: int
    t: Optional[int] = None
    seed: Optional[int] = None
    engine: Optional[str] = None
    resampler: Optional[str] = None
    wall_time: Optional[float] = None
    collapsed_at_step: Optional[int] = None


def _check_args(t, n, resampler):
    if t < 1:
        raise ValueError("horizon t must be >= 1")
    if n < 1:
        raise ValueError("particle count N must be >= 1")
    if resampler not in RESAMPLERS:
        raise ValueError(f"unknown resampler {resampler!r}; choose from {RESAMPLERS}")


# -- scalar engine -------------------------------------------------------------------

def run_scalar_pf(g: Ppg, t: int, n: int, seed: int, resampler: str = "multinomial"):
    _check_args(t, n, resampler)
    rng = CounterRNG(seed)
    s0 = g.initial_state()
    states = [s0] * n
    weights = [combined_score(g, s0)] * n
    if not any(weights):
        raise ZeroWeightEnsemble(step=1)
    for k in range(2, t + 1):
        idx = resample_scalar(resampler, weights, n, rng, k)
        states = [kernel_step(g, states[i], rng, k, j) for j, i in enumerate(idx)]
        weights = [combined_score(g, s) for s in states]
        if not any(weights):
            raise ZeroWeightEnsemble(step=k)
    return ParticleEnsemble(
        V=np.array([s.store for s in states], dtype=np.float64).reshape(n, g.m),
        Z=np.array([s.checkpoint for s in states], dtype=np.int64),
        W=np.array(weights, dtype=np.float64),
        step=t,
    )


# -- vectorised engine ---------------------------------------------------------------

def transition_masks(g: Ppg, V, Z):
    """One boolean mask per transition: ``guard(V) & (Z == source)``.

    Returns ``[(source, transition, mask)]``.  The guard is evaluated only on
    rows sitting at its source checkpoint.  Raises `PartitionViolation` if
    some row has zero or several enabled transitions.
    """
    out = []
    for cid in g.checkpoints:
        at = np.flatnonzero(Z == cid)
        trs = g.transitions[cid]
        if cid == g.nil:
            mask = np.zeros(len(Z), dtype=bool)
            mask[at] = True
            out.append((cid, trs[0], mask))
            continue
        enabled = np.zeros(len(at), dtype=np.int64)
        sub = V[at]
        for tr in trs:
            mask = np.zeros(len(Z), dtype=bool)
            if len(at):
                hit = eval_predicate_vector(tr.guard, sub)
                enabled += hit
                mask[at[hit]] = True
            out.append((cid, tr, mask))
        wrong = enabled != 1
        if wrong.any():
            j = int(at[np.flatnonzero(wrong)[0]])
            raise PartitionViolation(cid, V[j], enabled[np.flatnonzero(wrong)[0]])
    return out


def _advance_chunk(g, V, Z, rng, step, lo, hi):
    """Advance rows ``lo:hi`` of (V, Z) in place and return their new weights."""
    Vc, Zc = V[lo:hi], Z[lo:hi]
    moves = []
    for cid, tr, mask in transition_masks(g, Vc, Zc):
        if cid == g.nil or not mask.any():
            continue
        rows = np.flatnonzero(mask)
        sub = Vc[rows]
        execute_measure_vector(tr.body, sub, rng, step, rows + lo)
        moves.append((rows, sub, tr.target))
    for rows, sub, target in moves:
        Vc[rows] = sub
        Zc[rows] = target
    return _scores(g, Vc, Zc)


def _scores(g, V, Z):
    W = np.ones(len(Z), dtype=np.float64)
    for cid, e in g.scores.items():
        if e is None:
            continue
        rows = np.flatnonzero(Z == cid)
        if not len(rows):
            continue
        w = eval_vector(e, V[rows])
        bad = ~((w >= 0.0) & (w <= 1.0))
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            raise ScoreOutOfRange(
                f"score of checkpoint {cid} is {float(w[j])!r} at store {V[rows[j]].tolist()}"
            )
        W[rows] = w
    return W


def run_vpf(
    g: Ppg,
    t: int,
    n: int,
    seed: int,
    resampler: str = "multinomial",
    threads: int = 1,
    on_step=None,
):
    """Vectorised particle filter; `threads` splits each step into row chunks.

    The result never depends on `threads`.  If given, ``on_step(ensemble)``
    is called after every step ``k = 1..t``; the ensemble it sees at step
    ``k`` is exactly the result of a run with horizon ``k``.
    """
    _check_args(t, n, resampler)
    rng = CounterRNG(seed)
    V = np.zeros((n, g.m), dtype=np.float64)
    Z = np.full(n, g.init, dtype=np.int64)
    W = _scores(g, V, Z)
    if not W.any():
        raise ZeroWeightEnsemble(step=1)
    if on_step is not None:
        on_step(ParticleEnsemble(V, Z, W, 1))
    threads = max(1, min(int(threads), n))
    bounds = np.linspace(0, n, threads + 1).astype(np.int64)
    chunks = list(zip(bounds[:-1].tolist(), bounds[1:].tolist()))
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for k in range(2, t + 1):
            idx = resample(resampler, W, n, rng, k)
            V, Z = V[idx], Z[idx]
            if pool is None:
                W = _advance_chunk(g, V, Z, rng, k, 0, n)
            else:
                futures = [
                    pool.submit(_advance_chunk, g, V, Z, rng, k, lo, hi) for lo, hi in chunks
                ]
                W = np.concatenate([f.result() for f in futures])
            if not W.any():
                raise ZeroWeightEnsemble(step=k)
            if on_step is not None:
                on_step(ParticleEnsemble(V, Z, W, k))
    finally:
        if pool is not None:
            pool.shutdown()
    return ParticleEnsemble(V=V, Z=Z, W=W, step=t)


# -- estimation ----------------------------------------------------------------------

def ensemble_query_values(e: ParticleEnsemble, g: Ppg, query: LiftedQuery):
    """``h`` on every particle: the query on terminated particles, 0 elsewhere."""
    h = np.zeros(e.n, dtype=np.float64)
    term = e.Z == g.nil
    if term.any():
        h[term] = query.values(e.V[term])
    return h


def estimate(e: ParticleEnsemble, g: Ppg, query: LiftedQuery) -> EstimateReport:
    """Weighted-sum estimate of the query and the induced bounds."""
    total = float(np.sum(e.W))
    if not total > 0.0:
        raise ZeroWeightEnsemble(step=e.step)
    wn = e.W / total
    h = ensemble_query_values(e, g, query)
    point = float(np.sum(wn * h))
    p_term = float(np.sum(wn[e.Z == g.nil]))
    p_term = min(p_term, 1.0)
    ess = min(max(1.0 / float(np.sum(wn * wn)), 1.0), float(e.n))
    h_std = math.sqrt(max(float(np.sum(wn * (h - point) ** 2)), 0.0))
    alpha = 1.0 / p_term if p_term > 0.0 else None
    if alpha is None:
        beta_upper = None
    elif abs(alpha - 1.0) <= EXACT_TOL:
        beta_upper = point
    elif query.bound is None:
        beta_upper = None
    else:
        beta_upper = point * alpha + query.bound * (alpha - 1.0)
    return EstimateReport(
        estimate=point,
        beta_lower=point,
        beta_upper=beta_upper,
        alpha=alpha,
        p_term=p_term,
        ess=ess,
        h_std=h_std,
        n=e.n,
        t=e.step,
    )


def infer(
    g: Ppg,
    query: LiftedQuery,
    t: int,
    n: int,
    seed: int,
    engine: str = "vpf",
    resampler: str = "multinomial",
    threads: int = 1,
) -> EstimateReport:
    """Run one engine and estimate; `wall_time` (seconds) covers the run."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    start = time.perf_counter()
    if engine == "vpf":
        ens = run_vpf(g, t, n, seed, resampler, threads)
    else:
        ens = run_scalar_pf(g, t, n, seed, resampler)
    wall = time.perf_counter() - start
    report = estimate(ens, g, query)
    report.seed, report.engine, report.resampler, report.wall_time = seed, engine, resampler, wall
    return report
