"""Resampling schemes and the effective sample size.

Both schemes draw from the reserved `RESAMPLE_SLOT` of the counter RNG:

* multinomial: draw ``j`` uses counter ``j``; index = first ``i`` with
  ``u_j * total < cdf[i]``;
* systematic: one uniform ``u`` (counter 0); draw ``j`` takes the first
  ``i`` with ``u + j < N * cdf[i] / total``.  The comparison is done on the
  integer/fractional split of the scaled cdf, so ``u + j`` is never rounded.

``cdf`` is the running sum of the raw weights accumulated left to right and
``total`` its last entry.  Returned indices are 0-based.  Each scheme exists
twice: a numpy version (used by `run_vpf`) and a plain-Python loop
(``*_scalar``, used by `run_scalar_pf`); they return identical indices.
"""

import math
from bisect import bisect_left, bisect_right

import numpy as np

from .errors import ZeroWeightEnsemble
from .rng import RESAMPLE_SLOT

RESAMPLERS = ("multinomial", "systematic")


def _cdf(weights):
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) == 0:
        raise ValueError("weights must be a non-empty vector")
    if np.any(w < 0) or np.any(~np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    cdf = np.cumsum(w)
    if not cdf[-1] > 0.0:
        raise ZeroWeightEnsemble()
    return cdf


def _search(cdf, targets):
    # sorting the queries first keeps searchsorted cache-friendly for large N
    order = np.argsort(targets)  # ties map to the same index, so stability is irrelevant
    idx = np.empty(len(targets), dtype=np.int64)
    idx[order] = np.searchsorted(cdf, targets[order], side="right")
    # u * total can round up to total; fall back to the last positive weight
    last = int(np.searchsorted(cdf, cdf[-1], side="left"))
    np.minimum(idx, last, out=idx)
    return idx


def resample_multinomial(weights, n, rng, step):
    cdf = _cdf(weights)
    u = rng.uniforms_by_counter(step, RESAMPLE_SLOT, np.arange(n, dtype=np.uint64))
    return _search(cdf, u * cdf[-1])


def _grid_counts(c, u, n):
    """Grid points ``u + j`` (j = 0..n-1) lying below each scaled cdf value.

    With ``f = floor(c)`` and ``r = c - f`` (exact), ``u + j < c`` holds for
    ``j < f`` always, for ``j = f`` iff ``u < r``, and never beyond.
    """
    f = np.floor(c)
    return np.minimum(f + (u < c - f), n).astype(np.int64)


def resample_systematic(weights, n, rng, step):
    cdf = _cdf(weights)
    u = rng.uniform(step, RESAMPLE_SLOT, 0)
    c = np.minimum(cdf * n / cdf[-1], n)
    c[cdf >= cdf[-1]] = n  # keeps a zero-weight tail unreachable
    return np.searchsorted(_grid_counts(c, u, n), np.arange(n), side="right")


def resample(scheme, weights, n, rng, step):
    if scheme == "multinomial":
        return resample_multinomial(weights, n, rng, step)
    if scheme == "systematic":
        return resample_systematic(weights, n, rng, step)
    raise ValueError(f"unknown resampler {scheme!r}; choose from {RESAMPLERS}")


# -- plain-Python versions ------------------------------------------------------------

def _cdf_scalar(weights):
    cdf, acc = [], 0.0
    for w in weights:
        acc += w
        cdf.append(acc)
    if not acc > 0.0:
        raise ZeroWeightEnsemble()
    return cdf


def _last_positive(cdf):
    return bisect_left(cdf, cdf[-1])


def resample_multinomial_scalar(weights, n, rng, step):
    cdf = _cdf_scalar(weights)
    total, last = cdf[-1], _last_positive(cdf)
    return [
        min(bisect_right(cdf, rng.uniform(step, RESAMPLE_SLOT, j) * total), last)
        for j in range(n)
    ]


def resample_systematic_scalar(weights, n, rng, step):
    cdf = _cdf_scalar(weights)
    total = cdf[-1]
    u = rng.uniform(step, RESAMPLE_SLOT, 0)
    counts = []
    for acc in cdf:
        if acc >= total:
            counts.append(n)
            continue
        c = min(acc * n / total, n)
        f = math.floor(c)
        counts.append(min(f + (u < c - f), n))
    return [bisect_right(counts, j) for j in range(n)]


def resample_scalar(scheme, weights, n, rng, step):
    if scheme == "multinomial":
        return resample_multinomial_scalar(weights, n, rng, step)
    if scheme == "systematic":
        return resample_systematic_scalar(weights, n, rng, step)
    raise ValueError(f"unknown resampler {scheme!r}; choose from {RESAMPLERS}")


def ess(weights):
    """Effective sample size ``1 / sum(w_hat**2)`` of unnormalised weights."""
    w = np.asarray(weights, dtype=np.float64)
    total = w.sum()
    if not total > 0.0:
        raise ZeroWeightEnsemble()
    wn = w / total
    return float(1.0 / np.dot(wn, wn))
