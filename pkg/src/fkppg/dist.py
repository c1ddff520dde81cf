"""Sampling and support enumeration for the distribution catalog.

Every sampling statement consumes exactly one uniform, addressed by the
statement's position in its transition body.  Transforms from that uniform:

=============  ===============================================================
bernoulli(p)   1 if u < p else 0; p must lie in [0, 1]
uniform(a, b)  a + (b - a) * u; a < b, both finite
choice(v...)   v[floor(u * k)] (each value with probability 1/k)
normal(m, s)   m + s * Phi^-1(u') when s in (0, inf) and m finite;
               otherwise the deterministic fallback: m if m is finite, else 0
=============  ===============================================================

``u' = (floor(u * 2**52) + 1/2) / 2**52`` lies strictly inside (0, 1), so the
inverse normal CDF stays finite.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

from .dsl import Assign, DistSpec, Sample
from .errors import ContinuousDistribution, InvalidParameter, PpgError
from .expr import compile_scalar, eval_vector

TWO_52 = 2.0 ** 52


def _open_unit(u):
    """Map a uniform on the 2**-53 grid to the midpoint grid (k + 1/2) / 2**52.

    Every step is exact, and the result lies strictly inside (0, 1), so the
    inverse normal CDF stays finite.
    """
    return (math.floor(u * TWO_52) + 0.5) / TWO_52


def _open_unit_vector(u):
    return (np.floor(u * TWO_52) + 0.5) / TWO_52


def _bad_bernoulli(p):
    return InvalidParameter(f"bernoulli parameter {p!r} is outside [0, 1]")


def _bad_uniform(a, b):
    return InvalidParameter(f"uniform({a!r}, {b!r}) needs finite bounds with a < b")


def draw(kind, params, u):
    """Map a uniform `u` in [0, 1) to a draw, given evaluated parameters."""
    if kind == "bernoulli":
        p = params[0]
        if not 0.0 <= p <= 1.0:
            raise _bad_bernoulli(p)
        return 1.0 if u < p else 0.0
    if kind == "choice":
        k = len(params)
        return params[min(int(u * k), k - 1)]
    if kind == "uniform":
        a, b = params
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise _bad_uniform(a, b)
        return a + (b - a) * u
    if kind == "normal":
        mean, sd = params
        if math.isfinite(mean) and 0.0 < sd < math.inf:
            return mean + sd * float(ndtri(_open_unit(u)))
        return mean if math.isfinite(mean) else 0.0
    raise PpgError(f"unknown distribution {kind!r}")


def draw_vector(kind, params, u):
    """Vectorised `draw`; `params` are arrays (or scalars) aligned with `u`."""
    if kind == "bernoulli":
        p = params[0]
        bad = ~((p >= 0.0) & (p <= 1.0))
        if np.any(bad):
            raise _bad_bernoulli(float(np.broadcast_to(p, u.shape)[bad][0]))
        return np.where(u < p, 1.0, 0.0)
    if kind == "choice":
        k = len(params)
        pick = np.minimum((u * k).astype(np.int64), k - 1)
        table = np.stack([np.broadcast_to(v, u.shape) for v in params])
        return table[pick, np.arange(u.shape[0])]
    if kind == "uniform":
        a, b = (np.broadcast_to(x, u.shape) for x in params)
        bad = ~(np.isfinite(a) & np.isfinite(b) & (a < b))
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            raise _bad_uniform(float(a[j]), float(b[j]))
        return a + (b - a) * u
    if kind == "normal":
        mean, sd = (np.broadcast_to(x, u.shape) for x in params)
        ok = np.isfinite(mean) & (sd > 0.0) & (sd < math.inf)
        fallback = np.where(np.isfinite(mean), mean, 0.0)
        with np.errstate(invalid="ignore", over="ignore"):
            z = mean + sd * ndtri(_open_unit_vector(u))
        return np.where(ok, z, fallback)
    raise PpgError(f"unknown distribution {kind!r}")


def _tag(exc, i):
    """Re-raise `exc` with the offending statement index in the message."""
    try:
        tagged = type(exc)(f"statement {i}: {exc}")
    except TypeError:
        return exc
    tagged.statement = i
    return tagged


def sample_dist(d: DistSpec, store, rng, step, slot, counter=0):
    params = [compile_scalar(p)(store) for p in d.params]
    return draw(d.kind, params, rng.uniform(step, slot, counter))


def execute_measure(body, store, rng, step, slot):
    """Run a statement list on one store; returns the new store as a tuple."""
    if not body:
        return tuple(store)
    v = list(store)
    for i, s in enumerate(body):
        try:
            if isinstance(s, Sample):
                v[s.index] = sample_dist(s.dist, v, rng, step, slot, i)
            else:
                v[s.index] = compile_scalar(s.expr)(v)
        except PpgError as exc:
            raise _tag(exc, i) from None
    return tuple(v)


def execute_measure_vector(body, V, rng, step, slots):
    """Run a statement list on every row of `V` in place.

    `slots` holds the particle index of each row; row ``r`` sees exactly the
    uniforms `execute_measure` would see for ``slot=slots[r]``.
    """
    for i, s in enumerate(body):
        try:
            if isinstance(s, Sample):
                params = [eval_vector(p, V) for p in s.dist.params]
                u = rng.uniforms(step, slots, i)
                V[:, s.index] = draw_vector(s.dist.kind, params, u)
            else:
                V[:, s.index] = eval_vector(s.expr, V)
        except PpgError as exc:
            raise _tag(exc, i) from None
    return V


def enumerate_support(body, store):
    """All outcome stores of a discrete statement list with their probabilities.

    Identical outcome stores are merged; zero-probability outcomes are dropped.
    Order is deterministic (first-reached first).
    """
    outcomes = {tuple(float(x) for x in store): 1.0}
    for i, s in enumerate(body):
        nxt = {}
        for v, prob in outcomes.items():
            try:
                for value, p in _branches(s, v, i):
                    if p == 0.0:
                        continue
                    w = list(v)
                    w[s.index] = value
                    key = tuple(w)
                    nxt[key] = nxt.get(key, 0.0) + prob * p
            except PpgError as exc:
                if isinstance(exc, ContinuousDistribution):
                    raise
                raise _tag(exc, i) from None
        outcomes = nxt
    return list(outcomes.items())


def _branches(s, v, i):
    if isinstance(s, Assign):
        return [(compile_scalar(s.expr)(v), 1.0)]
    d = s.dist
    if not d.discrete:
        raise ContinuousDistribution(
            f"statement {i} ({s.var} ~ {d.kind}) is continuous; exact enumeration "
            "needs bernoulli/choice only"
        )
    params = [compile_scalar(p)(v) for p in d.params]
    if d.kind == "bernoulli":
        p = params[0]
        if not 0.0 <= p <= 1.0:
            raise _bad_bernoulli(p)
        return [(0.0, 1.0 - p), (1.0, p)]
    k = len(params)
    return [(x, 1.0 / k) for x in params]
