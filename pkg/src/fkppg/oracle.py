"""Exact truncated-trace semantics for graphs with finite-support sampling.

`enumerate_paths` expands every length-``t`` path from the initial state with
its exact probability and weight.  Everything else is a finite sum over that
table:

* ``E_t[F] = sum(path.probability * F(path))`` (`expectation_t`),
* the filtering distribution: final states weighted by probability * weight,
  normalised (`filtering_distribution`),
* lower/upper bounds on the normalised expectation of a lifted query
  (`semantics_bounds`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from .errors import NotTerminatedYet, PathExplosion, ZeroTotalWeight
from .ppg import LiftedQuery, Path, Ppg, State, combined_score, kernel_support

DEFAULT_CAP = 10 ** 6
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class PathTable:
    horizon: int
    paths: Tuple[Path, ...]
    nil: int
    pruned_zero: bool
    pruned_mass: float  # probability carried by dropped zero-weight prefixes
    explored: int  # prefixes created during the expansion

    @property
    def total_probability(self):
        return sum(p.probability for p in self.paths)


@dataclass(frozen=True)
class BoundsReport:
    beta_lower: float
    beta_upper: Optional[float]  # None when no upper bound M is known and alpha > 1
    alpha: float
    mass_terminated: float
    mass_total: float
    exact: bool

    @property
    def point(self):
        return self.beta_lower


def enumerate_paths(g: Ppg, t: int, cap: int = DEFAULT_CAP, prune: bool = True) -> PathTable:
    if t < 1:
        raise ValueError("horizon t must be >= 1")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    s0 = g.initial_state()
    live = [((s0,), 1.0, combined_score(g, s0))]
    explored = 1
    pruned_mass = 0.0
    if prune and live[0][2] == 0.0:
        pruned_mass, live = 1.0, []
    for depth in range(2, t + 1):
        nxt = []
        for states, prob, weight in live:
            for s, p in kernel_support(g, states[-1]):
                explored += 1
                q = prob * p
                w = weight * combined_score(g, s)
                if prune and (q == 0.0 or w == 0.0):
                    pruned_mass += q
                    continue
                nxt.append((states + (s,), q, w))
                if len(nxt) > cap:
                    raise PathExplosion(depth, len(nxt), cap)
        live = nxt
    return PathTable(
        horizon=t,
        paths=tuple(Path(st, p, w) for st, p, w in live),
        nil=g.nil,
        pruned_zero=prune,
        pruned_mass=pruned_mass,
        explored=explored,
    )


# -- path functionals ---------------------------------------------------------------

def first_termination(path: Path, nil: int) -> Optional[State]:
    for s in path.states:
        if s.checkpoint == nil:
            return s
    return None


def weight(path: Path) -> float:
    return path.weight


def terminated_weight(nil: int) -> Callable[[Path], float]:
    """``1{terminated within t} * w_t``."""
    return lambda path: path.weight if first_termination(path, nil) is not None else 0.0


def lifted_weight(query: LiftedQuery, nil: int) -> Callable[[Path], float]:
    """``h(first nil state) * w_t``, zero on paths that have not terminated."""

    def f(path):
        s = first_termination(path, nil)
        if s is None or path.weight == 0.0:
            return 0.0
        return query.value(s.store) * path.weight

    return f


def expectation_t(table: PathTable, functional: Callable[[Path], float]) -> float:
    return sum(p.probability * functional(p) for p in table.paths)


# -- filtering distribution and bounds ---------------------------------------------

def filtering_distribution(table: PathTable) -> dict:
    """Final-state marginal of the reweighted path measure, ``{State: mass}``."""
    masses = {}
    for p in table.paths:
        m = p.probability * p.weight
        if m:
            s = p.states[-1]
            masses[s] = masses.get(s, 0.0) + m
    total = sum(masses.values())
    if not total > 0.0:
        raise ZeroTotalWeight(f"total weight at horizon {table.horizon} is zero")
    return {s: m / total for s, m in masses.items()}


def semantics_bounds(table: PathTable, query: LiftedQuery) -> BoundsReport:
    nil = table.nil
    mass_total = expectation_t(table, weight)
    mass_term = expectation_t(table, terminated_weight(nil))
    if not mass_term > 0.0:
        raise NotTerminatedYet(
            f"no positively weighted path has terminated by t={table.horizon}"
        )
    phi = filtering_distribution(table)
    beta_lower = sum(
        mass * query.value(s.store) for s, mass in phi.items() if s.checkpoint == nil
    )
    alpha = mass_total / mass_term
    beta_upper = _upper(beta_lower, alpha, query.bound)
    return BoundsReport(
        beta_lower=beta_lower,
        beta_upper=beta_upper,
        alpha=alpha,
        mass_terminated=mass_term,
        mass_total=mass_total,
        exact=abs(alpha - 1.0) <= EXACT_TOL,
    )


def _upper(beta_lower, alpha, bound):
    if abs(alpha - 1.0) <= EXACT_TOL:
        return beta_lower
    if bound is None:
        return None
    return beta_lower * alpha + bound * (alpha - 1.0)


def shortcut_value(table: PathTable, query: LiftedQuery) -> float:
    """``E_t[f_t * w_t] / E_t[w_t]``: the exact value once all mass has terminated."""
    return expectation_t(table, lifted_weight(query, table.nil)) / expectation_t(
        table, weight
    )
