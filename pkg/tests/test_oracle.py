import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fkppg.bench import build_dmm, build_rw1, random_discrete_source
from fkppg.errors import ContinuousDistribution, NotTerminatedYet, PathExplosion, ZeroTotalWeight
from fkppg.oracle import (
    _upper,
    enumerate_paths,
    expectation_t,
    filtering_distribution,
    lifted_weight,
    semantics_bounds,
    shortcut_value,
    terminated_weight,
    weight,
)
from fkppg.ppg import LiftedQuery, State, combined_score, kernel_support, load_model

TOL = 1e-12


@pytest.fixture(scope="module")
def rw1():
    bm = build_rw1()
    g = bm.ppg()
    return g, bm.lifted_query(g)


def test_rw1_quantities(rw1):
    g, q = rw1
    table = enumerate_paths(g, 4)
    assert len(table.paths) == 2
    assert abs(expectation_t(table, lifted_weight(q, g.nil)) - 0.25) <= TOL
    assert abs(expectation_t(table, weight) - 0.75) <= TOL
    assert abs(expectation_t(table, terminated_weight(g.nil)) - 0.75) <= TOL
    rep = semantics_bounds(table, q)
    assert rep.exact and rep.alpha == 1.0
    assert abs(rep.beta_lower - 1 / 3) <= TOL and rep.beta_upper == rep.beta_lower


def test_rw1_filtering(rw1):
    g, _ = rw1
    phi = filtering_distribution(enumerate_paths(g, 4))
    assert phi.keys() == {State((0.0, 0.0), 2), State((1.0, 1.0), 2)}
    assert abs(phi[State((0.0, 0.0), 2)] - 2 / 3) <= TOL
    assert abs(phi[State((1.0, 1.0), 2)] - 1 / 3) <= TOL


def test_rw1_before_termination(rw1):
    g, q = rw1
    # at t = 3 the path through node 3 has not reached nil yet
    rep = semantics_bounds(enumerate_paths(g, 3), q)
    assert rep.alpha == pytest.approx(1.5, abs=TOL)
    assert rep.beta_lower == pytest.approx(0.0, abs=TOL)
    assert rep.beta_upper == pytest.approx(0.0 * 1.5 + 1.0 * 0.5, abs=TOL)
    with pytest.raises(NotTerminatedYet):
        semantics_bounds(enumerate_paths(g, 2), q)


def test_unconditioned(rw1):
    g = build_rw1(False).ppg()
    rep = semantics_bounds(enumerate_paths(g, 4), rw1[1])
    assert abs(rep.beta_lower - 0.5) <= TOL


@pytest.mark.parametrize("t", [4, 5, 6, 8, 16])
def test_stable_after_termination(rw1, t):
    g, q = rw1
    table = enumerate_paths(g, t)
    assert semantics_bounds(table, q) == semantics_bounds(enumerate_paths(g, 4), q)
    assert abs(shortcut_value(table, q) - 1 / 3) <= TOL


def test_probability_conservation_without_pruning(rw1):
    g, _ = rw1
    full = enumerate_paths(g, 6, prune=False)
    assert abs(full.total_probability - 1.0) <= TOL and full.pruned_mass == 0.0
    pruned = enumerate_paths(g, 6)
    assert abs(pruned.total_probability + pruned.pruned_mass - 1.0) <= TOL
    assert pruned.pruned_mass == pytest.approx(0.25)


def test_continuous_model_rejected():
    with pytest.raises(ContinuousDistribution):
        enumerate_paths(build_dmm().ppg(samples=0), 3)


def test_path_explosion():
    g = load_model(
        "vars x\nnode 0\nnil 1\ntrans 0 -> 0 when x < 100 do { x ~ choice(x + 1, x + 2); }\n"
        "trans 0 -> 1 when x >= 100 do { }\ninit 0"
    )
    with pytest.raises(PathExplosion) as info:
        enumerate_paths(g, 20, cap=1000)
    assert info.value.cap == 1000 and info.value.depth == 11  # 2**10 prefixes of length 11


def test_zero_total_weight():
    g = load_model("vars x\nnode 0 score 0\nnil 1\ntrans 0 -> 1 when 1 == 1 do { }\ninit 0")
    with pytest.raises(ZeroTotalWeight):
        filtering_distribution(enumerate_paths(g, 2))


def test_upper_bound_conventions():
    assert _upper(0.3, 1.0, math.inf) == 0.3
    assert _upper(0.3, 1.0, None) == 0.3
    assert _upper(0.3, 2.0, None) is None
    assert _upper(0.3, 2.0, 1.0) == pytest.approx(1.6)
    assert _upper(0.3, 2.0, math.inf) == math.inf


# -- independent check: exact forward recursion in rationals ------------------------

def forward_oracle(g, q, t):
    """Unnormalised final-state measure by dynamic programming, in Fractions."""
    s0 = g.initial_state()
    gamma = {s0: Fraction(combined_score(g, s0))}
    for _ in range(t - 1):
        nxt = {}
        for s, m in gamma.items():
            for s2, p in kernel_support(g, s):
                w = Fraction(combined_score(g, s2))
                nxt[s2] = nxt.get(s2, Fraction(0)) + m * Fraction(p) * w
        gamma = nxt
    total = sum(gamma.values(), Fraction(0))
    term = sum((m for s, m in gamma.items() if s.checkpoint == g.nil), Fraction(0))
    num = sum((m * Fraction(q.value(s.store)) for s, m in gamma.items() if s.checkpoint == g.nil), Fraction(0))
    return total, term, num


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 20_000), st.integers(2, 6))
def test_matches_forward_recursion(seed, t):
    g = load_model(random_discrete_source(seed), samples=500)
    q = LiftedQuery.parse("abs(x)", g.variables, 3.0)
    total, term, num = forward_oracle(g, q, t)
    table = enumerate_paths(g, t)
    assert expectation_t(table, weight) == pytest.approx(float(total), abs=1e-12)
    assert expectation_t(table, terminated_weight(g.nil)) == pytest.approx(float(term), abs=1e-12)
    if term == 0:
        with pytest.raises((NotTerminatedYet, ZeroTotalWeight)):
            semantics_bounds(table, q)
        return
    rep = semantics_bounds(table, q)
    assert rep.beta_lower == pytest.approx(float(num / total), abs=1e-12)
    assert rep.alpha == pytest.approx(float(total / term), rel=1e-12)
    assert rep.beta_lower <= rep.beta_upper + 1e-12
