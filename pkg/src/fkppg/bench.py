"""Benchmark models and a generator of random discrete graphs.

RW1 and DMM carry reference values; the remaining models (AT, HT, BRP, NIID,
ZC, RW2) are best-effort reconstructions written from one-line descriptions
and carry no reference values.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .ppg import LiftedQuery, Ppg, load_model


@dataclass(frozen=True)
class BenchModel:
    name: str
    source: str
    query: str
    bound: Optional[float]
    t: int
    expected: dict = field(default_factory=dict, hash=False)
    verified: bool = True
    notes: str = ""

    def ppg(self, samples=10_000) -> Ppg:
        return load_model(self.source, samples=samples)

    def lifted_query(self, g: Optional[Ppg] = None) -> LiftedQuery:
        g = g or self.ppg(samples=0)
        return LiftedQuery.parse(self.query, g.variables, self.bound)

    def sidecar(self) -> dict:
        return {
            "name": self.name,
            "query": self.query,
            "bound": self.bound,
            "t": self.t,
            "expected": self.expected,
            "verified": self.verified,
            "notes": self.notes,
        }


_RW1 = """\
# RW1: flip c; on heads flip d and keep the run only if d came up heads.
vars c d
node 0
node 1
nil 2
node 3{score}
trans 0 -> 1 when 1 == 1 do {{ c ~ bernoulli(0.5); }}
trans 1 -> 2 when c == 0 do {{ }}
trans 1 -> 3 when c != 0 do {{ d ~ bernoulli(0.5); }}
trans 3 -> 2 when 1 == 1 do {{ }}
trans 2 -> 2 when 1 == 1 do {{ }}
init 0
"""


def build_rw1(conditioned: bool = True) -> BenchModel:
    if conditioned:
        return BenchModel(
            name="rw1",
            source=_RW1.format(score=" score d == 1"),
            query="c",
            bound=1.0,
            t=4,
            expected={
                "semantics": 1 / 3,
                "E_t[f_t*1{T<=t}*w_t]": 0.25,
                "E_t[w_t]": 0.75,
                "E_t[1{T<=t}*w_t]": 0.75,
                "alpha": 1.0,
                "filtering": {"(0,0)@2": 2 / 3, "(1,1)@2": 1 / 3},
            },
            notes="expected values: exact hand computation over the two "
            "surviving length-4 paths",
        )
    return BenchModel(
        name="rw1_unconditioned",
        source=_RW1.format(score=""),
        query="c",
        bound=1.0,
        t=4,
        expected={"semantics": 0.5},
        notes="RW1 with the score on node 3 removed",
    )


_DMM = """\
# Drunk man and mouse: independent Gaussian walks from -1 and 1, each with a
# step s.d. drawn once from uniform(0, 1); stop when they are within 0.1.
# Runs where they drift more than 3 apart are discarded by the score.
vars d x y sm ss
node 0
node 1 score abs(x - y) <= 3
nil 2
trans 0 -> 1 when 1 == 1 do {
  sm ~ uniform(0, 1); ss ~ uniform(0, 1);
  x := -1; y := 1; d := abs(x - y);
}
trans 1 -> 1 when d >= 0.1 do { x ~ normal(x, sm); y ~ normal(y, ss); d := abs(x - y); }
trans 1 -> 2 when d < 0.1 do { }
init 0
"""


def build_dmm() -> BenchModel:
    return BenchModel(
        name="dmm",
        source=_DMM,
        query="d",
        bound=0.1,
        t=1000,
        notes="s.d. prior uniform(0, 1) is an assumption; no reference value",
    )


_NIID = """\
# NIID: toss two fair coins until both show tails, discarding runs that ever
# show two heads. h = number of rounds.
vars a b n
node 0
node 1 score not (a == 1 and b == 1)
nil 2
trans 0 -> 1 when 1 == 1 do { a ~ bernoulli(0.5); b ~ bernoulli(0.5); n := 1; }
trans 1 -> 1 when a == 1 or b == 1 do { a ~ bernoulli(0.5); b ~ bernoulli(0.5); n := n + 1; }
trans 1 -> 2 when not (a == 1 or b == 1) do { }
init 0
"""

_HT = """\
# HT: the tortoise starts 5 ahead and moves 1 per step; the hare sleeps or
# leaps. Observed: the race lasts at most 10 rounds. h = hare position at catch-up.
vars hare tort n leap
node 0
node 1 score n <= 10
nil 2
trans 0 -> 1 when 1 == 1 do { tort := 5; }
trans 1 -> 1 when hare < tort do {
  leap ~ choice(0, 0, 2, 4); hare := hare + leap; tort := tort + 1; n := n + 1;
}
trans 1 -> 2 when hare >= tort do { }
init 0
"""

_BRP = """\
# BRP: send 4 packets over a channel losing each attempt with prob 0.1;
# at most 2 retries per packet. h = 1 if every packet got through.
vars sent tries ok lost
node 0
nil 2
node 1
trans 0 -> 1 when 1 == 1 do { ok := 1; }
trans 1 -> 1 when sent < 4 and ok == 1 do {
  lost ~ bernoulli(0.1);
  tries := (tries + 1) * lost;
  sent := sent + (1 - lost);
  ok := (tries <= 2);
}
trans 1 -> 2 when not (sent < 4 and ok == 1) do { }
init 0
"""

_ZC = """\
# ZeroConf: pick an address that is taken with prob 0.3 and probe it 4 times;
# a probe to a taken address is answered with prob 0.6 and forces a fresh
# pick. Observed: at most 2 restarts. h = 1 if a taken address is kept.
vars taken probes ans restarts err
node 0 score restarts <= 2
node 1
nil 2
node 3
trans 0 -> 1 when 1 == 1 do { taken ~ bernoulli(0.3); probes := 0; }
trans 1 -> 3 when probes < 4 do { ans ~ bernoulli(0.6 * taken); }
trans 1 -> 2 when probes >= 4 do { err := taken; }
trans 3 -> 0 when ans == 1 do { restarts := restarts + 1; ans := 0; }
trans 3 -> 1 when ans != 1 do { probes := probes + 1; }
init 0
"""

_RW2 = """\
# RW2: Gaussian random walk observed for 10 steps at positions 0.5*i with a
# triangular likelihood. h = |x| at the end.
vars x i
node 0
node 1 score max(0, 1 - abs(x - 0.5 * i) / 2)
nil 2
trans 0 -> 1 when 1 == 1 do { x ~ normal(0, 1); i := 1; }
trans 1 -> 1 when i < 10 do { x ~ normal(x, 1); i := i + 1; }
trans 1 -> 2 when i >= 10 do { }
init 0
"""

_AT = """\
# AT: aircraft moving in 2D with random velocity changes, tracked by two
# radars at (0, 0) and (10, 0) reporting noisy ranges. Ranges are replaced by
# a fixed synthetic track; the likelihood is triangular. h = |x| at the end.
vars x y vx vy k r1 r2
node 0
node 1 score max(0, 1 - abs(r1 - (k + 1)) / 3) * max(0, 1 - abs(r2 - (10 - k)) / 3)
nil 2
trans 0 -> 1 when 1 == 1 do {
  x ~ normal(0, 1); y ~ normal(0, 1); vx ~ normal(1, 0.5); vy ~ normal(0, 0.5);
  r1 := abs(x) + abs(y); r2 := abs(x - 10) + abs(y);
}
trans 1 -> 1 when k < 8 do {
  vx ~ normal(vx, 0.2); vy ~ normal(vy, 0.2);
  x := x + vx; y := y + vy; k := k + 1;
  r1 := abs(x) + abs(y); r2 := abs(x - 10) + abs(y);
}
trans 1 -> 2 when k >= 8 do { }
init 0
"""

_BEST_EFFORT = {
    "niid": (_NIID, "n", None, 100),
    "ht": (_HT, "hare", None, 100),
    "brp": (_BRP, "sent >= 4", 1.0, 20),
    "zc": (_ZC, "err", 1.0, 60),
    "rw2": (_RW2, "abs(x)", None, 12),
    "at": (_AT, "abs(x)", None, 10),
}


def build_best_effort(name: str) -> BenchModel:
    source, query, bound, t = _BEST_EFFORT[name]
    return BenchModel(
        name=name,
        source=source,
        query=query,
        bound=bound,
        t=t,
        verified=False,
        notes="best-effort reconstruction, not checked against reference values",
    )


def all_models():
    models = [build_rw1(True), build_rw1(False), build_dmm()]
    models += [build_best_effort(name) for name in _BEST_EFFORT]
    return {m.name: m for m in models}


# -- random discrete graphs ----------------------------------------------------------

_SCORES = (
    "0.5",
    "{v} == {a}",
    "{v} <= {a}",
    "0.25 + 0.5 * ({v} == {a})",
    "min(abs({v}) / 3, 1)",
)


def _random_guards(r, names):
    v = r.choice(names)
    a = r.randint(0, 2)
    kind = r.randrange(4)
    if kind == 0:
        return ["1 == 1"]
    if kind == 1:
        return [f"{v} == {a}", f"{v} != {a}"]
    if kind == 2:
        return [f"{v} < {a}", f"{v} >= {a}"]
    return [f"{v} < {a}", f"{v} == {a}", f"{v} > {a}"]


def _random_statement(r, names):
    v, u = r.choice(names), r.choice(names)
    kind = r.randrange(5)
    if kind == 0:
        return f"{v} ~ bernoulli({r.choice((0.25, 0.5, 0.75))});"
    if kind == 1:
        vals = [str(r.randint(0, 3)) for _ in range(r.randint(2, 3))]
        if r.random() < 0.5:
            vals[-1] = u
        return f"{v} ~ choice({', '.join(vals)});"
    if kind == 2:
        return f"{v} := min({u} + 1, 3);"
    if kind == 3:
        return f"{v} := abs({u} - 1);"
    return f"{v} ~ bernoulli(0.5);"


def random_discrete_source(seed: int) -> str:
    """DSL text of a random discrete graph.

    At most 4 checkpoints (the last one is nil), at most 3 variables, only
    bernoulli/choice sampling.  Every variable stays in [0, 3], guards
    partition the store space exactly, scores lie in [0, 1].
    """
    r = random.Random(seed)
    m = r.randint(1, 3)
    names = ["x", "y", "z"][:m]
    k = r.randint(2, 4)
    nil = k - 1
    lines = ["vars " + " ".join(names)]
    for cid in range(nil):
        score = ""
        if cid > 0 and r.random() < 0.6:
            score = " score " + r.choice(_SCORES).format(v=r.choice(names), a=r.randint(0, 2))
        lines.append(f"node {cid}{score}")
    lines.append(f"nil {nil}")
    for cid in range(nil):
        for guard in _random_guards(r, names):
            if r.random() < 0.4:
                target = nil
            else:
                target = r.randrange(k)
            body = " ".join(_random_statement(r, names) for _ in range(r.randint(0, 2)))
            if cid == 0 and not body:
                body = _random_statement(r, names)
            lines.append(f"trans {cid} -> {target} when {guard} do {{ {body} }}")
    lines.append("init 0")
    return "\n".join(lines) + "\n"


def fuzz_models(count: int, first_seed: int = 0, max_t: int = 6):
    """`count` random discrete models that are usable at their horizon.

    Yields ``(seed, BenchModel)``.  A candidate is kept when the exact oracle
    at its horizon gives total weight >= 0.05 with some terminated mass, and
    the query is not constant under the filtering distribution (otherwise
    particle estimates would have nothing to get wrong).  Candidates are tried in seed
    order, so the output is deterministic.
    """
    from .oracle import (
        enumerate_paths,
        expectation_t,
        filtering_distribution,
        terminated_weight,
        weight,
    )
    from .ppg import LiftedQuery

    seed = first_seed
    produced = 0
    while produced < count:
        src = random_discrete_source(seed)
        r = random.Random(10_000 + seed)
        t = r.randint(3, max_t)
        g = load_model(src, samples=2_000)
        name = random.Random(seed).choice(["x", "y", "z"][: g.m])
        table = enumerate_paths(g, t)
        total = expectation_t(table, weight)
        term = expectation_t(table, terminated_weight(g.nil))
        varied = False
        if total >= 0.05 and term > 0.0:
            q = LiftedQuery.parse(f"abs({name})", g.variables, 3.0)
            phi = filtering_distribution(table)
            varied = len({q.value(s.store) if s.checkpoint == g.nil else 0.0 for s in phi}) > 1
        if varied:
            produced += 1
            yield seed, BenchModel(
                name=f"fuzz{seed}", source=src, query=f"abs({name})", bound=3.0, t=t,
                verified=False, notes="random discrete graph",
            )
        seed += 1
