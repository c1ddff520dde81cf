"""Validated program graphs and their one-step semantics.

A state is a store (m extended reals) together with a checkpoint id.  A run of
length ``t`` has ``t`` states and starts from the all-zero store at the initial
checkpoint; every subsequent state comes from `kernel_step`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .dist import enumerate_support, execute_measure
from .dsl import ModelAst, Statement, parse_expr, parse_model
from .errors import (
    NilSelfLoopConflict,
    NumericDomain,
    PartitionViolation,
    PredicateNotBoolean,
    QueryOutOfRange,
    ScoreOnNil,
    ScoreOutOfRange,
)
from .expr import (
    Binary,
    Expr,
    Num,
    compile_scalar,
    eval_expr,
    eval_predicate,
    eval_vector,
    is_constant,
    to_source,
)

TRUE = Binary("==", Num(1.0), Num(1.0))


@dataclass(frozen=True)
class Transition:
    guard: Expr
    body: Tuple[Statement, ...]
    target: int


@dataclass(frozen=True)
class State:
    store: Tuple[float, ...]
    checkpoint: int


@dataclass(frozen=True)
class Path:
    states: Tuple[State, ...]
    probability: float
    weight: float

    def __len__(self):
        return len(self.states)


@dataclass(frozen=True)
class Ppg:
    variables: Tuple[str, ...]
    checkpoints: Tuple[int, ...]
    nil: int
    init: int
    scores: Dict[int, Optional[Expr]] = field(hash=False)
    transitions: Dict[int, Tuple[Transition, ...]] = field(hash=False)

    @property
    def m(self):
        return len(self.variables)

    @property
    def discrete(self):
        """True if no transition samples from a continuous distribution."""
        return all(
            getattr(s, "dist", None) is None or s.dist.discrete
            for trs in self.transitions.values()
            for tr in trs
            for s in tr.body
        )

    def initial_state(self):
        return State((0.0,) * self.m, self.init)


@dataclass(frozen=True)
class LiftedQuery:
    """A nonnegative function ``h`` of the store, read at the first nil state.

    `bound` is an optional finite-or-infinite upper bound on ``h``.
    """

    expr: Expr
    bound: Optional[float] = None
    source: str = ""

    @classmethod
    def parse(cls, text, variables, bound=None):
        return cls(parse_expr(text, variables), bound, text)

    def value(self, store):
        v = eval_expr(self.expr, store)
        self._check(v, store)
        return v

    def values(self, V):
        r = eval_vector(self.expr, V)
        bad = (r < 0.0) | ((r > self.bound) if self.bound is not None else False)
        if np.any(bad):
            j = int(np.flatnonzero(bad)[0])
            self._check(float(r[j]), V[j].tolist())
        return r

    def _check(self, v, store):
        if v < 0.0 or (self.bound is not None and v > self.bound):
            raise QueryOutOfRange(
                f"query {self.source or to_source(self.expr)} = {v!r} at store "
                f"{list(store)} is outside [0, {self.bound if self.bound is not None else 'inf'}]"
            )


# -- validation ---------------------------------------------------------------------

_PROBE_ATOMS = np.array([0.0, 1.0, -1.0, 2.0, 3.0, 0.5, math.inf, -math.inf])


def probe_stores(m, k, seed=0):
    """`k` random stores for the statistical guard-partition check.

    Each component is one of the atoms 0, 1, -1, 2, 3, 0.5, +inf, -inf with
    probability 1/2; otherwise it is Gaussian with s.d. 1 or 100 (1/4 each).
    """
    rng = np.random.default_rng(seed)
    kind = rng.integers(0, 4, size=(k, m))
    atoms = _PROBE_ATOMS[rng.integers(0, len(_PROBE_ATOMS), size=(k, m))]
    out = np.where(kind <= 1, atoms, rng.standard_normal((k, m)))
    return np.where(kind == 3, 100.0 * out, out)


def _constant_one(e):
    if e is None:
        return True
    try:
        return is_constant(e) and eval_expr(e, ()) == 1.0
    except NumericDomain:
        return False


def validate(ast: ModelAst, samples: int = 10_000, seed: int = 0) -> Ppg:
    """Check the structural conditions of a program graph and build a `Ppg`.

    The guard-partition condition (exactly one enabled guard per checkpoint
    and store) is checked on `samples` random stores from `probe_stores`.  It
    is a statistical check only; `kernel_step` re-checks it exactly on every
    state it executes.  Scores are range-checked on the same stores.
    """
    nil = ast.nil
    scores = {cid: None for cid in ast.checkpoints}
    for n in ast.nodes:
        scores[n.id] = n.score
    if not _constant_one(scores[nil]):
        raise ScoreOnNil(f"nil checkpoint {nil} carries score {to_source(scores[nil])}")
    scores[nil] = None

    by_source = {cid: [] for cid in ast.checkpoints}
    for tr in ast.transitions:
        by_source[tr.source].append(Transition(tr.guard, tr.body, tr.target))

    nil_out = by_source[nil]
    if nil_out:
        ok = (
            len(nil_out) == 1
            and _constant_one(nil_out[0].guard)
            and not nil_out[0].body
            and nil_out[0].target == nil
        )
        if not ok:
            raise NilSelfLoopConflict(
                f"nil checkpoint {nil} may only have the self-loop "
                f"'trans {nil} -> {nil} when 1 == 1 do {{ }}'"
            )
    by_source[nil] = [Transition(TRUE, (), nil)]

    g = Ppg(
        variables=ast.variables,
        checkpoints=ast.checkpoints,
        nil=nil,
        init=ast.init,
        scores=scores,
        transitions={cid: tuple(trs) for cid, trs in by_source.items()},
    )
    if samples:
        V = probe_stores(g.m, samples, seed)
        _check_partition(g, V)
        _check_scores(g, V)
    return g


def _check_partition(g, V):
    for cid in g.checkpoints:
        trs = g.transitions[cid]
        if not trs:
            raise PartitionViolation(cid, V[0] if len(V) else (0.0,) * g.m, 0)
        enabled = np.zeros(len(V), dtype=np.int64)
        defined = np.ones(len(V), dtype=bool)
        for tr in trs:
            with np.errstate(invalid="ignore"):
                r = _guard_values(tr.guard, V)
            defined &= ~np.isnan(r)
            bad = defined & (r != 0.0) & (r != 1.0)
            if bad.any():
                j = int(np.flatnonzero(bad)[0])
                raise PredicateNotBoolean(
                    f"checkpoint {cid}: guard {to_source(tr.guard)} evaluated to "
                    f"{float(r[j])!r} at store {V[j].tolist()}"
                )
            enabled += r == 1.0
        wrong = defined & (enabled != 1)
        if wrong.any():
            # prefer an overlap witness over a gap witness
            over = np.flatnonzero(defined & (enabled > 1))
            j = int(over[0]) if len(over) else int(np.flatnonzero(wrong)[0])
            raise PartitionViolation(cid, V[j], enabled[j])


def _check_scores(g, V):
    for cid, e in g.scores.items():
        if e is None:
            continue
        with np.errstate(invalid="ignore"):
            r = _guard_values(e, V)
        bad = ~np.isnan(r) & ~((r >= 0.0) & (r <= 1.0))
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            raise ScoreOutOfRange(
                f"score of checkpoint {cid} is {float(r[j])!r} at store {V[j].tolist()}"
            )


def _guard_values(guard, V):
    """Values on probe stores; NaN where the expression is undefined (inf - inf, ...)."""
    try:
        return eval_vector(guard, V)
    except NumericDomain:
        f = compile_scalar(guard)
        out = np.empty(len(V))
        for j, row in enumerate(V.tolist()):
            try:
                out[j] = f(row)
            except NumericDomain:
                out[j] = math.nan
        return out


def load_model(text: str, samples: int = 10_000, seed: int = 0) -> Ppg:
    return validate(parse_model(text), samples=samples, seed=seed)


# -- one-step semantics ---------------------------------------------------------------

def enabled_transition(g: Ppg, s: State) -> Transition:
    """The unique transition whose guard holds at `s`; raises otherwise."""
    chosen, count = None, 0
    for tr in g.transitions[s.checkpoint]:
        if eval_predicate(tr.guard, s.store) == 1.0:
            chosen = tr
            count += 1
    if count != 1:
        raise PartitionViolation(s.checkpoint, s.store, count)
    return chosen


def kernel_step(g: Ppg, s: State, rng, step: int, slot: int) -> State:
    if s.checkpoint == g.nil:
        return s
    tr = enabled_transition(g, s)
    return State(execute_measure(tr.body, s.store, rng, step, slot), tr.target)


def kernel_support(g: Ppg, s: State):
    """Exact one-step successors ``[(State, probability)]`` for discrete graphs."""
    if s.checkpoint == g.nil:
        return [(s, 1.0)]
    tr = enabled_transition(g, s)
    return [(State(v, tr.target), p) for v, p in enumerate_support(tr.body, s.store)]


def combined_score(g: Ppg, s: State) -> float:
    e = g.scores.get(s.checkpoint)
    if e is None:
        return 1.0
    v = eval_expr(e, s.store)
    if not 0.0 <= v <= 1.0:
        raise ScoreOutOfRange(
            f"score of checkpoint {s.checkpoint} is {v!r} at store {list(s.store)}"
        )
    return v


def path_weight(g: Ppg, states) -> float:
    """Product of combined scores over every state of the path."""
    if isinstance(states, Path):
        states = states.states
    w = 1.0
    for s in states:
        w *= combined_score(g, s)
    return w


def is_terminated(g: Ppg, s: State) -> int:
    return int(s.checkpoint == g.nil)
