"""Arithmetic/boolean expressions over the program store.

Values are IEEE doubles standing for extended reals: +-inf are legal, NaN is
not.  Any operation that would produce NaN raises `NumericDomain`.  Booleans
are the reals 0 and 1.

Each expression has two evaluators built from the same tree:

* `eval_expr(e, store)` on a single store (a sequence of floats), and
* `eval_vector(e, V)` on an ``(n, m)`` array holding ``n`` stores as rows.

The two agree bit-for-bit on every row; the particle engines rely on it.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np

from .errors import NumericDomain, PredicateNotBoolean

INF = math.inf

ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("and", "or")
FUNC_OPS = ("min", "max")
UNARY_OPS = ("neg", "not", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Unary, Binary]


def variables(e: Expr) -> set:
    """Indices of the variables `e` reads."""
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Unary):
        return variables(e.arg)
    if isinstance(e, Binary):
        return variables(e.left) | variables(e.right)
    return set()


def is_constant(e: Expr) -> bool:
    return not variables(e)


# -- scalar evaluation ----------------------------------------------------------

def _div(a, b):
    if b == 0.0:
        if a == 0.0:
            raise NumericDomain("0/0")
        return math.copysign(INF, a)
    r = a / b
    if r != r:
        raise NumericDomain(f"{a!r} / {b!r}")
    return r


def _checked(op, sym):
    def f(a, b):
        r = op(a, b)
        if r != r:
            raise NumericDomain(f"{a!r} {sym} {b!r} is NaN")
        return r
    return f


_SCALAR_BINARY = {
    "+": _checked(operator.add, "+"),
    "-": _checked(operator.sub, "-"),
    "*": _checked(operator.mul, "*"),
    "/": _div,
    # a if a <= b else b, *not* builtin min: keeps the sign of zero identical
    # to the vectorised np.where form
    "min": lambda a, b: a if a <= b else b,
    "max": lambda a, b: a if a >= b else b,
    "==": lambda a, b: 1.0 if a == b else 0.0,
    "!=": lambda a, b: 1.0 if a != b else 0.0,
    "<": lambda a, b: 1.0 if a < b else 0.0,
    "<=": lambda a, b: 1.0 if a <= b else 0.0,
    ">": lambda a, b: 1.0 if a > b else 0.0,
    ">=": lambda a, b: 1.0 if a >= b else 0.0,
    "and": lambda a, b: 1.0 if (a != 0.0 and b != 0.0) else 0.0,
    "or": lambda a, b: 1.0 if (a != 0.0 or b != 0.0) else 0.0,
}

_SCALAR_UNARY = {
    "neg": lambda a: -a,
    "not": lambda a: 1.0 if a == 0.0 else 0.0,
    "abs": abs,
}


@lru_cache(maxsize=None)
def compile_scalar(e: Expr) -> Callable[[Sequence[float]], float]:
    if isinstance(e, Num):
        v = float(e.value)
        return lambda store: v
    if isinstance(e, Var):
        i = e.index
        return lambda store: float(store[i])
    if isinstance(e, Unary):
        f, g = _SCALAR_UNARY[e.op], compile_scalar(e.arg)
        return lambda store: f(g(store))
    if isinstance(e, Binary):
        f = _SCALAR_BINARY[e.op]
        left, right = compile_scalar(e.left), compile_scalar(e.right)
        return lambda store: f(left(store), right(store))
    raise TypeError(f"not an expression: {e!r}")


def eval_expr(e: Expr, store: Sequence[float]) -> float:
    return compile_scalar(e)(store)


def eval_predicate(e: Expr, store: Sequence[float]) -> float:
    v = eval_expr(e, store)
    if v != 0.0 and v != 1.0:
        raise PredicateNotBoolean(f"guard {to_source(e)} evaluated to {v!r}")
    return v


# -- vectorised evaluation ------------------------------------------------------

def _nan_guard(r, what):
    if np.isnan(r).any():
        raise NumericDomain(f"{what} produced NaN")
    return r


def _vdiv(a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.true_divide(a, b)
    zero = np.equal(b, 0.0)
    if np.any(zero):
        if np.any(zero & np.equal(a, 0.0)):
            raise NumericDomain("0/0")
        r = np.where(zero, np.copysign(INF, a), r)
    return _nan_guard(r, "/")


def _varith(ufunc, sym):
    def f(a, b):
        with np.errstate(invalid="ignore", over="ignore"):
            r = ufunc(a, b)
        return _nan_guard(r, sym)
    return f


def _as_real(mask):
    return np.asarray(mask, dtype=np.float64)


_VECTOR_BINARY = {
    "+": _varith(np.add, "+"),
    "-": _varith(np.subtract, "-"),
    "*": _varith(np.multiply, "*"),
    "/": _vdiv,
    "min": lambda a, b: np.where(np.less_equal(a, b), a, b),
    "max": lambda a, b: np.where(np.greater_equal(a, b), a, b),
    "==": lambda a, b: _as_real(np.equal(a, b)),
    "!=": lambda a, b: _as_real(np.not_equal(a, b)),
    "<": lambda a, b: _as_real(np.less(a, b)),
    "<=": lambda a, b: _as_real(np.less_equal(a, b)),
    ">": lambda a, b: _as_real(np.greater(a, b)),
    ">=": lambda a, b: _as_real(np.greater_equal(a, b)),
    "and": lambda a, b: _as_real(np.not_equal(a, 0.0) & np.not_equal(b, 0.0)),
    "or": lambda a, b: _as_real(np.not_equal(a, 0.0) | np.not_equal(b, 0.0)),
}

_VECTOR_UNARY = {
    "neg": np.negative,
    "not": lambda a: _as_real(np.equal(a, 0.0)),
    "abs": np.abs,
}


@lru_cache(maxsize=None)
def compile_vector(e: Expr):
    """Return ``f(V) -> array | float``; constants stay scalars and broadcast."""
    if isinstance(e, Num):
        v = np.float64(e.value)
        return lambda V: v
    if isinstance(e, Var):
        i = e.index
        return lambda V: V[:, i]
    if isinstance(e, Unary):
        f, g = _VECTOR_UNARY[e.op], compile_vector(e.arg)
        return lambda V: f(g(V))
    if isinstance(e, Binary):
        f = _VECTOR_BINARY[e.op]
        left, right = compile_vector(e.left), compile_vector(e.right)
        return lambda V: f(left(V), right(V))
    raise TypeError(f"not an expression: {e!r}")


def eval_vector(e: Expr, V: np.ndarray) -> np.ndarray:
    """Evaluate `e` on every row of `V`; always returns a fresh float array."""
    r = compile_vector(e)(V)
    return np.array(np.broadcast_to(r, (V.shape[0],)), dtype=np.float64)


def eval_predicate_vector(e: Expr, V: np.ndarray) -> np.ndarray:
    r = eval_vector(e, V)
    bad = (r != 0.0) & (r != 1.0)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise PredicateNotBoolean(
            f"guard {to_source(e)} evaluated to {r[j]!r} at store {V[j].tolist()}"
        )
    return r == 1.0


# -- printing -------------------------------------------------------------------

def _num_source(v: float) -> str:
    if v == INF:
        s = "inf"
    elif v == -INF:
        s = "-inf"
    else:
        s = repr(float(v))
    return f"({s})" if s.startswith("-") else s


def to_source(e: Expr) -> str:
    """Fully parenthesised source text; parses back to an equal tree."""
    if isinstance(e, Num):
        return _num_source(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "abs":
            return f"abs({to_source(e.arg)})"
        if e.op == "not":
            return f"(not {to_source(e.arg)})"
        if isinstance(e.arg, Num):
            # "-3.0" would be folded into a literal by the parser
            return f"(-({to_source(e.arg)}))"
        return f"(-{to_source(e.arg)})"
    if isinstance(e, Binary):
        if e.op in FUNC_OPS:
            return f"{e.op}({to_source(e.left)}, {to_source(e.right)})"
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    raise TypeError(f"not an expression: {e!r}")
