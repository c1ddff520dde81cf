"""Concrete syntax for program graphs.

::

    model  := "vars" ident+ decl* "init" nat
    decl   := "node" nat ("score" expr)? | "nil" nat | trans
    trans  := "trans" nat "->" nat "when" expr "do" "{" stmt* "}"
    stmt   := ident "~" dist ";" | ident ":=" expr ";"
    dist   := "bernoulli" "(" expr ")" | "normal" "(" expr "," expr ")"
            | "uniform" "(" expr "," expr ")" | "choice" "(" expr ("," expr)* ")"

Expressions, loosest binding first: ``or``, ``and``, ``not``, comparisons
(non-associative), ``+ -``, ``* /``, unary ``-``, then atoms (numbers, ``inf``,
variables, parentheses, ``abs(e)``, ``min(e, ...)``, ``max(e, ...)``).
``#`` starts a comment running to end of line.

The nil checkpoint may be declared with ``nil k`` alone; its self-loop may be
left out (`fkppg.ppg.validate` adds it).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .errors import (
    DuplicateCheckpoint,
    MissingNil,
    ModelSyntaxError,
    UndeclaredCheckpoint,
    UndeclaredVariable,
    UnknownDistribution,
)
from .expr import Binary, Expr, Num, Unary, Var, to_source

KEYWORDS = frozenset(
    "vars node score nil trans when do init bernoulli normal uniform choice "
    "abs min max and or not inf".split()
)
DISTRIBUTIONS = {"bernoulli": 1, "normal": 2, "uniform": 2, "choice": None}
DISCRETE = frozenset({"bernoulli", "choice"})


@dataclass(frozen=True)
class DistSpec:
    kind: str
    params: Tuple[Expr, ...]

    def __post_init__(self):
        arity = DISTRIBUTIONS.get(self.kind, -1)
        if arity == -1:
            raise UnknownDistribution(f"unknown distribution {self.kind!r}")
        if arity is None:
            if not self.params:
                raise ModelSyntaxError("choice needs at least one value")
        elif len(self.params) != arity:
            raise ModelSyntaxError(f"{self.kind} takes {arity} parameter(s)")

    @property
    def discrete(self):
        return self.kind in DISCRETE


@dataclass(frozen=True)
class Sample:
    var: str
    index: int
    dist: DistSpec


@dataclass(frozen=True)
class Assign:
    var: str
    index: int
    expr: Expr


Statement = Union[Sample, Assign]


@dataclass(frozen=True)
class NodeDecl:
    id: int
    score: Optional[Expr] = None


@dataclass(frozen=True)
class TransDecl:
    source: int
    guard: Expr
    body: Tuple[Statement, ...]
    target: int


@dataclass(frozen=True)
class ModelAst:
    variables: Tuple[str, ...]
    nodes: Tuple[NodeDecl, ...]
    nil: int
    transitions: Tuple[TransDecl, ...]
    init: int

    @property
    def checkpoints(self):
        return tuple(sorted({n.id for n in self.nodes} | {self.nil}))


# -- lexer ------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|:=|==|!=|<=|>=|[<>~;{}(),+\-*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ModelSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        chunk = m.group()
        col = pos - line_start + 1
        if kind == "ident" and chunk in KEYWORDS:
            kind = "kw"
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- parser -----------------------------------------------------------------------

_COMPARE = ("==", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, text, variables=None):
        self.toks = tokenize(text)
        self.i = 0
        self.vars = dict(variables or {})

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, message, expected=(), tok=None, cls=ModelSyntaxError):
        tok = tok or self.tok
        if cls is ModelSyntaxError:
            return cls(message, tok.line, tok.col, expected)
        return cls(message, tok.line, tok.col)

    def at(self, text):
        t = self.tok
        return t.kind in ("kw", "op") and t.text == text

    def take(self):
        t = self.tok
        self.i += 1
        return t

    def expect(self, text):
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"unexpected {found!r}", [repr(text)])
        return self.take()

    def nat(self):
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            raise self.error(f"unexpected {t.text or 'end of input'!r}", ["checkpoint id"])
        self.take()
        return int(t.text)

    def ident(self):
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"unexpected {t.text or 'end of input'!r}", ["identifier"])
        return self.take()

    # expressions
    def expr(self):
        return self.or_expr()

    def or_expr(self):
        e = self.and_expr()
        while self.at("or"):
            self.take()
            e = Binary("or", e, self.and_expr())
        return e

    def and_expr(self):
        e = self.not_expr()
        while self.at("and"):
            self.take()
            e = Binary("and", e, self.not_expr())
        return e

    def not_expr(self):
        if self.at("not"):
            self.take()
            return Unary("not", self.not_expr())
        return self.comparison()

    def comparison(self):
        e = self.additive()
        if self.tok.kind == "op" and self.tok.text in _COMPARE:
            op = self.take().text
            e = Binary(op, e, self.additive())
            if self.tok.kind == "op" and self.tok.text in _COMPARE:
                raise self.error("comparisons do not chain; add parentheses")
        return e

    def additive(self):
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            e = Binary(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.at("*") or self.at("/"):
            op = self.take().text
            e = Binary(op, e, self.unary())
        return e

    def unary(self):
        if self.at("-"):
            self.take()
            t = self.tok
            if t.kind == "num" or (t.kind == "kw" and t.text == "inf"):
                return Num(-self.atom().value)
            return Unary("neg", self.unary())
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            return Num(float(t.text))
        if t.kind == "kw" and t.text == "inf":
            self.take()
            return Num(math.inf)
        if t.kind == "ident":
            self.take()
            if t.text not in self.vars:
                raise self.error(
                    f"undeclared variable {t.text!r}", tok=t, cls=UndeclaredVariable
                )
            return Var(t.text, self.vars[t.text])
        if self.at("("):
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "kw" and t.text in ("abs", "min", "max"):
            self.take()
            args = self.arguments()
            if t.text == "abs":
                if len(args) != 1:
                    raise self.error("abs takes exactly one argument", tok=t)
                return Unary("abs", args[0])
            if len(args) < 2:
                raise self.error(f"{t.text} takes at least two arguments", tok=t)
            e = args[0]
            for a in args[1:]:
                e = Binary(t.text, e, a)
            return e
        raise self.error(
            f"unexpected {t.text or 'end of input'!r}",
            ["number", "variable", "'('", "abs", "min", "max"],
        )

    def arguments(self):
        self.expect("(")
        args = [self.expr()]
        while self.at(","):
            self.take()
            args.append(self.expr())
        self.expect(")")
        return args

    # statements
    def statement(self):
        name = self.ident()
        if name.text not in self.vars:
            raise self.error(
                f"undeclared variable {name.text!r}", tok=name, cls=UndeclaredVariable
            )
        index = self.vars[name.text]
        if self.at("~"):
            self.take()
            t = self.tok
            if t.kind not in ("kw", "ident") or t.text not in DISTRIBUTIONS:
                raise self.error(
                    f"unknown distribution {t.text!r}", tok=t, cls=UnknownDistribution
                )
            self.take()
            args = self.arguments()
            try:
                dist = DistSpec(t.text, tuple(args))
            except ModelSyntaxError as exc:
                raise self.error(str(exc), tok=t) from None
            stmt = Sample(name.text, index, dist)
        elif self.at(":="):
            self.take()
            stmt = Assign(name.text, index, self.expr())
        else:
            raise self.error(f"unexpected {self.tok.text!r}", ["'~'", "':='"])
        self.expect(";")
        return stmt

    # model
    def model(self):
        self.expect("vars")
        names = [self.ident()]
        while self.tok.kind == "ident":
            names.append(self.take())
        for i, t in enumerate(names):
            if t.text in self.vars:
                raise self.error(f"variable {t.text!r} declared twice", tok=t)
            self.vars[t.text] = i

        nodes, transitions = {}, []
        nil = nil_tok = None
        refs = []
        while not self.at("init"):
            t = self.tok
            if self.at("node"):
                self.take()
                id_tok = self.tok
                nid = self.nat()
                if nid in nodes:
                    raise self.error(
                        f"checkpoint {nid} declared twice", tok=id_tok, cls=DuplicateCheckpoint
                    )
                score = None
                if self.at("score"):
                    self.take()
                    score = self.expr()
                nodes[nid] = NodeDecl(nid, score)
            elif self.at("nil"):
                self.take()
                id_tok = self.tok
                nid = self.nat()
                if nil is not None:
                    raise self.error(
                        "more than one nil checkpoint", tok=id_tok, cls=DuplicateCheckpoint
                    )
                nil, nil_tok = nid, id_tok
            elif self.at("trans"):
                self.take()
                src_tok = self.tok
                src = self.nat()
                self.expect("->")
                dst_tok = self.tok
                dst = self.nat()
                self.expect("when")
                guard = self.expr()
                self.expect("do")
                self.expect("{")
                body = []
                while not self.at("}"):
                    body.append(self.statement())
                self.take()
                refs += [(src, src_tok), (dst, dst_tok)]
                transitions.append(TransDecl(src, guard, tuple(body), dst))
            else:
                found = t.text or "end of input"
                raise self.error(
                    f"unexpected {found!r}", ["'node'", "'nil'", "'trans'", "'init'"]
                )
        init_kw = self.take()
        init_tok = self.tok
        init = self.nat()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after init", ["end of input"])

        if nil is None:
            raise MissingNil("no nil checkpoint declared", init_kw.line, init_kw.col)
        declared = set(nodes) | {nil}
        for cid, tok in refs + [(init, init_tok)]:
            if cid not in declared:
                raise self.error(
                    f"undeclared checkpoint {cid}", tok=tok, cls=UndeclaredCheckpoint
                )
        return ModelAst(
            variables=tuple(t.text for t in names),
            nodes=tuple(nodes[k] for k in sorted(nodes)),
            nil=nil,
            transitions=tuple(transitions),
            init=init,
        )


def parse_model(text: str) -> ModelAst:
    """Parse model source into a `ModelAst`.

    Raises a `ModelError` subclass carrying line/column on malformed input.
    """
    return _Parser(text).model()


def parse_expr(text: str, variables) -> Expr:
    """Parse a standalone expression; `variables` is a name list or name->index map."""
    if not isinstance(variables, dict):
        variables = {name: i for i, name in enumerate(variables)}
    p = _Parser(text, variables)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}", ["end of input"])
    return e


# -- printing ---------------------------------------------------------------------

def statement_source(s: Statement) -> str:
    if isinstance(s, Sample):
        args = ", ".join(to_source(p) for p in s.dist.params)
        return f"{s.var} ~ {s.dist.kind}({args});"
    return f"{s.var} := {to_source(s.expr)};"


def format_model(ast: ModelAst) -> str:
    lines = ["vars " + " ".join(ast.variables)]
    for n in ast.nodes:
        lines.append(f"node {n.id}" + (f" score {to_source(n.score)}" if n.score is not None else ""))
    lines.append(f"nil {ast.nil}")
    for tr in ast.transitions:
        body = " ".join(statement_source(s) for s in tr.body)
        body = f"{{ {body} }}" if body else "{ }"
        lines.append(f"trans {tr.source} -> {tr.target} when {to_source(tr.guard)} do {body}")
    lines.append(f"init {ast.init}")
    return "\n".join(lines) + "\n"
