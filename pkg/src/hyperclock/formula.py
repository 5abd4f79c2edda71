"""HCMTL* formulas: syntax tree, parser, printer, negation and the event-guard transform.

Formulas are kept in negation normal form.  ``->`` and ``<->`` are surface
syntax only and are eliminated while parsing.  :class:`Implies` is the one
exception to NNF: it is a classical implication (``=>``) produced by
:func:`point_to_interval`, true whenever its premise is not satisfied.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .timecore import INF, Interval, TimeError, bound, rat


class FormulaError(ValueError):
    """Syntax or well-formedness error, annotated with a position when known."""

    def __init__(self, msg: str, pos: Optional[int] = None, text: Optional[str] = None):
        self.pos = pos
        if pos is not None and text is not None:
            caret = " " * pos + "^"
            msg = f"{msg} at position {pos}\n  {text}\n  {caret}"
        elif pos is not None:
            msg = f"{msg} at position {pos}"
        super().__init__(msg)


class Formula:
    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Prop(Formula):
    prop: str
    var: str


@dataclass(frozen=True)
class NegProp(Formula):
    prop: str
    var: str


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Implies(Formula):
    """Classical implication: holds unless the premise holds and the conclusion does not."""

    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Finally(Formula):
    interval: Interval
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Globally(Formula):
    interval: Interval
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Until(Formula):
    interval: Interval
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)


TEMPORAL = (Finally, Globally, Until)
QUANTIFIERS = (Exists, Forall)


def walk(phi: Formula) -> Iterator[Formula]:
    yield phi
    for c in phi.children():
        yield from walk(c)


def free_vars(phi: Formula) -> list[str]:
    """Free path variables in order of first occurrence."""
    out: list[str] = []

    def go(f, bound_vars):
        if isinstance(f, (Prop, NegProp)):
            if f.var not in bound_vars and f.var not in out:
                out.append(f.var)
            return
        if isinstance(f, QUANTIFIERS):
            go(f.body, bound_vars | {f.var})
            return
        for c in f.children():
            go(c, bound_vars)

    go(phi, frozenset())
    return out


def bound_vars(phi: Formula) -> list[str]:
    return [f.var for f in walk(phi) if isinstance(f, QUANTIFIERS)]


def is_sentence(phi: Formula) -> bool:
    return not free_vars(phi)


def quantifier_free(phi: Formula) -> bool:
    return not any(isinstance(f, QUANTIFIERS) for f in walk(phi))


def temporal_depth(phi: Formula) -> int:
    inner = max((temporal_depth(c) for c in phi.children()), default=0)
    return inner + (1 if isinstance(phi, TEMPORAL) else 0)


def quantifier_count(phi: Formula) -> int:
    return sum(isinstance(f, QUANTIFIERS) for f in walk(phi))


def propositions(phi: Formula) -> set:
    return {f.prop for f in walk(phi) if isinstance(f, (Prop, NegProp))}


def interval_constants(phi: Formula) -> set:
    out = set()
    for f in walk(phi):
        if isinstance(f, TEMPORAL):
            out.add(f.interval.left)
            if f.interval.right is not INF:
                out.add(f.interval.right)
    return out


def check_well_formed(phi: Formula, allow_open_temporal: bool = False) -> None:
    """Unique binding, no free/bound clash, and temporal operators under a quantifier."""
    seen = bound_vars(phi)
    dup = {v for v in seen if seen.count(v) > 1}
    if dup:
        raise FormulaError(f"path variable(s) bound more than once: {sorted(dup)}")
    clash = set(seen) & set(free_vars(phi))
    if clash:
        raise FormulaError(f"path variable(s) both free and bound: {sorted(clash)}")
    if allow_open_temporal:
        return

    def go(f, scoped):
        if isinstance(f, TEMPORAL) and not scoped:
            raise FormulaError(f"temporal operator outside every quantifier: {to_text(f)}")
        for c in f.children():
            go(c, scoped or isinstance(f, QUANTIFIERS))

    go(phi, False)


# -- negation -------------------------------------------------------------------


def negate(phi: Formula) -> Formula:
    """NNF of the negation, using the duals valid for the logic."""
    if isinstance(phi, Prop):
        return NegProp(phi.prop, phi.var)
    if isinstance(phi, NegProp):
        return Prop(phi.prop, phi.var)
    if isinstance(phi, And):
        return Or(negate(phi.left), negate(phi.right))
    if isinstance(phi, Or):
        return And(negate(phi.left), negate(phi.right))
    if isinstance(phi, Finally):
        return Globally(phi.interval, negate(phi.body))
    if isinstance(phi, Globally):
        return Finally(phi.interval, negate(phi.body))
    if isinstance(phi, Until):
        n1, n2 = negate(phi.left), negate(phi.right)
        iv = phi.interval
        upto = Interval(0, iv.right, True, False) if iv.right != 0 else None
        first = Globally(iv, n2)
        if upto is None:
            return first
        return Or(first, Until(upto, n2, n1))
    if isinstance(phi, Exists):
        return Forall(phi.var, negate(phi.body))
    if isinstance(phi, Forall):
        return Exists(phi.var, negate(phi.body))
    if isinstance(phi, Implies):
        raise FormulaError("classical implication has no negation-normal dual")
    raise TypeError(f"not a formula: {phi!r}")


# -- point-to-interval transform ---------------------------------------------------

MARK = "#"


def _any_mark(scope: list) -> Formula:
    if not scope:
        raise FormulaError("temporal operator with no path variable in scope")
    out: Formula = Prop(MARK, scope[0])
    for v in scope[1:]:
        out = Or(out, Prop(MARK, v))
    return out


def point_to_interval(phi: Formula, scope: Optional[list] = None) -> Formula:
    """Rewrite a point-based formula so that it speaks only about event instants.

    ``scope`` lists the path variables in scope at the root (defaults to the
    free variables); binders below extend it.
    """
    scope = list(free_vars(phi) if scope is None else scope)

    def go(f, sc):
        if isinstance(f, (Prop, NegProp)):
            return And(Prop(MARK, f.var), f)
        if isinstance(f, And):
            return And(go(f.left, sc), go(f.right, sc))
        if isinstance(f, Or):
            return Or(go(f.left, sc), go(f.right, sc))
        if isinstance(f, Finally):
            return Finally(f.interval, And(_any_mark(sc), go(f.body, sc)))
        if isinstance(f, Globally):
            return Globally(f.interval, Implies(_any_mark(sc), go(f.body, sc)))
        if isinstance(f, Until):
            return Until(
                f.interval,
                Implies(_any_mark(sc), go(f.left, sc)),
                And(_any_mark(sc), go(f.right, sc)),
            )
        if isinstance(f, Exists):
            return Exists(f.var, go(f.body, sc + [f.var]))
        if isinstance(f, Forall):
            return Forall(f.var, go(f.body, sc + [f.var]))
        raise FormulaError(f"cannot transform {f!r}")

    return go(phi, scope)


def scale_formula(phi: Formula, factor) -> Formula:
    """Multiply every interval endpoint by ``factor``."""

    def sc(iv: Interval) -> Interval:
        return Interval(iv.left * factor, iv.right * factor, iv.left_closed, iv.right_closed)

    def go(f):
        if isinstance(f, (Prop, NegProp)):
            return f
        if isinstance(f, Finally):
            return Finally(sc(f.interval), go(f.body))
        if isinstance(f, Globally):
            return Globally(sc(f.interval), go(f.body))
        if isinstance(f, Until):
            return Until(sc(f.interval), go(f.left), go(f.right))
        if isinstance(f, (Exists, Forall)):
            return type(f)(f.var, go(f.body))
        return type(f)(go(f.left), go(f.right))

    return go(phi)


# -- printing --------------------------------------------------------------------


def to_text(phi: Formula) -> str:
    """Concrete syntax accepted by :func:`parse`; binary operators are always bracketed."""
    if isinstance(phi, Prop):
        return f"{phi.prop}@{phi.var}"
    if isinstance(phi, NegProp):
        return f"!{phi.prop}@{phi.var}"
    if isinstance(phi, And):
        return f"({to_text(phi.left)} & {to_text(phi.right)})"
    if isinstance(phi, Or):
        return f"({to_text(phi.left)} | {to_text(phi.right)})"
    if isinstance(phi, Implies):
        return f"({to_text(phi.left)} => {to_text(phi.right)})"
    if isinstance(phi, Finally):
        return f"F{phi.interval} {_operand(phi.body)}"
    if isinstance(phi, Globally):
        return f"G{phi.interval} {_operand(phi.body)}"
    if isinstance(phi, Until):
        return f"({to_text(phi.left)} U{phi.interval} {to_text(phi.right)})"
    if isinstance(phi, (Exists, Forall)):
        kw = "exists" if isinstance(phi, Exists) else "forall"
        return f"{kw} {phi.var}. {to_text(phi.body)}"
    raise TypeError(f"not a formula: {phi!r}")


def _operand(phi: Formula) -> str:
    if isinstance(phi, QUANTIFIERS):
        return f"({to_text(phi)})"
    return to_text(phi)


# -- parsing -----------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op><->|->|=>|[&|!@.\[\](),])|(?P<num>-?\d+(?:/\d+)?)|(?P<id>[A-Za-z_#][A-Za-z0-9_#']*))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


_BINARY_LEVELS = [("<->",), ("->", "=>"), ("|",), ("&",)]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value:
            shown = val or "end of input"
            raise FormulaError(f"expected {value!r}, found {shown!r}", pos, self.text)

    def error(self, msg):
        raise FormulaError(msg, self.peek()[2], self.text)

    def formula(self):
        kind, val, _ = self.peek()
        if kind == "id" and val in ("exists", "forall"):
            return self.quant()
        return self.binary(0)

    def quant(self):
        _, kw, _ = self.next()
        kind, var, pos = self.next()
        if kind != "id":
            raise FormulaError("expected a path variable", pos, self.text)
        self.expect(".")
        body = self.formula()
        return Exists(var, body) if kw == "exists" else Forall(var, body)

    def binary(self, level):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        ops = _BINARY_LEVELS[level]
        left = self.binary(level + 1)
        while self.peek()[1] in ops and self.peek()[0] == "op":
            op = self.next()[1]
            if self.peek()[0] == "id" and self.peek()[1] in ("exists", "forall"):
                right = self.quant()
            else:
                right = self.binary(level + 1)
            left = _combine(op, left, right)
        return left

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "!":
            self.next()
            operand = self.unary()
            try:
                return negate(operand)
            except FormulaError as exc:
                raise FormulaError(str(exc), pos, self.text) from None
        if kind == "id" and val in ("exists", "forall"):
            return self.quant()
        if kind == "id" and val in ("F", "G") and self.peek(1)[1] in ("[", "("):
            self.next()
            iv = self.interval()
            body = self.unary()
            return Finally(iv, body) if val == "F" else Globally(iv, body)
        if kind == "op" and val == "(":
            self.next()
            inner = self.formula()
            if self.peek()[0] == "id" and self.peek()[1] == "U":
                self.next()
                iv = self.interval()
                right = self.formula()
                self.expect(")")
                return Until(iv, inner, right)
            self.expect(")")
            return inner
        if kind == "id":
            self.next()
            if self.peek()[1] != "@":
                raise FormulaError(f"expected '@' after proposition {val!r}", self.peek()[2], self.text)
            self.next()
            k2, var, p2 = self.next()
            if k2 != "id":
                raise FormulaError("expected a path variable after '@'", p2, self.text)
            return Prop(val, var)
        shown = val or "end of input"
        raise FormulaError(f"unexpected {shown!r}", pos, self.text)

    def interval(self) -> Interval:
        kind, br, pos = self.next()
        if br not in ("[", "("):
            raise FormulaError("expected '[' or '(' to open an interval", pos, self.text)
        k1, lo, p1 = self.next()
        if k1 != "num":
            raise FormulaError("expected a rational left endpoint", p1, self.text)
        self.expect(",")
        k2, hi, p2 = self.next()
        if k2 not in ("num", "id") or (k2 == "id" and hi not in ("inf", "oo")):
            raise FormulaError("expected a rational or 'inf' right endpoint", p2, self.text)
        k3, cb, p3 = self.next()
        if cb not in ("]", ")"):
            raise FormulaError("expected ']' or ')' to close an interval", p3, self.text)
        try:
            return Interval(rat(lo), bound(hi), br == "[", cb == "]")
        except TimeError as exc:
            raise FormulaError(str(exc), pos, self.text) from None


def _combine(op, left, right):
    if op == "&":
        return And(left, right)
    if op == "|":
        return Or(left, right)
    if op == "->":
        return Or(negate(left), right)
    if op == "=>":
        return Implies(left, right)
    if op == "<->":
        return And(Or(negate(left), right), Or(negate(right), left))
    raise AssertionError(op)


def parse(text: str, allow_open_temporal: bool = False) -> Formula:
    """Parse concrete syntax into an NNF tree and check well-formedness.

    ``allow_open_temporal`` admits temporal operators outside every quantifier,
    which is convenient for formulas evaluated over a fixed environment.
    """
    p = _Parser(text)
    phi = p.formula()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise FormulaError(f"trailing input {val!r}", pos, text)
    check_well_formed(phi, allow_open_temporal)
    return phi
