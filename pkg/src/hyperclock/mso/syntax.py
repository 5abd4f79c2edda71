"""MSO(<,+1) syntax: seven core node types, derived forms and an s-expression format.

Derived connectives never appear in trees; the helper constructors below
expand them into the core on the spot, so every consumer only needs to
handle ``Less, PlusOne, Pred, Or, Not, ExistsFO, ExistsSO``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator


class MsoError(ValueError):
    pass


class Mso:
    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def __str__(self):
        return serialize(self)


@dataclass(frozen=True)
class Less(Mso):
    x: str
    y: str


@dataclass(frozen=True)
class PlusOne(Mso):
    """``y = x + 1``."""

    x: str
    y: str


@dataclass(frozen=True)
class Pred(Mso):
    name: str
    var: str


@dataclass(frozen=True)
class Or(Mso):
    args: tuple

    def children(self):
        return self.args


@dataclass(frozen=True)
class Not(Mso):
    arg: Mso

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class ExistsFO(Mso):
    var: str
    body: Mso

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class ExistsSO(Mso):
    pred: str
    body: Mso

    def children(self):
        return (self.body,)


FALSE = Or(())
TRUE = Not(FALSE)


# -- derived forms ----------------------------------------------------------------


def neg(phi: Mso) -> Mso:
    return phi.arg if isinstance(phi, Not) else Not(phi)


def disj(*args: Mso) -> Mso:
    flat = []
    for a in args:
        if a == TRUE:
            return TRUE
        if isinstance(a, Or):
            flat.extend(a.args)
        else:
            flat.append(a)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def conj(*args: Mso) -> Mso:
    parts = []
    for a in args:
        if a == FALSE:
            return FALSE
        if a == TRUE:
            continue
        if isinstance(a, Not) and isinstance(a.arg, Or) and a.arg.args:
            parts.extend(neg(b) for b in a.arg.args)  # flatten nested conjunctions
        else:
            parts.append(a)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return Not(Or(tuple(neg(p) for p in parts)))


def implies(a: Mso, b: Mso) -> Mso:
    return disj(neg(a), b)


def iff(a: Mso, b: Mso) -> Mso:
    return conj(implies(a, b), implies(b, a))


def forall_fo(var: str, body: Mso) -> Mso:
    return Not(ExistsFO(var, neg(body)))


def forall_so(pred: str, body: Mso) -> Mso:
    return Not(ExistsSO(pred, neg(body)))


def exists_fo(var: str, body: Mso) -> Mso:
    return ExistsFO(var, body)


def leq(x: str, y: str) -> Mso:
    return neg(Less(y, x))


def eq(x: str, y: str) -> Mso:
    return Not(Or((Less(x, y), Less(y, x))))


def false_at(x: str) -> Mso:
    """A falsity mentioning ``x``: ``x < x``."""
    return Less(x, x)


def conjuncts(phi: Mso) -> tuple:
    """Top-level conjuncts of ``phi`` read through the ``not (or (not ..))`` encoding."""
    if isinstance(phi, Not) and isinstance(phi.arg, Or) and phi.arg.args:
        return tuple(neg(a) for a in phi.arg.args)
    return (phi,)


class Fresh:
    """Generator of variable names not clashing with a reserved set."""

    def __init__(self, prefix: str = "z", taken=()):
        self.prefix = prefix
        self.taken = set(taken)
        self._count = itertools.count()

    def __call__(self, hint: str = "") -> str:
        while True:
            name = f"{hint or self.prefix}{next(self._count)}"
            if name not in self.taken:
                self.taken.add(name)
                return name


# -- inspection -------------------------------------------------------------------


def walk(phi: Mso) -> Iterator[Mso]:
    stack = [phi]
    while stack:
        f = stack.pop()
        yield f
        stack.extend(reversed(f.children()))


def free_fo(phi: Mso) -> frozenset:
    if isinstance(phi, (Less, PlusOne)):
        return frozenset((phi.x, phi.y))
    if isinstance(phi, Pred):
        return frozenset((phi.var,))
    if isinstance(phi, ExistsFO):
        return free_fo(phi.body) - {phi.var}
    out = frozenset()
    for c in phi.children():
        out |= free_fo(c)
    return out


def free_so(phi: Mso) -> frozenset:
    if isinstance(phi, Pred):
        return frozenset((phi.name,))
    if isinstance(phi, ExistsSO):
        return free_so(phi.body) - {phi.pred}
    out = frozenset()
    for c in phi.children():
        out |= free_so(c)
    return out


def fo_depth(phi: Mso) -> int:
    if isinstance(phi, ExistsFO):
        return 1 + fo_depth(phi.body)
    return max((fo_depth(c) for c in phi.children()), default=0)


def size(phi: Mso) -> int:
    return sum(1 for _ in walk(phi))


# -- s-expressions ----------------------------------------------------------------


def serialize(phi: Mso) -> str:
    out: list = []

    def go(f):
        if isinstance(f, Less):
            out.append(f"(< {f.x} {f.y})")
        elif isinstance(f, PlusOne):
            out.append(f"(+1 {f.x} {f.y})")
        elif isinstance(f, Pred):
            out.append(f"(pred {f.name} {f.var})")
        elif isinstance(f, Or):
            out.append("(or")
            for a in f.args:
                out.append(" ")
                go(a)
            out.append(")")
        elif isinstance(f, Not):
            out.append("(not ")
            go(f.arg)
            out.append(")")
        elif isinstance(f, ExistsFO):
            out.append(f"(exists-fo {f.var} ")
            go(f.body)
            out.append(")")
        elif isinstance(f, ExistsSO):
            out.append(f"(exists-so {f.pred} ")
            go(f.body)
            out.append(")")
        else:
            raise MsoError(f"not an MSO formula: {f!r}")

    go(phi)
    return "".join(out)


_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def parse(text: str) -> Mso:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise MsoError(f"unexpected character at {pos}")
            break
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    k = 0

    def take():
        nonlocal k
        if k >= len(tokens):
            raise MsoError("unexpected end of input")
        k += 1
        return tokens[k - 1]

    def atom():
        tok, p = take()
        if tok in ("(", ")"):
            raise MsoError(f"expected a name at {p}")
        return tok

    def close():
        tok, p = take()
        if tok != ")":
            raise MsoError(f"expected ')' at {p}, found {tok!r}")

    def expr():
        tok, p = take()
        if tok != "(":
            raise MsoError(f"expected '(' at {p}, found {tok!r}")
        head, hp = take()
        if head == "<":
            node = Less(atom(), atom())
        elif head == "+1":
            node = PlusOne(atom(), atom())
        elif head == "pred":
            node = Pred(atom(), atom())
        elif head == "not":
            node = Not(expr())
        elif head == "exists-fo":
            v = atom()
            node = ExistsFO(v, expr())
        elif head == "exists-so":
            v = atom()
            node = ExistsSO(v, expr())
        elif head == "or":
            args = []
            while k < len(tokens) and tokens[k][0] != ")":
                args.append(expr())
            node = Or(tuple(args))
        else:
            raise MsoError(f"unknown operator {head!r} at {hp}")
        close()
        return node

    node = expr()
    if k != len(tokens):
        raise MsoError(f"trailing input at {tokens[k][1]}")
    return node
