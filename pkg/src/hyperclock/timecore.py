"""Exact time arithmetic: rationals, intervals, interval sequences and clock constraints.

Every time constant in the toolkit is a :class:`fractions.Fraction`.  The only
non-rational value is :data:`INF`, used as the right endpoint of unbounded
intervals.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Union


class TimeError(ValueError):
    """Raised for malformed times, intervals and clock constraints."""


class _Infinity:
    """Right endpoint of unbounded intervals; compares above every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    __str__ = lambda self: "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("hyperclock-inf")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise TimeError("inf - inf is undefined")
        return self


INF = _Infinity()

TimeBound = Union[Fraction, _Infinity]

_RAT_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")


def rat(value) -> Fraction:
    """Coerce ``value`` to a Fraction, rejecting floats and decimal strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TimeError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RAT_RE.match(value)
        if not m:
            raise TimeError(f"not a rational literal: {value!r}")
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise TimeError(f"zero denominator: {value!r}")
        return Fraction(int(m.group(1)), den)
    raise TimeError(f"not a rational: {value!r}")


def bound(value) -> TimeBound:
    if value is INF or (isinstance(value, str) and value.strip() in ("inf", "oo", "∞")):
        return INF
    return rat(value)


def fmt_rat(q: TimeBound) -> str:
    if q is INF:
        return "inf"
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Interval:
    left: Fraction
    right: TimeBound
    left_closed: bool = True
    right_closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "left", rat(self.left))
        object.__setattr__(self, "right", bound(self.right))
        if self.left < 0:
            raise TimeError(f"negative left endpoint in {self}")
        if self.right is INF:
            if self.right_closed:
                raise TimeError("an interval cannot be closed at inf")
        elif self.left > self.right:
            raise TimeError(f"left endpoint exceeds right endpoint in {self}")
        elif self.left == self.right and not (self.left_closed and self.right_closed):
            raise TimeError(f"empty interval {self}")

    @classmethod
    def closed(cls, a, b) -> "Interval":
        return cls(a, b, True, True)

    @classmethod
    def point(cls, a) -> "Interval":
        return cls(a, a, True, True)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        s = text.strip()
        if len(s) < 5 or s[0] not in "[(" or s[-1] not in "])" or "," not in s:
            raise TimeError(f"malformed interval: {text!r}")
        lo, hi = s[1:-1].split(",", 1)
        return cls(rat(lo), bound(hi), s[0] == "[", s[-1] == "]")

    # L(I) and R(I)
    @property
    def L(self) -> Fraction:
        return self.left

    @property
    def R(self) -> TimeBound:
        return self.right

    @property
    def singular(self) -> bool:
        return self.right == self.left

    @property
    def bounded(self) -> bool:
        return self.right is not INF

    def __contains__(self, t) -> bool:
        return contains(self, t)

    def __str__(self):
        return "{}{},{}{}".format(
            "[" if self.left_closed else "(",
            fmt_rat(self.left),
            fmt_rat(self.right),
            "]" if self.right_closed else ")",
        )


def contains(interval: Interval, t) -> bool:
    """Membership of ``t`` in ``interval`` honouring the open/closed flags."""
    if t is INF:
        return False
    if t < interval.left or (t == interval.left and not interval.left_closed):
        return False
    if interval.right is INF:
        return True
    return t < interval.right or (t == interval.right and interval.right_closed)


def shift(t, interval: Interval) -> Interval:
    """Translate ``interval`` by ``t`` (the interval ``t + I``)."""
    t = rat(t)
    if t < 0:
        raise TimeError("shift amount must be nonnegative")
    return Interval(interval.left + t, interval.right + t, interval.left_closed, interval.right_closed)


def consecutive(first: Interval, second: Interval) -> bool:
    if first.right is INF or first.right != second.left:
        return False
    in_first = first.right_closed
    in_second = second.left_closed
    if in_first == in_second:
        return False
    # disjointness fails only when one of them is the shared singular point
    if first.singular and in_second:
        return False
    if second.singular and in_first:
        return False
    return True


def validate_sequence(intervals: Iterable[Interval]) -> list[str]:
    """Return the violated interval-sequence conditions (empty when valid)."""
    items = list(intervals)
    problems = []
    if not items:
        return ["interval sequence is empty"]
    first = items[0]
    if first.left != 0 or not first.left_closed:
        problems.append(f"Initial: first interval {first} must start at 0 and contain it")
    for i, (a, b) in enumerate(zip(items, items[1:])):
        if not consecutive(a, b):
            problems.append(f"Consecution: intervals {i} {a} and {i + 1} {b} are not consecutive")
    return problems


def intersect_upto(interval: Interval, t) -> Interval:
    """``interval`` intersected with ``[0, t]``; ``t`` must lie in ``interval``."""
    if not contains(interval, t):
        raise TimeError(f"{fmt_rat(t)} is not in {interval}")
    return Interval(interval.left, t, interval.left_closed, True)


# -- clock constraints -------------------------------------------------------

RELATIONS = ("<", "<=", "=", ">=", ">")

_REL_FN = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


class Constraint:
    """Negation-free clock constraint tree."""

    def clocks(self) -> frozenset:
        raise NotImplementedError

    def constants(self) -> set:
        raise NotImplementedError


@dataclass(frozen=True)
class TrueConstraint(Constraint):
    def clocks(self):
        return frozenset()

    def constants(self):
        return set()

    def __str__(self):
        return "true"


TRUE = TrueConstraint()


@dataclass(frozen=True)
class Atom(Constraint):
    clock: str
    rel: str
    const: Fraction

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise TimeError(f"unknown relation {self.rel!r}")
        c = rat(self.const)
        if c < 0:
            raise TimeError(f"negative constant in clock constraint: {fmt_rat(c)}")
        object.__setattr__(self, "const", c)

    def clocks(self):
        return frozenset([self.clock])

    def constants(self):
        return {self.const}

    def __str__(self):
        return f"({self.rel} {self.clock} {fmt_rat(self.const)})"


@dataclass(frozen=True)
class And(Constraint):
    left: Constraint
    right: Constraint

    def clocks(self):
        return self.left.clocks() | self.right.clocks()

    def constants(self):
        return self.left.constants() | self.right.constants()

    def __str__(self):
        return f"(and {self.left} {self.right})"


@dataclass(frozen=True)
class Or(Constraint):
    left: Constraint
    right: Constraint

    def clocks(self):
        return self.left.clocks() | self.right.clocks()

    def constants(self):
        return self.left.constants() | self.right.constants()

    def __str__(self):
        return f"(or {self.left} {self.right})"


def conjoin(parts: Iterable[Constraint]) -> Constraint:
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    return reduce(And, parts)


def eval_constraint(mu: Mapping[str, Fraction], psi: Constraint) -> bool:
    if isinstance(psi, TrueConstraint):
        return True
    if isinstance(psi, Atom):
        if psi.clock not in mu:
            raise TimeError(f"unknown clock {psi.clock!r}")
        return _REL_FN[psi.rel](mu[psi.clock], psi.const)
    if isinstance(psi, And):
        return eval_constraint(mu, psi.left) and eval_constraint(mu, psi.right)
    if isinstance(psi, Or):
        return eval_constraint(mu, psi.left) or eval_constraint(mu, psi.right)
    raise TypeError(f"not a clock constraint: {psi!r}")


def restrict_to_clock(psi: Constraint, clock: str) -> bool:
    return psi.clocks() <= {clock}


def first_violation(psi: Constraint, clock: str, base: Fraction, interval: Interval):
    """Earliest-found time in ``interval`` where ``clock = base + (t - L(I))`` violates ``psi``.

    ``psi`` must mention only ``clock``.  Truth of ``psi`` changes only at its
    constants, so checking those, the included endpoints and one point inside
    every gap is exact.  Returns ``None`` when ``psi`` holds throughout.
    """
    lo = interval.left
    offset = base - lo  # value(t) = t + offset
    consts = sorted({c - offset for c in psi.constants()})
    pts = [lo]
    pts += [c for c in consts if c > lo and (interval.right is INF or c < interval.right)]
    if interval.right is INF:
        pts.append(pts[-1] + 1)
    else:
        pts.append(interval.right)
    probes = []
    for a, b in zip(pts, pts[1:]):
        probes.append(a)
        probes.append((a + b) / 2)
    probes.append(pts[-1])
    for t in probes:
        if not contains(interval, t):
            continue
        if not eval_constraint({clock: t + offset}, psi):
            return t
    return None


_TOKEN_RE = re.compile(r"\s*(\(|\)|[^\s()]+)")


def _tokens(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise TimeError(f"cannot tokenize constraint at {pos}: {text!r}")
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    return out


def parse_constraint(text: str) -> Constraint:
    """Parse the prefix grammar, e.g. ``(and (<= x 2) (or (< y 1) (= y 2)))``."""
    toks = _tokens(text)
    if not toks:
        raise TimeError("empty constraint")
    node, i = _parse_c(toks, 0, text)
    if i != len(toks):
        raise TimeError(f"trailing input at position {toks[i][1]} in {text!r}")
    return node


def _parse_c(toks, i, text):
    if i >= len(toks):
        raise TimeError(f"unexpected end of constraint {text!r}")
    tok, pos = toks[i]
    if tok == "true":
        return TRUE, i + 1
    if tok != "(":
        raise TimeError(f"expected '(' at position {pos} in {text!r}")
    if i + 1 >= len(toks):
        raise TimeError(f"unexpected end of constraint {text!r}")
    head, hpos = toks[i + 1]
    if head in ("and", "or"):
        parts = []
        j = i + 2
        while j < len(toks) and toks[j][0] != ")":
            part, j = _parse_c(toks, j, text)
            parts.append(part)
        if j >= len(toks):
            raise TimeError(f"unbalanced parentheses in {text!r}")
        if len(parts) < 2:
            raise TimeError(f"'{head}' needs two operands at position {hpos} in {text!r}")
        ctor = And if head == "and" else Or
        return reduce(ctor, parts), j + 1
    if head in RELATIONS:
        if i + 4 >= len(toks) or toks[i + 4][0] != ")":
            raise TimeError(f"malformed atom at position {hpos} in {text!r}")
        clock = toks[i + 2][0]
        return Atom(clock, head, rat(toks[i + 3][0])), i + 5
    raise TimeError(f"unknown operator {head!r} at position {hpos} in {text!r}")


def scale_to_integers(constants: Iterable) -> tuple[int, dict]:
    """Least common multiple of the denominators and the scaled integer values."""
    consts = [rat(c) for c in constants]
    factor = 1
    for c in consts:
        factor = factor * c.denominator // math.gcd(factor, c.denominator)
    return factor, {c: int(c * factor) for c in consts}
