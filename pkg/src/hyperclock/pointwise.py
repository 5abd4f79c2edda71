"""Point-based timed automata and their simulation by interval-based automata.

An event-driven automaton is observed only at the instants its transitions
fire.  :func:`build_interval_automaton` turns it into an interval-based
automaton whose states are the original states plus one state per
transition; the transition states are pinned to single instants by the
reserved clock ``x_sing`` and labelled with the event plus ``#``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .automaton import AutomatonError, Edge, Execution, TimedAutomaton, Violation
from .timecore import INF, TRUE, Atom, Constraint, Interval, TimeBound, conjoin, eval_constraint, fmt_rat, rat

SING_CLOCK = "x_sing"
MARK_PROP = "#"
_EDGE_STATE_RE = re.compile(r"^edge\d+$")


def edge_state(i: int) -> str:
    return f"edge{i}"


@dataclass(frozen=True)
class PointEdge:
    source: str
    event: frozenset
    guards: tuple
    resets: frozenset
    target: str

    def __post_init__(self):
        object.__setattr__(self, "event", frozenset(self.event))
        object.__setattr__(self, "guards", tuple(self.guards))
        object.__setattr__(self, "resets", frozenset(self.resets))


@dataclass(frozen=True, eq=False)
class PointAutomaton:
    propositions: frozenset
    states: tuple
    start: str
    clocks: tuple
    transitions: tuple
    final: frozenset

    def __post_init__(self):
        object.__setattr__(self, "propositions", frozenset(self.propositions))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "clocks", tuple(self.clocks))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "final", frozenset(self.final))
        states = set(self.states)
        if self.start not in states:
            raise AutomatonError(f"start state {self.start!r} is not declared")
        if not self.final <= states:
            raise AutomatonError("final states must be declared states")
        if SING_CLOCK in self.clocks:
            raise AutomatonError(f"{SING_CLOCK} is a reserved clock name")
        if MARK_PROP in self.propositions:
            raise AutomatonError(f"{MARK_PROP!r} is a reserved proposition")
        clash = states & self.propositions
        if clash:
            raise AutomatonError(f"state names double as propositions: {sorted(clash)}")
        for s in self.states:
            if _EDGE_STATE_RE.match(s):
                raise AutomatonError(f"state name {s!r} is reserved for transition states")
        for i, e in enumerate(self.transitions):
            if e.source not in states or e.target not in states:
                raise AutomatonError(f"transition {i} connects undeclared states")
            if not e.event <= self.propositions:
                raise AutomatonError(f"transition {i} uses undeclared propositions")
            if not e.resets <= set(self.clocks):
                raise AutomatonError(f"transition {i} resets undeclared clocks")
            for g in e.guards:
                if len(g.clocks()) > 1 or not g.clocks() <= set(self.clocks):
                    raise AutomatonError(f"transition {i} guard {g} must mention one declared clock")

    def constants(self) -> set:
        out = set()
        for e in self.transitions:
            for g in e.guards:
                out |= g.constants()
        return out


@dataclass(frozen=True)
class PointExecution:
    """Steps ``(transition index, time)``; the start is implicit."""

    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((int(e), rat(t)) for e, t in self.steps))

    @property
    def times(self) -> list:
        return [t for _, t in self.steps]

    @property
    def duration(self) -> Fraction:
        return self.steps[-1][1] if self.steps else Fraction(0)

    def event_at(self, B: PointAutomaton, t) -> Optional[frozenset]:
        for e, ti in self.steps:
            if ti == t:
                return B.transitions[e].event
        return None

    def bounded_by(self, horizon: TimeBound) -> bool:
        return horizon is INF or self.duration < horizon

    def final_state(self, B: PointAutomaton) -> str:
        return B.transitions[self.steps[-1][0]].target if self.steps else B.start

    def __str__(self):
        return " ".join(f"-e{e}@{fmt_rat(t)}->" for e, t in self.steps) or "(no events)"


def point_valuations(B: PointAutomaton, eta: PointExecution) -> list[dict]:
    """``mu_0 .. mu_n`` after each step."""
    mus = [{x: Fraction(0) for x in B.clocks}]
    prev = Fraction(0)
    for e, t in eta.steps:
        edge = B.transitions[e]
        mus.append({x: Fraction(0) if x in edge.resets else mus[-1][x] + (t - prev) for x in B.clocks})
        prev = t
    return mus


def validate_point_execution(B: PointAutomaton, eta: PointExecution) -> list[Violation]:
    out = []
    if not eta.steps:
        out.append(Violation("empty", 0, None, "a point execution needs at least one event"))
        return out
    state = B.start
    prev_t = Fraction(0)
    mu = {x: Fraction(0) for x in B.clocks}
    for i, (e, t) in enumerate(eta.steps, start=1):
        if not 0 <= e < len(B.transitions):
            out.append(Violation("edge", i, t, f"transition index {e} does not exist"))
            return out
        edge = B.transitions[e]
        if edge.source != state:
            out.append(Violation("edge", i, t, f"transition {e} leaves {edge.source}, run is in {state}"))
        if t < 0:
            out.append(Violation("time", i, t, "negative event time"))
        if i > 1 and t <= prev_t:
            out.append(
                Violation("monotonicity", i, t, f"event times must increase strictly ({fmt_rat(prev_t)} then {fmt_rat(t)})")
            )
        elapsed = {x: mu[x] + (t - prev_t) for x in B.clocks}
        for g in edge.guards:
            if not eval_constraint(elapsed, g):
                out.append(Violation("guard", i, t, f"guard {g} of transition {e} fails"))
        mu = {x: Fraction(0) if x in edge.resets else elapsed[x] for x in B.clocks}
        state = edge.target
        prev_t = t
    return out


def is_point_accepting(B: PointAutomaton, eta: PointExecution) -> bool:
    return bool(eta.steps) and eta.final_state(B) in B.final


def build_interval_automaton(B: PointAutomaton) -> TimedAutomaton:
    states = list(B.states) + [edge_state(i) for i in range(len(B.transitions))]
    initial = {B.start} | {edge_state(i) for i, e in enumerate(B.transitions) if e.source == B.start}
    labels = {s: {s} for s in B.states}
    for i, e in enumerate(B.transitions):
        labels[edge_state(i)] = set(e.event) | {MARK_PROP}
    clocks = list(B.clocks) + [SING_CLOCK]
    beta = {}
    for i, e in enumerate(B.transitions):
        for x in B.clocks:
            psi = conjoin(g for g in e.guards if g.clocks() == {x})
            if psi != TRUE:
                beta[(edge_state(i), x)] = psi
        beta[(edge_state(i), SING_CLOCK)] = Atom(SING_CLOCK, "=", 0)
    edges = []
    for i, e in enumerate(B.transitions):
        edges.append(Edge(e.source, edge_state(i), (TRUE,), {SING_CLOCK}))
        edges.append(Edge(edge_state(i), e.target, (TRUE,), e.resets))
    final = {edge_state(i) for i, e in enumerate(B.transitions) if e.target in B.final}
    props = set(B.propositions) | set(B.states) | {MARK_PROP}
    return TimedAutomaton(props, states, initial, labels, clocks, beta, edges, final)


def chi(B: PointAutomaton, eta: PointExecution) -> Execution:
    problems = validate_point_execution(B, eta)
    if problems:
        raise AutomatonError("invalid point execution: " + "; ".join(map(str, problems)))
    segs = []
    trans = []
    state = B.start
    prev = None
    for k, (e, t) in enumerate(eta.steps):
        if k == 0:
            if t > 0:
                segs.append((state, Interval(0, t, True, False)))
                trans.append(2 * e)
        else:
            trans.append(2 * eta.steps[k - 1][0] + 1)
            segs.append((state, Interval(prev, t, False, False)))
            trans.append(2 * e)
        segs.append((edge_state(e), Interval.point(t)))
        state = B.transitions[e].target
        prev = t
    return Execution(tuple(segs), tuple(trans))


def chi_inverse(B: PointAutomaton, rho: Execution) -> PointExecution:
    """The unique point execution mapped to ``rho`` by :func:`chi`."""
    segs = list(rho.segments)
    steps = []
    k = 0
    state = B.start
    if not segs:
        raise AutomatonError("empty execution")
    if not _EDGE_STATE_RE.match(segs[0][0]):
        if segs[0][0] != state:
            raise AutomatonError(f"execution starts in {segs[0][0]}, expected {state}")
        k = 1
    expect_edge = True
    prev_t = None
    while k < len(segs):
        name, iv = segs[k]
        if expect_edge:
            if not _EDGE_STATE_RE.match(name):
                raise AutomatonError(f"segment {k} should be a transition state, got {name}")
            if not iv.singular:
                raise AutomatonError(f"transition segment {k} is not singular: {iv}")
            e = int(name[4:])
            if e >= len(B.transitions) or B.transitions[e].source != state:
                raise AutomatonError(f"segment {k}: transition {e} does not leave {state}")
            steps.append((e, iv.left))
            state = B.transitions[e].target
            prev_t = iv.left
        else:
            if name != state:
                raise AutomatonError(f"segment {k} should be state {state}, got {name}")
            if iv.left_closed or iv.right_closed or iv.left != prev_t:
                raise AutomatonError(f"state segment {k} must be an open gap after {fmt_rat(prev_t)}: {iv}")
        expect_edge = not expect_edge
        k += 1
    if expect_edge:
        raise AutomatonError("execution must end in a transition state")
    eta = PointExecution(tuple(steps))
    if chi(B, eta) != rho:
        raise AutomatonError("execution is not in the image of chi")
    return eta
