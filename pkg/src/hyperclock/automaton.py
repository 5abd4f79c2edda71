"""Interval-based timed automata, their executions and the execution/flow encoding."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .flow import MARK, Flow, elementary_pieces, pred_kind, rminus, rplus, state_pred, tminus, tplus
from .timecore import (
    INF,
    TRUE,
    Constraint,
    Interval,
    TimeBound,
    TimeError,
    conjoin,
    contains,
    eval_constraint,
    first_violation,
    fmt_rat,
    intersect_upto,
    validate_sequence,
)


class AutomatonError(TimeError):
    """Malformed automaton or execution input."""


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guards: tuple = ()
    resets: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "guards", tuple(self.guards))
        object.__setattr__(self, "resets", frozenset(self.resets))


@dataclass(frozen=True, eq=False)
class TimedAutomaton:
    propositions: frozenset
    states: tuple
    initial: frozenset
    labels: Mapping
    clocks: tuple
    state_constraints: Mapping
    edges: tuple
    final: frozenset

    def __post_init__(self):
        object.__setattr__(self, "propositions", frozenset(self.propositions))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "clocks", tuple(self.clocks))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "final", frozenset(self.final))
        object.__setattr__(
            self, "labels", {v: frozenset(self.labels.get(v, ())) for v in self.states}
        )
        object.__setattr__(self, "state_constraints", dict(self.state_constraints))
        self._check()

    def _check(self):
        states = set(self.states)
        if len(states) != len(self.states):
            raise AutomatonError("duplicate state names")
        if len(set(self.clocks)) != len(self.clocks):
            raise AutomatonError("duplicate clock names")
        for name in list(self.states) + list(self.clocks):
            if not name or any(ch in name for ch in " ()@:\t\n"):
                raise AutomatonError(f"illegal identifier {name!r}")
        if not self.initial <= states:
            raise AutomatonError(f"initial states {sorted(self.initial - states)} are not declared")
        if not self.final <= states:
            raise AutomatonError(f"final states {sorted(self.final - states)} are not declared")
        for v, props in self.labels.items():
            extra = props - self.propositions
            if extra:
                raise AutomatonError(f"state {v} uses undeclared propositions {sorted(extra)}")
        for (v, x), psi in self.state_constraints.items():
            if v not in states or x not in self.clocks:
                raise AutomatonError(f"state constraint for unknown pair ({v}, {x})")
            if not psi.clocks() <= {x}:
                raise AutomatonError(f"constraint {psi} on ({v}, {x}) mentions other clocks")
        for i, e in enumerate(self.edges):
            if e.source not in states or e.target not in states:
                raise AutomatonError(f"edge {i} connects undeclared states")
            if not e.resets <= set(self.clocks):
                raise AutomatonError(f"edge {i} resets undeclared clocks")
            for g in e.guards:
                if len(g.clocks()) > 1:
                    raise AutomatonError(f"edge {i} guard {g} mentions more than one clock")
                if not g.clocks() <= set(self.clocks):
                    raise AutomatonError(f"edge {i} guard {g} uses an undeclared clock")

    def label(self, v: str) -> frozenset:
        return self.labels[v]

    def beta(self, v: str, x: str) -> Constraint:
        return self.state_constraints.get((v, x), TRUE)

    def guard_on(self, e: int, x: str) -> Constraint:
        """Conjunction of the guards of edge ``e`` that mention clock ``x``."""
        return conjoin(g for g in self.edges[e].guards if g.clocks() == {x})

    def constants(self) -> set:
        out = set()
        for psi in self.state_constraints.values():
            out |= psi.constants()
        for e in self.edges:
            for g in e.guards:
                out |= g.constants()
        return out

    def predicate_names(self) -> list[str]:
        names = [state_pred(v) for v in self.states]
        names += [tminus(i) for i in range(len(self.edges))]
        names += [tplus(i) for i in range(len(self.edges))]
        names += [rminus(x) for x in self.clocks]
        names += [rplus(x) for x in self.clocks]
        return names

    def scaled(self, factor: int) -> "TimedAutomaton":
        """Copy with every clock constant multiplied by ``factor``."""
        return TimedAutomaton(
            self.propositions,
            self.states,
            self.initial,
            self.labels,
            self.clocks,
            {k: scale_constraint(c, factor) for k, c in self.state_constraints.items()},
            tuple(
                Edge(e.source, e.target, tuple(scale_constraint(g, factor) for g in e.guards), e.resets)
                for e in self.edges
            ),
            self.final,
        )


def scale_constraint(psi: Constraint, factor) -> Constraint:
    from .timecore import And, Atom, Or

    if isinstance(psi, Atom):
        return Atom(psi.clock, psi.rel, psi.const * factor)
    if isinstance(psi, And):
        return And(scale_constraint(psi.left, factor), scale_constraint(psi.right, factor))
    if isinstance(psi, Or):
        return Or(scale_constraint(psi.left, factor), scale_constraint(psi.right, factor))
    return psi


@dataclass(frozen=True, eq=True)
class Execution:
    segments: tuple
    transitions: tuple = ()

    def __post_init__(self):
        segs = tuple((v, iv) for v, iv in self.segments)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "transitions", tuple(int(e) for e in self.transitions))
        if not segs:
            raise AutomatonError("an execution needs at least one segment")
        if len(self.transitions) != len(segs) - 1:
            raise AutomatonError(
                f"{len(segs)} segments need {len(segs) - 1} transitions, got {len(self.transitions)}"
            )

    @property
    def states(self) -> list:
        return [v for v, _ in self.segments]

    @property
    def intervals(self) -> list:
        return [iv for _, iv in self.segments]

    @property
    def end(self) -> TimeBound:
        return self.segments[-1][1].right

    def index_at(self, t) -> Optional[int]:
        for i, (_, iv) in enumerate(self.segments):
            if contains(iv, t):
                return i
        return None

    def alive(self, t) -> bool:
        last = self.segments[-1][1]
        if t < 0:
            return False
        if last.right is INF:
            return True
        return t < last.right or (t == last.right and last.right_closed)

    def state_at(self, t) -> Optional[str]:
        i = self.index_at(t)
        return None if i is None else self.segments[i][0]

    def bounded_by(self, horizon: TimeBound) -> bool:
        if horizon is INF:
            return True
        last = self.segments[-1][1]
        if last.right is INF:
            return False
        return last.right < horizon or (last.right == horizon and not last.right_closed)

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.segments, self.transitions))
            object.__setattr__(self, "_hash", h)
        return h

    def breakpoints(self) -> list:
        pts = set()
        for _, iv in self.segments:
            pts.add(iv.left)
            if iv.right is not INF:
                pts.add(iv.right)
        return sorted(pts)

    def __str__(self):
        parts = [f"({self.segments[0][0]},{self.segments[0][1]})"]
        for e, (v, iv) in zip(self.transitions, self.segments[1:]):
            parts.append(f"-e{e}-> ({v},{iv})")
        return " ".join(parts)


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    time: Optional[Fraction]
    detail: str

    def __str__(self):
        at = "" if self.time is None else f" at t={fmt_rat(self.time)}"
        return f"{self.kind} (index {self.index}{at}): {self.detail}"


def entry_valuations(A: TimedAutomaton, rho: Execution) -> list[dict]:
    """Clock values on entering each segment."""
    mus = [{x: Fraction(0) for x in A.clocks}]
    for i, e in enumerate(rho.transitions):
        iv = rho.segments[i][1]
        if iv.right is INF:
            raise AutomatonError(f"segment {i} is unbounded but followed by a transition")
        elapsed = iv.right - iv.left
        resets = A.edges[e].resets if 0 <= e < len(A.edges) else frozenset()
        mus.append({x: Fraction(0) if x in resets else mus[-1][x] + elapsed for x in A.clocks})
    return mus


def validate_execution(A: TimedAutomaton, rho: Execution) -> list[Violation]:
    """All violated execution conditions; an empty list means ``rho`` is an execution."""
    out = []
    states = set(A.states)
    for i, v in enumerate(rho.states):
        if v not in states:
            out.append(Violation("unknown-state", i, None, f"state {v!r} is not declared"))
    for i, e in enumerate(rho.transitions):
        if not 0 <= e < len(A.edges):
            out.append(Violation("edge", i, None, f"edge index {e} does not exist"))
    if out:
        return out
    for msg in validate_sequence(rho.intervals):
        kind = "initial-interval" if msg.startswith("Initial") else "consecution"
        out.append(Violation(kind, 0, None, msg))
    if rho.states[0] not in A.initial:
        out.append(Violation("initial", 0, Fraction(0), f"first state {rho.states[0]} is not initial"))
    for i, e in enumerate(rho.transitions):
        edge = A.edges[e]
        if (edge.source, edge.target) != (rho.states[i], rho.states[i + 1]):
            out.append(
                Violation(
                    "edge", i, None,
                    f"edge {e} goes {edge.source}->{edge.target}, run goes "
                    f"{rho.states[i]}->{rho.states[i + 1]}",
                )
            )
    if out:
        return out
    mus = entry_valuations(A, rho)
    for i, (v, iv) in enumerate(rho.segments):
        for x in A.clocks:
            psi = A.beta(v, x)
            if psi == TRUE:
                continue
            t = first_violation(psi, x, mus[i][x], iv)
            if t is not None:
                out.append(
                    Violation(
                        "state-constraint", i, t,
                        f"{x} = {fmt_rat(mus[i][x] + t - iv.left)} violates {psi} in state {v}",
                    )
                )
    for i, e in enumerate(rho.transitions):
        iv = rho.segments[i][1]
        mu_pre = {x: mus[i][x] + iv.right - iv.left for x in A.clocks}
        for g in A.edges[e].guards:
            if not eval_constraint(mu_pre, g):
                out.append(
                    Violation("guard", i, iv.right, f"guard {g} of edge {e} fails with {_fmt_mu(mu_pre)}")
                )
    return out


def _fmt_mu(mu) -> str:
    return "{" + ", ".join(f"{x}: {fmt_rat(c)}" for x, c in sorted(mu.items())) + "}"


def is_accepting(A: TimedAutomaton, rho: Execution) -> bool:
    return rho.states[-1] in A.final


def clock_valuation_at(A: TimedAutomaton, rho: Execution, t) -> dict:
    i = rho.index_at(t)
    if i is None:
        raise AutomatonError(f"time {fmt_rat(t)} is outside the execution")
    mu = entry_valuations(A, rho)[i]
    lo = rho.segments[i][1].left
    return {x: mu[x] + t - lo for x in A.clocks}


def prefix(rho: Execution, t) -> Execution:
    i = rho.index_at(t)
    if i is None:
        raise AutomatonError(f"time {fmt_rat(t)} is outside the execution")
    v, iv = rho.segments[i]
    segs = rho.segments[:i] + ((v, intersect_upto(iv, t)),)
    return Execution(segs, rho.transitions[:i])


# -- encoding --------------------------------------------------------------------


def encode_flow(A: TimedAutomaton, rho: Execution, horizon: TimeBound = INF, check: bool = True) -> Flow:
    """The flow of ``rho``: states, transition marks and reset marks over time.

    ``check=False`` skips validation for callers that already validated ``rho``.
    """
    if check:
        problems = validate_execution(A, rho)
        if problems:
            raise AutomatonError("invalid execution: " + "; ".join(map(str, problems)))
        if not is_accepting(A, rho):
            raise AutomatonError(f"execution ends in non-final state {rho.states[-1]}")
    if horizon is not INF and not rho.bounded_by(horizon):
        raise AutomatonError(f"execution is not bounded by {fmt_rat(horizon)}")
    pieces = []
    n = len(rho.segments)
    for i, (v, iv) in enumerate(rho.segments):
        sv = state_pred(v)
        enter = set()
        leave = set()
        if i > 0 and iv.left_closed:
            e = rho.transitions[i - 1]
            enter = {tminus(e)} | {rminus(x) for x in A.edges[e].resets}
        if i == 0:
            enter = {rminus(x) for x in A.clocks}
        if i < n - 1 and iv.right_closed:
            e = rho.transitions[i]
            leave = {tplus(e)} | {rplus(x) for x in A.edges[e].resets}
        if iv.singular:
            pieces.append((iv, frozenset({sv} | enter | leave)))
            continue
        if iv.left_closed:
            pieces.append((Interval.point(iv.left), frozenset({sv} | enter)))
        pieces.append((Interval(iv.left, iv.right, False, False), frozenset({sv})))
        if iv.right_closed:
            pieces.append((Interval.point(iv.right), frozenset({sv} | leave)))
    return Flow(horizon, tuple(pieces))


class DecodeError(ValueError):
    """A flow that is not the encoding of an accepting execution."""

    def __init__(self, prop: int, detail: str, time=None):
        self.prop = prop
        self.detail = detail
        self.time = time
        where = "" if time is None else f" at t={fmt_rat(time)}"
        super().__init__(f"property {prop} ({PROPERTY_NAMES[prop]}) violated{where}: {detail}")


PROPERTY_NAMES = {
    0: "alphabet",
    1: "unique state up to termination",
    2: "initial state",
    3: "at most one transition of each kind",
    4: "transition consistency",
    5: "forced transitions",
    6: "no reset without transition",
    7: "clock recovery",
    8: "resets at the origin",
    9: "state constraints",
    10: "guards",
    11: "acceptance",
    12: "re-encoding",
}


def decode_flow(A: TimedAutomaton, f: Flow) -> Execution:
    """Inverse of :func:`encode_flow` on accepting executions; raises :class:`DecodeError`."""
    known = set(A.predicate_names())
    for p in f.predicates():
        if p not in known:
            raise DecodeError(0, f"predicate {p!r} is not in the automaton's alphabet")
    pieces = []
    for iv in elementary_pieces(f.breakpoints(), f.horizon):
        probe = iv.left if iv.singular else _inside(iv)
        pieces.append((iv, f.at(probe)))
    # support must be a prefix [0,l] or [0,l) of the domain
    last = -1
    for k, (iv, labels) in enumerate(pieces):
        if labels:
            last = k
    if last < 0:
        raise DecodeError(2, "the flow is empty, so no initial state holds at 0", Fraction(0))
    info = []
    for k, (iv, labels) in enumerate(pieces[: last + 1]):
        sts = [pred_kind(p)[1] for p in labels if p.startswith("v:")]
        if len(sts) != 1:
            what = "no state" if not sts else f"states {sorted(sts)}"
            raise DecodeError(1, f"{what} inside the support on {iv}", iv.left)
        info.append((iv, labels, sts[0]))
    if info[0][0] != Interval.point(0):
        raise DecodeError(1, "support does not start with the origin")  # pragma: no cover
    if info[0][2] not in A.initial:
        raise DecodeError(2, f"state {info[0][2]} at 0 is not initial", Fraction(0))

    def kinds(labels, kind):
        return sorted(pred_kind(p)[1] for p in labels if pred_kind(p)[0] == kind)

    segments = []
    transitions = []
    cur_state = info[0][2]
    cur_left = Fraction(0)
    cur_left_closed = True
    for k, (iv, labels, v) in enumerate(info):
        if not iv.singular:
            if labels != {state_pred(v)}:
                extra = sorted(labels - {state_pred(v)})
                prop = 4 if any(p.startswith("t") for p in extra) else 6
                raise DecodeError(prop, f"marks {extra} hold on the nondegenerate piece {iv}", iv.left)
            if v != cur_state:
                raise DecodeError(5, f"state changes to {v} without a transition", iv.left)
            continue
        t = iv.left
        left_state = info[k - 1][2] if k > 0 else None
        right_state = info[k + 1][2] if k + 1 < len(info) else None
        tm = [int(e) for e in kinds(labels, "tminus")]
        tp = [int(e) for e in kinds(labels, "tplus")]
        rm = set(kinds(labels, "rminus"))
        rp = set(kinds(labels, "rplus"))
        if len(tm) > 1 or len(tp) > 1:
            raise DecodeError(3, f"several transitions of one kind: {sorted(labels)}", t)
        if t == 0:
            if tm:
                raise DecodeError(4, "an entering transition at 0 has no left neighbourhood", t)
            if rm != set(A.clocks):
                raise DecodeError(8, f"origin resets {sorted(rm)} differ from all clocks", t)
        else:
            if not tm and rm:
                raise DecodeError(6, f"resets {sorted(rm)} without an entering transition", t)
            if left_state is not None and left_state != v and not tm:
                raise DecodeError(5, f"state {left_state} becomes {v} without a transition", t)
        if not tp and rp:
            raise DecodeError(6, f"resets {sorted(rp)} without a leaving transition", t)
        if right_state is not None and right_state != v and not tp:
            raise DecodeError(5, f"state {v} becomes {right_state} without a transition", t)
        if tm:
            e = tm[0]
            edge = A.edges[e]
            if edge.target != v or edge.source != left_state:
                raise DecodeError(4, f"entering edge {e} does not connect {left_state}->{v}", t)
            if rm != set(edge.resets):
                raise DecodeError(4, f"entering edge {e} resets {sorted(edge.resets)}, flow has {sorted(rm)}", t)
            segments.append((cur_state, Interval(cur_left, t, cur_left_closed, False)))
            transitions.append(e)
            cur_state, cur_left, cur_left_closed = v, t, True
        if tp:
            e = tp[0]
            edge = A.edges[e]
            if right_state is None:
                raise DecodeError(4, f"leaving edge {e} at the end of the support", t)
            if edge.source != v or edge.target != right_state:
                raise DecodeError(4, f"leaving edge {e} does not connect {v}->{right_state}", t)
            if rp != set(edge.resets):
                raise DecodeError(4, f"leaving edge {e} resets {sorted(edge.resets)}, flow has {sorted(rp)}", t)
            segments.append((cur_state, Interval(cur_left, t, cur_left_closed, True)))
            transitions.append(e)
            cur_state, cur_left, cur_left_closed = right_state, t, False
    end_iv = info[-1][0]
    if end_iv.singular:
        segments.append((cur_state, Interval(cur_left, end_iv.left, cur_left_closed, True)))
    else:
        segments.append((cur_state, Interval(cur_left, end_iv.right, cur_left_closed, False)))
    rho = Execution(tuple(segments), tuple(transitions))
    for viol in validate_execution(A, rho):
        prop = {"state-constraint": 9, "guard": 10, "initial": 2}.get(viol.kind, 1)
        raise DecodeError(prop, str(viol), viol.time)
    if not is_accepting(A, rho):
        raise DecodeError(11, f"final state {rho.states[-1]} is not accepting", None)
    if encode_flow(A, rho, f.horizon, check=False) != f:
        raise DecodeError(12, "decoded execution does not re-encode to the flow")  # pragma: no cover
    return rho


def _inside(iv: Interval) -> Fraction:
    if iv.right is INF:
        return iv.left + 1
    return (iv.left + iv.right) / 2


def execution_from_pairs(A: TimedAutomaton, pairs: Sequence, edges: Iterable[int]) -> Execution:
    """Convenience constructor from ``[(state, "[0,5)"), ...]`` and edge indices."""
    segs = tuple((v, iv if isinstance(iv, Interval) else Interval.parse(iv)) for v, iv in pairs)
    return Execution(segs, tuple(edges))
