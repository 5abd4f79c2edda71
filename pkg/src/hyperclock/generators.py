"""Random models for property tests, benchmarks and the acceptance run."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from . import formula as hf
from .automaton import Edge, Execution, TimedAutomaton, encode_flow, validate_execution
from .engine import GridBudget
from .flow import Flow, elementary_pieces, rminus, rplus, state_pred, tminus, tplus
from .pointwise import PointAutomaton, PointEdge, PointExecution
from .timecore import TRUE, And, Atom, Interval, Or, eval_constraint, first_violation

RELS = ("<", "<=", "=", ">=", ">")


def random_constraint(rng: random.Random, clock: str, max_const: int, depth: int = 1):
    if depth <= 0 or rng.random() < 0.6:
        return Atom(clock, rng.choice(RELS), rng.randint(0, max_const))
    ctor = And if rng.random() < 0.5 else Or
    return ctor(random_constraint(rng, clock, max_const, depth - 1), random_constraint(rng, clock, max_const, depth - 1))


def random_automaton(rng: random.Random, max_states: int = 4, max_clocks: int = 2, max_const: int = 3,
                     props=("p", "q"), constraint_rate: float = 0.25, guard_rate: float = 0.4) -> TimedAutomaton:
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    clocks = [f"x{i}" for i in range(rng.randint(0, max_clocks))]
    labels = {s: {p for p in props if rng.random() < 0.5} for s in states}
    initial = {states[0]} | {s for s in states[1:] if rng.random() < 0.2}
    final = {s for s in states if rng.random() < 0.6} or {rng.choice(states)}
    sc = {}
    for s in states:
        for x in clocks:
            if rng.random() < constraint_rate:
                # keep state constraints satisfiable at 0 most of the time
                sc[(s, x)] = Atom(x, rng.choice(("<=", "<", ">=")), rng.randint(1, max_const))
    edges = []
    for _ in range(rng.randint(n - 1 if n > 1 else 1, 2 * n + 1)):
        a, b = rng.choice(states), rng.choice(states)
        guards = tuple(random_constraint(rng, x, max_const) for x in clocks if rng.random() < guard_rate)
        resets = {x for x in clocks if rng.random() < 0.4}
        edges.append(Edge(a, b, guards, resets))
    return TimedAutomaton(set(props), states, initial, labels, clocks, sc, edges, final)


def random_run(A: TimedAutomaton, budget: GridBudget, rng: random.Random, tries: int = 200,
               full_span: bool = False) -> Optional[Execution]:
    """A random accepting grid run, or ``None`` when sampling keeps hitting dead ends.

    With ``full_span`` the run is alive on all of ``[0,N)`` (its last segment ends open at ``N``).
    """
    grid = budget.grid()
    N = budget.horizon
    for _ in range(tries):
        state = rng.choice(sorted(A.initial))
        left, lc = Fraction(0), True
        mu = {x: Fraction(0) for x in A.clocks}
        segs, trans = [], []
        while True:
            options = [(b, rc) for b in grid if b >= left for rc in (False, True)
                       if not (b == left and not (lc and rc))]
            rng.shuffle(options)
            if full_span and (state in A.final and rng.random() < 0.4 or len(trans) >= budget.max_transitions):
                options.insert(0, (N, False))
            chosen = None
            for b, rc in options[:8]:
                iv = Interval(left, b, lc, rc)
                if all(first_violation(A.beta(state, x), x, mu[x], iv) is None for x in A.clocks):
                    chosen = (b, rc, iv)
                    break
            if chosen is None:
                break
            b, rc, iv = chosen
            segs.append((state, iv))
            can_stop = state in A.final and ((b == N and not rc) if full_span else (b < N or not rc))
            pre = {x: mu[x] + (b - left) for x in A.clocks}
            moves = [e for e, ed in enumerate(A.edges)
                     if ed.source == state and all(eval_constraint(pre, g) for g in ed.guards)]
            if len(trans) >= budget.max_transitions or b >= N:
                moves = []
            if can_stop and (not moves or rng.random() < 0.35):
                return Execution(tuple(segs), tuple(trans))
            if not moves:
                break
            e = rng.choice(moves)
            trans.append(e)
            mu = {x: Fraction(0) if x in A.edges[e].resets else pre[x] for x in A.clocks}
            state, left, lc = A.edges[e].target, b, not rc
    return None


def random_runs(A: TimedAutomaton, budget: GridBudget, rng: random.Random, count: int, attempts: int = 0,
                full_span: bool = False) -> list:
    seen = set()
    out = []
    misses = 0
    for _ in range(attempts or count * 5):
        r = random_run(A, budget, rng, full_span=full_span)
        if r is None:
            # each miss already spent many tries; the automaton is likely stuck
            misses += 1
            if misses >= 3:
                break
            continue
        if r not in seen:
            seen.add(r)
            out.append(r)
            if len(out) >= count:
                break
    return out


def mutate_flow(f: Flow, preds: list, rng: random.Random, granularity: int, edits: int = 1) -> Flow:
    """Toggle a few predicates on grid pieces of ``f``."""
    pts = [Fraction(i, granularity) for i in range(int(f.horizon * granularity) + 1)]
    pieces = elementary_pieces(pts + f.breakpoints(), f.horizon)
    labels = [set(f.at(iv.left if iv.singular else _mid(iv))) for iv in pieces]
    for _ in range(edits):
        k = rng.randrange(len(labels))
        p = rng.choice(preds)
        labels[k] ^= {p}
        if rng.random() < 0.3 and k + 1 < len(labels):
            labels[k + 1] ^= {p}
    return Flow(f.horizon, tuple((iv, frozenset(l)) for iv, l in zip(pieces, labels)))


def random_grid_flow(A: TimedAutomaton, rng: random.Random, horizon: int, granularity: int) -> Flow:
    """A flow over ``A``'s predicates built without reference to any run.

    Each grid piece up to a random cut-off gets one state (usually the
    previous one); grid points also get random transition and reset marks.
    Most such flows encode nothing; the rest are what decoding must handle.
    """
    pts = [Fraction(i, granularity) for i in range(horizon * granularity + 1)]
    pieces = elementary_pieces(pts, Fraction(horizon))
    stop = rng.randrange(1, len(pieces) + 1)
    state = rng.choice(sorted(A.initial))
    out = []
    for k, iv in enumerate(pieces[:stop]):
        if rng.random() < 0.35:
            state = rng.choice(list(A.states))
        labels = {state_pred(state)}
        if iv.left == iv.right:
            for e in range(len(A.edges)):
                if rng.random() < 0.25:
                    labels.add(tminus(e))
                if rng.random() < 0.25:
                    labels.add(tplus(e))
            for x in A.clocks:
                if rng.random() < (0.9 if k == 0 else 0.2):
                    labels.add(rminus(x))
                if rng.random() < 0.2:
                    labels.add(rplus(x))
        out.append((iv, frozenset(labels)))
    return Flow(Fraction(horizon), tuple(out))


def _mid(iv: Interval):
    return (iv.left + iv.right) / 2


def random_qf_formula(rng: random.Random, vars_: list, props=("p", "q"), depth: int = 3, max_const: int = 3,
                      allow_until: bool = True):
    """Random quantifier-free formula with temporal nesting at most ``depth``."""
    def interval():
        a = rng.randint(0, max_const)
        if rng.random() < 0.25:
            return Interval(a, hf.INF, rng.random() < 0.5, False)
        b = rng.randint(a, max_const + 1)
        if a == b:
            return Interval.point(a)
        return Interval(a, b, rng.random() < 0.5, rng.random() < 0.5)

    def go(d):
        r = rng.random()
        if d == 0 or r < 0.3:
            ctor = hf.Prop if rng.random() < 0.5 else hf.NegProp
            return ctor(rng.choice(props), rng.choice(vars_))
        if r < 0.5:
            ctor = hf.And if rng.random() < 0.5 else hf.Or
            return ctor(go(d), go(d - 1))
        if r < 0.65:
            return hf.Finally(interval(), go(d - 1))
        if r < 0.8 or not allow_until:
            return hf.Globally(interval(), go(d - 1))
        return hf.Until(interval(), go(d - 1), go(d - 1))

    return go(depth)


def random_point_automaton(rng: random.Random, max_states: int = 3, max_clocks: int = 1, max_const: int = 3,
                           props=("p", "q")) -> PointAutomaton:
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    clocks = [f"c{i}" for i in range(rng.randint(0, max_clocks))]
    trans = []
    for _ in range(rng.randint(1, 2 * n + 1)):
        a, b = rng.choice(states), rng.choice(states)
        ev = frozenset(p for p in props if rng.random() < 0.5)
        guards = tuple(random_constraint(rng, x, max_const, 0) for x in clocks if rng.random() < 0.4)
        resets = {x for x in clocks if rng.random() < 0.4}
        trans.append(PointEdge(a, ev, guards, resets, b))
    final = {s for s in states if rng.random() < 0.6} or {rng.choice(states)}
    return PointAutomaton(set(props), states, states[0], clocks, trans, final)
