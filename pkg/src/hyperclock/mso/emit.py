"""Compilation of timed automata and HCMTL* formulas into MSO(<,+1).

``automaton_formula(A)`` holds on a flow exactly when the flow encodes an
accepting execution of ``A``.  ``translate`` produces, for every possible
anchor index, a formula with one free variable ``x`` that holds at ``t`` on
the flow of a path environment exactly when the HCMTL* formula holds there.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .. import formula as hf
from ..automaton import Execution, TimedAutomaton, encode_flow
from ..flow import Flow, indexed, rminus, rplus, state_pred, tminus, tplus, union_flows
from ..timecore import INF, TRUE as CTRUE, And as CAnd, Atom as CAtom, Constraint, Or as COr, TimeBound, eval_constraint, fmt_rat, rat, scale_to_integers
from .evaluate import WitnessSource
from .syntax import (
    FALSE,
    TRUE,
    ExistsFO,
    ExistsSO,
    Fresh,
    Less,
    Mso,
    MsoError,
    Not,
    PlusOne,
    Pred,
    conj,
    disj,
    eq,
    forall_fo,
    iff,
    implies,
    leq,
    neg,
)


class _Names:
    """Predicate names of one path copy (``index=None`` for the unindexed alphabet)."""

    def __init__(self, A: TimedAutomaton, index: Optional[int]):
        self.A = A
        self.index = index

    def _n(self, base):
        return base if self.index is None else indexed(base, self.index)

    def v(self, s, t):
        return Pred(self._n(state_pred(s)), t)

    def tm(self, e, t):
        return Pred(self._n(tminus(e)), t)

    def tp(self, e, t):
        return Pred(self._n(tplus(e)), t)

    def rm(self, x, t):
        return Pred(self._n(rminus(x)), t)

    def rp(self, x, t):
        return Pred(self._n(rplus(x)), t)

    def all(self) -> list:
        return [self._n(p) for p in self.A.predicate_names()]


def zero(t: str, fresh: Fresh) -> Mso:
    """``0(t)``: no point lies below ``t``."""
    y = fresh("y")
    return forall_fo(y, leq(t, y))


def plus_const(r: str, w: str, c: int, fresh: Fresh, body: Mso) -> Mso:
    """``exists w (+c(r, w) and body)`` through a chain of ``+1`` steps."""
    if c == 0:
        raise MsoError("plus_const needs c >= 1")
    prev = r
    links = []
    for k in range(c - 1):
        z = fresh("k")
        links.append((prev, z))
        prev = z
    inner = ExistsFO(w, conj(PlusOne(prev, w), body))
    for a, z in reversed(links):
        inner = ExistsFO(z, conj(PlusOne(a, z), inner))
    return inner


def offset_relation(t: str, rel: str, r: str, c, fresh: Fresh) -> Mso:
    """``t - r  rel  c`` for an integer ``c >= 0``."""
    c = rat(c)
    if c.denominator != 1 or c < 0:
        raise MsoError(f"constant {fmt_rat(c)} is not a nonnegative integer; scale the problem first")
    c = int(c)
    if c == 0:
        return {
            "<": Less(t, r),
            "<=": leq(t, r),
            "=": eq(t, r),
            ">=": leq(r, t),
            ">": Less(r, t),
        }[rel]
    w = fresh("w")
    # with w = r + c possibly beyond the domain, upper bounds are stated negatively
    if rel == "<":
        return neg(plus_const(r, w, c, fresh, leq(w, t)))
    if rel == "<=":
        return neg(plus_const(r, w, c, fresh, Less(w, t)))
    if rel == "=":
        return plus_const(r, w, c, fresh, eq(w, t))
    if rel == ">=":
        return plus_const(r, w, c, fresh, leq(w, t))
    return plus_const(r, w, c, fresh, Less(w, t))


def constraint_since(psi: Constraint, t: str, r: str, fresh: Fresh) -> Mso:
    """``psi`` with its clock replaced by ``t - r``."""
    if psi == CTRUE:
        return TRUE
    if isinstance(psi, CAtom):
        return offset_relation(t, psi.rel, r, psi.const, fresh)
    if isinstance(psi, CAnd):
        return conj(constraint_since(psi.left, t, r, fresh), constraint_since(psi.right, t, r, fresh))
    if isinstance(psi, COr):
        return disj(constraint_since(psi.left, t, r, fresh), constraint_since(psi.right, t, r, fresh))
    raise MsoError(f"not a clock constraint: {psi!r}")


def _at_zero(psi: Constraint, x: str) -> bool:
    return eval_constraint({x: Fraction(0)}, psi)


def left_hold(t: str, prop, fresh: Fresh) -> Mso:
    """Some open interval ending at ``t`` satisfies ``prop``."""
    y, z = fresh("y"), fresh("z")
    return ExistsFO(y, conj(Less(y, t), forall_fo(z, implies(conj(Less(y, z), Less(z, t)), prop(z)))))


def right_hold(t: str, prop, fresh: Fresh) -> Mso:
    y, z = fresh("y"), fresh("z")
    return ExistsFO(y, conj(Less(t, y), forall_fo(z, implies(conj(Less(t, z), Less(z, y)), prop(z)))))


def automaton_formula(A: TimedAutomaton, index: Optional[int] = None, fresh: Optional[Fresh] = None) -> Mso:
    """Conjunction characterising the flows of accepting executions of ``A``."""
    for c in A.constants():
        if c.denominator != 1:
            raise MsoError(f"automaton constant {fmt_rat(c)} is not an integer; scale the problem first")
    fresh = fresh or Fresh()
    P = _Names(A, index)
    V = list(A.states)
    E = list(range(len(A.edges)))
    X = list(A.clocks)

    def any_state(t):
        return disj(*[P.v(s, t) for s in V])

    def no_state(t):
        return conj(*[neg(P.v(s, t)) for s in V])

    def unique(t):
        pairs = [neg(conj(P.v(a, t), P.v(b, t))) for i, a in enumerate(V) for b in V[i + 1:]]
        return conj(any_state(t), *pairs)

    def marks(t):
        return disj(*([P.tm(e, t) for e in E] + [P.tp(e, t) for e in E] + [P.rm(x, t) for x in X] + [P.rp(x, t) for x in X]))

    def reset(x, t):
        return disj(P.rm(x, t), P.rp(x, t))

    def since_last_reset(x, t, psi):
        """The latest reset of ``x`` strictly before ``t`` lies at ``r`` with ``psi[t - r]``."""
        r, z = fresh("r"), fresh("z")
        quiet = forall_fo(z, implies(conj(Less(r, z), Less(z, t)), neg(reset(x, z))))
        return ExistsFO(r, conj(Less(r, t), reset(x, r), quiet, constraint_since(psi, t, r, fresh)))

    parts = []

    # 1: exactly one state up to some termination point, none afterwards
    def support(strict):
        l, t = fresh("l"), fresh("t")
        upto = Less(t, l) if strict else leq(t, l)
        after = leq(l, t) if strict else Less(l, t)
        return ExistsFO(l, forall_fo(t, conj(implies(upto, unique(t)), implies(after, no_state(t)))))

    t = fresh("t")
    parts.append(disj(support(False), support(True), forall_fo(t, unique(t))))

    # 2: initial state
    t = fresh("t")
    parts.append(forall_fo(t, implies(zero(t, fresh), disj(*[P.v(s, t) for s in sorted(A.initial)]))))

    # 3: at most one entering and one leaving transition
    t = fresh("t")
    excl = []
    for i, e in enumerate(E):
        for e2 in E[i + 1:]:
            excl.append(neg(conj(P.tm(e, t), P.tm(e2, t))))
            excl.append(neg(conj(P.tp(e, t), P.tp(e2, t))))
    if excl:
        parts.append(forall_fo(t, implies(any_state(t), conj(*excl))))

    # 4: transition marks agree with the states around them and with the resets
    for e in E:
        edge = A.edges[e]
        t = fresh("t")
        rm_ok = conj(*[P.rm(x, t) if x in edge.resets else neg(P.rm(x, t)) for x in X])
        parts.append(
            forall_fo(t, implies(P.tm(e, t), conj(P.v(edge.target, t), left_hold(t, lambda z: P.v(edge.source, z), fresh), rm_ok)))
        )
        t = fresh("t")
        rp_ok = conj(*[P.rp(x, t) if x in edge.resets else neg(P.rp(x, t)) for x in X])
        parts.append(
            forall_fo(t, implies(P.tp(e, t), conj(P.v(edge.source, t), right_hold(t, lambda z: P.v(edge.target, z), fresh), rp_ok)))
        )
    if E or X:
        # marks sit on isolated instants
        t = fresh("t")
        parts.append(
            forall_fo(t, implies(conj(neg(zero(t, fresh)), marks(t)), left_hold(t, lambda z: neg(marks(z)), fresh)))
        )

    # 5: a change of state forces a transition
    for a in V:
        for b in V:
            if a == b:
                continue
            t = fresh("t")
            enter = [P.tm(e, t) for e in E if (A.edges[e].source, A.edges[e].target) == (a, b)]
            parts.append(
                forall_fo(t, implies(conj(neg(zero(t, fresh)), P.v(b, t), left_hold(t, lambda z: P.v(a, z), fresh)), disj(*enter)))
            )
            t = fresh("t")
            leave = [P.tp(e, t) for e in E if (A.edges[e].source, A.edges[e].target) == (a, b)]
            parts.append(forall_fo(t, implies(conj(P.v(a, t), right_hold(t, lambda z: P.v(b, z), fresh)), disj(*leave))))

    # 6: resets only with transitions
    if X:
        t = fresh("t")
        parts.append(
            forall_fo(
                t,
                implies(conj(neg(zero(t, fresh)), *[neg(P.tm(e, t)) for e in E]), conj(*[neg(P.rm(x, t)) for x in X])),
            )
        )
        t = fresh("t")
        parts.append(forall_fo(t, implies(conj(*[neg(P.tp(e, t)) for e in E]), conj(*[neg(P.rp(x, t)) for x in X]))))

    # 8: every clock starts at zero
    if X:
        t = fresh("t")
        parts.append(forall_fo(t, implies(zero(t, fresh), conj(*[P.rm(x, t) for x in X]))))

    # 7 and 9: state constraints, reading clock values off the last reset
    for s in V:
        for x in X:
            psi = A.beta(s, x)
            if psi == CTRUE:
                continue
            t = fresh("t")
            later = since_last_reset(x, t, psi)
            if _at_zero(psi, x):
                body = implies(conj(P.v(s, t), neg(P.rm(x, t))), later)
            else:
                body = implies(P.v(s, t), conj(neg(P.rm(x, t)), later))
            parts.append(forall_fo(t, body))

    # 10: guards, on the value just before the transition's own resets
    for e in E:
        for x in X:
            g = A.guard_on(e, x)
            if g == CTRUE:
                continue
            t = fresh("t")
            parts.append(forall_fo(t, implies(P.tm(e, t), since_last_reset(x, t, g))))
            t = fresh("t")
            now = conj(P.rm(x, t), TRUE if _at_zero(g, x) else FALSE)
            parts.append(
                forall_fo(t, implies(P.tp(e, t), disj(now, conj(neg(P.rm(x, t)), since_last_reset(x, t, g)))))
            )

    # 11: the state holding at the end of the support is final
    for s in V:
        if s in A.final:
            continue
        t, z = fresh("t"), fresh("z")
        stays = forall_fo(z, implies(Less(t, z), disj(P.v(s, z), no_state(z))))
        parts.append(forall_fo(t, neg(conj(P.v(s, t), stays))))

    return conj(*parts)


# -- path environments --------------------------------------------------------------


def env_to_flow(A: TimedAutomaton, env: Mapping[str, Execution], order: Sequence[str], horizon: TimeBound) -> Flow:
    """Union of the encoded runs, predicates of the ``k``-th variable tagged ``@k``."""
    flows = []
    for k, var in enumerate(order, start=1):
        f = encode_flow(A, env[var], horizon)
        flows.append(f.rename(lambda p, k=k: indexed(p, k)))
    return union_flows(flows, horizon)


class RunWitnesses(WitnessSource):
    """Second-order witnesses drawn from encoded runs: each block binds one path copy."""

    def __init__(self, A: TimedAutomaton, runs: Iterable[Execution], horizon: TimeBound):
        self.A = A
        self.runs = list(runs)
        self.horizon = horizon
        self._base = [encode_flow(A, r, horizon, check=False) for r in self.runs]

    def witnesses(self, preds):
        idx = {p.rpartition("@")[2] for p in preds}
        if len(idx) != 1:
            raise MsoError(f"witness block {list(preds)} mixes path copies")
        k = int(idx.pop())
        return [f.rename(lambda p: indexed(p, k)) for f in self._base]


# -- HCMTL* translation ----------------------------------------------------------------


class Translator:
    def __init__(self, A: TimedAutomaton):
        self.A = A
        self.fresh = Fresh(taken={"x"})
        self._phi_a: dict = {}

    def phi_a(self, k: int) -> Mso:
        if k not in self._phi_a:
            self._phi_a[k] = automaton_formula(self.A, k, self.fresh)
        return self._phi_a[k]

    def window(self, x: str, y: str, iv) -> Mso:
        """``y - x`` lies in ``iv``, given ``x < y``."""
        parts = []
        lo = rat(iv.left)
        if lo > 0:
            parts.append(offset_relation(y, ">=" if iv.left_closed else ">", x, lo, self.fresh))
        if iv.right is not INF:
            parts.append(offset_relation(y, "<=" if iv.right_closed else "<", x, iv.right, self.fresh))
        return conj(*parts)

    def go(self, phi, x: str, anchor: int, index: Mapping[str, int]) -> Mso:
        A = self.A
        if isinstance(phi, (hf.Prop, hf.NegProp)):
            j = index[phi.var]
            want = isinstance(phi, hf.Prop)
            states = [s for s in A.states if (phi.prop in A.label(s)) == want]
            return disj(*[Pred(indexed(state_pred(s), j), x) for s in states]) if states else FALSE
        if isinstance(phi, hf.And):
            return conj(self.go(phi.left, x, anchor, index), self.go(phi.right, x, anchor, index))
        if isinstance(phi, hf.Or):
            return disj(self.go(phi.left, x, anchor, index), self.go(phi.right, x, anchor, index))
        if isinstance(phi, hf.Implies):
            return implies(self.go(phi.left, x, anchor, index), self.go(phi.right, x, anchor, index))
        if isinstance(phi, hf.Finally):
            y = self.fresh("y")
            return ExistsFO(y, conj(Less(x, y), self.window(x, y, phi.interval), self.go(phi.body, y, anchor, index)))
        if isinstance(phi, hf.Globally):
            y = self.fresh("y")
            return forall_fo(y, implies(conj(Less(x, y), self.window(x, y, phi.interval)), self.go(phi.body, y, anchor, index)))
        if isinstance(phi, hf.Until):
            y, z = self.fresh("y"), self.fresh("z")
            between = forall_fo(z, implies(conj(Less(x, z), Less(z, y)), self.go(phi.left, z, anchor, index)))
            return ExistsFO(
                y, conj(Less(x, y), self.window(x, y, phi.interval), self.go(phi.right, y, anchor, index), between)
            )
        if isinstance(phi, (hf.Exists, hf.Forall)):
            k = len(index) + 1
            inner = dict(index)
            inner[phi.var] = k
            body = self.go(phi.body, x, k, inner)
            new = _Names(A, k)
            if anchor == 0:
                guard = [zero(x, self.fresh), self.phi_a(k)]
            else:
                old = _Names(A, anchor)
                alive = disj(*[old.v(s, x) for s in A.states])
                guard = [alive, self.agreement(old, new, x), self.phi_a(k)]
            matrix = conj(*guard, body) if isinstance(phi, hf.Exists) else implies(conj(*guard), body)
            preds = sorted(new.all())
            if isinstance(phi, hf.Exists):
                out = matrix
                for p in reversed(preds):
                    out = ExistsSO(p, out)
                return out
            out = neg(matrix)
            for p in reversed(preds):
                out = ExistsSO(p, out)
            return Not(out)
        raise MsoError(f"not an HCMTL* formula: {phi!r}")

    def agreement(self, old: _Names, new: _Names, x: str) -> Mso:
        """The two copies describe the same execution prefix up to ``x``."""
        A = self.A
        y = self.fresh("y")
        before = []
        for p_old, p_new in zip(old.all(), new.all()):
            before.append(iff(Pred(p_old, y), Pred(p_new, y)))
        now = [iff(old.v(s, x), new.v(s, x)) for s in A.states]
        now += [iff(old.tm(e, x), new.tm(e, x)) for e in range(len(A.edges))]
        now += [iff(old.rm(c, x), new.rm(c, x)) for c in A.clocks]
        return conj(*now, forall_fo(y, implies(Less(y, x), conj(*before))))


def translate(phi, A: TimedAutomaton, order: Optional[Sequence[str]] = None) -> list:
    """``[<phi>_0, ..., <phi>_m]`` over the free variable ``x``; ``order`` fixes path indices."""
    for c in A.constants() | hf.interval_constants(phi):
        if c.denominator != 1:
            raise MsoError(f"constant {fmt_rat(c)} is not an integer; scale the problem first")
    order = list(order) if order is not None else hf.free_vars(phi)
    index = {v: k for k, v in enumerate(order, start=1)}
    tr = Translator(A)
    return [tr.go(phi, "x", i, index) for i in range(len(order) + 1)]


def scaling_manifest(A: TimedAutomaton, phi=None, horizon: TimeBound = INF) -> dict:
    consts = set(A.constants())
    if phi is not None:
        consts |= hf.interval_constants(phi)
    if horizon is not INF:
        consts.add(rat(horizon))
    factor, _ = scale_to_integers(consts)
    return {
        "factor": factor,
        "horizon": fmt_rat(horizon),
        "scaled_horizon": fmt_rat(horizon * factor if horizon is not INF else INF),
    }
