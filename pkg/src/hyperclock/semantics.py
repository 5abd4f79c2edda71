"""Direct satisfaction checking of HCMTL* formulas over concrete path environments.

Temporal operators quantify over a continuum of future instants.  Every
model here is finitely variable, so the truth of a subformula is constant
between consecutive points of a finite set (its critical points); checking
those points and one midpoint per gap decides the quantifier exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Protocol

from .automaton import Execution, TimedAutomaton, prefix
from .formula import (
    And,
    Exists,
    Finally,
    Forall,
    Formula,
    Globally,
    Implies,
    NegProp,
    Or,
    Prop,
    Until,
    free_vars,
)
from .pointwise import PointAutomaton, PointExecution
from .timecore import INF, Interval, TimeBound, TimeError, contains, fmt_rat

log = logging.getLogger(__name__)


class SemanticsError(ValueError):
    """Unbound variable, time outside the bounded domain, or malformed environment."""


class ExecutionProvider(Protocol):
    """Source of candidate runs for path quantifiers."""

    def runs(self, anchor, t) -> Iterable:
        """Accepting runs agreeing with ``anchor`` up to ``t`` (all runs when ``anchor`` is None)."""

    def breakpoints(self) -> Iterable[Fraction]:
        """A superset of the interval endpoints of every run the provider can yield."""


class ListProvider:
    """Provider over an explicit finite run collection (interval or point mode)."""

    def __init__(self, runs: Iterable, point_mode: bool = False):
        self._runs = list(runs)
        self._point = point_mode
        self._cache: dict = {}
        pts = set()
        for r in self._runs:
            pts.update(r.times if point_mode else r.breakpoints())
        self._bps = frozenset(pts)

    def all_runs(self) -> list:
        return list(self._runs)

    def breakpoints(self):
        return self._bps

    def runs(self, anchor, t):
        if anchor is None:
            return self._runs
        key = (anchor, t)
        hit = self._cache.get(key)
        if hit is None:
            test = extends_point if self._point else agrees_upto
            hit = [r for r in self._runs if test(r, anchor, t)]
            self._cache[key] = hit
        return hit


def agrees_upto(rho: Execution, anchor: Execution, t) -> bool:
    """``rho|_t == anchor|_t`` (both prefixes must exist)."""
    i = anchor.index_at(t)
    if i is None:
        return False
    segs = rho.segments
    if len(segs) <= i or segs[:i] != anchor.segments[:i] or rho.transitions[:i] != anchor.transitions[:i]:
        return False
    v, iv = segs[i]
    av, aiv = anchor.segments[i]
    return v == av and iv.left == aiv.left and iv.left_closed == aiv.left_closed and contains(iv, t)


def extends_point(eta: PointExecution, anchor: PointExecution, t) -> bool:
    """``eta`` is an extension of ``anchor`` from ``t``: same events up to ``t``.

    ``eta`` must still be running at ``t``; a run that stops earlier is not
    a branch of anything from ``t`` on.
    """
    if eta.duration < t:
        return False
    mine = [s for s in eta.steps if s[1] <= t]
    theirs = [s for s in anchor.steps if s[1] <= t]
    return mine == theirs


def shift_closure(points: Iterable, interval: Interval, lo=Fraction(0)) -> set:
    """``points`` together with ``p - L(I)`` and ``p - R(I)``, kept when ``>= lo``."""
    out = set(points)
    for p in list(out):
        for c in (interval.left, interval.right):
            if c is INF:
                continue
            q = p - c
            if q >= lo:
                out.add(q)
    return out


def gap_probes(points: Iterable, lo, lo_closed: bool, hi, hi_closed: bool) -> list:
    """Sorted probes covering the window: its members of ``points`` plus one point per gap."""
    inner = sorted(p for p in set(points) if (p > lo) and (hi is INF or p < hi))
    ends = [lo] + inner + ([hi] if hi is not INF else [])
    out = []
    if lo_closed:
        out.append(lo)
    for k, (a, b) in enumerate(zip(ends, ends[1:])):
        out.append((a + b) / 2)
        if k < len(inner):
            out.append(b)
    if hi is INF:
        out.append(ends[-1] + 1)
    elif hi_closed and (hi > lo):
        out.append(hi)
    return out


class _Base:
    def __init__(self, horizon: TimeBound, provider=None):
        self.horizon = horizon
        self.provider = provider
        self._crit_cache: dict = {}
        self._memo: dict = {}

    # windows -------------------------------------------------------------
    def window(self, t, iv: Interval):
        """Bounds of ``{t' > t : t' in t + I, t' < N}`` as (lo, lo_closed, hi, hi_closed) or None."""
        lo, lo_closed = t + iv.left, iv.left_closed
        if iv.left == 0:
            lo_closed = False
        hi, hi_closed = (INF, False) if iv.right is INF else (t + iv.right, iv.right_closed)
        if self.horizon is not INF and (hi is INF or hi >= self.horizon):
            hi, hi_closed = self.horizon, False
        if hi is not INF and (lo > hi or (lo == hi and not (lo_closed and hi_closed))):
            return None
        return lo, lo_closed, hi, hi_closed

    def run_for(self, env, var):
        try:
            return env[var]
        except KeyError:
            raise SemanticsError(f"path variable {var!r} is not bound") from None

    def check_time(self, t):
        if t < 0:
            raise SemanticsError("time must be nonnegative")
        if self.horizon is not INF and t >= self.horizon:
            raise SemanticsError(f"time {fmt_rat(t)} is outside the bounded domain [0,{fmt_rat(self.horizon)})")


class IntervalSemantics(_Base):
    """Continuous-time satisfaction over executions of an interval-based automaton."""

    def __init__(self, A: TimedAutomaton, horizon: TimeBound = INF, provider=None):
        super().__init__(horizon, provider)
        self.A = A

    # critical points -----------------------------------------------------
    def critical(self, phi: Formula, env_bps: Mapping) -> frozenset:
        key = (phi, tuple(sorted(env_bps.items())))
        hit = self._crit_cache.get(key)
        if hit is not None:
            return hit
        base = {Fraction(0)}
        if self.horizon is not INF:
            base.add(self.horizon)
        if isinstance(phi, (Prop, NegProp)):
            out = base | set(env_bps.get(phi.var, ()))
        elif isinstance(phi, (And, Or, Implies)):
            out = self.critical(phi.left, env_bps) | self.critical(phi.right, env_bps)
        elif isinstance(phi, (Finally, Globally)):
            out = shift_closure(self.critical(phi.body, env_bps), phi.interval)
        elif isinstance(phi, Until):
            both = self.critical(phi.left, env_bps) | self.critical(phi.right, env_bps)
            out = shift_closure(both, phi.interval)
        elif isinstance(phi, (Exists, Forall)):
            grid = frozenset(self.provider.breakpoints()) if self.provider is not None else frozenset()
            inner = dict(env_bps)
            inner[phi.var] = grid
            out = set(self.critical(phi.body, inner))
        else:
            raise TypeError(f"not a formula: {phi!r}")
        if self.horizon is not INF:
            out = {p for p in out if p <= self.horizon}
        res = frozenset(out)
        self._crit_cache[key] = res
        return res

    def env_breakpoints(self, env) -> dict:
        return {v: frozenset(r.breakpoints()) for v, r in env.items()}

    def critical_points(self, env, phi: Formula, window: Interval) -> list:
        pts = self.critical(phi, self.env_breakpoints(env))
        return gap_probes(pts, window.left, window.left_closed, window.right, window.right_closed)

    # satisfaction ----------------------------------------------------------
    def sat(self, env: Mapping, t, anchor: Optional[str], phi: Formula) -> bool:
        t = Fraction(t)
        self.check_time(t)
        if self.horizon is not INF:
            for v, r in env.items():
                if not r.bounded_by(self.horizon):
                    raise SemanticsError(f"run of {v} is not bounded by {fmt_rat(self.horizon)}")
        for v in free_vars(phi):
            self.run_for(env, v)
        if anchor is not None and anchor not in env:
            raise SemanticsError(f"anchor {anchor!r} is not bound")
        return self._sat(dict(env), t, anchor, phi)

    def _sat(self, env, t, anchor, phi) -> bool:
        if isinstance(phi, Prop):
            r = self.run_for(env, phi.var)
            v = r.state_at(t)
            return v is not None and phi.prop in self.A.label(v)
        if isinstance(phi, NegProp):
            r = self.run_for(env, phi.var)
            v = r.state_at(t)
            return v is not None and phi.prop not in self.A.label(v)
        if isinstance(phi, And):
            return self._sat(env, t, anchor, phi.left) and self._sat(env, t, anchor, phi.right)
        if isinstance(phi, Or):
            return self._sat(env, t, anchor, phi.left) or self._sat(env, t, anchor, phi.right)
        if isinstance(phi, Implies):
            return (not self._sat(env, t, anchor, phi.left)) or self._sat(env, t, anchor, phi.right)
        key = (phi, t, anchor, tuple(sorted(env.items(), key=lambda kv: kv[0])))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        res = self._sat_complex(env, t, anchor, phi)
        self._memo[key] = res
        return res

    def _sat_complex(self, env, t, anchor, phi) -> bool:
        if isinstance(phi, (Finally, Globally)):
            w = self.window(t, phi.interval)
            if w is None:
                return isinstance(phi, Globally)
            pts = self.critical(phi.body, self.env_breakpoints(env))
            want = isinstance(phi, Finally)
            for c in gap_probes(pts, *w):
                if self._sat(env, c, anchor, phi.body) == want:
                    return want
            return not want
        if isinstance(phi, Until):
            w = self.window(t, phi.interval)
            if w is None:
                return False
            lo, lo_closed, hi, hi_closed = w
            bps = self.env_breakpoints(env)
            pts = self.critical(phi.left, bps) | self.critical(phi.right, bps) | {lo}
            inner = {p for p in pts if p > t}
            for c in gap_probes(pts, t, False, hi, hi_closed):
                in_window = c > lo or (c == lo and lo_closed)
                left_ok = self._sat(env, c, anchor, phi.left)
                # inside an open gap the left operand must also cover [gap start, c)
                if in_window and (left_ok or c in inner or c == hi) and self._sat(env, c, anchor, phi.right):
                    return True
                if not left_ok:
                    return False
            return False
        if isinstance(phi, (Exists, Forall)):
            want = isinstance(phi, Exists)
            if anchor is None:
                if t != 0:
                    return not want
                anchor_run = None
            else:
                anchor_run = self.run_for(env, anchor)
                if not anchor_run.alive(t):
                    return not want
            if self.provider is None:
                raise SemanticsError("path quantifier needs an execution provider")
            runs = self.provider.runs(anchor_run, t)
            if not runs and anchor_run is None:
                log.warning("provider yielded no runs for %s at t=0", phi.var)
            for r in runs:
                env2 = dict(env)
                env2[phi.var] = r
                if self._sat(env2, t, phi.var, phi.body) == want:
                    return want
            return not want
        raise TypeError(f"not a formula: {phi!r}")


class PointSemantics(_Base):
    """Satisfaction over point executions: only event instants are observed."""

    def __init__(self, B: PointAutomaton, horizon: TimeBound = INF, provider=None):
        super().__init__(horizon, provider)
        self.B = B

    def sat(self, env: Mapping, t, anchor: Optional[str], phi: Formula) -> bool:
        t = Fraction(t)
        self.check_time(t)
        if self.horizon is not INF:
            for v, r in env.items():
                if not r.bounded_by(self.horizon):
                    raise SemanticsError(f"run of {v} is not bounded by {fmt_rat(self.horizon)}")
        for v in free_vars(phi):
            self.run_for(env, v)
        return self._sat(dict(env), t, anchor, phi)

    def events(self, env) -> list:
        pts = set()
        for r in env.values():
            pts.update(r.times)
        return sorted(pts)

    def _sat(self, env, t, anchor, phi) -> bool:
        if isinstance(phi, (Prop, NegProp)):
            r = self.run_for(env, phi.var)
            ev = r.event_at(self.B, t)
            if ev is None:
                return False
            return (phi.prop in ev) == isinstance(phi, Prop)
        if isinstance(phi, And):
            return self._sat(env, t, anchor, phi.left) and self._sat(env, t, anchor, phi.right)
        if isinstance(phi, Or):
            return self._sat(env, t, anchor, phi.left) or self._sat(env, t, anchor, phi.right)
        if isinstance(phi, Implies):
            return (not self._sat(env, t, anchor, phi.left)) or self._sat(env, t, anchor, phi.right)
        if isinstance(phi, (Finally, Globally, Until)):
            w = self.window(t, phi.interval)
            if w is None:
                return isinstance(phi, Globally)
            lo, lo_closed, hi, hi_closed = w

            def inside(c):
                return (c > lo or (c == lo and lo_closed)) and (hi is INF or c < hi or (c == hi and hi_closed))

            later = [c for c in self.events(env) if c > t and (self.horizon is INF or c < self.horizon)]
            if isinstance(phi, Finally):
                return any(inside(c) and self._sat(env, c, anchor, phi.body) for c in later)
            if isinstance(phi, Globally):
                return all(self._sat(env, c, anchor, phi.body) for c in later if inside(c))
            for c in later:
                if hi is not INF and c > hi:
                    break
                if inside(c) and self._sat(env, c, anchor, phi.right):
                    return True
                if not self._sat(env, c, anchor, phi.left):
                    return False
            return False
        if isinstance(phi, (Exists, Forall)):
            want = isinstance(phi, Exists)
            if anchor is None:
                if t != 0:
                    return not want
                anchor_run = None
            else:
                anchor_run = self.run_for(env, anchor)
                if t > anchor_run.duration:
                    return not want
            if self.provider is None:
                raise SemanticsError("path quantifier needs an execution provider")
            for r in self.provider.runs(anchor_run, t):
                env2 = dict(env)
                env2[phi.var] = r
                if self._sat(env2, t, phi.var, phi.body) == want:
                    return want
            return not want
        raise TypeError(f"not a formula: {phi!r}")


def sat_interval(A, env, t, anchor, phi, horizon: TimeBound = INF, provider=None) -> bool:
    return IntervalSemantics(A, horizon, provider).sat(env, t, anchor, phi)


def sat_point(B, env, t, anchor, phi, horizon: TimeBound = INF, provider=None) -> bool:
    return PointSemantics(B, horizon, provider).sat(env, t, anchor, phi)


def critical_points(A, env, phi, window: Interval, horizon: TimeBound = INF, provider=None) -> list:
    return IntervalSemantics(A, horizon, provider).critical_points(env, phi, window)
