"""Grid-bounded verification of HCMTL* sentences.

Path quantifiers range over the accepting executions whose interval
endpoints are multiples of ``1/k``, that take at most ``d`` transitions and
that are bounded by the horizon ``N``.  Within that run set the verdict is
exact; it is labelled as grid relative because finer grids may add runs.
"""
from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from . import formula as hf
from .automaton import Execution, TimedAutomaton, entry_valuations, is_accepting, prefix, validate_execution
from .pointwise import PointAutomaton, PointExecution, build_interval_automaton, chi, chi_inverse, validate_point_execution
from .semantics import IntervalSemantics, ListProvider, PointSemantics, agrees_upto
from .timecore import INF, Interval, TimeBound, eval_constraint, first_violation, fmt_rat, rat

log = logging.getLogger(__name__)


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class GridBudget:
    granularity: int
    max_transitions: int
    horizon: Fraction

    def __post_init__(self):
        object.__setattr__(self, "horizon", rat(self.horizon))
        if self.granularity < 1:
            raise EngineError("granularity must be at least 1")
        if self.max_transitions < 0:
            raise EngineError("max_transitions must be nonnegative")
        if self.horizon <= 0:
            raise EngineError("the horizon must be positive")

    def grid(self) -> list:
        k = self.granularity
        return [Fraction(i, k) for i in range(int(self.horizon * k) + 1) if Fraction(i, k) <= self.horizon]

    def to_json(self) -> dict:
        return {"granularity": self.granularity, "max_transitions": self.max_transitions, "horizon": fmt_rat(self.horizon)}


def run_key(rho: Execution) -> tuple:
    """Witness order: fewer transitions, then earlier endpoints, then boundary flags."""
    ends = tuple((iv.left, iv.right if iv.right is not INF else Fraction(10**9)) for iv in rho.intervals)
    flags = tuple((not iv.left_closed, not iv.right_closed) for iv in rho.intervals)
    return (len(rho.transitions), ends, flags, tuple(rho.states), rho.transitions)


# -- interval runs ----------------------------------------------------------------


def _extend(A: TimedAutomaton, budget: GridBudget, segs: list, trans: list, mu: dict, left, left_closed: bool,
            state: str, min_right=None, min_right_closed=False) -> Iterator[Execution]:
    """All completions whose next segment is ``state`` starting at ``left``."""
    N = budget.horizon
    for b in budget.grid():
        if b < left or (min_right is not None and b < min_right):
            continue
        for rc in (False, True):
            if b == left and not (left_closed and rc):
                continue
            if min_right is not None and b == min_right and min_right_closed and not rc:
                continue
            iv = Interval(left, b, left_closed, rc)
            ok = True
            for x in A.clocks:
                psi = A.beta(state, x)
                if first_violation(psi, x, mu[x], iv) is not None:
                    ok = False
                    break
            if not ok:
                continue
            here = segs + [(state, iv)]
            if state in A.final and (b < N or not rc):
                yield Execution(tuple(here), tuple(trans))
            if len(trans) >= budget.max_transitions or b >= N:
                continue
            pre = {x: mu[x] + (b - left) for x in A.clocks}
            for e, edge in enumerate(A.edges):
                if edge.source != state:
                    continue
                if not all(eval_constraint(pre, g) for g in edge.guards):
                    continue
                post = {x: Fraction(0) if x in edge.resets else pre[x] for x in A.clocks}
                yield from _extend(A, budget, here, trans + [e], post, b, not rc, edge.target)


def enumerate_runs(A: TimedAutomaton, budget: GridBudget, anchor: Optional[tuple] = None) -> Iterator[Execution]:
    """Accepting grid runs; with ``anchor=(rho, t)`` only those agreeing with ``rho`` up to ``t``."""
    if anchor is None:
        zero = {x: Fraction(0) for x in A.clocks}
        for v in sorted(A.initial):
            yield from _extend(A, budget, [], [], zero, Fraction(0), True, v)
        return
    rho, t = anchor
    t = rat(t)
    i = rho.index_at(t)
    if i is None:
        return
    if len(rho.transitions[:i]) > budget.max_transitions:
        return
    mus = entry_valuations(A, rho)
    v, iv = rho.segments[i]
    for r in _extend(A, budget, list(rho.segments[:i]), list(rho.transitions[:i]), mus[i], iv.left,
                     iv.left_closed, v, min_right=t, min_right_closed=True):
        yield r


def _first_choice_runs(args):
    A, budget, v = args
    zero = {x: Fraction(0) for x in A.clocks}
    return list(_extend(A, budget, [], [], zero, Fraction(0), True, v))


def all_runs(A: TimedAutomaton, budget: GridBudget, jobs: int = 1) -> list:
    """The full grid run set in witness order."""
    if jobs > 1 and len(A.initial) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_first_choice_runs, [(A, budget, v) for v in sorted(A.initial)]))
        runs = [r for part in parts for r in part]
    else:
        runs = list(enumerate_runs(A, budget))
    runs.sort(key=run_key)
    return runs


class GridProvider:
    """Execution provider over the grid run set of an automaton."""

    def __init__(self, A: TimedAutomaton, budget: GridBudget, jobs: int = 1):
        self.A = A
        self.budget = budget
        self._all = all_runs(A, budget, jobs)
        self._cache: dict = {}
        self._bps = frozenset(budget.grid())

    def all_runs(self) -> list:
        return list(self._all)

    def breakpoints(self):
        return self._bps

    def runs(self, anchor, t):
        if anchor is None:
            return self._all
        key = (anchor, t)
        hit = self._cache.get(key)
        if hit is None:
            hit = [r for r in self._all if agrees_upto(r, anchor, t)]
            self._cache[key] = hit
        return hit


# -- point runs ------------------------------------------------------------------------


def enumerate_point_runs(B: PointAutomaton, budget: GridBudget) -> list:
    """Accepting point executions with 1..d events at strictly increasing grid times below ``N``."""
    grid = [t for t in budget.grid() if t < budget.horizon]
    out = []

    def go(state, mu, prev_t, steps):
        if steps and state in B.final:
            out.append(PointExecution(tuple(steps)))
        if len(steps) >= budget.max_transitions:
            return
        for t in grid:
            if steps and t <= prev_t:
                continue
            elapsed = {x: mu[x] + (t - prev_t) for x in B.clocks}
            for e, edge in enumerate(B.transitions):
                if edge.source != state:
                    continue
                if not all(eval_constraint(elapsed, g) for g in edge.guards):
                    continue
                post = {x: Fraction(0) if x in edge.resets else elapsed[x] for x in B.clocks}
                go(edge.target, post, t, steps + [(e, t)])

    go(B.start, {x: Fraction(0) for x in B.clocks}, Fraction(0), [])
    out.sort(key=lambda eta: (len(eta.steps), eta.times, [e for e, _ in eta.steps]))
    return out


# -- verdicts --------------------------------------------------------------------------------


HOLDS_ON_GRID = "holds-on-grid"
FAILS_WITH_WITNESS = "fails-with-witness"
FAILS = "fails"
HOLDS = "holds"


@dataclass
class Verdict:
    verdict: str
    budget: Optional[GridBudget] = None
    witness: Optional[dict] = None
    stats: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict in (HOLDS, HOLDS_ON_GRID)

    def to_json(self) -> dict:
        out = {"verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.budget is not None:
            out["budget"] = self.budget.to_json()
        out["stats"] = self.stats
        return out


def _witness_chain(sem, phi, provider, env=None, anchor=None):
    """Peel leading universal quantifiers, picking the first run that falsifies the rest."""
    env = dict(env or {})
    found = []
    while isinstance(phi, hf.Forall):
        bad = None
        anchor_run = env[anchor] if anchor is not None else None
        for r in provider.runs(anchor_run, Fraction(0)):
            trial = dict(env)
            trial[phi.var] = r
            if not sem.sat(trial, Fraction(0), phi.var, phi.body):
                bad = r
                break
        if bad is None:  # pragma: no cover - caller only asks when the sentence fails
            break
        env[phi.var] = bad
        found.append(phi.var)
        anchor = phi.var
        phi = phi.body
    return env, found, phi, anchor


def _env_json(env, point=False) -> dict:
    from .io import execution_to_json, point_execution_to_json

    enc = point_execution_to_json if point else execution_to_json
    return {v: enc(r) for v, r in env.items()}


def verify(A: TimedAutomaton, phi, budget: GridBudget, jobs: int = 1, provider: Optional[GridProvider] = None) -> Verdict:
    if not hf.is_sentence(phi):
        raise EngineError(f"not a sentence: free variables {hf.free_vars(phi)}")
    hf.check_well_formed(phi)
    t0 = time.perf_counter()
    prov = provider or GridProvider(A, budget, jobs)
    sem = IntervalSemantics(A, budget.horizon, prov)
    ok = sem.sat({}, Fraction(0), None, phi)
    stats = {"runs": len(prov.all_runs())}
    if ok:
        stats["seconds"] = round(time.perf_counter() - t0, 3)
        return Verdict(HOLDS_ON_GRID, budget, None, stats)
    env, chain, rest, anchor = _witness_chain(sem, phi, prov)
    if not chain:
        stats["seconds"] = round(time.perf_counter() - t0, 3)
        return Verdict(FAILS, budget, None, stats)
    replay = IntervalSemantics(A, budget.horizon, prov)
    confirmed = not replay.sat(env, Fraction(0), anchor, rest)
    if not confirmed:  # pragma: no cover - would be an internal error
        raise EngineError("witness does not replay")
    stats["seconds"] = round(time.perf_counter() - t0, 3)
    return Verdict(FAILS_WITH_WITNESS, budget, {"paths": _env_json(env), "replayed": confirmed}, stats)


def point_budget_for_reduction(budget: GridBudget) -> GridBudget:
    """d events need at most 2d-1 transitions in the simulating interval automaton."""
    return GridBudget(budget.granularity, max(2 * budget.max_transitions - 1, 0), budget.horizon)


def verify_point(B: PointAutomaton, phi, budget: GridBudget, route: str = "both") -> Verdict:
    if not hf.is_sentence(phi):
        raise EngineError(f"not a sentence: free variables {hf.free_vars(phi)}")
    hf.check_well_formed(phi)
    if route not in ("direct", "reduce", "both"):
        raise EngineError(f"unknown route {route!r}")
    t0 = time.perf_counter()
    results = {}
    stats = {}
    witness = None
    if route in ("direct", "both"):
        runs = enumerate_point_runs(B, budget)
        prov = ListProvider(runs, point_mode=True)
        sem = PointSemantics(B, budget.horizon, prov)
        results["direct"] = sem.sat({}, Fraction(0), None, phi)
        stats["point_runs"] = len(runs)
        if not results["direct"]:
            env, chain, rest, anchor = _witness_chain(sem, phi, prov)
            if chain:
                witness = {"paths": _env_json(env, point=True), "replayed": not sem.sat(env, 0, anchor, rest)}
    if route in ("reduce", "both"):
        T = build_interval_automaton(B)
        v = verify(T, hf.point_to_interval(phi), point_budget_for_reduction(budget))
        results["reduce"] = v.holds
        stats["interval_runs"] = v.stats.get("runs")
    vals = set(results.values())
    if len(vals) > 1:
        raise EngineError(f"routes disagree: {results}")
    ok = vals.pop()
    stats["routes"] = sorted(results)
    stats["seconds"] = round(time.perf_counter() - t0, 3)
    if ok:
        return Verdict(HOLDS_ON_GRID, budget, None, stats)
    return Verdict(FAILS_WITH_WITNESS if witness else FAILS, budget, witness, stats)


# -- MSO cross-check -----------------------------------------------------------------------


@dataclass
class CrossCheckReport:
    samples: int = 0
    agreements: int = 0
    disagreements: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"samples": self.samples, "agreements": self.agreements, "disagreements": self.disagreements}


def cross_check_mso(A: TimedAutomaton, phi, budget: GridBudget, samples: int, seed: int = 0,
                    so_budget: Optional[GridBudget] = None, backend: Optional[str] = None,
                    population: Optional[list] = None) -> CrossCheckReport:
    """Compare direct satisfaction with evaluation of the MSO translation on random grid environments.

    ``population`` replaces full enumeration as the pool environments are drawn from;
    it is only honoured for quantifier-free formulas, where no quantifier needs the pool.
    """
    from .mso.emit import RunWitnesses, env_to_flow, translate
    from .mso.evaluate import Evaluator

    rng = random.Random(seed)
    order = hf.free_vars(phi)
    qf = hf.quantifier_free(phi)
    if qf and population is not None:
        prov = None
        runs = list(population)
    else:
        prov = GridProvider(A, budget)
        runs = prov.all_runs()
    if not runs:
        raise EngineError("the budget admits no accepting run")
    if qf:
        source = None
    else:
        so_runs = runs if so_budget is None or so_budget == budget else all_runs(A, so_budget)
        source = RunWitnesses(A, so_runs, budget.horizon)
    formulas = translate(phi, A, order)
    sem = IntervalSemantics(A, budget.horizon, prov)
    rep = CrossCheckReport()
    k = budget.granularity
    times = [Fraction(i, 2 * k) for i in range(int(budget.horizon * 2 * k))]
    evaluators: dict = {}
    for _ in range(samples):
        env = {v: rng.choice(runs) for v in order}
        t = rng.choice(times)
        idx = rng.randrange(len(order) + 1) if order else 0
        if idx == 0 and not qf:
            t = Fraction(0)
        anchor = order[idx - 1] if idx else None
        expected = sem.sat(env, t, anchor, phi)
        f = env_to_flow(A, env, order, budget.horizon)
        key = (tuple(env[v] for v in order), idx)
        ev = evaluators.get(key)
        if ev is None:
            ev = evaluators[key] = Evaluator(formulas[idx], f, ["x"], source, backend, extra_points=times)
        got = ev(x=t)
        rep.samples += 1
        if got == expected:
            rep.agreements += 1
        else:
            rep.disagreements.append(
                {"env": _env_json(env), "time": fmt_rat(t), "anchor": anchor, "semantics": expected, "mso": got}
            )
    return rep
