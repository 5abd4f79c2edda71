import random
import sys
from fractions import Fraction as Fr
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from hyperclock import formula as hf
from hyperclock.automaton import Edge, Execution, TimedAutomaton, execution_from_pairs
from hyperclock.engine import GridBudget, enumerate_point_runs
from hyperclock.formula import parse
from hyperclock.generators import random_automaton, random_point_automaton, random_qf_formula, random_runs
from hyperclock.pointwise import PointAutomaton, PointEdge, PointExecution, build_interval_automaton, chi
from hyperclock.semantics import (
    IntervalSemantics, ListProvider, PointSemantics, SemanticsError, critical_points, sat_interval, sat_point,
)
from hyperclock.timecore import INF, Interval

from conftest import one_state
from oracles import LatticeOracle

I = Interval.parse


def qf(text):
    return parse(text, allow_open_temporal=True)


def p_only_at_origin():
    A = TimedAutomaton({"p"}, ["v", "w"], ["v"], {"v": {"p"}, "w": set()}, [], {}, [Edge("v", "w", (), ())], ["v", "w"])
    return A, Execution((("v", I("[0,0]")), ("w", I("(0,5)"))), (0,))


class TestBoundaryExamples:
    def test_ended_run(self):
        A = one_state()
        rho = Execution((("v", I("[0,5)")),), ())
        assert not sat_interval(A, {"pi": rho}, 6, None, qf("p@pi"))
        assert not sat_interval(A, {"pi": rho}, 6, None, qf("!p@pi"))
        assert not sat_interval(A, {"pi": rho}, 5, None, qf("p@pi"))

    def test_globally_under_exists(self):
        A = one_state()
        rho = Execution((("v", I("[0,5)")),), ())
        assert sat_interval(A, {}, 0, None, parse("exists pi. G[0,3] p@pi"), provider=ListProvider([rho]))

    def test_finally_is_strict(self):
        A, rho = p_only_at_origin()
        phi = qf("F[0,1] p@pi")
        assert not sat_interval(A, {"pi": rho}, 0, None, phi)
        assert not LatticeOracle(A, {"pi": rho}, 5, 1)(phi, 0)
        assert sat_interval(A, {"pi": rho}, 0, None, qf("p@pi"))

    def test_quantifier_after_anchor_ends(self):
        A = one_state()
        rho = Execution((("v", I("[0,2)")),), ())
        prov = ListProvider([rho])
        assert not sat_interval(A, {"a": rho}, 3, "a", qf("exists b. p@b"), provider=prov)
        assert sat_interval(A, {"a": rho}, 3, "a", qf("forall b. !p@b"), provider=prov)

    def test_bounded_time_domain(self):
        A = one_state()
        rho = Execution((("v", I("[0,2)")),), ())
        with pytest.raises(SemanticsError):
            sat_interval(A, {"a": rho}, 5, None, qf("p@a"), horizon=5)

    def test_unbound_variable(self):
        with pytest.raises(SemanticsError):
            sat_interval(one_state(), {}, 0, None, qf("p@a"))


class TestUntil:
    def test_left_must_cover_gap(self):
        A = TimedAutomaton({"a", "b"}, ["u", "w"], ["u"], {"u": {"a"}, "w": {"b"}}, [], {}, [Edge("u", "w", (), ())],
                           ["w"])
        rho = execution_from_pairs(A, [("u", "[0,2)"), ("w", "[2,4)")], [0])
        env = {"pi": rho}
        assert sat_interval(A, env, 0, None, qf("(a@pi U[0,3] b@pi)"))
        assert not sat_interval(A, env, 0, None, qf("(a@pi U[0,1] b@pi)"))
        assert not sat_interval(A, env, 0, None, qf("(b@pi U[0,3] b@pi)"))


class TestPointSemantics:
    def setup_method(self):
        self.B = PointAutomaton({"p", "q"}, ["s"], "s", [], [PointEdge("s", {"p"}, [], [], "s")], ["s"])
        self.env = {"pi": PointExecution([(0, 1), (0, 2)])}

    def test_finally(self):
        assert sat_point(self.B, self.env, 0, None, qf("F[0,5] p@pi"))

    def test_globally(self):
        assert not sat_point(self.B, self.env, 0, None, qf("G[0,5] q@pi"))

    def test_atom_needs_event(self):
        assert not sat_point(self.B, self.env, Fr(3, 2), None, qf("p@pi | !p@pi"))


class TestCriticalPoints:
    def test_shift_closure(self):
        A = TimedAutomaton({"p"}, ["u", "w", "z"], ["u"], {"u": {"p"}}, [], {},
                           [Edge("u", "w", (), ()), Edge("w", "z", (), ())], ["z"])
        rho = execution_from_pairs(A, [("u", "[0,3)"), ("w", "[3,5)"), ("z", "[5,8)")], [0, 1])
        pts = critical_points(A, {"pi": rho}, qf("F[1,2] p@pi"), I("[0,6]"))
        assert set(range(7)) <= set(pts)
        assert Fr(1, 2) in pts and Fr(11, 2) in pts

    def test_single_segment(self):
        A = one_state()
        rho = Execution((("v", I("[0,5)")),), ())
        pts = critical_points(A, {"pi": rho}, qf("p@pi"), I("[0,5)"), horizon=5)
        assert pts == [0, Fr(5, 2)]


class TestBoundaryDiscipline:
    """[0,2) against [0,2]: only formulas that inspect exactly t=2 may differ."""

    A = TimedAutomaton({"p"}, ["v", "w"], ["v"], {"v": {"p"}, "w": set()}, [], {}, [Edge("v", "w", (), ())], ["v", "w"])
    open_end = Execution((("v", I("[0,2)")),), ())
    closed_end = Execution((("v", I("[0,2]")),), ())

    @pytest.mark.parametrize("text,differs", [
        ("F[2,2] p@pi", True),
        ("F[2,3] p@pi", True),
        ("F(2,3] p@pi", False),
        ("F[0,2) p@pi", False),
        ("G[1,2) p@pi", False),
        ("G[1,2] p@pi", True),
        ("F[1,3] !p@pi", False),
    ])
    def test_pair(self, text, differs):
        phi = qf(text)
        a = sat_interval(self.A, {"pi": self.open_end}, 0, None, phi)
        b = sat_interval(self.A, {"pi": self.closed_end}, 0, None, phi)
        assert (a != b) == differs


# -- randomized properties ---------------------------------------------------------------


def population(seed, horizon=5, full_span=False, count=6):
    rng = random.Random(seed)
    for _ in range(20):
        A = random_automaton(rng)
        runs = random_runs(A, GridBudget(4, 3, Fr(horizon)), rng, count, full_span=full_span)
        if runs:
            return rng, A, runs
    return rng, None, []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_critical_points_match_lattice_oracle(seed):
    rng, A, runs = population(seed)
    if not runs:
        return
    env = {"a": rng.choice(runs), "b": rng.choice(runs)}
    phi = random_qf_formula(rng, ["a", "b"], depth=3)
    sem = IntervalSemantics(A, Fr(5))
    oracle = LatticeOracle(A, env, Fr(5), 4)
    for _ in range(200):
        t = Fr(rng.randrange(0, 5 * 1009), 1009) if rng.random() < 0.7 else Fr(rng.randrange(0, 40), 8)
        assert sem.sat(env, t, None, phi) == oracle(phi, t), (hf.to_text(phi), t)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_negation_duality_on_full_span_without_until(seed):
    rng, A, runs = population(seed, full_span=True)
    if not runs:
        return
    env = {"a": rng.choice(runs), "b": rng.choice(runs)}
    phi = random_qf_formula(rng, ["a", "b"], depth=3, allow_until=False)
    neg = hf.negate(phi)
    sem = IntervalSemantics(A, Fr(5))
    for k in range(0, 40, 3):
        t = Fr(k, 8)
        assert sem.sat(env, t, None, phi) != sem.sat(env, t, None, neg)


def test_until_dual_counterexample_on_full_span():
    """The textbook-style Until dual misses runs where the left operand fails at once.

    With ``a`` false and ``b`` true throughout, ``a U[1,1] b`` is false, yet
    ``G[1,1] !b`` is false and ``!b U[0,1) !a`` needs ``!b`` on a nonempty stretch.
    """
    A = TimedAutomaton({"a", "b"}, ["v"], ["v"], {"v": {"b"}}, [], {}, [], ["v"])
    env = {"pi": Execution((("v", I("[0,5)")),), ())}
    phi = qf("(a@pi U[1,1] b@pi)")
    assert hf.negate(phi) == qf("G[1,1] !b@pi | (!b@pi U[0,1) !a@pi)")
    assert not sat_interval(A, env, 0, None, phi, horizon=5)
    assert not sat_interval(A, env, 0, None, hf.negate(phi), horizon=5)


def reach(phi) -> object:
    """Largest distance into the future any subformula can look."""
    if isinstance(phi, (hf.Prop, hf.NegProp)):
        return Fr(0)
    inner = max(reach(c) for c in phi.children())
    if isinstance(phi, (hf.Finally, hf.Globally, hf.Until)):
        return inner + phi.interval.right
    return inner


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_bounded_and_unbounded_agree_below_horizon(seed):
    rng, A, runs = population(seed, horizon=3)
    if not runs:
        return
    env = {"a": rng.choice(runs), "b": rng.choice(runs)}
    phi = random_qf_formula(rng, ["a", "b"], depth=2, max_const=1)
    r = reach(phi)
    bounded, unbounded = IntervalSemantics(A, Fr(5)), IntervalSemantics(A, INF)
    for k in range(0, 20):
        t = Fr(k, 4)
        if r is INF or t + r >= 5:
            break
        assert bounded.sat(env, t, None, phi) == unbounded.sat(env, t, None, phi)


def point_probe_instance(rng):
    B = random_point_automaton(rng)
    etas = enumerate_point_runs(B, GridBudget(2, 3, Fr(3)))
    return B, etas


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_point_and_interval_views_agree(seed):
    rng = random.Random(seed)
    B, etas = point_probe_instance(rng)
    if not etas:
        return
    T = build_interval_automaton(B)
    N = Fr(3)
    psem = PointSemantics(B, N, ListProvider(etas, point_mode=True))
    isem = IntervalSemantics(T, N, ListProvider([chi(B, e) for e in etas]))
    for _ in range(5):
        body = random_qf_formula(rng, ["a", "c"], props=("p", "q"), depth=2)
        phi = hf.Exists("c", body) if rng.random() < 0.5 else hf.Forall("c", body)
        if rng.random() < 0.4:
            phi = random_qf_formula(rng, ["a", "b"], props=("p", "q"), depth=2)
        env = {"a": rng.choice(etas), "b": rng.choice(etas)}
        ienv = {v: chi(B, e) for v, e in env.items()}
        for t in sorted({Fr(0), Fr(1, 2), Fr(3, 2)} | set(env["a"].times)):
            if t >= N:
                continue
            want = psem.sat(env, t, "a", phi)
            got = isem.sat(ienv, t, "a", hf.point_to_interval(phi, list(env)))
            assert want == got, (hf.to_text(phi), t)
