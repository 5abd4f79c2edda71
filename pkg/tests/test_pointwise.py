import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from hyperclock.automaton import AutomatonError, Execution, is_accepting, validate_execution
from hyperclock.engine import GridBudget, enumerate_point_runs, enumerate_runs, point_budget_for_reduction
from hyperclock.generators import random_point_automaton
from hyperclock.pointwise import (
    MARK_PROP, SING_CLOCK, PointAutomaton, PointEdge, PointExecution, build_interval_automaton, chi, chi_inverse,
    is_point_accepting, validate_point_execution,
)
from hyperclock.timecore import Interval, parse_constraint

I = Interval.parse


def guarded(c: str) -> PointAutomaton:
    return PointAutomaton({"p"}, ["s0", "s1"], "s0", ["x"], [PointEdge("s0", {"p"}, [parse_constraint(c)], [], "s1")],
                          ["s1"])


def two_events() -> PointAutomaton:
    return PointAutomaton({"p", "q"}, ["s0", "s1"], "s0", ["x"],
                          [PointEdge("s0", {"p"}, [], [], "s1"), PointEdge("s1", {"q"}, [], ["x"], "s1")], ["s1"])


class TestValidatePoint:
    def test_guard_met(self):
        assert validate_point_execution(guarded("(>= x 2)"), PointExecution([(0, 3)])) == []

    def test_guard_violated(self):
        v = validate_point_execution(guarded("(>= x 4)"), PointExecution([(0, 3)]))
        assert [(p.kind, p.index) for p in v] == [("guard", 1)]

    def test_simultaneous_events(self):
        v = validate_point_execution(two_events(), PointExecution([(0, 2), (1, 2)]))
        assert "monotonicity" in [p.kind for p in v]

    def test_wrong_source(self):
        v = validate_point_execution(two_events(), PointExecution([(1, 2)]))
        assert [p.kind for p in v] == ["edge"]

    def test_reset_recurrence(self):
        B = PointAutomaton({"p"}, ["s"], "s", ["x"],
                           [PointEdge("s", {"p"}, [], ["x"], "s"), PointEdge("s", {"p"}, [parse_constraint("(<= x 1)")], [], "s")],
                           ["s"])
        assert validate_point_execution(B, PointExecution([(0, 5), (1, 6)])) == []
        assert validate_point_execution(B, PointExecution([(1, 5)]))


class TestChi:
    def test_one_step(self):
        assert chi(two_events(), PointExecution([(0, 3)])) == Execution((("s0", I("[0,3)")), ("edge0", I("[3,3]"))), (0,))

    def test_two_steps(self):
        rho = chi(two_events(), PointExecution([(0, 3), (1, 5)]))
        assert rho.segments == (("s0", I("[0,3)")), ("edge0", I("[3,3]")), ("s1", I("(3,5)")), ("edge1", I("[5,5]")))

    def test_event_at_origin(self):
        rho = chi(two_events(), PointExecution([(0, 0), (1, 1)]))
        assert rho.segments[0] == ("edge0", I("[0,0]"))

    def test_inverse(self):
        B = two_events()
        eta = PointExecution([(0, 3), (1, 5)])
        assert chi_inverse(B, chi(B, eta)) == eta

    def test_non_singular_edge_segment(self):
        rho = Execution((("s0", I("[0,3)")), ("edge0", I("[3,4]"))), (0,))
        with pytest.raises(AutomatonError):
            chi_inverse(two_events(), rho)

    def test_invalid_rejected(self):
        with pytest.raises(AutomatonError):
            chi(guarded("(>= x 4)"), PointExecution([(0, 3)]))


class TestBuild:
    def test_counts(self):
        T = build_interval_automaton(guarded("(>= x 2)"))
        assert len(T.states) == 3 and len(T.edges) == 2
        assert SING_CLOCK in T.clocks

    def test_edge_state_label(self):
        T = build_interval_automaton(guarded("(>= x 2)"))
        assert T.label("edge0") == {"p", MARK_PROP}
        assert T.label("s0") == {"s0"}

    def test_constraints(self):
        T = build_interval_automaton(guarded("(>= x 2)"))
        assert str(T.beta("edge0", SING_CLOCK)) == "(= x_sing 0)"
        assert str(T.beta("edge0", "x")) == "(>= x 2)"
        assert T.initial == {"s0", "edge0"} and T.final == {"edge0"}

    def test_reserved_names(self):
        with pytest.raises(AutomatonError):
            PointAutomaton(set(), ["s"], "s", [SING_CLOCK], [], ["s"])
        with pytest.raises(AutomatonError):
            PointAutomaton({"#"}, ["s"], "s", [], [], ["s"])

    def test_grid_runs_match_chi_image(self):
        """Enumerate both sides on a small automaton and compare the run sets."""
        B = PointAutomaton({"p", "q"}, ["s0", "s1"], "s0", ["x"],
                           [PointEdge("s0", {"p"}, [parse_constraint("(>= x 1)")], ["x"], "s1"),
                            PointEdge("s1", {"q"}, [parse_constraint("(< x 2)")], [], "s0"),
                            PointEdge("s1", {"p", "q"}, [], [], "s1")], ["s1"])
        budget = GridBudget(1, 3, Fr(4))
        T = build_interval_automaton(B)
        point_runs = enumerate_point_runs(B, budget)
        interval_runs = list(enumerate_runs(T, point_budget_for_reduction(budget)))
        assert {chi(B, eta) for eta in point_runs} == set(interval_runs)
        assert {chi_inverse(B, rho) for rho in interval_runs} == set(point_runs)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_chi_bijection_on_random_runs(seed):
    rng = random.Random(seed)
    B = random_point_automaton(rng)
    T = build_interval_automaton(B)
    for eta in enumerate_point_runs(B, GridBudget(2, 3, Fr(3)))[:40]:
        assert validate_point_execution(B, eta) == [] and is_point_accepting(B, eta)
        rho = chi(B, eta)
        assert validate_execution(T, rho) == [] and is_accepting(T, rho)
        assert chi_inverse(B, rho) == eta
        for state, iv in rho.segments:
            if state.startswith("edge"):
                assert iv.singular
        marked = [iv.L for state, iv in rho.segments if MARK_PROP in T.label(state)]
        assert marked == eta.times
