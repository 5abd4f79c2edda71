import os
import random

import pytest

from hyperclock.automaton import Edge, TimedAutomaton, execution_from_pairs
from hyperclock.timecore import parse_constraint


def seed() -> int:
    return int(os.environ.get("HYPERCLOCK_SEED", "0"))


@pytest.fixture
def rng():
    return random.Random(seed())


def five_segment_automaton(constrained: bool = False) -> TimedAutomaton:
    """Four states, two clocks; its five-segment run has both transition kinds at t=12."""
    beta = {}
    guards = [(), (), (), ()]
    if constrained:
        beta = {("v2", "x1"): parse_constraint("(<= x1 5)"), ("v3", "x2"): parse_constraint("(< x2 3)")}
        guards[1] = (parse_constraint("(>= x1 5)"),)
        guards[3] = (parse_constraint("(> x1 6)"),)
    edges = [
        Edge("v1", "v2", guards[0], {"x1"}),
        Edge("v2", "v3", guards[1], {"x2"}),
        Edge("v3", "v1", guards[2], {"x2"}),
        Edge("v1", "v4", guards[3], {"x1"}),
    ]
    return TimedAutomaton({"p"}, ["v1", "v2", "v3", "v4"], ["v1"], {"v1": {"p"}}, ["x1", "x2"], beta, edges, ["v4"])


FIVE_SEGMENTS = [("v1", "[0,5)"), ("v2", "[5,10]"), ("v3", "(10,12)"), ("v1", "[12,12]"), ("v4", "(12,15)")]


@pytest.fixture
def five_seg():
    A = five_segment_automaton()
    return A, execution_from_pairs(A, FIVE_SEGMENTS, [0, 1, 2, 3])


@pytest.fixture
def five_seg_constrained():
    A = five_segment_automaton(constrained=True)
    return A, execution_from_pairs(A, FIVE_SEGMENTS, [0, 1, 2, 3])


def one_state(props=("p",), label=("p",), clocks=()) -> TimedAutomaton:
    return TimedAutomaton(set(props), ["v"], ["v"], {"v": set(label)}, list(clocks), {}, [], ["v"])
