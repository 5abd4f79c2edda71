import random
import re
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from hyperclock import formula as hf
from hyperclock.automaton import TimedAutomaton, encode_flow, execution_from_pairs
from hyperclock.engine import GridBudget
from hyperclock.flow import Flow, elementary_pieces, indexed
from hyperclock.generators import mutate_flow, random_automaton, random_runs
from hyperclock.mso import (
    BruteForceWitnesses, Evaluator, MsoError, automaton_formula, available_backends, env_to_flow, eval_mso, parse,
    scaling_manifest, serialize, translate,
)
from hyperclock.mso.emit import Translator
from hyperclock.mso.syntax import (
    ExistsFO, ExistsSO, Less, Not, Or, PlusOne, Pred, conj, conjuncts, forall_fo, fo_depth, free_fo,
)
from hyperclock.semantics import IntervalSemantics
from hyperclock.timecore import Interval

from conftest import FIVE_SEGMENTS, five_segment_automaton, seed
from oracles import NaiveMso

I = Interval.parse


def flow(horizon, *pieces):
    return Flow(Fr(horizon), tuple((I(iv), frozenset(ps)) for iv, ps in pieces))


class TestEvaluation:
    def test_exists_point(self):
        f = flow(2, ("[0,1)", {"P"}))
        assert eval_mso(f, {}, ExistsFO("x", Pred("P", "x")))

    def test_exists_point_outside_support(self):
        f = flow(2, ("[0,1)", {"P"}))
        assert not eval_mso(f, {}, ExistsFO("x", conj(Pred("P", "x"), ExistsFO("y", PlusOne("y", "x")))))

    def test_forced_successor(self):
        f = flow(2, ("[0,2)", {"P"}))
        phi = ExistsFO("y", conj(PlusOne("x", "y"), Pred("P", "y")))
        assert eval_mso(f, {"x": Fr(1, 2)}, phi)
        # y = x + 1 = 3/2 is the only choice; it must be inside the domain
        assert not eval_mso(f, {"x": Fr(3, 2)}, phi)
        only = ExistsFO("y", conj(PlusOne("x", "y"), Pred("Q", "y")))
        g = flow(2, ("[3/2,3/2]", {"Q"}))
        assert eval_mso(g, {"x": Fr(1, 2)}, only)
        assert not eval_mso(g, {"x": Fr(1, 4)}, only)

    def test_strict_order(self):
        f = flow(2, ("[1,1]", {"P"}))
        after = ExistsFO("y", conj(Less("x", "y"), Pred("P", "y")))
        assert eval_mso(f, {"x": Fr(1, 2)}, after)
        assert not eval_mso(f, {"x": Fr(1)}, after)

    def test_open_gap_between_points(self):
        # P on (0,1) only; a witness must fall strictly between two grid points
        f = flow(3, ("(0,1)", {"P"}))
        phi = ExistsFO("y", conj(Pred("P", "y"), ExistsFO("z", conj(Less("y", "z"), Pred("P", "z")))))
        assert eval_mso(f, {}, phi)

    def test_free_variable_needs_value(self):
        with pytest.raises(MsoError):
            eval_mso(flow(2), {}, Pred("P", "x"))

    def test_value_outside_domain(self):
        ev = Evaluator(Pred("P", "x"), flow(2), ["x"])
        with pytest.raises(MsoError):
            ev(x=Fr(2))

    def test_unbounded_flow_rejected(self):
        from hyperclock.timecore import INF

        with pytest.raises(MsoError):
            Evaluator(ExistsFO("x", Pred("P", "x")), Flow(INF, ()))

    def test_second_order_needs_witnesses(self):
        with pytest.raises(MsoError):
            eval_mso(flow(1), {}, ExistsSO("Q", ExistsFO("x", Pred("Q", "x"))))

    def test_second_order_over_grid(self):
        # some Q holds exactly on the points where P fails
        f = flow(2, ("[0,1)", {"P"}))
        phi = ExistsSO("Q", forall_fo("x", Or((conj(Pred("P", "x"), Not(Pred("Q", "x"))),
                                                 conj(Not(Pred("P", "x")), Pred("Q", "x"))))))
        assert eval_mso(f, {}, phi, BruteForceWitnesses(2, 1, 1))
        # with no label changes allowed, Q cannot follow P's edge
        assert not eval_mso(f, {}, phi, BruteForceWitnesses(2, 1, 0))


# -- FO fragment against direct lattice enumeration ---------------------------------------


def random_flow(rng, horizon, g, preds=("P", "Q")):
    pts = [Fr(i, g) for i in range(horizon * g + 1)]
    pieces = []
    for iv in elementary_pieces(pts, horizon):
        pieces.append((iv, frozenset(p for p in preds if rng.random() < 0.4)))
    return Flow(Fr(horizon), tuple(pieces))


def random_fo(rng, scope, depth, fresh=iter(f"v{i}" for i in range(10**9))):
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        a, b = rng.choice(scope), rng.choice(scope)
        kind = rng.randrange(3)
        if kind == 0:
            return Less(a, b)
        if kind == 1:
            return PlusOne(a, b)
        return Pred(rng.choice("PQ"), a)
    if roll < 0.5:
        return Not(random_fo(rng, scope, depth - 1))
    if roll < 0.7:
        return Or((random_fo(rng, scope, depth - 1), random_fo(rng, scope, depth - 1)))
    v = next(fresh)
    return ExistsFO(v, random_fo(rng, scope + [v], depth - 1))


def test_fo_fragment_matches_lattice_enumeration():
    rng = random.Random(seed())
    probes = 0
    while probes < 10_000:
        g = rng.choice((1, 2))
        f = random_flow(rng, 2, g)
        phi = random_fo(rng, ["x"], rng.randint(1, 5))
        if fo_depth(phi) > 2:
            continue
        naive = NaiveMso(f, g)
        values = [Fr(i, 2 * g) for i in range(4 * g)]
        ev = Evaluator(phi, f, ["x"] if "x" in free_fo(phi) else [], extra_points=values)
        for x in values:
            want = naive(phi, {"x": x})
            got = ev(x=x) if "x" in free_fo(phi) else ev()
            assert got == want, (serialize(phi), str(f), x)
            probes += 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.builds(Fr, st.integers(0, 47), st.sampled_from([3, 6, 8, 12, 24])), max_size=3))
def test_refining_candidates_keeps_verdict(s, extra):
    rng = random.Random(s)
    f = random_flow(rng, 2, 2)
    phi = random_fo(rng, ["x"], 4)
    xs = [Fr(i, 4) for i in range(8)]
    free = ["x"] if "x" in free_fo(phi) else []
    base = Evaluator(phi, f, free, extra_points=xs)
    finer = Evaluator(phi, f, free, extra_points=xs + extra)
    for x in xs:
        args = {"x": x} if free else {}
        assert base(**args) == finer(**args)


# -- automaton formula ---------------------------------------------------------------------


class TestAutomatonFormula:
    @pytest.mark.parametrize("constrained", [False, True])
    def test_five_segment_run_accepted(self, constrained):
        A = five_segment_automaton(constrained)
        rho = execution_from_pairs(A, FIVE_SEGMENTS, [0, 1, 2, 3])
        assert Evaluator(automaton_formula(A), encode_flow(A, rho, 16))()

    def test_two_states_break_uniqueness(self, five_seg):
        A, rho = five_seg
        f = encode_flow(A, rho, 16)
        parts = conjuncts(automaton_formula(A))
        assert Evaluator(parts[0], f)()
        doubled = Flow(f.horizon, tuple(
            (iv, labels | {"v:v3"}) if iv == I("(0,5)") else (iv, labels) for iv, labels in f.segments
        ))
        assert not Evaluator(parts[0], doubled)()

    def test_initial_state_conjunct(self, five_seg):
        A, rho = five_seg
        init = conjuncts(automaton_formula(A))[1]
        # for all t: t is the origin (nothing lies before it) implies an initial state holds
        assert re.fullmatch(
            r"\(not \(exists-fo (\w+) \(not \(or \(exists-fo (\w+) \(< \2 \1\)\) \(pred v:v1 \1\)\)\)\)\)",
            serialize(init),
        )
        late = execution_from_pairs(A, [("v2", "[0,1)"), ("v3", "[1,2)")], [1])
        assert not Evaluator(init, encode_flow(A, late, 4, check=False))()
        assert Evaluator(init, encode_flow(A, rho, 16))()

    def test_rejects_rational_constants(self):
        from hyperclock.timecore import parse_constraint

        A = TimedAutomaton(set(), ["v"], ["v"], {}, ["x"], {("v", "x"): parse_constraint("(<= x 1/2)")}, [], ["v"])
        with pytest.raises(MsoError):
            automaton_formula(A)

    def test_generated_runs_accepted_by_both_kernels(self):
        rng = random.Random(seed())
        budget = GridBudget(4, 3, 3)
        for _ in range(4):
            A = random_automaton(rng)
            phi = automaton_formula(A)
            for rho in random_runs(A, budget, rng, 6):
                f = encode_flow(A, rho, budget.horizon)
                for backend in available_backends():
                    assert Evaluator(phi, f, backend=backend)()

    @pytest.mark.skipif("c" not in available_backends(), reason="compiled kernel not built")
    def test_kernels_agree_on_mutants(self):
        rng = random.Random(seed() + 1)
        budget = GridBudget(4, 3, 3)
        checked = 0
        for _ in range(5):
            A = random_automaton(rng)
            phi = automaton_formula(A)
            preds = sorted({f"v:{s}" for s in A.states} | {f"rminus:{x}" for x in A.clocks})
            for rho in random_runs(A, budget, rng, 5):
                f = mutate_flow(encode_flow(A, rho, budget.horizon), preds, rng, 4, 1)
                c, py = Evaluator(phi, f, backend="c"), Evaluator(phi, f, backend="py")
                assert c() == py()
                assert c.stats().steps == py.stats().steps
                checked += 1
        assert checked > 0


# -- path environments -----------------------------------------------------------------------


def two_final(A):
    return TimedAutomaton(A.propositions, A.states, A.initial, A.labels, A.clocks, {}, A.edges, ["v1", "v4"])


class TestEnvToFlow:
    def test_single_path(self, five_seg):
        A, rho = five_seg
        f = env_to_flow(A, {"a": rho}, ["a"], 16)
        assert f == encode_flow(A, rho, 16).rename(lambda p: indexed(p, 1))

    def test_identical_paths(self, five_seg):
        A, rho = five_seg
        f = env_to_flow(A, {"a": rho, "b": rho}, ["a", "b"], 16)
        for iv, labels in f.segments:
            assert {p[:-2] for p in labels if p.endswith("@1")} == {p[:-2] for p in labels if p.endswith("@2")}

    def test_merge_with_short_run(self):
        A = two_final(five_segment_automaton())
        rho = execution_from_pairs(A, FIVE_SEGMENTS, [0, 1, 2, 3])
        short = execution_from_pairs(A, [("v1", "[0,7)")], [])
        f = env_to_flow(A, {"a": rho, "b": short}, ["a", "b"], 16)
        want = [
            ("[0,0]", {"v:v1@1", "rminus:x1@1", "rminus:x2@1", "v:v1@2", "rminus:x1@2", "rminus:x2@2"}),
            ("(0,5)", {"v:v1@1", "v:v1@2"}),
            ("[5,5]", {"v:v2@1", "tminus:0@1", "rminus:x1@1", "v:v1@2"}),
            ("(5,7)", {"v:v2@1", "v:v1@2"}),
            ("[7,10)", {"v:v2@1"}),
            ("[10,10]", {"v:v2@1", "tplus:1@1", "rplus:x2@1"}),
            ("(10,12)", {"v:v3@1"}),
            ("[12,12]", {"v:v1@1", "tminus:2@1", "tplus:3@1", "rminus:x2@1", "rplus:x1@1"}),
            ("(12,15)", {"v:v4@1"}),
        ]
        assert [(str(iv), set(ls)) for iv, ls in f.segments] == want


# -- HCMTL* translation ------------------------------------------------------------------------


class TestTranslate:
    def test_atom(self, five_seg):
        A, _ = five_seg
        out = translate(hf.parse("p@a"), A)
        assert out == [Pred("v:v1@1", "x"), Pred("v:v1@1", "x")]

    def test_negated_atom(self, five_seg):
        A, _ = five_seg
        out = translate(hf.parse("!p@a"), A)[1]
        assert {q.name for q in out.args} == {"v:v2@1", "v:v3@1", "v:v4@1"}

    def test_closed_window(self, five_seg):
        A, _ = five_seg
        w = Translator(A).window("x", "y", I("[0,2]"))
        ev = Evaluator(w, flow(5), ["x", "y"], extra_points=[Fr(1, 2)])
        for i in range(10):
            for j in range(i + 1, 10):
                x, y = Fr(i, 2), Fr(j, 2)
                assert ev(x=x, y=y) == (y - x <= 2)

    @pytest.mark.parametrize("text", ["[1,3]", "(1,3)", "[1,3)", "(1,3]", "[2,2]", "(0,inf)", "[3,inf)"])
    def test_window_strictness(self, five_seg, text):
        A, _ = five_seg
        iv = I(text)
        ev = Evaluator(Translator(A).window("x", "y", iv), flow(5), ["x", "y"], extra_points=[Fr(1, 2)])
        from hyperclock.timecore import contains

        for i in range(10):
            for j in range(i + 1, 10):
                x, y = Fr(i, 2), Fr(j, 2)
                assert ev(x=x, y=y) == contains(iv, y - x), (x, y)

    def test_until_shape_and_truth(self, five_seg):
        A, rho = five_seg
        phi = hf.parse("(p@a U[0,6] !p@a)", allow_open_temporal=True)
        out = translate(phi, A)[1]
        assert isinstance(out, ExistsFO)
        f = env_to_flow(A, {"a": rho}, ["a"], 16)
        ev = Evaluator(out, f, ["x"], extra_points=[Fr(1, 2)])
        # p holds on [0,5) and fails from 5 on; later p-stretches are too short to lead anywhere
        sem = IntervalSemantics(A, Fr(16))
        for x, want in [(0, True), (Fr(9, 2), True), (5, False), (11, False), (12, False)]:
            assert ev(x=Fr(x)) == want == sem.sat({"a": rho}, Fr(x), "a", phi)

    def test_rejects_rational_constants(self, five_seg):
        A, _ = five_seg
        with pytest.raises(MsoError):
            translate(hf.parse("exists a. F[0,1/2] p@a"), A)

    def test_quantifier_guards_copy(self, five_seg):
        A, _ = five_seg
        out = translate(hf.parse("exists a. p@a"), A)
        assert len(out) == 1
        assert isinstance(out[0], ExistsSO)

    def test_manifest(self, five_seg):
        A, _ = five_seg
        m = scaling_manifest(A, hf.parse("exists a. F[0,1/2] p@a"), Fr(5))
        assert m == {"factor": 2, "horizon": "5", "scaled_horizon": "10"}


# -- serialization -----------------------------------------------------------------------------


class TestSerialize:
    def test_less(self):
        assert serialize(Less("x", "y")) == "(< x y)"

    def test_exists(self):
        assert serialize(ExistsFO("x", Pred("P", "x"))) == "(exists-fo x (pred P x))"

    def test_other_forms(self):
        assert serialize(ExistsSO("Q", Or((PlusOne("x", "y"), Not(Pred("Q", "x")))))) == (
            "(exists-so Q (or (+1 x y) (not (pred Q x))))"
        )

    def test_automaton_formula_fixed_point(self, five_seg_constrained):
        A, _ = five_seg_constrained
        text = serialize(automaton_formula(A))
        assert parse(text) == automaton_formula(A)
        assert serialize(parse(text)) == text

    def test_translation_fixed_point(self, five_seg):
        A, _ = five_seg
        for phi in translate(hf.parse("forall a. G[0,3] exists b. F(0,2] !p@b"), A):
            assert serialize(parse(serialize(phi))) == serialize(phi)

    @pytest.mark.parametrize("bad", ["(< x)", "(pred P)", "(frob x)", "(or (< x y)", ""])
    def test_parse_errors(self, bad):
        with pytest.raises(MsoError):
            parse(bad)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_serialize_parse_round_trip(s):
    phi = random_fo(random.Random(s), ["x"], 6)
    assert parse(serialize(phi)) == phi


def test_too_fine_grid_rejected():
    with pytest.raises(MsoError):
        eval_mso(flow(2), {"x": Fr(1, 10**7 + 19)}, Pred("P", "x"))
