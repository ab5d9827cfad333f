import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import formulas, traces
from tslmine.lifting import construct_traces, lift_corpus
from tslmine.logic import (
    END,
    TOP,
    Always,
    And,
    Atom,
    Eventually,
    Next,
    Not,
    Or,
    PredicateAtom,
    Signature,
    Trace,
    UpdateTerm,
    Until,
    check_well_formed,
    evaluate,
    evaluate_reference,
    expand,
    identity_update,
    satisfies,
)
from tslmine.synth import IDENTITY, Function
from tslmine.syntax import FormulaSyntaxError, format_formula, normalize_text, parse_formula

A = Atom(PredicateAtom("var", ("a",)))
B = Atom(PredicateAtom("var", ("b",)))


def walk_log():
    rows = []
    for x, y in [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 3), (3, 3)]:
        rows.append({"x": x, "y": y, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1,
                     "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2})
    return rows


# -- evaluation ---------------------------------------------------------------------


def test_walk_log_goal_liveness_holds():
    lifted = lift_corpus([walk_log()], [], list(walk_log()[0]),
                         [IDENTITY, Function.from_name("add1")])
    f = parse_formula("F ((eq x goalx) && (eq y goaly))")
    assert evaluate(lifted.positives[0], 0, f)


@given(traces(), formulas(max_leaves=4))
def test_next_false_at_last_position(trace, f):
    assert not evaluate(trace, len(trace) - 1, Next(f))


@given(traces())
def test_end_only_at_last_position(trace):
    for i in range(len(trace)):
        assert evaluate(trace, i, Atom(END)) == (i == len(trace) - 1)


def test_position_out_of_range():
    t = Trace((frozenset({END}),))
    with pytest.raises(ValueError):
        evaluate(t, 1, A)
    with pytest.raises(ValueError):
        evaluate(t, -1, A)


@given(traces(), formulas())
def test_bitmask_matches_recursive_definition(trace, f):
    for i in range(len(trace)):
        assert evaluate(trace, i, f) == evaluate_reference(trace, i, f)


@given(traces(), formulas(max_leaves=6))
def test_derived_operator_laws(trace, f):
    for i in range(len(trace)):
        assert evaluate(trace, i, Eventually(f)) == evaluate(trace, i, Until(TOP, f))
        assert evaluate(trace, i, Always(f)) == evaluate(trace, i, Not(Eventually(Not(f))))
        assert evaluate(trace, i, f) == evaluate(trace, i, expand(f))


@given(traces(), formulas(max_leaves=4), formulas(max_leaves=4))
def test_or_expansion(trace, f, g):
    for i in range(len(trace)):
        assert evaluate(trace, i, Or(f, g)) == evaluate(trace, i, Not(And(Not(f), Not(g))))


@given(traces(max_len=7), formulas(max_leaves=4), formulas(max_leaves=4))
def test_until_holds_up_to_its_witness(trace, f, g):
    u = Until(f, g)
    for i in range(len(trace)):
        if not evaluate(trace, i, u):
            continue
        j = next(j for j in range(i, len(trace)) if evaluate(trace, j, g))
        assert all(evaluate(trace, k, u) for k in range(i, j + 1))


def test_until_needs_witness_inside_trace():
    t = Trace((frozenset({A.term}), frozenset({A.term, END})))
    assert not satisfies(t, Until(A, B))


# -- well-formedness ----------------------------------------------------------------------


def _up(target, src):
    return UpdateTerm(target, IDENTITY, (src,))


def test_two_updates_for_one_variable():
    steps = [frozenset({_up("x", "x")}), frozenset({_up("x", "x")}),
             frozenset({_up("x", "y"), _up("x", "z")}), frozenset({END})]
    v = check_well_formed(Trace(tuple(steps)), ["x"])
    assert [(e.constraint, e.position, e.variable) for e in v] == [(1, 2, "x")]


def test_update_at_last_position():
    steps = [frozenset({_up("x", "x")}), frozenset({_up("x", "x"), END})]
    v = check_well_formed(Trace(tuple(steps)), ["x"])
    assert [e.constraint for e in v] == [2]


def test_end_misplaced_and_missing():
    steps = [frozenset({_up("x", "x"), END}), frozenset()]
    v = check_well_formed(Trace(tuple(steps)), ["x"])
    assert sorted((e.constraint, e.position) for e in v) == [(3, 0), (3, 1)]


def test_missing_update_reported():
    v = check_well_formed(Trace((frozenset(), frozenset({END}))), ["x"])
    assert [(e.constraint, e.variable) for e in v] == [(1, "x")]


def test_lifted_walk_log_is_well_formed():
    log_ = walk_log()
    sig = Signature.from_names(list(log_[0]))
    from tslmine.lifting import compute_rankings

    fns = [IDENTITY, Function.from_name("add1")]
    rank = compute_rankings([log_], sig.names, fns)
    (tr,) = construct_traces([log_], sig, rank)
    assert check_well_formed(tr, sig) == []


# -- unsatisfiable update patterns on small traces ----------------------------------------


def test_no_short_trace_models_two_sources():
    # updates of x from y and from z can never both recur forever on a finite trace
    f = Always(And(Eventually(Atom(_up("x", "y"))), Eventually(Atom(_up("x", "z")))))
    ups = [_up("x", "x"), _up("x", "y"), _up("x", "z")]
    for n in range(1, 5):
        for choice in itertools.product(ups, repeat=n - 1):
            steps = tuple(frozenset({u}) for u in choice) + (frozenset({END}),)
            assert not satisfies(Trace(steps), f)


# -- syntax -------------------------------------------------------------------------------


def test_parse_examples():
    assert parse_formula("F (eq p g)") == Eventually(Atom(PredicateAtom("eq", ("p", "g"))))
    f = parse_formula("G !([x <- sub1 x])")
    assert isinstance(f, Always) and isinstance(f.arg, Not)
    assert isinstance(f.arg.arg.term, UpdateTerm)


SAMPLE_FORMULAS = [
    "F ((eq x goalx) && (eq y goaly))",
    "G !((eq x h0x) && (eq y h0y))",
    "G (((eq y h1y) -> !(eq x h1x)) && !((eq x h2x) && (eq y h2y)))",
    "F ((eq x cliffXMax) && (lt y cliffHeight))",
    "G !((lt y cliffHeight) && ((lt cliffXMin x) && (lt x cliffXMax)))",
    "F (((eq x RED_x) && (eq y RED_y)) && F ((eq x DEST_x) && (eq y DEST_y)))",
    "G !((lt c sThresh) <-> X stood)",
    "G ((gte dealer lo) && (lte dealer med))",
    "G ([x <- add1 x] || [y <- y])",
]


@pytest.mark.parametrize("text", SAMPLE_FORMULAS)
def test_format_parse_round_trip(text):
    f = parse_formula(text)
    assert parse_formula(format_formula(f)) == f
    assert format_formula(parse_formula(text)) == normalize_text(text)


@given(formulas())
def test_parse_inverts_format(f):
    assert parse_formula(format_formula(f)) == f


def test_syntax_error_has_offset():
    with pytest.raises(FormulaSyntaxError) as e:
        parse_formula("F ((eq x y)")
    assert "offset" in str(e.value)


def test_unknown_variable_with_signature():
    sig = Signature.from_names(["x", "y"])
    with pytest.raises(FormulaSyntaxError):
        parse_formula("F (eq x z)", sig)


def test_identity_update_formats_bare():
    assert format_formula(Atom(identity_update("y"))) == "[y <- y]"


def test_size_counts_nodes():
    assert parse_formula("F ((eq x goalx) && (eq y goaly))").size == 4
    assert parse_formula("G !((eq x h0x) && (eq y h0y))").size == 5
