import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tslmine.discovery import synthesize_covering_functions
from tslmine.envs import EnvConfig, generate_corpus
from tslmine.lifting import (
    LiftingConfig,
    LiftingError,
    apply_predicates,
    bit_blast,
    compute_rankings,
    construct_traces,
    faithful,
    lift_corpus,
)
from tslmine.logic import (
    END,
    PredicateAtom,
    Signature,
    UpdateTerm,
    check_well_formed,
    identity_update,
)
from tslmine.synth import IDENTITY, Function

ADD1 = Function.from_name("add1")
SUB1 = Function.from_name("sub1")


def walk_log():
    rows = []
    for x, y in [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 3), (3, 3)]:
        rows.append({"x": x, "y": y, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1,
                     "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2})
    return rows


def test_identity_outranks_read_from_x():
    log_ = walk_log()
    rank = compute_rankings([log_], list(log_[0]), [IDENTITY, ADD1])
    order = rank.order("y")
    assert order.index((IDENTITY, ("y",))) < order.index((ADD1, ("x",)))


def test_ambiguous_step_takes_identity():
    log_ = walk_log()
    lifted = lift_corpus([log_], [], list(log_[0]), [IDENTITY, ADD1])
    tr = lifted.positives[0]
    assert len(tr) == 7
    # (1,2) -> (2,2): y stays put although x + 1 would also give 2
    assert identity_update("y") in tr.steps[3]
    assert UpdateTerm("y", ADD1, ("x",)) not in tr.steps[3]


def test_unchanging_variable_ranks_identity_first():
    logs = [[{"a": 1, "b": 0}, {"a": 1, "b": 1}, {"a": 1, "b": 2}]]
    rank = compute_rankings(logs, ["a", "b"], [IDENTITY, ADD1])
    assert rank.best("a")[:2] == (IDENTITY, ("a",))


def test_counts_by_brute_force():
    # two logs; x + 1 explains 7 steps, x - 1 explains 3
    logs = [[{"x": v} for v in (0, 1, 2, 3, 4, 3, 2)], [{"x": v} for v in (5, 6, 7, 8, 7)]]
    rank = compute_rankings(logs, ["x"], [ADD1, SUB1])
    brute = {}
    for f in (ADD1, SUB1):
        brute[f] = sum(f(l[t]["x"]) == l[t + 1]["x"] for l in logs for t in range(len(l) - 1))
    assert brute == {ADD1: 7, SUB1: 3}
    assert [(f, c) for f, _, c in rank.entries["x"]] == [(ADD1, 7), (SUB1, 3)]


def test_ranking_stable_under_log_permutation():
    logs = [[{"x": v} for v in (0, 1, 2, 3, 4, 3, 2)], [{"x": v} for v in (5, 6, 7, 8, 7)]]
    a = compute_rankings(logs, ["x"], [ADD1, SUB1])
    b = compute_rankings(logs[::-1], ["x"], [ADD1, SUB1])
    assert a.order("x") == b.order("x")


def test_constant_two_step_log():
    log_ = [{"x": 2, "y": 2}, {"x": 2, "y": 2}]
    sig = Signature.from_names(["x", "y"])
    rank = compute_rankings([log_], ["x", "y"], [IDENTITY], exempt={"x", "y"})
    (tr,) = construct_traces([log_], sig, rank)
    eq = PredicateAtom("eq", ("x", "y"))
    assert tr.steps[0] == {identity_update("x"), identity_update("y"), eq}
    assert tr.steps[1] == {END, eq}


def test_missing_update_names_the_spot():
    log_ = [{"x": 0}, {"x": 1}, {"x": 5}]
    sig = Signature.from_names(["x"])
    rank = compute_rankings([log_], ["x"], [ADD1])
    with pytest.raises(LiftingError) as e:
        construct_traces([log_], sig, rank)
    assert (e.value.log_id, e.value.variable, e.value.timestep) == (0, "x", 1)


def test_fallback_uses_a_constant_update():
    log_ = [{"x": 0}, {"x": 1}, {"x": 5}]
    sig = Signature.from_names(["x"])
    rank = compute_rankings([log_], ["x"], [ADD1])
    (tr,) = construct_traces([log_], sig, rank, fallback=True)
    assert faithful(tr, log_, sig)


# -- predicates -----------------------------------------------------------------------------


def test_predicate_examples():
    sig = Signature.from_names(["x", "goalx"])
    assert PredicateAtom("eq", ("x", "goalx")) in apply_predicates({"x": 3, "goalx": 3}, sig)
    sig = Signature.from_names(["c", "sThresh"])
    assert PredicateAtom("lt", ("c", "sThresh")) in apply_predicates({"c": 11, "sThresh": 17}, sig)
    sig = Signature.from_names(["dealer", "lo", "med"])
    got = apply_predicates({"dealer": 5, "lo": 2, "med": 6}, sig, ordered_constants=("lo", "med"))
    assert PredicateAtom("gte", ("dealer", "lo")) in got
    assert PredicateAtom("lte", ("dealer", "med")) in got


def test_bool_variables_give_bare_atoms():
    sig = Signature.from_names(["stood", "weak"], bools=["stood", "weak"])
    got = apply_predicates({"stood": True, "weak": False}, sig)
    assert PredicateAtom("var", ("stood",)) in got
    assert PredicateAtom("var", ("weak",)) not in got


@given(st.dictionaries(st.sampled_from(["a", "b", "c", "d"]), st.integers(-3, 3), min_size=2))
def test_predicates_sound_and_complete(val):
    names = sorted(val)
    sig = Signature.from_names(names)
    got = apply_predicates(val, sig, ordered_constants=names[-1:])
    expected = set()
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if val[a] == val[b]:
                expected.add(PredicateAtom("eq", (a, b)))
        for b in names:
            if a != b and val[a] < val[b]:
                expected.add(PredicateAtom("lt", (a, b)))
    # every emitted atom is true; no eq/lt that holds is missing
    assert all(p.holds(val) for p in got)
    assert expected <= got


# -- whole corpora ---------------------------------------------------------------------------


@pytest.mark.parametrize("game,variant", [("frozenlake", "var_conf"), ("cliffwalking", "var_size"),
                                          ("taxi", "var_pos"), ("blackjack", "basic")])
def test_corpus_lifting_is_faithful_and_well_formed(game, variant):
    c = generate_corpus(EnvConfig(game, variant), 4, rng=random.Random(11))
    pos = [list(e.log) for e in c.positives]
    neg = [list(e.log) for e in c.negatives]
    variables = list(pos[0][0])
    d = synthesize_covering_functions(pos + neg, variables)
    lifted = lift_corpus(pos, neg, variables, d.functions)
    for tr, log_ in zip(lifted.positives + lifted.negatives, pos + neg):
        assert check_well_formed(tr, lifted.signature) == []
        assert faithful(tr, log_, lifted.signature)
        for step in tr.steps[:-1]:
            targets = [t.target for t in step if isinstance(t, UpdateTerm)]
            assert len(targets) == len(set(targets))


# -- bit-blasting ------------------------------------------------------------------------------


def _bits(step, var):
    return {t.args[0] for t in step if t != END and t.args[0].startswith(var + "_b")}


def test_bit_blast_examples():
    (tr,) = bit_blast([[{"x": 3}]], width=4)
    assert _bits(tr.steps[0], "x") == {"x_b0", "x_b1"}
    (tr,) = bit_blast([[{"x": 0}]], width=4)
    assert _bits(tr.steps[0], "x") == set()


def test_bit_blast_constant_goal_bits_everywhere():
    (tr,) = bit_blast([walk_log()], width=4)
    for step in tr.steps:
        assert _bits(step, "goalx") == {"goalx_b0", "goalx_b1"}
    assert END in tr.steps[-1] and all(END not in s for s in tr.steps[:-1])


def test_bit_blast_rejects_out_of_range():
    with pytest.raises(ValueError):
        bit_blast([[{"x": 16}]], width=4)
    with pytest.raises(ValueError):
        bit_blast([[{"x": -1}]], width=4)


def test_lifting_config_defaults():
    cfg = LiftingConfig()
    assert cfg.k_max == 2 and cfg.ordered_constants == ()
