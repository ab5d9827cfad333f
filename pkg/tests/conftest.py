import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tslmine.logic import (
    END,
    Always,
    And,
    Atom,
    Eventually,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    PredicateAtom,
    Trace,
    Until,
)

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

PROPS = tuple(PredicateAtom("var", (n,)) for n in "abc")


@st.composite
def traces(draw, props=PROPS, max_len=6):
    n = draw(st.integers(1, max_len))
    steps = []
    for i in range(n):
        held = {p for p in props if draw(st.booleans())}
        if i == n - 1:
            held.add(END)
        steps.append(frozenset(held))
    return Trace(tuple(steps))


def formulas(props=PROPS, max_leaves=8):
    leaves = st.sampled_from([Atom(p) for p in props] + [Atom(END)])

    def extend(sub):
        return st.one_of(
            st.builds(Not, sub), st.builds(Next, sub), st.builds(Eventually, sub),
            st.builds(Always, sub), st.builds(And, sub, sub), st.builds(Or, sub, sub),
            st.builds(Implies, sub, sub), st.builds(Iff, sub, sub), st.builds(Until, sub, sub))

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def random_trace(rng: random.Random, props=PROPS, max_len=6) -> Trace:
    n = rng.randint(1, max_len)
    steps = []
    for i in range(n):
        held = {p for p in props if rng.random() < 0.5}
        if i == n - 1:
            held.add(END)
        steps.append(frozenset(held))
    return Trace(tuple(steps))


def random_formula(rng: random.Random, depth: int = 3, props=PROPS):
    if depth == 0 or rng.random() < 0.25:
        return Atom(rng.choice(props + (END,)))
    op = rng.choice((Not, Next, Eventually, Always, And, Or, Implies, Iff, Until))
    if op in (Not, Next, Eventually, Always):
        return op(random_formula(rng, depth - 1, props))
    return op(random_formula(rng, depth - 1, props), random_formula(rng, depth - 1, props))


@pytest.fixture
def rng():
    return random.Random(1234)


# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
