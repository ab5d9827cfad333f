"""TSL_f object language: stream variables, terms, formulas, traces.

Evaluation works on whole traces at once: every subformula is turned into a
bitmask whose bit ``i`` is set iff the subformula holds at position ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .synth import IDENTITY, Function

INT = "Int"
BOOL = "Bool"

PREDICATES = {"eq": 2, "lt": 2, "lte": 2, "gte": 2}
END_SYMBOL = "END"
# a Boolean stream variable used directly as an atom, e.g. ``stood``
BOOL_SYMBOL = "var"


@dataclass(frozen=True)
class StreamVariable:
    name: str
    sort: str = INT


@dataclass(frozen=True)
class Signature:
    variables: tuple[StreamVariable, ...]
    functions: tuple[Function, ...] = ()

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate stream variable names in {names}")

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def sort_of(self, name: str) -> str:
        for v in self.variables:
            if v.name == name:
                return v.sort
        raise KeyError(name)

    def function(self, name: str) -> Function | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    @classmethod
    def from_names(cls, names: Iterable[str], bools: Iterable[str] = (), functions=()):
        bools = set(bools)
        return cls(
            tuple(StreamVariable(n, BOOL if n in bools else INT) for n in names),
            tuple(functions),
        )


@dataclass(frozen=True)
class UpdateTerm:
    target: str
    function: Function
    inputs: tuple[str, ...]

    def __post_init__(self):
        if len(self.inputs) != self.function.arity:
            raise ValueError(
                f"{self.function.name} takes {self.function.arity} inputs, got {self.inputs}"
            )

    def apply(self, valuation) -> int:
        return self.function(*(int(valuation[w]) for w in self.inputs))


@dataclass(frozen=True)
class PredicateAtom:
    symbol: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        if self.symbol == END_SYMBOL:
            want = 0
        elif self.symbol == BOOL_SYMBOL:
            want = 1
        elif self.symbol in PREDICATES:
            want = PREDICATES[self.symbol]
        else:
            raise ValueError(f"unknown predicate {self.symbol!r}")
        if len(self.args) != want:
            raise ValueError(f"{self.symbol} expects {want} args, got {self.args}")

    def holds(self, valuation) -> bool:
        if self.symbol == BOOL_SYMBOL:
            return bool(valuation[self.args[0]])
        a, b = (valuation[x] for x in self.args)
        if self.symbol == "eq":
            return a == b
        if self.symbol == "lt":
            return a < b
        if self.symbol == "lte":
            return a <= b
        if self.symbol == "gte":
            return a >= b
        raise ValueError(f"{self.symbol} is not valuation-checkable")


END = PredicateAtom(END_SYMBOL)


def identity_update(var: str) -> UpdateTerm:
    return UpdateTerm(var, IDENTITY, (var,))


# -- formulas ----------------------------------------------------------------


class Formula:
    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children())

    def subformulas(self) -> Iterator["Formula"]:
        yield self
        for c in self.children():
            yield from c.subformulas()

    def __str__(self):
        from .syntax import format_formula

        return format_formula(self)


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    term: UpdateTerm | PredicateAtom

    def __repr__(self):
        return f"Atom({self})"


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


TOP = Truth(True)
BOTTOM = Truth(False)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class _Binary(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


class And(_Binary):
    pass


class Or(_Binary):
    pass


class Implies(_Binary):
    pass


class Iff(_Binary):
    pass


class Until(_Binary):
    pass


UNARY = (Not, Next, Eventually, Always)
BINARY = (And, Or, Implies, Iff, Until)


def expand(f: Formula) -> Formula:
    """Rewrite derived operators into the core grammar (atoms, !, &&, X, U)."""
    if isinstance(f, (Atom, Truth)):
        return f
    if isinstance(f, Not):
        return Not(expand(f.arg))
    if isinstance(f, Next):
        return Next(expand(f.arg))
    if isinstance(f, Eventually):
        return Until(TOP, expand(f.arg))
    if isinstance(f, Always):
        return Not(Until(TOP, Not(expand(f.arg))))
    a, b = expand(f.left), expand(f.right)
    if isinstance(f, And):
        return And(a, b)
    if isinstance(f, Until):
        return Until(a, b)
    if isinstance(f, Or):
        return Not(And(Not(a), Not(b)))
    if isinstance(f, Implies):
        return Not(And(Not(Not(a)), Not(b)))
    if isinstance(f, Iff):
        return And(expand(Implies(f.left, f.right)), expand(Implies(f.right, f.left)))
    raise TypeError(f)


def atoms_of(f: Formula) -> set:
    return {s.term for s in f.subformulas() if isinstance(s, Atom)}


# -- traces and evaluation ----------------------------------------------------


@dataclass(frozen=True)
class Trace:
    steps: tuple[frozenset, ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a trace needs at least one position")

    def __len__(self):
        return len(self.steps)

    def atom_mask(self, term) -> int:
        """Bitmask of positions where ``term`` holds."""
        n = len(self.steps)
        if term == END:
            return 1 << (n - 1)
        mask = 0
        for i, step in enumerate(self.steps):
            if term in step:
                mask |= 1 << i
        return mask

    def atoms(self) -> set:
        out = set()
        for s in self.steps:
            out |= s
        return out


def eventually_mask(v: int) -> int:
    return (1 << v.bit_length()) - 1


def always_mask(v: int, full: int) -> int:
    holes = ~v & full
    return full & ~((1 << holes.bit_length()) - 1)


def until_mask(a: int, b: int, n: int) -> int:
    out = 0
    carry = False
    for i in range(n - 1, -1, -1):
        carry = bool(b >> i & 1) or (bool(a >> i & 1) and carry)
        if carry:
            out |= 1 << i
    return out


def truth_mask(trace: Trace, f: Formula, memo: dict | None = None) -> int:
    """Bitmask of the positions of ``trace`` at which ``f`` holds."""
    if memo is None:
        memo = {}
    got = memo.get(f)
    if got is not None:
        return got
    n = len(trace)
    full = (1 << n) - 1
    if isinstance(f, Atom):
        m = trace.atom_mask(f.term)
    elif isinstance(f, Truth):
        m = full if f.value else 0
    elif isinstance(f, Not):
        m = ~truth_mask(trace, f.arg, memo) & full
    elif isinstance(f, Next):
        m = truth_mask(trace, f.arg, memo) >> 1
    elif isinstance(f, Eventually):
        m = eventually_mask(truth_mask(trace, f.arg, memo))
    elif isinstance(f, Always):
        m = always_mask(truth_mask(trace, f.arg, memo), full)
    else:
        a = truth_mask(trace, f.left, memo)
        b = truth_mask(trace, f.right, memo)
        if isinstance(f, And):
            m = a & b
        elif isinstance(f, Or):
            m = a | b
        elif isinstance(f, Implies):
            m = (~a | b) & full
        elif isinstance(f, Iff):
            m = ~(a ^ b) & full
        elif isinstance(f, Until):
            m = until_mask(a, b, n)
        else:
            raise TypeError(f)
    memo[f] = m
    return m


def evaluate(trace: Trace, position: int, f: Formula) -> bool:
    if not 0 <= position < len(trace):
        raise ValueError(f"position {position} outside trace of length {len(trace)}")
    return bool(truth_mask(trace, f) >> position & 1)


def satisfies(trace: Trace, f: Formula) -> bool:
    return evaluate(trace, 0, f)


def evaluate_reference(trace: Trace, i: int, f: Formula) -> bool:
    """Direct transcription of the recursive satisfaction relation (no memo)."""
    n = len(trace)
    if isinstance(f, Atom):
        if f.term == END:
            return i == n - 1
        return f.term in trace.steps[i]
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Not):
        return not evaluate_reference(trace, i, f.arg)
    if isinstance(f, And):
        return evaluate_reference(trace, i, f.left) and evaluate_reference(trace, i, f.right)
    if isinstance(f, Next):
        return i + 1 < n and evaluate_reference(trace, i + 1, f.arg)
    if isinstance(f, Until):
        for j in range(i, n):
            if evaluate_reference(trace, j, f.right):
                return True
            if not evaluate_reference(trace, j, f.left):
                return False
        return False
    return evaluate_reference(trace, i, expand(f))


# -- well-formedness ----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    constraint: int
    position: int
    variable: str | None
    detail: str = ""


def check_well_formed(trace: Trace, signature: Signature | Sequence[str]) -> list[Violation]:
    """Report every breach of the three well-formedness constraints."""
    names = signature.names if isinstance(signature, Signature) else list(signature)
    n = len(trace)
    out: list[Violation] = []
    for i, step in enumerate(trace.steps):
        updates = [t for t in step if isinstance(t, UpdateTerm)]
        if i < n - 1:
            for v in names:
                count = sum(1 for u in updates if u.target == v)
                if count != 1:
                    what = "no update" if count == 0 else f"{count} updates"
                    out.append(Violation(1, i, v, what))
            for u in updates:
                if u.target not in names:
                    out.append(Violation(1, i, u.target, "update of unknown variable"))
        else:
            for u in sorted(updates, key=repr):
                out.append(Violation(2, i, u.target, "update at final position"))
        has_end = END in step
        if has_end != (i == n - 1):
            out.append(Violation(3, i, None, "END misplaced" if has_end else "END missing"))
    return out
