"""Enumerative synthesis of linear integer functions from input/output examples.

Terms are built bottom-up by size with observational-equivalence pruning keyed
on the output vector over the example inputs.
"""
from __future__ import annotations

import itertools
import re
import time
from fractions import Fraction
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence


class Term:
    """Base class for function terms over numbered input slots."""

    __slots__ = ()

    @property
    def size(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class Slot(Term):
    index: int

    @property
    def size(self):
        return 1


@dataclass(frozen=True)
class Const(Term):
    value: int

    @property
    def size(self):
        return 1


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term

    @property
    def size(self):
        return 1 + self.left.size + self.right.size


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term

    @property
    def size(self):
        return 1 + self.left.size + self.right.size


@dataclass(frozen=True)
class Neg(Term):
    arg: Term

    @property
    def size(self):
        return 1 + self.arg.size


def eval_term(term: Term, inputs: Sequence[int]) -> int:
    """Evaluate ``term`` on ``inputs``. Python ints never overflow."""
    if isinstance(term, Slot):
        if not 0 <= term.index < len(inputs):
            raise ValueError(f"slot x{term.index} out of range for {len(inputs)} inputs")
        return inputs[term.index]
    if isinstance(term, Const):
        return term.value
    if isinstance(term, Add):
        return eval_term(term.left, inputs) + eval_term(term.right, inputs)
    if isinstance(term, Sub):
        return eval_term(term.left, inputs) - eval_term(term.right, inputs)
    if isinstance(term, Neg):
        return -eval_term(term.arg, inputs)
    raise TypeError(f"not a term: {term!r}")


def linear_form(term: Term, arity: int) -> tuple[tuple[int, ...], int]:
    """Return ``(coefficients, constant)`` such that term = sum(c_k * x_k) + constant."""
    if isinstance(term, Slot):
        coeffs = [0] * arity
        coeffs[term.index] = 1
        return tuple(coeffs), 0
    if isinstance(term, Const):
        return (0,) * arity, term.value
    if isinstance(term, Neg):
        c, b = linear_form(term.arg, arity)
        return tuple(-v for v in c), -b
    lc, lb = linear_form(term.left, arity)
    rc, rb = linear_form(term.right, arity)
    if isinstance(term, Add):
        return tuple(a + b for a, b in zip(lc, rc)), lb + rb
    if isinstance(term, Sub):
        return tuple(a - b for a, b in zip(lc, rc)), lb - rb
    raise TypeError(f"not a term: {term!r}")


def term_arity(term: Term) -> int:
    """Smallest arity that covers every slot used by ``term`` (at least 1)."""
    if isinstance(term, Slot):
        return term.index + 1
    if isinstance(term, Const):
        return 1
    if isinstance(term, Neg):
        return term_arity(term.arg)
    return max(term_arity(term.left), term_arity(term.right))


def format_term(term: Term, names: Sequence[str] | None = None) -> str:
    if isinstance(term, Slot):
        return names[term.index] if names else f"x{term.index}"
    if isinstance(term, Const):
        return str(term.value)
    if isinstance(term, Neg):
        # "-(3)" keeps negation apart from the literal -3
        return f"-({format_term(term.arg, names)})"
    op = "+" if isinstance(term, Add) else "-"
    return f"({format_term(term.left, names)} {op} {format_term(term.right, names)})"


_TERM_TOKEN = re.compile(r"\s*(?:(\d+)|x(\d+)|([()+\-]))")


def parse_term(text: str) -> Term:
    """Parse the infix syntax produced by :func:`format_term` (slots ``x0``, ``x1``...)."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad term syntax at {pos}: {text!r}")
        pos = m.end()
        if m.group(1):
            tokens.append(("num", int(m.group(1))))
        elif m.group(2):
            tokens.append(("slot", int(m.group(2))))
        else:
            tokens.append(("op", m.group(3)))
    i = 0

    def atom():
        nonlocal i
        kind, val = tokens[i]
        i += 1
        if kind == "num":
            return Const(val)
        if kind == "slot":
            return Slot(val)
        if val == "-":
            if i < len(tokens) and tokens[i][0] == "num":
                i += 1
                return Const(-tokens[i - 1][1])
            if tokens[i] != ("op", "("):
                raise ValueError(f"expected '(' after unary minus in {text!r}")
            i += 1
            arg = atom()
            if tokens[i] != ("op", ")"):
                raise ValueError(f"expected ')' in {text!r}")
            i += 1
            return Neg(arg)
        if val == "(":
            left = atom()
            kind2, op = tokens[i]
            i += 1
            right = atom()
            if tokens[i] != ("op", ")"):
                raise ValueError(f"expected ')' in {text!r}")
            i += 1
            return Add(left, right) if op == "+" else Sub(left, right)
        raise ValueError(f"unexpected {val!r} in {text!r}")

    term = atom()
    if i != len(tokens):
        raise ValueError(f"trailing input in {text!r}")
    return term


@dataclass(frozen=True)
class Grammar:
    arity: int
    constants: tuple[int, ...] = (-2, -1, 0, 1, 2)
    max_term_size: int = 7
    budget_ms: float = 100.0

    def __post_init__(self):
        if self.arity < 1 or self.max_term_size < 1:
            raise ValueError("grammar needs arity >= 1 and max_term_size >= 1")


Constraint = tuple[tuple[int, ...], int]

BASE_CONSTANTS = (-2, -1, 0, 1, 2)
CONSTANT_CAP = 16


def default_grammar(constraints: Iterable[Constraint], **kw) -> Grammar:
    """Base constants plus every observed output-minus-input difference with |c| <= 16."""
    constraints = list(constraints)
    arity = len(constraints[0][0])
    pool = set(BASE_CONSTANTS)
    for inputs, out in constraints:
        for v in inputs:
            d = out - v
            if abs(d) <= CONSTANT_CAP:
                pool.add(d)
    return Grammar(arity=arity, constants=tuple(sorted(pool)), **kw)


def _normalize(constraints) -> tuple[Constraint, ...] | None:
    table: dict[tuple[int, ...], int] = {}
    for inputs, out in constraints:
        inputs = tuple(int(v) for v in inputs)
        if table.setdefault(inputs, int(out)) != int(out):
            return None
    return tuple(sorted(table.items()))


def synthesize(constraints: Iterable[Constraint], grammar: Grammar | None = None) -> Term | None:
    """Return a term consistent with every ``(inputs, output)`` constraint, or None.

    Terms whose value depends on some input are preferred: an input-independent
    solution (a bare constant such as ``(x - x) + 2``) is only returned when no
    input-dependent term within the size bound fits. Among preferred solutions
    the first in enumeration order wins.
    """
    constraints = list(constraints)
    if not constraints:
        raise ValueError("synthesize needs at least one constraint")
    arities = {len(inp) for inp, _ in constraints}
    if len(arities) != 1:
        raise ValueError(f"constraints mix input arities {sorted(arities)}")
    norm = _normalize(constraints)
    if norm is None:
        return None
    if grammar is None:
        grammar = default_grammar(norm)
    if grammar.arity != len(norm[0][0]):
        raise ValueError("grammar arity does not match constraints")
    return _synthesize_cached(norm, grammar)


@lru_cache(maxsize=200_000)
def _synthesize_cached(norm: tuple[Constraint, ...], grammar: Grammar) -> Term | None:
    if not linear_fit_possible(norm, grammar.arity):
        return None
    return _Enumerator(norm, grammar).run()


def linear_fit_possible(constraints: Sequence[Constraint], arity: int) -> bool:
    """False when no integer-coefficient affine function fits the constraints.

    Every grammar term denotes such a function, so a False answer proves that
    enumeration would fail; True says nothing about the size bound.
    """
    rows = [[Fraction(v) for v in inp] + [Fraction(1), Fraction(out)] for inp, out in constraints]
    ncols = arity + 1
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(rows)) if rows[k][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][c] != 0:
                fac = rows[k][c]
                rows[k] = [a - fac * b for a, b in zip(rows[k], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    for row in rows[r:]:
        if row[-1] != 0:
            return False
    if len(pivots) == ncols:
        return all(rows[k][-1].denominator == 1 for k in range(ncols))
    return True


class _Enumerator:
    # bank entries: (term, output vector, coefficient tuple)
    def __init__(self, norm, grammar: Grammar):
        self.inputs = [inp for inp, _ in norm]
        self.target = tuple(out for _, out in norm)
        self.grammar = grammar
        self.bank: dict[int, list] = {}
        self.seen: set = set()
        self.fallback: Term | None = None
        self.deadline = time.perf_counter() + grammar.budget_ms / 1000.0

    def _offer(self, term, vec, coeffs, out):
        dependent = any(coeffs)
        key = (vec, dependent)
        if key in self.seen:
            return None
        self.seen.add(key)
        out.append((term, vec, coeffs))
        if vec == self.target:
            if dependent:
                return term
            if self.fallback is None:
                self.fallback = term
        return None

    def run(self) -> Term | None:
        g = self.grammar
        n = len(self.inputs)
        level: list = []
        for c in g.constants:
            hit = self._offer(Const(c), (c,) * n, (0,) * g.arity, level)
            if hit is not None:
                return hit
        for k in range(g.arity):
            coeffs = tuple(1 if j == k else 0 for j in range(g.arity))
            vec = tuple(inp[k] for inp in self.inputs)
            hit = self._offer(Slot(k), vec, coeffs, level)
            if hit is not None:
                return hit
        self.bank[1] = level
        checked = 0
        for size in range(2, g.max_term_size + 1):
            level = []
            self.bank[size] = level
            for ctor, combine in ((Add, _add), (Sub, _sub)):
                for lsize in range(1, size - 1):
                    rsize = size - 1 - lsize
                    for (lt, lv, lc), (rt, rv, rc) in itertools.product(
                        self.bank.get(lsize, ()), self.bank.get(rsize, ())
                    ):
                        vec = combine(lv, rv)
                        coeffs = combine(lc, rc)
                        hit = self._offer(ctor(lt, rt), vec, coeffs, level)
                        if hit is not None:
                            return hit
                        checked += 1
                        if checked % 2048 == 0 and time.perf_counter() > self.deadline:
                            return self.fallback
            for t, v, c in self.bank.get(size - 1, ()):
                hit = self._offer(Neg(t), tuple(-x for x in v), tuple(-x for x in c), level)
                if hit is not None:
                    return hit
            if time.perf_counter() > self.deadline:
                return self.fallback
        return self.fallback


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def equivalent_on_samples(t1: Term, t2: Term, samples: Iterable[Sequence[int]]) -> bool:
    return all(eval_term(t1, s) == eval_term(t2, s) for s in samples)


# -- canonical function identities -------------------------------------------


def _signed(n: int) -> str:
    return f"m{-n}" if n < 0 else str(n)


def function_name(term: Term, arity: int) -> str:
    """Canonical name derived from the linear form, e.g. ``id``, ``add1``, ``mul2add1``."""
    coeffs, b = linear_form(term, arity)
    offset = f"add{b}" if b > 0 else f"sub{-b}" if b < 0 else ""
    if arity == 1:
        (a,) = coeffs
        if a == 1:
            return offset or "id"
        if a == 0:
            return f"const{_signed(b)}"
        return f"mul{_signed(a)}{offset}"
    return "lin" + "_".join(_signed(a) for a in coeffs) + (f"_{offset}" if offset else "")


_NAME_RE = re.compile(
    r"^(?:(?P<id>id)|(?P<const>const(?P<cv>m?\d+))|"
    r"(?:mul(?P<mul>m?\d+))?(?:add(?P<add>\d+)|sub(?P<sub>\d+))?|"
    r"lin(?P<lin>m?\d+(?:_m?\d+)*)(?:_(?:add(?P<ladd>\d+)|sub(?P<lsub>\d+)))?)$"
)


def _unsigned(s: str) -> int:
    return -int(s[1:]) if s.startswith("m") else int(s)


def term_from_linear(coeffs: Sequence[int], b: int) -> Term:
    """Build a small term with the given linear form (used for name round trips)."""
    parts: list[Term] = []
    for k, a in enumerate(coeffs):
        for _ in range(abs(a)):
            parts.append(Slot(k) if a > 0 else Neg(Slot(k)))
    term: Term | None = None
    for p in parts:
        term = p if term is None else Add(term, p)
    if term is None:
        return Const(b)
    if b > 0:
        term = Add(term, Const(b))
    elif b < 0:
        term = Sub(term, Const(-b))
    return term


def term_from_name(name: str) -> tuple[Term, int] | None:
    """Inverse of :func:`function_name`; returns ``(term, arity)`` or None."""
    m = _NAME_RE.match(name)
    if not m or not name:
        return None
    if m.group("id"):
        return Slot(0), 1
    if m.group("const"):
        return Const(_unsigned(m.group("cv"))), 1
    if m.group("lin"):
        coeffs = [_unsigned(p) for p in m.group("lin").split("_")]
        b = int(m.group("ladd") or 0) - int(m.group("lsub") or 0)
        return term_from_linear(coeffs, b), len(coeffs)
    a = _unsigned(m.group("mul")) if m.group("mul") else 1
    b = int(m.group("add") or 0) - int(m.group("sub") or 0)
    if a == 1 and b == 0:
        return None
    return term_from_linear([a], b), 1


@dataclass(frozen=True, eq=False)
class Function:
    """A named function term. Identity is the linear normal form, not the name."""

    name: str
    term: Term
    arity: int = field(default=1)

    @property
    def key(self):
        return (self.arity,) + linear_form(self.term, self.arity)

    def __eq__(self, other):
        return isinstance(other, Function) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __call__(self, *inputs: int) -> int:
        return eval_term(self.term, inputs)

    @property
    def is_identity(self) -> bool:
        return self.key == (1, (1,), 0)

    @classmethod
    def from_term(cls, term: Term, arity: int | None = None) -> "Function":
        arity = arity or term_arity(term)
        return cls(function_name(term, arity), term, arity)

    @classmethod
    def from_name(cls, name: str) -> "Function | None":
        got = term_from_name(name)
        if got is None:
            return None
        term, arity = got
        return cls(name, term, arity)

    def __repr__(self):
        return f"Function({self.name}: {format_term(self.term)})"


IDENTITY = Function("id", Slot(0), 1)
