"""Text format for formulas.

Predicates are prefix (``eq x goalx``), connectives infix (``&&``, ``||``, ``->``,
``<->``), ``!``/``X``/``F``/``G`` prefix, ``U`` infix, updates in brackets
(``[x <- add1 x]``, ``[x <- x]`` for identity). The formatter parenthesises
every binary node so that parsing its output gives back the same tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .logic import (
    BOOL,
    BOOL_SYMBOL,
    END,
    PREDICATES,
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    PredicateAtom,
    Signature,
    Truth,
    UpdateTerm,
    Until,
)
from .synth import IDENTITY, Function


class FormulaSyntaxError(ValueError):
    def __init__(self, msg: str, position: int):
        super().__init__(f"{msg} (at offset {position})")
        self.position = position


# -- formatting ---------------------------------------------------------------


def format_term(term) -> str:
    if isinstance(term, UpdateTerm):
        if term.function.is_identity:
            return f"[{term.target} <- {term.inputs[0]}]"
        return f"[{term.target} <- {term.function.name} {' '.join(term.inputs)}]"
    if term == END:
        return "END"
    if term.symbol == BOOL_SYMBOL:
        return term.args[0]
    return f"({term.symbol} {' '.join(term.args)})"


_BIN_OPS = {And: "&&", Or: "||", Implies: "->", Iff: "<->", Until: "U"}
_UN_OPS = {Not: "!", Next: "X ", Eventually: "F ", Always: "G "}


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return format_term(f.term)
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    for cls, op in _UN_OPS.items():
        if type(f) is cls:
            return op + format_formula(f.arg)
    for cls, op in _BIN_OPS.items():
        if type(f) is cls:
            return f"({format_formula(f.left)} {op} {format_formula(f.right)})"
    raise TypeError(f)


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|<-|&&|\|\||[!()\[\]])|(?P<word>[A-Za-z_][A-Za-z0-9_.]*))"
)
_KEYWORDS = {"X", "F", "G", "U", "true", "false", "END"}


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = "op" if m.group("op") else "word"
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, signature: Signature | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = signature

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text: str | None = None) -> _Tok:
        tok = self.toks[self.i]
        if text is not None and tok.text != text:
            raise FormulaSyntaxError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)
        self.i += 1
        return tok

    def var(self) -> str:
        tok = self.take()
        if tok.kind != "word" or tok.text in _KEYWORDS or tok.text in PREDICATES:
            raise FormulaSyntaxError(f"expected a variable, found {tok.text!r}", tok.pos)
        if self.sig is not None and tok.text not in self.sig.names:
            raise FormulaSyntaxError(f"unknown variable {tok.text!r}", tok.pos)
        return tok.text

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek().kind != "eof":
            tok = self.peek()
            raise FormulaSyntaxError(f"trailing input {tok.text!r}", tok.pos)
        return f

    def iff(self):
        left = self.implies()
        while self.peek().text == "<->":
            self.take()
            left = Iff(left, self.implies())
        return left

    def implies(self):
        left = self.disj()
        if self.peek().text == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disj(self):
        left = self.conj()
        while self.peek().text == "||":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.until()
        while self.peek().text == "&&":
            self.take()
            left = And(left, self.until())
        return left

    def until(self):
        left = self.unary()
        if self.peek().text == "U":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self):
        tok = self.peek()
        if tok.text == "!":
            self.take()
            return Not(self.unary())
        if tok.kind == "word" and tok.text in ("X", "F", "G"):
            self.take()
            ctor = {"X": Next, "F": Eventually, "G": Always}[tok.text]
            return ctor(self.unary())
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok.text == "(":
            self.take()
            f = self.iff()
            self.take(")")
            return f
        if tok.text == "[":
            return self.update()
        if tok.kind != "word":
            raise FormulaSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)
        if tok.text == "true":
            self.take()
            return Truth(True)
        if tok.text == "false":
            self.take()
            return Truth(False)
        if tok.text == "END":
            self.take()
            return Atom(END)
        if tok.text in PREDICATES:
            return self.predicate()
        name = self.var()
        if self.sig is not None and self.sig.sort_of(name) != BOOL:
            raise FormulaSyntaxError(f"{name!r} is not Boolean and cannot be an atom", tok.pos)
        return Atom(PredicateAtom(BOOL_SYMBOL, (name,)))

    def predicate(self):
        sym = self.take().text
        args = tuple(self.var() for _ in range(PREDICATES[sym]))
        return Atom(PredicateAtom(sym, args))

    def update(self):
        self.take("[")
        target = self.var()
        self.take("<-")
        tok = self.take()
        if tok.kind != "word":
            raise FormulaSyntaxError("expected a function or variable", tok.pos)
        if self.peek().text == "]":
            self.i -= 1
            src = self.var()
            self.take("]")
            return Atom(UpdateTerm(target, IDENTITY, (src,)))
        fn = self.sig.function(tok.text) if self.sig is not None else None
        if fn is None:
            fn = Function.from_name(tok.text)
        if fn is None:
            raise FormulaSyntaxError(f"unknown function {tok.text!r}", tok.pos)
        args = []
        while self.peek().text != "]":
            args.append(self.var())
        self.take("]")
        if len(args) != fn.arity:
            raise FormulaSyntaxError(f"{fn.name} expects {fn.arity} inputs", tok.pos)
        return Atom(UpdateTerm(target, fn, tuple(args)))


def parse_formula(text: str, signature: Signature | None = None) -> Formula:
    """Parse formula text. With a signature, variable and function names are checked."""
    return _Parser(text, signature).parse()


def normalize_text(text: str) -> str:
    return format_formula(parse_formula(text))
