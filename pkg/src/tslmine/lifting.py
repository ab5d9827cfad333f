"""Lifting raw logs to well-formed TSL_f traces.

Every (function, inputs) pair is scored by how many transitions of the whole
corpus it explains. Pairs that read the updated variable itself rank ahead of
the rest. At each step every variable gets the best-ranked pair that explains
its next value, plus all predicate atoms that hold.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .logic import (
    BOOL,
    BOOL_SYMBOL,
    END,
    INT,
    PredicateAtom,
    Signature,
    StreamVariable,
    Trace,
    UpdateTerm,
    identity_update,
)
from .synth import IDENTITY, Const, Function


class LiftingError(ValueError):
    def __init__(self, log_id: int, variable: str, timestep: int, detail: str = ""):
        msg = f"log {log_id}: no ranked update explains {variable} at step {timestep}"
        super().__init__(msg + (f" ({detail})" if detail else ""))
        self.log_id, self.variable, self.timestep = log_id, variable, timestep


@dataclass
class LiftingConfig:
    # Boolean variables; None means "infer from the JSON value types"
    bools: frozenset | None = None
    # variables compared with lte/gte on top of eq/lt
    ordered_constants: tuple[str, ...] = ()
    # rank-exempt variables; None means "every variable that never changes within a log"
    constants: frozenset | None = None
    k_max: int = 2
    bit_width: int | None = None


def infer_bools(logs) -> frozenset:
    names = set()
    for log_ in logs:
        for row in log_:
            names.update(k for k, v in row.items() if isinstance(v, bool))
    return frozenset(names)


def infer_constants(logs, variables) -> frozenset:
    out = set(variables)
    for log_ in logs:
        for prev, cur in zip(log_, log_[1:]):
            out -= {v for v in variables if prev[v] != cur[v]}
    return frozenset(out)


def signature_for(logs, variables, functions=(), config: LiftingConfig | None = None) -> Signature:
    config = config or LiftingConfig()
    bools = config.bools if config.bools is not None else infer_bools(logs)
    return Signature(
        tuple(StreamVariable(v, BOOL if v in bools else INT) for v in variables),
        tuple(functions),
    )


# -- rankings -----------------------------------------------------------------


@dataclass
class RankTable:
    # variable -> [(function, inputs, count)] best first
    entries: dict[str, list[tuple[Function, tuple[str, ...], int]]] = field(default_factory=dict)
    exempt: frozenset = frozenset()

    def best(self, variable: str):
        return self.entries[variable][0] if self.entries.get(variable) else None

    def order(self, variable: str) -> list[tuple[Function, tuple[str, ...]]]:
        return [(f, w) for f, w, _ in self.entries.get(variable, [])]

    def count(self, variable: str, function: Function, inputs) -> int:
        for f, w, c in self.entries.get(variable, []):
            if f == function and w == tuple(inputs):
                return c
        return 0


def _input_rank(variables: Sequence[str], target: str, inputs: tuple[str, ...]) -> tuple:
    # self-input first, then signature order
    pos = {v: i for i, v in enumerate(variables)}
    return (inputs != (target,), tuple(pos[w] for w in inputs))


def _as_int(v) -> int:
    return int(v)


def compute_rankings(logs, variables: Sequence[str], functions: Sequence[Function],
                     exempt=frozenset()) -> RankTable:
    """Count, per variable, the transitions each (function, inputs) pair explains."""
    variables = list(variables)
    table = RankTable(exempt=frozenset(exempt))
    arities = sorted({f.arity for f in functions})
    tuples = {a: list(itertools.product(variables, repeat=a)) for a in arities}
    for v in variables:
        if v in table.exempt:
            table.entries[v] = [(IDENTITY, (v,), sum(max(len(l) - 1, 0) for l in logs))]
            continue
        scored = []
        for f in functions:
            for w in tuples[f.arity]:
                count = 0
                for log_ in logs:
                    for t in range(len(log_) - 1):
                        args = [_as_int(log_[t][x]) for x in w]
                        if f(*args) == _as_int(log_[t + 1][v]):
                            count += 1
                if count:
                    scored.append((f, w, count))
        # pairs reading the target itself come first; others only fill gaps
        scored.sort(key=lambda e: (v not in e[1], -e[2], e[0].arity, e[0].term.size,
                                   _input_rank(variables, v, e[1])))
        table.entries[v] = scored
    return table


# -- predicates -----------------------------------------------------------------


def apply_predicates(valuation, signature: Signature, ordered_constants=()) -> set:
    """All true sort-derived predicate atoms of one valuation."""
    out = set()
    ordered = set(ordered_constants)
    ints = [v.name for v in signature.variables if v.sort == INT]
    bools = [v.name for v in signature.variables if v.sort == BOOL]
    for a, b in itertools.combinations(ints, 2):
        va, vb = valuation[a], valuation[b]
        if va == vb:
            out.add(PredicateAtom("eq", (a, b)))
        if va < vb:
            out.add(PredicateAtom("lt", (a, b)))
        if vb < va:
            out.add(PredicateAtom("lt", (b, a)))
        if a in ordered or b in ordered:
            # orient so that the designated constant is on the right when possible
            x, y = (b, a) if (a in ordered and b not in ordered) else (a, b)
            if valuation[x] <= valuation[y]:
                out.add(PredicateAtom("lte", (x, y)))
            if valuation[x] >= valuation[y]:
                out.add(PredicateAtom("gte", (x, y)))
    for a, b in itertools.combinations(bools, 2):
        if bool(valuation[a]) == bool(valuation[b]):
            out.add(PredicateAtom("eq", (a, b)))
    for a in bools:
        if valuation[a]:
            out.add(PredicateAtom(BOOL_SYMBOL, (a,)))
    return out


# -- traces ---------------------------------------------------------------------


def construct_traces(logs, signature: Signature, rank: RankTable,
                     ordered_constants=(), log_ids=None, fallback: bool = False) -> list[Trace]:
    """One well-formed trace per log, choosing the best-ranked valid update per variable.

    With ``fallback`` a transition no ranked pair explains becomes a constant
    update ``[v <- k]`` instead of an error (for monitoring unseen logs).
    """
    variables = signature.names
    traces = []
    for idx, log_ in enumerate(logs):
        log_id = log_ids[idx] if log_ids is not None else idx
        if not log_:
            raise LiftingError(log_id, "-", 0, "empty log")
        steps = []
        n = len(log_)
        for t in range(n):
            terms = apply_predicates(log_[t], signature, ordered_constants)
            if t == n - 1:
                terms.add(END)
            else:
                for v in variables:
                    terms.add(_choose(rank, log_, t, v, log_id, fallback))
            steps.append(frozenset(terms))
        traces.append(Trace(tuple(steps), {"log_id": log_id}))
    return traces


def _choose(rank: RankTable, log_, t: int, v: str, log_id: int, fallback: bool = False) -> UpdateTerm:
    target = _as_int(log_[t + 1][v])
    if v in rank.exempt:
        if _as_int(log_[t][v]) != target:
            raise LiftingError(log_id, v, t, "rank-exempt variable changed")
        return identity_update(v)
    for f, w in rank.order(v):
        if f(*(_as_int(log_[t][x]) for x in w)) == target:
            return UpdateTerm(v, f, w)
    if fallback and v not in rank.exempt:
        return UpdateTerm(v, Function.from_term(Const(target), 1), (v,))
    raise LiftingError(log_id, v, t)


def replay(trace: Trace, initial: dict, signature: Signature) -> list[dict]:
    """Rebuild the valuation sequence from the first valuation and the trace's updates."""
    rows = [dict(initial)]
    for step in trace.steps[:-1]:
        prev = rows[-1]
        cur = {}
        for term in step:
            if isinstance(term, UpdateTerm):
                cur[term.target] = term.apply(prev)
        for v in signature.variables:
            if v.name not in cur:
                raise ValueError(f"no update for {v.name}")
            if v.sort == BOOL:
                cur[v.name] = bool(cur[v.name])
        rows.append(cur)
    return rows


def faithful(trace: Trace, log_, signature: Signature) -> bool:
    """Replay reproduces the raw log exactly (types included)."""
    rows = replay(trace, log_[0], signature)
    if len(rows) != len(log_):
        return False
    for got, want in zip(rows, log_):
        for v in signature.names:
            if got[v] != want[v] or type(got[v]) is not type(want[v]):
                return False
    return True


@dataclass
class Lifted:
    signature: Signature
    rank: RankTable
    positives: list[Trace]
    negatives: list[Trace]


def lift_corpus(positives, negatives, variables, functions,
                config: LiftingConfig | None = None) -> Lifted:
    config = config or LiftingConfig()
    logs = list(positives) + list(negatives)
    sig = signature_for(logs, variables, functions, config)
    exempt = config.constants if config.constants is not None else infer_constants(logs, variables)
    rank = compute_rankings(logs, variables, functions, exempt)
    pos = construct_traces(positives, sig, rank, config.ordered_constants)
    neg = construct_traces(negatives, sig, rank, config.ordered_constants,
                           log_ids=list(range(len(positives), len(logs))))
    return Lifted(sig, rank, pos, neg)


# -- bit-blasting baseline -----------------------------------------------------


def bit_width(logs, variables=None) -> int:
    top = 0
    for log_ in logs:
        for row in log_:
            for k, v in row.items():
                if variables is not None and k not in variables:
                    continue
                if not isinstance(v, bool):
                    top = max(top, int(v))
    return max(top.bit_length(), 1)


def bit_blast(logs, width: int | None = None, variables=None) -> list[Trace]:
    """Propositional traces: atom ``<var>_b<k>`` holds when bit k of var is set."""
    width = width if width is not None else bit_width(logs, variables)
    traces = []
    for log_ in logs:
        steps = []
        for t, row in enumerate(log_):
            atoms = set()
            for k, v in row.items():
                if variables is not None and k not in variables:
                    continue
                if isinstance(v, bool):
                    if v:
                        atoms.add(PredicateAtom(BOOL_SYMBOL, (k,)))
                    continue
                v = int(v)
                if v < 0 or v >= 1 << width:
                    raise ValueError(f"{k}={v} does not fit in {width} unsigned bits")
                for b in range(width):
                    if v >> b & 1:
                        atoms.add(PredicateAtom(BOOL_SYMBOL, (f"{k}_b{b}",)))
            if t == len(log_) - 1:
                atoms.add(END)
            steps.append(frozenset(atoms))
        traces.append(Trace(tuple(steps)))
    return traces
