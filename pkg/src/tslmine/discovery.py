"""Function discovery: a compact function set that explains every variable transition.

Each transition ``(v, t)`` of a log is first explained on its own, with ``v`` at
``t - 1`` as the input. Transitions sharing a function are grouped, then small
groups are greedily folded into larger ones whenever one function can explain
both; failed folds retry with alternative input variables for the small group's
members.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .synth import Function, Grammar, Term, default_grammar, synthesize

log = logging.getLogger(__name__)

Log = Sequence[Mapping[str, int]]


@dataclass(frozen=True, order=True)
class TransitionKey:
    log_id: int
    variable: str
    timestep: int

    def __post_init__(self):
        if self.timestep < 1:
            raise ValueError("a transition needs a predecessor state")


@dataclass(frozen=True)
class Record:
    inputs: tuple[str, ...]
    values: tuple[int, ...]
    output: int

    @property
    def constraint(self):
        return self.values, self.output


@dataclass
class DiscoveryParams:
    k_max: int = 2
    budget_ms: float = 100.0
    max_term_size: int = 7
    max_functions: int | None = None


def input_tuples(variables: Sequence[str], target: str, k_max: int) -> list[tuple[str, ...]]:
    """Candidate input tuples: arity ascending, lexicographic, self-singleton first."""
    out = [(target,)]
    for arity in range(1, k_max + 1):
        for combo in itertools.product(variables, repeat=arity):
            if combo != (target,):
                out.append(combo)
    return out


def extract_transitions(log_: Log, variables: Sequence[str], k_max: int = 2, log_id: int = 0):
    """Transitions of one log with their alternative input records.

    Returns ``(keys, alternatives, records)`` where ``records`` holds the
    default (first) alternative of every key.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    keys: list[TransitionKey] = []
    alts: dict[TransitionKey, list[Record]] = {}
    for t in range(1, len(log_)):
        prev, cur = log_[t - 1], log_[t]
        for v in variables:
            key = TransitionKey(log_id, v, t)
            keys.append(key)
            alts[key] = [
                Record(w, tuple(int(prev[x]) for x in w), int(cur[v]))
                for w in input_tuples(variables, v, k_max)
            ]
    records = {k: alts[k][0] for k in keys}
    return keys, alts, records


@dataclass
class Group:
    members: list[TransitionKey]
    witness: Term | None = None

    def __len__(self):
        return len(self.members)


class _Solver:
    def __init__(self, params: DiscoveryParams):
        self.params = params
        self.calls = 0

    def __call__(self, records: Sequence[Record]) -> Term | None:
        arities = {len(r.values) for r in records}
        if len(arities) != 1:
            return None
        self.calls += 1
        cons = [r.constraint for r in records]
        g = default_grammar(cons, max_term_size=self.params.max_term_size,
                            budget_ms=self.params.budget_ms)
        return synthesize(cons, g)


def _fold_targets(gi: Group, groups: list[Group], i: int) -> list[int]:
    targets = [
        j for j, gj in enumerate(groups)
        if j != i and gj.members and len(gj) >= len(gi)
    ]
    # larger groups first, then lowest index
    targets.sort(key=lambda j: (-len(groups[j]), j))
    return targets


def _fold(gi: Group, gj: Group, term: Term) -> None:
    gj.members.extend(gi.members)
    gj.witness = term
    gi.members = []


def _try_fold(gi: Group, groups: list[Group], i: int, rec, solve) -> bool:
    for j in _fold_targets(gi, groups, i):
        gj = groups[j]
        term = solve([rec[k] for k in gi.members + gj.members])
        if term is not None:
            _fold(gi, gj, term)
            return True
    return False


def _try_swaps(gi: Group, groups: list[Group], i: int, rec, alts, solve) -> bool:
    """Swap one member's inputs at a time and retry the fold."""
    targets = _fold_targets(gi, groups, i)
    for key in list(gi.members):
        rest = [rec[k] for k in gi.members if k != key]
        # a single swap cannot help unless everything else already fits
        viable = [
            j for j in targets
            if not rest or solve(rest + [rec[k] for k in groups[j].members]) is not None
        ]
        if not viable:
            continue
        original = rec[key]
        for r in alts[key]:
            if r == original:
                continue
            for j in viable:
                gj = groups[j]
                term = solve(rest + [r] + [rec[k] for k in gj.members])
                if term is not None:
                    rec[key] = r
                    _fold(gi, gj, term)
                    return True
    return False


def _try_split(gi: Group, groups: list[Group], i: int, rec, solve) -> bool:
    """Move single members of ``gi`` into larger groups that can absorb them.

    Undoes merges that only held within one log, e.g. ``1 - x`` explaining a
    log whose only moves were ``0 -> 1`` and ``1 -> 0``.
    """
    targets = _fold_targets(gi, groups, i)
    moved = False
    for key in list(gi.members):
        for j in targets:
            gj = groups[j]
            term = solve([rec[k] for k in gj.members] + [rec[key]])
            if term is not None:
                gi.members.remove(key)
                gj.members.append(key)
                gj.witness = term
                moved = True
                break
    return moved


def bottom_up_merge(groups: list[Group], rec: dict, alts: dict, solve=None,
                    params: DiscoveryParams | None = None, split: bool = False) -> list[Group]:
    """Greedily fold smaller groups into larger ones until a pass makes no merge.

    ``rec`` is updated in place with any input swaps that enabled a merge.
    With ``split`` a group that cannot move as a whole may give up members one
    at a time; the sum of squared group sizes grows with every move, so the
    loop still terminates.
    """
    params = params or DiscoveryParams()
    solve = solve or _Solver(params)
    groups = [g for g in groups if g.members]
    while True:
        groups.sort(key=len)
        merged = False
        for i, gi in enumerate(groups):
            if (_try_fold(gi, groups, i, rec, solve)
                    or _try_swaps(gi, groups, i, rec, alts, solve)
                    or (split and _try_split(gi, groups, i, rec, solve))):
                merged = True
                break
        groups = [g for g in groups if g.members]
        if not merged:
            return groups


@dataclass
class DiscoveryResult:
    functions: list[Function]
    success: bool
    groups: list[Group]
    records: dict
    unexplained: list[TransitionKey] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def member_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.groups:
            f = _as_function(g, self.records)
            counts[f.name] = counts.get(f.name, 0) + len(g)
        return counts

    def report(self) -> dict:
        from .synth import format_term

        return {
            "functions": [
                {"name": f.name, "arity": f.arity, "term": format_term(f.term)}
                for f in self.functions
            ],
            "member_counts": self.member_counts(),
            "success": self.success,
            "unexplained": [
                {"log": k.log_id, "variable": k.variable, "timestep": k.timestep}
                for k in self.unexplained
            ],
            "timings": self.timings,
            "notes": self.notes,
        }


def _as_function(g: Group, rec) -> Function:
    arity = len(rec[g.members[0]].values)
    return Function.from_term(g.witness, arity)


def _group_by_function(keys, rec, fns: dict) -> list[Group]:
    buckets: dict[Function, Group] = {}
    for k in keys:
        f = fns[k]
        g = buckets.setdefault(f, Group([], f.term))
        g.members.append(k)
    return list(buckets.values())


def synthesize_covering_functions(logs: Sequence[Log], variables: Sequence[str],
                                  params: DiscoveryParams | None = None) -> DiscoveryResult:
    """Discover functions for every log, then fold the per-log results together."""
    params = params or DiscoveryParams()
    solve = _Solver(params)
    timings = {"extract": 0.0, "singleton": 0.0, "merge": 0.0, "cross_log": 0.0}
    all_rec: dict = {}
    all_alts: dict = {}
    pooled: list[Group] = []
    unexplained: list[TransitionKey] = []
    notes: list[str] = []

    for log_id, log_ in enumerate(logs):
        t0 = time.perf_counter()
        if len(log_) < 2:
            notes.append(f"log {log_id} has fewer than two states; no transitions")
        keys, alts, rec = extract_transitions(log_, variables, params.k_max, log_id)
        t1 = time.perf_counter()
        fns: dict = {}
        explained = []
        for k in keys:
            term = solve([rec[k]])
            if term is None:
                for r in alts[k][1:]:
                    term = solve([r])
                    if term is not None:
                        rec[k] = r
                        break
            if term is None:
                unexplained.append(k)
                continue
            fns[k] = Function.from_term(term, len(rec[k].values))
            explained.append(k)
        t2 = time.perf_counter()
        groups = _group_by_function(explained, rec, fns)
        groups = bottom_up_merge(groups, rec, alts, solve, params)
        t3 = time.perf_counter()
        timings["extract"] += t1 - t0
        timings["singleton"] += t2 - t1
        timings["merge"] += t3 - t2
        all_rec.update(rec)
        all_alts.update(alts)
        pooled.extend(groups)

    t0 = time.perf_counter()
    # groups with the same witness function across logs start out together
    by_fn: dict[Function, Group] = {}
    for g in pooled:
        f = _as_function(g, all_rec)
        if f in by_fn:
            by_fn[f].members.extend(g.members)
        else:
            by_fn[f] = Group(list(g.members), g.witness)
    groups = bottom_up_merge(list(by_fn.values()), all_rec, all_alts, solve, params, split=True)
    timings["cross_log"] = time.perf_counter() - t0

    functions: list[Function] = []
    for g in sorted(groups, key=lambda g: -len(g)):
        f = _as_function(g, all_rec)
        if f not in functions:
            functions.append(f)
    success = not unexplained
    if params.max_functions is not None and len(functions) > params.max_functions:
        success = False
        notes.append(f"{len(functions)} functions exceed the cap of {params.max_functions}")
    timings["synth_calls"] = solve.calls
    return DiscoveryResult(functions, success, groups, all_rec, unexplained, timings, notes)
