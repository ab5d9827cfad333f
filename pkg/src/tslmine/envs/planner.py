"""A bounded planner standing in for reactive synthesis.

The planner knows only the legal moves of a board (in bounds, no walls). It
does not see holes, cliffs or the goal. It searches breadth-first over pairs
of (board state, what is left of the specification) and returns the shortest
action sequence whose lifted trace satisfies the mined specification.

Formula progression: reading one position of a trace turns the remaining
obligation into a new formula over the rest of the trace, e.g. ``F p`` becomes
``p or F p`` evaluated at the next position.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from ..lifting import RankTable, apply_predicates, construct_traces
from ..logic import (
    END,
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
    Trace,
    Truth,
    Until,
    UpdateTerm,
    atoms_of,
    identity_update,
)
from ..miner import Specification
from .grid import ACTIONS, WIN, Episode, GridConfig


class PlanningError(ValueError):
    pass


# -- residual formulas ---------------------------------------------------------------
# Internal form: True | False | ("atom", term) | ("not", r) | ("and", frozenset)
#                | ("or", frozenset) | ("X", r) | ("F", r) | ("G", r) | ("U", a, b)


def _convert(f: Formula):
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Atom):
        return ("atom", f.term)
    if isinstance(f, Not):
        return _not(_convert(f.arg))
    if isinstance(f, Next):
        return ("X", _convert(f.arg))
    if isinstance(f, Eventually):
        return ("F", _convert(f.arg))
    if isinstance(f, Always):
        return ("G", _convert(f.arg))
    if isinstance(f, And):
        return _and([_convert(f.left), _convert(f.right)])
    if isinstance(f, Or):
        return _or([_convert(f.left), _convert(f.right)])
    if isinstance(f, Implies):
        return _or([_not(_convert(f.left)), _convert(f.right)])
    if isinstance(f, Iff):
        a, b = _convert(f.left), _convert(f.right)
        return _or([_and([a, b]), _and([_not(a), _not(b)])])
    if isinstance(f, Until):
        return ("U", _convert(f.left), _convert(f.right))
    raise TypeError(f"cannot plan with {type(f).__name__}")


def _not(r):
    if r is True or r is False:
        return not r
    if r[0] == "not":
        return r[1]
    return ("not", r)


def _and(parts):
    out = set()
    for p in parts:
        if p is False:
            return False
        if p is True:
            continue
        if p[0] == "and":
            out |= p[1]
        else:
            out.add(p)
    if not out:
        return True
    if len(out) == 1:
        return next(iter(out))
    return ("and", frozenset(out))


def _or(parts):
    out = set()
    for p in parts:
        if p is True:
            return True
        if p is False:
            continue
        if p[0] == "or":
            out |= p[1]
        else:
            out.add(p)
    if not out:
        return False
    if len(out) == 1:
        return next(iter(out))
    return ("or", frozenset(out))


def progress(r, letter: frozenset):
    """Obligation for the next position after reading a non-final ``letter``."""
    if r is True or r is False:
        return r
    kind = r[0]
    if kind == "atom":
        return r[1] in letter
    if kind == "not":
        return _not(progress(r[1], letter))
    if kind == "and":
        return _and(progress(p, letter) for p in r[1])
    if kind == "or":
        return _or(progress(p, letter) for p in r[1])
    if kind == "X":
        return r[1]
    if kind == "F":
        return _or([progress(r[1], letter), r])
    if kind == "G":
        return _and([progress(r[1], letter), r])
    if kind == "U":
        return _or([progress(r[2], letter), _and([progress(r[1], letter), r])])
    raise ValueError(kind)


def final(r, letter: frozenset, open_end: bool = False) -> tuple[bool, bool]:
    """(definitely, possibly) true at a last position with ``letter``.

    With ``open_end`` updates and ``X`` are unknown at the last position.
    """
    if r is True or r is False:
        return r, r
    kind = r[0]
    if kind == "atom":
        if open_end and isinstance(r[1], UpdateTerm):
            return False, True
        v = r[1] in letter
        return v, v
    if kind == "not":
        lo, hi = final(r[1], letter, open_end)
        return not hi, not lo
    if kind in ("and", "or"):
        vals = [final(p, letter, open_end) for p in r[1]]
        pick = all if kind == "and" else any
        return pick(v[0] for v in vals), pick(v[1] for v in vals)
    if kind == "X":
        return False, open_end
    if kind in ("F", "G"):
        return final(r[1], letter, open_end)
    if kind == "U":
        return final(r[2], letter, open_end)
    raise ValueError(kind)


# -- planning ----------------------------------------------------------------------


@dataclass
class TraceModel:
    """How raw states become trace letters: the lifted signature and rank table."""

    signature: Signature
    rank: RankTable
    ordered_constants: tuple = ()

    def predicates(self, valuation) -> frozenset:
        return frozenset(apply_predicates(valuation, self.signature, self.ordered_constants))

    def updates(self, prev, cur) -> frozenset | None:
        out = set()
        for v in self.signature.names:
            target = int(cur[v])
            if v in self.rank.exempt:
                if int(prev[v]) != target:
                    return None
                out.add(identity_update(v))
                continue
            for f, w in self.rank.order(v):
                if f(*(int(prev[x]) for x in w)) == target:
                    out.add(UpdateTerm(v, f, w))
                    break
            else:
                return None
        return frozenset(out)

    def lift(self, log_, fallback: bool = False) -> Trace:
        return construct_traces([log_], self.signature, self.rank, self.ordered_constants,
                                fallback=fallback)[0]


def check_variables(spec: Specification, signature: Signature) -> None:
    names = set(signature.names)
    for f in spec.formulas():
        for a in atoms_of(f):
            if a == END:
                continue
            used = set(a.args) if isinstance(a, PredicateAtom) else {a.target, *a.inputs}
            unknown = used - names
            if unknown:
                raise PlanningError(f"specification mentions unknown variables {sorted(unknown)}")


def plan_episode(spec: Specification, config: GridConfig, model: TraceModel,
                 horizon: int | None = None) -> Episode | None:
    """Shortest legal action sequence whose lifted trace satisfies ``spec``; None if
    there is none within ``horizon`` steps."""
    check_variables(spec, model.signature)
    horizon = config.horizon() if horizon is None else horizon
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    live = _convert(Eventually(spec.liveness)) if spec.liveness is not None else True
    safe = tuple(_convert(Always(p)) for p in spec.safety)
    start = config.initial_state()
    val_cache: dict = {}
    pred_cache: dict = {}

    def val(s):
        if s not in val_cache:
            val_cache[s] = config.valuation(s)
        return val_cache[s]

    def preds(s):
        if s not in pred_cache:
            pred_cache[s] = model.predicates(val(s))
        return pred_cache[s]

    def accepts(s, obligations) -> bool:
        letter = preds(s) | {END}
        lv, sv = obligations
        if not final(lv, letter)[0]:
            return False
        return all(final(r, letter, spec.open_end)[1] if spec.open_end else final(r, letter)[0]
                   for r in sv)

    root = (start, (live, safe))
    parents = {root: None}
    queue = deque([(root, 0)])
    while queue:
        node, depth = queue.popleft()
        s, obligations = node
        if accepts(s, obligations):
            return _episode(config, node, parents, model, spec)
        if depth >= horizon:
            continue
        for a in ACTIONS:
            n = config.step_model(s, a)
            if n is None:
                continue
            ups = model.updates(val(s), val(n))
            if ups is None:
                continue  # no discovered update explains this move
            letter = preds(s) | ups
            lv = progress(obligations[0], letter)
            if lv is False:
                continue
            sv = tuple(progress(r, letter) for r in obligations[1])
            if any(r is False for r in sv):
                continue
            child = (n, (lv, sv))
            if child in parents:
                continue
            parents[child] = (node, a)
            queue.append((child, depth + 1))
    return None


def _episode(config, node, parents, model: TraceModel, spec: Specification) -> Episode:
    actions = []
    while parents[node] is not None:
        node, a = parents[node]
        actions.append(a)
    actions.reverse()
    states = config._states_along(actions)
    log_ = tuple(config.valuation(s) for s in states)
    trace = model.lift(list(log_))
    # soundness: the lifted trace of every returned plan satisfies the specification
    assert spec.holds_on(trace), "planner returned a trace violating the specification"
    return Episode(config, tuple(actions), log_, "plan")


@dataclass
class Evaluation:
    wins: int
    total: int
    planned: int
    outcomes: list

    @property
    def rate(self) -> float:
        return self.wins / self.total if self.total else 0.0


def evaluate_win_rate(spec: Specification, configs: Sequence[GridConfig], model: TraceModel,
                      horizon: int | None = None) -> Evaluation:
    """Plan on each board and replay the plan under the board's real rules."""
    wins = planned = 0
    outcomes = []
    for cfg in configs:
        ep = plan_episode(spec, cfg, model, horizon)
        if ep is None:
            outcomes.append("no-plan")
            continue
        planned += 1
        _, status, _ = cfg.run(ep.actions)
        outcomes.append(status or "unfinished")
        wins += status == WIN
    return Evaluation(wins, len(configs), planned, outcomes)


def execute(config: GridConfig, episode: Episode) -> Episode:
    """Ground-truth replay of a planned episode (stops at the first terminal state)."""
    return config.episode(episode.actions)
