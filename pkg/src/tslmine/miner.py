"""Bounded formula search and Boolean subset cover over labeled traces.

Candidates are evaluated on all positions of all traces at once. A candidate's
positional signature is a boolean vector over the concatenated positions of
the sample; semantically equal candidates are kept once (the first in
enumeration order).

Subformulas come from per-size banks. The top level of each size is searched
separately with exact necessary conditions: e.g. for ``F (a && b)`` to hold on
every positive, both ``F a`` and ``F b`` must hold there, so only those rows of
the banks are paired up.
"""
from __future__ import annotations

import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .logic import (
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
    Trace,
    UpdateTerm,
    evaluate,
)

log = logging.getLogger(__name__)

MODES = ("plain", "liveness", "safety")
UNARY_OPS = {"plain": ("not", "X", "F", "G"), "liveness": ("not", "F"), "safety": ("not", "X")}
BINARY_OPS = ("and", "or", "implies", "iff")
COMMUTATIVE = {"and", "or", "iff"}
_CTOR = {"not": Not, "X": Next, "F": Eventually, "G": Always,
         "and": And, "or": Or, "implies": Implies, "iff": Iff}
DEFAULT_BOUND = {"plain": 7, "liveness": 8, "safety": 9}


class InconsistentSample(ValueError):
    pass


@dataclass
class MiningConfig:
    mode: str = "liveness"
    size_bound: int | None = None
    # explicit atom pool; None means every atom occurring in the sample
    atoms: tuple | None = None
    # no END atom; safety treats the last position as continuing (see _Space)
    open_end: bool = False
    # variables fixed for a whole episode; relations among only these are dropped
    constants: frozenset = frozenset()
    cover_strategy: str = "greedy"
    bucket_cap: int = 10000
    max_bank_size: int = 5
    pair_budget: int = 2_000_000
    # safety: every negative fails at its last position, so earlier positions are safe
    terminal_failures: bool = False
    # cover: stop growing sizes after this many sizes in a row add no coverage
    patience: int | None = None
    # grammar restrictions: None means the mode's full unary set
    unary_ops: tuple | None = None
    # variables whose update terms may appear as atoms; None means all of them
    update_targets: frozenset | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.cover_strategy != "greedy":
            raise ValueError("only the greedy cover is implemented")
        if self.size_bound is not None and self.size_bound < 1:
            raise ValueError("size bound must be >= 1")
        if self.unary_ops is not None:
            extra = set(self.unary_ops) - set(UNARY_OPS[self.mode])
            if extra:
                raise ValueError(f"{sorted(extra)} not in the {self.mode} grammar")

    @property
    def bound(self) -> int:
        return self.size_bound if self.size_bound is not None else DEFAULT_BOUND[self.mode]

    @property
    def unary(self) -> tuple:
        return tuple(self.unary_ops) if self.unary_ops is not None else UNARY_OPS[self.mode]


@dataclass
class Sample:
    positives: list[Trace]
    negatives: list[Trace]

    def check(self) -> None:
        shared = {t.steps for t in self.positives} & {t.steps for t in self.negatives}
        if shared:
            raise InconsistentSample(f"{len(shared)} trace(s) labeled both positive and negative")


def wrap(formula: Formula, mode: str) -> Formula:
    if mode == "liveness":
        return Eventually(formula)
    if mode == "safety":
        return Always(formula)
    return formula


# -- raw enumeration -------------------------------------------------------------


def enumerate_candidates(config: MiningConfig, atoms: Sequence) -> Iterator[Formula]:
    """Every formula of the mode's grammar up to the size bound, by nondecreasing size.

    No semantic pruning: each syntax tree appears exactly once.
    """
    by_size: dict[int, list[Formula]] = {1: [a if isinstance(a, Formula) else Atom(a) for a in atoms]}
    yield from by_size[1]
    for s in range(2, config.bound + 1):
        cur: list[Formula] = []
        for op in config.unary:
            cur.extend(_CTOR[op](f) for f in by_size[s - 1])
        for op in BINARY_OPS:
            for a in range(1, s - 1):
                for l, r in itertools.product(by_size[a], by_size[s - 1 - a]):
                    cur.append(_CTOR[op](l, r))
        by_size[s] = cur
        yield from cur


def count_candidates(n_atoms: int, mode: str, bound: int, n_unary: int | None = None) -> list[int]:
    """Number of syntax trees of each size 1..bound (closed recurrence)."""
    u = len(UNARY_OPS[mode]) if n_unary is None else n_unary
    b = len(BINARY_OPS)
    c = [0, n_atoms]
    for s in range(2, bound + 1):
        c.append(u * c[s - 1] + b * sum(c[a] * c[s - 1 - a] for a in range(1, s - 1)))
    return c[1:]


# -- positional evaluation ---------------------------------------------------------


class _Space:
    """Concatenated positions of every sample trace, positives first.

    With ``open_end`` a row holds two halves ``[lo | hi]``: definitely true and
    possibly true. Update atoms and ``X`` are unknown at the last position of a
    trace, since play would go on past it.
    """

    def __init__(self, sample: Sample, open_end: bool = False, terminal_failures: bool = False):
        traces = list(sample.positives) + list(sample.negatives)
        self.traces = traces
        self.n_pos = len(sample.positives)
        self.kleene = open_end
        lengths = [len(t) for t in traces]
        self.starts = np.cumsum([0] + lengths[:-1]).astype(np.int64)
        self.P = int(sum(lengths))
        self.W = 2 * self.P if open_end else self.P
        ends = []
        for st, n in zip(self.starts, lengths):
            ends.extend([st + n - 1] * n)
        self.ends = np.asarray(ends, dtype=np.int64)
        self.is_last = np.zeros(self.P, dtype=bool)
        self.is_last[self.starts + np.asarray(lengths) - 1] = True
        self.pos_positions = np.zeros(self.P, dtype=bool)
        if self.n_pos:
            self.pos_positions[: int(self.starts[self.n_pos]) if self.n_pos < len(traces) else self.P] = True
        self.neg_positions = ~self.pos_positions
        # positions a safety candidate must (possibly) hold at
        self.safe_positions = self.pos_positions.copy()
        if terminal_failures:
            self.safe_positions |= self.neg_positions & ~self.is_last
        self.pos_starts = self.starts[: self.n_pos]
        self.neg_starts = self.starts[self.n_pos:]

    def atom_rows(self, atoms) -> np.ndarray:
        """Plain (two-valued) rows, one per atom."""
        out = np.zeros((len(atoms), self.P), dtype=bool)
        for k, a in enumerate(atoms):
            for t, tr in enumerate(self.traces):
                m = tr.atom_mask(a)
                st = self.starts[t]
                for i in range(len(tr)):
                    if m >> i & 1:
                        out[k, st + i] = True
        return out

    def lift_rows(self, atoms, rows) -> np.ndarray:
        if not self.kleene:
            return rows
        hi = rows.copy()
        for k, a in enumerate(atoms):
            if isinstance(a, UpdateTerm):
                hi[k, self.is_last] = True
        return np.concatenate([rows, hi], axis=1)

    def lo(self, v):
        return v[..., : self.P]

    def hi(self, v):
        return v[..., self.P:] if self.kleene else v

    def _join(self, lo, hi):
        return np.concatenate([lo, hi], axis=-1)

    # operators on (N, W) matrices
    def op_not(self, v):
        if self.kleene:
            return self._join(~self.hi(v), ~self.lo(v))
        return ~v

    def _shift(self, v, fill: bool):
        out = np.zeros_like(v)
        out[:, :-1] = v[:, 1:]
        out[:, self.is_last] = fill
        return out

    def op_X(self, v):
        if self.kleene:
            return self._join(self._shift(self.lo(v), False), self._shift(self.hi(v), True))
        return self._shift(v, False)

    def _ahead(self, v):
        # number of true positions from i to the end of i's trace
        cs = np.cumsum(v, axis=1, dtype=np.int32)
        return cs[:, self.ends] - cs + v

    def op_F(self, v):
        if self.kleene:
            raise ValueError("open-ended evaluation covers the safety grammar only")
        return self._ahead(v) > 0

    def op_G(self, v):
        if self.kleene:
            raise ValueError("open-ended evaluation covers the safety grammar only")
        return self._ahead(~v) == 0

    def unary(self, op, v):
        return getattr(self, "op_" + op)(v)

    def binary(self, op, l, r):
        if self.kleene:
            ll, lh, rl, rh = self.lo(l), self.hi(l), self.lo(r), self.hi(r)
            if op == "and":
                return self._join(ll & rl, lh & rh)
            if op == "or":
                return self._join(ll | rl, lh | rh)
            if op == "implies":
                return self._join(~lh | rl, ~ll | rh)
            return self._join((ll & rl) | ~(lh | rh), (lh & rh) | ~(ll | rl))
        if op == "and":
            return l & r
        if op == "or":
            return l | r
        if op == "implies":
            return ~l | r
        return ~(l ^ r)

    def survives(self, v) -> np.ndarray:
        """Safety candidates never definitely false at a safe position."""
        return self.hi(v)[:, self.safe_positions].all(axis=1)

    def wrapped(self, v, mode) -> np.ndarray:
        """Truth of the wrapped formula at position 0 of every trace, shape (N, T).

        Open-ended safety counts a trace as violated only where a position is
        definitely false.
        """
        if v.shape[0] == 0:
            return np.zeros((0, len(self.traces)), dtype=bool)
        if mode == "liveness":
            return np.logical_or.reduceat(self.lo(v), self.starts, axis=1)
        if mode == "safety":
            return np.logical_and.reduceat(self.hi(v), self.starts, axis=1)
        return self.lo(v)[:, self.starts]


@dataclass
class _Bank:
    rows: np.ndarray
    prov: list


@dataclass
class MiningStats:
    sizes_searched: int = 0
    truncated: bool = False
    candidates: int = 0
    seconds: float = 0.0
    notes: list[str] = field(default_factory=list)


class _Search:
    def __init__(self, sample: Sample, config: MiningConfig, atoms=None):
        self.sample = sample
        self.config = config
        self.mode = config.mode
        safety = config.mode == "safety"
        self.space = _Space(sample, open_end=config.open_end and safety,
                            terminal_failures=config.terminal_failures and safety)
        self.stats = MiningStats()
        pool = atoms if atoms is not None else atom_pool(sample, config)
        self.atoms = list(pool)
        self.seen: set[bytes] = set()
        self.banks: dict[int, _Bank] = {}
        rows = self.space.atom_rows(self.atoms)
        if config.open_end and config.atoms is None:
            # an atom that marks exactly the last positions (or all others) is END in disguise
            end = self.space.atom_rows([END])[0]
            fake = {np.packbits(end).tobytes(), np.packbits(~end).tobytes()}
            ok = [k for k in range(len(self.atoms)) if np.packbits(rows[k]).tobytes() not in fake]
            self.atoms = [self.atoms[k] for k in ok]
            rows = rows[ok]
        rows = self.space.lift_rows(self.atoms, rows)
        keep = []
        for k in range(len(self.atoms)):
            key = np.packbits(rows[k]).tobytes()
            if key not in self.seen:
                self.seen.add(key)
                keep.append(k)
        self.atoms = [self.atoms[k] for k in keep]
        self.banks[1] = _Bank(rows[keep], [("atom", k) for k in range(len(keep))])
        self._props = {}

    # -- formula reconstruction --
    def formula(self, prov) -> Formula:
        kind = prov[0]
        if kind == "atom":
            return Atom(self.atoms[prov[1]])
        if len(prov) == 2:
            return _CTOR[kind](self._ref(prov[1]))
        return _CTOR[kind](self._ref(prov[1]), self._ref(prov[2]))

    def _ref(self, ref) -> Formula:
        size, idx = ref
        return self.formula(self.banks[size].prov[idx])

    # -- banks --
    def bank(self, s: int) -> _Bank | None:
        if s in self.banks:
            return self.banks[s]
        if s > self.config.max_bank_size:
            return None
        for t in range(2, s):
            self.bank(t)
        self.banks[s] = self._build(s)
        return self.banks[s]

    def _build(self, s: int) -> _Bank:
        cap = self.config.bucket_cap
        sp = self.space
        blocks, prov = [], []
        for op in self.config.unary:
            src = self.banks[s - 1]
            rows = sp.unary(op, src.rows)
            idx = self._dedup(rows, cap)
            blocks.append(rows[idx])
            prov.extend((op, (s - 1, int(i))) for i in idx)
        for op in BINARY_OPS:
            for a in range(1, s - 1):
                b = s - 1 - a
                if op in COMMUTATIVE and a > b:
                    continue
                kept_rows, kept_prov = [], []
                budget = cap
                for i, j, rows in self._pairs(op, a, None, b, None):
                    idx = self._dedup(rows, budget)
                    if len(idx):
                        kept_rows.append(rows[idx])
                        kept_prov.extend((op, (a, int(i[k])), (b, int(j[k]))) for k in idx)
                        budget -= len(idx)
                    if budget <= 0:
                        self.stats.truncated = True
                        break
                if kept_rows:
                    blocks.append(np.concatenate(kept_rows))
                    prov.extend(kept_prov)
        if blocks:
            rows = np.concatenate(blocks)
        else:
            rows = np.zeros((0, sp.W), dtype=bool)
        return _Bank(rows, prov)

    def _dedup(self, rows: np.ndarray, cap: int) -> list[int]:
        if rows.shape[0] == 0 or cap <= 0:
            if rows.shape[0] and cap <= 0:
                self.stats.truncated = True
            return []
        packed = np.packbits(rows, axis=1)
        out = []
        for i in range(packed.shape[0]):
            key = packed[i].tobytes()
            if key in self.seen:
                continue
            self.seen.add(key)
            out.append(i)
            if len(out) >= cap:
                if i + 1 < packed.shape[0]:
                    self.stats.truncated = True
                break
        return out

    def _pairs(self, op, a, li, b, ri, chunk_elems: int = 8_000_000):
        """Yield ``(left_idx, right_idx, rows)`` chunks in row-major order.

        ``li``/``ri`` restrict the banks to the given (sorted) row indices.
        """
        L, R = self.banks[a], self.banks[b]
        li = np.arange(L.rows.shape[0]) if li is None else np.asarray(li, dtype=np.int64)
        ri = np.arange(R.rows.shape[0]) if ri is None else np.asarray(ri, dtype=np.int64)
        if len(li) == 0 or len(ri) == 0:
            return
        same = a == b
        nr = len(ri)
        per = max(1, chunk_elems // max(1, nr * self.space.W))
        budget = self.config.pair_budget
        rrows = R.rows[ri]
        for start in range(0, len(li), per):
            block = li[start:start + per]
            lrows = L.rows[block]
            res = self.space.binary(op, lrows[:, None, :], rrows[None, :, :])
            ii = np.repeat(block, nr)
            jj = np.tile(ri, len(block))
            res = res.reshape(-1, self.space.W)
            if same and op in COMMUTATIVE:
                m = ii < jj
            elif same:
                m = ii != jj
            else:
                m = None
            if m is not None:
                ii, jj, res = ii[m], jj[m], res[m]
            budget -= len(ii)
            yield ii, jj, res
            if budget <= 0:
                if start + per < len(li):
                    self.stats.truncated = True
                return

    # -- per-row properties used by the top-level filters --
    def props(self, s: int) -> dict:
        if s in self._props:
            return self._props[s]
        bank = self.bank(s)
        sp = self.space
        rows = bank.rows
        pp, npp = sp.safe_positions, sp.neg_positions
        d = {}
        if rows.shape[0]:
            lo, hi = sp.lo(rows), sp.hi(rows)
            d["pf"] = hi[:, pp].all(axis=1)  # (possibly) true on every safe position
            d["pe"] = ~lo[:, pp].any(axis=1)  # never definitely true on a safe position
            d["nf"] = lo[:, npp].all(axis=1)
            d["ne"] = ~lo[:, npp].any(axis=1)
            w = sp.wrapped(rows, "liveness")
            d["pc"] = w[:, : sp.n_pos].all(axis=1)  # holds somewhere on every positive
            st_p = lo[:, sp.pos_starts]
            st_n = lo[:, sp.neg_starts]
            d["sp_true"] = st_p.all(axis=1)
            d["sn_false"] = ~st_n.any(axis=1)
            d["sn_true"] = st_n.all(axis=1)
        else:
            for k in ("pf", "pe", "nf", "ne", "pc", "sp_true", "sn_false", "sn_true"):
                d[k] = np.zeros(0, dtype=bool)
        self._props[s] = d
        return d

    # -- top level --
    def top_level(self, s: int):
        """Yield ``(prov_list, rows)`` blocks of size-``s`` candidates that pass the
        mode's necessary conditions, in enumeration order."""
        mode = self.mode
        if s == 1:
            yield self.banks[1].prov, self.banks[1].rows
            return
        sub = self.bank(s - 1)
        if sub is None:
            self.stats.truncated = True
        else:
            P = self.props(s - 1)
            for op in self.config.unary:
                if mode == "liveness" and op == "F":
                    continue  # F F p is F p at the first position
                if mode == "safety" and op == "X":
                    continue  # G X p fails at the last position of every positive
                if op == "not":
                    sel = {"liveness": P["nf"], "safety": P["pe"], "plain": P["sn_true"]}[mode]
                else:
                    sel = np.ones(sub.rows.shape[0], dtype=bool)
                idx = np.flatnonzero(sel)
                if len(idx):
                    yield ([(op, (s - 1, int(i))) for i in idx], self.space.unary(op, sub.rows[idx]))
        for op in BINARY_OPS:
            for a in range(1, s - 1):
                b = s - 1 - a
                if op in COMMUTATIVE and a > b:
                    continue
                if self.bank(a) is None or self.bank(b) is None:
                    self.stats.truncated = True
                    continue
                yield from self._top_binary(op, a, b)

    def _top_binary(self, op, a, b):
        mode = self.mode
        Pa, Pb = self.props(a), self.props(b)
        if op == "iff":
            yield from self._top_iff(a, b)
            return
        if mode == "liveness":
            sel = {"and": ("pc", "pc"), "or": ("ne", "ne"), "implies": ("nf", "ne")}[op]
            li, ri = np.flatnonzero(Pa[sel[0]]), np.flatnonzero(Pb[sel[1]])
        elif mode == "safety":
            if op == "and":
                li, ri = np.flatnonzero(Pa["pf"]), np.flatnonzero(Pb["pf"])
            elif op == "or":
                # a side that already holds on every positive makes the disjunction redundant
                li, ri = np.flatnonzero(~Pa["pf"]), np.flatnonzero(~Pb["pf"])
            else:
                li, ri = np.flatnonzero(~Pa["pe"]), np.flatnonzero(~Pb["pf"])
        else:
            sel = {"and": ("sp_true", "sp_true"), "or": ("sn_false", "sn_false"),
                   "implies": ("sn_true", "sn_false")}[op]
            li, ri = np.flatnonzero(Pa[sel[0]]), np.flatnonzero(Pb[sel[1]])
        for ii, jj, rows in self._pairs(op, a, li, b, ri):
            yield [(op, (a, int(i)), (b, int(j))) for i, j in zip(ii, jj)], rows

    def _top_iff(self, a, b):
        """Pairs whose biconditional can pass, found by hashing the relevant slice."""
        sp = self.space
        mode = self.mode
        if sp.kleene:
            # unknown positions break the equality test; pair up exhaustively
            yield from (([("iff", (a, int(i)), (b, int(j))) for i, j in zip(ii, jj)], rows)
                        for ii, jj, rows in self._pairs("iff", a, None, b, None))
            return
        if mode == "liveness":
            cols, flip = sp.neg_positions, True  # must be complementary on negatives
        elif mode == "safety":
            cols, flip = sp.safe_positions, False  # must agree on safe positions
        else:
            cols, flip = np.zeros(sp.P, dtype=bool), True
            cols[sp.neg_starts] = True
        A = self.banks[a].rows[:, cols]
        B = self.banks[b].rows[:, cols]
        if flip:
            B = ~B
        index: dict[bytes, list[int]] = {}
        for j in range(B.shape[0]):
            index.setdefault(np.packbits(B[j]).tobytes(), []).append(j)
        pairs = []
        for i in range(A.shape[0]):
            for j in index.get(np.packbits(A[i]).tobytes(), ()):
                if a == b and i >= j:
                    continue
                pairs.append((i, j))
                if len(pairs) >= self.config.pair_budget:
                    self.stats.truncated = True
                    break
        if not pairs:
            return
        ii = np.asarray([p[0] for p in pairs])
        jj = np.asarray([p[1] for p in pairs])
        for start in range(0, len(ii), 20000):
            bi, bj = ii[start:start + 20000], jj[start:start + 20000]
            rows = sp.binary("iff", self.banks[a].rows[bi], self.banks[b].rows[bj])
            yield [("iff", (a, int(i)), (b, int(j))) for i, j in zip(bi, bj)], rows


def atom_pool(sample: Sample, config: MiningConfig) -> list:
    """Atoms occurring in the sample, in a stable order (END last)."""
    if config.atoms is not None:
        return list(config.atoms)
    atoms = set()
    for tr in list(sample.positives) + list(sample.negatives):
        atoms |= tr.atoms()
    atoms.discard(END)
    if config.update_targets is not None:
        atoms = {a for a in atoms
                 if not isinstance(a, UpdateTerm) or a.target in config.update_targets}
    if config.constants:
        # a relation between two fixed values says something about the board, not the play
        atoms = {a for a in atoms if not (isinstance(a, PredicateAtom) and len(a.args) > 1
                                          and set(a.args) <= config.constants)}
    out = sorted(atoms, key=_atom_key)
    if not config.open_end:
        out.append(END)
    return out


_SYMBOL_ORDER = {"eq": 0, "lt": 1, "lte": 2, "gte": 3, "var": 4}


def _atom_key(a):
    from .syntax import format_term

    if isinstance(a, PredicateAtom):
        return (0, _SYMBOL_ORDER.get(a.symbol, 9), format_term(a))
    if isinstance(a, UpdateTerm):
        return (1, 0, format_term(a))
    return (2, 0, str(a))


# -- public operations ----------------------------------------------------------------


def evaluate_candidate(candidate: Formula, sample: Sample, mode: str) -> tuple[list[bool], list[bool]]:
    """Truth of the wrapped candidate at position 0 of each positive and negative."""
    f = wrap(candidate, mode)
    return ([evaluate(t, 0, f) for t in sample.positives],
            [evaluate(t, 0, f) for t in sample.negatives])


@dataclass
class MinimalResult:
    formula: Formula | None
    size: int | None
    stats: MiningStats


def mine_minimal(sample: Sample, config: MiningConfig) -> MinimalResult:
    """Smallest candidate whose wrapped form accepts every positive and rejects every negative."""
    sample.check()
    t0 = time.perf_counter()
    search = _Search(sample, config)
    sp = search.space
    n_pos = sp.n_pos
    for s in range(1, config.bound + 1):
        search.stats.sizes_searched = s
        for prov, rows in search.top_level(s):
            search.stats.candidates += rows.shape[0]
            w = sp.wrapped(rows, config.mode)
            ok = w[:, :n_pos].all(axis=1) & ~w[:, n_pos:].any(axis=1)
            if config.mode == "safety":
                ok &= sp.survives(rows)
            hit = np.flatnonzero(ok)
            if len(hit):
                f = search.formula(prov[int(hit[0])])
                search.stats.seconds = time.perf_counter() - t0
                return MinimalResult(f, f.size, search.stats)
    search.stats.seconds = time.perf_counter() - t0
    return MinimalResult(None, None, search.stats)


@dataclass
class CoverResult:
    conjuncts: list[Formula]
    complete: bool
    uncovered: list[int]
    stats: MiningStats
    size_reached: int = 0


def _greedy(pool, n_neg: int):
    uncovered = np.ones(n_neg, dtype=bool)
    chosen = []
    while uncovered.any():
        best, best_gain = None, 0
        for k, (size, order, rej, _) in enumerate(pool):
            gain = int((rej & uncovered).sum())
            if gain > best_gain:
                best, best_gain = k, gain
            # pool is sorted by (size, order): strict '>' keeps the earliest on ties
        if best is None:
            break
        chosen.append(best)
        uncovered &= ~pool[best][2]
    return chosen, uncovered


def boolean_subset_cover(sample: Sample, config: MiningConfig) -> CoverResult:
    """Greedy conjunction of wrapped candidates, each true on all positives,
    that together reject every negative.

    Sizes grow one at a time; the first size whose pool admits a complete cover
    ends the search. At the bound, or once ``patience`` sizes in a row bring no
    new coverage, the best partial cover is returned.
    """
    if config.mode not in ("safety", "liveness"):
        raise ValueError("cover runs in safety or liveness mode")
    sample.check()
    t0 = time.perf_counter()
    n_neg = len(sample.negatives)
    stats = MiningStats()
    if n_neg == 0:
        stats.notes.append("no negatives: empty cover")
        return CoverResult([], True, [], stats)
    search = _Search(sample, config)
    search.stats = stats
    sp = search.space
    n_pos = sp.n_pos
    pool = []  # (size, order, rejects, prov)
    seen_rej: set[bytes] = set()
    order = 0
    chosen, uncovered = [], np.ones(n_neg, dtype=bool)
    s = 0
    idle = 0
    for s in range(1, config.bound + 1):
        stats.sizes_searched = s
        for prov, rows in search.top_level(s):
            stats.candidates += rows.shape[0]
            w = sp.wrapped(rows, config.mode)
            good = w[:, :n_pos].all(axis=1)
            if config.mode == "safety":
                good &= sp.survives(rows)
            rej = ~w[:, n_pos:]
            good &= rej.any(axis=1)
            for k in np.flatnonzero(good):
                key = np.packbits(rej[k]).tobytes()
                if key in seen_rej:
                    continue
                seen_rej.add(key)
                pool.append((s, order, rej[k].copy(), prov[int(k)]))
                order += 1
        before = int(uncovered.sum())
        chosen, uncovered = _greedy(pool, n_neg)
        if not uncovered.any():
            break
        progress = int(uncovered.sum()) < before
        if chosen and not progress:
            idle += 1
            if config.patience is not None and idle >= config.patience:
                stats.notes.append(f"no new coverage for {idle} sizes; stopped at {s}")
                break
        elif progress:
            idle = 0
    conj = [search.formula(pool[k][3]) for k in chosen]
    stats.seconds = time.perf_counter() - t0
    return CoverResult(conj, not uncovered.any(), [int(i) for i in np.flatnonzero(uncovered)],
                       stats, s)


def open_masks(trace: Trace, f: Formula) -> tuple[int, int]:
    """Definitely-true and possibly-true position masks of a safety-grammar formula
    when play continues past the last position of ``trace``."""
    n = len(trace)
    full = (1 << n) - 1
    last = 1 << (n - 1)

    def go(g):
        if isinstance(g, Atom):
            m = trace.atom_mask(g.term)
            return (m, m | last) if isinstance(g.term, UpdateTerm) else (m, m)
        if isinstance(g, Not):
            lo, hi = go(g.arg)
            return full & ~hi, full & ~lo
        if isinstance(g, Next):
            lo, hi = go(g.arg)
            return lo >> 1, (hi >> 1) | last
        if isinstance(g, (And, Or, Implies, Iff)):
            (al, ah), (bl, bh) = go(g.left), go(g.right)
            if isinstance(g, And):
                return al & bl, ah & bh
            if isinstance(g, Or):
                return al | bl, ah | bh
            if isinstance(g, Implies):
                return (full & ~ah) | bl, (full & ~al) | bh
            return ((al & bl) | (full & ~(ah | bh)), (ah & bh) | (full & ~(al | bl)))
        raise ValueError(f"open-ended evaluation does not cover {type(g).__name__}")

    return go(f)


def safety_holds(trace: Trace, conjunct: Formula, open_end: bool = False) -> bool:
    """``G conjunct`` at position 0; open-ended traces fail only on a definite violation."""
    if not open_end:
        return evaluate(trace, 0, Always(conjunct))
    return open_masks(trace, conjunct)[1] == (1 << len(trace)) - 1


@dataclass
class Specification:
    liveness: Formula | None
    safety: list[Formula]
    meta: dict = field(default_factory=dict)
    open_end: bool = False

    def formulas(self) -> list[Formula]:
        out = [Eventually(self.liveness)] if self.liveness is not None else []
        return out + [Always(p) for p in self.safety]

    def conjunction(self) -> Formula | None:
        fs = self.formulas()
        if not fs:
            return None
        out = fs[0]
        for f in fs[1:]:
            out = And(out, f)
        return out

    def liveness_holds_on(self, trace: Trace) -> bool:
        return self.liveness is None or evaluate(trace, 0, Eventually(self.liveness))

    def safety_holds_on(self, trace: Trace) -> bool:
        return all(safety_holds(trace, p, self.open_end) for p in self.safety)

    def holds_on(self, trace: Trace) -> bool:
        return self.liveness_holds_on(trace) and self.safety_holds_on(trace)

    def to_text(self) -> str:
        lines = ["# liveness"]
        if self.liveness is not None:
            lines.append(str(Eventually(self.liveness)))
        lines.append("# safety")
        lines.extend(str(Always(p)) for p in self.safety)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, signature=None) -> "Specification":
        from .syntax import parse_formula

        section, live, safe = None, None, []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                section = line[1:].strip()
                continue
            f = parse_formula(line, signature)
            if section == "liveness":
                if not isinstance(f, Eventually):
                    raise ValueError(f"liveness line is not F-rooted: {line}")
                live = f.arg
            elif section == "safety":
                if not isinstance(f, Always):
                    raise ValueError(f"safety line is not G-rooted: {line}")
                safe.append(f.arg)
            else:
                raise ValueError(f"formula outside a section: {line}")
        return cls(live, safe)

    def sidecar(self) -> str:
        return json.dumps({
            "liveness": None if self.liveness is None else {
                "text": str(Eventually(self.liveness)), "size": Eventually(self.liveness).size},
            "safety": [{"text": str(Always(p)), "size": Always(p).size} for p in self.safety],
            **self.meta,
        }, indent=2, sort_keys=True)


class MiningError(RuntimeError):
    pass


def mine_specification(sample: Sample, liveness: MiningConfig | None = None,
                       safety: MiningConfig | None = None,
                       require_liveness: bool = False,
                       liveness_only=(), modes=("liveness", "safety")) -> Specification:
    """Minimal liveness plus a greedy safety cover, checked against the sample.

    ``modes`` picks which halves are mined; the other half stays empty.

    Negatives listed in ``liveness_only`` (indices) are skipped by the safety
    cover, e.g. episodes that ran out of time without reaching a bad state.
    """
    sample.check()
    liveness = liveness or MiningConfig("liveness")
    safety = safety or MiningConfig("safety")
    skip = set(liveness_only)
    target_idx = [i for i in range(len(sample.negatives)) if i not in skip]
    targets = [sample.negatives[i] for i in target_idx]
    t0 = time.perf_counter()
    if not modes or set(modes) - {"liveness", "safety"}:
        raise ValueError("modes must be a non-empty subset of ('liveness', 'safety')")
    if "liveness" in modes and sample.positives:
        live = mine_minimal(sample, liveness)
    else:
        live = MinimalResult(None, None, MiningStats())
    t1 = time.perf_counter()
    if "safety" in modes:
        cover = boolean_subset_cover(Sample(sample.positives, targets), safety)
    else:
        cover = CoverResult([], not targets, list(range(len(targets))), MiningStats())
    t2 = time.perf_counter()
    if live.formula is None and require_liveness:
        raise MiningError("no liveness formula within the bound")
    conjuncts = list(cover.conjuncts)
    spec = Specification(live.formula, conjuncts, open_end=safety.open_end)
    rejected = [not spec.holds_on(t) for t in sample.negatives]
    accepted = [spec.holds_on(t) for t in sample.positives]
    if live.formula is None and not conjuncts and sample.negatives:
        raise MiningError("neither a liveness formula nor any safety conjunct was found")
    spec.meta = {
        "liveness_seconds": round(t1 - t0, 3),
        "safety_seconds": round(t2 - t1, 3),
        "liveness_truncated": live.stats.truncated,
        "safety_truncated": cover.stats.truncated,
        "safety_complete": cover.complete,
        "safety_size_reached": cover.size_reached,
        # indices into the sample's negatives
        "uncovered_by_safety": [target_idx[i] for i in cover.uncovered],
        "liveness_only": sorted(skip),
        "open_end": safety.open_end,
        "discriminates": all(accepted) and all(rejected),
        "positives": len(sample.positives),
        "negatives": len(sample.negatives),
    }
    if not all(accepted):
        raise MiningError("mined specification rejects a positive trace")
    return spec
