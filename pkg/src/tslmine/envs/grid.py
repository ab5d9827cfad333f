"""Deterministic grid-world games shared by FrozenLake, CliffWalking and Taxi.

Coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row. ``up``
increases ``y``. Under ``var_mov`` dynamics moving right maps ``x`` to ``2x+1``
and moving up maps ``y`` to ``y+2``.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable

ACTIONS = ("left", "down", "right", "up")

WIN = "win"
LOSE = "lose"
TIMEOUT = "timeout"  # episode stopped before any terminal state


def move(x: int, y: int, action: str, dynamics: str = "standard") -> tuple[int, int]:
    if action == "left":
        return x - 1, y
    if action == "down":
        return x, y - 1
    if action == "right":
        return (2 * x + 1, y) if dynamics == "var_mov" else (x + 1, y)
    if action == "up":
        return (x, y + 2) if dynamics == "var_mov" else (x, y + 1)
    raise ValueError(f"unknown action {action!r}")


@dataclass(frozen=True)
class Episode:
    config: "GridConfig"
    actions: tuple[str, ...]
    log: tuple[dict, ...]
    label: str  # "positive" | "negative"
    outcome: str | None = None

    @property
    def positive(self) -> bool:
        return self.label == "positive"


@dataclass(frozen=True)
class GridConfig:
    """Common board model. Subclasses add hazards, goals and the log schema."""

    width: int
    length: int
    start: tuple[int, int] = (0, 0)
    dynamics: str = "standard"
    seed: int = 0

    game = "grid"
    # keep episodes that run out of steps as negatives even where hazards exist
    timeout_negatives = False
    # shares of random walks, late deviations and stalls; the rest are deviations
    negative_mix = (0.3, 0.2, 0.0)

    # -- model ---------------------------------------------------------------
    def initial_state(self) -> Hashable:
        return self.start

    def position(self, state) -> tuple[int, int]:
        return state[:2]

    def blocked(self, x: int, y: int) -> bool:
        return False

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.length

    def step_model(self, state, action: str):
        """Next state under legal-move rules only (no hazards), or None if illegal."""
        x, y = self.position(state)
        nx, ny = move(x, y, action, self.dynamics)
        if not self.in_bounds(nx, ny) or self.blocked(nx, ny):
            return None
        return self._advance(state, nx, ny)

    def _advance(self, state, nx: int, ny: int):
        return (nx, ny)

    def outcome(self, state) -> str | None:
        """Ground-truth terminal status of a state: WIN, LOSE or None."""
        raise NotImplementedError

    def valuation(self, state) -> dict:
        raise NotImplementedError

    def constants(self) -> dict:
        return {}

    @property
    def variables(self) -> list[str]:
        return list(self.valuation(self.initial_state()))

    # -- execution -----------------------------------------------------------
    def run(self, actions: Iterable[str]) -> tuple[list[dict], str | None, int]:
        """Execute ``actions`` under ground truth; stops at the first terminal state.

        Returns ``(log, outcome, executed)``.
        """
        state = self.initial_state()
        log = [self.valuation(state)]
        status = self.outcome(state)
        executed = 0
        for a in actions:
            if status is not None:
                break
            nxt = self.step_model(state, a)
            if nxt is None:
                raise ValueError(f"illegal action {a!r} at {self.position(state)}")
            state = nxt
            executed += 1
            log.append(self.valuation(state))
            status = self.outcome(state)
        return log, status, executed

    def episode(self, actions, label: str | None = None) -> Episode:
        actions = tuple(actions)
        log, status, executed = self.run(actions)
        if label is None:
            label = "positive" if status == WIN else "negative"
        return Episode(self, actions[:executed], tuple(log), label, status)

    # -- search --------------------------------------------------------------
    def bfs(self, source, accept, avoid_terminal: bool = True):
        """Shortest action list from ``source`` to a state satisfying ``accept``."""
        parents = {source: None}
        queue = deque([source])
        while queue:
            s = queue.popleft()
            if accept(s):
                path = []
                while parents[s] is not None:
                    s, a = parents[s]
                    path.append(a)
                return path[::-1]
            if avoid_terminal and self.outcome(s) is not None and s != source:
                continue
            for a in ACTIONS:
                n = self.step_model(s, a)
                if n is None or n in parents:
                    continue
                if avoid_terminal and self.outcome(n) == LOSE and not accept(n):
                    continue
                parents[n] = (s, a)
                queue.append(n)
        return None

    def winning_path(self) -> list[str]:
        path = self.bfs(self.initial_state(), lambda s: self.outcome(s) == WIN)
        if path is None:
            raise ValueError(f"{self.game}: goal unreachable on {self}")
        return path

    def horizon(self) -> int:
        return 4 * (self.width + self.length)

    def negative_horizon(self) -> int:
        return 3 * (self.width + self.length)

    # -- trace generation ----------------------------------------------------
    def _states_along(self, actions) -> list:
        s = self.initial_state()
        out = [s]
        for a in actions:
            s = self.step_model(s, a)
            out.append(s)
        return out

    def _detour(self, state, rng: random.Random) -> list[str]:
        """A short safe excursion that returns to ``state``."""
        options = []
        for a in ACTIONS:
            n = self.step_model(state, a)
            if n is None or self.outcome(n) is not None:
                continue
            back = self.bfs(n, lambda s: s == state)
            if back is not None and len(back) <= 4:
                options.append([a] + back)
        return rng.choice(options) if options else []

    def with_detours(self, path: list[str], rng: random.Random, p: float = 0.3) -> list[str]:
        states = self._states_along(path)
        out: list[str] = []
        for s, a in zip(states, path):
            if rng.random() < p and self.outcome(s) is None:
                out.extend(self._detour(s, rng))
            out.append(a)
        return out

    def generate_positive(self, n: int, rng: random.Random, p_detour: float = 0.3) -> list[Episode]:
        base = self.winning_path()
        episodes: list[Episode] = []
        seen = set()
        attempts = 0
        while len(episodes) < n:
            attempts += 1
            acts = base if (attempts == 1 and p_detour == 0) else self.with_detours(base, rng, p_detour)
            key = tuple(acts)
            if key in seen and attempts < 50 * (n + 1):
                continue
            seen.add(key)
            ep = self.episode(acts)
            assert ep.outcome == WIN, "detours must keep positive episodes winning"
            episodes.append(ep)
        return episodes

    def random_walk(self, rng: random.Random, horizon: int) -> list[str]:
        s = self.initial_state()
        acts = []
        for _ in range(horizon):
            if self.outcome(s) is not None:
                break
            legal = [(a, n) for a in ACTIONS if (n := self.step_model(s, a)) is not None]
            if not legal:
                break
            a, s = rng.choice(legal)
            acts.append(a)
        return acts

    def deviations(self, rng: random.Random) -> list[list[str]]:
        """Action lists that deliberately end in a losing state."""
        out = []
        for target in self.losing_states():
            path = self.bfs(self.initial_state(), lambda s, t=target: s == t)
            if path is not None:
                out.append(path)
        return out

    def losing_states(self) -> list:
        return []

    def late_deviation(self, rng: random.Random) -> list[str] | None:
        """A detoured winning path that turns into the nearest hazard one to
        three steps before the goal."""
        path = self.with_detours(self.winning_path(), rng)
        cut = path[: len(path) - rng.randint(1, min(3, len(path)))]
        state = self._states_along(cut)[-1]
        losing = set(self.losing_states())
        if not losing:
            return None
        rest = self.bfs(state, lambda s: s in losing)
        return None if rest is None else cut + rest

    def stall(self, rng: random.Random) -> list[str]:
        """A detoured winning path that stops one to three steps short of the goal."""
        path = self.with_detours(self.winning_path(), rng)
        return path[: len(path) - rng.randint(1, min(3, len(path)))]

    def generate_negative(self, n: int, rng: random.Random, mix=None) -> list[Episode]:
        p_random, p_late, p_stall = mix or self.negative_mix
        episodes: list[Episode] = []
        seen = set()
        devs = self.deviations(rng)
        hazards = bool(self.losing_states())
        attempts = 0
        while len(episodes) < n and attempts < 200 * (n + 1):
            attempts += 1
            r = rng.random()
            acts = None
            if r < p_random or not devs:
                acts = self.random_walk(rng, self.negative_horizon())
            elif r < p_random + p_late:
                acts = self.late_deviation(rng)
            elif r < p_random + p_late + p_stall:
                acts = self.stall(rng)
            if acts is None:
                acts = list(rng.choice(devs))
                if rng.random() < 0.5:
                    acts = self._detour_prefix(acts, rng)
            ep = self.episode(acts)
            if ep.outcome == WIN:
                continue
            # where hazards exist a failure means falling in, unless timeouts are wanted too
            if hazards and ep.outcome != LOSE and not self.timeout_negatives:
                continue
            key = ep.actions
            if key in seen and attempts < 100 * (n + 1):
                continue
            seen.add(key)
            episodes.append(Episode(self, ep.actions, ep.log, "negative", ep.outcome))
        return episodes

    def _detour_prefix(self, acts: list[str], rng: random.Random) -> list[str]:
        if len(acts) < 2:
            return acts
        return self.with_detours(acts[:-1], rng) + acts[-1:]

    # -- planner-facing description -------------------------------------------
    def board_constants(self) -> dict:
        """Bounds and start used by the synthesis template."""
        return {
            "B_MIN": 0,
            "B_MAX_X": self.width - 1,
            "B_MAX_Y": self.length - 1,
            "START_X": self.start[0],
            "START_Y": self.start[1],
        }


def sample_distinct_cells(rng: random.Random, width: int, length: int, k: int,
                          exclude: Iterable[tuple[int, int]] = ()) -> list[tuple[int, int]]:
    cells = [(x, y) for x in range(width) for y in range(length)]
    exclude = set(exclude)
    cells = [c for c in cells if c not in exclude]
    return rng.sample(cells, k)


@dataclass
class GeneratedCorpus:
    positives: list[Episode] = field(default_factory=list)
    negatives: list[Episode] = field(default_factory=list)

    @property
    def logs(self) -> list[list[dict]]:
        return [list(e.log) for e in self.positives + self.negatives]

    @property
    def outcomes(self) -> list[str]:
        """How each negative ended."""
        return [e.outcome or TIMEOUT for e in self.negatives]
