"""FrozenLake: reach the goal without stepping on a hole."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .grid import LOSE, WIN, GridConfig, sample_distinct_cells

# the board of the reference trace listing
FIXED_HOLES = ((1, 1), (3, 1), (3, 2))
# the board of the introductory walk-through
MOTIVATING_HOLES = ((1, 1), (0, 3), (3, 2))


@dataclass(frozen=True)
class FrozenLakeConfig(GridConfig):
    goal: tuple[int, int] = (3, 3)
    holes: tuple[tuple[int, int], ...] = FIXED_HOLES

    game = "frozenlake"

    def __post_init__(self):
        cells = [self.start, self.goal, *self.holes]
        for c in cells:
            if not self.in_bounds(*c):
                raise ValueError(f"cell {c} outside {self.width}x{self.length} board")
        if len(set(cells)) != len(cells):
            raise ValueError("holes must be distinct from each other, the start and the goal")

    def outcome(self, state):
        pos = self.position(state)
        if pos == self.goal:
            return WIN
        if pos in self.holes:
            return LOSE
        return None

    def valuation(self, state) -> dict:
        x, y = self.position(state)
        row = {"x": x, "y": y, "goalx": self.goal[0], "goaly": self.goal[1]}
        for i, (hx, hy) in enumerate(self.holes):
            row[f"h{i}x"] = hx
            row[f"h{i}y"] = hy
        return row

    def losing_states(self):
        return list(self.holes)


def fixed(dynamics: str = "standard") -> FrozenLakeConfig:
    return FrozenLakeConfig(4, 4, dynamics=dynamics)


def motivating() -> FrozenLakeConfig:
    return FrozenLakeConfig(4, 4, holes=MOTIVATING_HOLES)


def random_board(rng: random.Random, width: int = 4, length: int = 4, n_holes: int = 3,
                 dynamics: str = "standard") -> FrozenLakeConfig:
    """A board with a random goal and holes on which the goal stays reachable."""
    while True:
        cells = sample_distinct_cells(rng, width, length, n_holes + 1, exclude=[(0, 0)])
        cfg = FrozenLakeConfig(width, length, goal=cells[0], holes=tuple(cells[1:]),
                               dynamics=dynamics)
        if cfg.bfs(cfg.initial_state(), lambda s: cfg.outcome(s) == WIN) is not None:
            return cfg


def var_conf(rng: random.Random, dynamics: str = "standard") -> FrozenLakeConfig:
    return random_board(rng, 4, 4, dynamics=dynamics)


def var_size(rng: random.Random, dynamics: str = "standard") -> FrozenLakeConfig:
    n = rng.randint(3, 5)
    return random_board(rng, n, n, dynamics=dynamics)
