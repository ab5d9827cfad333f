"""CliffWalking: walk around a cliff along the bottom edge to the far corner.

The cliff covers ``cliffXMin <= x <= cliffXMax`` for every row ``y < cliffHeight``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .grid import LOSE, WIN, GridConfig


@dataclass(frozen=True)
class CliffWalkingConfig(GridConfig):
    cliff_height: int = 1

    game = "cliffwalking"
    timeout_negatives = True
    negative_mix = (0.2, 0.15, 0.3)

    def __post_init__(self):
        if not 1 <= self.cliff_height < self.length:
            raise ValueError("cliff height must leave a free row")
        if self.width < 3:
            raise ValueError("the board needs at least three columns")

    @property
    def goal(self) -> tuple[int, int]:
        return self.width - 1, 0

    @property
    def cliff_x(self) -> tuple[int, int]:
        return 1, self.width - 2

    def in_cliff(self, x: int, y: int) -> bool:
        lo, hi = self.cliff_x
        return lo <= x <= hi and y < self.cliff_height

    def outcome(self, state):
        x, y = self.position(state)
        if (x, y) == self.goal:
            return WIN
        if self.in_cliff(x, y):
            return LOSE
        return None

    def valuation(self, state) -> dict:
        x, y = self.position(state)
        lo, hi = self.cliff_x
        return {"x": x, "y": y, "goalx": self.goal[0], "goaly": self.goal[1],
                "cliffXMin": lo, "cliffXMax": hi, "cliffHeight": self.cliff_height}

    def losing_states(self):
        lo, hi = self.cliff_x
        return [(x, y) for x in range(lo, hi + 1) for y in range(self.cliff_height)]


def fixed(dynamics: str = "standard") -> CliffWalkingConfig:
    return CliffWalkingConfig(12, 4, cliff_height=1, dynamics=dynamics)


def var_size(rng: random.Random, dynamics: str = "standard") -> CliffWalkingConfig:
    """Random board with h in [1,3], w in [3,12], l in [4,6] and a reachable goal."""
    while True:
        cfg = CliffWalkingConfig(rng.randint(3, 12), rng.randint(4, 6),
                                 cliff_height=rng.randint(1, 3), dynamics=dynamics)
        try:
            cfg.winning_path()
        except ValueError:
            continue
        return cfg
