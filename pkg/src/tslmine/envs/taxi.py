"""Taxi: collect the passenger at one colored stand and drop them at another.

Pickup happens on arrival at the passenger's stand. The drop-off is the final
state of an episode: ending anywhere but the destination after a pickup is a
loss. Walls block cells and never appear in the logs.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .grid import WIN, GridConfig

COLORS = ("RED", "GREEN", "YELLOW", "BLUE")
STANDS = {"RED": (0, 0), "GREEN": (4, 0), "YELLOW": (0, 4), "BLUE": (3, 4)}
FIXED_WALLS = (((1, 3), (1, 4)), ((3, 1), (3, 2)))


@dataclass(frozen=True)
class TaxiConfig(GridConfig):
    passenger: str = "RED"
    destination: str = "GREEN"
    walls: tuple = FIXED_WALLS

    game = "taxi"

    def __post_init__(self):
        if self.passenger == self.destination:
            raise ValueError("passenger and destination stands must differ")
        for name in (self.passenger, self.destination):
            if name not in STANDS:
                raise ValueError(f"unknown stand {name!r}")
        cells = [c for w in self.walls for c in w]
        if self.start in cells or any(c in cells for c in STANDS.values()):
            raise ValueError("walls may not cover the start or a stand")

    @property
    def wall_cells(self) -> frozenset:
        return frozenset(c for w in self.walls for c in w)

    def blocked(self, x, y):
        return (x, y) in self.wall_cells

    def initial_state(self):
        return (*self.start, self.start == STANDS[self.passenger])

    def _advance(self, state, nx, ny):
        return (nx, ny, state[2] or (nx, ny) == STANDS[self.passenger])

    def outcome(self, state):
        if state[2] and self.position(state) == STANDS[self.destination]:
            return WIN
        return None

    def valuation(self, state) -> dict:
        x, y = self.position(state)
        row = {"x": x, "y": y}
        dest, pas = STANDS[self.destination], STANDS[self.passenger]
        row.update(DEST_x=dest[0], DEST_y=dest[1], PASS_x=pas[0], PASS_y=pas[1])
        for c in COLORS:
            row[f"{c}_x"], row[f"{c}_y"] = STANDS[c]
        return row

    def wrong_stands(self) -> list[str]:
        return [c for c in COLORS if c not in (self.passenger, self.destination)]

    def deviations(self, rng):
        out = []
        src = self.initial_state()
        for c in self.wrong_stands():
            target = STANDS[c]
            # pick up, then drop at the wrong stand
            path = self.bfs(src, lambda s, t=target: s[2] and s[:2] == t)
            if path is not None:
                out.append(path)
        # drive to the destination without the passenger
        dest = STANDS[self.destination]
        path = self.bfs(src, lambda s: not s[2] and s[:2] == dest)
        if path is not None:
            out.append(path)
        # near misses: stop next to the passenger, then drive on to the destination
        px, py = STANDS[self.passenger]
        for cell in ((px - 1, py), (px + 1, py), (px, py - 1), (px, py + 1)):
            if not self.in_bounds(*cell) or self.blocked(*cell) or cell == dest:
                continue
            first = self.bfs(src, lambda s, c=cell: not s[2] and s[:2] == c)
            if first is None:
                continue
            mid = self._states_along(first)[-1]
            rest = self.bfs(mid, lambda s: not s[2] and s[:2] == dest)
            if rest is not None:
                out.append(first + rest)
        # or pick up and stop next to the destination
        dx, dy = dest
        for cell in ((dx - 1, dy), (dx + 1, dy), (dx, dy - 1), (dx, dy + 1)):
            if not self.in_bounds(*cell) or self.blocked(*cell):
                continue
            path = self.bfs(src, lambda s, c=cell: s[2] and s[:2] == c)
            if path is not None:
                out.append(path)
        return out

    def board_constants(self):
        out = super().board_constants()
        names = (("w0", "w00"), ("w1", "w11"))
        for (a, b), (ca, cb) in zip(names, self.walls):
            out[f"{a}x"], out[f"{a}y"] = ca
            out[f"{b}x"], out[f"{b}y"] = cb
        return out


def fixed() -> TaxiConfig:
    return TaxiConfig(5, 5, start=(2, 2))


def var_pos(rng: random.Random) -> TaxiConfig:
    """Random start, walls, passenger and destination on the 5x5 board."""
    stands = set(STANDS.values())
    while True:
        passenger, destination = rng.sample(COLORS, 2)
        walls = []
        taken = set(stands)
        for _ in range(2):
            # a wall is two vertically stacked cells
            x = rng.randint(1, 3)
            y = rng.randint(0, 3)
            pair = ((x, y), (x, y + 1))
            if any(c in taken for c in pair):
                break
            taken.update(pair)
            walls.append(pair)
        if len(walls) < 2:
            continue
        free = [(x, y) for x in range(5) for y in range(5) if (x, y) not in taken]
        start = rng.choice(free)
        try:
            cfg = TaxiConfig(5, 5, start=start, passenger=passenger,
                             destination=destination, walls=tuple(walls))
            cfg.winning_path()
        except ValueError:
            continue
        return cfg
