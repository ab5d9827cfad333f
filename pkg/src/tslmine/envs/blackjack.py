"""Blackjack hands played by a fixed strategy.

A log row is the state before each decision. Standing appends one row with
``stood`` set; hitting appends the new total and ends the hand on a bust.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .grid import Episode

HIT = "hit"
STAND = "stand"
# ten-valued cards are four times as likely; the ace is 11
DECK = (2, 3, 4, 5, 6, 7, 8, 9, 10, 10, 10, 10, 11)
STRATEGIES = ("threshold", "conservative", "basic")

# log keys and the names used for them in formula tables
ALIASES = {"c": "count", "sThresh": "standThreshold", "sWeak": "standVsWeakMin",
           "dealer": "isWeakDealer"}


def is_weak(dealer: int) -> bool:
    return 2 <= dealer <= 6


def threshold_action(c: int, weak: bool, s_thresh: int = 17, s_weak: int = 12) -> str:
    return STAND if c >= s_thresh else HIT


def conservative_action(c: int, weak: bool, s_thresh: int = 17, s_weak: int = 12) -> str:
    if c >= s_thresh:
        return STAND
    if c >= s_weak and weak:
        return STAND
    return HIT


def basic_action(c: int, weak: bool, s_thresh: int = 17, s_weak: int = 12) -> str:
    # same cases as conservative, checked in a different order
    if c >= s_thresh:
        return STAND
    if c <= s_weak - 1:
        return HIT
    if weak:
        return STAND
    return HIT


ACTIONS = {"threshold": threshold_action, "conservative": conservative_action,
           "basic": basic_action}


@dataclass(frozen=True)
class BlackjackStrategy:
    name: str
    stand_threshold: int = 17
    stand_vs_weak_min: int = 12

    def __post_init__(self):
        if self.name not in ACTIONS:
            raise ValueError(f"unknown strategy {self.name!r}")

    def action(self, count: int, weak: bool) -> str:
        return ACTIONS[self.name](count, weak, self.stand_threshold, self.stand_vs_weak_min)


@dataclass(frozen=True)
class BlackjackConfig:
    strategy: str = "threshold"
    stand_threshold: int = 17
    stand_vs_weak_min: int = 12
    seed: int = 0

    game = "blackjack"

    @property
    def policy(self) -> BlackjackStrategy:
        return BlackjackStrategy(self.strategy, self.stand_threshold, self.stand_vs_weak_min)

    def row(self, count: int, stood: bool, dealer: int) -> dict:
        return {"count": count, "stood": stood, "standThreshold": self.stand_threshold,
                "standVsWeakMin": self.stand_vs_weak_min, "isWeakDealer": is_weak(dealer)}

    @property
    def variables(self) -> list[str]:
        return list(self.row(0, False, 2))

    def deal(self, rng: random.Random) -> tuple[int, int, list[int]]:
        # the opening total is drawn uniformly so that low hands show up as often as high ones
        count = rng.randint(4, 20)
        dealer = rng.choice(DECK)
        draws = [rng.choice(DECK) for _ in range(12)]
        return count, dealer, draws

    def play(self, count: int, dealer: int, draws, flip_at: int | None = None,
             rng: random.Random | None = None) -> Episode:
        """Play one hand. ``flip_at`` inverts that one decision; with ``rng`` every
        decision is a coin flip instead."""
        policy = self.policy
        rows = [self.row(count, False, dealer)]
        actions = []
        adheres = True
        draws = iter(draws)
        while True:
            want = policy.action(count, is_weak(dealer))
            act = want
            if rng is not None:
                act = rng.choice((HIT, STAND))
            elif len(actions) == flip_at:
                act = HIT if want == STAND else STAND
            adheres = adheres and act == want
            actions.append(act)
            if act == STAND:
                rows.append(self.row(count, True, dealer))
                break
            card = next(draws)
            if card == 11 and count + 11 > 21:
                card = 1
            count += card
            rows.append(self.row(count, False, dealer))
            if count > 21:
                break
        label = "positive" if adheres else "negative"
        return Episode(self, tuple(actions), tuple(rows), label, "bust" if count > 21 else STAND)

    def decisions(self, count: int, dealer: int, draws) -> int:
        return len(self.play(count, dealer, draws).actions)

    def generate_positive(self, n: int, rng: random.Random) -> list[Episode]:
        return [self.play(*self.deal(rng)) for _ in range(n)]

    def generate_negative(self, n: int, rng: random.Random, p_random: float = 0.5) -> list[Episode]:
        """Hands that break the strategy: one flipped decision, or random play
        that happens to deviate somewhere."""
        out = []
        while len(out) < n:
            count, dealer, draws = self.deal(rng)
            if rng.random() < p_random:
                ep = self.play(count, dealer, draws, rng=rng)
                if ep.positive:
                    continue
            else:
                k = rng.randrange(self.decisions(count, dealer, draws))
                ep = self.play(count, dealer, draws, flip_at=k)
            out.append(ep)
        return out

    def adheres(self, episode: Episode) -> bool:
        """Ground truth: every decision in the log matches the strategy."""
        policy = self.policy
        rows = episode.log
        for prev, cur in zip(rows, rows[1:]):
            act = STAND if cur["stood"] else HIT
            if act != policy.action(prev["count"], bool(prev["isWeakDealer"])):
                return False
        return True

    def board_constants(self) -> dict:
        return {"MIN_HAND": 4, "MAX_HAND": 31, "MIN_DEALER": 2, "MAX_DEALER": 11}


def adherence_classify(spec, episodes, model) -> float:
    """Share of episodes where the safety conjunction agrees with the adherence label.

    Logs are lifted with the constant-update fallback, so hands that draw cards
    never seen in training can still be judged.
    """
    if not episodes:
        return 0.0
    hits = 0
    for ep in episodes:
        trace = model.lift(list(ep.log), fallback=True)
        hits += spec.safety_holds_on(trace) == ep.positive
    return hits / len(episodes)
