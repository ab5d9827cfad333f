"""Generalized ToyText games, corpus generation and evaluation."""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import blackjack, cliffwalking, frozenlake, taxi
from .grid import Episode, GeneratedCorpus

GAMES = ("frozenlake", "cliffwalking", "taxi", "blackjack")

# variant name -> board sampler; "fixed" boards ignore the rng
VARIANTS = {
    "frozenlake": {
        "fixed": lambda rng: frozenlake.fixed(),
        "motivating": lambda rng: frozenlake.motivating(),
        "var_conf": frozenlake.var_conf,
        "var_size": frozenlake.var_size,
    },
    "cliffwalking": {
        "fixed": lambda rng: cliffwalking.fixed(),
        "var_size": cliffwalking.var_size,
        "var_mov_fixed": lambda rng: cliffwalking.fixed("var_mov"),
        "var_mov_size": lambda rng: cliffwalking.var_size(rng, "var_mov"),
    },
    "taxi": {
        "fixed": lambda rng: taxi.fixed(),
        "var_pos": taxi.var_pos,
    },
    "blackjack": {
        s: (lambda rng, s=s: blackjack.BlackjackConfig(strategy=s))
        for s in blackjack.STRATEGIES
    },
}


@dataclass(frozen=True)
class EnvConfig:
    """Which game and board family a corpus or test set is drawn from."""

    game: str = "frozenlake"
    variant: str = "fixed"
    seed: int = 0

    def __post_init__(self):
        if self.game not in VARIANTS:
            raise ValueError(f"unknown game {self.game!r}; pick one of {GAMES}")
        if self.variant not in VARIANTS[self.game]:
            raise ValueError(
                f"{self.game} has no variant {self.variant!r}; "
                f"pick one of {sorted(VARIANTS[self.game])}")

    def sample(self, rng: random.Random):
        return VARIANTS[self.game][self.variant](rng)


def generate_corpus(env: EnvConfig, n_pos: int, n_neg: int | None = None,
                    rng: random.Random | None = None) -> GeneratedCorpus:
    """``n_pos`` positive and ``n_neg`` negative episodes, each on a freshly sampled board."""
    rng = rng or random.Random(env.seed)
    n_neg = n_pos if n_neg is None else n_neg
    corpus = GeneratedCorpus()
    for _ in range(n_pos):
        corpus.positives.extend(env.sample(rng).generate_positive(1, rng))
    for _ in range(n_neg):
        corpus.negatives.extend(env.sample(rng).generate_negative(1, rng))
    return corpus


def sample_configs(env: EnvConfig, k: int, rng: random.Random | None = None) -> list:
    rng = rng or random.Random(env.seed)
    return [env.sample(rng) for _ in range(k)]


__all__ = ["EnvConfig", "Episode", "GeneratedCorpus", "GAMES", "VARIANTS",
           "generate_corpus", "sample_configs", "blackjack", "cliffwalking",
           "frozenlake", "taxi"]
