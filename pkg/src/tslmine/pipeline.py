"""End-to-end orchestration: generate, discover, lift, mine, evaluate, refine.

Every stage writes its artifact under one output directory and can be rerun
from the previous stage's files.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import io
from .discovery import DiscoveryParams, DiscoveryResult, synthesize_covering_functions
from .envs import EnvConfig, GeneratedCorpus, frozenlake, generate_corpus, sample_configs
from .envs.grid import TIMEOUT, WIN
from .envs.planner import TraceModel, evaluate_win_rate, execute, plan_episode
from .envs.templates import emit_template
from .lifting import Lifted, LiftingConfig, bit_blast, lift_corpus
from .miner import MiningConfig, Sample, Specification, mine_specification
from .synth import Function, parse_term

log = logging.getLogger(__name__)

BLACKJACK_ORDERED = ("standThreshold", "standVsWeakMin")

# boards a corpus trained on one fixed board is tested on
TEST_VARIANT = {
    ("frozenlake", "fixed"): "var_conf",
    ("frozenlake", "motivating"): "var_conf",
    ("cliffwalking", "fixed"): "var_size",
    ("cliffwalking", "var_mov_fixed"): "var_mov_size",
    ("taxi", "fixed"): "var_pos",
}


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it for the CLI exit message."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def substream(seed: int, name: str) -> random.Random:
    """Independent generator for one named use of the root seed."""
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass
class PipelineConfig:
    game: str = "frozenlake"
    variant: str = "fixed"
    n: int = 12
    n_neg: int | None = None
    seed: int = 0
    # read the corpus from here instead of generating one
    corpus: str | None = None
    out: str = "out"
    k_max: int = 2
    budget_ms: float = 100.0
    max_term_size: int = 7
    # liveness | safety | both
    mode: str = "both"
    liveness_bound: int | None = None
    safety_bound: int | None = None
    test_variant: str | None = None
    n_test: int = 50
    horizon: int | None = None

    def __post_init__(self):
        if self.mode not in ("liveness", "safety", "both"):
            raise ValueError("mode must be liveness, safety or both")
        EnvConfig(self.game, self.variant)
        if self.corpus is not None and not Path(self.corpus).is_dir():
            raise ValueError(f"corpus directory {self.corpus} does not exist")

    @property
    def env(self) -> EnvConfig:
        return EnvConfig(self.game, self.variant, self.seed)

    @property
    def modes(self) -> tuple:
        if self.game == "blackjack" and self.mode == "both":
            return ("safety",)  # hands have no goal to reach
        return ("liveness", "safety") if self.mode == "both" else (self.mode,)

    def test_env(self) -> EnvConfig:
        v = self.test_variant or TEST_VARIANT.get((self.game, self.variant), self.variant)
        return EnvConfig(self.game, v, self.seed)

    def discovery_params(self) -> DiscoveryParams:
        return DiscoveryParams(self.k_max, self.budget_ms, self.max_term_size)


def _convert(text: str, default):
    if text.lower() in ("none", "null", ""):
        return None
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    try:
        return int(text)
    except ValueError:
        return text


def read_config(path, **overrides) -> PipelineConfig:
    """``key = value`` lines, ``#`` comments; unknown keys are an error."""
    known = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    values = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        key, text = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ValueError(f"{path}:{n}: unknown key {key!r}")
        default = known[key].default
        values[key] = _convert(text, default)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**values)


# -- per-game settings ----------------------------------------------------------------


def lifting_config(game: str) -> LiftingConfig:
    return LiftingConfig(ordered_constants=BLACKJACK_ORDERED if game == "blackjack" else ())


def mining_configs(game: str, exempt=frozenset(), liveness_bound=None,
                   safety_bound=None) -> tuple[MiningConfig, MiningConfig]:
    """Liveness and safety settings for one game.

    Grid games mine over predicates only: the moves are fixed by the template,
    so update atoms would only restate how the demonstrations happened to walk.
    Blackjack keeps the one update the player controls, ``stood``.
    """
    if game == "blackjack":
        kw = dict(constants=exempt, update_targets=frozenset({"stood"}))
        return (MiningConfig("liveness", liveness_bound, **kw),
                MiningConfig("safety", safety_bound, unary_ops=("not",), **kw))
    kw = dict(constants=exempt, open_end=True, update_targets=frozenset())
    return (MiningConfig("liveness", liveness_bound, **kw),
            MiningConfig("safety", safety_bound, unary_ops=("not",), terminal_failures=True,
                         patience=2, **kw))


# -- stages ----------------------------------------------------------------------------


def generate(config: PipelineConfig) -> GeneratedCorpus:
    try:
        return generate_corpus(config.env, config.n, config.n_neg,
                               rng=substream(config.seed, "generation"))
    except ValueError as e:
        raise StageError("generate", str(e)) from e


def variables_of(positives, negatives) -> list[str]:
    for log_ in list(positives) + list(negatives):
        if log_:
            return list(log_[0])
    raise StageError("discover", "corpus has no states")


def discover(positives, negatives, params: DiscoveryParams | None = None) -> DiscoveryResult:
    logs = list(positives) + list(negatives)
    if not logs:
        raise StageError("discover", "empty corpus")
    result = synthesize_covering_functions(logs, variables_of(positives, negatives), params)
    if not result.success:
        raise StageError("discover", f"{len(result.unexplained)} transitions left unexplained")
    return result


def functions_from_report(report: dict) -> list[Function]:
    return [Function.from_term(parse_term(f["term"]), f["arity"]) for f in report["functions"]]


def lift(positives, negatives, functions, game: str) -> Lifted:
    try:
        return lift_corpus(positives, negatives, variables_of(positives, negatives),
                           functions, lifting_config(game))
    except ValueError as e:
        raise StageError("lift", str(e)) from e


def mine(lifted: Lifted, game: str, modes=("liveness", "safety"), outcomes=None,
         liveness_bound=None, safety_bound=None) -> Specification:
    """Mine with the game's settings. Negatives that only timed out are left to liveness."""
    live, safe = mining_configs(game, lifted.rank.exempt, liveness_bound, safety_bound)
    timeouts = [i for i, o in enumerate(outcomes or []) if o == TIMEOUT]
    try:
        return mine_specification(Sample(lifted.positives, lifted.negatives), live, safe,
                                  liveness_only=timeouts, modes=modes)
    except ValueError as e:  # includes inconsistent samples
        raise StageError("mine", str(e)) from e
    except RuntimeError as e:
        raise StageError("mine", str(e)) from e


def trace_model(lifted: Lifted, game: str) -> TraceModel:
    return TraceModel(lifted.signature, lifted.rank, lifting_config(game).ordered_constants)


def evaluate(spec: Specification, model: TraceModel, config: PipelineConfig) -> dict:
    env = config.test_env()
    rng = substream(config.seed, "test")
    if config.game == "blackjack":
        from .envs.blackjack import adherence_classify

        held = generate_corpus(env, config.n_test // 2, config.n_test - config.n_test // 2, rng=rng)
        episodes = held.positives + held.negatives
        acc = adherence_classify(spec, episodes, model)
        return {"metric": "adherence", "accuracy": acc, "episodes": len(episodes),
                "test_variant": env.variant}
    boards = sample_configs(env, config.n_test, rng)
    ev = evaluate_win_rate(spec, boards, model, config.horizon)
    return {"metric": "win_rate", "wins": ev.wins, "total": ev.total, "planned": ev.planned,
            "outcomes": ev.outcomes, "test_variant": env.variant}


# -- persistence -------------------------------------------------------------------------


def _dump(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_rankings(path: Path, lifted: Lifted) -> None:
    from .synth import format_term

    data = {v: [{"function": f.name, "term": format_term(f.term), "inputs": list(w), "count": c}
                for f, w, c in entries]
            for v, entries in lifted.rank.entries.items()}
    _dump(path, {"exempt": sorted(lifted.rank.exempt), "entries": data})


def write_spec(directory: Path, spec: Specification) -> None:
    (directory / "spec.txt").write_text(spec.to_text())
    meta = {k: v for k, v in spec.meta.items() if not k.endswith("_seconds")}
    # timings vary run to run; keep them out of the spec files
    (directory / "spec.json").write_text(
        Specification(spec.liveness, spec.safety, meta, spec.open_end).sidecar() + "\n")


def load_corpus(config: PipelineConfig, out: Path):
    """Positive and negative logs plus per-negative outcomes (None when unknown)."""
    if config.corpus is not None:
        pos, neg = io.read_corpus(config.corpus)
        return pos, neg, io.read_outcomes(config.corpus, len(neg))
    corpus = generate(config)
    pos = [list(e.log) for e in corpus.positives]
    neg = [list(e.log) for e in corpus.negatives]
    outcomes = corpus.outcomes if config.game != "blackjack" else None
    io.write_corpus(out / "corpus", pos, neg, outcomes)
    return pos, neg, outcomes


@dataclass
class PipelineResult:
    spec: Specification
    evaluation: dict
    discovery: DiscoveryResult
    lifted: Lifted
    template: str
    out: Path


def run_pipeline(config: PipelineConfig, evaluate_spec: bool = True) -> PipelineResult:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    pos, neg, outcomes = load_corpus(config, out)
    disc = discover(pos, neg, config.discovery_params())
    report = disc.report()
    report.pop("timings")
    _dump(out / "discovery.json", report)
    lifted = lift(pos, neg, disc.functions, config.game)
    write_rankings(out / "rankings.json", lifted)
    io.write_traces(out / "positive_traces.jsonl", lifted.positives)
    io.write_traces(out / "negative_traces.jsonl", lifted.negatives)
    spec = mine(lifted, config.game, config.modes, outcomes, config.liveness_bound,
                config.safety_bound)
    write_spec(out, spec)
    model = trace_model(lifted, config.game)
    evaluation = {}
    if evaluate_spec:
        try:
            evaluation = evaluate(spec, model, config)
        except ValueError as e:
            raise StageError("evaluate", str(e)) from e
        _dump(out / "evaluation.json", evaluation)
    board = config.env.sample(substream(config.seed, "template"))
    try:
        template = emit_template(spec, lifted.positives + lifted.negatives, board)
    except ValueError as e:
        raise StageError("template", str(e)) from e
    (out / "template.tsl").write_text(template)
    return PipelineResult(spec, evaluation, disc, lifted, template, out)


# -- refinement --------------------------------------------------------------------------

# the walk-through board's four demonstrations, as (x, y) positions
MOTIVATING_POSITIVES = (
    ((0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 3), (3, 3)),
    ((0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (2, 3), (3, 3)),
)
MOTIVATING_NEGATIVES = (
    ((0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (1, 2), (1, 1)),
    ((0, 0), (0, 1), (0, 2), (1, 2), (1, 1)),
)


def motivating_corpus():
    """(board, positive logs, negative logs) of the four-trace walk-through."""
    board = frozenlake.motivating()
    as_log = lambda path: [board.valuation(p) for p in path]
    return board, [as_log(p) for p in MOTIVATING_POSITIVES], [as_log(p) for p in MOTIVATING_NEGATIVES]


def refine_configs(exempt) -> tuple[MiningConfig, MiningConfig]:
    # the full grammar, updates included: the walk-through's first safety
    # guess is a statement about moves
    return (MiningConfig("liveness", constants=exempt, open_end=True),
            MiningConfig("safety", constants=exempt, open_end=True, unary_ops=("not",),
                         patience=2))


@dataclass
class RefinementState:
    positives: list
    negatives: list
    iteration: int = 0
    history: list = field(default_factory=list)
    episodes: list = field(default_factory=list)
    won: bool = False

    @property
    def failed(self) -> bool:
        return not self.won


def refine(board, positives, negatives, max_iterations: int = 3,
           params: DiscoveryParams | None = None) -> RefinementState:
    """Mine, plan on ``board``, replay under the real rules; any failed replay
    becomes a new negative. Stops at the first win or after ``max_iterations``."""
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    state = RefinementState(list(positives), list(negatives))
    while state.iteration < max_iterations:
        state.iteration += 1
        disc = discover(state.positives, state.negatives, params)
        lifted = lift(state.positives, state.negatives, disc.functions, board.game)
        live, safe = refine_configs(lifted.rank.exempt)
        try:
            spec = mine_specification(Sample(lifted.positives, lifted.negatives), live, safe)
        except (ValueError, RuntimeError) as e:
            raise StageError("refine", f"iteration {state.iteration}: {e}") from e
        state.history.append(spec)
        plan = plan_episode(spec, board, trace_model(lifted, board.game))
        if plan is None:
            state.episodes.append(None)
            log.info("iteration %d: no plan", state.iteration)
            break
        run = execute(board, plan)
        state.episodes.append(run)
        log.info("iteration %d: %s", state.iteration, run.outcome or TIMEOUT)
        if run.outcome == WIN:
            state.won = True
            break
        # a fall (or running out of moves) is a fresh counterexample
        state.negatives.append(list(run.log))
    return state


def write_refinement(directory, state: RefinementState) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for i, spec in enumerate(state.history, 1):
        (d / f"spec_{i}.txt").write_text(spec.to_text())
    runs = []
    for ep in state.episodes:
        if ep is None:
            runs.append({"outcome": "no-plan"})
        else:
            runs.append({"outcome": ep.outcome or TIMEOUT, "actions": list(ep.actions),
                         "positions": [[r["x"], r["y"]] for r in ep.log]})
    _dump(d / "refinement.json", {"iterations": state.iteration, "won": state.won,
                                  "failed": state.failed, "runs": runs})
    io.write_corpus(d / "corpus", state.positives, state.negatives)


# -- bit-blasting baseline ---------------------------------------------------------------


def bitblast_mine(positives, negatives, modes=("liveness", "safety")) -> tuple[Specification, int]:
    """Propositional baseline: bit atoms and the plain miner. Returns (spec, bit width)."""
    from .lifting import bit_width

    width = bit_width(list(positives) + list(negatives))
    pos = bit_blast(positives, width)
    neg = bit_blast(negatives, width)
    try:
        spec = mine_specification(Sample(pos, neg), MiningConfig("liveness"),
                                  MiningConfig("safety"), modes=modes)
    except (ValueError, RuntimeError) as e:
        raise StageError("bitblast", str(e)) from e
    return spec, width


__all__ = ["PipelineConfig", "PipelineResult", "RefinementState", "StageError",
           "bitblast_mine", "discover", "evaluate", "generate", "lift", "mine",
           "mining_configs", "motivating_corpus", "read_config", "refine", "run_pipeline",
           "substream"]
