"""Command line front end.

Each stage reads what the previous one wrote under ``--out``::

    tslmine generate --env frozenlake --variant var_conf --n 12 --out run
    tslmine discover --out run
    tslmine lift --out run
    tslmine mine --out run
    tslmine evaluate --out run

``pipeline`` runs all of them in one go. Failures exit with status 2 and a
message tagged with the failing stage.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .miner import Specification
from .pipeline import (
    PipelineConfig,
    StageError,
    bitblast_mine,
    discover,
    evaluate,
    functions_from_report,
    generate,
    lift,
    mine,
    motivating_corpus,
    read_config,
    refine,
    run_pipeline,
    substream,
    trace_model,
    write_refinement,
    write_rankings,
    write_spec,
)

log = logging.getLogger("tslmine")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--env", dest="game", help="frozenlake, cliffwalking, taxi or blackjack")
    common.add_argument("--variant", help="board family, e.g. var_conf, or a blackjack strategy")
    common.add_argument("--n", type=int, help="positive (and negative) demonstrations")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--mode", choices=("liveness", "safety", "both"))
    common.add_argument("--corpus", help="read logs from this directory instead of OUT/corpus")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="tslmine", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write demonstration logs")
    sub.add_parser("discover", parents=[common], help="find update functions")
    sub.add_parser("lift", parents=[common], help="turn logs into TSL_f traces")
    sub.add_parser("mine", parents=[common], help="mine liveness and safety")
    ev = sub.add_parser("evaluate", parents=[common], help="win rate or adherence of a mined spec")
    ev.add_argument("--n-test", dest="n_test", type=int)
    ev.add_argument("--test-variant", dest="test_variant")
    pl = sub.add_parser("pipeline", parents=[common], help="every stage end to end")
    pl.add_argument("--n-test", dest="n_test", type=int)
    pl.add_argument("--test-variant", dest="test_variant")
    rf = sub.add_parser("refine", parents=[common], help="mine, play, add the failure, repeat")
    rf.add_argument("--max-iterations", type=int, default=3)
    sub.add_parser("bitblast", parents=[common], help="bit-atom baseline")
    return p


_CONFIG_KEYS = ("game", "variant", "n", "seed", "out", "mode", "corpus", "n_test", "test_variant")


def _config(args) -> PipelineConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    if args.config:
        return read_config(args.config, **overrides)
    return PipelineConfig(**{k: v for k, v in overrides.items() if v is not None})


def _corpus_dir(cfg: PipelineConfig) -> Path:
    return Path(cfg.corpus) if cfg.corpus else Path(cfg.out) / "corpus"


def _read_corpus(cfg: PipelineConfig, stage: str):
    d = _corpus_dir(cfg)
    try:
        pos, neg = io.read_corpus(d)
    except (OSError, ValueError) as e:
        raise StageError(stage, str(e)) from e
    if not pos and not neg:
        raise StageError(stage, f"no logs in {d}")
    return pos, neg, io.read_outcomes(d, len(neg))


def _read_discovery(cfg: PipelineConfig, stage: str):
    p = Path(cfg.out) / "discovery.json"
    if not p.exists():
        raise StageError(stage, f"{p} not found; run discover first")
    return functions_from_report(json.loads(p.read_text()))


def _lifted(cfg, stage):
    pos, neg, outcomes = _read_corpus(cfg, stage)
    return lift(pos, neg, _read_discovery(cfg, stage), cfg.game), outcomes


def cmd_generate(cfg: PipelineConfig) -> None:
    corpus = generate(cfg)
    outcomes = corpus.outcomes if cfg.game != "blackjack" else None
    paths = io.write_corpus(Path(cfg.out) / "corpus", [list(e.log) for e in corpus.positives],
                            [list(e.log) for e in corpus.negatives], outcomes)
    print(f"wrote {len(paths)} files to {Path(cfg.out) / 'corpus'}")


def cmd_discover(cfg: PipelineConfig) -> None:
    pos, neg, _ = _read_corpus(cfg, "discover")
    result = discover(pos, neg, cfg.discovery_params())
    report = result.report()
    report.pop("timings")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "discovery.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(", ".join(f["name"] for f in report["functions"]))


def cmd_lift(cfg: PipelineConfig) -> None:
    lifted, _ = _lifted(cfg, "lift")
    out = Path(cfg.out)
    write_rankings(out / "rankings.json", lifted)
    io.write_traces(out / "positive_traces.jsonl", lifted.positives)
    io.write_traces(out / "negative_traces.jsonl", lifted.negatives)
    print(f"lifted {len(lifted.positives)} positive and {len(lifted.negatives)} negative traces")


def cmd_mine(cfg: PipelineConfig) -> None:
    lifted, outcomes = _lifted(cfg, "mine")
    spec = mine(lifted, cfg.game, cfg.modes, outcomes, cfg.liveness_bound, cfg.safety_bound)
    write_spec(Path(cfg.out), spec)
    print(spec.to_text(), end="")


def cmd_evaluate(cfg: PipelineConfig) -> None:
    lifted, _ = _lifted(cfg, "evaluate")
    p = Path(cfg.out) / "spec.txt"
    if not p.exists():
        raise StageError("evaluate", f"{p} not found; run mine first")
    try:
        spec = Specification.from_text(p.read_text(), lifted.signature)
        spec.open_end = cfg.game != "blackjack"
        report = evaluate(spec, trace_model(lifted, cfg.game), cfg)
    except ValueError as e:
        raise StageError("evaluate", str(e)) from e
    (Path(cfg.out) / "evaluation.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _print_evaluation(report)


def _print_evaluation(report: dict) -> None:
    if report["metric"] == "win_rate":
        print(f"wins {report['wins']}/{report['total']} on {report['test_variant']}")
    else:
        print(f"adherence {report['accuracy']:.3f} over {report['episodes']} episodes")


def cmd_pipeline(cfg: PipelineConfig) -> None:
    result = run_pipeline(cfg)
    print(result.spec.to_text(), end="")
    _print_evaluation(result.evaluation)


def cmd_refine(cfg: PipelineConfig, max_iterations: int) -> None:
    if cfg.corpus:
        pos, neg, _ = _read_corpus(cfg, "refine")
        board = cfg.env.sample(substream(cfg.seed, "board"))
    else:
        board, pos, neg = motivating_corpus()
    state = refine(board, pos, neg, max_iterations, cfg.discovery_params())
    write_refinement(Path(cfg.out), state)
    for i, spec in enumerate(state.history, 1):
        ep = state.episodes[i - 1]
        outcome = "no-plan" if ep is None else (ep.outcome or "timeout")
        print(f"-- iteration {i}: {outcome}")
        print(spec.to_text(), end="")
    if state.failed:
        raise StageError("refine", f"no winning specification after {state.iteration} iterations")


def cmd_bitblast(cfg: PipelineConfig) -> None:
    pos, neg, _ = _read_corpus(cfg, "bitblast")
    spec, width = bitblast_mine(pos, neg, cfg.modes)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bitblast_spec.txt").write_text(spec.to_text())
    print(f"# {width} bits per integer")
    print(spec.to_text(), end="")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = _config(args)
    except (OSError, ValueError, TypeError) as e:
        print(f"error [config]: {e}", file=sys.stderr)
        return 2
    try:
        if args.command == "refine":
            cmd_refine(cfg, args.max_iterations)
        else:
            globals()[f"cmd_{args.command}"](cfg)
    except StageError as e:
        print(f"error [{e.stage}]: {str(e).split('] ', 1)[-1]}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
