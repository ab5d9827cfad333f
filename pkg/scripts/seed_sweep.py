"""Run the generalization and adherence settings over a range of seeds.

    python3 scripts/seed_sweep.py --seeds 0-9 --jobs 4
"""
import argparse
import json
import tempfile
from concurrent.futures import ProcessPoolExecutor

from tslmine.pipeline import PipelineConfig, StageError, run_pipeline

SETTINGS = [
    ("frozenlake", "var_conf", 12),
    ("frozenlake", "var_size", 12),
    ("cliffwalking", "var_size", 8),
    ("taxi", "var_pos", 12),
    ("blackjack", "threshold", 8),
    ("blackjack", "conservative", 12),
    ("blackjack", "basic", 12),
]


def one(job):
    game, variant, n, seed = job
    with tempfile.TemporaryDirectory() as d:
        try:
            res = run_pipeline(PipelineConfig(game=game, variant=variant, n=n, seed=seed, out=d))
        except StageError as e:
            return job, {"error": str(e)}
    ev = res.evaluation
    score = ev["accuracy"] if ev["metric"] == "adherence" else ev["wins"]
    return job, {"score": score, "spec": res.spec.to_text()}


def seeds(text):
    lo, _, hi = text.partition("-")
    return range(int(lo), int(hi or lo) + 1)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--seeds", default="0-4")
    p.add_argument("--jobs", type=int, default=4)
    p.add_argument("--game")
    p.add_argument("--json")
    args = p.parse_args()
    jobs = [(g, v, n, s) for g, v, n in SETTINGS for s in seeds(args.seeds)
            if args.game in (None, g)]
    rows = []
    with ProcessPoolExecutor(args.jobs) as ex:
        for (g, v, n, s), r in ex.map(one, jobs):
            print(f"{g:13s} {v:13s} n={n:<3d} seed={s:<3d} {r.get('score', r.get('error'))}",
                  flush=True)
            rows.append({"game": g, "variant": v, "n": n, "seed": s, **r})
    if args.json:
        with open(args.json, "w") as f:
            json.dump(rows, f, indent=2)


if __name__ == "__main__":
    main()
