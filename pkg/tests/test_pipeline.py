import json

import pytest

from tslmine import io
from tslmine.envs.grid import TIMEOUT, WIN
from tslmine.miner import Specification
from tslmine.pipeline import (
    PipelineConfig,
    StageError,
    discover,
    lift,
    mine,
    motivating_corpus,
    read_config,
    refine,
    run_pipeline,
    substream,
)


def test_substreams_are_independent_and_repeatable():
    a = [substream(0, "test").random() for _ in range(2)]
    b = [substream(0, "test").random() for _ in range(2)]
    assert a == b
    assert substream(0, "test").random() != substream(0, "board").random()
    assert substream(0, "test").random() != substream(1, "test").random()


def test_blackjack_mines_safety_only():
    assert PipelineConfig(game="blackjack", variant="basic").modes == ("safety",)
    assert PipelineConfig().modes == ("liveness", "safety")
    assert PipelineConfig(mode="liveness").modes == ("liveness",)


def test_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# frozen lake run\ngame = frozenlake\nvariant = var_conf\nn = 6  # small\n"
                 "liveness_bound = none\n")
    cfg = read_config(p, seed=4)
    assert (cfg.game, cfg.variant, cfg.n, cfg.seed, cfg.liveness_bound) == \
        ("frozenlake", "var_conf", 6, 4, None)
    p.write_text("colour = blue\n")
    with pytest.raises(ValueError):
        read_config(p)


def test_bad_config_values():
    with pytest.raises(ValueError):
        PipelineConfig(mode="plain")
    with pytest.raises(ValueError):
        PipelineConfig(game="taxi", variant="var_conf")


def test_test_variant_defaults():
    assert PipelineConfig(variant="fixed").test_env().variant == "var_conf"
    assert PipelineConfig(game="taxi", variant="fixed").test_env().variant == "var_pos"
    assert PipelineConfig(variant="var_size").test_env().variant == "var_size"


@pytest.fixture(scope="module")
def frozen_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fl")
    cfg = PipelineConfig(variant="var_conf", n=6, seed=2, out=str(out), n_test=10)
    return cfg, run_pipeline(cfg)


def test_pipeline_artifacts(frozen_run):
    cfg, res = frozen_run
    names = {p.name for p in res.out.iterdir()}
    assert {"corpus", "discovery.json", "rankings.json", "positive_traces.jsonl",
            "negative_traces.jsonl", "spec.txt", "spec.json", "evaluation.json",
            "template.tsl"} <= names
    assert len(list((res.out / "corpus").iterdir())) == 13
    meta = json.loads((res.out / "spec.json").read_text())
    assert not any(k.endswith("_seconds") for k in meta)
    assert res.spec.meta["discriminates"]
    assert res.evaluation["total"] == 10


def test_pipeline_files_reload(frozen_run):
    cfg, res = frozen_run
    pos, neg = io.read_corpus(res.out / "corpus")
    again = lift(pos, neg, discover(pos, neg).functions, "frozenlake")
    assert again.positives == res.lifted.positives
    assert again.negatives == res.lifted.negatives
    spec = Specification.from_text((res.out / "spec.txt").read_text(), res.lifted.signature)
    assert spec.liveness == res.spec.liveness and spec.safety == res.spec.safety


def test_pipeline_is_repeatable(frozen_run, tmp_path):
    cfg, res = frozen_run
    cfg2 = PipelineConfig(variant="var_conf", n=6, seed=2, out=str(tmp_path), n_test=10)
    run_pipeline(cfg2)
    for name in ("spec.txt", "spec.json", "discovery.json", "evaluation.json", "template.tsl"):
        assert (tmp_path / name).read_bytes() == (res.out / name).read_bytes(), name


def test_one_positive_no_negatives_gives_liveness_only():
    _, pos, _ = motivating_corpus()
    lifted = lift(pos[:1], [], discover(pos[:1], []).functions, "frozenlake")
    spec = mine(lifted, "frozenlake")
    assert spec.liveness is not None and spec.safety == []


def test_timeouts_only_feed_liveness():
    _, pos, neg = motivating_corpus()
    lifted = lift(pos, neg, discover(pos, neg).functions, "frozenlake")
    spec = mine(lifted, "frozenlake", outcomes=[TIMEOUT, TIMEOUT])
    assert spec.safety == [] and spec.meta["liveness_only"] == [0, 1]


def test_identical_positive_and_negative_is_a_mine_error():
    _, pos, _ = motivating_corpus()
    lifted = lift(pos, pos[:1], discover(pos, pos[:1]).functions, "frozenlake")
    with pytest.raises(StageError) as e:
        mine(lifted, "frozenlake")
    assert e.value.stage == "mine"


# -- refinement ---------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def walkthrough_refinement():
    board, pos, neg = motivating_corpus()
    return refine(board, pos, neg, max_iterations=3)


def test_refinement_wins_on_the_third_iteration(walkthrough_refinement):
    st = walkthrough_refinement
    assert st.won and st.iteration == 3
    assert [ep.outcome or TIMEOUT for ep in st.episodes] == [TIMEOUT, "lose", WIN]
    assert len(st.negatives) == 4


def test_first_guess_is_goal_column_and_no_downward_moves(walkthrough_refinement):
    first = walkthrough_refinement.history[0].to_text()
    assert "F (eq x goalx)" in first
    assert "G ![y <- sub1 y]" in first


def test_refinement_cap_reports_failure():
    board, pos, neg = motivating_corpus()
    st = refine(board, pos, neg, max_iterations=1)
    assert st.failed and st.iteration == 1
    assert "G ![y <- sub1 y]" in st.history[0].to_text()


def test_winning_corpus_stops_after_one_iteration(walkthrough_refinement):
    board, pos, _ = motivating_corpus()
    st = refine(board, pos, walkthrough_refinement.negatives, max_iterations=3)
    assert st.won and st.iteration == 1


def test_taxi_liveness_nests_eventually(tmp_path):
    cfg = PipelineConfig(game="taxi", variant="var_pos", n=12, seed=1, out=str(tmp_path))
    res = run_pipeline(cfg, evaluate_spec=False)
    text = res.spec.to_text().splitlines()[1]
    # pick up the passenger, then eventually reach the destination
    assert text == "F (((eq x PASS_x) && (eq y PASS_y)) && F ((eq x DEST_x) && (eq y DEST_y)))"
