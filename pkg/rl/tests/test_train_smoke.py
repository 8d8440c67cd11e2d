import csv
import os

from tablegame_rl.train import load_run_config, train

SMOKE = os.path.join(os.path.dirname(__file__), "..", "configs", "smoke.cfg")


def test_smoke_training_run(tmp_path):
    kv = load_run_config(SMOKE)
    kv["out_dir"] = str(tmp_path / "run")
    kv["total_steps"] = "400"
    kv["eval_interval"] = "200"
    kv["eval_episodes"] = "10"
    kv["demos"] = str(tmp_path / "demos.jsonl")
    logs = []
    result = train(kv, log=logs.append)

    metrics_path = result["metrics_path"]
    with open(metrics_path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) >= 2
    # every action reached the environment already legal
    assert all(int(r["illegal_moves"]) == 0 for r in rows)
    # losses stay finite (non-divergence) and evaluations produced rates
    for r in rows:
        assert r["critic_loss"] not in ("nan", "inf")
        assert 0.0 <= float(r["success_rate"]) <= 1.0
    assert os.path.exists(os.path.join(result["out_dir"], "agent.pt"))
    assert os.path.exists(os.path.join(result["out_dir"], "bc.pt"))
    assert any("bc:" in ln for ln in logs)
