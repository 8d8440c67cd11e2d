import json

import numpy as np
import pytest
import torch

from tablegame_rl.bc import train_bc
from tablegame_rl.buffers import DemoBuffer, ReplayBuffer, load_demo_transitions


def test_replay_ring_and_sampling():
    buf = ReplayBuffer(capacity=4, m=2, n=2, seed=0)
    for i in range(6):
        buf.push(np.full((2, 2), i), np.zeros((2, 2)), -1.0,
                 np.full((2, 2), i + 1), False)
    assert buf.size == 4
    batch = buf.sample(8)
    assert batch["state"].shape == (8, 2, 2)
    assert set(np.unique(batch["state"])) <= {2, 3, 4, 5}


def _write_demos(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def test_demo_loading_truncates_bootstrap_only_on_goal(tmp_path):
    path = tmp_path / "demos.jsonl"
    base = {
        "v": 1, "episode": 0, "state": [[1, 0], [0, 1]],
        "action": [[-1, 1], [1, -1]], "next_state": [[0, 1], [1, 0]],
        "reward": -1.0, "reward_variant": "unit_penalty",
    }
    _write_demos(path, [
        dict(base, step=0, done=True, info={"termination": "goal"}),
        dict(base, step=1, done=True, info={"termination": "timeout"}),
        dict(base, step=2, done=False, info={}),
    ])
    arrays = load_demo_transitions(path)
    assert arrays["done"].tolist() == [1.0, 0.0, 0.0]
    buf = DemoBuffer(arrays, seed=0)
    assert buf.size == 3
    sample = buf.sample(5)
    assert sample["action"].shape == (5, 2, 2)


def test_demo_loading_rejects_empty(tmp_path):
    path = tmp_path / "demos.jsonl"
    path.write_text("")
    with pytest.raises(ValueError):
        load_demo_transitions(path)


def test_bc_perfect_fit_single_transition(tmp_path):
    state = np.array([[2, 0], [1, 3]], dtype=np.float32)
    action = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=np.float32)
    arrays = {
        "state": state[None],
        "action": action[None],
        "reward": np.zeros(1, dtype=np.float32),
        "next_state": state[None],
        "done": np.ones(1, dtype=np.float32),
    }
    buf = DemoBuffer(arrays, seed=0)
    model, loss = train_bc(buf, 2, 2, steps=400, batch_size=4, lr=1e-2,
                           seed=1, blocks=1, channels=8)
    assert loss < 1e-3
    out = model.act(state)
    assert np.abs(out - action).max() < 0.1


def test_bc_output_in_tanh_range():
    arrays = {
        "state": np.random.default_rng(0).integers(0, 4, size=(8, 3, 3)).astype(np.float32),
        "action": np.zeros((8, 3, 3), dtype=np.float32),
        "reward": np.zeros(8, dtype=np.float32),
        "next_state": np.zeros((8, 3, 3), dtype=np.float32),
        "done": np.zeros(8, dtype=np.float32),
    }
    model, _loss = train_bc(DemoBuffer(arrays), 3, 3, steps=5, blocks=1,
                            channels=4)
    out = model.act(arrays["state"][0])
    assert (np.abs(out) < 1).all()
