import os
import re

import numpy as np
import pytest

from tablegame_rl.env_client import EnvClient, ProtocolError

ENV_CFG = (
    "m=3\nn=3\ngoal=0,0\nlb=1\nub=5\nreward_variant=unit_penalty\n"
    "max_steps=25\nseed=1\n"
)


@pytest.fixture
def client(tmp_path):
    cfg = tmp_path / "env.cfg"
    cfg.write_text(ENV_CFG)
    with EnvClient(cfg) as cl:
        yield cl


def test_config_echo(client):
    cfg = client.config()
    assert cfg["m"] == 3 and cfg["n"] == 3 and cfg["max_steps"] == 25


def test_reset_deterministic(client):
    s1, _ = client.reset(seed=9)
    s2, _ = client.reset(seed=9)
    assert (s1 == s2).all()
    rows = s1.sum(axis=1)
    assert (rows >= 1).all() and (rows <= 5).all()


def test_project_then_step_is_legal(client):
    state, info = client.reset(seed=4)
    rng = np.random.default_rng(0)
    steps = 0
    while not info.get("terminal") and steps < 10:
        action = client.project(rng.uniform(-1, 1, size=(3, 3)))
        state2, reward, done, step_info = client.step(action)
        assert (state2 == state + action).all()
        state = state2
        steps += 1
        if done:
            break
    assert client.illegal_moves == 0


def test_illegal_action_raises_and_counts(client):
    client.reset(seed=4)
    with pytest.raises(ProtocolError):
        client.step(np.zeros((3, 3), dtype=np.int64))
    assert client.illegal_moves == 1


def test_projection_respects_sparsity_cap(client):
    state, _ = client.reset(seed=5)
    action = client.project(np.random.default_rng(1).uniform(-1, 1, (3, 3)),
                            c1=1, c2=2)
    assert int((action == 1).sum()) <= 2


def test_harness_never_imports_the_environment_package():
    src_dir = os.path.join(os.path.dirname(__file__), "..", "src",
                           "tablegame_rl")
    pattern = re.compile(r"^\s*(import tablegame\b|from tablegame\b)",
                         re.MULTILINE)
    for name in os.listdir(src_dir):
        if name.endswith(".py"):
            with open(os.path.join(src_dir, name)) as fh:
                assert not pattern.search(fh.read()), name
