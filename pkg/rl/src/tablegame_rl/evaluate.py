"""Evaluation: greedy (noise-free) policy rollouts through the wire
protocol, reporting success rate and mean episode length."""

import numpy as np

from .env_client import ProtocolError


def run_episode(client, policy, seed, max_steps, project_kwargs=None):
    """One episode; returns (solved, steps, undiscounted return)."""
    project_kwargs = project_kwargs or {}
    state, info = client.reset(seed)
    if info.get("terminal"):
        return True, 0, 0.0
    total = 0.0
    for step_idx in range(max_steps):
        target = policy(state)
        try:
            action = client.project(target, **project_kwargs)
        except ProtocolError:
            return False, step_idx, total
        state, reward, done, step_info = client.step(action)
        total += reward
        if done:
            solved = step_info.get("termination") == "goal"
            return solved, step_idx + 1, total
    return False, max_steps, total


def evaluate(client, policy, episodes=100, seed0=10_000, max_steps=None,
             project_kwargs=None):
    """Fixed-seed evaluation sweep; returns a metrics dict."""
    if max_steps is None:
        max_steps = int(client.config()["max_steps"])
    solved = 0
    lengths = []
    returns = []
    for ep in range(episodes):
        ok, steps, ret = run_episode(client, policy, seed0 + ep, max_steps,
                                     project_kwargs)
        solved += ok
        lengths.append(steps)
        returns.append(ret)
    return {
        "success_rate": solved / episodes,
        "mean_episode_length": float(np.mean(lengths)),
        "mean_neg_episode_length": -float(np.mean(lengths)),
        "mean_return": float(np.mean(returns)),
    }
