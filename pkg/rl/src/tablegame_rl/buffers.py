"""Replay and demonstration buffers (numpy ring storage)."""

import json

import numpy as np


class ReplayBuffer:
    def __init__(self, capacity, m, n, seed=0):
        self.capacity = capacity
        self.state = np.zeros((capacity, m, n), dtype=np.float32)
        self.action = np.zeros((capacity, m, n), dtype=np.float32)
        self.next_state = np.zeros((capacity, m, n), dtype=np.float32)
        self.reward = np.zeros(capacity, dtype=np.float32)
        self.done = np.zeros(capacity, dtype=np.float32)
        self.size = 0
        self.pos = 0
        self.rng = np.random.default_rng(seed)

    def push(self, state, action, reward, next_state, done):
        i = self.pos
        self.state[i] = state
        self.action[i] = action
        self.reward[i] = reward
        self.next_state[i] = next_state
        self.done[i] = float(done)
        self.pos = (self.pos + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size):
        idx = self.rng.integers(0, self.size, size=batch_size)
        return {
            "state": self.state[idx],
            "action": self.action[idx],
            "reward": self.reward[idx],
            "next_state": self.next_state[idx],
            "done": self.done[idx],
        }


def load_demo_transitions(path):
    """Parse a demos.jsonl file (the environment's export format) into flat
    transition arrays; bootstrap is truncated only on goal termination."""
    states, actions, rewards, next_states, dones = [], [], [], [], []
    with open(path) as fh:
        for ln in fh:
            if not ln.strip():
                continue
            rec = json.loads(ln)
            states.append(np.array(rec["state"], dtype=np.float32))
            actions.append(np.array(rec["action"], dtype=np.float32))
            rewards.append(float(rec["reward"]))
            next_states.append(np.array(rec["next_state"], dtype=np.float32))
            terminal = rec["done"] and rec.get("info", {}).get(
                "termination") == "goal"
            dones.append(float(terminal))
    if not states:
        raise ValueError(f"no transitions in {path}")
    return {
        "state": np.stack(states),
        "action": np.stack(actions),
        "reward": np.array(rewards, dtype=np.float32),
        "next_state": np.stack(next_states),
        "done": np.array(dones, dtype=np.float32),
    }


class DemoBuffer:
    """Fixed buffer over pre-collected demonstration transitions."""

    def __init__(self, arrays, seed=0):
        self.arrays = arrays
        self.size = len(arrays["reward"])
        self.rng = np.random.default_rng(seed)

    @classmethod
    def from_file(cls, path, seed=0):
        return cls(load_demo_transitions(path), seed=seed)

    def sample(self, batch_size):
        idx = self.rng.integers(0, self.size, size=batch_size)
        return {k: v[idx] for k, v in self.arrays.items()}
