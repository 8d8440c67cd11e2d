"""Twin-delayed deterministic policy gradient with a Q-filtered
demonstration loss.

Critics regress on the pre-projection continuous action (projection is a
deterministic part of the environment); the actor follows critic 1, delayed
relative to critic updates, plus a supervised term toward demonstrated
actions that fires only where the demonstration out-values the actor.
"""

import copy
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from .nets import Actor, Critic, default_blocks, normalize_state


@dataclass
class AgentConfig:
    gamma: float = 0.99
    lr: float = 1e-4
    batch_size: int = 32
    noise_std: float = 0.2
    demo_fraction: float = 0.10
    demo_count: int = 100
    tau: float = 0.005
    policy_delay: int = 2
    channels: int = 64
    blocks: int = None
    demo_weight: float = 1.0
    q_filter: str = "on"  # on | always_on | always_off

    def __post_init__(self):
        if not 0 <= self.gamma < 1:
            raise ValueError("discount must lie in [0, 1)")
        if not 0 <= self.demo_fraction <= 1:
            raise ValueError("demo fraction must lie in [0, 1]")
        if self.q_filter not in ("on", "always_on", "always_off"):
            raise ValueError(f"unknown q_filter mode {self.q_filter!r}")


def to_tensor(batch, device):
    return {k: torch.as_tensor(v, dtype=torch.float32, device=device)
            for k, v in batch.items()}


class TD3Agent:
    def __init__(self, m, n, cfg=None, device="cpu", seed=0):
        self.cfg = cfg or AgentConfig()
        self.m, self.n = m, n
        self.device = torch.device(device)
        torch.manual_seed(seed)
        blocks = self.cfg.blocks or default_blocks(m, n)
        self.actor = Actor(blocks, self.cfg.channels).to(self.device)
        self.critic1 = Critic(blocks, self.cfg.channels).to(self.device)
        self.critic2 = Critic(blocks, self.cfg.channels).to(self.device)
        self.actor_target = copy.deepcopy(self.actor)
        self.critic1_target = copy.deepcopy(self.critic1)
        self.critic2_target = copy.deepcopy(self.critic2)
        for net in (self.actor_target, self.critic1_target, self.critic2_target):
            for p in net.parameters():
                p.requires_grad_(False)
        self.actor_opt = torch.optim.Adam(self.actor.parameters(), lr=self.cfg.lr)
        self.critic_opt = torch.optim.Adam(
            list(self.critic1.parameters()) + list(self.critic2.parameters()),
            lr=self.cfg.lr,
        )
        self.rng = np.random.default_rng(seed)
        self.updates = 0

    # ------------------------------------------------------------------
    # acting
    # ------------------------------------------------------------------

    def _state_tensor(self, state):
        t = torch.as_tensor(np.asarray(state, dtype=np.float32),
                            device=self.device)
        if t.ndim == 2:
            t = t[None, None]
        elif t.ndim == 3:
            t = t[:, None]
        return normalize_state(t)

    @torch.no_grad()
    def act(self, state):
        """Deterministic continuous action map in (-1, 1)."""
        self.actor.eval()
        out = self.actor(self._state_tensor(state))
        return out[0, 0].cpu().numpy()

    def explore(self, state):
        """Actor output plus Gaussian exploration noise, clipped."""
        noise = self.rng.normal(0.0, self.cfg.noise_std, size=(self.m, self.n))
        return np.clip(self.act(state) + noise, -1.0, 1.0)

    # ------------------------------------------------------------------
    # losses
    # ------------------------------------------------------------------

    def td3_target(self, batch):
        """y = r + gamma * min_i Q'_i(s', pi'(s')); terminal transitions
        (goal reached) truncate the bootstrap."""
        with torch.no_grad():
            next_state = normalize_state(batch["next_state"][:, None])
            next_action = self.actor_target(next_state)
            q1 = self.critic1_target(next_state, next_action)
            q2 = self.critic2_target(next_state, next_action)
            target_q = torch.min(q1, q2)
            return batch["reward"] + self.cfg.gamma * (1.0 - batch["done"]) * target_q

    def critic_loss(self, batch):
        y = self.td3_target(batch)
        state = normalize_state(batch["state"][:, None])
        action = batch["action"][:, None]
        q1 = self.critic1(state, action)
        q2 = self.critic2(state, action)
        return F.mse_loss(q1, y) + F.mse_loss(q2, y)

    def actor_loss(self, batch):
        state = normalize_state(batch["state"][:, None])
        action = self.actor(state)
        return -self.critic1(state, action).mean()

    def demo_loss(self, batch):
        """Mean squared distance to the demonstrated action, gated per
        sample by the Q-filter (demonstration must out-value the actor)."""
        state = normalize_state(batch["state"][:, None])
        demo_action = batch["action"][:, None]
        actor_action = self.actor(state)
        if self.cfg.q_filter == "always_on":
            gate = torch.ones(len(demo_action), device=self.device)
        elif self.cfg.q_filter == "always_off":
            gate = torch.zeros(len(demo_action), device=self.device)
        else:
            with torch.no_grad():
                q_demo = self.critic1(state, demo_action)
                q_actor = self.critic1(state, actor_action)
                gate = (q_demo > q_actor).float()
        per_sample = ((demo_action - actor_action) ** 2).sum(dim=(1, 2, 3))
        return (per_sample * gate).mean()

    # ------------------------------------------------------------------
    # updates
    # ------------------------------------------------------------------

    def _polyak(self, net, target):
        with torch.no_grad():
            for p, tp in zip(net.parameters(), target.parameters()):
                tp.mul_(1 - self.cfg.tau).add_(self.cfg.tau * p)
            for b, tb in zip(net.buffers(), target.buffers()):
                tb.copy_(b)

    def update(self, replay, demo=None):
        """One TD3 update from mixed replay/demo batches; the actor (and
        targets) move every policy_delay critic updates."""
        self.actor.train()
        self.critic1.train()
        self.critic2.train()
        n_demo = 0
        if demo is not None and self.cfg.demo_fraction > 0:
            n_demo = max(1, int(round(self.cfg.batch_size * self.cfg.demo_fraction)))
        n_replay = self.cfg.batch_size - n_demo
        parts = [replay.sample(n_replay)]
        demo_batch = None
        if n_demo:
            demo_batch = to_tensor(demo.sample(n_demo), self.device)
        batch = to_tensor(
            {k: np.concatenate([p[k] for p in parts]) for k in parts[0]},
            self.device,
        )
        if demo_batch is not None:
            batch = {k: torch.cat([batch[k], demo_batch[k]]) for k in batch}

        c_loss = self.critic_loss(batch)
        self.critic_opt.zero_grad()
        c_loss.backward()
        self.critic_opt.step()

        stats = {"critic_loss": float(c_loss.detach())}
        self.updates += 1
        if self.updates % self.cfg.policy_delay == 0:
            a_loss = self.actor_loss(batch)
            if demo_batch is not None:
                a_loss = a_loss + self.cfg.demo_weight * self.demo_loss(demo_batch)
            self.actor_opt.zero_grad()
            a_loss.backward()
            self.actor_opt.step()
            self._polyak(self.actor, self.actor_target)
            self._polyak(self.critic1, self.critic1_target)
            self._polyak(self.critic2, self.critic2_target)
            stats["actor_loss"] = float(a_loss.detach())
        return stats

    # ------------------------------------------------------------------
    # persistence
    # ------------------------------------------------------------------

    def save(self, path):
        torch.save(
            {
                "actor": self.actor.state_dict(),
                "critic1": self.critic1.state_dict(),
                "critic2": self.critic2.state_dict(),
                "m": self.m,
                "n": self.n,
                "cfg": self.cfg.__dict__,
            },
            path,
        )

    @classmethod
    def load(cls, path, device="cpu"):
        blob = torch.load(path, map_location=device, weights_only=False)
        cfg = AgentConfig(**blob["cfg"])
        agent = cls(blob["m"], blob["n"], cfg, device=device)
        agent.actor.load_state_dict(blob["actor"])
        agent.critic1.load_state_dict(blob["critic1"])
        agent.critic2.load_state_dict(blob["critic2"])
        agent.actor_target = copy.deepcopy(agent.actor)
        agent.critic1_target = copy.deepcopy(agent.critic1)
        agent.critic2_target = copy.deepcopy(agent.critic2)
        return agent
