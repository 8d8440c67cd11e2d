"""Behavior cloning baseline: the actor architecture regressed onto
demonstrated actions."""

import numpy as np
import torch
import torch.nn.functional as F

from .nets import Actor, default_blocks, normalize_state


class BCModel:
    def __init__(self, m, n, blocks=None, channels=64, lr=1e-4, device="cpu",
                 seed=0):
        torch.manual_seed(seed)
        self.m, self.n = m, n
        self.device = torch.device(device)
        self.net = Actor(blocks or default_blocks(m, n), channels).to(self.device)
        self.opt = torch.optim.Adam(self.net.parameters(), lr=lr)

    def train_step(self, batch):
        self.net.train()
        state = normalize_state(
            torch.as_tensor(batch["state"], dtype=torch.float32,
                            device=self.device)[:, None]
        )
        target = torch.as_tensor(batch["action"], dtype=torch.float32,
                                 device=self.device)[:, None]
        out = self.net(state)
        loss = F.mse_loss(out, target)
        self.opt.zero_grad()
        loss.backward()
        self.opt.step()
        return float(loss.detach())

    @torch.no_grad()
    def act(self, state):
        self.net.eval()
        t = torch.as_tensor(np.asarray(state, dtype=np.float32),
                            device=self.device)[None, None]
        return self.net(normalize_state(t))[0, 0].cpu().numpy()

    def save(self, path):
        torch.save({"net": self.net.state_dict(), "m": self.m, "n": self.n},
                   path)


def train_bc(demo_buffer, m, n, steps=2000, batch_size=32, lr=1e-4,
             device="cpu", seed=0, blocks=None, channels=64):
    """Supervised regression of demonstrated actions; returns (model,
    final loss)."""
    model = BCModel(m, n, blocks=blocks, channels=channels, lr=lr,
                    device=device, seed=seed)
    loss = float("nan")
    for _ in range(steps):
        loss = model.train_step(demo_buffer.sample(batch_size))
    return model, loss
