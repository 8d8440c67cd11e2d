"""Actor and critic networks: stacked convolution blocks that keep the
spatial dimensions, so one architecture serves any board size."""

import torch
import torch.nn as nn


class ConvBlock(nn.Module):
    def __init__(self, c_in, c_out):
        super().__init__()
        self.conv = nn.Conv2d(c_in, c_out, kernel_size=3, padding=1)
        self.bn = nn.BatchNorm2d(c_out)
        self.act = nn.ReLU()

    def forward(self, x):
        return self.act(self.bn(self.conv(x)))


def default_blocks(m, n):
    """Deeper nets for bigger boards: 4 blocks up to 5x5, 6 up to 10x10,
    8 beyond."""
    size = max(m, n)
    if size <= 5:
        return 4
    if size <= 10:
        return 6
    return 8


class Actor(nn.Module):
    """State grid in, continuous move map in (-1, 1) out."""

    def __init__(self, blocks=4, channels=64):
        super().__init__()
        layers = [ConvBlock(1, channels)]
        layers += [ConvBlock(channels, channels) for _ in range(blocks - 1)]
        self.body = nn.Sequential(*layers)
        self.head = nn.Conv2d(channels, 1, kernel_size=3, padding=1)

    def forward(self, state):
        # (B, 1, m, n) -> (B, 1, m, n)
        return torch.tanh(self.head(self.body(state)))


class Critic(nn.Module):
    """State and action stacked as channels; global average pooling before
    the value head."""

    def __init__(self, blocks=4, channels=64):
        super().__init__()
        layers = [ConvBlock(2, channels)]
        layers += [ConvBlock(channels, channels) for _ in range(blocks - 1)]
        self.body = nn.Sequential(*layers)
        self.head = nn.Linear(channels, 1)

    def forward(self, state, action):
        x = torch.cat([state, action], dim=1)
        x = self.body(x)
        x = x.mean(dim=(2, 3))
        return self.head(x).squeeze(-1)


def normalize_state(table):
    """Scale a nonnegative integer table into [0, 1] by its own peak so the
    policy sees the same pattern whatever the margin bound."""
    peak = table.amax(dim=(2, 3), keepdim=True).clamp(min=1)
    return table / peak
