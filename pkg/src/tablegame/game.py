"""The 2-way table game: reach zeros on the goal entries by legal moves.

A state is a nonnegative integer table; a legal action is a nonzero
{-1,0,1} matrix with zero row and column sums that keeps the table
nonnegative, so the row and column sums fixed at episode start never
change.  The episode ends when every goal entry is zero, or on timeout.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import IllegalMoveError, InvalidInputError
from .moves import random_legal_circuit

REWARD_VARIANTS = ("unit_penalty", "eq1")


@dataclass(frozen=True)
class GameConfig:
    m: int
    n: int
    goal: tuple
    lb: int = 0
    ub: int = 20
    reward_variant: str = "unit_penalty"
    max_steps: int = 400
    seed: int = 0

    def __post_init__(self):
        goal = tuple(sorted((int(i), int(j)) for (i, j) in self.goal))
        object.__setattr__(self, "goal", goal)
        if self.m < 1 or self.n < 1:
            raise InvalidInputError("grid must be at least 1x1")
        if not goal:
            raise InvalidInputError("goal set must be nonempty")
        for (i, j) in goal:
            if not (0 <= i < self.m and 0 <= j < self.n):
                raise InvalidInputError(f"goal entry {(i, j)} outside the grid")
        if not (0 <= self.lb <= self.ub):
            raise InvalidInputError("need 0 <= lb <= ub")
        if self.reward_variant not in REWARD_VARIANTS:
            raise InvalidInputError(f"unknown reward variant {self.reward_variant!r}")
        if self.max_steps < 1:
            raise InvalidInputError("max_steps must be positive")


@dataclass(frozen=True)
class GameState:
    table: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    step_count: int = 0

    @classmethod
    def from_table(cls, table, step_count=0):
        t = np.asarray(table, dtype=np.int64)
        if t.ndim != 2 or (t < 0).any():
            raise InvalidInputError("state table must be 2-d and nonnegative")
        t = t.copy()
        t.setflags(write=False)
        return cls(t, t.sum(axis=1), t.sum(axis=0), step_count)


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray
    next_state: np.ndarray
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


def generate_instance(cfg, rng, zero_frac=0.3, force_zero=()):
    """Random starting state: each row sum drawn from [lb, ub] and spread
    over the cells that were not zeroed at initialization.

    A random subset of cells starts pinned to zero (plus any `force_zero`
    cells); goal entries are NOT excluded and may start nonzero.
    """
    zero_mask = rng.random((cfg.m, cfg.n)) < zero_frac
    forced = set((int(i), int(j)) for (i, j) in force_zero)
    for (i, j) in forced:
        zero_mask[i, j] = True
    if cfg.lb > 0:
        for i in range(cfg.m):
            if zero_mask[i].all():
                candidates = [j for j in range(cfg.n) if (i, j) not in forced]
                if candidates:
                    zero_mask[i, candidates[int(rng.integers(len(candidates)))]] = False
    table = np.zeros((cfg.m, cfg.n), dtype=np.int64)
    for i in range(cfg.m):
        free = np.flatnonzero(~zero_mask[i])
        if len(free) == 0:
            continue
        total = int(rng.integers(cfg.lb, cfg.ub + 1))
        split = rng.multinomial(total, np.ones(len(free)) / len(free))
        table[i, free] = split
    return GameState.from_table(table)


def generate_solvable_instance(cfg, rng, walk_len):
    """Start from a goal-satisfying table and walk backwards with random
    legal moves, guaranteeing solvability within `walk_len` steps (the walk
    preserves the margins, so the goal table stays in the fiber)."""
    state = generate_instance(cfg, rng, force_zero=cfg.goal)
    table = state.table.copy()
    for _ in range(walk_len):
        g = random_legal_circuit(table, rng)
        if g is None:
            break
        table += g
    return GameState.from_table(table)


def is_legal(state, action):
    """Action in the move space and the next table stays nonnegative."""
    a = np.asarray(action)
    t = state.table
    if a.shape != t.shape:
        return False
    if not np.issubdtype(a.dtype, np.integer):
        return False
    if not np.isin(a, (-1, 0, 1)).all():
        return False
    if a.sum(axis=0).any() or a.sum(axis=1).any():
        return False
    if not a.any():
        return False
    return bool((t + a >= 0).all())


def is_terminal(state, goal):
    """Every goal entry is zero."""
    t = state.table
    return all(t[i, j] == 0 for (i, j) in goal)


def _reward(cfg, next_state, goal_met):
    if goal_met:
        return 0.0
    if cfg.reward_variant == "unit_penalty":
        return -1.0
    # magnitude 1/max|entry| of the new table, surfaced negated
    peak = int(np.abs(next_state.table).max())
    return -1.0 / peak


def step(state, action, cfg):
    """Apply a legal action; returns (next_state, reward, done, info).

    info['termination'] is 'goal' or 'timeout' when done.  Illegal actions
    raise IllegalMoveError rather than being clipped; stepping past
    max_steps raises as well.
    """
    if state.step_count >= cfg.max_steps:
        raise IllegalMoveError("episode already exhausted max_steps")
    if not is_legal(state, action):
        raise IllegalMoveError("action is not legal in this state")
    nxt = GameState.from_table(
        state.table + np.asarray(action, dtype=np.int64),
        step_count=state.step_count + 1,
    )
    goal_met = is_terminal(nxt, cfg.goal)
    timeout = nxt.step_count >= cfg.max_steps and not goal_met
    done = goal_met or timeout
    info = {}
    if goal_met:
        info["termination"] = "goal"
    elif timeout:
        info["termination"] = "timeout"
    return nxt, _reward(cfg, nxt, goal_met), done, info


class TableGameEnv:
    """Stateful wrapper around the pure game functions, one episode at a time."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.state = None
        self._rng = None

    def reset(self, seed=None, solvable_walk=None):
        if seed is None:
            seed = self.cfg.seed
        self._rng = np.random.default_rng(seed)
        if solvable_walk is None:
            self.state = generate_instance(self.cfg, self._rng)
        else:
            self.state = generate_solvable_instance(self.cfg, self._rng, solvable_walk)
        return self.state

    def step(self, action):
        if self.state is None:
            raise InvalidInputError("reset the environment first")
        nxt, reward, done, info = step(self.state, action, self.cfg)
        self.state = nxt
        return nxt, reward, done, info

    def legal_actions(self, limit=None):
        from .moves import enumerate_actions_2way

        out = []
        for a in enumerate_actions_2way(self.cfg.m, self.cfg.n):
            if is_legal(self.state, a):
                out.append(a)
                if limit is not None and len(out) >= limit:
                    break
        return out
