"""Non-learning baselines: the greedy demonstrator and exhaustive BFS.

The greedy player picks, among candidate moves legal at the current state,
one that minimizes the mass remaining on the goal entries after the move
(with the literal maximize-the-goal reading available behind a flag); BFS
explores the whole fiber for exact shortest solutions and reachability
proofs, and doubles as the ground-truth oracle for the game.
"""

from collections import deque
from dataclasses import dataclass

from .game import Transition, is_terminal
from .moves import circuit_list

BFS_UNREACHABLE = "unreachable"


def default_move_set(m, n, cell_budget=25):
    """Circuits of the grid; degree-2 circuits only when the full census is
    impractically large for per-step scans."""
    if m * n <= cell_budget:
        return circuit_list(m, n)
    return circuit_list(m, n, max_degree=2)


def goal_mass(table, goal):
    return int(sum(table[i, j] for (i, j) in goal))


def greedy_step(state, goal, move_set=None, literal=False):
    """A legal move optimizing the goal criterion, or None when no legal
    candidate strictly improves it.

    The criterion is the post-move mass on the goal entries: minimized by
    default (the reading consistent with zeroing the goal), maximized when
    `literal` is set.  Ties break to the entrywise lexicographically
    smallest move.
    """
    t = state.table
    if move_set is None:
        move_set = default_move_set(*t.shape)
    base = goal_mass(t, goal)
    best = None
    best_key = None
    for g in move_set:
        if not ((t + g) >= 0).all():
            continue
        mass = goal_mass(t + g, goal)
        gain = base - mass if not literal else mass - base
        if gain <= 0:
            continue
        key = (-gain, tuple(g.ravel()))
        if best_key is None or key < best_key:
            best_key = key
            best = g
    return best


def greedy_rollout(env, max_steps=None, move_set=None, literal=False):
    """Run the greedy player from the environment's current state.

    Returns (transitions, success); every transition is produced by the real
    environment step, so demonstrations replay exactly.
    """
    cfg = env.cfg
    if max_steps is None:
        max_steps = cfg.max_steps
    transitions = []
    success = is_terminal(env.state, cfg.goal)
    for _ in range(max_steps):
        if is_terminal(env.state, cfg.goal):
            success = True
            break
        action = greedy_step(env.state, cfg.goal, move_set=move_set,
                             literal=literal)
        if action is None:
            break
        state = env.state
        nxt, reward, done, info = env.step(action)
        transitions.append(
            Transition(state.table, action, nxt.table, reward, done, info)
        )
        if done:
            success = info.get("termination") == "goal"
            break
    return transitions, success


@dataclass
class BfsResult:
    status: str  # "solved" | "unreachable" | "budget_exhausted"
    path: list = None
    explored: int = 0


def bfs_solve(state, goal, move_set=None, node_cap=10 ** 6):
    """Exact shortest action path to a goal-satisfying table, by breadth
    first search over the fiber.

    Returns BfsResult: 'solved' with the move path, 'unreachable' when the
    whole fiber was exhausted without reaching the goal, or
    'budget_exhausted' past the node cap.
    """
    t0 = state.table
    if move_set is None:
        move_set = default_move_set(*t0.shape)
    if all(t0[i, j] == 0 for (i, j) in goal):
        return BfsResult(status="solved", path=[], explored=1)
    start = t0.tobytes()
    visited = {start: None}
    arrays = {start: t0}
    queue = deque([start])
    while queue:
        key = queue.popleft()
        cur = arrays[key]
        for mi, g in enumerate(move_set):
            nxt = cur + g
            if (nxt < 0).any():
                continue
            nkey = nxt.tobytes()
            if nkey in visited:
                continue
            visited[nkey] = (key, mi)
            if len(visited) > node_cap:
                return BfsResult(status="budget_exhausted",
                                 explored=len(visited))
            if all(nxt[i, j] == 0 for (i, j) in goal):
                path = []
                k = nkey
                while visited[k] is not None:
                    pk, pmi = visited[k]
                    path.append(move_set[pmi])
                    k = pk
                path.reverse()
                return BfsResult(status="solved", path=path,
                                 explored=len(visited))
            arrays[nkey] = nxt
            queue.append(nkey)
    return BfsResult(status=BFS_UNREACHABLE, explored=len(visited))
