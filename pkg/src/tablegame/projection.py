"""Exact projection of a continuous action onto the legal move set.

Splitting the projected action into binary positive and negative parts makes
the objective separable: each cell independently costs |1-a|^d, |-1-a|^d, or
|a|^d depending on whether it ends up +1, -1, or 0.  The solver is a
depth-first branch and bound over cells with row/column balance pruning and
an admissible per-cell suffix bound; no external solver is involved and the
optimum is certified exact.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ProjectionInfeasibleError
from .game import GameState
from .moves import enumerate_actions_2way


@dataclass(frozen=True)
class ProjectionProblem:
    target: np.ndarray
    state: GameState = None
    d: int = 2
    c1: int = None
    c2: int = None
    respect_state: bool = True

    def __post_init__(self):
        t = np.asarray(self.target, dtype=float)
        if t.ndim != 2:
            raise InvalidInputError("target must be a 2-d array")
        if not np.isfinite(t).all():
            raise InvalidInputError("target must be finite")
        object.__setattr__(self, "target", t)
        if self.d not in (1, 2):
            raise InvalidInputError("norm d must be 1 or 2")
        if self.c1 is not None and self.c1 < 1:
            raise InvalidInputError("c1 must be at least 1 when set")
        if self.c1 is not None and self.c2 is not None and self.c1 > self.c2:
            raise InvalidInputError("need c1 <= c2")
        if self.respect_state and self.state is None:
            raise InvalidInputError("respect_state needs a state")
        if self.state is not None and self.state.table.shape != t.shape:
            raise InvalidInputError("state and target shapes differ")


def _cell_costs(p):
    """cost[v+1][cell] for v in (-1, 0, +1), flattened row-major."""
    a = p.target.ravel()
    costs = []
    for v in (-1.0, 0.0, 1.0):
        c = np.abs(v - a)
        if p.d == 2:
            c = c * c
        costs.append(c)
    return costs


def _allowed_minus(p):
    """Cells where -1 is permitted (nonzero state mass when respecting it)."""
    if not p.respect_state:
        return np.ones(p.target.shape, dtype=bool).ravel()
    return (p.state.table > 0).ravel()


def action_distance(p, action):
    """The objective value of a candidate action, summed row-major."""
    a = np.asarray(action, dtype=float).ravel()
    t = p.target.ravel()
    total = 0.0
    for v, x in zip(a, t):
        c = abs(v - x)
        total += c * c if p.d == 2 else c
    return total


def _project_swaps_only(p, minus_ok, c1):
    """Exact projection when c2 == 2: every legal action is a rectangle
    swap, so enumerate the near-minimal band vectorized and re-rank it with
    the sequential distance and lex tie-break."""
    if c1 > 2:
        raise ProjectionInfeasibleError("c1 > 2 with c2 == 2 is empty")
    m, n = p.target.shape
    if m < 2 or n < 2:
        raise ProjectionInfeasibleError("no swap fits the grid")
    cost_m1, cost_0, cost_p1 = (c.reshape(m, n) for c in _cell_costs(p))
    dp = cost_p1 - cost_0
    dm = np.where(minus_ok.reshape(m, n), cost_m1 - cost_0, np.inf)
    candidates = []
    best_delta = np.inf
    deltas = {}
    for i1 in range(m):
        for i2 in range(i1 + 1, m):
            delta = (dp[i1][:, None] + dm[i1][None, :]) + (
                dm[i2][:, None] + dp[i2][None, :]
            )
            np.fill_diagonal(delta, np.inf)
            deltas[(i1, i2)] = delta
            dmin = delta.min()
            if dmin < best_delta:
                best_delta = dmin
    if not np.isfinite(best_delta):
        raise ProjectionInfeasibleError("no legal action satisfies the constraints")
    for (i1, i2), delta in deltas.items():
        for j1, j2 in zip(*np.nonzero(delta <= best_delta + 1e-9)):
            a = np.zeros((m, n), dtype=np.int64)
            a[i1, int(j1)] = a[i2, int(j2)] = 1
            a[i1, int(j2)] = a[i2, int(j1)] = -1
            candidates.append(a)
    return min(candidates, key=lambda a: (action_distance(p, a), tuple(a.ravel())))


def _best_swap_seed(p, minus_ok, c1, c2):
    """Cheapest legal rectangle swap (+1/-1 on two rows and two columns), or
    None when the count bounds rule them out.  Used only as an incumbent."""
    if not (c1 <= 2 <= c2):
        return None
    m, n = p.target.shape
    if m < 2 or n < 2:
        return None
    cost_m1, cost_0, cost_p1 = (c.reshape(m, n) for c in _cell_costs(p))
    dp = cost_p1 - cost_0
    dm = np.where(minus_ok.reshape(m, n), cost_m1 - cost_0, np.inf)
    best = None
    best_delta = np.inf
    for i1 in range(m):
        for i2 in range(i1 + 1, m):
            # delta[j1, j2]: +1 at (i1,j1),(i2,j2), -1 at (i1,j2),(i2,j1)
            delta = (dp[i1][:, None] + dm[i1][None, :]) + (
                dm[i2][:, None] + dp[i2][None, :]
            )
            np.fill_diagonal(delta, np.inf)
            j1, j2 = np.unravel_index(np.argmin(delta), delta.shape)
            if delta[j1, j2] < best_delta:
                best_delta = delta[j1, j2]
                best = (i1, i2, int(j1), int(j2))
    if best is None or not np.isfinite(best_delta):
        return None
    i1, i2, j1, j2 = best
    a = np.zeros((m, n), dtype=np.int64)
    a[i1, j1] = a[i2, j2] = 1
    a[i1, j2] = a[i2, j1] = -1
    return a


def project_action(p):
    """The legal action nearest the target, exactly.

    Minimizes the d-norm distance subject to zero row/column sums, entries
    in {-1,0,1}, at least one +1 (the zero action is excluded), the optional
    c1 <= #(+1) <= c2 bounds, and, when respect_state, no -1 on a zero entry
    of the state so the next table stays nonnegative.  Ties break to the
    entrywise lexicographically smallest action.  Raises
    ProjectionInfeasibleError when the constraint set is empty.
    """
    m, n = p.target.shape
    ncells = m * n
    cost_m1, cost_0, cost_p1 = _cell_costs(p)
    minus_ok = _allowed_minus(p)
    c1 = max(1, p.c1 or 1)
    c2 = p.c2 if p.c2 is not None else ncells
    if c2 == 2:
        # the legal set degenerates to the rectangle swaps; solve directly
        return _project_swaps_only(p, minus_ok, c1)

    # Admissible bound.  comp[i][j][s] = cheapest way to assign cells j..n-1
    # of row i so they sum to s (row balance built in, columns relaxed);
    # row_tail[i] = cheapest zero-sum completion of rows i..m-1.
    big = float("inf")
    comp = []
    for i in range(m):
        layer = [{0: 0.0}]
        for j in range(n - 1, -1, -1):
            idx = i * n + j
            nxt = layer[0]
            cur = {}
            choices = [(0, cost_0[idx]), (1, cost_p1[idx])]
            if minus_ok[idx]:
                choices.append((-1, cost_m1[idx]))
            for s, c in nxt.items():
                for v, cv in choices:
                    key = s + v
                    val = cv + c
                    if val < cur.get(key, big):
                        cur[key] = val
            layer.insert(0, cur)
        comp.append(layer)
    row_tail = [0.0] * (m + 1)
    for i in range(m - 1, -1, -1):
        row_tail[i] = comp[i][0][0] + row_tail[i + 1]

    def lower_bound(idx, row_sum):
        i, j = divmod(idx, n)
        if idx == ncells:
            return 0.0
        rest = comp[i][j].get(-row_sum)
        if rest is None:
            return big
        return rest + row_tail[i + 1]

    best_cost = np.inf
    best = None
    assign = np.zeros(ncells, dtype=np.int64)
    col_sum = np.zeros(n, dtype=np.int64)
    eps = 1e-9  # slack so float rounding in the bound never prunes an optimum

    # Seed the incumbent with the best degree-4 circuit so the bound prunes
    # from the start.  The DFS visits leaves in lex order, so on equal cost
    # the explicit lex comparison still returns the lex-smallest optimum.
    seed = _best_swap_seed(p, minus_ok, c1, c2)
    if seed is not None:
        best = seed.ravel()
        best_cost = action_distance(p, seed)

    def dfs(idx, row_sum, plus_count, partial):
        nonlocal best_cost, best
        if partial + lower_bound(idx, row_sum) > best_cost + eps:
            return
        if idx == ncells:
            if (
                row_sum == 0
                and not col_sum.any()
                and c1 <= plus_count <= c2
                and (
                    partial < best_cost
                    or (partial == best_cost and tuple(assign) < tuple(best))
                )
            ):
                best_cost = partial
                best = assign.copy()
            return
        i, j = divmod(idx, n)
        cells_left_in_row = n - j
        rows_below = m - 1 - i
        # values in lex order so the first optimum found is lex-smallest
        for v, c in ((-1, cost_m1[idx]), (0, cost_0[idx]), (1, cost_p1[idx])):
            if v == -1 and not minus_ok[idx]:
                continue
            if v == 1 and plus_count >= c2:
                continue
            rs = row_sum + v
            if abs(rs) > cells_left_in_row - 1 and j != n - 1:
                continue
            if j == n - 1 and rs != 0:
                continue
            col_sum[j] += v
            if abs(col_sum[j]) > rows_below:
                col_sum[j] -= v
                continue
            pc = plus_count + (1 if v == 1 else 0)
            if pc + (ncells - idx - 1) >= c1:
                assign[idx] = v
                dfs(idx + 1, 0 if j == n - 1 else rs, pc, partial + c)
            col_sum[j] -= v
        assign[idx] = 0

    dfs(0, 0, 0, 0.0)
    if best is None:
        raise ProjectionInfeasibleError("no legal action satisfies the constraints")
    return best.reshape(m, n)


from functools import lru_cache


@lru_cache(maxsize=8)
def _stacked_actions(m, n):
    acts = list(enumerate_actions_2way(m, n))
    return np.stack(acts) if acts else np.zeros((0, m, n), dtype=np.int64)


def brute_force_project(p, size_guard=16):
    """Independent oracle: exhaustive argmin over the legal action set.

    Same tie-breaking as project_action; refuses grids beyond the guard.
    Vectorized distances preselect the near-minimal band, which is then
    re-ranked with the exact sequential accumulation.
    """
    m, n = p.target.shape
    if m * n > size_guard:
        raise InvalidInputError(f"brute force limited to {size_guard} cells")
    acts = _stacked_actions(m, n)
    minus_ok = _allowed_minus(p).reshape(m, n)
    c1 = max(1, p.c1 or 1)
    c2 = p.c2 if p.c2 is not None else m * n
    plus_counts = (acts == 1).sum(axis=(1, 2))
    ok = (plus_counts >= c1) & (plus_counts <= c2)
    ok &= ~((acts == -1) & ~minus_ok).any(axis=(1, 2))
    if not ok.any():
        raise ProjectionInfeasibleError("no legal action satisfies the constraints")
    cand = acts[ok]
    diff = np.abs(cand - p.target)
    dist = (diff * diff if p.d == 2 else diff).sum(axis=(1, 2))
    band = np.flatnonzero(dist <= dist.min() + 1e-9)
    best = min(
        (cand[i] for i in band),
        key=lambda a: (action_distance(p, a), tuple(a.ravel())),
    )
    return best
