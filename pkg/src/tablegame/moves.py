"""Moves on tables: circuits, the game action space, slice embeddings,
liftings, and the composite term order that directs reductions.

A move is an integer array with entries in {-1, 0, +1} whose relevant
line-sums all vanish, so applying it to a table leaves every 1-margin
unchanged.  For 2-way tables the minimal moves are exactly the signed simple
cycles of the complete bipartite grid graph; on a restricted support the
minimal moves are the signed simple cycles of the support subgraph.
"""

from functools import lru_cache
from itertools import permutations, product

import numpy as np

from .errors import InvalidInputError
from .tables import project_xz, project_yz

GREATER, EQUAL, LESS = 1, 0, -1


def pos_part(move):
    """Entrywise positive part u of a move u - v."""
    return np.maximum(np.asarray(move), 0)


def neg_part(move):
    """Entrywise negative part v of a move u - v."""
    return np.maximum(-np.asarray(move), 0)


def is_move_2way(arr):
    """Entries in {-1,0,1}, every row and column sum zero, not all zero."""
    a = np.asarray(arr)
    if a.ndim != 2 or not np.issubdtype(a.dtype, np.integer):
        return False
    if not np.isin(a, (-1, 0, 1)).all():
        return False
    if a.sum(axis=0).any() or a.sum(axis=1).any():
        return False
    return bool(a.any())


def is_move_3way(arr):
    """Entries in {-1,0,1}, all three 1-margin families zero, not all zero."""
    a = np.asarray(arr)
    if a.ndim != 3 or not np.issubdtype(a.dtype, np.integer):
        return False
    if not np.isin(a, (-1, 0, 1)).all():
        return False
    for axes in ((1, 2), (0, 2), (0, 1)):
        if a.sum(axis=axes).any():
            return False
    return bool(a.any())


# ---------------------------------------------------------------------------
# circuits and the action space
# ---------------------------------------------------------------------------

def bipartite_cycles(support, max_degree=None):
    """Signed simple cycles of the bipartite graph whose edges are the True
    cells of `support` (an m x n boolean mask).

    Each undirected cycle is produced exactly once per sign, as an m x n
    {-1,0,1} matrix with alternating signs around the cycle.  These are the
    minimal zero-line-sum moves available on the given support.
    `max_degree` bounds the number of +1 entries (the cycle length), pruning
    the walk rather than filtering afterwards.
    """
    sup = np.asarray(support, dtype=bool)
    m, n = sup.shape
    max_cells = None if max_degree is None else 2 * max_degree

    def emit(cells):
        mat = np.zeros((m, n), dtype=np.int64)
        sign = 1
        for (i, k) in cells:
            mat[i, k] = sign
            sign = -sign
        return mat

    # Cells alternate (i0,k0), (i1,k0), (i1,k1), ..., (i0, k_last); the walk
    # is canonical when i0 is the smallest row on the cycle and the start
    # column is smaller than the closing column (fixes the direction).
    def walk_from_col(i0, cells, rows_used, cols_used):
        k_cur = cells[-1][1]
        if len(cells) >= 3 and sup[i0, k_cur] and cells[0][1] < k_cur:
            closed = cells + [(i0, k_cur)]
            mat = emit(closed)
            yield mat
            yield -mat
        if max_cells is not None and len(cells) + 2 > max_cells:
            return
        for i in range(i0 + 1, m):
            if i in rows_used or not sup[i, k_cur]:
                continue
            yield from walk_from_row(i0, cells + [(i, k_cur)],
                                     rows_used | {i}, cols_used)

    def walk_from_row(i0, cells, rows_used, cols_used):
        i_cur = cells[-1][0]
        for k in range(n):
            if k in cols_used or not sup[i_cur, k]:
                continue
            yield from walk_from_col(i0, cells + [(i_cur, k)],
                                     rows_used, cols_used | {k})

    for i0 in range(m):
        for k0 in range(n):
            if sup[i0, k0]:
                yield from walk_from_col(i0, [(i0, k0)], {i0}, {k0})


def enumerate_circuits_2way(m, n, support=None, max_degree=None):
    """All 2-way circuits: minimal-support {-1,0,1} matrices with zero row
    and column sums, i.e. the signed simple cycles of the m x n grid.

    Yields both signs of each circuit.  Empty for m or n < 2.
    """
    if m < 2 or n < 2:
        return iter(())
    if support is None:
        support = np.ones((m, n), dtype=bool)
    return bipartite_cycles(support, max_degree=max_degree)


@lru_cache(maxsize=64)
def circuit_list(m, n, max_degree=None):
    """Cached list of circuits of the full m x n grid (both signs).

    max_degree caps the cycle length (number of +1 entries); None keeps all.
    """
    out = list(enumerate_circuits_2way(m, n, max_degree=max_degree))
    for g in out:
        g.setflags(write=False)
    return out


def _zero_sum_rows(n):
    """All {-1,0,1} vectors of length n with zero sum, including the zero row."""
    rows = []
    for vals in product((-1, 0, 1), repeat=n):
        if sum(vals) == 0:
            rows.append(np.array(vals, dtype=np.int64))
    return rows


def enumerate_actions_2way(m, n):
    """The full game action space: nonzero {-1,0,1} matrices with zero row
    and column sums.  Superset of the circuits; every element is an integer
    combination of circuits.

    Enumerates row by row with column-sum pruning, so it is usable well
    beyond brute-force filtering sizes.
    """
    if m < 1 or n < 1:
        return
    rows = _zero_sum_rows(n)

    def rec(i, col_sums, chosen):
        if i == m:
            if not col_sums.any():
                mat = np.array(chosen, dtype=np.int64)
                if mat.any():
                    yield mat
            return
        remaining = m - i - 1
        for r in rows:
            cs = col_sums + r
            if np.abs(cs).max(initial=0) > remaining:
                continue
            yield from rec(i + 1, cs, chosen + [r])

    yield from rec(0, np.zeros(n, dtype=np.int64), [])


def random_legal_circuit(table, rng, attempts=200):
    """Sample a degree-2 circuit (one +/- rectangle swap) legal at `table`,
    or None if none found within the attempt budget.

    Used for random walks; degree-2 circuits alone connect every 2-way fiber.
    """
    t = np.asarray(table)
    m, n = t.shape
    if m < 2 or n < 2:
        return None
    for _ in range(attempts):
        i1, i2 = rng.choice(m, size=2, replace=False)
        j1, j2 = rng.choice(n, size=2, replace=False)
        g = np.zeros((m, n), dtype=np.int64)
        g[i1, j1] = g[i2, j2] = 1
        g[i1, j2] = g[i2, j1] = -1
        if rng.integers(2):
            g = -g
        if ((t + g) >= 0).all():
            return g
    return None


# ---------------------------------------------------------------------------
# slice embeddings and liftings
# ---------------------------------------------------------------------------

def slice_embed(move2, k, n_slices):
    """Embed an l x m 2-way move into horizontal slice k of an l x m x n
    array (zero elsewhere).  The result preserves all three margin families.
    """
    g = np.asarray(move2)
    if g.ndim != 2:
        raise InvalidInputError("slice_embed expects a 2-way move")
    if not 0 <= k < n_slices:
        raise InvalidInputError("slice index out of range")
    out = np.zeros(g.shape + (n_slices,), dtype=np.int64)
    out[:, :, k] = g
    return out


def enumerate_slice_moves(l, m, n, support3=None):
    """All slice-embedded moves: for each slice k, the circuits of the l x m
    grid (restricted to the slice's enabled support when `support3` given).
    """
    for k in range(n):
        sup = None if support3 is None else np.asarray(support3, dtype=bool)[:, :, k]
        for g in enumerate_circuits_2way(l, m, support=sup):
            yield slice_embed(g, k, n)


def circuit_pairs(move2):
    """Decompose a circuit into its per-column (+cell, -cell) pairs.

    A circuit has exactly one +1 and one -1 in every column it touches; the
    pair list ((i, i', k), ...) presents it as matched index sequences with a
    shared k per position.
    """
    g = np.asarray(move2)
    pairs = []
    for k in range(g.shape[1]):
        col = g[:, k]
        plus = np.flatnonzero(col == 1)
        minus = np.flatnonzero(col == -1)
        if len(plus) != len(minus):
            raise InvalidInputError("not a zero-column-sum {-1,0,1} move")
        for i, i2 in zip(plus, minus):
            pairs.append((int(i), int(i2), k))
    return pairs


def _column_groups(move2):
    """Per touched column: (k, +rows, -rows)."""
    g = np.asarray(move2)
    groups = []
    for k in range(g.shape[1]):
        col = g[:, k]
        plus = [int(i) for i in np.flatnonzero(col == 1)]
        minus = [int(i) for i in np.flatnonzero(col == -1)]
        if len(plus) != len(minus):
            raise InvalidInputError("not a zero-column-sum {-1,0,1} move")
        if plus:
            groups.append((k, plus, minus))
    return groups


def lift_move(move2, assignment, axis="xz", shape3=None, pairing=None):
    """Lift a 2-way projection move to a 3-way move.

    For axis 'xz' the move lives on (i,k) cells and `assignment` supplies the
    j index for each (+,-) pair; the lifted move has +1 at (i, j, k) and -1 at
    (i', j, k), so its xz-projection is the original move and the other two
    margin families are untouched.  Axis 'yz' is symmetric with i supplied.
    A lifting whose placements collide on a cell is rejected (None).
    """
    g = np.asarray(move2)
    if shape3 is None:
        raise InvalidInputError("shape3 required")
    l, m, n = shape3
    pairs = pairing if pairing is not None else circuit_pairs(g)
    if len(assignment) != len(pairs):
        raise InvalidInputError("assignment length must equal the move degree")
    out = np.zeros((l, m, n), dtype=np.int64)
    for (a, b, k), c in zip(pairs, assignment):
        if axis == "xz":
            plus_cell, minus_cell = (a, c, k), (b, c, k)
        elif axis == "yz":
            plus_cell, minus_cell = (c, a, k), (c, b, k)
        else:
            raise InvalidInputError("axis must be 'xz' or 'yz'")
        if out[plus_cell] != 0 or out[minus_cell] != 0:
            return None  # collision: would leave {-1,0,1}
        out[plus_cell] = 1
        out[minus_cell] = -1
    return out


def enumerate_liftings(move2, axis, shape3):
    """All liftings of a 2-way circuit: every per-column pairing of its +
    and - cells, crossed with every index assignment for the free axis.
    Collision liftings are skipped.
    """
    l, m, n = shape3
    free = m if axis == "xz" else l
    groups = _column_groups(np.asarray(move2))
    pairing_choices = []
    for k, plus, minus in groups:
        pairing_choices.append([
            [(p, q, k) for p, q in zip(plus, perm)]
            for perm in permutations(minus)
        ])
    for combo in product(*pairing_choices):
        pairs = [pr for grp in combo for pr in grp]
        for assignment in product(range(free), repeat=len(pairs)):
            lifted = lift_move(move2, assignment, axis=axis, shape3=shape3,
                               pairing=pairs)
            if lifted is not None:
                yield lifted


def enumerate_3way_moves(shape3, support3=None):
    """Canonical on-the-fly generator of the full 3-way move family:
    liftings of xz circuits, then liftings of yz circuits, then
    slice-embedded circuits.  Intended for small instances; the production
    reduction never materializes this set.
    """
    l, m, n = shape3
    for g in enumerate_circuits_2way(l, n):
        yield from enumerate_liftings(g, "xz", shape3)
    for g in enumerate_circuits_2way(m, n):
        yield from enumerate_liftings(g, "yz", shape3)
    yield from enumerate_slice_moves(l, m, n, support3=support3)


# ---------------------------------------------------------------------------
# term orders
# ---------------------------------------------------------------------------

class TermOrder:
    """Composite elimination order on 3-way tables with equal margins.

    Tables compare first by their xz-projections, then yz-projections, then
    slice by slice.  Each 2-way comparison puts forbidden-cell mass first
    (the weight) and breaks ties lexicographically on entries, forbidden
    cells before enabled ones, row-major within each class.  The result is a
    total order on distinct tables of a common fiber, and reductions along
    it terminate in a unique sink.
    """

    def __init__(self, shape3, forbidden_xz, forbidden_yz, forbidden_slices):
        self.shape3 = tuple(shape3)
        l, m, n = self.shape3
        self.fxz = np.asarray(forbidden_xz, dtype=bool)
        self.fyz = np.asarray(forbidden_yz, dtype=bool)
        self.fslices = [np.asarray(f, dtype=bool) for f in forbidden_slices]
        if self.fxz.shape != (l, n) or self.fyz.shape != (m, n):
            raise InvalidInputError("projection mask shape mismatch")
        if len(self.fslices) != n or any(f.shape != (l, m) for f in self.fslices):
            raise InvalidInputError("slice mask shape mismatch")
        self._prio = {}

    @classmethod
    def for_instance(cls, inst):
        """Derive the masks from an encoded instance's enabled set."""
        l, m, n = inst.shape3
        enabled = np.zeros((l, m, n), dtype=bool)
        for (i, j, k) in inst.enabled:
            enabled[i, j, k] = True
        fxz = ~enabled.any(axis=1)
        fyz = ~enabled.any(axis=0)
        fslices = [~enabled[:, :, k] for k in range(n)]
        return cls((l, m, n), fxz, fyz, fslices)

    @classmethod
    def trivial(cls, shape3):
        """All entries enabled; pure lexicographic comparisons."""
        l, m, n = shape3
        return cls(shape3,
                   np.zeros((l, n), dtype=bool),
                   np.zeros((m, n), dtype=bool),
                   [np.zeros((l, m), dtype=bool) for _ in range(n)])

    def _priority(self, mask):
        key = mask.tobytes(), mask.shape
        if key not in self._prio:
            flat = mask.ravel()
            order = np.concatenate([np.flatnonzero(flat), np.flatnonzero(~flat)])
            self._prio[key] = order
        return self._prio[key]

    @staticmethod
    def weight(table2, forbidden):
        """Total mass sitting on forbidden cells."""
        return int(np.asarray(table2)[forbidden].sum())

    def compare2(self, p, q, forbidden):
        """Weight first, then entrywise lex with forbidden cells first."""
        p = np.asarray(p)
        q = np.asarray(q)
        wp, wq = self.weight(p, forbidden), self.weight(q, forbidden)
        if wp != wq:
            return GREATER if wp > wq else LESS
        d = (p - q).ravel()[self._priority(forbidden)]
        nz = np.flatnonzero(d)
        if len(nz) == 0:
            return EQUAL
        return GREATER if d[nz[0]] > 0 else LESS

    def compare3(self, x, y):
        """The three-tier comparison: xz projection, yz projection, slices."""
        x = np.asarray(x)
        y = np.asarray(y)
        c = self.compare2(project_xz(x), project_xz(y), self.fxz)
        if c != EQUAL:
            return c
        c = self.compare2(project_yz(x), project_yz(y), self.fyz)
        if c != EQUAL:
            return c
        for k in range(self.shape3[2]):
            c = self.compare2(x[:, :, k], y[:, :, k], self.fslices[k])
            if c != EQUAL:
                return c
        return EQUAL


def term_compare(x, y, order):
    """Compare two equal-margin tables under the composite order.

    Returns 1, 0, or -1 (greater / equal / less).  Raises InvalidInputError
    on shape or margin mismatch.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.shape != order.shape3:
        raise InvalidInputError("tables must share the order's shape")
    for axes in ((1, 2), (0, 2), (0, 1)):
        if (x.sum(axis=axes) != y.sum(axis=axes)).any():
            raise InvalidInputError("tables must share all 1-margins")
    return order.compare3(x, y)
