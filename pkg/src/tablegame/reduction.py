"""Reduction to the unique sink, fiber enumeration, and the feasibility
driver.

Reductions never materialize a move set.  A 2-way table is reduced under a
(weight, lex) order by cancelling negative cycles of the bipartite cell
graph: using a cell as the subtracted (+) side needs one unit of mass there
and earns -cost, using it as the added (-) side costs +cost, and a negative
cycle is exactly an applicable circuit whose application strictly decreases
the order.  The 3-way composite order reduces in stages: the xz projection
(moves lifted back to the table), then the yz projection, then each
horizontal slice; the result is the unique sink of the full move family.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .encoder import decode_solution
from .errors import BudgetExhausted, InvalidInputError
from .moves import (
    GREATER,
    TermOrder,
    bipartite_cycles,
    circuit_pairs,
    enumerate_3way_moves,
)
from .tables import northwest_corner, project_xz, project_yz


def _weight_costs(forbidden):
    m, n = forbidden.shape
    return [[1 if forbidden[i, k] else 0 for k in range(n)] for i in range(m)]


def _composite_costs(forbidden, total):
    """Exact linear costs whose minimum over a fiber is the (weight, lex)
    sink: base-beta digits are (forbidden mass, entries in priority order),
    with beta exceeding any achievable entry so digits never interact.
    """
    m, n = forbidden.shape
    beta = int(total) + 2
    cells = [(i, k) for i in range(m) for k in range(n)]
    prio = [c for c in cells if forbidden[c]] + [c for c in cells if not forbidden[c]]
    top = len(prio)
    cost = [[0] * n for _ in range(m)]
    for rank, (i, k) in enumerate(prio):
        cost[i][k] = beta ** (top - 1 - rank)
        if forbidden[i, k]:
            cost[i][k] += beta ** top
    return cost


def _negative_cycle(p, cost):
    """An applicable circuit strictly decreasing sum(cost * p), or None.

    Bellman-Ford on the bipartite residual graph; any negative cycle
    alternates row and column nodes and reads off as a circuit whose + cells
    each hold at least one unit.
    """
    m, n = p.shape
    nv = m + n
    edges = []
    for i in range(m):
        for k in range(n):
            c = cost[i][k]
            if p[i, k] >= 1:
                edges.append((i, m + k, -c, i, k, 1))
            edges.append((m + k, i, c, i, k, -1))
    dist = [0] * nv
    pred = [None] * nv
    touched = None
    for _ in range(nv):
        touched = None
        for ei, e in enumerate(edges):
            a, b, c = e[0], e[1], e[2]
            if dist[a] + c < dist[b]:
                dist[b] = dist[a] + c
                pred[b] = ei
                touched = b
        if touched is None:
            return None
    # walk predecessors until a node repeats, then cut out the cycle
    seen = {}
    path = []
    v = touched
    while v not in seen:
        seen[v] = len(path)
        ei = pred[v]
        path.append(ei)
        v = edges[ei][0]
    cyc = path[seen[v]:]
    g = np.zeros_like(p)
    for ei in cyc:
        _a, _b, _c, i, k, s = edges[ei]
        g[i, k] = s
    return g


def reduce_table_2way(p, forbidden, full=False, record=None, step_cap=10 ** 6):
    """Reduce a 2-way table by applicable circuits until no move decreases
    the order.

    full=False stops at minimal forbidden-cell weight (all the feasibility
    driver needs); full=True continues to the unique (weight, lex) sink.
    `record`, when a list, receives (circuit, units) in application order.
    """
    p = np.array(p, dtype=np.int64)
    forbidden = np.asarray(forbidden, dtype=bool)
    if p.shape != forbidden.shape:
        raise InvalidInputError("forbidden mask shape mismatch")
    cost = (
        _composite_costs(forbidden, p.sum())
        if full
        else _weight_costs(forbidden)
    )
    steps = 0
    while True:
        g = _negative_cycle(p, cost)
        if g is None:
            return p
        units = int(p[g > 0].min())
        p -= units * g
        if record is not None:
            record.append((g, units))
        steps += units
        if steps > step_cap:
            raise BudgetExhausted("2-way reduction exceeded the step cap")


def apply_projection_circuit(t3, circuit, axis, record=None):
    """Add `circuit` (one unit) to the table's xz or yz projection in place.

    Each (+,-) pair of the circuit shares a k; the free index is chosen as
    the first one with mass available on the subtracted cell, which always
    exists when the circuit is applicable to the projection.  Appends the
    applied 3-way unit move to `record` as ((i,j,k), delta) cells.
    """
    cells = []
    for (ip, im, k) in circuit_pairs(circuit):
        if axis == "xz":
            avail = np.flatnonzero(t3[im, :, k] >= 1)
            if len(avail) == 0:
                raise InvalidInputError("circuit not applicable to projection")
            j = int(avail[0])
            plus, minus = (ip, j, k), (im, j, k)
        else:
            avail = np.flatnonzero(t3[:, im, k] >= 1)
            if len(avail) == 0:
                raise InvalidInputError("circuit not applicable to projection")
            i = int(avail[0])
            plus, minus = (i, ip, k), (i, im, k)
        t3[plus] += 1
        t3[minus] -= 1
        cells.extend([(plus, 1), (minus, -1)])
    if record is not None:
        record.append(tuple(cells))
    return cells


def _lift_record(t3, rec, axis, record):
    """Replay recorded (circuit, units) 2-way reductions on the 3-way table."""
    for g, units in rec:
        for _ in range(units):
            apply_projection_circuit(t3, -g, axis, record=record)


def _embed_record(t3, rec, k, record):
    """Replay recorded slice-k reductions on the 3-way table."""
    for g, units in rec:
        for _ in range(units):
            t3[:, :, k] -= g
            if record is not None:
                cells = tuple(
                    (((int(i), int(j), k)), -int(g[i, j]))
                    for i, j in np.argwhere(g != 0)
                )
                record.append(cells)


def sparse_move(move3):
    """Dense 3-way move to ((i,j,k), delta) cell tuple."""
    m = np.asarray(move3)
    return tuple(
        ((int(i), int(j), int(k)), int(m[i, j, k])) for i, j, k in np.argwhere(m != 0)
    )


def apply_sparse_move(table, cells):
    """Apply a sparse move in place; raises if an entry would go negative."""
    for cell, d in cells:
        table[cell] += d
    if (table < 0).any():
        raise InvalidInputError("move path leaves the nonnegative orthant")


def reduce_to_sink(table, order, policy="staged", rng=None, step_cap=10 ** 6,
                   record=None):
    """Reduce a 3-way table to the unique sink of the composite order.

    The staged policy reduces the xz projection, the yz projection, and then
    every horizontal slice, each to its own 2-way sink; the result is the
    table at which no generated move applies, independently of move choice.
    Policies 'first' (first applicable move in canonical generator order)
    and 'random' perform generic single-move reductions and exist to check
    that independence; they enumerate liftings and are for small tables.
    """
    t = np.array(table, dtype=np.int64)
    if t.ndim != 3 or t.shape != order.shape3:
        raise InvalidInputError("table shape does not match the order")
    if policy == "staged":
        if record is None:
            a_sink = reduce_table_2way(project_xz(t), order.fxz, full=True,
                                       step_cap=step_cap)
            b_sink = reduce_table_2way(project_yz(t), order.fyz, full=True,
                                       step_cap=step_cap)
            out = np.zeros_like(t)
            for k in range(t.shape[2]):
                start = northwest_corner((a_sink[:, k], b_sink[:, k]))
                out[:, :, k] = reduce_table_2way(
                    start, order.fslices[k], full=True, step_cap=step_cap
                )
            return out
        rec_a, rec_b = [], []
        reduce_table_2way(project_xz(t), order.fxz, full=True, record=rec_a,
                          step_cap=step_cap)
        _lift_record(t, rec_a, "xz", record)
        reduce_table_2way(project_yz(t), order.fyz, full=True, record=rec_b,
                          step_cap=step_cap)
        _lift_record(t, rec_b, "yz", record)
        for k in range(t.shape[2]):
            rec_k = []
            sink_k = reduce_table_2way(t[:, :, k], order.fslices[k], full=True,
                                       record=rec_k, step_cap=step_cap)
            _embed_record(t, rec_k, k, record)
            assert (t[:, :, k] == sink_k).all()
        return t

    if policy not in ("first", "random"):
        raise InvalidInputError(f"unknown policy {policy!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    steps = 0
    while True:
        chosen = None
        candidates = []
        for g in enumerate_3way_moves(t.shape):
            nxt = t - g
            if (nxt < 0).any():
                continue
            if order.compare3(t, nxt) != GREATER:
                continue
            if policy == "first":
                chosen = g
                break
            candidates.append(g)
        if chosen is None and candidates:
            chosen = candidates[int(rng.integers(len(candidates)))]
        if chosen is None:
            return t
        t -= chosen
        if record is not None:
            record.append(sparse_move(-chosen))
        steps += 1
        if steps > step_cap:
            raise BudgetExhausted("reduction exceeded the step cap")


def enumerate_fiber_2way(anchor, enabled=None, cap=10 ** 6, want_parents=False):
    """All 2-way tables sharing the anchor's margins with support inside the
    enabled set, by BFS over the signed cycles of the enabled subgraph.

    The anchor must itself be supported on the enabled set.  Raises
    BudgetExhausted past `cap` visited tables (an inconclusive outcome,
    distinct from an empty result).  Parent tracking (for move paths) uses a
    per-state walk; without it frontiers expand vectorized.
    """
    a = np.array(anchor, dtype=np.int64)
    if enabled is None:
        enabled = np.ones(a.shape, dtype=bool)
    enabled = np.asarray(enabled, dtype=bool)
    if a[~enabled].any():
        raise InvalidInputError("anchor has mass on a disabled cell")
    moves = list(bipartite_cycles(enabled))
    start_key = a.tobytes()

    if want_parents:
        visited = {start_key: a}
        parents = {start_key: None}
        queue = deque([start_key])
        while queue:
            key = queue.popleft()
            cur = visited[key]
            for mi, g in enumerate(moves):
                nxt = cur + g
                if (nxt < 0).any():
                    continue
                nkey = nxt.tobytes()
                if nkey in visited:
                    continue
                visited[nkey] = nxt
                parents[nkey] = (key, mi)
                queue.append(nkey)
                if len(visited) > cap:
                    raise BudgetExhausted("fiber enumeration exceeded the cap")
        return list(visited.values()), parents, moves

    if not moves:
        return [a]
    mv = np.stack(moves)
    visited = {start_key}
    tables = [a]
    frontier = a[None]
    block = max(1, 200000 // max(1, len(moves)))
    while len(frontier):
        fresh = []
        for lo in range(0, len(frontier), block):
            seg = frontier[lo:lo + block]
            cand = (seg[:, None] + mv[None]).reshape(-1, *a.shape)
            cand = cand[(cand >= 0).all(axis=(1, 2))]
            for row in cand:
                key = row.tobytes()
                if key not in visited:
                    visited.add(key)
                    fresh.append(row)
                    if len(visited) > cap:
                        raise BudgetExhausted("fiber enumeration exceeded the cap")
        tables.extend(fresh)
        frontier = np.stack(fresh) if fresh else np.zeros((0, *a.shape), dtype=np.int64)
    return tables


def _max_enabled_flow(rows, cols, edges):
    """Max integer flow from row sums to column sums through enabled cells.

    Returns (flow value, flow table).  The flow value equals the total iff a
    nonnegative table with these margins lives on the enabled support, i.e.
    iff the minimal forbidden weight over the fiber is zero.
    """
    total = int(rows.sum())
    m, n = len(rows), len(cols)
    table = np.zeros((m, n), dtype=np.int64)
    if total != int(cols.sum()):
        return -1, table
    if total == 0:
        return 0, table
    src, snk = 0, 1
    nv = 2 + m + n
    cap = [dict() for _ in range(nv)]

    def add(u, v, c):
        cap[u][v] = cap[u].get(v, 0) + c
        cap[v].setdefault(u, 0)

    for i in range(m):
        if rows[i]:
            add(src, 2 + i, int(rows[i]))
    for j in range(n):
        if cols[j]:
            add(2 + m + j, snk, int(cols[j]))
    for (i, j) in edges:
        add(2 + i, 2 + m + j, total)
    flow = 0
    while flow < total:
        parent = {src: None}
        queue = deque([src])
        while queue and snk not in parent:
            u = queue.popleft()
            for v, c in cap[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if snk not in parent:
            break
        v = snk
        bottleneck = total
        while parent[v] is not None:
            u = parent[v]
            bottleneck = min(bottleneck, cap[u][v])
            v = u
        v = snk
        while parent[v] is not None:
            u = parent[v]
            cap[u][v] -= bottleneck
            cap[v][u] += bottleneck
            v = u
        flow += bottleneck
    for (i, j) in edges:
        sent = cap[2 + m + j].get(2 + i, 0)
        if sent:
            table[i, j] = sent
    return flow, table


def _transport_feasible(rows, cols, edges):
    """Does a nonnegative integer table with these margins fit the support?"""
    flow, _ = _max_enabled_flow(rows, cols, edges)
    return flow == int(rows.sum())


def _box_form(inst):
    """Per-box (start, size, k_plus, k_minus) lists when the enabled set has
    the canonical diagonal-box shape produced by the encoder, else None."""
    enabled = set(inst.enabled)
    covered = set()
    out = []
    for j, (start, size) in enumerate(inst.boxes):
        if size == 0:
            continue
        kp, km = [], []
        for s in range(size):
            i = start + s
            i2 = start + ((s + 1) % size)
            if size == 1:
                cells = sorted(k for k in range(inst.h) if (i, i, k) in enabled)
                sig = inst.sigma[j] if j < len(inst.sigma) else None
                if len(cells) != 2 or sig is None or sig[2] not in cells:
                    return None
                kp.append(sig[2])
                km.append(cells[0] if cells[1] == sig[2] else cells[1])
                covered.update({(i, i, cells[0]), (i, i, cells[1])})
            else:
                diag = [k for k in range(inst.h) if (i, i, k) in enabled]
                off = [k for k in range(inst.h) if (i, i2, k) in enabled]
                if len(diag) != 1 or len(off) != 1:
                    return None
                kp.append(diag[0])
                km.append(off[0])
                covered.update({(i, i, diag[0]), (i, i2, off[0])})
        out.append((start, size, kp, km))
    if covered != enabled:
        return None
    return out


def _signature_search(inst, structure, node_cap):
    """Find per-box diagonal values whose plane contributions meet w.

    Joint slice feasibility forces every enabled entry of a box to carry the
    box's diagonal value or its complement (the box cycle equations), so the
    projection-pair search collapses to one scalar per box; the DFS prunes
    on per-plane residual ranges of the remaining boxes.  Returns the value
    list or None; raises BudgetExhausted past node_cap search nodes.
    """
    h, big_u = inst.h, inst.big_u
    contribs = []
    for (_start, _size, kp, km) in structure:
        cp = [0] * h
        cm = [0] * h
        for k in kp:
            cp[k] += 1
        for k in km:
            cm[k] += 1
        contribs.append((cp, cm))
    nb = len(contribs)
    lo = [[0] * h for _ in range(nb + 1)]
    hi = [[0] * h for _ in range(nb + 1)]
    for idx in range(nb - 1, -1, -1):
        cp, cm = contribs[idx]
        for k in range(h):
            at0 = cm[k] * big_u
            at_u = cp[k] * big_u
            lo[idx][k] = lo[idx + 1][k] + min(at0, at_u)
            hi[idx][k] = hi[idx + 1][k] + max(at0, at_u)
    nodes = 0

    def dfs(idx, residual):
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise BudgetExhausted("signature search exceeded the cap")
        if idx == nb:
            return [] if not any(residual) else None
        cp, cm = contribs[idx]
        for y in range(big_u + 1):
            nxt = []
            ok = True
            for k in range(h):
                v = residual[k] - (cp[k] * y + cm[k] * (big_u - y))
                if v < lo[idx + 1][k] or v > hi[idx + 1][k]:
                    ok = False
                    break
                nxt.append(v)
            if not ok:
                continue
            rest = dfs(idx + 1, nxt)
            if rest is not None:
                return [y] + rest
        return None

    return dfs(0, [int(x) for x in inst.w]), nodes


def _witness_from_values(inst, structure, values):
    """Assemble the face table carrying each box's value on its diagonal
    entries and the complement on its off-diagonal entries."""
    t = np.zeros(inst.shape3, dtype=np.int64)
    for (start, size, kp, km), y in zip(structure, values):
        for s in range(size):
            i = start + s
            i2 = start + ((s + 1) % size)
            t[i, i, kp[s]] += y
            t[i, i2, km[s]] += inst.big_u - y
    return t


def _pair_search_fibers(inst, order, a_min, b_min, fiber_cap, step_cap, stats):
    """Generic projection-pair search by explicit fiber enumeration, for
    instances whose enabled set lacks the canonical box shape.  Returns a
    witness table or None."""
    exz, eyz = ~order.fxz, ~order.fyz
    s_a = enumerate_fiber_2way(a_min, exz, cap=fiber_cap)
    s_b = enumerate_fiber_2way(b_min, eyz, cap=fiber_cap)
    stats["fiber_xz"] = len(s_a)
    stats["fiber_yz"] = len(s_b)
    h = inst.h
    slice_edges = [
        [(int(i), int(j)) for i, j in np.argwhere(~order.fslices[k])]
        for k in range(h)
    ]
    memo = {}

    def ok_pair(ta, tb):
        for k in range(h):
            key = (k, ta[:, k].tobytes(), tb[:, k].tobytes())
            hit = memo.get(key)
            if hit is None:
                hit = _transport_feasible(ta[:, k], tb[:, k], slice_edges[k])
                memo[key] = hit
            if not hit:
                return False
        return True

    for ta in s_a:
        for tb in s_b:
            if ok_pair(ta, tb):
                slabs = []
                for k in range(h):
                    _f, ft = _max_enabled_flow(ta[:, k], tb[:, k], slice_edges[k])
                    slabs.append(ft)
                stats["slice_checks"] = len(memo)
                return np.stack(slabs, axis=2)
    stats["slice_checks"] = len(memo)
    return None


@dataclass
class IfpResult:
    """Outcome of the feasibility game driver."""

    status: str  # "yes" | "no" | "budget_exhausted"
    witness: np.ndarray = None
    solution: np.ndarray = None
    initial: np.ndarray = None
    moves: list = None
    stats: dict = field(default_factory=dict)


def ifp_solve(inst, fiber_cap=10 ** 6, step_cap=10 ** 6, want_path=False):
    """Decide whether the encoded polytope has a lattice point.

    Builds an initial table by the corner rule and tests both projections
    for zero minimal forbidden weight (NO when either stays positive), then
    searches the projection pairs supported on the enabled sets for one
    whose horizontal slices all carry zero forbidden weight.  For canonical
    encoder instances the pair set collapses exactly to one diagonal value
    per variable box (the box cycle equations force every block of a jointly
    feasible pair to be constant), so the search runs as a pruned DFS over
    those values; other instances fall back to explicit fiber enumeration.
    The witness decodes to a solution of the original system; with
    `want_path` a full replayable move sequence from the initial table to
    the witness is returned (both are reduced to the unique sink and the
    second path is reversed).  Caps turn the exponential worst case into an
    explicit 'budget_exhausted' outcome.
    """
    stats = {}
    if inst.r == 0:
        feasible = not inst.w[:-1].any() if inst.h > 1 else True
        sol = np.zeros(len(inst.embedding), dtype=np.int64)
        return IfpResult(
            status="yes" if feasible else "no",
            witness=np.zeros(inst.shape3, dtype=np.int64) if feasible else None,
            solution=sol if feasible else None,
            stats=stats,
        )

    order = TermOrder.for_instance(inst)
    v0 = northwest_corner((inst.u, inst.v, inst.w))
    exz, eyz = ~order.fxz, ~order.fyz

    # step 3: minimal projection weights (one max-flow each)
    flow_a, a_min = _max_enabled_flow(
        inst.u, inst.w, [(int(i), int(k)) for i, k in np.argwhere(exz)]
    )
    flow_b, b_min = _max_enabled_flow(
        inst.v, inst.w, [(int(j), int(k)) for j, k in np.argwhere(eyz)]
    )
    total = int(inst.u.sum())
    stats["weight_xz"] = total - flow_a
    stats["weight_yz"] = total - flow_b
    if flow_a < total or flow_b < total:
        return IfpResult(status="no", initial=v0, stats=stats)

    # steps 4-5: find a projection pair whose slices all fit the face
    structure = _box_form(inst)
    try:
        if structure is not None:
            stats["search"] = "box"
            values, nodes = _signature_search(inst, structure, fiber_cap)
            stats["search_nodes"] = nodes
            witness = (
                _witness_from_values(inst, structure, values)
                if values is not None
                else None
            )
        else:
            stats["search"] = "fiber"
            witness = _pair_search_fibers(
                inst, order, a_min, b_min, fiber_cap, step_cap, stats
            )
    except BudgetExhausted:
        return IfpResult(status="budget_exhausted", initial=v0, stats=stats)

    if witness is None:
        return IfpResult(status="no", initial=v0, stats=stats)

    path = None
    if want_path:
        rec_fwd, rec_back = [], []
        sink_v = reduce_to_sink(v0, order, record=rec_fwd, step_cap=step_cap)
        sink_x = reduce_to_sink(witness, order, record=rec_back,
                                step_cap=step_cap)
        if (sink_v != sink_x).any():
            raise InvalidInputError("reduction sinks disagree; not one fiber")
        path = rec_fwd + [
            tuple((cell, -d) for (cell, d) in mv) for mv in reversed(rec_back)
        ]
    sol = decode_solution(inst, witness)
    return IfpResult(
        status="yes",
        witness=witness,
        solution=sol,
        initial=v0,
        moves=path,
        stats=stats,
    )


def replay_path(initial, moves):
    """Apply a recorded move path, checking margins stay fixed and entries
    nonnegative at every step; returns the final table."""
    t = np.array(initial, dtype=np.int64)
    margins = [t.sum(axis=ax) for ax in ((1, 2), (0, 2), (0, 1))]
    for cells in moves:
        apply_sparse_move(t, cells)
        for ax, ref in zip(((1, 2), (0, 2), (0, 1)), margins):
            if (t.sum(axis=ax) != ref).any():
                raise InvalidInputError("move path broke a margin")
    return t
