import numpy as np
import pytest

from tablegame.encoder import (
    EncodedInstance,
    RationalLinearSystem,
    encode_plane_sum,
    full_encode,
)
from tablegame.errors import BudgetExhausted, InvalidInputError
from tablegame.moves import TermOrder
from tablegame.reduction import (
    enumerate_fiber_2way,
    ifp_solve,
    reduce_table_2way,
    reduce_to_sink,
    replay_path,
)
from tablegame.tables import northwest_corner, project_xz, project_yz

from test_moves import enumerate_3way_fiber


def fiber_2way_oracle(rows, cols):
    """Oracle: all 2-way tables with the given margins, by recursive fill."""
    rows = list(map(int, rows))
    cols = list(map(int, cols))
    m, n = len(rows), len(cols)
    out = []

    def rec(i, remaining_cols, acc):
        if i == m:
            if not any(remaining_cols):
                out.append(np.array(acc, dtype=np.int64))
            return
        target = rows[i]

        def fill(j, left, row):
            if j == n - 1:
                if left <= remaining_cols[j]:
                    remaining_cols[j] -= left
                    rec(i + 1, remaining_cols, acc + [row + [left]])
                    remaining_cols[j] += left
                return
            for v in range(min(left, remaining_cols[j]) + 1):
                remaining_cols[j] -= v
                fill(j + 1, left - v, row + [v])
                remaining_cols[j] += v

        fill(0, target, [])

    rec(0, cols, [])
    return out


def sink_oracle(fiber, forbidden):
    """Brute-force argmin of the (weight, priority-lex) key."""
    m, n = forbidden.shape
    cells = [(i, k) for i in range(m) for k in range(n)]
    prio = [c for c in cells if forbidden[c]] + [c for c in cells if not forbidden[c]]

    def key(t):
        return (int(t[forbidden].sum()),) + tuple(int(t[c]) for c in prio)

    return min(fiber, key=key)


def test_reduce_2way_matches_fiber_argmin():
    rng = np.random.default_rng(1)
    for _ in range(40):
        m, n = rng.integers(2, 4, size=2)
        table = rng.integers(0, 3, size=(m, n)).astype(np.int64)
        forbidden = rng.random((m, n)) < 0.35
        fiber = fiber_2way_oracle(table.sum(axis=1), table.sum(axis=0))
        want = sink_oracle(fiber, forbidden)
        got = reduce_table_2way(table, forbidden, full=True)
        assert (got == want).all()


def test_reduce_2way_weight_phase_minimal():
    rng = np.random.default_rng(2)
    for _ in range(30):
        m, n = rng.integers(2, 4, size=2)
        table = rng.integers(0, 3, size=(m, n)).astype(np.int64)
        forbidden = rng.random((m, n)) < 0.35
        fiber = fiber_2way_oracle(table.sum(axis=1), table.sum(axis=0))
        best = min(int(t[forbidden].sum()) for t in fiber)
        got = reduce_table_2way(table, forbidden)
        assert int(got[forbidden].sum()) == best


def test_reduce_2way_records_replayable_path():
    table = np.array([[3, 0], [0, 2]], dtype=np.int64)
    forbidden = np.array([[True, False], [False, False]])
    rec = []
    sink = reduce_table_2way(table, forbidden, full=True, record=rec)
    replay = table.copy()
    for g, units in rec:
        replay -= units * g
        assert (replay >= 0).all()
    assert (replay == sink).all()


def _random_micro_order(shape3, rng):
    l, m, n = shape3
    return TermOrder(
        shape3,
        rng.random((l, n)) < 0.35,
        rng.random((m, n)) < 0.35,
        [rng.random((l, m)) < 0.35 for _ in range(n)],
    )


def _random_micro_table(shape3, rng, total_cap=6):
    l, m, n = shape3
    t = np.zeros(shape3, dtype=np.int64)
    for _ in range(int(rng.integers(1, total_cap + 1))):
        t[rng.integers(l), rng.integers(m), rng.integers(n)] += 1
    return t


def test_sink_is_fixpoint():
    rng = np.random.default_rng(3)
    for _ in range(10):
        shape = (2, 2, 2)
        order = _random_micro_order(shape, rng)
        t = _random_micro_table(shape, rng)
        sink = reduce_to_sink(t, order)
        again = reduce_to_sink(sink, order)
        assert (sink == again).all()


@pytest.mark.parametrize("shape", [(2, 2, 2), (3, 3, 2)])
def test_sink_policy_independent(shape):
    rng = np.random.default_rng(4)
    for trial in range(8):
        order = _random_micro_order(shape, rng)
        t = _random_micro_table(shape, rng)
        staged = reduce_to_sink(t, order)
        first = reduce_to_sink(t, order, policy="first")
        rand1 = reduce_to_sink(t, order, policy="random",
                               rng=np.random.default_rng(trial))
        rand2 = reduce_to_sink(t, order, policy="random",
                               rng=np.random.default_rng(trial + 100))
        assert (staged == first).all()
        assert (staged == rand1).all()
        assert (staged == rand2).all()


def test_sink_is_fiber_minimum():
    rng = np.random.default_rng(5)
    for _ in range(6):
        shape = (2, 2, 2)
        order = _random_micro_order(shape, rng)
        t = _random_micro_table(shape, rng, total_cap=4)
        x, y, z = t.sum(axis=(1, 2)), t.sum(axis=(0, 2)), t.sum(axis=(0, 1))
        fiber = enumerate_3way_fiber((x, y, z))
        sink = reduce_to_sink(t, order)
        for other in fiber:
            if not (other == sink).all():
                assert order.compare3(other, sink) == 1


def test_sink_record_replays():
    rng = np.random.default_rng(6)
    order = _random_micro_order((3, 3, 2), rng)
    t = _random_micro_table((3, 3, 2), rng)
    rec = []
    sink = reduce_to_sink(t, order, record=rec)
    assert (replay_path(t, rec) == sink).all()


def test_projection_weight_monotone_along_path():
    rng = np.random.default_rng(7)
    order = _random_micro_order((3, 3, 2), rng)
    t = _random_micro_table((3, 3, 2), rng)
    rec = []
    reduce_to_sink(t, order, record=rec)
    cur = t.astype(np.int64).copy()
    last = TermOrder.weight(project_xz(cur), order.fxz)
    for mv in rec:
        for cell, d in mv:
            cur[cell] += d
        w = TermOrder.weight(project_xz(cur), order.fxz)
        assert w <= last
        last = w


def test_fiber_zero_margins():
    out = enumerate_fiber_2way(np.zeros((2, 2), dtype=np.int64))
    assert len(out) == 1 and not out[0].any()


def test_fiber_2x2_unit_margins():
    anchor = np.array([[1, 0], [0, 1]], dtype=np.int64)
    out = enumerate_fiber_2way(anchor)
    assert len(out) == 2


def test_fiber_matches_direct_enumeration():
    rng = np.random.default_rng(8)
    for _ in range(15):
        m, n = rng.integers(2, 4, size=2)
        table = rng.integers(0, 3, size=(m, n)).astype(np.int64)
        fiber = fiber_2way_oracle(table.sum(axis=1), table.sum(axis=0))
        got = enumerate_fiber_2way(table)
        assert len(got) == len(fiber)
        assert {t.tobytes() for t in got} == {t.tobytes() for t in fiber}


def test_fiber_respects_support():
    enabled = np.array([[True, True], [True, False]])
    anchor = np.array([[1, 1], [2, 0]], dtype=np.int64)
    for t in enumerate_fiber_2way(anchor, enabled):
        assert not t[~enabled].any()
    with pytest.raises(InvalidInputError):
        enumerate_fiber_2way(np.array([[0, 0], [0, 1]]), enabled)


def test_fiber_budget_exhausted():
    anchor = np.full((3, 3), 4, dtype=np.int64)
    with pytest.raises(BudgetExhausted):
        enumerate_fiber_2way(anchor, cap=5)


def test_ifp_micro_yes_with_path():
    inst = encode_plane_sum(RationalLinearSystem([[1]], [2]), 2)
    res = ifp_solve(inst, want_path=True)
    assert res.status == "yes"
    assert res.solution.tolist() == [2]
    assert (replay_path(res.initial, res.moves) == res.witness).all()


def test_ifp_parity_no():
    inst = encode_plane_sum(RationalLinearSystem([[2]], [1]), 1)
    assert ifp_solve(inst).status == "no"


def test_ifp_budget_exhausted_status():
    inst = full_encode(RationalLinearSystem([[2, 3, -1], [1, -2, 2]], [5, 3]))
    res = ifp_solve(inst, fiber_cap=2)
    assert res.status == "budget_exhausted"


def test_ifp_fallback_without_box_metadata():
    # wiping the box metadata forces the generic fiber search; same answer
    inst = full_encode(RationalLinearSystem([[1, 1]], [3]))
    stripped = EncodedInstance(
        r=inst.r, h=inst.h, big_u=inst.big_u, u=inst.u, v=inst.v, w=inst.w,
        enabled=inst.enabled, sigma=inst.sigma,
        boxes=tuple((0, 0) for _ in inst.boxes), system=inst.system,
        embedding=inst.embedding, orig_system=inst.orig_system,
    )
    res = ifp_solve(stripped)
    assert res.stats["search"] == "fiber"
    assert res.status == "yes"
    assert (inst.orig_system.a @ res.solution == inst.orig_system.b).all()


def test_ifp_want_path_replays_on_nontrivial_instance():
    inst = full_encode(RationalLinearSystem([[2, 3], [1, 1]], [7, 3]))
    res = ifp_solve(inst, want_path=True)
    assert res.status == "yes"
    final = replay_path(res.initial, res.moves)
    assert (final == res.witness).all()
