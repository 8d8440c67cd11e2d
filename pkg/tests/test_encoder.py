from itertools import product

import numpy as np
import pytest

from tablegame.encoder import (
    RationalLinearSystem,
    compute_bound_U,
    decode_solution,
    encode_plane_sum,
    full_encode,
    reduce_coefficients,
)
from tablegame.errors import EncodingInfeasibleError, InvalidWitnessError
from tablegame.reduction import _box_form, _witness_from_values, ifp_solve


def solutions_in_box(sys, bound):
    """Oracle: all nonnegative integer solutions with entries <= bound."""
    out = []
    for y in product(range(bound + 1), repeat=sys.n):
        vec = np.array(y, dtype=np.int64)
        if (sys.a @ vec == sys.b).all():
            out.append(vec)
    return out


def test_reduce_identity_when_in_range():
    sys = RationalLinearSystem([[1]], [4])
    red, emb = reduce_coefficients(sys)
    assert red is sys and emb == (0,)


def test_reduce_three_splits_binary():
    red, emb = reduce_coefficients(RationalLinearSystem([[3]], [5]))
    assert red.a.tolist() == [[1, 1], [2, -1]]
    assert red.b.tolist() == [5, 0]
    assert emb == (0,)


def test_reduce_minus_two():
    red, emb = reduce_coefficients(RationalLinearSystem([[-2]], [0]))
    assert red.a.tolist() == [[0, -1], [2, -1]]
    assert red.b.tolist() == [0, 0]


def test_reduce_preserves_solution_sets():
    for a, b in (([[3]], [5]), ([[-2]], [0]), ([[3, -2]], [4])):
        sys = RationalLinearSystem(a, b)
        red, emb = reduce_coefficients(sys)
        originals = {tuple(map(int, y)) for y in solutions_in_box(sys, 6)}
        # chain variables are powers of two times the base variable
        projected = set()
        for x in solutions_in_box(red, 24):
            y = tuple(int(x[c]) for c in emb)
            if max(y, default=0) <= 6:
                # verify the chain rows forced consistency
                projected.add(y)
        assert originals == projected


def test_bound_examples():
    assert compute_bound_U(RationalLinearSystem([[1]], [7])) >= 7
    assert compute_bound_U(RationalLinearSystem([[1, 1]], [3])) >= 3


def test_bound_dominates_integer_points():
    rng = np.random.default_rng(3)
    for _ in range(40):
        a = rng.integers(-3, 4, size=(2, 3))
        b = rng.integers(-6, 7, size=2)
        sys = RationalLinearSystem(a, b)
        bound = compute_bound_U(sys)
        for y in solutions_in_box(sys, min(20, bound)):
            assert int(y.max()) <= bound


def test_encode_micro_case():
    inst = encode_plane_sum(RationalLinearSystem([[1]], [2]), 2)
    assert (inst.r, inst.h, inst.big_u) == (1, 2, 2)
    assert inst.u.tolist() == [2] and inst.v.tolist() == [2]
    assert inst.w.tolist() == [2, 0]
    assert inst.enabled == frozenset({(0, 0, 0), (0, 0, 1)})
    assert inst.sigma == ((0, 0, 0),)


def test_encode_index_assignment_pattern():
    # eight equations; variable 0 has +3 in equation 3 and -2 in equation 6,
    # so its three diagonal copies pull to plane 3 and the off-diagonal
    # copies to planes 6, 6 and the slack plane 8
    a = np.zeros((8, 1), dtype=np.int64)
    a[3, 0], a[6, 0] = 3, -2
    inst = encode_plane_sum(RationalLinearSystem(a, np.zeros(8, dtype=int)), 5)
    assert inst.r == 3 and inst.h == 9
    diag = sorted(c for c in inst.enabled if c[0] == c[1])
    off = sorted(c for c in inst.enabled if c[0] != c[1])
    assert diag == [(0, 0, 3), (1, 1, 3), (2, 2, 3)]
    assert off == [(0, 1, 6), (1, 2, 6), (2, 0, 8)]
    assert inst.sigma[0] == (0, 0, 3)


def test_encode_vertical_sums_all_U():
    inst = full_encode(RationalLinearSystem([[2, 1], [1, -1]], [4, 1]))
    assert (inst.u == inst.big_u).all()
    assert (inst.v == inst.big_u).all()


def test_encode_w_slack_identity_and_r_sum():
    inst = full_encode(RationalLinearSystem([[2, 1], [1, -1]], [4, 1]))
    assert int(inst.w.sum()) == inst.r * inst.big_u
    assert inst.r == sum(size for (_s, size) in inst.boxes)


def test_encode_enabled_inside_boxes():
    inst = full_encode(RationalLinearSystem([[2, -3]], [1]))
    for (i, j, k) in inst.enabled:
        hit = False
        for (start, size) in inst.boxes:
            if start <= i < start + size and start <= j < start + size:
                hit = True
        assert hit
        assert 0 <= k < inst.h


def test_encode_negative_plane_sum_raises():
    with pytest.raises(EncodingInfeasibleError):
        encode_plane_sum(RationalLinearSystem([[1]], [-2]), 3)


def test_decode_micro_case():
    inst = encode_plane_sum(RationalLinearSystem([[1]], [2]), 2)
    t = np.zeros((1, 1, 2), dtype=np.int64)
    t[0, 0, 0] = 2
    assert decode_solution(inst, t).tolist() == [2]


def test_decode_rejects_forbidden_mass():
    inst = full_encode(RationalLinearSystem([[1, 1]], [2]))
    res = ifp_solve(inst)
    bad = res.witness.copy()
    forbidden = np.argwhere(~inst.enabled_mask())
    cell = tuple(forbidden[0])
    bad[cell] += 1
    with pytest.raises(InvalidWitnessError):
        decode_solution(inst, bad)


def test_decode_rejects_margin_violation():
    inst = encode_plane_sum(RationalLinearSystem([[1]], [2]), 2)
    t = np.zeros((1, 1, 2), dtype=np.int64)
    t[0, 0, 1] = 2  # right total, wrong plane sums
    with pytest.raises(InvalidWitnessError):
        decode_solution(inst, t)


def test_face_bijection_micro():
    # every solution corresponds to exactly one face table and decode inverts
    sys = RationalLinearSystem([[1, 1]], [3])
    inst = full_encode(sys)
    structure = _box_form(inst)
    assert structure is not None
    sols = solutions_in_box(sys, inst.big_u)
    tables = set()
    for y in sols:
        t = _witness_from_values(inst, structure, [int(v) for v in y])
        assert decode_solution(inst, t).tolist() == [int(v) for v in y]
        tables.add(t.tobytes())
    assert len(tables) == len(sols)


def test_full_encode_roundtrip_random():
    rng = np.random.default_rng(11)
    done = 0
    while done < 30:
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 3))
        a = rng.integers(-3, 4, size=(m, n))
        if (a == 0).all(axis=0).any():
            continue
        if not _bounded(a):
            continue
        b = rng.integers(-6, 7, size=m)
        sys = RationalLinearSystem(a, b)
        try:
            inst = full_encode(sys)
            res = ifp_solve(inst)
            got = res.status
        except EncodingInfeasibleError:
            got = "no"
        bound = compute_bound_U(reduce_coefficients(sys)[0])
        want = "yes" if _feasible(a, b, bound) else "no"
        assert got == want, (a.tolist(), b.tolist())
        done += 1


def _bounded(a, limit=40):
    n = a.shape[1]
    for y in product(range(limit + 1), repeat=n):
        if any(y) and not (a @ np.array(y)).any():
            return False
    return True


def _feasible(a, b, ub):
    def rec(j, residual):
        if j == a.shape[1]:
            return not residual.any()
        rest = a[:, j + 1:]
        lo = np.where(rest < 0, rest, 0).sum(axis=1) * ub
        hi = np.where(rest > 0, rest, 0).sum(axis=1) * ub
        col = a[:, j]
        for v in range(ub + 1):
            r2 = residual - col * v
            if ((r2 >= lo) & (r2 <= hi)).all():
                if rec(j + 1, r2):
                    return True
        return False
    return rec(0, b.copy())


def test_zero_column_variable_dropped():
    sys = RationalLinearSystem([[0, 1]], [2])
    inst = full_encode(sys)
    assert inst.sigma[0] is None
    res = ifp_solve(inst)
    assert res.status == "yes"
    assert res.solution.tolist() == [0, 2]
