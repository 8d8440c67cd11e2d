"""Rewrite a bounded rational polytope {y >= 0 : Ay = b} as a face of an
r x r x h plane-sum transportation polytope.

Each variable is first split into a chain of binary-weighted copies so that
every coefficient lies in {-1,0,1,2}; each variable of the resulting system
then occupies a square "box" on the diagonal of the r x r vertical view,
carrying the variable on the box diagonal and its complement U - y off the
diagonal, and each equation is encoded on one horizontal plane by pulling
down the right number of copies.  Entries outside this pattern are
forbidden; integer points of the original polytope correspond exactly to
integer tables of the face.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import (
    EncodingInfeasibleError,
    InvalidInputError,
    InvalidWitnessError,
)

_INT64_GUARD = 2 ** 62


@dataclass(frozen=True)
class RationalLinearSystem:
    """An integer system Ay = b, y >= 0, assumed to define a bounded polytope."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=np.int64))
        b = np.atleast_1d(np.asarray(self.b, dtype=np.int64))
        if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
            raise InvalidInputError("A must be m x n with b of length m")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def n(self):
        return self.a.shape[1]


@dataclass
class EncodedInstance:
    """The r x r x h plane-sum instance representing a system.

    `sigma` maps each encoded variable to the diagonal entry carrying it
    (None for a variable that occurs in no equation and is dropped);
    `boxes` gives each variable's (start, size) block on the diagonal;
    `embedding` maps original variables to encoded ones.
    """

    r: int
    h: int
    big_u: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    enabled: frozenset
    sigma: tuple
    boxes: tuple
    system: RationalLinearSystem
    embedding: tuple = None
    orig_system: RationalLinearSystem = None
    var_labels: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.embedding is None:
            self.embedding = tuple(range(self.system.n))
        if self.orig_system is None:
            self.orig_system = self.system

    @property
    def shape3(self):
        return (self.r, self.r, self.h)

    def margins(self):
        return self.u, self.v, self.w

    def enabled_mask(self):
        mask = np.zeros(self.shape3, dtype=bool)
        for (i, j, k) in self.enabled:
            mask[i, j, k] = True
        return mask


def reduce_coefficients(sys):
    """Split variables into binary chains so coefficients land in {-1,0,1,2}.

    Variable y_j with largest coefficient magnitude needing k_j+1 bits
    becomes the chain x_{j,0},...,x_{j,k_j} linked by rows
    2 x_{j,s} - x_{j,s+1} = 0, and each term a_ij y_j is rewritten through
    the binary expansion of |a_ij|.  Integer solutions correspond
    bijectively; the embedding maps y_j to x_{j,0}.

    Returns (reduced system, embedding) where embedding[j] is the column of
    x_{j,0}.
    """
    a, b = sys.a, sys.b
    m, n = sys.m, sys.n
    bits = []
    for j in range(n):
        col = np.abs(a[:, j])
        top = int(col.max()) if col.size else 0
        bits.append(top.bit_length() - 1 if top >= 2 else 0)
    if all(k == 0 for k in bits):
        return sys, tuple(range(n))

    embedding = []
    col_of = {}
    c = 0
    for j in range(n):
        embedding.append(c)
        for s in range(bits[j] + 1):
            col_of[(j, s)] = c
            c += 1
    n2 = c
    chain_rows = sum(bits)
    a2 = np.zeros((m + chain_rows, n2), dtype=np.int64)
    b2 = np.zeros(m + chain_rows, dtype=np.int64)
    for i in range(m):
        b2[i] = b[i]
        for j in range(n):
            coeff = int(a[i, j])
            if coeff == 0:
                continue
            sgn = 1 if coeff > 0 else -1
            mag = abs(coeff)
            for s in range(bits[j] + 1):
                if (mag >> s) & 1:
                    a2[i, col_of[(j, s)]] = sgn
    row = m
    for j in range(n):
        for s in range(bits[j]):
            a2[row, col_of[(j, s)]] = 2
            a2[row, col_of[(j, s + 1)]] = -1
            row += 1
    return RationalLinearSystem(a2, b2), tuple(embedding)


def _int_det(mat):
    """Exact determinant of a small integer matrix (fraction-free Bareiss)."""
    a = [[int(x) for x in row] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1]


def _independent_rows(a, b):
    """Original indices of a maximal independent row set of A (exact
    Gaussian elimination on (A|b)), or None when elimination exposes an
    inconsistent row 0 = c (the system has no real solution at all)."""
    m, n = a.shape
    work = [[Fraction(int(x)) for x in a[i]] + [Fraction(int(b[i]))] for i in range(m)]
    perm = list(range(m))
    kept = []
    row = 0
    for col in range(n):
        pivot = next((i for i in range(row, m) if work[i][col] != 0), None)
        if pivot is None:
            continue
        work[row], work[pivot] = work[pivot], work[row]
        perm[row], perm[pivot] = perm[pivot], perm[row]
        kept.append(perm[row])
        for i in range(row + 1, m):
            if work[i][col] != 0:
                f = work[i][col] / work[row][col]
                for j in range(col, n + 1):
                    work[i][j] -= f * work[row][j]
        row += 1
        if row == m:
            break
    for i in range(row, m):
        if work[i][n] != 0:
            return None
    return kept


def compute_bound_U(sys, basis_budget=3000):
    """Upper bound on every coordinate of every vertex of {y>=0 : Ay=b}.

    When the number of candidate bases is small the exact Cramer bound is
    computed (max |det(B with b substituted)| / |det B| over invertible
    column bases of an independent row subset); otherwise the Hadamard row
    bound on subdeterminants of (A|b) is used.  Exact integer arithmetic
    throughout; overestimates only enlarge the encoding.
    """
    rows = _independent_rows(sys.a, sys.b)
    if rows is not None and rows != []:
        r = len(rows)
        ar = sys.a[rows]
        br = sys.b[rows]
        n = sys.n
        if r <= n and math.comb(n, r) <= basis_budget:
            best = Fraction(0)
            for cols in combinations(range(n), r):
                base = ar[:, cols]
                den = _int_det(base)
                if den == 0:
                    continue
                for pos in range(r):
                    num = base.copy()
                    num[:, pos] = br
                    val = Fraction(abs(_int_det(num)), abs(den))
                    if val > best:
                        best = val
            return max(1, math.ceil(best))
    prod = 1
    for i in range(sys.m):
        norm_sq = sum(int(x) * int(x) for x in sys.a[i]) + int(sys.b[i]) ** 2
        prod *= max(1, norm_sq)
    root = math.isqrt(prod)
    if root * root < prod:
        root += 1
    return max(1, root)


def encode_plane_sum(sys, big_u):
    """Build the r x r x h instance for a system with bound `big_u`.

    Works for any integer coefficients; `full_encode` reduces them first to
    keep the box sizes r_j small.  Raises EncodingInfeasibleError when a
    computed plane-sum is negative, which proves the system has no
    nonnegative integer solution below the bound.
    """
    a, b = sys.a, sys.b
    m, n = sys.m, sys.n
    h = m + 1
    big_u = int(big_u)
    if big_u < 0:
        raise InvalidInputError("bound must be nonnegative")

    box_sizes = []
    for j in range(n):
        col = a[:, j]
        pos = int(col[col > 0].sum())
        neg = int(-col[col < 0].sum())
        box_sizes.append(max(pos, neg))

    sigma = []
    boxes = []
    enabled = set()
    start = 0
    for j in range(n):
        rj = box_sizes[j]
        if rj == 0:
            sigma.append(None)
            boxes.append((start, 0))
            continue
        k_plus, k_minus = [], []
        for k in range(m):
            coeff = int(a[k, j])
            if coeff > 0:
                k_plus.extend([k] * coeff)
            elif coeff < 0:
                k_minus.extend([k] * (-coeff))
        k_plus.extend([h - 1] * (rj - len(k_plus)))
        k_minus.extend([h - 1] * (rj - len(k_minus)))
        for s in range(rj):
            diag = start + s
            off = start + ((s + 1) % rj)
            enabled.add((diag, diag, k_plus[s]))
            enabled.add((diag, off, k_minus[s]))
        sigma.append((start, start, k_plus[0]))
        boxes.append((start, rj))
        start += rj
    r = start

    w = []
    for k in range(m):
        col_neg = sum(-int(x) for x in a[k] if x < 0)
        wk = int(b[k]) + big_u * col_neg
        if wk < 0:
            raise EncodingInfeasibleError(
                f"plane-sum {wk} for equation {k} is negative: no lattice point"
            )
        w.append(wk)
    w_last = r * big_u - sum(w)
    if w_last < 0:
        raise EncodingInfeasibleError(
            f"slack plane-sum {w_last} is negative: no lattice point"
        )
    w.append(w_last)
    if r * big_u >= _INT64_GUARD:
        raise InvalidInputError("instance margins exceed the checked 64-bit range")

    return EncodedInstance(
        r=r,
        h=h,
        big_u=big_u,
        u=np.full(r, big_u, dtype=np.int64),
        v=np.full(r, big_u, dtype=np.int64),
        w=np.array(w, dtype=np.int64),
        enabled=frozenset(enabled),
        sigma=tuple(sigma),
        boxes=tuple(boxes),
        system=sys,
    )


def full_encode(sys, bound=None):
    """reduce_coefficients -> compute_bound_U -> encode_plane_sum.

    `bound` overrides the computed vertex bound (callers who know a tighter
    box can shrink the instance).
    """
    reduced, embedding = reduce_coefficients(sys)
    big_u = compute_bound_U(reduced) if bound is None else int(bound)
    inst = encode_plane_sum(reduced, big_u)
    inst.embedding = embedding
    inst.orig_system = sys
    labels = [None] * reduced.n
    for j, c0 in enumerate(embedding):
        nxt = embedding[j + 1] if j + 1 < len(embedding) else reduced.n
        for s, c in enumerate(range(c0, nxt)):
            labels[c] = (j, s)
    inst.var_labels = tuple(labels)
    return inst


def decode_solution(inst, table):
    """Read the original solution vector out of a face table.

    The table must match the instance margins exactly and vanish on every
    forbidden entry; the decoded vector is verified against the original
    system.  Violations raise InvalidWitnessError.
    """
    t = np.asarray(table)
    if t.shape != inst.shape3:
        raise InvalidWitnessError("witness shape mismatch")
    if (t < 0).any():
        raise InvalidWitnessError("witness has negative entries")
    if (
        (t.sum(axis=(1, 2)) != inst.u).any()
        or (t.sum(axis=(0, 2)) != inst.v).any()
        or (t.sum(axis=(0, 1)) != inst.w).any()
    ):
        raise InvalidWitnessError("witness violates the instance margins")
    mask = inst.enabled_mask()
    if t[~mask].any():
        raise InvalidWitnessError("witness is nonzero on a forbidden entry")

    x = np.zeros(inst.system.n, dtype=np.int64)
    for j, cell in enumerate(inst.sigma):
        if cell is not None:
            x[j] = t[cell]
    y = np.array([x[c] for c in inst.embedding], dtype=np.int64)
    orig = inst.orig_system
    if (orig.a @ y != orig.b).any():
        raise InvalidWitnessError("decoded vector does not satisfy the system")
    return y
