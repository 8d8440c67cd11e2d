"""Integer tables with fixed margins.

A 2-way table is an m x n array of nonnegative integers with prescribed row
and column sums; a 3-way table is l x m x n with three prescribed 1-margin
families (sums over the other two axes).  Tables are plain numpy int64
arrays; this module provides the margin accessors, the real-feasibility
check, the greedy corner rule that constructs an initial integer table, and
axis projections.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import InvalidInputError, MarginMismatchError


def as_margin_vector(vec, name="margin"):
    """Coerce to a 1-d nonnegative int64 vector or raise InvalidInputError."""
    arr = np.asarray(vec)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a nonempty 1-d vector")
    if not np.issubdtype(arr.dtype, np.integer):
        if np.issubdtype(arr.dtype, np.floating) and np.all(arr == np.floor(arr)):
            arr = arr.astype(np.int64)
        else:
            raise InvalidInputError(f"{name} must be integer-valued")
    arr = arr.astype(np.int64)
    if (arr < 0).any():
        raise InvalidInputError(f"{name} has a negative entry")
    return arr


@dataclass(frozen=True)
class Margins3:
    """The three 1-margin families of an l x m x n table."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_margin_vector(self.x, "x"))
        object.__setattr__(self, "y", as_margin_vector(self.y, "y"))
        object.__setattr__(self, "z", as_margin_vector(self.z, "z"))

    @property
    def shape(self):
        return (len(self.x), len(self.y), len(self.z))

    def feasible(self):
        """Real feasibility: all three totals agree."""
        return int(self.x.sum()) == int(self.y.sum()) == int(self.z.sum())


def _margin_list(margins):
    """Normalize a Margins3 or a sequence of 2 or 3 vectors to a list of vectors."""
    if isinstance(margins, Margins3):
        return [margins.x, margins.y, margins.z]
    vecs = [as_margin_vector(v) for v in margins]
    if len(vecs) not in (2, 3):
        raise InvalidInputError("expected 2 or 3 margin vectors")
    return vecs


def check_real_feasibility(margins):
    """True iff every margin vector has the same total.

    Accepts a Margins3 or an iterable of two (2-way) or three (3-way)
    nonnegative integer vectors.
    """
    vecs = _margin_list(margins)
    totals = {int(v.sum()) for v in vecs}
    return len(totals) == 1


def canonical_sequence(dims):
    """Row-major order over all index tuples of the given dims."""
    return list(product(*(range(d) for d in dims)))


def northwest_corner(margins, sequence=None):
    """Greedy corner rule: maximize each entry in turn against its margins.

    Visits the index tuples in `sequence` (default: canonical row-major
    order), setting each entry to the minimum of its remaining margins and
    decrementing them.  For feasible integer margins the result is a
    nonnegative integer table satisfying every 1-margin exactly.  The table
    depends on the sequence; the margins do not.
    """
    vecs = _margin_list(margins)
    if not check_real_feasibility(vecs):
        raise MarginMismatchError("margin totals disagree")
    dims = tuple(len(v) for v in vecs)
    if sequence is None:
        sequence = canonical_sequence(dims)
    else:
        sequence = [tuple(ix) for ix in sequence]
        if len(sequence) != int(np.prod(dims)) or set(sequence) != set(
            canonical_sequence(dims)
        ):
            raise InvalidInputError("sequence is not a permutation of all index tuples")
    remaining = [v.copy() for v in vecs]
    table = np.zeros(dims, dtype=np.int64)
    for ix in sequence:
        t = min(int(rem[i]) for rem, i in zip(remaining, ix))
        table[ix] = t
        for rem, i in zip(remaining, ix):
            rem[i] -= t
    return table


def margins_of(table):
    """Margin vectors of a table: (rows, cols) for 2-way, Margins3 for 3-way."""
    t = np.asarray(table)
    if t.ndim == 2:
        return t.sum(axis=1), t.sum(axis=0)
    if t.ndim == 3:
        return Margins3(
            t.sum(axis=(1, 2)), t.sum(axis=(0, 2)), t.sum(axis=(0, 1))
        )
    raise InvalidInputError("table must be 2- or 3-dimensional")


def project_xz(table):
    """(i,k) entry is the sum over j."""
    t = np.asarray(table)
    if t.ndim != 3:
        raise InvalidInputError("xz projection needs a 3-way table")
    return t.sum(axis=1)


def project_yz(table):
    """(j,k) entry is the sum over i."""
    t = np.asarray(table)
    if t.ndim != 3:
        raise InvalidInputError("yz projection needs a 3-way table")
    return t.sum(axis=0)


def slice_xy(table, k):
    """The k-th horizontal slice, an l x m table."""
    t = np.asarray(table)
    if t.ndim != 3:
        raise InvalidInputError("horizontal slice needs a 3-way table")
    if not 0 <= k < t.shape[2]:
        raise InvalidInputError(f"slice index {k} out of range")
    return t[:, :, k]


def project_axes(table, axes, k=None):
    """Dispatch on an axes selector: 'xz', 'yz', or 'xy' (slice k)."""
    if axes == "xz":
        return project_xz(table)
    if axes == "yz":
        return project_yz(table)
    if axes == "xy":
        if k is None:
            raise InvalidInputError("'xy' projection needs a slice index k")
        return slice_xy(table, k)
    raise InvalidInputError(f"unknown axes selector {axes!r}")
