"""Exact batches of dyadic points as scaled integer arrays.

A batch is an integer array ``coords`` of shape (N, k) and an exponent
``exp``: row i is the point ``coords[i] * 2**exp``.  Arrays are int64 when
every intermediate provably fits, otherwise numpy object arrays of Python
ints, so results are exact either way.
"""

from __future__ import annotations

import numpy as np

from .dyadic import Dyadic, Point

# headroom below 2**63 for sums of a few products
SAFE_BITS = 60


def max_bits(arr) -> int:
    if arr.size == 0:
        return 0
    return max(int(arr.max()).bit_length(), int(arr.min()).bit_length())


def widen(arr):
    return arr if arr.dtype == object else arr.astype(object)


def narrow_if(arr, fits: bool):
    """Return ``arr`` as int64 when ``fits``, else as an object array."""
    if fits:
        return arr if arr.dtype == np.int64 else arr.astype(np.int64)
    return widen(arr)


def shift_left(arr, s: int):
    """Exact ``arr * 2**s`` for s >= 0, widening to object if needed."""
    if s == 0:
        return arr
    if arr.dtype != object and max_bits(arr) + s <= SAFE_BITS:
        return arr << s
    return widen(arr) << s


def floor_scaled(d: Dyadic, shift: int) -> int:
    """``floor(d * 2**shift)`` as a Python int."""
    return d.shift(shift).floor(0).numerator


def from_points(points):
    """Pack an iterable of Points into ``(coords, exp)``."""
    points = [p if isinstance(p, Point) else Point(p) for p in points]
    if not points:
        raise ValueError("empty point batch")
    e = min((c.exponent for p in points for c in p if c.mantissa), default=0)
    rows = [[c.scaled_int(e) for c in p] for p in points]
    bits = max((abs(v).bit_length() for r in rows for v in r), default=0)
    arr = np.array(rows, dtype=np.int64 if bits <= SAFE_BITS else object)
    return arr, e


def to_points(coords, e: int):
    return [Point(Dyadic(int(v), e) for v in row) for row in coords]


def rescale(coords, e: int, f: int):
    """Express a batch at exponent e on the finer exponent f <= e."""
    return shift_left(coords, e - f)


def sum_sq(diff):
    """Row-wise sum of squares of an integer difference array."""
    fits = diff.dtype != object and 2 * max_bits(diff) + 2 <= SAFE_BITS
    d = narrow_if(diff, fits)
    return (d * d).sum(axis=1)
