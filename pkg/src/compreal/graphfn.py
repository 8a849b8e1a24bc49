"""Functions as computable graphs.

A (possibly discontinuous or multivalued) function is represented by its
closed graph, a :class:`ComputableSet` in the plane.  Evaluation at x scans
the vertical slice and reports every run of In samples, so a jump shows up
as two clusters and a two-valued function as two clusters.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .creal import BitFunction, CReal, bitfunc_eval
from .dyadic import Box, Dyadic, DyadicInterval
from .errors import DimensionMismatch, DomainViolation, EmptyResult
from .lattice import SAFE_BITS, narrow_if, max_bits
from .sets import ComputableSet, Segment, set_union
from .weak import CloudGenerator, DyadicCloud, oracle_from_cloud


@dataclass
class GraphFunction:
    graph: ComputableSet
    domain: DyadicInterval
    range: DyadicInterval
    name: str = "graph"

    @classmethod
    def from_set(cls, s: ComputableSet, name: str = "graph") -> "GraphFunction":
        """Read any planar set as a multivalued function over its bounding box."""
        if s.dim != 2:
            raise DimensionMismatch("a graph lives in the plane")
        x_ax, y_ax = s.bbox.axes
        return cls(s, x_ax, y_ax, name)


def _index_range(lo: Dyadic, hi: Dyadic, g: int):
    """Grid indices i with ``i * 2**-g`` covering [lo, hi] (outermost points included)."""
    return lo.floor(g).scaled_int(-g), hi.ceil(g).scaled_int(-g)


class GraphCloudGenerator(CloudGenerator):
    """Clouds ``{(x_i, round(f(x_i), n+3))}`` on an x-grid fine enough for f's modulus.

    Samples are memoised per (precision, index), and :meth:`cover` builds
    only the samples near the queried columns.
    """

    def __init__(self, f: BitFunction, domain: DyadicInterval):
        super().__init__(self._full, 2)
        self.f = f
        self.domain = domain
        self._memo = {}
        self._memo_lock = threading.Lock()

    def spacing_bits(self, n: int) -> int:
        return max(n + 3, self.f.modulus(n + 3))

    def _count(self, n: int) -> int:
        """Index of the last sample; sample i sits at ``lo + i * 2**-D``, clipped to hi."""
        return self.domain.width().shift(self.spacing_bits(n)).ceil(0).numerator

    def _x(self, i: int, D: int) -> Dyadic:
        return min(self.domain.lo + Dyadic(i, -D), self.domain.hi)

    def _sample(self, n: int, i: int) -> tuple[Dyadic, Dyadic]:
        key = (n, i)
        with self._memo_lock:
            hit = self._memo.get(key)
        if hit is None:
            x = self._x(i, self.spacing_bits(n))
            y = bitfunc_eval(self.f, [CReal.const(x)], n + 3).round(n + 3)
            hit = (x, y)
            with self._memo_lock:
                hit = self._memo.setdefault(key, hit)
        return hit

    def _points(self, n, indices):
        pts = [self._sample(n, i) for i in indices]
        e = min([c.exponent for p in pts for c in p if c.mantissa] + [0])
        arr = np.array([[c.scaled_int(e) for c in p] for p in pts], dtype=object)
        return narrow_if(arr, max_bits(arr) <= SAFE_BITS), e

    def _full(self, n: int) -> DyadicCloud:
        coords, e = self._points(n, range(self._count(n) + 1))
        return DyadicCloud(coords, e, precision=n)

    def cover(self, coords, e, radius, n):
        D = self.spacing_bits(n)
        last = self._count(n)
        lo = self.domain.lo
        wanted = set()
        for x in {int(v) for v in coords[:, 0]}:
            xd = Dyadic(x, e)
            a = (xd - radius - lo).floor(D).scaled_int(-D)
            b = (xd + radius - lo).ceil(D).scaled_int(-D)
            wanted.update(range(max(a, 0), min(b, last) + 1))
        if not wanted:
            return np.zeros((0, 2), dtype=np.int64), 0
        return self._points(n, sorted(wanted))


def graph_cloud(f: BitFunction, domain: DyadicInterval | None = None, n: int = 0) -> DyadicCloud:
    """Cloud within ``2**-n`` of the graph of f over the domain."""
    domain = domain or f.domain.axes[0]
    return GraphCloudGenerator(f, domain)(n)


def gf_from_bitfunc(f: BitFunction, domain: DyadicInterval | None = None) -> GraphFunction:
    if f.arity != 1:
        raise DimensionMismatch("graphs are drawn for functions of one variable")
    domain = domain or f.domain.axes[0]
    if not (f.domain.axes[0].lo <= domain.lo and domain.hi <= f.domain.axes[0].hi):
        raise DomainViolation(f"{domain} is not inside the function's domain {f.domain.axes[0]}")
    rng = f.range
    gen = GraphCloudGenerator(f, domain)
    return GraphFunction(oracle_from_cloud(gen, Box([domain, rng])), domain, rng, str(f))


def gf_step() -> GraphFunction:
    """The unit step on [-1, 1], with its graph closed at the jump.

    Both one-sided limits (0,0) and (0,1) belong to the graph.  For the
    vertical-segment reading, add ``Segment((0, 0), (0, 1))`` to the union.
    """
    g = set_union(Segment((-1, 0), (0, 0)), Segment((0, 1), (1, 1)))
    return GraphFunction(g, DyadicInterval(-1, 1), DyadicInterval(0, 1), "step")


class _SqrtCloud(CloudGenerator):
    """``{(t**2, t)}`` for t on a grid of spacing ``2**-(n+4)`` in [-1, 1]."""

    def __init__(self):
        super().__init__(self._full, 2)

    @staticmethod
    def _rows(n, ts):
        s = n + 4
        t = np.asarray(ts, dtype=object)
        # t * 2**-s and t**2 * 2**-2s, both at exponent -2s
        arr = np.stack([t * t, t << s], axis=1)
        return narrow_if(arr, 2 * s + 2 <= SAFE_BITS), -2 * s

    def _full(self, n):
        k = 1 << (n + 4)
        coords, e = self._rows(n, range(-k, k + 1))
        return DyadicCloud(coords, e, precision=n)

    def cover(self, coords, e, radius, n):
        s = n + 4
        k = 1 << s
        wanted = set()
        for y in {int(v) for v in coords[:, 1]}:
            yd = Dyadic(y, e)
            a = (yd - radius).floor(s).scaled_int(-s)
            b = (yd + radius).ceil(s).scaled_int(-s)
            wanted.update(range(max(a, -k), min(b, k) + 1))
        return self._rows(n, sorted(wanted))


def gf_sqrt_multivalued() -> GraphFunction:
    """Both square roots of x on [0, 1]: the graph ``{(t**2, t) : |t| <= 1}``."""
    gen = _SqrtCloud()
    box = Box([(0, 1), (-1, 1)])
    return GraphFunction(oracle_from_cloud(gen, box), DyadicInterval(0, 1), DyadicInterval(-1, 1), "sqrt")


def gf_eval(F: GraphFunction, x, n: int) -> list[DyadicInterval]:
    """Value clusters of F at x, as closed intervals on the ``2**-(n+2)`` grid.

    Every value y with (x, y) on the graph lies within ``2**-(n+2)`` of a
    cluster; every cluster point is within ``2**-(n+1)`` of a graph point
    whose abscissa is within ``2**-(n+1)`` of x.
    """
    x = Dyadic.coerce(x)
    if not F.domain.contains(x):
        raise DomainViolation(f"x = {x} is outside the domain {F.domain}")
    g = n + 2
    a, b = _index_range(F.range.lo, F.range.hi, g)
    ys = np.arange(a, b + 1, dtype=object)
    f = min(-g, x.exponent) if x.mantissa else -g
    col = np.stack([np.full(len(ys), x.scaled_int(f), dtype=object), ys << (-g - f)], axis=1)
    hit = F.graph.query_lattice(narrow_if(col, max_bits(col) <= SAFE_BITS), f, g)
    clusters = []
    j = 0
    while j < len(ys):
        if not hit[j]:
            j += 1
            continue
        k = j
        while k + 1 < len(ys) and hit[k + 1]:
            k += 1
        clusters.append(DyadicInterval(Dyadic(int(ys[j]), -g), Dyadic(int(ys[k]), -g)))
        j = k + 1
    if not clusters:
        raise EmptyResult(f"no value of {F.name} found at x = {x}, precision {n}")
    return clusters


__all__ = [
    "GraphCloudGenerator",
    "GraphFunction",
    "gf_eval",
    "gf_from_bitfunc",
    "gf_sqrt_multivalued",
    "gf_step",
    "graph_cloud",
]
