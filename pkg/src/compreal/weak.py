"""Weak computability: finite dyadic clouds close to a set in Hausdorff distance.

``cloud_from_oracle`` turns a pixel oracle into a cloud certified to
``2**-n``; ``oracle_from_cloud`` turns a uniform cloud generator back into
a pixel oracle.  Distances are compared exactly on scaled integers.
"""

from __future__ import annotations

import threading
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .dyadic import Box, Dyadic, Point, parse_dyadic
from .errors import DimensionMismatch, EmptyCloud, ParseError
from .lattice import SAFE_BITS, max_bits, narrow_if, rescale, widen
from .sets import ComputableSet, leq, threshold


def _sort_unique(coords):
    if len(coords) == 0:
        return coords
    if coords.dtype != object:
        return np.unique(coords, axis=0)
    rows = sorted({tuple(int(v) for v in r) for r in coords})
    return np.array(rows, dtype=object)


class DyadicCloud:
    """A finite nonempty set of dyadic points, stored as ``coords * 2**exp``.

    Rows are deduplicated and sorted lexicographically, so equal clouds have
    identical arrays and identical CSV text.  ``precision`` is the n the
    cloud certifies (``d_H <= 2**-n``), or None when unknown.
    """

    def __init__(self, coords, exp: int, precision: int | None = None):
        coords = np.asarray(coords)
        if coords.ndim != 2 or len(coords) == 0:
            raise EmptyCloud("a cloud needs at least one point")
        if coords.dtype != object and coords.dtype != np.int64:
            coords = coords.astype(np.int64)
        if coords.dtype == object and max_bits(coords) <= SAFE_BITS:
            coords = coords.astype(np.int64)
        self.coords = _sort_unique(coords)
        self.exp = exp
        self.precision = precision

    @classmethod
    def from_points(cls, points, precision=None) -> "DyadicCloud":
        from .lattice import from_points
        coords, e = from_points(points)
        return cls(coords, e, precision)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self):
        return len(self.coords)

    def points(self):
        e = self.exp
        return [Point(Dyadic(int(v), e) for v in row) for row in self.coords]

    def to_csv(self) -> str:
        return "".join(",".join(str(c) for c in p) + "\n" for p in self.points())

    @classmethod
    def from_csv(cls, text: str, precision=None) -> "DyadicCloud":
        pts = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                pts.append(Point(parse_dyadic(f) for f in line.split(",")))
            except ParseError as exc:
                raise ParseError(f"bad cloud row: {exc}", line=lineno, col=1) from None
        if not pts:
            raise EmptyCloud("cloud file has no points")
        if len({p.dim for p in pts}) != 1:
            raise DimensionMismatch("cloud rows differ in dimension")
        return cls.from_points(pts, precision)

    def floats(self):
        return np.ldexp(self.coords.astype(float), self.exp)

    def __eq__(self, other):
        return (isinstance(other, DyadicCloud) and self.exp == other.exp
                and self.coords.shape == other.coords.shape
                and bool(np.all(self.coords == other.coords)))

    def __repr__(self):
        return f"DyadicCloud({len(self)} points, exp={self.exp}, precision={self.precision})"


def _at(cloud: DyadicCloud, f: int):
    return rescale(cloud.coords, cloud.exp, f)


def _directed_sq(a, b, block=2048):
    """max over rows of a of min over rows of b of squared distance (scaled ints)."""
    bits = max(max_bits(a), max_bits(b)) + 1
    fits = a.dtype != object and b.dtype != object and 2 * bits + 2 <= SAFE_BITS
    a = narrow_if(a, fits)
    b = narrow_if(b, fits)
    worst = 0
    for start in range(0, len(a), block):
        chunk = a[start:start + block]
        diff = chunk[:, None, :] - b[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        m = d2.min(axis=1).max()
        worst = max(worst, int(m))
    return worst


def hausdorff_sq(a: DyadicCloud, b: DyadicCloud) -> Fraction:
    """Exact squared Hausdorff distance between two clouds (brute force)."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"clouds of dimension {a.dim} and {b.dim}")
    f = min(a.exp, b.exp)
    ai, bi = _at(a, f), _at(b, f)
    worst = max(_directed_sq(ai, bi), _directed_sq(bi, ai))
    return Fraction(worst) * Fraction(2) ** (2 * f)


def directed_sq(a: DyadicCloud, b: DyadicCloud) -> Fraction:
    """Exact ``sup_{p in a} dist(p, b)**2``."""
    f = min(a.exp, b.exp)
    return Fraction(_directed_sq(_at(a, f), _at(b, f))) * Fraction(2) ** (2 * f)


# -- oracle => cloud --------------------------------------------------------


def _grid_range(box: Box, g: int):
    """Index ranges covering the box on the 2**-g grid, one spacing of slack."""
    return [(ax.lo.floor(g).scaled_int(-g), ax.hi.ceil(g).scaled_int(-g)) for ax in box.axes]


def _width_bits(w: Dyadic) -> int:
    """Some b with ``w < 2**b``."""
    return abs(w.mantissa).bit_length() + w.exponent if w.mantissa else -(1 << 30)


def _quadtree(s: ComputableSet, blocks, j: int, L: int, ranges):
    """Refine level-j blocks down to the grid points that are In at L.

    A block at level j holds ``2**(L-j)`` grid points per axis.  Its center
    being Out at precision j-1 puts it more than ``2**-(j-1)`` from the set,
    so every grid point in it is farther than ``2 * 2**-L`` and cannot be In.
    """
    k = s.dim
    offsets = np.array(np.meshgrid(*([[0, 1]] * k), indexing="ij")).reshape(k, -1).T
    while j < L and len(blocks):
        size = 1 << (L - j)
        # centers in units of 2**-(L+1)
        centers = 2 * blocks * size + (size - 1)
        keep = s.query_lattice(narrow_if(centers, max_bits(centers) <= SAFE_BITS), -(L + 1), j - 1)
        blocks = blocks[keep]
        blocks = (2 * blocks[:, None, :] + offsets[None, :, :]).reshape(-1, k)
        j += 1
    lows = np.array([r[0] for r in ranges], dtype=object)
    highs = np.array([r[1] for r in ranges], dtype=object)
    pts = blocks[np.all((blocks >= lows) & (blocks <= highs), axis=1)]
    pts = narrow_if(pts, max_bits(pts) <= SAFE_BITS)
    if len(pts) == 0:
        return pts
    return pts[s.query_lattice(pts, -L, L)]


def _blocks_for(ranges, size):
    axes = [np.arange(lo // size, hi // size + 1, dtype=object) for lo, hi in ranges]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def cloud_from_oracle(s: ComputableSet, box: Box, n: int) -> DyadicCloud:
    """Grid points of spacing ``2**-(n+2)`` in the box that the oracle calls In at n+2.

    The grid extends one spacing past the box.  The scan is a quadtree
    whose result equals the full scan for any oracle honouring its
    contract, so the cloud is within ``2**-n`` of ``S`` near the box.
    """
    if box.dim != s.dim:
        raise DimensionMismatch("box and set dimensions differ")
    if s.dim > 2:
        raise DimensionMismatch("clouds are supported in dimensions 1 and 2")
    L = n + 2
    ranges = _grid_range(box, L)
    # coarsest level: cells about as wide as the box, and at most 1/2
    j = max(1, min(L, -max(_width_bits(ax.width()) for ax in box.axes)))
    pts = _quadtree(s, _blocks_for(ranges, 1 << (L - j)), j, L, ranges)
    if len(pts) == 0:
        raise EmptyCloud(f"oracle reports no In points in {box} at precision {n}")
    return DyadicCloud(pts, -L, precision=n)


# -- cloud => oracle --------------------------------------------------------


class CloudGenerator:
    """A uniform map ``n -> DyadicCloud`` certified to ``2**-n``.

    Clouds are memoised per precision.  Subclasses that can build part of a
    cloud cheaply override :meth:`cover`.
    """

    def __init__(self, fn, dim: int):
        self._fn = fn
        self.dim = dim
        self._lock = threading.Lock()
        self._cache = {}

    def __call__(self, n: int) -> DyadicCloud:
        with self._lock:
            cloud = self._cache.get(n)
        if cloud is None:
            cloud = self._fn(n)
            with self._lock:
                cloud = self._cache.setdefault(n, cloud)
        return cloud

    def cover(self, coords, e: int, radius: Dyadic, n: int):
        """Some subset of ``self(n)`` holding every cloud point within
        ``radius`` (per axis) of a query row, as ``(coords, exp)``; or None
        to mean the whole cloud."""
        return None


def _nearest_within(coords, e, pts, pe, t: Dyadic, tree=None):
    """Per query row: is some point of ``pts`` within distance ``t``?

    A float KD-tree settles clear cases; rows near the threshold are
    rechecked exactly on scaled integers.
    """
    out = np.zeros(len(coords), dtype=bool)
    if len(pts) == 0 or len(coords) == 0:
        return out
    pf = np.ldexp(pts.astype(float), pe)
    if tree is None:
        tree = cKDTree(pf)
    q = np.ldexp(np.asarray(coords, dtype=float), e)
    tf = float(t)
    extent = float(np.abs(pf).max()) + float(np.abs(q).max())
    exact = max_bits(pts) <= 52 and max_bits(coords) <= 52
    # floats of 53-bit ints are exact; the distance itself carries a few ulps
    slack = tf * 1e-9 + (16 * 2.0**-52 if exact else 2.0**-20) * extent
    dist, _ = tree.query(q, k=1, distance_upper_bound=tf + 2 * slack)
    out = dist <= tf - slack
    unsure = ~out & (dist < tf + slack)
    for i in np.nonzero(unsure)[0]:
        cand = tree.query_ball_point(q[i], tf + 2 * slack)
        out[i] = _min_dist_sq_le(coords[i:i + 1], e, pts[cand], pe, t * t)[0]
    return out


def _min_dist_sq_le(x, xe, pts, pe, bound: Dyadic):
    """For each row of x: is some row of pts within squared distance ``bound``?"""
    if len(pts) == 0:
        return np.zeros(len(x), dtype=bool)
    f = min(xe, pe)
    xs = rescale(x, xe, f)
    ps = rescale(pts, pe, f)
    bits = max(max_bits(xs), max_bits(ps)) + 1
    fits = xs.dtype != object and ps.dtype != object and 2 * bits + 2 <= SAFE_BITS
    xs, ps = narrow_if(xs, fits), narrow_if(ps, fits)
    lim = bound.shift(-2 * f).floor(0).numerator
    out = np.zeros(len(xs), dtype=bool)
    for start in range(0, len(xs), 1024):
        diff = xs[start:start + 1024, None, :] - ps[None, :, :]
        d2 = (diff * diff).sum(axis=2).min(axis=1)
        out[start:start + 1024] = leq(d2, lim)
    return out


class CloudOracle(ComputableSet):
    """Pixel oracle read off a cloud generator.

    ``query(d, n)``: take ``T = gen(n+2)`` and answer In iff
    ``dist(d, T) <= (3/2) 2**-n``.
    """

    def __init__(self, gen: CloudGenerator, box: Box):
        self.gen = gen
        self.dim = box.dim
        self.bbox = box
        self._lock = threading.Lock()
        self._trees = {}

    def _tree(self, m: int):
        with self._lock:
            hit = self._trees.get(m)
        if hit is None:
            cloud = self.gen(m)
            hit = (cloud, cKDTree(cloud.floats()))
            with self._lock:
                hit = self._trees.setdefault(m, hit)
        return hit

    def query_lattice(self, coords, e, n):
        self._check_batch(coords)
        t = threshold(n)
        part = self.gen.cover(coords, e, t, n + 2)
        if part is not None:
            return _nearest_within(coords, e, part[0], part[1], t)
        cloud, tree = self._tree(n + 2)
        return _nearest_within(coords, e, cloud.coords, cloud.exp, t, tree)

    def __repr__(self):
        return "oracle_from_cloud(...)"


def oracle_from_cloud(gen, box: Box) -> CloudOracle:
    """Pixel oracle from a generator (a CloudGenerator or any ``n -> DyadicCloud``)."""
    if not isinstance(gen, CloudGenerator):
        gen = CloudGenerator(gen, box.dim)
    return CloudOracle(gen, box)


def _floor_div_pow2(a, s: int):
    """``floor(a * 2**s)`` for an object array a and any integer s."""
    return a << s if s >= 0 else a >> -s


class OracleCloudGenerator(CloudGenerator):
    """The uniform generator ``n -> cloud_from_oracle(s, box, n)``.

    :meth:`cover` runs the same quadtree seeded only with the blocks around
    the query points, so a batch of queries never pays for the whole cloud.
    """

    def __init__(self, s: ComputableSet, box: Box):
        super().__init__(lambda n: cloud_from_oracle(s, box, n), s.dim)
        self.set = s
        self.box = box

    def cover(self, coords, e, radius, n):
        L = n + 2
        ranges = _grid_range(self.box, L)
        r = radius.shift(L).ceil(0).numerator
        # blocks about as wide as a window, so each window meets few of them
        size = 1 << max(0, min(L - 1, (2 * r).bit_length()))
        j = L - size.bit_length() + 1
        c = _floor_div_pow2(widen(np.asarray(coords)), e + L)
        blocks = []
        for i, (lo, hi) in enumerate(ranges):
            a = np.clip(c[:, i] - r, lo, hi) // size
            b = np.clip(c[:, i] + r + 1, lo, hi) // size
            blocks.append((a, b))
        span = max(int((b - a).max()) for a, b in blocks) + 1
        cand = []
        for off in np.ndindex(*([span] * self.dim)):
            rows = np.stack([a + o for (a, _), o in zip(blocks, off)], axis=1)
            ok = np.all(np.stack([a + o <= b for (a, b), o in zip(blocks, off)], axis=1), axis=1)
            cand.append(rows[ok])
        cand = np.concatenate(cand)
        cand = narrow_if(cand, max_bits(cand) <= SAFE_BITS)
        cand = _sort_unique(cand)
        pts = _quadtree(self.set, cand.astype(object), j, L, ranges)
        return pts, -L


def oracle_cloud_generator(s: ComputableSet, box: Box) -> CloudGenerator:
    return OracleCloudGenerator(s, box)


__all__ = [
    "DyadicCloud",
    "CloudGenerator",
    "CloudOracle",
    "OracleCloudGenerator",
    "cloud_from_oracle",
    "directed_sq",
    "hausdorff_sq",
    "oracle_cloud_generator",
    "oracle_from_cloud",
]
