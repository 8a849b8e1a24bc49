"""Computable sets as pixel oracles.

``S.query(d, n)`` answers In (True) or Out (False) for a dyadic point d
and precision n under the local-distance contract:

* ``dist(d, S) <= 2**-n``      implies In,
* ``dist(d, S) >  2 * 2**-n``  implies Out,
* anything in between is a free, but deterministic, choice.

Every set also answers whole batches through :meth:`ComputableSet.query_lattice`;
rasters, cloud extraction and the tests all go through that path.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dyadic import ONE, ZERO, Box, Dyadic, DyadicInterval, Point, dyadic_sqrt_upper
from .errors import DepthOverflow, DimensionMismatch, NonInvertibleMap, ViewportEmpty
from .lattice import (
    SAFE_BITS,
    floor_scaled,
    from_points,
    max_bits,
    narrow_if,
    rescale,
    shift_left,
    sum_sq,
    widen,
)

IN = True
OUT = False


def threshold(n: int) -> Dyadic:
    """The sharp In/Out cut ``(3/2) * 2**-n`` used wherever distances are exact."""
    return Dyadic(3, -n - 1)


def leq(values, bound: int):
    """Elementwise ``values <= bound`` for an exact integer array and a Python int."""
    if values.dtype != object:
        if bound >= 1 << 62:
            return np.ones(values.shape, dtype=bool)
        if bound < -(1 << 62):
            return np.zeros(values.shape, dtype=bool)
    return np.asarray(values <= bound, dtype=bool)


def _common(coords, e, consts):
    """Rescale a batch and a list of dyadics to one shared exponent."""
    f = min([e] + [c.exponent for c in consts if c.mantissa])
    return rescale(coords, e, f), [c.scaled_int(f) if c.mantissa else 0 for c in consts], f


def _sub(a, b):
    """Exact ``a - b`` for an integer batch and a row (or batch) of ints."""
    b = b if isinstance(b, np.ndarray) else np.array(b, dtype=object)
    if a.dtype != object and max_bits(a) < SAFE_BITS and max_bits(b) < SAFE_BITS:
        return a - narrow_if(b, True)
    return widen(a) - widen(b)


class ComputableSet:
    """Base class; subclasses implement :meth:`query_lattice`."""

    dim: int
    bbox: Box

    def query(self, point, n: int) -> bool:
        p = point if isinstance(point, Point) else Point(point)
        if p.dim != self.dim:
            raise DimensionMismatch(f"point of dimension {p.dim} for a {self.dim}-dimensional set")
        coords, e = from_points([p])
        return bool(self.query_lattice(coords, e, n)[0])

    def query_many(self, points, n: int):
        coords, e = from_points(points)
        return self.query_lattice(coords, e, n)

    def query_lattice(self, coords, e: int, n: int):
        raise NotImplementedError

    def _check_batch(self, coords):
        if coords.ndim != 2 or coords.shape[1] != self.dim:
            raise DimensionMismatch(f"batch of shape {coords.shape} for a {self.dim}-dimensional set")


# -- primitives -------------------------------------------------------------


class Primitive(ComputableSet):
    """A shape with exact distances: In iff ``dist <= (3/2) 2**-n``."""

    def query_lattice(self, coords, e, n):
        self._check_batch(coords)
        return self.within_lattice(coords, e, threshold(n))

    def within(self, point, t: Dyadic) -> bool:
        """Exact test ``dist(point, S) <= t``."""
        coords, e = from_points([Point(point)])
        return bool(self.within_lattice(coords, e, t)[0])

    def within_lattice(self, coords, e, t):
        raise NotImplementedError


class PointSet(Primitive):
    def __init__(self, center):
        self.center = Point(center)
        self.dim = self.center.dim
        self.bbox = Box((c, c) for c in self.center)

    def within_lattice(self, coords, e, t):
        x, c, f = _common(coords, e, list(self.center))
        s = sum_sq(_sub(x, c))
        return leq(s, floor_scaled(t * t, -2 * f))

    def __repr__(self):
        return f"point{tuple(str(c) for c in self.center)}"


class Segment(Primitive):
    def __init__(self, a, b):
        self.a = Point(a)
        self.b = Point(b)
        if self.a.dim != self.b.dim:
            raise DimensionMismatch("segment endpoints differ in dimension")
        self.dim = self.a.dim
        self.bbox = Box((min(p, q), max(p, q)) for p, q in zip(self.a, self.b))

    def within_lattice(self, coords, e, t):
        k = self.dim
        x, ab, f = _common(coords, e, list(self.a) + list(self.b))
        a = np.array(ab[:k], dtype=object)
        b = np.array(ab[k:], dtype=object)
        ba = b - a
        big = int(sum(v * v for v in ba))
        tt = floor_scaled(t * t, -2 * f)
        xa = _sub(x, ab[:k])
        if big == 0:
            return leq(sum_sq(xa), tt)
        # degree-4 quantities below: decide the dtype once
        bits = max(max_bits(xa), max(abs(int(v)).bit_length() for v in ba))
        fits = 4 * bits + 4 <= SAFE_BITS and tt.bit_length() + 2 * bits + 2 <= SAFE_BITS
        xa = narrow_if(xa, fits)
        bav = narrow_if(np.array(ba, dtype=object), fits)
        dot = (xa * bav).sum(axis=1)
        da2 = (xa * xa).sum(axis=1)
        xb = xa - bav
        db2 = (xb * xb).sum(axis=1)
        inner = da2 * big - dot * dot
        out = np.where(dot <= 0, leq(da2, tt),
                       np.where(dot >= big, leq(db2, tt), leq(inner, tt * big)))
        return np.asarray(out, dtype=bool)

    def __repr__(self):
        return f"segment({self.a}, {self.b})"


class BoxSet(Primitive):
    def __init__(self, box: Box):
        self.box = box
        self.dim = box.dim
        self.bbox = box

    def within_lattice(self, coords, e, t):
        consts = [a.lo for a in self.box.axes] + [a.hi for a in self.box.axes]
        x, c, f = _common(coords, e, consts)
        k = self.dim
        bits = max(max_bits(x), max(abs(v).bit_length() for v in c))
        fits = x.dtype != object and bits < SAFE_BITS
        lo = narrow_if(np.array(c[:k], dtype=object), fits)
        hi = narrow_if(np.array(c[k:], dtype=object), fits)
        x = narrow_if(x, fits)
        excess = np.maximum(np.maximum(lo - x, x - hi), 0)
        return leq(sum_sq(excess), floor_scaled(t * t, -2 * f))

    def __repr__(self):
        return f"box({self.box})"


class Disk(Primitive):
    """Closed ball; in dimension 1 an interval."""

    def __init__(self, center, radius):
        self.center = Point(center)
        self.radius = Dyadic.coerce(radius)
        if self.radius.sign() < 0:
            raise ValueError("negative radius")
        self.dim = self.center.dim
        self.bbox = Box((c - self.radius, c + self.radius) for c in self.center)

    def within_lattice(self, coords, e, t):
        x, c, f = _common(coords, e, list(self.center))
        s = sum_sq(_sub(x, c))
        r = self.radius + t
        return leq(s, floor_scaled(r * r, -2 * f))

    def __repr__(self):
        return f"disk({self.center}, {self.radius})"


def set_primitive(shape, *args) -> Primitive:
    """Build a primitive by name: point, segment, box or disk."""
    kinds = {"point": PointSet, "segment": Segment, "disk": Disk,
             "box": lambda lo, hi: BoxSet(Box.from_corners(lo, hi))}
    return kinds[shape](*args)


# -- combinators ------------------------------------------------------------


class Union(ComputableSet):
    def __init__(self, a: ComputableSet, b: ComputableSet):
        if a.dim != b.dim:
            raise DimensionMismatch(f"union of {a.dim}- and {b.dim}-dimensional sets")
        self.a = a
        self.b = b
        self.dim = a.dim
        self.bbox = a.bbox.hull(b.bbox)

    def query_lattice(self, coords, e, n):
        self._check_batch(coords)
        return self.a.query_lattice(coords, e, n) | self.b.query_lattice(coords, e, n)

    def __repr__(self):
        return f"union({self.a!r}, {self.b!r})"


def set_union(a: ComputableSet, b: ComputableSet) -> ComputableSet:
    return Union(a, b)


class AffineMap:
    """``x -> A x + t`` with dyadic A and t."""

    def __init__(self, matrix, translation):
        self.matrix = tuple(tuple(Dyadic.coerce(v) for v in row) for row in matrix)
        self.translation = Point(translation)
        k = len(self.matrix)
        if any(len(row) != k for row in self.matrix) or self.translation.dim != k:
            raise DimensionMismatch("affine map shape mismatch")
        self.dim = k

    @classmethod
    def translate(cls, t):
        t = Point(t)
        k = t.dim
        return cls([[ONE if i == j else ZERO for j in range(k)] for i in range(k)], t)

    @classmethod
    def scale(cls, factor, dim=2):
        f = Dyadic.coerce(factor)
        return cls([[f if i == j else ZERO for j in range(dim)] for i in range(dim)], [ZERO] * dim)

    def apply(self, p) -> Point:
        p = Point(p)
        return Point(sum((a * x for a, x in zip(row, p)), ZERO) + t
                     for row, t in zip(self.matrix, self.translation))

    def det(self) -> Dyadic:
        m = self.matrix
        if self.dim == 1:
            return m[0][0]
        if self.dim == 2:
            return m[0][0] * m[1][1] - m[0][1] * m[1][0]
        raise DimensionMismatch("only dimensions 1 and 2 are supported")

    def similarity(self):
        """Return (j, Q) with ``A = 2**j Q`` and Q a signed permutation matrix.

        Only such maps scale every distance by the same power of two, which
        is what lets a query be delegated without loosening the contract.
        """
        if self.det().is_zero():
            raise NonInvertibleMap("singular linear part")
        entries = [v for row in self.matrix for v in row if not v.is_zero()]
        mags = {abs(v) for v in entries}
        if len(entries) != self.dim or len(mags) != 1:
            raise NonInvertibleMap("linear part is not a power-of-two similarity "
                                   "(a signed permutation scaled by 2**j)")
        mag = mags.pop()
        if abs(mag.mantissa) != 1:
            raise NonInvertibleMap(f"similarity ratio {mag} is not a power of two")
        q = [[v.sign() for v in row] for row in self.matrix]
        for col in range(self.dim):
            if sum(abs(q[r][col]) for r in range(self.dim)) != 1:
                raise NonInvertibleMap("linear part is not a signed permutation")
        return mag.exponent, q


class AffineImage(ComputableSet):
    def __init__(self, base: ComputableSet, amap: AffineMap):
        if base.dim != amap.dim:
            raise DimensionMismatch("map and set dimensions differ")
        self.base = base
        self.map = amap
        self.dim = base.dim
        self.j, self.q = amap.similarity()
        corners = [amap.apply(c) for c in base.bbox.corners()]
        self.bbox = Box((min(c[i] for c in corners), max(c[i] for c in corners))
                        for i in range(self.dim))

    def query_lattice(self, coords, e, n):
        self._check_batch(coords)
        x, t, f = _common(coords, e, list(self.map.translation))
        v = _sub(x, t)
        # inverse of a signed permutation is its transpose: y_c = sum_r q[r][c] v_r
        q = np.array(self.q, dtype=np.int64 if v.dtype != object else object)
        y = v @ q
        return self.base.query_lattice(y, f - self.j, n + self.j)

    def __repr__(self):
        return f"affine({self.base!r})"


def set_affine(a: ComputableSet, amap: AffineMap) -> ComputableSet:
    return AffineImage(a, amap)


# -- IFS attractors ---------------------------------------------------------


def _norm_at_most(matrix, rho: Dyadic) -> bool:
    """Exact test of the spectral-norm bound ``||A||_2 <= rho``."""
    if len(matrix) == 1:
        return abs(matrix[0][0]) <= rho
    (a, b), (c, d) = matrix
    # rho^2 I - A^T A must be positive semidefinite
    r2 = rho * rho
    m00 = r2 - (a * a + c * c)
    m11 = r2 - (b * b + d * d)
    m01 = -(a * b + c * d)
    return m00.sign() >= 0 and m11.sign() >= 0 and (m00 * m11 - m01 * m01).sign() >= 0


class IfsSystem:
    """Affine contractions with dyadic coefficients, a verified ratio and a seed."""

    def __init__(self, maps, rho, seed, box: Box):
        self.maps = [m if isinstance(m, AffineMap) else AffineMap(*m) for m in maps]
        self.rho = Dyadic.coerce(rho)
        self.seed = Point(seed)
        self.box = box
        if not self.maps:
            raise ValueError("an IFS needs at least one map")
        if not ZERO <= self.rho < ONE:
            raise ValueError(f"contraction ratio {self.rho} must lie in [0, 1)")
        for m in self.maps:
            if m.dim != box.dim:
                raise DimensionMismatch("map and box dimensions differ")
            if not _norm_at_most(m.matrix, self.rho):
                raise ValueError(f"a map has operator norm above {self.rho}")
            if not all(box.contains(m.apply(c)) for c in box.corners()):
                raise ValueError("a map does not send the bounding box into itself")
        if not box.contains(self.seed):
            raise ValueError("seed lies outside the bounding box")

    @property
    def dim(self):
        return self.box.dim

    def depth_for(self, n: int, max_depth: int = 200) -> int:
        """Least m with ``diam(box) * rho**m <= 2**-(n+2)``."""
        d2 = self.box.diam_sq()
        target = Dyadic(1, -2 * (n + 2))
        m = 0
        r2 = self.rho * self.rho
        while d2 > target:
            if m >= max_depth or r2.is_zero() and m > 0:
                if r2.is_zero():
                    return m
                raise DepthOverflow(f"depth {m} exceeded for precision {n}")
            d2 = d2 * r2
            m += 1
        return m

    def orbit(self, depth: int):
        """All images of the seed under words of length ``depth`` (exact)."""
        pts = [self.seed]
        for _ in range(depth):
            pts = [m.apply(p) for m in self.maps for p in pts]
        return pts


def sierpinski() -> IfsSystem:
    half = Dyadic(1, -1)
    lin = [[half, ZERO], [ZERO, half]]
    maps = [AffineMap(lin, (0, 0)), AffineMap(lin, (half, 0)), AffineMap(lin, (0, half))]
    return IfsSystem(maps, half, (0, 0), Box([(0, 1), (0, 1)]))


def _matmul(lin, a):
    """Batched ``lin[p] @ a`` for a small constant matrix, skipping zeros."""
    p, k, _ = lin.shape
    out = np.zeros((p, k, a.shape[1]), dtype=lin.dtype)
    for j in range(a.shape[1]):
        for t in range(a.shape[0]):
            if a[t, j]:
                out[:, :, j] += lin[:, :, t] * a[t, j]
    return out


def _matvec(lin, b):
    out = np.zeros(lin.shape[:2], dtype=lin.dtype)
    for t in range(len(b)):
        if b[t]:
            out += lin[:, :, t] * b[t]
    return out


class IfsAttractor(ComputableSet):
    """Pixel oracle for an IFS attractor.

    For precision n the reference cloud is the exact depth-m orbit of the
    seed, m chosen so that it lies within ``2**-(n+2)`` of the attractor.  A
    point is In iff some orbit point lies within ``(3/2) 2**-n``.  The
    orbit is never materialised: a batched descent of the word tree prunes
    subtrees by the ball ``rho**i * diam`` around each node and accepts
    early when a whole subtree is within reach.
    """

    CHUNK = 8192

    def __init__(self, system: IfsSystem, max_depth: int = 200):
        self.system = system
        self.dim = system.dim
        self.bbox = system.box
        self.max_depth = max_depth
        sysm = system
        exps = [v.exponent for m in sysm.maps for row in m.matrix for v in row if v.mantissa]
        exps += [v.exponent for m in sysm.maps for v in m.translation if v.mantissa]
        exps += [v.exponent for v in sysm.seed if v.mantissa]
        self._s = max(0, -min(exps, default=0))
        s = self._s
        self._a = [[[v.scaled_int(-s) for v in row] for row in m.matrix] for m in sysm.maps]
        self._b = [[v.scaled_int(-s) for v in m.translation] for m in sysm.maps]
        self._seed = [v.scaled_int(-s) for v in sysm.seed]
        self._diam = dyadic_sqrt_upper(sysm.box.diam_sq(), 32)
        self._seedbits = max(abs(v).bit_length() for v in self._seed + [1])
        self._abits = max(abs(v).bit_length() for a in self._a + [self._b] for row in a for v in row)

    def depth(self, n: int) -> int:
        return self.system.depth_for(n, self.max_depth)

    def query_lattice(self, coords, e, n):
        self._check_batch(coords)
        out = np.zeros(len(coords), dtype=bool)
        for start in range(0, len(coords), self.CHUNK):
            out[start:start + self.CHUNK] = self._descend(coords[start:start + self.CHUNK], e, n)
        return out

    def _descend(self, x, e, n):
        k = self.dim
        s = self._s
        m = self.depth(n)
        t = threshold(n)
        result = np.zeros(len(x), dtype=bool)
        # pair arrays: query index, composed linear part, composed translation
        pts = np.arange(len(x))
        lin = np.zeros((len(x), k, k), dtype=np.int64)
        for i in range(k):
            lin[:, i, i] = 1
        trans = np.zeros((len(x), k), dtype=np.int64)
        seed = np.array(self._seed, dtype=object)
        a_maps = [np.array(a, dtype=object) for a in self._a]
        b_maps = [np.array(b, dtype=object) for b in self._b]
        rho_i = ONE
        for level in range(m + 1):
            if len(pts) == 0:
                break
            # node points at exponent -s*(level+1)
            pe = -s * (level + 1)
            fits = max_bits(lin) + self._seedbits + k <= SAFE_BITS \
                and max_bits(trans) + s + 1 <= SAFE_BITS
            lin_c = narrow_if(lin, fits)
            sd = narrow_if(seed, fits)
            node = _matvec(lin_c, sd) \
                + shift_left(narrow_if(trans, fits), s)
            f = min(e, pe)
            xq = rescale(x[pts], e, f)
            pq = rescale(node, pe, f)
            d2 = sum_sq(_sub(xq, pq))
            if level == m:
                hit = leq(d2, floor_scaled(t * t, -2 * f))
                result[pts[hit]] = True
                break
            reach = rho_i * self._diam
            keep = leq(d2, floor_scaled((t + reach) * (t + reach), -2 * f))
            if t >= reach:
                inner = t - reach
                sure = keep & leq(d2, floor_scaled(inner * inner, -2 * f))
                result[pts[sure]] = True
            keep &= ~result[pts]
            pts, lin, trans = pts[keep], lin[keep], trans[keep]
            if len(pts) == 0:
                break
            # expand every surviving pair into one child per map
            grow = max_bits(lin) + self._abits + k
            fits = grow <= SAFE_BITS and max_bits(trans) + s + 1 <= SAFE_BITS
            lin_c, trans_c = narrow_if(lin, fits), narrow_if(trans, fits)
            new_lin, new_trans = [], []
            for a, b in zip(a_maps, b_maps):
                a, b = narrow_if(a, fits), narrow_if(b, fits)
                new_lin.append(_matmul(lin_c, a))
                new_trans.append(_matvec(lin_c, b)
                                 + (trans_c << s))
            pts = np.tile(pts, len(a_maps))
            lin = np.concatenate(new_lin)
            trans = np.concatenate(new_trans)
            rho_i = rho_i * self.system.rho
        return result

    def __repr__(self):
        return f"ifs({len(self.system.maps)} maps)"


def ifs_attractor(system: IfsSystem) -> IfsAttractor:
    return IfsAttractor(system)


def graph_set(f, domain) -> ComputableSet:
    """The graph of a continuous bit function over an interval, as a set."""
    from .graphfn import gf_from_bitfunc

    return gf_from_bitfunc(f, domain).graph


# -- rasters ----------------------------------------------------------------


@dataclass
class PixelGrid:
    """Row 0 is the top row (largest y); bit 1 means In."""

    viewport: Box
    n: int
    width: int
    height: int
    bits: np.ndarray

    def count_in(self) -> int:
        return int(self.bits.sum())

    def to_pbm(self) -> bytes:
        lines = [b"P1", f"{self.width} {self.height}".encode()]
        for row in self.bits:
            lines.append("".join("1" if v else "0" for v in row).encode())
        return b"\n".join(lines) + b"\n"

    def center(self, i: int, j: int) -> Point:
        """Center of the pixel in column i of row j (row 0 on top)."""
        step = Dyadic(1, -self.n)
        half = Dyadic(1, -self.n - 1)
        ax = self.viewport.axes
        x = ax[0].lo + step * Dyadic(i) + half
        if len(ax) == 1:
            return Point(x)
        y = ax[1].lo + step * Dyadic(self.height - 1 - j) + half
        return Point(x, y)


def _pixel_count(iv: DyadicInterval, n: int) -> int:
    return iv.width().shift(n).ceil(0).numerator


def raster(s: ComputableSet, viewport: Box, n: int, workers: int = 1) -> PixelGrid:
    """Query every pixel center of the viewport at precision n."""
    if viewport.dim != s.dim:
        raise DimensionMismatch("viewport and set dimensions differ")
    if any(ax.width().is_zero() for ax in viewport.axes):
        raise ViewportEmpty(f"viewport {viewport} has zero extent")
    width = _pixel_count(viewport.axes[0], n)
    height = _pixel_count(viewport.axes[1], n) if s.dim == 2 else 1
    f = min([-n - 1] + [ax.lo.exponent for ax in viewport.axes if ax.lo.mantissa])
    unit = 1 << (-n - f)   # 2**-n in units of 2**f
    half = unit >> 1
    x0 = viewport.axes[0].lo.scaled_int(f)
    xs = [x0 + half + i * unit for i in range(width)]
    if s.dim == 2:
        y0 = viewport.axes[1].lo.scaled_int(f)
        ys = [y0 + half + (height - 1 - r) * unit for r in range(height)]
    else:
        ys = [None]
    big = max(abs(v) for v in xs + [v for v in ys if v is not None]).bit_length() > SAFE_BITS
    dtype = object if big else np.int64

    def band(rows):
        if s.dim == 2:
            grid = [[x, ys[r]] for r in rows for x in xs]
        else:
            grid = [[x] for x in xs]
        return s.query_lattice(np.array(grid, dtype=dtype), f, n).reshape(len(rows), width)

    rows = list(range(height))
    workers = max(1, min(workers, height))
    if workers == 1:
        bits = band(rows)
    else:
        size = -(-height // workers)
        chunks = [rows[c0:c0 + size] for c0 in range(0, height, size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(band, chunks))
        bits = np.concatenate(parts, axis=0)
    return PixelGrid(viewport, n, width, height, bits.astype(np.uint8))


def write_pbm(grid: PixelGrid, path):
    with open(path, "wb") as fh:
        fh.write(grid.to_pbm())
