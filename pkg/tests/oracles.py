"""Reference computations that share no code with the package.

Everything here works on Python ints and Fractions with textbook
algorithms (bisection, factorial series, closed-form distances), so a bug
in the library cannot leak into the judge.
"""

from fractions import Fraction


def dyadic_value(m: int, e: int) -> Fraction:
    return Fraction(m) * Fraction(2) ** e


def round_half_even(q: Fraction, n: int) -> Fraction:
    """Nearest multiple of 2**-n, ties to the even multiple."""
    scaled = q * 2**n
    fl = scaled.numerator // scaled.denominator
    frac = scaled - fl
    if frac > Fraction(1, 2) or (frac == Fraction(1, 2) and fl % 2 == 1):
        fl += 1
    return Fraction(fl, 2**n)


def sqrt_floor_bisect(q: Fraction, m: int) -> Fraction:
    """Largest k * 2**-m with (k * 2**-m)**2 <= q, by bisection on k."""
    lo, hi = 0, 1
    while Fraction(hi, 2**m) ** 2 <= q:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if Fraction(mid, 2**m) ** 2 <= q:
            lo = mid
        else:
            hi = mid
    return Fraction(lo, 2**m)


def exp_series(x: Fraction, m: int) -> Fraction:
    """e**x for |x| <= 1 to within 2**-m, summing terms until the tail is negligible."""
    assert abs(x) <= 1
    total = Fraction(0)
    term = Fraction(1)
    i = 0
    # for |x| <= 1 the tail after term i is at most 2 * |term_i|
    while True:
        total += term
        i += 1
        term = term * x / i
        if 2 * abs(term) < Fraction(1, 2 ** (m + 2)):
            return total


def factorial_partial_e(k: int) -> Fraction:
    s, f = Fraction(0), 1
    for i in range(k + 1):
        if i:
            f *= i
        s += Fraction(1, f)
    return s


# -- exact squared distances for primitives --------------------------------


def dist_sq_point(p, c):
    return (p[0] - c[0]) ** 2 + (p[1] - c[1]) ** 2


def dist_sq_segment(p, a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    L = dx * dx + dy * dy
    if L == 0:
        return dist_sq_point(p, a)
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L
    t = min(max(t, Fraction(0)), Fraction(1))
    return dist_sq_point(p, (a[0] + t * dx, a[1] + t * dy))


def dist_sq_box(p, lo, hi):
    s = Fraction(0)
    for v, a, b in zip(p, lo, hi):
        if v < a:
            s += (a - v) ** 2
        elif v > b:
            s += (v - b) ** 2
    return s


def disk_dist_cmp(p, c, r, t: Fraction) -> int:
    """Sign of dist(p, disk) - t, decided exactly (dist = max(0, |p-c| - r))."""
    d2 = dist_sq_point(p, c)
    # dist <= t  <=>  |p-c| <= r + t
    lim = (r + t) ** 2
    return (d2 > lim) - (d2 < lim)


def cmp_dist(d2: Fraction, t: Fraction) -> int:
    """Sign of sqrt(d2) - t for t >= 0."""
    return (d2 > t * t) - (d2 < t * t)


def brute_hausdorff_sq(a, b):
    def directed(x, y):
        return max(min(dist_sq_point(p, q) for q in y) for p in x)
    return max(directed(a, b), directed(b, a))


# -- reference clouds -------------------------------------------------------


def sierpinski_orbit(depth: int):
    """Integer numerators (over 2**depth) of all depth-``depth`` images of the origin.

    Each point is a sum of digit vectors (0,0), (1,0), (0,1) scaled by 2**-i.
    """
    import numpy as np

    pts = np.zeros((1, 2), dtype=np.int64)
    digits = np.array([[0, 0], [1, 0], [0, 1]], dtype=np.int64)
    for _ in range(depth):
        pts = (2 * pts[:, None, :] + digits[None, :, :]).reshape(-1, 2)
    return pts


class CloudJudge:
    """Exact ``dist(p, cloud) <= r`` for an integer cloud over ``2**depth``."""

    def __init__(self, ints, depth: int):
        from scipy.spatial import cKDTree

        self.ints = ints
        self.depth = depth
        self.tree = cKDTree(ints.astype(float) / 2.0**depth)

    def within(self, p, r: Fraction) -> bool:
        cand = self.tree.query_ball_point([float(p[0]), float(p[1])], float(r) * (1 + 1e-9) + 1e-12)
        scale = 2**self.depth
        r2 = r * r
        for i in cand:
            q = (Fraction(int(self.ints[i, 0]), scale), Fraction(int(self.ints[i, 1]), scale))
            if dist_sq_point(p, q) <= r2:
                return True
        return False
