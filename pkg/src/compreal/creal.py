"""Computable reals and bit-computable functions.

A :class:`CReal` is an approximation oracle: ``x.approx(n)`` returns a
dyadic within ``2**-n`` of the real it stands for.  Combinators build new
oracles from old ones with fixed precision budgets.  A
:class:`BitFunction` is an expression tree with a declared domain and a
modulus of continuity; :func:`bitfunc_eval` evaluates it by interval
arithmetic, raising the working precision until the enclosure is tight.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import (
    ONE,
    ZERO,
    Box,
    Dyadic,
    DyadicInterval,
    dyadic_sqrt_upper,
    isqrt_floor,
    rational_ceil,
    rational_floor,
    rational_round,
)
from .errors import (
    DivisionByZero,
    DomainViolation,
    NegativeOperandDetected,
    ParseError,
    PrecisionOverflow,
    RangeExceeded,
    ZeroDivisorUndetected,
)
from .parsing import Name, Num, parse_tree

MAX_PRECISION = 1 << 16
DIV_FUEL = 64
EXP_LIMIT = 16

# 14427/10000 > log2(e); used for upper bounds on bit sizes of e**x
_LOG2E_UP = Fraction(14427, 10000)


def _check_precision(n: int):
    if n < 0:
        raise ValueError(f"precision must be >= 0, got {n}")
    if n > MAX_PRECISION:
        raise PrecisionOverflow(f"precision {n} exceeds {MAX_PRECISION}")


class CReal:
    """A real number given by an approximation oracle.

    ``approx_fn(n)`` must return a :class:`Dyadic` within ``2**-n`` of the
    value.  Answers are memoised per precision; an entry is never replaced,
    so concurrent callers always see the first stored answer.
    """

    __slots__ = ("_fn", "_memo", "name", "exact")

    def __init__(self, approx_fn, name=None, exact=None):
        self._fn = approx_fn
        self._memo = {}
        self.name = name
        self.exact = exact

    @classmethod
    def const(cls, value, name=None) -> "CReal":
        if isinstance(value, (Dyadic, int, str)):
            d = Dyadic.coerce(value)
            return cls(lambda n: d, name=name or str(d), exact=d)
        q = Fraction(value)
        den = q.denominator
        if den & (den - 1) == 0:
            return cls.const(Dyadic.from_fraction(q), name)
        return cls(lambda n: rational_round(q, n), name=name or f"{q.numerator}/{q.denominator}")

    def approx(self, n: int) -> Dyadic:
        _check_precision(n)
        try:
            return self._memo[n]
        except KeyError:
            pass
        d = self._fn(n)
        return self._memo.setdefault(n, d)

    def magnitude_bits(self) -> int:
        """Some a >= 0 with ``|x| <= 2**a``."""
        if self.exact is not None:
            return self.exact.magnitude_bits()
        return (abs(self.approx(0)) + ONE).magnitude_bits()

    def __repr__(self):
        return f"CReal({self.name or '?'})"

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __abs__(self):
        return cabs(self)


def _lift(x) -> CReal:
    return x if isinstance(x, CReal) else CReal.const(x)


def creal_approx(x: CReal, n: int) -> Dyadic:
    return x.approx(n)


def _name(op, *args):
    return f"{op}(" + ", ".join(a.name or "?" for a in args) + ")"


# -- combinators ------------------------------------------------------------


def add(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return CReal.const(x.exact + y.exact)
    return CReal(lambda n: x.approx(n + 1) + y.approx(n + 1), _name("add", x, y))


def sub(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return CReal.const(x.exact - y.exact)
    return CReal(lambda n: x.approx(n + 1) - y.approx(n + 1), _name("sub", x, y))


def neg(x: CReal) -> CReal:
    if x.exact is not None:
        return CReal.const(-x.exact)
    return CReal(lambda n: -x.approx(n), _name("neg", x))


def cabs(x: CReal) -> CReal:
    if x.exact is not None:
        return CReal.const(abs(x.exact))
    return CReal(lambda n: abs(x.approx(n)), _name("abs", x))


def cmin(x: CReal, y: CReal) -> CReal:
    return CReal(lambda n: min(x.approx(n), y.approx(n)), _name("min", x, y),
                 exact=min(x.exact, y.exact) if x.exact is not None and y.exact is not None else None)


def cmax(x: CReal, y: CReal) -> CReal:
    return CReal(lambda n: max(x.approx(n), y.approx(n)), _name("max", x, y),
                 exact=max(x.exact, y.exact) if x.exact is not None and y.exact is not None else None)


def mul(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return CReal.const(x.exact * y.exact)

    def approx(n):
        k = n + max(x.magnitude_bits(), y.magnitude_bits()) + 2
        return (x.approx(k) * y.approx(k)).round(n + 1)

    return CReal(approx, _name("mul", x, y))


def find_sign_witness(y: CReal, fuel: int = DIV_FUEL) -> int:
    """Search for n0 with ``|y| >= 2**-n0``; raises ZeroDivisorUndetected."""
    if y.exact is not None:
        if y.exact.is_zero():
            raise DivisionByZero("divisor is exactly zero")
        return _min_abs_bits(DyadicInterval(y.exact))
    p = 1
    for _ in range(fuel):
        if p > MAX_PRECISION:
            break
        d = y.approx(p)
        if abs(d) >= Dyadic(3, -p):
            return p - 1
        p *= 2
    raise ZeroDivisorUndetected(f"no sign witness for {y.name or 'divisor'} within fuel {fuel}")


def div(x: CReal, y: CReal, witness: int | None = None, fuel: int = DIV_FUEL) -> CReal:
    """Quotient x / y.  ``witness`` is an n0 with ``|y| >= 2**-n0``."""
    if x.exact is not None and y.exact is not None:
        if y.exact.is_zero():
            raise DivisionByZero("divisor is exactly zero")
        return CReal.const(x.exact / y.exact)
    state = {"n0": witness}

    def approx(n):
        if state["n0"] is None:
            state["n0"] = find_sign_witness(y, fuel)
        n0 = state["n0"]
        k = n + 2 * n0 + x.magnitude_bits() + 4
        q = x.approx(k) / y.approx(k)
        return rational_round(q, n + 2)

    return CReal(approx, _name("div", x, y))


# -- exp and sqrt -----------------------------------------------------------


def exp_enclosure(x: Dyadic, prec: int) -> DyadicInterval:
    """An interval containing ``e**x``; its width shrinks like ``2**-prec``.

    Range reduction halves x until ``|x| <= 1``, sums the Taylor series in
    fixed point with a counted truncation error, then squares back.
    """
    if x.is_zero():
        return DyadicInterval(ONE)
    k = x.magnitude_bits()
    y = x.shift(-k)
    growth = rational_ceil(abs(x.to_fraction()) * _LOG2E_UP, 0).numerator if x.sign() > 0 else 0
    w = prec + 2 * k + growth + 12
    one = 1 << w
    ym, ye = y.mantissa, y.exponent
    # y = ym * 2**ye; ye <= 0 because |y| <= 1 with y != 0 except y = +-1
    den_shift = -ye if ye < 0 else 0
    ym = ym << ye if ye > 0 else ym
    term = one
    total = one
    i = 0
    fact = 1
    # stop once 3/(i+1)! <= 2**-w, i.e. the remainder is under one unit
    while 3 << w >= fact * (i + 1):
        i += 1
        fact *= i
        term = (term * ym) // (i << den_shift)
        total += term
    err = 2 * i + 3
    enc = DyadicInterval(Dyadic(total - err, -w), Dyadic(total + err, -w))
    for _ in range(k):
        enc = DyadicInterval(enc.lo * enc.lo, enc.hi * enc.hi).outward(w)
    return enc


def _mid_within(enclose, n: int, start: int) -> Dyadic:
    """Refine an enclosure until it fixes the value to within 2**-n."""
    p = start
    target = Dyadic(1, -(n + 2))
    while True:
        if p > MAX_PRECISION:
            raise PrecisionOverflow(f"enclosure did not converge below precision {MAX_PRECISION}")
        enc = enclose(p)
        if enc.width() <= target:
            return enc.mid().round(n + 2)
        p = 2 * p


def creal_exp(x: CReal) -> CReal:
    """e**x for ``|x| <= 16``."""
    d0 = x.exact if x.exact is not None else x.approx(4)
    if abs(d0) > Dyadic(EXP_LIMIT) + Dyadic(1, -4):
        raise RangeExceeded(f"exp argument {d0} outside [-{EXP_LIMIT}, {EXP_LIMIT}]")
    if x.exact is not None:
        d = x.exact
        return CReal(lambda n: _mid_within(lambda p: exp_enclosure(d, p), n, n + 4), _name("exp", x))
    # Lipschitz bound of exp near x, in bits
    lip = rational_ceil((abs(d0.to_fraction()) + 1) * _LOG2E_UP, 0).numerator + 1

    def approx(n):
        d = x.approx(n + 2 + lip)
        return _mid_within(lambda p: exp_enclosure(d, p), n + 1, n + 4)

    return CReal(approx, _name("exp", x))


def creal_sqrt(x: CReal) -> CReal:
    """Square root of a nonnegative computable real."""
    if x.exact is not None and x.exact.sign() < 0:
        raise NegativeOperandDetected(f"sqrt of negative constant {x.exact}")

    def approx(n):
        k = 2 * n + 2
        d = x.approx(k)
        if d + Dyadic(1, -k) < ZERO:
            raise NegativeOperandDetected(f"sqrt operand certified negative: {d} at precision {k}")
        d = max(d, ZERO)
        return isqrt_floor(d, n + 2)

    return CReal(approx, _name("sqrt", x))


SQRT2 = creal_sqrt(CReal.const(2, name="2"))
SQRT2.name = "sqrt2"
E = creal_exp(CReal.const(1, name="1"))
E.name = "e"

NAMED_CONSTANTS = {"sqrt2": SQRT2, "e": E}


# -- comparison -------------------------------------------------------------


class Order(enum.Enum):
    LESS = "Less"
    GREATER = "Greater"
    INDISTINGUISHABLE = "Indistinguishable"


def soft_compare(x: CReal, y: CReal, n: int) -> Order:
    """Order x and y, or report that they are within ``2**-n`` of each other."""
    dx = x.approx(n + 3)
    dy = y.approx(n + 3)
    gap = dx - dy
    if abs(gap) <= Dyadic(3, -(n + 2)):
        return Order.INDISTINGUISHABLE
    return Order.LESS if gap.sign() < 0 else Order.GREATER


# -- expression trees -------------------------------------------------------

UNARY = ("neg", "abs", "sqrt", "exp")
BINARY = ("add", "sub", "mul", "div", "min", "max")


@dataclass(eq=False)
class Expr:
    op: str
    args: tuple = ()
    value: Dyadic | None = None
    index: int | None = None

    def __str__(self):
        if self.op == "const":
            return str(self.value)
        if self.op == "var":
            return "x" if self.index == 0 else f"x{self.index + 1}"
        return f"{self.op}(" + ",".join(str(a) for a in self.args) + ")"

    def arity(self) -> int:
        if self.op == "var":
            return self.index + 1
        return max((a.arity() for a in self.args), default=0)

    def nodes(self):
        yield self
        for a in self.args:
            yield from a.nodes()


def const(v) -> Expr:
    return Expr("const", value=Dyadic.coerce(v))


def var(i: int = 0) -> Expr:
    return Expr("var", index=i)


def _mk(op):
    def build(*args):
        return Expr(op, tuple(args))
    build.__name__ = op
    return build


e_add, e_sub, e_mul, e_div, e_min, e_max = (_mk(op) for op in BINARY)
e_neg, e_abs, e_sqrt, e_exp = (_mk(op) for op in UNARY)


def elaborate_expr(tree) -> Expr:
    """Turn a parse tree into an :class:`Expr`."""
    if isinstance(tree, Num):
        den = tree.value.denominator
        if den & (den - 1):
            raise ParseError(f"constant {tree.text!r} is not dyadic", pos=tree.pos)
        return const(Dyadic.from_fraction(tree.value))
    if isinstance(tree, Name):
        if tree.name == "x":
            return var(0)
        if tree.name[0] == "x" and tree.name[1:].isdigit() and int(tree.name[1:]) >= 1:
            return var(int(tree.name[1:]) - 1)
        raise ParseError(f"unknown name {tree.name!r}", pos=tree.pos)
    if tree.name in BINARY:
        want = 2
    elif tree.name in UNARY:
        want = 1
    else:
        raise ParseError(f"unknown function {tree.name!r}", pos=tree.pos)
    if len(tree.args) != want:
        raise ParseError(f"{tree.name} takes {want} argument(s), got {len(tree.args)}", pos=tree.pos)
    return Expr(tree.name, tuple(elaborate_expr(a) for a in tree.args))


def parse_expr(text: str) -> Expr:
    return elaborate_expr(parse_tree(text))


# -- interval evaluation ----------------------------------------------------


class _NeedPrecision(Exception):
    """A divisor enclosure touches zero at the current precision."""


class _SqrtStraddle(Exception):
    pass


def _exp_interval(iv: DyadicInterval, p: int) -> DyadicInterval:
    lim = Dyadic(2 * EXP_LIMIT)
    if iv.lo < -lim or iv.hi > lim:
        raise RangeExceeded(f"exp argument range {iv} exceeds +-{2 * EXP_LIMIT}")
    lo = exp_enclosure(iv.lo, p + 2).lo
    hi = exp_enclosure(iv.hi, p + 2).hi
    return DyadicInterval(lo.floor(p), hi.ceil(p))


def _div_interval(a: DyadicInterval, b: DyadicInterval, p: int) -> DyadicInterval:
    if b.contains_zero():
        raise _NeedPrecision
    qs = [x / y for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
    lo, hi = min(qs), max(qs)
    if lo == hi and lo.denominator & (lo.denominator - 1) == 0:
        d = Dyadic.from_fraction(lo)
        return DyadicInterval(d)
    return DyadicInterval(rational_floor(lo, p), rational_ceil(hi, p))


def _sqrt_interval(a: DyadicInterval, p: int, strict: bool) -> DyadicInterval:
    if a.hi.sign() < 0:
        raise DomainViolation(f"sqrt of negative interval {a}")
    if a.lo.sign() < 0:
        if strict:
            raise _SqrtStraddle
        a = DyadicInterval(ZERO, a.hi)
    return DyadicInterval(isqrt_floor(a.lo, p), dyadic_sqrt_upper(a.hi, p))


def eval_interval(expr: Expr, env, p: int, meter=None, record=None, strict_sqrt=False):
    """Enclose ``expr`` over the boxes in ``env`` with outward rounding at 2**-p.

    ``record`` (a dict) receives the enclosure of every node, keyed by node.
    """

    def ev(e):
        if meter is not None:
            meter.node_evals += 1
        op = e.op
        if op == "const":
            r = DyadicInterval(e.value)
        elif op == "var":
            r = env[e.index]
        elif op == "neg":
            r = -ev(e.args[0])
        elif op == "abs":
            r = abs(ev(e.args[0]))
        elif op == "sqrt":
            r = _sqrt_interval(ev(e.args[0]), p, strict_sqrt)
        elif op == "exp":
            r = _exp_interval(ev(e.args[0]), p)
        else:
            a = ev(e.args[0])
            b = ev(e.args[1])
            if op == "add":
                r = (a + b).outward(p)
            elif op == "sub":
                r = (a - b).outward(p)
            elif op == "mul":
                r = (a * b).outward(p)
            elif op == "div":
                r = _div_interval(a, b, p)
            elif op == "min":
                r = DyadicInterval(min(a.lo, b.lo), min(a.hi, b.hi))
            elif op == "max":
                r = DyadicInterval(max(a.lo, b.lo), max(a.hi, b.hi))
            else:
                raise ValueError(f"unknown op {op!r}")
        if record is not None:
            prev = record.get(e)
            record[e] = r if prev is None else prev.hull(r)
        return r

    return ev(expr)


# -- bit functions ----------------------------------------------------------


@dataclass
class CostMeter:
    """Work counters for one top-level evaluation."""

    queries: int = 0
    max_precision: int = 0
    node_evals: int = 0

    def reset(self):
        self.queries = 0
        self.max_precision = 0
        self.node_evals = 0

    def saw_precision(self, p: int):
        if p > self.max_precision:
            self.max_precision = p


def _exp_bits(hi: Dyadic) -> int:
    """Bits a >= 0 with ``e**hi <= 2**a``."""
    if hi.sign() <= 0:
        return 0
    return rational_ceil(hi.to_fraction() * _LOG2E_UP, 0).numerator


def _min_abs_bits(iv: DyadicInterval) -> int | None:
    """D with ``|v| >= 2**-D`` on iv, or None when iv touches zero."""
    if iv.contains_zero():
        return None
    m = min(abs(iv.lo), abs(iv.hi))
    # 2**(bitlen(mant)-1+exp) <= m
    return max(0, -(m.mantissa.bit_length() - 1 + m.exponent))


SWEEP_PRECISION = 64
_SWEEP_DEPTH = 20


class BitFunction:
    """A continuous function given by an expression over a declared box.

    Construction sweeps the domain with interval arithmetic: it rejects
    divisors that may vanish and square roots of certified-negative
    arguments, and records a range for every node, from which a modulus of
    continuity is composed node by node.
    """

    def __init__(self, expr, domain: Box, modulus=None):
        if isinstance(expr, str):
            expr = parse_expr(expr)
        self.expr = expr
        self.domain = domain
        if expr.arity() > domain.dim:
            raise DomainViolation(f"expression uses {expr.arity()} variables, domain has {domain.dim}")
        self.ranges = {}
        self.min_abs = {}
        self._sweep()
        self._user_modulus = modulus
        if modulus is not None:
            self._check_modulus(modulus)

    @classmethod
    def parse(cls, text: str, domain: Box, modulus=None) -> "BitFunction":
        return cls(parse_expr(text), domain, modulus)

    @property
    def arity(self) -> int:
        return self.domain.dim

    @property
    def range(self) -> DyadicInterval:
        return self.ranges[self.expr]

    def __str__(self):
        return str(self.expr)

    # construction-time validation

    def _sweep(self):
        # power-of-two cell counts keep the cell edges dyadic
        k_bits = 4 if self.domain.dim == 1 else 2
        cells = [()]
        for ax in self.domain.axes:
            step = ax.width().shift(-k_bits)
            pieces = [DyadicInterval(ax.lo + step * i, ax.lo + step * (i + 1))
                      for i in range(1 << k_bits)]
            cells = [c + (piece,) for c in cells for piece in pieces]
        for cell in cells:
            self._sweep_cell(list(cell), 0)

    def _sweep_cell(self, cell, depth):
        rec = {}
        try:
            eval_interval(self.expr, cell, SWEEP_PRECISION, record=rec, strict_sqrt=True)
        except (_NeedPrecision, _SqrtStraddle) as exc:
            widest = max(range(len(cell)), key=lambda i: cell[i].width())
            if depth >= _SWEEP_DEPTH or cell[widest].is_point():
                if isinstance(exc, _SqrtStraddle):
                    eval_interval(self.expr, cell, SWEEP_PRECISION, record=rec)
                else:
                    raise DomainViolation(f"divisor may vanish on {cell}") from None
            else:
                ax = cell[widest]
                mid = ax.mid()
                for half in (DyadicInterval(ax.lo, mid), DyadicInterval(mid, ax.hi)):
                    sub_cell = list(cell)
                    sub_cell[widest] = half
                    self._sweep_cell(sub_cell, depth + 1)
                return
        for node, iv in rec.items():
            prev = self.ranges.get(node)
            self.ranges[node] = iv if prev is None else prev.hull(iv)
            d = _min_abs_bits(iv)
            if node in self.min_abs:
                old = self.min_abs[node]
                self.min_abs[node] = None if old is None or d is None else max(old, d)
            else:
                self.min_abs[node] = d

    def _check_modulus(self, modulus, trials=16):
        rng = random.Random(0)
        for n in range(0, 9):
            mu = modulus(n)
            step = Dyadic(1, -mu)
            for _ in range(trials):
                x = []
                x2 = []
                for ax in self.domain.axes:
                    w = ax.width()
                    grid = mu + 4
                    t = Dyadic(rng.randrange(0, (w.scaled_int(min(w.exponent, -grid)) if w else 0) + 1),
                               min(w.exponent, -grid))
                    a = min(ax.lo + t, ax.hi)
                    b = a + step * Dyadic(rng.choice((-1, 1)))
                    b = min(max(b, ax.lo), ax.hi)
                    x.append(CReal.const(a))
                    x2.append(CReal.const(b))
                fa = bitfunc_eval(self, x, n + 4)
                fb = bitfunc_eval(self, x2, n + 4)
                if abs(fa - fb) > Dyadic(1, -n) + Dyadic(1, -(n + 3)):
                    raise ValueError(f"supplied modulus fails at precision {n}: "
                                     f"|f({x[0].exact})-f({x2[0].exact})| too large")

    # modulus of continuity

    def modulus(self, n: int) -> int:
        """Precision m with ``|x - x'| <= 2**-m  =>  |f(x) - f(x')| <= 2**-n``."""
        if self._user_modulus is not None:
            return self._user_modulus(n)
        m = self._mu(self.expr, n)
        return max(0, m if m is not None else 0)

    def _mu(self, e: Expr, n: int):
        op = e.op
        if op == "const":
            return None
        if op == "var":
            return n
        if op in ("neg", "abs"):
            return self._mu(e.args[0], n)
        if op == "exp":
            return self._mu(e.args[0], n + _exp_bits(self.ranges[e.args[0]].hi))
        if op == "sqrt":
            u = e.args[0]
            holder = 2 * n
            d = self.min_abs.get(u)
            need = holder if d is None else min(holder, n + (d + 1) // 2)
            return self._mu(u, need)
        a, b = e.args
        if op in ("min", "max"):
            return _mx(self._mu(a, n), self._mu(b, n))
        if op in ("add", "sub"):
            return _mx(self._mu(a, n + 1), self._mu(b, n + 1))
        mag_a = self.ranges[a].magnitude().magnitude_bits()
        mag_b = self.ranges[b].magnitude().magnitude_bits()
        if op == "mul":
            return _mx(self._mu(a, n + 1 + mag_b), self._mu(b, n + 1 + mag_a))
        if op == "div":
            d = self.min_abs[b]
            return _mx(self._mu(a, n + 1 + d), self._mu(b, n + 1 + mag_a + 2 * d))
        raise ValueError(f"unknown op {op!r}")

    # evaluation

    def __call__(self, *xs) -> CReal:
        xs = [_lift(x) for x in xs]
        return CReal(lambda n: bitfunc_eval(self, xs, n), name=f"{self.expr}")

    def eval_at(self, point, n: int, meter: CostMeter | None = None) -> Dyadic:
        """Evaluate at an exact dyadic point."""
        return bitfunc_eval(self, [CReal.const(c) for c in point], n, meter)


def _mx(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _ladder_step(p: int) -> int:
    """Next point on the fixed precision ladder 4, 5, 8, 11, 16, 22, 32, ...

    Every run walks a tail of this one chain, so the precision at which a
    run stops can only grow with n.
    """
    j = 2 * (max(p, 4).bit_length() - 1)
    while True:
        c = math.isqrt(1 << j)
        if c > p:
            return c
        j += 1


def _ladder_at_least(p: int) -> int:
    return p if _ladder_step(p - 1) == p else _ladder_step(p)


def bitfunc_eval(f: BitFunction, xs, n: int, meter: CostMeter | None = None,
                 start: int | None = None) -> Dyadic:
    """A dyadic within ``2**-n`` of ``f(xs)``.

    Inputs are seeded as intervals ``[x(p) - 2**-p, x(p) + 2**-p]`` clipped
    to the domain, and p climbs a fixed ladder from ``n + 4``.  The answer is
    ``f(xs)`` floored to the ``2**-(n+1)`` grid, returned as soon as both ends
    of the output enclosure floor alike.  The cut points for n are among the
    cut points for n + 1, so a run never stops later for n than for n + 1.
    A value sitting on a grid point never separates; once the enclosure is
    narrower than ``2**-cap`` the grid point it holds is returned.
    """
    _check_precision(n)
    xs = [_lift(x) for x in xs]
    if len(xs) != f.arity:
        raise DomainViolation(f"expected {f.arity} argument(s), got {len(xs)}")
    if meter is None:
        meter = CostMeter()
    if f.expr.op == "var":
        x = xs[f.expr.index]
        meter.queries += 1
        meter.saw_precision(n)
        return x.approx(n)
    cap = Dyadic(1, -max(n + 9, min(2 * n + 12, MAX_PRECISION // 4)))
    p = _ladder_at_least(n + 4 if start is None else max(start, 4))
    while True:
        if p > MAX_PRECISION:
            raise PrecisionOverflow(f"working precision passed {MAX_PRECISION}")
        meter.saw_precision(p)
        env = []
        for x, ax in zip(xs, f.domain.axes):
            if x.exact is not None:
                iv = DyadicInterval(x.exact)
            else:
                meter.queries += 1
                iv = DyadicInterval.around(x.approx(p), Dyadic(1, -p))
            clipped = iv.intersect(ax)
            if clipped is None:
                raise DomainViolation(f"argument {x.name} = {iv} lies outside domain {ax}")
            env.append(clipped)
        try:
            out = eval_interval(f.expr, env, p, meter)
        except _NeedPrecision:
            p = _ladder_step(p)
            continue
        if out.is_point():
            return out.lo
        lo = out.lo.floor(n + 1)
        hi = out.hi.floor(n + 1)
        if lo == hi:
            return lo
        if out.width() <= cap:
            return hi
        p = _ladder_step(p)
