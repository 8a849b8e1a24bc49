"""Computable reals, asked for more and more bits.

A CReal is a procedure n -> dyadic within 2^-n.  Nothing is ever rounded
behind your back: the answer at n = 40 is checked here against the
answer at n = 80.

    python demos/real_numbers.py
"""

from compreal.creal import E, SQRT2, BitFunction, CostMeter, CReal, Order, bitfunc_eval, div, mul, soft_compare
from compreal.dyadic import Box, Dyadic

for n in (4, 16, 40):
    print(f"sqrt2 to 2^-{n}: {SQRT2.approx(n)}  ~ {float(SQRT2.approx(n))!r}")

# the error budget holds against a much finer run
fine = SQRT2.approx(80)
assert abs(SQRT2.approx(40) - fine) <= Dyadic(1, -40) + Dyadic(1, -80)

x = mul(SQRT2, E)
print("sqrt2 * e ~", float(x.approx(30)))

third = div(CReal.const(1), CReal.const(3))
print("1/3 to 2^-20:", third.approx(20))

# equality is undecidable, so comparison may answer "too close to tell"
print(soft_compare(SQRT2, CReal.const(Dyadic(181, -7)), 8))
print(soft_compare(SQRT2, CReal.const(Dyadic(181, -7)), 20))
assert soft_compare(mul(SQRT2, SQRT2), CReal.const(2), 30) is Order.INDISTINGUISHABLE

# a text expression evaluated with a query counter attached
f = BitFunction.parse("exp(mul(x,x))", Box([(-1, 1)]))
meter = CostMeter()
v = bitfunc_eval(f, [CReal.const(Dyadic(1, -1))], 24, meter)
print("exp(1/4) to 2^-24:", v, "|", meter)
