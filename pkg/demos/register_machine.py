"""A register machine over the reals, and what changes when it has to round.

    python demos/register_machine.py
"""

from fractions import Fraction

from compreal.bssvm import RunMode, bss_parse, bss_run, bss_to_bitfunc
from compreal.creal import SQRT2, CReal
from compreal.errors import NotStablyConvergent

SQUARE = """
      INPUT r0 0
      MUL   r0 r0 r0
      MUL   r0 r0 r0
      MUL   r0 r0 r0
      OUT   r0
      HALT
"""
SIGN = """
      INPUT r0 0
      JGEZ  r0 pos
      CONST r1 0
      OUT   r1
      HALT
pos:  CONST r1 1
      OUT   r1
      HALT
"""

cube = bss_parse(SQUARE)
x = Fraction(3, 4)
exact = bss_run(cube, [x]).outputs[0]
print("x^8 at 3/4, exact:", exact)
for p in (8, 12, 16, 20):
    got = bss_run(cube, [x], RunMode.rounded(p)).outputs[0]
    print(f"  rounded to 2^-{p}: {got}  error {abs(got - exact)}")

# near zero a fuzzy test cannot tell the sign, so both branches survive
sign = bss_parse(SIGN)
print("fuzzy sign(-2^-30):", [int(v) for v in bss_run(sign, [Fraction(-1, 2**30)], RunMode.fuzzy(10)).values()])

# stabilization turns a program into a function of real inputs, where it can
sq = bss_parse("INPUT r0 0\nMUL r1 r0 r0\nOUT r1\nHALT")
print("sqrt2^2 to 2^-20:", bss_to_bitfunc(sq, SQRT2, 20))
try:
    bss_to_bitfunc(sign, CReal.const(0), 6)
except NotStablyConvergent as err:
    print("sign at 0 does not stabilize:", err)
