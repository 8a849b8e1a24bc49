import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from compreal.creal import (E, SQRT2, BitFunction, CostMeter, CReal, Order, bitfunc_eval, cabs, cmax,
                            cmin, creal_exp, creal_sqrt, div, find_sign_witness, mul, parse_expr,
                            soft_compare)
from compreal.dyadic import Box, Dyadic
from compreal.errors import (DivisionByZero, DomainViolation, NegativeOperandDetected, ParseError,
                             RangeExceeded, ZeroDivisorUndetected)

from oracles import exp_series, factorial_partial_e, sqrt_floor_bisect
from strategies import small_dyadics

TWO = Fraction(2)


def close(d: Dyadic, q: Fraction, n: int, slack=Fraction(0)) -> bool:
    return abs(d.to_fraction() - q) <= Fraction(1, 2**n) + slack


# constants and primitives

def test_const_is_exact():
    x = CReal.const(Dyadic(3, -2))
    assert all(x.approx(n) == Dyadic(3, -2) for n in (0, 5, 40))


def test_sqrt2_examples():
    d = SQRT2.approx(4).to_fraction()
    assert abs(d * d - 2) <= Fraction(3, 16)
    d = creal_sqrt(CReal.const(2)).approx(30).to_fraction()
    assert abs(d * d - 2) <= Fraction(1, 2**27)


def test_e_against_partial_sums():
    oracle = factorial_partial_e(25)
    assert close(E.approx(20), oracle, 20, Fraction(1, 2**25))


def test_exp_examples():
    assert all(close(creal_exp(CReal.const(0)).approx(n), Fraction(1), n) for n in (0, 7, 30))
    assert close(creal_exp(CReal.const(1)).approx(16), exp_series(Fraction(1), 40), 16, Fraction(1, 2**40))
    prod = creal_exp(CReal.const(-1)) * creal_exp(CReal.const(1))
    assert close(prod.approx(12), Fraction(1), 10)


@given(st.integers(-16 * 64, 16 * 64), st.integers(0, 40))
@settings(max_examples=40)
def test_exp_contract_over_range(k, n):
    x = Fraction(k, 64)
    # e**x = (e**(x/m))**m with |x/m| <= 1
    m = 16
    base = exp_series(x / m, n + 80)
    oracle = base**m
    d = creal_exp(CReal.const(Dyadic(k, -6))).approx(n)
    # the oracle's own error is far below 2**-(n+40) relative to e**16
    assert abs(d.to_fraction() - oracle) <= Fraction(1, 2**n) + Fraction(1, 2**(n + 30))


def test_exp_range_limit():
    with pytest.raises(RangeExceeded):
        creal_exp(CReal.const(17))


def test_sqrt_examples():
    assert all(creal_sqrt(CReal.const(1)).approx(n) == Dyadic(1) for n in (0, 10, 50))
    assert abs(creal_sqrt(CReal.const(0)).approx(10)) <= Dyadic(1, -10)
    with pytest.raises(NegativeOperandDetected):
        creal_sqrt(CReal.const(-1))
    with pytest.raises(NegativeOperandDetected):
        creal_sqrt(CReal.const(0) - SQRT2).approx(5)


@given(st.integers(0, 2**40), st.integers(0, 50))
@settings(max_examples=60)
def test_sqrt_contract(m, n):
    q = Fraction(m, 2**20)
    lo = sqrt_floor_bisect(q, n + 20)
    d = creal_sqrt(CReal.const(Dyadic(m, -20))).approx(n).to_fraction()
    assert abs(d - lo) <= Fraction(1, 2**n) + Fraction(1, 2**(n + 20))


# combinators

def test_add_mul_div_examples():
    ref = 2 * sqrt_floor_bisect(TWO, 60)
    assert close(mul(CReal.const(2), SQRT2).approx(10), ref, 10, Fraction(1, 2**58))
    q = div(CReal.const(1), CReal.const(Dyadic(3, -2)))
    assert close(q.approx(8), Fraction(4, 3), 8)
    third = CReal.const(Fraction(1, 3))
    assert close(div(CReal.const(1), third).approx(10), Fraction(3), 10)


@given(small_dyadics, small_dyadics, st.integers(0, 50))
def test_combinators_on_dyadics(a, b, n):
    # route through a non-exact wrapper so the approximate code paths run
    def lazy(d):
        return CReal(lambda k: d.round(k + 1), name=str(d))
    x, y = lazy(a), lazy(b)
    qa, qb = a.to_fraction(), b.to_fraction()
    assert close((x + y).approx(n), qa + qb, n)
    assert close((x - y).approx(n), qa - qb, n)
    assert close((x * y).approx(n), qa * qb, n)
    assert close(cabs(x).approx(n), abs(qa), n)
    assert close(cmin(x, y).approx(n), min(qa, qb), n)
    assert close(cmax(x, y).approx(n), max(qa, qb), n)
    assert close((-x).approx(n), -qa, n)
    if not b.is_zero():
        assert close((x / y).approx(n), qa / qb, n)


def test_div_by_exact_zero_and_undetected():
    with pytest.raises(DivisionByZero):
        div(CReal.const(1), CReal.const(0))
    hidden_zero = CReal(lambda n: Dyadic(0), name="z")
    with pytest.raises(ZeroDivisorUndetected):
        div(CReal.const(1), hidden_zero).approx(4)
    with pytest.raises(ZeroDivisorUndetected):
        find_sign_witness(hidden_zero, fuel=8)


def test_div_with_supplied_witness():
    y = SQRT2 - 1
    assert close(div(CReal.const(1), y, witness=2).approx(20), 1 / (sqrt_floor_bisect(TWO, 80) - 1), 20,
                 Fraction(1, 2**70))


@given(st.sampled_from(["sqrt2", "e", "exp_half", "div"]), st.integers(0, 60), st.integers(0, 60))
@settings(max_examples=60)
def test_consistency(which, m, n):
    x = {"sqrt2": SQRT2, "e": E, "exp_half": creal_exp(CReal.const(Dyadic(1, -1))),
         "div": div(CReal.const(1), CReal.const(Dyadic(3, -2)))}[which]
    gap = abs(x.approx(m) - x.approx(n))
    assert gap <= Dyadic(1, -m) + Dyadic(1, -n)


def test_memo_never_replaced_under_threads():
    calls = []

    def fn(n):
        calls.append(n)
        return Dyadic(len(calls), -n - 8)
    x = CReal(fn)
    seen = []
    threads = [threading.Thread(target=lambda: seen.append(x.approx(5))) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(seen)) == 1
    assert x.approx(5) == seen[0]


# soft comparison

def test_soft_compare_examples():
    assert soft_compare(CReal.const(0), CReal.const(1), 4) is Order.LESS
    assert soft_compare(SQRT2, SQRT2, 9) is Order.INDISTINGUISHABLE
    assert soft_compare(CReal.const(0), CReal.const(Dyadic(1, -12)), 4) is Order.INDISTINGUISHABLE


@given(small_dyadics, small_dyadics, st.integers(0, 30))
@settings(max_examples=300)
def test_soft_compare_never_wrong(a, b, n):
    x = CReal(lambda k: a.round(k + 1))
    y = CReal(lambda k: b.round(k + 1))
    r = soft_compare(x, y, n)
    if r is Order.LESS:
        assert a < b
    elif r is Order.GREATER:
        assert a > b
    else:
        assert abs(a - b) <= Dyadic(1, -n)


# expressions and bit functions

def test_parse_expr_errors():
    for bad in ("exp(x", "foo(x)", "add(x)", "y", "div(1/3, x)"):
        with pytest.raises(ParseError):
            parse_expr(bad)


def test_bitfunc_identity():
    f = BitFunction.parse("x", Box([(0, 2)]))
    assert bitfunc_eval(f, [SQRT2], 13) == SQRT2.approx(13)


def test_bitfunc_examples():
    f = BitFunction.parse("exp(mul(x,x))", Box([(-1, 1)]))
    assert close(bitfunc_eval(f, [CReal.const(Dyadic(1, -1))], 20), exp_series(Fraction(1, 4), 60), 20,
                 Fraction(1, 2**58))
    g = BitFunction.parse("div(1,x)", Box([(Dyadic(1, -2), 1)]))
    assert close(bitfunc_eval(g, [CReal.const(Fraction(1, 3))], 10), Fraction(3), 10)


def test_bitfunc_domain_checks():
    with pytest.raises(DomainViolation):
        BitFunction.parse("div(1,x)", Box([(-1, 1)]))
    with pytest.raises(DomainViolation):
        BitFunction.parse("sqrt(sub(x,2))", Box([(0, 1)]))
    f = BitFunction.parse("sqrt(x)", Box([(0, 1)]))
    assert close(bitfunc_eval(f, [CReal.const(Dyadic(1, -2))], 10), Fraction(1, 2), 10)
    with pytest.raises(DomainViolation):
        bitfunc_eval(f, [CReal.const(3)], 4)


EXPRS = ["exp(mul(x,x))", "add(mul(x,x),1/4)", "sqrt(add(x,2))", "div(1,add(x,2))",
         "max(x,neg(x))", "sub(exp(x),abs(x))", "min(mul(x,3),1/2)"]


@given(st.sampled_from(EXPRS), st.integers(-(2**12), 2**12), st.integers(0, 24))
@settings(max_examples=80)
def test_modulus_is_a_modulus(text, k, n):
    f = BitFunction.parse(text, Box([(-1, 1)]))
    mu = f.modulus(n)
    x = Dyadic(k, -12)
    x2 = min(x + Dyadic(1, -mu), Dyadic(1))
    fa = bitfunc_eval(f, [CReal.const(x)], n + 8)
    fb = bitfunc_eval(f, [CReal.const(x2)], n + 8)
    assert abs(fa - fb) <= Dyadic(1, -n) + Dyadic(2, -(n + 8))
    assert f.modulus(n + 1) >= mu


def test_user_modulus_sanity_check():
    BitFunction.parse("mul(x,2)", Box([(0, 1)]), modulus=lambda n: n + 1)
    with pytest.raises(ValueError):
        BitFunction.parse("mul(x,64)", Box([(0, 1)]), modulus=lambda n: n)


@given(st.sampled_from(EXPRS), st.integers(-(2**10), 2**10), st.integers(0, 30))
@settings(max_examples=60)
def test_bitfunc_start_precision_independent(text, k, n):
    f = BitFunction.parse(text, Box([(-1, 1)]))
    x = creal_sqrt(CReal.const(Dyadic(abs(k) + 1, -10))) - CReal.const(Dyadic(1, -1))
    assert bitfunc_eval(f, [x], n, start=n + 4) == bitfunc_eval(f, [x], n, start=n + 8)


@pytest.mark.parametrize("text", EXPRS)
def test_cost_meter_monotone_in_n(text):
    f = BitFunction.parse(text, Box([(-1, 1)]))
    x = SQRT2 - 1
    last = -1
    for n in range(0, 40):
        meter = CostMeter()
        bitfunc_eval(f, [x], n, meter)
        assert meter.max_precision >= last
        last = meter.max_precision


def test_two_argument_function():
    f = BitFunction.parse("mul(x1,x2)", Box([(0, 2), (0, 3)]))
    d = bitfunc_eval(f, [SQRT2, E], 16)
    ref = sqrt_floor_bisect(TWO, 60) * factorial_partial_e(30)
    assert close(d, ref, 16, Fraction(1, 2**50))
