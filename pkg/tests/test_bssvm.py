import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from compreal.bssvm import RunMode, bss_parse, bss_run, bss_to_bitfunc
from compreal.creal import SQRT2, CReal
from compreal.dyadic import Dyadic
from compreal.errors import (BranchBudgetExceeded, ConstantNotExact, DivisionByZero, DomainViolation,
                             FuelExhausted, NotStablyConvergent, ParseError, UninitializedRegister,
                             UnresolvedLabel)

from corpora import SIGN, SQUARE_PLUS_QUARTER, squaring_corpus, squaring_program
from oracles import round_half_even, sqrt_floor_bisect

# parsing


def test_parse_examples():
    prog = bss_parse("CONST r0 1/2\nOUT r0\nHALT")
    assert len(prog) == 3
    bss_parse("INPUT r0 0\nDIV r1 r0 r0\nOUT r1\nHALT")
    lower = bss_parse("input r0 0 # read x\nout r0\nhalt\n")
    assert [i.op for i in lower.code] == ["INPUT", "OUT", "HALT"]


@pytest.mark.parametrize("text,exc", [
    ("JMP nowhere", UnresolvedLabel),
    ("OUT r0\nHALT", UninitializedRegister),
    ("INPUT r0 0\nJGEZ r0 a\nCONST r1 1\na: OUT r1\nHALT", UninitializedRegister),
    ("FROB r0", ParseError),
    ("CONST r0\nHALT", ParseError),
    ("CONST r0 pi\nHALT", ParseError),
    ("CONST x0 1\nHALT", ParseError),
    ("CONST r0 1\nOUT r0", ParseError),
    ("", ParseError),
    ("a: HALT\na: HALT", ParseError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        bss_parse(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        bss_parse("CONST r0 1\n  MUL r0 r0 q7\nHALT")
    assert info.value.line == 2 and info.value.col == 13


# running

def test_run_examples():
    assert bss_run(bss_parse(SQUARE_PLUS_QUARTER), [Fraction(1, 2)]).outputs == (Fraction(1, 2),)
    res = bss_run(bss_parse(SIGN), [Dyadic(-1, -30)], RunMode.fuzzy(10))
    assert res.values() == [0, 1] and res.paths == 2
    cube = bss_parse(squaring_program(3))
    assert bss_run(cube, [Fraction(3, 4)], RunMode.rounded(8)).outputs == (Fraction(13, 128),)


def test_rounded_squaring_matches_hand_rounding():
    x = Fraction(3, 4)
    for _ in range(3):
        x = round_half_even(x * x, 8)
    assert x == Fraction(13, 128)


def test_fuzzy_policies():
    prog = bss_parse(SIGN)
    tiny = [Dyadic(-1, -30)]
    assert bss_run(prog, tiny, RunMode.fuzzy(10, "take")).values() == [1]
    assert bss_run(prog, tiny, RunMode.fuzzy(10, "skip")).values() == [0]
    assert bss_run(prog, tiny, RunMode.exact()).values() == [0]
    assert bss_run(prog, [Dyadic(-1, -2)], RunMode.fuzzy(10)).values() == [0]


def test_runtime_errors_and_divergence():
    with pytest.raises(DivisionByZero):
        bss_run(bss_parse("CONST r0 0\nDIV r1 r0 r0\nOUT r1\nHALT"), [])
    loop = bss_parse("CONST r0 1\ntop: JMP top\nHALT")
    res = bss_run(loop, [], fuel=50)
    assert res.diverged and res.outcomes == []
    with pytest.raises(DomainViolation):
        bss_run(bss_parse(SIGN), [])


def test_named_constants_need_finite_precision():
    prog = bss_parse("CONST r0 sqrt2\nMUL r0 r0 r0\nOUT r0\nHALT")
    with pytest.raises(ConstantNotExact):
        bss_run(prog, [])
    v = bss_run(prog, [], RunMode.rounded(30)).outputs[0]
    assert abs(v - 2) <= Fraction(1, 2**27)


def test_branch_budget():
    # r0 = 0 sits in the band, so every pass through the loop forks
    text = "CONST r0 0\ntop: JGEZ r0 top\nHALT"
    with pytest.raises(BranchBudgetExceeded):
        bss_run(bss_parse(text), [], RunMode.fuzzy(4), fuel=100, branch_budget=64)


def test_mode_parsing():
    assert RunMode.parse("exact") == RunMode.exact()
    assert RunMode.parse("rounded:8") == RunMode.rounded(8)
    assert RunMode.parse("fuzzy:10:take") == RunMode.fuzzy(10, "take")
    assert RunMode.parse("modified:12") == RunMode.modified(12)
    for bad in ("fast", "rounded", "fuzzy:3:maybe", "rounded:x"):
        with pytest.raises(ParseError):
            RunMode.parse(bad)


# random straight-line programs against an independent evaluator

@st.composite
def straight_line(draw):
    """A program text, its inputs, and the exact value of its output."""
    n_inputs = draw(st.integers(1, 3))
    xs = [Fraction(draw(st.integers(-(2**12), 2**12)), 2**12) for _ in range(n_inputs)]
    lines, vals = [], []
    for i, x in enumerate(xs):
        lines.append(f"INPUT r{i} {i}")
        vals.append(x)
    for _ in range(draw(st.integers(1, 20 - n_inputs - 2))):
        op = draw(st.sampled_from(["ADD", "SUB", "MUL", "DIVC", "CONST"]))
        dst = len(vals)
        if op == "CONST":
            c = Fraction(draw(st.integers(-64, 64)), 16)
            lines.append(f"CONST r{dst} {c.numerator}/{c.denominator}")
            vals.append(c)
            continue
        a = draw(st.integers(0, dst - 1))
        if op == "DIVC":
            c = Fraction(draw(st.sampled_from([1, 3, 5, 7, -3])), draw(st.sampled_from([1, 2, 4])))
            lines.append(f"CONST r{dst} {c.numerator}/{c.denominator}")
            vals.append(c)
            lines.append(f"DIV r{dst + 1} r{a} r{dst}")
            vals.append(vals[a] / c)
            continue
        b = draw(st.integers(0, dst - 1))
        lines.append(f"{op} r{dst} r{a} r{b}")
        va, vb = vals[a], vals[b]
        vals.append(va + vb if op == "ADD" else va - vb if op == "SUB" else va * vb)
    lines += [f"OUT r{len(vals) - 1}", "HALT"]
    return "\n".join(lines), xs, vals[-1]


@given(straight_line())
@settings(max_examples=1000)
def test_exact_mode_matches_rational_evaluation(case):
    text, xs, expected = case
    assert bss_run(bss_parse(text), xs).outputs == (expected,)


def _forward_error_bound(text, xs, p):
    """Worst-case |rounded - exact| by forward propagation on exact magnitudes."""
    u = Fraction(1, 2 ** (p + 1))
    val, err = {}, {}
    for line in text.splitlines():
        op, *args = line.split()
        regs = [int(a[1:]) for a in args if a.startswith("r")]
        if op == "INPUT":
            val[regs[0]], err[regs[0]] = xs[int(args[1])], Fraction(0)
        elif op == "CONST":
            val[regs[0]], err[regs[0]] = Fraction(args[1]), Fraction(0)
        elif op in ("ADD", "SUB", "MUL", "DIV"):
            d, a, b = regs
            va, vb, ea, eb = val[a], val[b], err[a], err[b]
            if op == "ADD":
                val[d], e = va + vb, ea + eb
            elif op == "SUB":
                val[d], e = va - vb, ea + eb
            elif op == "MUL":
                val[d], e = va * vb, abs(va) * eb + abs(vb) * ea + ea * eb
            else:
                assert eb == 0
                val[d], e = va / vb, ea / abs(vb)
            err[d] = e + u
        elif op == "OUT":
            return err[regs[0]]


@given(straight_line(), st.integers(4, 40))
@settings(max_examples=300)
def test_rounding_error_within_forward_bound(case, p):
    text, xs, expected = case
    got = bss_run(bss_parse(text), xs, RunMode.rounded(p)).outputs[0]
    assert abs(got - expected) <= _forward_error_bound(text, xs, p)


def test_rounding_error_envelope_on_squaring_corpus():
    # four squarings of x < 1 amplify an early error by at most 2**4
    for text, x, exact in squaring_corpus(seed=1):
        prog = bss_parse(text)
        for p in range(8, 25):
            got = bss_run(prog, [x], RunMode.rounded(p)).outputs[0]
            assert abs(got - exact) <= 16 * Fraction(1, 2**p)


# fuzzy exploration

@st.composite
def branching(draw):
    text, xs, _ = draw(straight_line())
    body = text.splitlines()[:-2]
    t = int(body[-1].split()[1][1:])
    w = t + 1
    body += [f"JGEZ r{t} pos", f"CONST r{w} -1", f"MUL r{w} r{w} r{t}", f"OUT r{w}", "HALT",
             f"pos: OUT r{t}", "HALT"]
    return "\n".join(body), xs


@given(branching(), st.integers(0, 40))
@settings(max_examples=300)
def test_fuzzy_explore_contains_exact_outcome(case, p):
    text, xs = case
    prog = bss_parse(text)
    exact = bss_run(prog, xs).outputs
    assert exact in bss_run(prog, xs, RunMode.fuzzy(p)).outcomes


# stabilization

def test_stabilization_examples():
    sq = bss_parse(SQUARE_PLUS_QUARTER)
    v = bss_to_bitfunc(sq, SQRT2, 10)
    assert abs(v.to_fraction() - Fraction(9, 4)) <= Fraction(1, 2**10)
    sign = bss_parse(SIGN)
    with pytest.raises(NotStablyConvergent):
        bss_to_bitfunc(sign, CReal.const(0), 4)
    assert bss_to_bitfunc(sign, CReal.const(Dyadic(1, -2)), 4) == Dyadic(1)
    assert bss_to_bitfunc(sign, CReal.const(Dyadic(-1, -2)), 4) == Dyadic(0)


def test_stabilization_errors():
    loop = bss_parse("INPUT r0 0\ntop: JMP top\nHALT")
    with pytest.raises(FuelExhausted):
        bss_to_bitfunc(loop, Dyadic(1), 4, fuel=100)
    two = bss_parse("INPUT r0 0\nOUT r0\nOUT r0\nHALT")
    with pytest.raises(DomainViolation):
        bss_to_bitfunc(two, Dyadic(1), 4)


@given(straight_line(), st.integers(0, 30))
@settings(max_examples=200)
def test_stabilized_value_meets_contract(case, n):
    text, xs, expected = case
    v = bss_to_bitfunc(bss_parse(text), [Dyadic.from_fraction(x) for x in xs], n, max_p=n + 200)
    assert abs(v.to_fraction() - expected) <= Fraction(1, 2**n)


def test_stabilized_value_at_irrational_input():
    sq = bss_parse(SQUARE_PLUS_QUARTER)
    for n in (0, 5, 20, 40):
        ref = sqrt_floor_bisect(Fraction(2), n + 40) ** 2 + Fraction(1, 4)
        v = bss_to_bitfunc(sq, SQRT2, n)
        assert abs(v.to_fraction() - ref) <= Fraction(1, 2**n) + Fraction(1, 2**(n + 30))


def test_explore_outcomes_are_sorted_and_unique():
    prog = bss_parse(SIGN)
    rng = random.Random(0)
    for _ in range(20):
        x = Dyadic(rng.randint(-8, 8), -12)
        res = bss_run(prog, [x], RunMode.fuzzy(8))
        assert res.outcomes == sorted(set(res.outcomes))
