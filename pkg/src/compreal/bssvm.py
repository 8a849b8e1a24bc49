"""Register machines over the reals, exact and with finite-precision modifications.

Programs are a small assembly language::

    # x*x + 1/4
          INPUT r0 0
          MUL   r1 r0 r0
          CONST r2 1/4
          ADD   r1 r1 r2
          OUT   r1
          HALT

Exact runs keep every register as an exact rational.  A :class:`RunMode`
switches on any subset of three modifications: named real constants are
only available through finite approximations, arithmetic results are
rounded to ``2**-p``, and sign tests inside ``(-2**-p, 2**-p)`` are
unreliable and resolved by a policy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .creal import NAMED_CONSTANTS, CReal, creal_approx
from .dyadic import Dyadic, parse_rational, rational_round
from .errors import (BranchBudgetExceeded, ConstantNotExact, DivisionByZero, DomainViolation,
                     FuelExhausted, NotStablyConvergent, ParseError, UninitializedRegister,
                     UnresolvedLabel)

ARITH = {"ADD", "SUB", "MUL", "DIV"}
# opcode -> operand kinds: r register, c constant, i input index, l label
SIGNATURES = {
    "CONST": "rc", "INPUT": "ri", "MOV": "rr",
    "ADD": "rrr", "SUB": "rrr", "MUL": "rrr", "DIV": "rrr",
    "JGEZ": "rl", "JMP": "l", "OUT": "r", "HALT": "",
}
BRANCH_BUDGET = 1 << 12
DEFAULT_FUEL = 100_000

_REG = re.compile(r"[rR](\d+)$")
_LABEL = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_TOKEN = re.compile(r"[^\s,]+")


@dataclass(frozen=True)
class Instr:
    op: str
    args: tuple
    line: int

    def __str__(self):
        return " ".join([self.op] + [f"r{a}" if k == "r" else str(a)
                                     for k, a in zip(SIGNATURES[self.op], self.args)])


@dataclass
class BssProgram:
    code: list[Instr]
    labels: dict[str, int]
    registers: int
    inputs: int
    source: str = ""

    def __len__(self):
        return len(self.code)

    def named_constants(self) -> set[str]:
        return {i.args[1] for i in self.code if i.op == "CONST" and isinstance(i.args[1], str)}


def _operand(kind, tok, lineno, col):
    if kind == "r":
        m = _REG.match(tok)
        if not m:
            raise ParseError(f"expected a register, got {tok!r}", line=lineno, col=col)
        return int(m.group(1))
    if kind == "i":
        if not tok.isdigit():
            raise ParseError(f"expected an input index, got {tok!r}", line=lineno, col=col)
        return int(tok)
    if kind == "l":
        if not _LABEL.match(tok):
            raise ParseError(f"bad label {tok!r}", line=lineno, col=col)
        return tok
    if tok in NAMED_CONSTANTS:
        return tok
    try:
        return parse_rational(tok)
    except ParseError:
        raise ParseError(f"bad constant {tok!r}", line=lineno, col=col) from None


def bss_parse(text: str) -> BssProgram:
    """Parse and validate a program.

    Checks that every label resolves, that no register is read before it is
    written on some path, and that no reachable path runs off the end.
    """
    code: list[Instr] = []
    labels: dict[str, int] = {}
    label_lines: dict[str, tuple[int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        toks = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
        while toks and toks[0][0].endswith(":"):
            name, col = toks.pop(0)
            name = name[:-1]
            if not _LABEL.match(name):
                raise ParseError(f"bad label {name!r}", line=lineno, col=col)
            if name in labels:
                raise ParseError(f"label {name!r} defined twice", line=lineno, col=col)
            labels[name] = len(code)
        if not toks:
            continue
        (op, col), rest = toks[0], toks[1:]
        op = op.upper()
        if op not in SIGNATURES:
            raise ParseError(f"unknown instruction {toks[0][0]!r}", line=lineno, col=col)
        sig = SIGNATURES[op]
        if len(rest) != len(sig):
            raise ParseError(f"{op} takes {len(sig)} operand(s), got {len(rest)}", line=lineno, col=col)
        args = tuple(_operand(k, tok, lineno, c) for k, (tok, c) in zip(sig, rest))
        for k, a, (_, c) in zip(sig, args, rest):
            if k == "l":
                label_lines.setdefault(a, (lineno, c))
        code.append(Instr(op, args, lineno))
    for name, (lineno, col) in label_lines.items():
        if name not in labels:
            raise UnresolvedLabel(f"jump to undefined label {name!r}", line=lineno, col=col)
    regs = [a for i in code for k, a in zip(SIGNATURES[i.op], i.args) if k == "r"]
    inputs = [i.args[1] for i in code if i.op == "INPUT"]
    prog = BssProgram(code, labels, max(regs, default=-1) + 1, max(inputs, default=-1) + 1, text)
    _check_flow(prog)
    return prog


def _successors(prog: BssProgram, pc: int):
    ins = prog.code[pc]
    if ins.op == "HALT":
        return []
    if ins.op == "JMP":
        return [prog.labels[ins.args[0]]]
    if ins.op == "JGEZ":
        return [pc + 1, prog.labels[ins.args[1]]]
    return [pc + 1]


def _check_flow(prog: BssProgram):
    """Must-initialise dataflow plus a fall-off-the-end check."""
    n = len(prog.code)
    if n == 0:
        raise ParseError("empty program", line=1, col=1)
    defined: list[frozenset | None] = [None] * (n + 1)
    defined[0] = frozenset()
    work = [0]
    while work:
        pc = work.pop()
        if pc == n:
            last = prog.code[-1]
            raise ParseError("control can run past the last instruction without HALT",
                             line=last.line, col=1)
        ins = prog.code[pc]
        have = defined[pc]
        sig = SIGNATURES[ins.op]
        # operand 0 is the destination, except for JGEZ and OUT
        first = 0 if ins.op in ("JGEZ", "OUT") else 1
        reads = [a for k, a in list(zip(sig, ins.args))[first:] if k == "r"]
        for r in reads:
            if r not in have:
                raise UninitializedRegister(f"r{r} may be read before it is written", line=ins.line, col=1)
        out = have | {ins.args[0]} if ins.op in ARITH | {"CONST", "INPUT", "MOV"} else have
        for s in _successors(prog, pc):
            old = defined[s]
            new = out if old is None else old & out
            if new != old:
                defined[s] = new
                work.append(s)


# -- run modes ---------------------------------------------------------------


POLICIES = ("take", "skip", "explore")


@dataclass(frozen=True)
class RunMode:
    """Which modifications are on.

    ``round_bits``: round each arithmetic result to ``2**-p``.
    ``fuzzy_bits``: sign tests with ``|v| < 2**-p`` are unreliable; ``policy``
    decides (take the jump, skip it, or explore both).
    ``const_bits``: named real constants are read as ``2**-p``
    approximations; without it they are rejected.
    """

    round_bits: int | None = None
    fuzzy_bits: int | None = None
    policy: str = "explore"
    const_bits: int | None = None

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")

    @classmethod
    def exact(cls):
        return cls()

    @classmethod
    def rounded(cls, p: int):
        return cls(round_bits=p, const_bits=p)

    @classmethod
    def fuzzy(cls, p: int, policy: str = "explore"):
        return cls(fuzzy_bits=p, policy=policy, const_bits=p)

    @classmethod
    def modified(cls, p: int):
        return cls(round_bits=p, fuzzy_bits=p, policy="explore", const_bits=p)

    @classmethod
    def parse(cls, text: str) -> "RunMode":
        """``exact``, ``rounded:P``, ``fuzzy:P:POLICY`` or ``modified:P``."""
        parts = text.split(":")
        try:
            if parts == ["exact"]:
                return cls.exact()
            if parts[0] == "rounded" and len(parts) == 2:
                return cls.rounded(int(parts[1]))
            if parts[0] == "fuzzy" and len(parts) in (2, 3):
                return cls.fuzzy(int(parts[1]), parts[2] if len(parts) == 3 else "explore")
            if parts[0] == "modified" and len(parts) == 2:
                return cls.modified(int(parts[1]))
        except ValueError:
            pass
        raise ParseError(f"bad run mode {text!r}; expected exact|rounded:P|fuzzy:P:POLICY|modified:P")

    def __str__(self):
        bits = []
        if self.round_bits is not None:
            bits.append(f"rounded:{self.round_bits}")
        if self.fuzzy_bits is not None:
            bits.append(f"fuzzy:{self.fuzzy_bits}:{self.policy}")
        return "+".join(bits) or "exact"


@dataclass
class RunOutcome:
    """All distinct output sequences reached, sorted; ``diverged`` if some path ran out of fuel."""

    outcomes: list[tuple[Fraction, ...]]
    diverged: bool = False
    steps: int = 0
    paths: int = 1

    @property
    def outputs(self) -> tuple[Fraction, ...]:
        """The unique output sequence of a run that reached exactly one."""
        if self.diverged or len(self.outcomes) != 1:
            raise ValueError(f"run has {len(self.outcomes)} outcome(s), diverged={self.diverged}")
        return self.outcomes[0]

    def values(self) -> list[Fraction]:
        return sorted({v for o in self.outcomes for v in o})


@dataclass
class _Path:
    pc: int
    regs: dict
    out: list = field(default_factory=list)
    steps: int = 0


def _constant(c, mode: RunMode) -> Fraction:
    if not isinstance(c, str):
        return c
    if mode.const_bits is None:
        raise ConstantNotExact(f"named constant {c!r} needs a run mode with finite precision")
    return creal_approx(NAMED_CONSTANTS[c], mode.const_bits).to_fraction()


def bss_run(prog: BssProgram, inputs, mode: RunMode | None = None, fuel: int = DEFAULT_FUEL,
            branch_budget: int = BRANCH_BUDGET) -> RunOutcome:
    """Run a program; ``fuel`` bounds the steps of each path."""
    mode = mode or RunMode.exact()
    inputs = [Fraction(x) if not isinstance(x, Dyadic) else x.to_fraction() for x in inputs]
    if len(inputs) < prog.inputs:
        raise DomainViolation(f"program reads {prog.inputs} input(s), got {len(inputs)}")
    consts = {c: _constant(c, mode) for c in prog.named_constants()}
    band = Fraction(1, 1 << mode.fuzzy_bits) if mode.fuzzy_bits is not None else None
    p = mode.round_bits

    def arith(op, a, b, line):
        if op == "ADD":
            v = a + b
        elif op == "SUB":
            v = a - b
        elif op == "MUL":
            v = a * b
        else:
            if b == 0:
                raise DivisionByZero(f"division by zero at line {line}")
            v = a / b
        return v if p is None else rational_round(v, p).to_fraction()

    outcomes = set()
    diverged = False
    total = 0
    paths = 1
    stack = [_Path(0, {})]
    while stack:
        path = stack.pop()
        regs = path.regs
        while True:
            if path.steps >= fuel:
                diverged = True
                break
            ins = prog.code[path.pc]
            path.steps += 1
            total += 1
            op, args = ins.op, ins.args
            nxt = path.pc + 1
            if op == "HALT":
                outcomes.add(tuple(path.out))
                break
            if op == "CONST":
                c = args[1]
                regs[args[0]] = consts[c] if isinstance(c, str) else c
            elif op == "INPUT":
                regs[args[0]] = inputs[args[1]]
            elif op == "MOV":
                regs[args[0]] = regs[args[1]]
            elif op in ARITH:
                regs[args[0]] = arith(op, regs[args[1]], regs[args[2]], ins.line)
            elif op == "JMP":
                nxt = prog.labels[args[0]]
            elif op == "OUT":
                path.out.append(regs[args[0]])
            else:  # JGEZ
                v = regs[args[0]]
                target = prog.labels[args[1]]
                if band is not None and abs(v) < band:
                    if mode.policy == "take":
                        nxt = target
                    elif mode.policy == "explore":
                        paths += 1
                        if paths > branch_budget:
                            raise BranchBudgetExceeded(f"more than {branch_budget} paths")
                        stack.append(_Path(target, dict(regs), list(path.out), path.steps))
                elif v >= 0:
                    nxt = target
            path.pc = nxt
    return RunOutcome(sorted(outcomes), diverged, total, paths)


def bss_to_bitfunc(prog: BssProgram, inputs, n: int, max_p: int | None = None,
                   fuel: int = DEFAULT_FUEL) -> Dyadic:
    """A ``2**-n`` approximation of the program's output at real inputs.

    For p = n+4, n+8, ... the program runs on ``2**-p`` approximations of
    the inputs in the modified mode at precision p.  Once every explored
    path outputs a value within ``2**-(n+1)`` of the first, that value
    rounded to ``2**-n`` is returned.
    """
    if isinstance(inputs, (CReal, Dyadic, Fraction, int)):
        inputs = [inputs]
    xs = [x if isinstance(x, CReal) else CReal.const(x) for x in inputs]
    max_p = n + 64 if max_p is None else max_p
    tol = Fraction(2) ** -(n + 1)
    p = n + 4
    spread = None
    while p <= max_p:
        res = bss_run(prog, [creal_approx(x, p) for x in xs], RunMode.modified(p), fuel)
        if res.diverged:
            raise FuelExhausted(f"a path ran past {fuel} steps at precision {p}")
        for o in res.outcomes:
            if len(o) != 1:
                raise DomainViolation(f"program must output exactly one value per path, got {len(o)}")
        first = res.outcomes[0][0]
        spread = max(abs(o[0] - first) for o in res.outcomes)
        if spread <= tol:
            return rational_round(first, n)
        p += 4
    raise NotStablyConvergent(f"outputs still spread by {float(spread):.3g} at precision {max_p}")


__all__ = [
    "BssProgram",
    "Instr",
    "RunMode",
    "RunOutcome",
    "bss_parse",
    "bss_run",
    "bss_to_bitfunc",
]
