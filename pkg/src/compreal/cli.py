"""Command-line entry point.

Every number printed is exact (``m*2^e`` or ``p/q``) and re-parses to the
same value.  Exit codes: 0 success, 1 parse error, 2 semantic error (bad
domain, non-convergence, ...), 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .bssvm import RunMode, bss_parse, bss_run, bss_to_bitfunc
from .creal import NAMED_CONSTANTS, BitFunction, CostMeter, CReal, bitfunc_eval, parse_expr
from .dyadic import Box, Dyadic, format_number, format_rational, parse_rational
from .errors import (BranchBudgetExceeded, ComputableError, ConstantNotExact, DimensionMismatch,
                     DomainViolation, NegativeOperandDetected, NonInvertibleMap, NotStablyConvergent,
                     ParseError, RangeExceeded, ViewportEmpty)
from .graphfn import gf_eval
from .parsing import parse_number_list
from .setexpr import parse_graph, parse_set
from .sets import raster
from .weak import DyadicCloud, cloud_from_oracle, hausdorff_sq

SEMANTIC = (NotStablyConvergent, DomainViolation, DimensionMismatch, NonInvertibleMap,
            ConstantNotExact, ViewportEmpty, RangeExceeded, NegativeOperandDetected,
            BranchBudgetExceeded)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _box(text: str) -> Box:
    v = parse_number_list(text)
    if len(v) != 4:
        raise ParseError(f"--box wants x_min,y_min,x_max,y_max, got {text!r}")
    lo = [_dyadic(str(q)) for q in v[:2]]
    hi = [_dyadic(str(q)) for q in v[2:]]
    if lo[0] > hi[0] or lo[1] > hi[1]:
        raise ParseError(f"--box corners out of order in {text!r}")
    return Box.from_corners(lo, hi)


def _real(text: str) -> CReal:
    """A dyadic, a fraction or a named constant."""
    text = text.strip()
    if text in NAMED_CONSTANTS:
        return NAMED_CONSTANTS[text]
    return CReal.const(parse_rational(text))


def _dyadic(text: str) -> Dyadic:
    q = parse_rational(text)
    if q.denominator & (q.denominator - 1):
        raise ParseError(f"{text!r} is not a dyadic rational")
    return Dyadic.from_fraction(q)


def _read(path):
    with open(path) as fh:
        return fh.read()


def cmd_render(a, out):
    s = parse_set(a.set)
    grid = raster(s, _box(a.box), a.n, workers=a.workers)
    data = grid.to_pbm()
    if a.out:
        with open(a.out, "wb") as fh:
            fh.write(data)
        inside = grid.count_in()
        print(f"{grid.width}x{grid.height} in={inside} out={grid.width * grid.height - inside}", file=out)
    else:
        out.flush()
        sys.stdout.buffer.write(data)


def cmd_eval(a, out):
    expr = parse_expr(a.expr)
    xs = [_real(t) for t in a.x.split(";")] if ";" in a.x else [_real(a.x)]
    if a.domain:
        bounds = parse_number_list(a.domain)
        if len(bounds) != 2 * len(xs):
            raise ParseError("--domain wants lo,hi per argument")
        dom = Box((_dyadic(str(bounds[2 * i])), _dyadic(str(bounds[2 * i + 1])))
                  for i in range(len(xs)))
    else:
        # a unit box around each argument
        dom = Box((x.approx(2).floor(0) - 1, x.approx(2).ceil(0) + 1) for x in xs)
    f = BitFunction(expr, dom)
    meter = CostMeter()
    d = bitfunc_eval(f, xs, a.n, meter)
    print(d, file=out)
    if a.cost:
        print(f"queries={meter.queries} max_precision={meter.max_precision} node_evals={meter.node_evals}",
              file=out)


def cmd_graph_eval(a, out):
    F = parse_graph(a.set)
    for c in gf_eval(F, _dyadic(a.x), a.n):
        print(f"[{c.lo}, {c.hi}]", file=out)


def cmd_weak(a, out):
    cloud = cloud_from_oracle(parse_set(a.set), _box(a.box), a.n)
    text = cloud.to_csv()
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
        print(f"points={len(cloud)}", file=out)
    else:
        out.write(text)


def cmd_hausdorff(a, out):
    h = hausdorff_sq(DyadicCloud.from_csv(_read(a.a)), DyadicCloud.from_csv(_read(a.b)))
    print(format_rational(h), file=out)


def cmd_certify(a, out):
    ref = cloud_from_oracle(parse_set(a.set), _box(a.box), a.n)
    print(f"reference_points={len(ref)}", file=out)
    print(f"reference_hausdorff_sq_bound={format_rational(Dyadic(1, -2 * a.n).to_fraction())}", file=out)
    if a.cloud:
        h = hausdorff_sq(DyadicCloud.from_csv(_read(a.cloud)), ref)
        print(f"cloud_to_reference_hausdorff_sq={format_rational(h)}", file=out)


def cmd_bss_run(a, out):
    prog = bss_parse(_read(a.file))
    inputs = [parse_rational(t) for t in a.input]
    res = bss_run(prog, inputs, RunMode.parse(a.mode), a.fuel)
    for o in res.outcomes:
        print(" ".join(format_number(v) for v in o), file=out)
    if res.diverged:
        print(f"diverged fuel={a.fuel}", file=out)
    print(f"paths={res.paths} steps={res.steps}", file=out)


def cmd_bss_stabilize(a, out):
    prog = bss_parse(_read(a.file))
    v = bss_to_bitfunc(prog, [_real(t) for t in a.input], a.n, a.max_p, a.fuel)
    print(v, file=out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="compreal", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    box_help = "viewport x_min,y_min,x_max,y_max (origin bottom-left)"

    r = sub.add_parser("render", help="rasterize a set expression to PBM")
    r.add_argument("--set", required=True)
    r.add_argument("--box", required=True, help=box_help)
    r.add_argument("--n", type=int, required=True, help="precision; pixels are 2^-n wide")
    r.add_argument("--out", help="PBM path (default: stdout)")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(fn=cmd_render)

    e = sub.add_parser("eval", help="evaluate a function expression to 2^-n")
    e.add_argument("--expr", required=True, help="e.g. exp(mul(x,x))")
    e.add_argument("--x", required=True, help="argument(s), ';'-separated; dyadic, p/q, e or sqrt2")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--domain", help="lo,hi per argument (default: unit box around the arguments)")
    e.add_argument("--cost", action="store_true", help="also print query counts")
    e.set_defaults(fn=cmd_eval)

    g = sub.add_parser("graph-eval", help="value clusters of a graph-computable function")
    g.add_argument("--set", required=True, help="stepgraph, sqrtgraph, graph(FUNC,lo,hi) or any set")
    g.add_argument("--x", required=True)
    g.add_argument("--n", type=int, required=True)
    g.set_defaults(fn=cmd_graph_eval)

    w = sub.add_parser("weak", help="certified point cloud of a set, as CSV")
    w.add_argument("--set", required=True)
    w.add_argument("--box", required=True, help=box_help)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--out")
    w.set_defaults(fn=cmd_weak)

    h = sub.add_parser("hausdorff", help="exact squared Hausdorff distance of two CSV clouds")
    h.add_argument("a")
    h.add_argument("b")
    h.set_defaults(fn=cmd_hausdorff)

    c = sub.add_parser("certify", help="recompute a reference cloud and its squared Hausdorff bound")
    c.add_argument("--set", required=True)
    c.add_argument("--box", required=True, help=box_help)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--cloud", help="CSV cloud to compare against the reference")
    c.set_defaults(fn=cmd_certify)

    b = sub.add_parser("bss", help="register machine over the reals")
    bsub = b.add_subparsers(dest="bss_cmd", required=True, parser_class=_Parser)
    br = bsub.add_parser("run", help="run a program")
    br.add_argument("file")
    br.add_argument("--mode", default="exact", help="exact|rounded:P|fuzzy:P:POLICY|modified:P")
    br.add_argument("--input", action="append", default=[])
    br.add_argument("--fuel", type=int, default=100_000)
    br.set_defaults(fn=cmd_bss_run)
    bs = bsub.add_parser("stabilize", help="approximate the output at real inputs to 2^-n")
    bs.add_argument("file")
    bs.add_argument("--input", action="append", default=[], help="dyadic, p/q, e or sqrt2")
    bs.add_argument("--n", type=int, required=True)
    bs.add_argument("--max-p", type=int, default=None)
    bs.add_argument("--fuel", type=int, default=100_000)
    bs.set_defaults(fn=cmd_bss_stabilize)
    return p


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ParseError, UsageError)):
        return 1
    if isinstance(exc, SEMANTIC):
        return 2
    return 3


_VALUE_FLAGS = {"--box", "--x", "--input", "--domain"}


def _glue_negative_values(argv):
    """Let ``--box -1,-1,1,1`` through: argparse would read -1,... as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_negative_values(argv))
        args.fn(args, out)
    except (ComputableError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
