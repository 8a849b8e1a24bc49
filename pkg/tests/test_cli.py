import io
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from compreal.cli import main
from compreal.dyadic import parse_dyadic, parse_rational

from corpora import SIGN, SQUARE_PLUS_QUARTER
from oracles import exp_series

FIXTURES = Path(__file__).parent / "fixtures"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_render_disk_matches_golden(tmp_path):
    target = tmp_path / "d.pbm"
    code, text = run("render", "--set", "disk(0,0,1/2)", "--box", "-1,-1,1,1", "--n", "3", "--out", str(target))
    assert code == 0
    assert text.startswith("16x16 in=")
    assert target.read_bytes() == (FIXTURES / "disk_r1-2_box-1-1_n3.pbm").read_bytes()


def test_render_union_is_or_of_singletons(tmp_path):
    paths = {}
    for name, expr in [("u", "union(point(0,0),point(1,0))"), ("a", "point(0,0)"), ("b", "point(1,0)")]:
        paths[name] = tmp_path / f"{name}.pbm"
        assert run("render", "--set", expr, "--box", "0,0,1,1", "--n", "1", "--out", str(paths[name]))[0] == 0

    def bits(p):
        return [line for line in p.read_text().splitlines()[2:]]
    u, a, b = bits(paths["u"]), bits(paths["a"]), bits(paths["b"])
    assert u == ["".join("1" if "1" in (x, y) else "0" for x, y in zip(ra, rb)) for ra, rb in zip(a, b)]


def test_render_sierpinski_deterministic(tmp_path):
    outs = []
    for workers in ("1", "4", "8"):
        p = tmp_path / f"s{workers}.pbm"
        assert run("render", "--set", "sierpinski()", "--box", "0,0,1,1", "--n", "6",
                   "--workers", workers, "--out", str(p))[0] == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_eval_exp_example():
    code, text = run("eval", "--expr", "exp(mul(x,x))", "--x", "1/2", "--n", "10")
    assert code == 0
    d = parse_dyadic(text.strip())
    assert abs(d.to_fraction() - exp_series(Fraction(1, 4), 30)) <= Fraction(1, 2**10) + Fraction(1, 2**30)


def test_eval_with_cost_and_constants():
    code, text = run("eval", "--expr", "mul(x1,x2)", "--x", "sqrt2;e", "--n", "12", "--cost")
    assert code == 0
    value, cost = text.splitlines()
    assert abs(float(parse_dyadic(value).to_fraction()) - 2**0.5 * 2.718281828459045) < 2**-11
    assert cost.startswith("queries=")


def test_graph_eval_step():
    code, text = run("graph-eval", "--set", "stepgraph", "--x", "0", "--n", "5")
    assert code == 0
    lines = text.splitlines()
    assert len(lines) == 2
    lo, hi = lines[0].strip("[]").split(", ")
    assert parse_dyadic(lo) <= 0 <= parse_dyadic(hi)


def test_weak_and_hausdorff(tmp_path):
    code, text = run("weak", "--set", "point(0,0)", "--box", "-1,-1,1,1", "--n", "1")
    assert code == 0
    rows = text.splitlines()
    assert "0*2^0,0*2^0" in rows
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("0,0\n")
    b.write_text("1,0\n")
    assert run("hausdorff", str(a), str(b)) == (0, "1/1\n")


def test_certify(tmp_path):
    cloud = tmp_path / "c.csv"
    assert run("weak", "--set", "segment(0,0,1,0)", "--box", "0,0,1,1", "--n", "2", "--out", str(cloud))[0] == 0
    code, text = run("certify", "--set", "segment(0,0,1,0)", "--box", "0,0,1,1", "--n", "2", "--cloud", str(cloud))
    assert code == 0
    fields = dict(line.split("=") for line in text.splitlines())
    assert parse_rational(fields["reference_hausdorff_sq_bound"]) == Fraction(1, 16)
    assert parse_rational(fields["cloud_to_reference_hausdorff_sq"]) == 0


def test_bss_commands(tmp_path):
    sq = tmp_path / "sq.bss"
    sq.write_text(SQUARE_PLUS_QUARTER)
    assert run("bss", "run", str(sq), "--input", "1/2") == (0, "1*2^-1\npaths=1 steps=6\n")
    code, text = run("bss", "stabilize", str(sq), "--input", "sqrt2", "--n", "10")
    assert code == 0
    assert abs(parse_dyadic(text.strip()).to_fraction() - Fraction(9, 4)) <= Fraction(1, 2**10)
    sign = tmp_path / "sign.bss"
    sign.write_text(SIGN)
    code, text = run("bss", "run", str(sign), "--mode", "fuzzy:10:explore", "--input", "-1*2^-30")
    assert code == 0 and text.splitlines()[:2] == ["0*2^0", "1*2^0"]
    assert run("bss", "stabilize", str(sign), "--input", "0", "--n", "4")[0] == 2


def test_bss_divergence_is_reported(tmp_path):
    loop = tmp_path / "loop.bss"
    loop.write_text("CONST r0 1\ntop: JMP top\nHALT\n")
    code, text = run("bss", "run", str(loop), "--fuel", "20")
    assert code == 0 and "diverged fuel=20" in text


@pytest.mark.parametrize("argv,code", [
    (["render", "--set", "disk(0,0", "--box", "0,0,1,1", "--n", "1"], 1),
    (["render", "--set", "disk(0,0,1/3)", "--box", "0,0,1,1", "--n", "1"], 1),
    (["render", "--set", "point(0,0)", "--box", "0,0,1", "--n", "1"], 1),
    (["render", "--set", "point(0,0)", "--box", "0,0,0,1", "--n", "1"], 2),
    (["render", "--set", "affine(point(0,0),3,0,0,3,0,0)", "--box", "0,0,1,1", "--n", "1"], 2),
    (["eval", "--expr", "div(1,x)", "--x", "0", "--n", "4"], 2),
    (["graph-eval", "--set", "stepgraph", "--x", "1/3", "--n", "4"], 1),
    (["graph-eval", "--set", "stepgraph", "--x", "3", "--n", "4"], 2),
    (["hausdorff", "/nonexistent/a.csv", "/nonexistent/b.csv"], 3),
    (["frobnicate"], 1),
    (["render"], 1),
])
def test_exit_codes(argv, code, capsys):
    assert run(*argv)[0] == code
    err = capsys.readouterr().err
    assert err.startswith("error:")


def test_errors_go_to_stderr_only(capsys):
    code, text = run("eval", "--expr", "sqrt(x)", "--x", "-1", "--n", "3")
    assert code == 2 and text == ""
    assert "error:" in capsys.readouterr().err


def test_printed_dyadics_reparse():
    code, text = run("weak", "--set", "disk(1/4,0,1/8)", "--box", "-1,-1,1,1", "--n", "3")
    assert code == 0
    for row in text.splitlines():
        for field in row.split(","):
            d = parse_dyadic(field)
            assert str(d) == field


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "compreal.cli", "hausdorff", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "usage" in proc.stdout


def test_render_to_stdout():
    proc = subprocess.run([sys.executable, "-m", "compreal.cli", "render", "--set", "point(0,0)",
                           "--box", "-1,-1,1,1", "--n", "1"], capture_output=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith(b"P1\n4 4\n") and proc.stderr == b""
