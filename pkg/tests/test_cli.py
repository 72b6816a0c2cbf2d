import io

import pytest

from biobeta.cli import main


def run(*argv, stdin=None):
    out = io.StringIO()
    if stdin is not None:
        import biobeta.cli as cli

        args = cli.build_parser().parse_args(list(argv))
        code = cli.cmd_repl(args, out, io.StringIO(stdin))
    else:
        code = main(list(argv), out)
    return code, out.getvalue()


def test_check_main(corpus_file):
    code, out = run("check", corpus_file, "--system", "Main")
    assert code == 0
    assert "verdict: well-formed" in out and "tau: {}" in out and "gamma1: \n" in out


def test_check_ill_formed(tmp_path):
    f = tmp_path / "t.biot"
    f.write_text("A(1!x) * [0](B(1!x))")
    code, out = run("check", str(f))
    assert code == 1 and "impermeability: fail" in out


def test_check_membrane_term(tmp_path):
    f = tmp_path / "m.biot"
    f.write_text("f'(x), M(1v)")
    code, out = run("check", str(f))
    assert code == 0 and "gamma1: x" in out


def test_validate(corpus_file):
    code, out = run("validate", corpus_file)
    assert code == 0 and "10 rules ok, 2 pinch ok, 2 fuse ok" in out


def test_validate_rejects(tmp_path):
    f = tmp_path / "bad.biob"
    f.write_text("signature { polar A: 1; polar B: 1; }\n"
                 "rule r mono: < A(1v) * B(1v) | > -> new z. < A(1!z) * B(1v) | >;\n")
    code, out = run("validate", str(f))
    assert code == 1 and "[rule r]" in out


def test_parse_and_io_failures(tmp_path):
    f = tmp_path / "bad.biob"
    f.write_text("signature { polar A: 1 }\nsystem S = A(1v);")
    assert run("validate", str(f))[0] == 2
    assert run("check", str(tmp_path / "missing.biob"))[0] == 2
    assert run("enumerate", str(f))[0] == 2


def test_enumerate(corpus_file):
    code, out = run("enumerate", corpus_file, "--system", "Main")
    assert code == 0
    assert out.splitlines()[1:] == ["[0] rec0@/c0", "[1] rec1@/c0", "[2] snare0@/", "[3] snare1@/"]


def test_run_writes_trace(corpus_file, tmp_path):
    f = tmp_path / "trace.txt"
    code, out = run("run", corpus_file, "--strategy", "random", "--seed", "42", "--out", str(f))
    assert code == 0 and f.read_text().startswith("#0 init\n")


def test_run_seed_determinism(corpus_file):
    a = run("run", corpus_file, "--strategy", "random", "--seed", "42")[1]
    b = run("run", corpus_file, "--strategy", "random", "--seed", "42")[1]
    assert a == b and a.count("\n#") > 5


def test_reach_cargo(corpus_file):
    code, out = run("reach", corpus_file, "--system", "Main", "--depth", "12",
                    "--pattern", "cargo-in-target(C0, tSn0m)")
    assert code == 0 and "reachable at depth" in out and "#0 init" in out


def test_reach_failures(corpus_file):
    assert run("reach", corpus_file, "--depth", "1", "--pattern", "cargo-in-target(C0, tSn0m)")[0] == 1
    assert run("reach", corpus_file, "--pattern", "nonsense(")[0] == 2
    code, out = run("reach", corpus_file, "--depth", "8", "--state-cap", "10",
                    "--pattern", "cargo-in-target(C0, tSn0m)")
    assert code == 1 and "state cap" in out


def test_translate(corpus_file):
    code, out = run("translate", corpus_file, "--system", "Targ0")
    assert code == 0 and out.strip() == "Targ0: tSn0c(1v,2!d0) , tSn0m(1!d0,2!e0) , tSn0e(1!e0)"


def test_repl(corpus_file):
    code, out = run("repl", corpus_file, "--system", "Main", stdin="x\n7\n2\nq\n")
    assert code == 0
    assert "enter an ordinal" in out and "out of range" in out and "snare0@/" in out


def test_unknown_system(corpus_file):
    assert run("enumerate", corpus_file, "--system", "Nope")[0] == 2
