import json

import pytest
from click.testing import CliRunner

from bisidon.cli import main


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)

    return invoke


def write(name, text):
    with open(name, "w") as fh:
        fh.write(text)
    return name


def test_gen_kinds(run):
    r = run("gen", "--kind", "geometric", "--n", 3, "--gamma", "2")
    assert r.exit_code == 0
    assert [l for l in r.output.splitlines() if not l.startswith("#")] == ["2", "4", "8"]
    assert run("gen", "--kind", "pds", "--p", 2, "-o", "pds.txt").exit_code == 0
    assert open("pds.txt").read().splitlines()[1:] == ["1", "2", "4"]
    r1 = run("gen", "--kind", "random", "--n", 20, "--seed", 5)
    r2 = run("gen", "--kind", "random", "--n", 20, "--seed", 5)
    assert r1.output == r2.output


@pytest.mark.parametrize("args", [["--kind", "geometric", "--n", 3, "--gamma", "1"], ["--kind", "pds"],
                                  ["--kind", "interval"], ["--kind", "pds", "--p", 12]])
def test_gen_invalid(run, args):
    assert run("gen", *args).exit_code == 2


def test_energy(run):
    write("a.txt", "# three\n1\n2\n3\n")
    r = run("energy", "--input", "a.txt", "--oracle")
    assert r.exit_code == 0
    assert json.loads(r.output) == {"n": 3, "additive_energy": 19, "multiplicative_energy": 15, "oracle_agrees": True}


def test_energy_oracle_cap_is_precondition(run):
    write("big.txt", "\n".join(str(i) for i in range(1, 40)))
    assert run("energy", "--input", "big.txt").exit_code == 0
    assert run("energy", "--input", "big.txt", "--oracle").exit_code == 3


def test_invalid_inputs(run):
    write("dup.txt", "1\n2\n2\n")
    write("bad.txt", "1\nfoo\n")
    write("zero.txt", "0\n1\n")
    for f in ("dup.txt", "bad.txt", "missing.txt"):
        assert run("energy", "--input", f).exit_code == 2
    assert run("energy", "--input", "zero.txt").exit_code == 2
    assert run("verify", "--input", "zero.txt").exit_code == 2


def test_verify(run):
    write("s.txt", "1\n2\n5\n7\n")
    out = json.loads(run("verify", "--input", "s.txt").output)
    assert out == {"additive_sidon": True, "multiplicative_sidon": True, "bi_sidon": True, "witness": None}
    write("m.txt", "2\n3\n4\n6\n")
    out = json.loads(run("verify", "--input", "m.txt").output)
    assert out["additive_sidon"] is False and out["bi_sidon"] is False
    assert out["witness"]["operation"] == "sum"
    write("g.txt", "2\n4\n8\n")
    out = json.loads(run("verify", "--input", "g.txt").output)
    assert out["witness"] == {"operation": "product", "kind": "E1", "elements": ["2", "8", "4", "4"]}


def test_extract_json_deterministic(run):
    write("a.txt", "\n".join(str(i) for i in range(1, 300)))
    args = ["extract", "--input", "a.txt", "--trials", 4, "--seed", 9, "--json", "--no-timing"]
    a = run(*args)
    b = run(*args, "--workers", 2)
    assert a.exit_code == 0 and a.output == b.output
    out = json.loads(a.output)
    assert set(out) == {"subset", "trace"}
    assert out["trace"]["size_S"] == len(out["subset"]) and out["trace"]["wall_ms"] == 0.0


def test_extract_plain_output_and_options(run):
    write("a.txt", "\n".join(str(-i) for i in range(1, 100)))
    r = run("extract", "--input", "a.txt", "--trials", 2, "--branch", "mul-first", "--q", "1/2", "--p", 101, "--no-adaptive")
    assert r.exit_code == 0
    assert all(int(x) < 0 for x in r.output.split())


def test_extract_errors(run):
    write("a.txt", "\n".join(str(i) for i in range(1, 300)))
    assert run("extract", "--input", "a.txt", "--p", 9).exit_code == 2
    assert run("extract", "--input", "a.txt", "--d", 3).exit_code == 2
    assert run("extract", "--input", "a.txt", "--c", "0").exit_code == 2
    assert run("extract", "--input", "a.txt", "--c", "x/y").exit_code == 2
    # 299 elements do not fit below p^2 / 32 for p = 11
    assert run("extract", "--input", "a.txt", "--p", 11).exit_code == 3


def test_oracle(run):
    write("a.txt", "1\n2\n3\n")
    assert json.loads(run("oracle", "--input", "a.txt").output) == {"max_size": 2, "subset": ["1", "2"]}
    write("b.txt", "\n".join(str(i) for i in range(1, 30)))
    assert run("oracle", "--input", "b.txt").exit_code == 3
    assert run("oracle", "--input", "b.txt", "--limit", 10).exit_code == 3


def test_parabola(run):
    out = json.loads(run("parabola", "--p", 5, "--exact").output)
    assert out["probability"] == "1/200"
    r = run("parabola", "--p", 5, "--mc", "--trials", 200000, "--points", "0,0;1,0;0,1", "--seed", 1)
    out = json.loads(r.output)
    assert abs(out["estimate"] - 0.005) <= 3 * out["stderr"]
    assert run("parabola", "--p", 4, "--exact").exit_code == 2
    assert run("parabola", "--p", 5).exit_code == 2
    assert run("parabola", "--p", 5, "--mc", "--points", "0,0;0,0").exit_code == 2
    assert run("parabola", "--p", 5, "--mc", "--points", "0;1").exit_code == 2


def test_experiment_scaling(run):
    args = ["experiment", "scaling", "--kind", "interval", "--nmin", 32, "--nmax", 128, "--trials", 2,
            "--extract-trials", 2, "--seed", 3, "--no-timing"]
    a = run(*args, "-o", "a.csv")
    b = run(*args, "--workers", 2, "-o", "b.csv")
    assert a.exit_code == 0 and b.exit_code == 0
    assert open("a.csv").read() == open("b.csv").read()
    lines = open("a.csv").read().splitlines()
    assert lines[0] == "kind,N,trial,seed,branch,p,size_A2,size_B,size_Btilde,size_S,wall_ms"
    assert len(lines) == 1 + 3 * 2
    assert run("experiment", "scaling", "--kind", "interval", "--nmin", 8, "--nmax", 4, "-o", "c.csv").exit_code == 2
