import json
import subprocess
import sys

import pytest

from dynlang.cli import TIER_PROP, TIER_SIGMA1PLUS, TIER_SIGMA2, classify, main
from dynlang.fixtures import _WRONG_PROP


def run_cli(*argv, stdin=None):
    return subprocess.run([sys.executable, "-m", "dynlang", *argv], input=stdin,
                          capture_output=True, text=True)


@pytest.mark.parametrize("src,alpha,tier", [
    ("(aa)*", None, TIER_PROP),
    ("(a+b)*a(a+b)*", None, TIER_SIGMA1PLUS),
    ("(ab)*", None, TIER_SIGMA2),
    ("b*", "a,b", TIER_SIGMA2),
])
def test_classify_tiers(src, alpha, tier):
    assert classify(src, alpha.split(",") if alpha else None).tier == tier


def test_classify_json_and_text(capsys):
    assert main(["classify", "(ab)*", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["monoid_size"] == 6 and data["group"] is False and data["tier"] == TIER_SIGMA2
    assert main(["classify", "(aa)*"]) == 0
    out = capsys.readouterr().out
    assert "Z2" in out and TIER_PROP in out


@pytest.mark.parametrize("argv", [
    [],
    ["classify"],
    ["classify", "(a+"],
    ["build", "--builder", "sigma2"],
    ["build", "--builder", "monomial", "--fixture", "nope"],
    ["run", "/nonexistent/program.dyn"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_build_run_verify_round_trip(tmp_path):
    prog, orc = tmp_path / "p.dyn", tmp_path / "p.dfa"
    r = run_cli("build", "--regex", "(a+b)*aa(a+b)*", "--out", str(prog), "--oracle-out", str(orc))
    assert r.returncode == 0, r.stderr
    r = run_cli("verify", str(prog), "--oracle", str(orc), "--n", "8", "--steps", "40",
                "--trials", "5")
    assert r.returncode == 0, r.stdout
    script = "set a 1\nset a 2\nset b 1\n"
    r1 = run_cli("run", str(prog), "--n", "4", stdin=script)
    r2 = run_cli("run", str(prog), "--n", "4", stdin=script)
    assert r1.returncode == 0 and r1.stdout == r2.stdout == "bit 0\nbit 1\nbit 0\n"


def test_transformed_build_verifies(tmp_path):
    prog, orc = tmp_path / "q.dyn", tmp_path / "q.dfa"
    r = run_cli("build", "--builder", "group", "--regex", "(aa)*", "--inverse", "c=aa d=a",
                "--out", str(prog), "--oracle-out", str(orc))
    assert r.returncode == 0, r.stderr
    r = run_cli("verify", str(prog), "--oracle", str(orc), "--n", "8", "--steps", "40",
                "--trials", "5")
    assert r.returncode == 0, r.stdout


def test_wrong_program_fails_verify_and_adversary(tmp_path):
    prog = tmp_path / "odd.dyn"
    prog.write_text(_WRONG_PROP["odd-a"])
    lang = ["--regex", "(a+b)*a(a+b)*", "--alphabet", "a,b"]
    r = run_cli("verify", str(prog), *lang, "--n", "8", "--steps", "40", "--trials", "5")
    assert r.returncode == 1
    wit = tmp_path / "w.txt"
    r = run_cli("adversary", str(prog), *lang, "--pump", "a", "--kill", "b", "--out", str(wit))
    assert r.returncode == 1 and "replays: yes" in r.stdout
    r = run_cli("replay", str(prog), str(wit))
    assert r.returncode == 1 and "program refuted" in r.stdout


def test_adversary_against_correct_program_exits_0(tmp_path):
    prog = tmp_path / "z2.dyn"
    assert run_cli("build", "--builder", "group", "--regex", "(aa)*",
                   "--out", str(prog)).returncode == 0
    r = run_cli("adversary", str(prog), "--regex", "(aa)*", "--pump", "a", "--kill", "a")
    assert r.returncode == 0 and "no witness" in r.stdout
