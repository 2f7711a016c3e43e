import json
import subprocess
import sys

import pytest

from roecoarse.cli import main
from roecoarse.formats import read

from conftest import FIXTURES

F = {p.stem + p.suffix: str(p) for p in FIXTURES.iterdir()}


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    report = json.loads(out)
    expected = {0: "pass", 1: "fail", 2: "error"}[code]
    assert report["status"] == expected
    assert (report["witnesses"] == []) == (code == 0)
    return code, report


CASES = [
    # (argv, exit code)
    (["check-metric", F["line6.emx"]], 0),
    (["check-metric", F["bad_triangle.emx"]], 1),
    (["check-metric", F["malformed.emx"]], 2),
    (["check-metric", F["triple_d1.emx"], "--base", F["triple_d0.emx"]], 0),
    (["check-metric", F["triple_d0.emx"], "--base", F["triple_far.emx"]], 1),
    (["join", "--base", F["triple_d0.emx"], F["triple_d1.emx"], F["triple_d2.emx"]], 0),
    (["join", "--base", F["triple_far.emx"], F["triple_d1.emx"], F["triple_d2.emx"]], 1),
    (["join", "--base", F["line6.emx"], F["triple_d1.emx"], F["triple_d2.emx"]], 2),
    (["restrict", "--base", F["line6.emx"], "--subset", "0,1,3"], 0),
    (["restrict", "--base", F["line6.emx"], "--subset", "0,9"], 2),
    (["propagation", F["path_op.smx"], "--metric", F["triple_d0.emx"]], 0),
    (["propagation", F["path_op.smx"], "--metric", F["triple_d0.emx"], "--max", "0.5"], 1),
    (["propagation", F["path_op.smx"], "--metric", F["line6.emx"]], 2),
    (["certify", F["path_op.smx"], "--base", F["triple_d0.emx"]], 0),
    (["certify", F["far_op.smx"], "--base", F["triple_far.emx"]], 1),
    (["support-metric", F["line_tridiag.smx"], "--base", F["line6.emx"], "--S", "1"], 0),
    (["decompose", F["dense2.smx"]], 0),
    (["decompose", F["dense2.smx"], "--max-terms", "1"], 1),
    (["norm", F["dense2.smx"]], 0),
    (["norm", F["line_tridiag.smx"], "--max-iter", "1"], 1),
    (["norm", str(FIXTURES / "missing.smx")], 2),
    (["net", F["line6.emx"], "--l", "2"], 0),
    (["net", F["line6.emx"], "--l", "0.5", "--max-growth", "2", "--radius", "1"], 1),
    (["net", F["line6.emx"], "--l", "0"], 2),
    (["clusters", F["cliques4.emx"], "--R", "1"], 0),
    (["clusters", F["cliques4.emx"], "--R", "1", "--min-length", "5"], 1),
    (["hr-check", F["line_ball_S2.hrf"], "--metric", F["line6.emx"], "--R", "1", "--eps", "1"], 0),
    (["hr-check", F["line_delta.hrf"], "--metric", F["line6.emx"], "--R", "1", "--eps", "1"], 1),
    (["hr-check", F["line_ball_S2.hrf"], "--metric", F["line6.emx"], "--R", "1", "--eps", "1", "--S", "1"], 1),
    (["gram", F["line_ball_S2.hrf"]], 0),
    (["gram", F["bad_norm.hrf"]], 1),
    (["schur", F["line_uniform.hrf"], F["line_tridiag.smx"]], 0),
    (["schur", F["line_uniform.hrf"], F["dense2.smx"]], 2),
    (["cp-decompose", F["line_ball_S2.hrf"], "--metric", F["line6.emx"], "--S", "2",
      "--propagation", "1", "--test", F["line_tridiag.smx"]], 0),
    (["cp-decompose", F["line_ball_S2.hrf"], "--metric", F["line6.emx"], "--S", "1"], 1),
    (["converge", F["line6.emx"], F["line_tridiag.smx"], "--stage", "1", "1.5", F["line_ball_S2.hrf"],
      "--stage", "1", "1e-9", "uniform"], 0),
    (["converge", F["line6.emx"], F["line_tridiag.smx"], "--stage", "1", "0.5", F["line_delta.hrf"]], 1),
    (["coarse-check", F["clique5.emx"], F["point.emx"], F["clique5_to_point.map"], "--surjective"], 0),
    (["coarse-check", F["two_far.emx"], F["two_near.emx"], F["far_to_near.map"]], 1),
    (["coarse-check", F["fiber_X.emx"], F["fiber_Y.emx"], F["fiber.map"], "--bg-radius", "2"], 0),
    (["morita", F["fiber_X.emx"], F["fiber_Y.emx"], F["fiber.map"], "--J", "2", "--op", F["fiber_window.smx"]], 0),
    (["morita", F["fiber_X.emx"], F["fiber_Y.emx"], F["fiber.map"], "--J", "2", "--op", F["fiber_window.smx"],
      "--out-window", "2"], 1),
    (["morita", F["fiber_X.emx"], F["fiber_Y.emx"], F["line6.emx"]], 2),
    (["block-embed", "--group", "sym:3", "--block", "regular", "r0,r1,r2,r3,r4,r5", "--element", "102"], 0),
    (["block-embed", "--group", "sym:3", "--block", "regular", "r0,r1,r2,r3,r4,r5",
      "--block", "coset=012+102", "q0,q1,q2", "--element", "120"], 0),
    (["block-embed", "--group", "sym:9", "--block", "regular", "a", "--element", "0"], 2),
    (["bogus"], 2),
    (["norm"], 2),
]


@pytest.mark.parametrize("argv,code", CASES, ids=[" ".join(a[:1]) + f"->{c}" for a, c in CASES])
def test_exit_codes(capsys, argv, code):
    got, report = cli(capsys, *argv)
    assert got == code, report


def test_every_subcommand_covered():
    from roecoarse.cli import build_parser
    sub = next(a for a in build_parser()._actions if a.dest == "command")
    assert set(sub.choices) == {a[0] for a, _ in CASES} - {"bogus"}


def test_usage_error_on_stderr(capsys):
    assert main(["join"]) == 2
    captured = capsys.readouterr()
    assert "usage:" in captured.err
    assert json.loads(captured.out)["witnesses"][0]["rule"] == "usage"


def test_clusters_report(capsys):
    _, rep = cli(capsys, "clusters", F["cliques4.emx"], "--R", "1")
    assert rep["data"]["sizes"] == [1, 2, 3, 4]


def test_hr_check_values(capsys):
    _, rep = cli(capsys, "hr-check", F["line_delta.hrf"], "--metric", F["line6.emx"], "--R", "1", "--eps", "2")
    assert rep["data"]["eps_star"] == pytest.approx(2 ** 0.5) and rep["data"]["S_star"] == 0


def test_infinity_encoding(capsys):
    _, rep = cli(capsys, "coarse-check", F["two_far.emx"], F["two_near.emx"], F["far_to_near.map"])
    assert "inf" in rep["data"]["g_profile"].values()


def test_join_output_round_trip(capsys, tmp_path):
    out = tmp_path / "j.emx"
    cli(capsys, "join", "--base", F["triple_d0.emx"], F["triple_d1.emx"], F["triple_d2.emx"], "-o", out)
    j = read(out)
    assert (j("a", "b"), j("b", "c"), j("a", "c")) == (1, 1, 2)
    code, _ = cli(capsys, "check-metric", out, "--base", F["triple_d0.emx"])
    assert code == 0


def test_morita_output(capsys, tmp_path):
    out = tmp_path / "m.smx"
    cli(capsys, "morita", F["fiber_X.emx"], F["fiber_Y.emx"], F["fiber.map"], "--J", "2",
        "--op", F["fiber_window.smx"], "-o", out)
    T = read(out)
    assert dict(T.items()) == {("y@0", "y@1"): 1, ("z@1", "y@2"): 2 - 1j}


def test_decompose_outputs(capsys, tmp_path):
    stem = tmp_path / "t"
    _, rep = cli(capsys, "decompose", F["dense2.smx"], "-o", stem)
    terms = [read(p) for p in rep["outputs"]]
    assert len(terms) == 2
    total = terms[0] + terms[1]
    assert total == read(F["dense2.smx"])


def test_deterministic(capsys):
    argv = ["norm", F["complex_op.smx"], "--seed", "3"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_pretty(capsys):
    assert main(["norm", F["dense2.smx"], "--pretty"]) == 0
    out = capsys.readouterr().out
    assert "pass" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "roecoarse", "check-metric", F["line6.emx"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"
