import json
import math

import numpy as np
import pytest

import zerohold as z
import zerohold.cli as cli
from zerohold.errors import IterationError

from conftest import single_interior_spec

SUBCOMMANDS = [
    "analyze",
    "coin",
    "poisson",
    "renewal",
    "simulate",
    "condition",
    "tails",
    "diagnose-subexp",
]


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(z.emit_spec(single_interior_spec()), encoding="utf-8")
    return str(path)


def run(argv, capsys):
    rc = cli.main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_analyze_matches_solver(spec_file, capsys):
    rc, out, err = run(["analyze", spec_file], capsys)
    assert rc == 0
    doc = json.loads(out)
    sol = z.solve_phi(single_interior_spec())
    assert doc["classification"] == "recurrent"
    assert doc["regime"] == "alpha-positive"
    assert doc["phi"]["value"] == pytest.approx(sol.phi, abs=1e-12)
    assert doc["kappa"]["value"] == pytest.approx(sol.kappa, abs=1e-12)
    assert doc["alpha_c"]["value"] == pytest.approx(2.0, abs=1e-12)


def test_coin_json_and_table(capsys):
    rc, out, _ = run(["coin", "--p", "0.5", "--k", "2"], capsys)
    assert rc == 0
    doc = json.loads(out)
    assert doc["s_k"] == pytest.approx((1 + math.sqrt(5)) / 4, abs=1e-9)
    rc, out, _ = run(["coin", "--p", "0.5", "--k", "2", "--n", "4"], capsys)
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,exact,asymptote,rel_error"
    assert len(lines) == 6
    last = lines[-1].split(",")
    assert last[0] == "4"
    assert float(last[1]) == 0.5


def test_poisson_json(capsys):
    rc, out, _ = run(["poisson", "--r", "1"], capsys)
    assert rc == 0
    doc = json.loads(out)
    assert doc["phi_r"] == 1.0
    assert doc["c_r"] == 2.0


def test_renewal_csv_scaled(spec_file, capsys):
    rc, out, _ = run(
        ["renewal", spec_file, "--t-max", "2", "--dt", "0.02", "--scale-by-phi"], capsys
    )
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,s,scaled_s"
    assert len(lines) == 102
    sol = z.solve_phi(single_interior_spec())
    for row in (lines[1], lines[50], lines[-1]):
        tv, sv, cv = (float(x) for x in row.split(","))
        assert cv == pytest.approx(math.exp(sol.phi * tv) * sv, rel=1e-9)


def test_simulate_thread_count_is_cosmetic(spec_file, capsys):
    argv = [
        "simulate", spec_file, "--mode", "survival", "--n-paths", "400",
        "--horizon", "5", "--seed", "3", "--t-grid", "1,2,4",
    ]
    rc1, out1, _ = run(argv + ["--threads", "1"], capsys)
    rc4, out4, _ = run(argv + ["--threads", "4"], capsys)
    assert rc1 == rc4 == 0
    assert out1 == out4
    assert out1.splitlines()[0] == "t,estimate,stderr,n_paths,seed"


def test_simulate_byte_stable_rerun(spec_file, capsys):
    argv = [
        "simulate", spec_file, "--mode", "survival", "--n-paths", "300",
        "--horizon", "4", "--seed", "11",
    ]
    rc1, out1, _ = run(argv, capsys)
    rc2, out2, _ = run(argv, capsys)
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_condition_vague_reports_hazard(spec_file, capsys):
    rc, out, _ = run(["condition", spec_file, "--mode", "vague"], capsys)
    assert rc == 0
    doc = json.loads(out)
    assert doc["kind"] == "vague"
    assert doc["hazard"]["type"] == "theorem36"
    assert doc["honest"] is False


def test_condition_hlambda_requires_lam(spec_file, capsys):
    rc, out, err = run(["condition", spec_file, "--mode", "hlambda"], capsys)
    assert rc == 1
    assert out == ""
    doc = json.loads(err)
    assert doc["exit_code"] == 1


def test_malformed_spec_reports_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{this is not json", encoding="utf-8")
    rc, out, err = run(["analyze", str(bad)], capsys)
    assert rc == 1
    assert out == ""
    doc = json.loads(err)
    assert doc["error"] == "ParseError"
    assert doc["exit_code"] == 1


def test_numeric_failure_exits_two(spec_file, capsys, monkeypatch):
    def boom(spec):
        raise IterationError("solver stalled")

    monkeypatch.setattr(cli, "solve_phi", boom)
    rc, out, err = run(["analyze", spec_file], capsys)
    assert rc == 2
    doc = json.loads(err)
    assert doc["error"] == "IterationError"
    assert doc["exit_code"] == 2


def test_rejection_with_no_survivors_exits_three(spec_file, capsys):
    rc, out, err = run(
        [
            "simulate", spec_file, "--mode", "rejection", "--n-paths", "50",
            "--horizon", "30", "--seed", "1",
        ],
        capsys,
    )
    assert rc == 3
    doc = json.loads(err)
    assert doc["error"] == "InfeasibleError"
    assert doc["exit_code"] == 3


def test_every_subcommand_has_help(capsys):
    for name in SUBCOMMANDS:
        with pytest.raises(SystemExit) as exc:
            cli.main([name, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "--help" in out


def test_tails_csv(spec_file, capsys):
    rc, out, _ = run(
        [
            "tails", spec_file, "--i", "0:0.5", "--j", "0:0.5", "--v", "0",
            "--t", "4", "--n-paths", "800", "--seed", "2",
        ],
        capsys,
    )
    assert rc == 0
    lines = out.strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "ratio"
    row = lines[1].split(",")
    # common random numbers make the same-start ratio exactly one
    assert float(row[0]) == 1.0
