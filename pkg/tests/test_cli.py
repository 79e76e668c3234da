import json
import subprocess
import sys

import pytest

from distpref.cli import EXIT_INPUT, EXIT_OK, EXIT_VIOLATIONS, SUITES, main, run_command
from distpref.instance import load_instance
from distpref.mechanism import axiomatic_matchings


def run(*argv):
    return run_command(list(argv))


def test_choose_golden():
    code, rep = run("choose", "--instance", "floors_ceilings_s5")
    assert code == EXIT_OK
    assert rep["chosen"] == ["s1", "s4", "s5"]
    code, rep = run("choose", "--instance", "floors_ceilings_s5", "--pool", "s1,s2,s3,s4")
    assert rep["chosen"] == ["s1", "s2", "s3"]
    code, rep = run("choose", "--instance", "floors_ceilings_s5_soft", "--pool", "s1,s2,s4")
    assert rep["chosen"] == ["s1", "s2", "s4"]


def test_frontier_and_compare():
    code, rep = run("frontier", "--instance", "floors_ceilings_s5", "--pool", "s1,s2,s4,s5")
    assert rep["members"] == [["s1", "s4", "s5"], ["s2", "s4", "s5"]]
    code, rep = run("compare", "--instance", "floors_ceilings_s5", "s1,s4,s5", "s1,s2,s3")
    assert rep["comparison"] == "strictly_better"
    code, rep = run("compare", "--instance", "floors_ceilings_s5", "s1,s2,s3", "s1,s4,s5")
    assert rep["comparison"] == "strictly_worse"


def test_path_independence_witness():
    code, rep = run("verify", "path-independence", "--instance", "floors_ceilings_s5")
    assert code == EXIT_VIOLATIONS and rep["status"] == "fail"
    sub = next(ch for ch in rep["checks"] if ch["name"] == "substitutability")
    assert {"menu": ["s1", "s2", "s3", "s4", "s5"], "student": "s4", "removed": "s5"} in sub["witnesses"]
    cons = next(ch for ch in rep["checks"] if ch["name"] == "consistency")
    assert cons["status"] == "pass"


def test_da_matches_brute_force():
    code, rep = run("da", "--instance", "micro_additive_2x4")
    assert code == EXIT_OK
    market = load_instance("micro_additive_2x4").market()
    (mu,) = axiomatic_matchings(market)
    labels = [c.name if c is not None else None for c in (market.schools[a] if a is not None else None
                                                           for a in mu.assignment)]
    assert list(rep["matching"].values()) == labels


def test_da_trace():
    code, rep = run("da", "--instance", "micro_reserves_3x5", "--trace")
    assert code == EXIT_OK
    assert len(rep["rounds"]) >= 1


@pytest.mark.parametrize("suite", SUITES)
def test_every_suite_runs(suite):
    inst = "micro_reserves_3x5"
    code, rep = run("verify", suite, "--instance", inst)
    assert rep["suite"] == suite
    assert code in (EXIT_OK, EXIT_VIOLATIONS)
    assert rep["checks"]


def test_certified_market_passes_matching_suites():
    for suite in ("matching-axioms", "strategy-proofness", "structural-properties"):
        code, rep = run("verify", suite, "--instance", "micro_reserves_3x5")
        assert code == EXIT_OK, suite


def test_boston_is_flagged():
    code, rep = run("verify", "strategy-proofness", "--instance", "micro_boston_2x3",
                    "--mechanism", "immediate-acceptance")
    assert code == EXIT_VIOLATIONS
    w = rep["checks"][0]["witnesses"][0]
    assert w == {"student": "s1", "report": ["c1"], "truthful": None, "deviation": "c1"}


def test_reveal_round_trip():
    code, rep = run("reveal", "--instance", "floors_ceilings_s5")
    assert code == EXIT_OK
    assert rep["ranking"] == ["s1", "s2", "s3", "s4", "s5"] and rep["round_trip"] == "pass"


def test_reveal_cycle(tmp_path):
    p = tmp_path / "table.json"
    p.write_text(json.dumps({"capacity": 1, "table": [
        {"menu": ["s1", "s2"], "chosen": ["s1"]},
        {"menu": ["s1", "s2", "s3"], "chosen": ["s2"]},
    ]}))
    code, rep = run("reveal", "--instance", "floors_ceilings_s5", "--table", str(p))
    assert code == EXIT_VIOLATIONS
    assert sorted(rep["cycle"]["students"]) == ["s1", "s2"]


@pytest.mark.parametrize("argv", [
    ("da", "--instance", "no_such_instance"),
    ("choose", "--instance", "floors_ceilings_s5", "--pool", "s1,s9"),
    ("choose", "--instance", "micro_additive_2x4"),
    ("verify", "choice-axioms", "--instance", "floors_ceilings_s5", "--max-subsets", "4"),
    ("reveal", "--instance", "floors_ceilings_s5", "--table", "/nonexistent/table.json"),
])
def test_input_errors(argv):
    code, rep = run(*argv)
    assert code == EXIT_INPUT
    assert rep["error"]["messages"]


def test_invalid_instance_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"schema_version": 1, "students": [], "schools": []}))
    code, rep = run("choose", "--instance", str(p))
    assert code == EXIT_INPUT
    assert rep["error"]["kind"] == "DomainError"


def test_da_needs_student_preferences(tmp_path):
    p = tmp_path / "noprefs.json"
    p.write_text(json.dumps({"schema_version": 1, "students": ["a", "b"],
                             "schools": [{"id": "c", "capacity": 1, "preference": {"family": "indifferent"}}]}))
    code, rep = run("da", "--instance", str(p))
    assert code == EXIT_INPUT
    assert "student_preferences" in rep["error"]["messages"][0]


def test_main_streams(capsys):
    assert main(["choose", "--instance", "floors_ceilings_s5", "--format", "text"]) == EXIT_OK
    out = capsys.readouterr().out
    assert 'chosen: ["s1", "s4", "s5"]' in out
    assert main(["da", "--instance", "no_such_instance"]) == EXIT_INPUT
    err = capsys.readouterr()
    assert err.out == "" and "no_such_instance" in err.err


def test_timing_is_opt_in():
    _, rep = run("choose", "--instance", "floors_ceilings_s5")
    assert "timing" not in rep
    _, rep = run("choose", "--instance", "floors_ceilings_s5", "--timing")
    assert rep["timing"]["seconds"] >= 0


def test_output_is_byte_identical_across_runs():
    argv = [sys.executable, "-m", "distpref.cli", "verify", "path-independence",
            "--instance", "floors_ceilings_s5"]
    a = subprocess.run(argv, capture_output=True)
    b = subprocess.run(argv, capture_output=True)
    assert a.returncode == b.returncode == EXIT_VIOLATIONS
    assert a.stdout == b.stdout and a.stdout
