import io
import json

import pytest

from bookineq.cli import BUDGET, FAIL, OK, USAGE, run
from bookineq.core import polymatroid_from_json, validate_polymatroid


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_check(fixture_path, tmp_path):
    code, out, _ = call("check", fixture_path("U24.json"))
    assert code == OK and out.startswith("ok")
    bad = tmp_path / "bad.json"
    doc = json.loads(open(fixture_path("U24.json")).read())
    # push one rank above its supersets
    doc["rank"]["a"] = 5
    bad.write_text(json.dumps(doc))
    code, out, _ = call("check", str(bad))
    assert code == FAIL and "violated" in out


def test_ineq_gen_counts():
    code, out, _ = call("ineq", "gen", "--pages", "2")
    assert code == OK
    assert len(out.splitlines()) == 2
    code, out, _ = call("ineq", "gen", "--pages", "3", "--names")
    assert code == OK and out.count("# ") == len(out.splitlines()) // 2


def test_gen_then_eval(tmp_path, fixture_path):
    fam = tmp_path / "b3.txt"
    code, out, _ = call("ineq", "gen", "--pages", "3", "--swaps")
    fam.write_text(out)
    code, out, err = call("ineq", "eval", "--family", str(fam), "--poly", fixture_path("U24.json"))
    assert code == OK
    assert len(out.splitlines()) == len(fam.read_text().splitlines())
    code, out, err = call("ineq", "eval", "--family", str(fam), "--poly", fixture_path("V.json"))
    assert code == FAIL and "violated" in err
    assert any(line.startswith("-") for line in out.splitlines())


def test_deterministic_output():
    a = call("ineq", "gen", "--pages", "4", "--swaps", "--names")
    b = call("ineq", "gen", "--pages", "4", "--swaps", "--names")
    assert a == b
    assert call("sample", "--pages", "2", "--seed", "7") == call("sample", "--pages", "2", "--seed", "7")
    assert call("plot-data", "--pages", "5") == call("plot-data", "--pages", "5")


def test_extend_round_trip(tmp_path, fixture_path):
    for spine in ("a", "abc", "ab"):
        code, out, _ = call("extend", "--spine", spine, "--pages", "3", "--poly", fixture_path("U24.json"))
        assert code == OK, spine
        f = tmp_path / f"ext_{spine}.json"
        f.write_text(out)
        assert call("check", str(f))[0] == OK
    code, _, err = call("extend", "--spine", "ab", "--pages", "2", "--poly", fixture_path("V.json"))
    assert code == FAIL and "separating" in err


def test_feasible(fixture_path):
    code, out, _ = call("feasible", "--pages", "2", "--poly", fixture_path("U24.json"))
    assert code == OK and out.startswith("feasible")
    code, out, _ = call("feasible", "--pages", "2", "--poly", fixture_path("V.json"))
    assert code == FAIL
    assert "separating inequality" in out and "certificate:" in out


def test_sample_then_feasible(tmp_path):
    code, out, _ = call("sample", "--pages", "3", "--seed", "11")
    assert code == OK
    f = tmp_path / "s.json"
    f.write_text(out)
    g = polymatroid_from_json(out)
    assert validate_polymatroid(g).ok
    assert call("feasible", "--pages", "3", "--poly", str(f))[0] == OK


def test_project_two_pages():
    code, out, err = call("project", "--pages", "2")
    assert code == OK
    assert err.strip().endswith("facets")
    assert len(out.splitlines()) == int(err.split()[0])


def test_project_budget():
    code, out, err = call("project", "--pages", "3", "--budget", "0.5")
    assert code == BUDGET and "budget exceeded" in err


def test_verify_proof_and_cert(tmp_path):
    cert = tmp_path / "c.json"
    code, out, _ = call("verify-proof", "--pages", "3", "--cert-out", str(cert))
    assert code == OK and "all checks passed" in out
    code, out, _ = call("verify-cert", str(cert))
    assert code == OK and "FAILED" not in out
    doc = json.loads(cert.read_text())
    doc["certificates"][0]["multipliers"][0][2] = "12345"
    cert.write_text(json.dumps(doc))
    code, out, _ = call("verify-cert", str(cert))
    assert code == FAIL and "FAILED" in out


def test_verify_proof_single_ideal():
    code, out, _ = call("verify-proof", "--pages", "4", "--ideal", "0,0;1,0", "--audit")
    assert code == OK


def test_plot_data():
    code, out, _ = call("plot-data", "--pages", "4")
    lines = out.splitlines()
    assert code == OK and lines[0].startswith("ideal,") and len(lines) == 1 + 11


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["ineq"],
        ["ineq", "gen"],
        ["ineq", "gen", "--pages", "1"],
        ["check", "/nonexistent/file.json"],
        ["--jobs", "0", "ineq", "gen", "--pages", "2"],
        ["verify-proof", "--pages", "3", "--ideal", "nonsense"],
    ],
)
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == USAGE
    assert "usage" in err
