import csv
import json
import subprocess
import sys

import pytest

from echeur import cli


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as e:
        cli.run(["bogus"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        cli.run(["period"])
    assert e.value.code == 1
    assert cli.run(["period", "--curve", "1,2,3"]) == 1
    assert cli.run(["profile", "--scan", "pos", "--n", "0"]) == 1


def test_io_error_exit_3(tmp_path):
    assert cli.run(["mwlattice", "--in", str(tmp_path / "missing.csv")]) == 3


def test_numeric_error_exit_2(tmp_path, capsys):
    assert cli.run(["period", "--curve", "0,0,0,0,0"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,1\n")
    assert cli.run(["mwlattice", "--in", str(bad)]) == 2


def test_enumerate_report_and_curves(tmp_path, capsys):
    out = tmp_path / "curves.csv"
    rep = tmp_path / "rep.json"
    assert cli.run(["enumerate", "--x", "1e3", "--emit-curves", str(out), "--report", str(rep),
                    "--stats-prime", "5"]) == 0
    d = json.loads(rep.read_text())
    rows = list(csv.DictReader(out.open()))
    assert d["count_pos"]["value"] + d["count_neg"]["value"] == len(rows)
    assert d["count_pos"]["provenance"] == "enumeration"
    assert d["predicted_pos"]["provenance"] == "closed-form"
    assert set(rows[0]) == {"c4", "c6", "delta", "sign"}
    for r in rows:
        c4, c6, delta = int(r["c4"]), int(r["c6"]), int(r["delta"])
        assert c4**3 - c6**2 == 1728 * delta
        assert int(r["sign"]) == (1 if delta > 0 else -1)


def test_enumerate_threads_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("EC_HEUR_THREADS", "3")
    assert cli.run(["enumerate", "--x", "2000"]) == 0
    a = _json(capsys)
    monkeypatch.delenv("EC_HEUR_THREADS")
    assert cli.run(["enumerate", "--x", "2000"]) == 0
    b = _json(capsys)
    assert a["count_neg"] == b["count_neg"]
    monkeypatch.setenv("EC_HEUR_THREADS", "many")
    assert cli.run(["enumerate", "--x", "2000"]) == 1


def test_enumerate_warns_on_huge_bound(monkeypatch, caplog):
    import echeur.enumeration as en
    monkeypatch.setattr(en, "count_by_discriminant", lambda X, *a, **k: en.EnumerationReport(X, c4_max=1))
    with caplog.at_level("WARNING"):
        assert cli.run(["enumerate", "--x", "2e9"]) == 0
    assert "large" in caplog.text


def test_constants(capsys):
    assert cli.run(["constants"]) == 0
    d = _json(capsys)
    assert d["admissible_classes"]["value"] == 288
    assert d["alpha_minus"]["value"] / d["alpha_plus"]["value"] == pytest.approx(3**0.5)
    assert d["w_integral_pos"]["provenance"] == "quadrature"


def test_localprobs_json_and_csv(capsys):
    assert cli.run(["localprobs", "--p", "7", "--kmax", "12"]) == 0
    d = _json(capsys)
    assert d["completeness"] == "1"
    assert d["table"][1]["P_m"]["exact"] == str(cli.local.prob_m(7, 1))
    assert cli.run(["localprobs", "--p", "5", "--kmax", "3", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("k,P_m")
    assert any(line.startswith("completeness,1") for line in lines)
    assert cli.run(["localprobs", "--p", "3"]) == 2


def test_ratio_dist(capsys):
    assert cli.run(["ratio-dist", "--qmax", "50"]) == 0
    d = _json(capsys)
    assert d["rows"][0]["q"] == 1
    assert 0 < d["partial_sum"]["value"] < 1
    assert cli.run(["ratio-dist", "--qmax", "30", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("q,f_hat_rational")


def test_period_and_rmt(capsys):
    assert cli.run(["period", "--curve", "0,-1,1,0,0"]) == 0
    d = _json(capsys)
    assert d["omega_re"]["value"] == pytest.approx(6.346046521397768)
    assert d["omega_re_quadrature"]["provenance"] == "quadrature"
    assert cli.run(["period", "--curve", "[0,0,1,-1,0]"]) == 0
    assert "t" in _json(capsys)
    assert cli.run(["rmt", "--curve", "0,-1,1,0,0", "--pmax", "100"]) == 0
    d = _json(capsys)
    assert [f["a_p"] for f in d["local_factors"][:6]] == [-2, -1, 1, -2, 1, 4]
    assert d["alpha_A"]["truncation"] == "p <= 100"


def test_profile_and_scan(tmp_path, capsys):
    out = tmp_path / "prof.csv"
    assert cli.run(["profile", "--scan", "neg", "--n", "20", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["C", "c", "profile"] and len(rows) == 21
    assert cli.run(["rmt-scan", "--x", "1e12", "--steps", "3"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert len(rows) == 4
    assert all(abs(float(r[-1])) < 0.01 for r in rows[1:])


def test_mwlattice_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.run(["mwlattice", "--haar-sample", "1000", "--seed", "4", "--out", str(a)]) == 0
    s1 = capsys.readouterr().out
    assert cli.run(["mwlattice", "--haar-sample", "1000", "--seed", "4", "--out", str(b)]) == 0
    s2 = capsys.readouterr().out
    assert a.read_bytes() == b.read_bytes() and s1 == s2
    assert json.loads(s1)["bins"][0]["fraction"]["provenance"] == "monte-carlo"


def test_mwlattice_ingest(tmp_path, capsys):
    f = tmp_path / "g.csv"
    f.write_text("g11,g12,g22\n1,0,1\n2,1,2\n3,1,4\n1,5,1\n")
    assert cli.run(["mwlattice", "--in", str(f), "--bins", "5"]) == 2
    capsys.readouterr()
    assert cli.run(["mwlattice", "--in", str(f), "--bins", "5", "--skip-bad"]) == 0
    d = _json(capsys)
    assert d["n"] == 3
    assert cli.run(["mwlattice"]) == 1


def test_validate_quick(capsys):
    assert cli.run(["validate", "--quick"]) == 0
    assert "PASS" in capsys.readouterr().err


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "echeur.cli", "validate", "--quick"], capture_output=True, text=True)
    assert r.returncode == 0
