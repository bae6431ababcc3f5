import json
import re

import numpy as np
import pytest

import qregion as qr
from qregion.cli import run_command
from qregion.hrep import export_h_representation, parse_h_representation
from qregion.region import RegionConstants, nonempty_subsets

from helpers import ghz_state

GHZ_TEXT = "{family: ghz, labels: [A1, A2, R], dims: [2, 2, 2], reference: R}\n"
BELL_SENDERS_TEXT = ("{family: bell, labels: [A1, A2, R], dims: [2, 2, 1], "
                     "pair: [A1, A2], reference: R}\n")


@pytest.fixture
def ghz_spec_file(tmp_path):
    path = tmp_path / "ghz.spec"
    path.write_text(GHZ_TEXT)
    return path


def _strip_timestamp(text: str) -> str:
    return re.sub(r'"generated_at": "[^"]*"', '"generated_at": null', text)


def test_hrep_export_ghz_rows():
    rc = qr.region_constants(ghz_state(), "R")
    lines = export_h_representation(rc).splitlines()
    begin, end = lines.index("begin"), lines.index("end")
    assert lines[begin + 1].split() == ["3", "3", "real"]
    values = [[float(x) for x in line.split()]
              for line in lines[begin + 2:end]]
    assert np.allclose(values, [[-0.5, 1, 0], [-0.5, 0, 1], [-1.5, 1, 1]],
                       atol=1e-8)


def test_hrep_round_trip():
    rc = qr.region_constants(ghz_state(), "R")
    back = parse_h_representation(export_h_representation(rc))
    assert back.senders == rc.senders
    assert back.reference == rc.reference
    for subset in nonempty_subsets(rc.senders):
        assert abs(back.value(subset) - rc.value(subset)) <= 1e-12


def test_hrep_zero_constants():
    senders = ("A1", "A2")
    rc = RegionConstants(senders, "R",
                         {s: 0.0 for s in nonempty_subsets(senders)})
    text = export_h_representation(rc)
    for line in text.splitlines():
        if line.startswith(" ") and len(line.split()) == 3:
            fields = line.split()
            if fields[0] not in ("3",):
                assert float(fields[0]) == 0.0


def test_region_command_report(tmp_path, ghz_spec_file):
    out = tmp_path / "report.json"
    code = run_command(["region", "--state", str(ghz_spec_file),
                        "--out", str(out), "--seed", "1"])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["constants"] == {"A1": 0.5, "A2": 0.5, "A1+A2": 1.5}
    rates = sorted((v["rates"]["A1"], v["rates"]["A2"])
                   for v in report["vertices"])
    assert np.allclose(rates, [(0.5, 1.0), (1.0, 0.5)], atol=1e-8)
    assert report["supermodular"] == "pass"
    assert report["spec_sha256"]
    parsed = parse_h_representation(report["h_representation"])
    assert parsed.senders == ("A1", "A2")


def test_corners_and_greedy_commands(tmp_path, ghz_spec_file):
    out = tmp_path / "corners.json"
    assert run_command(["corners", "--state", str(ghz_spec_file),
                        "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert len(report["vertices"]) == 2

    gout = tmp_path / "greedy.json"
    assert run_command(["greedy", "--state", str(ghz_spec_file),
                        "--out", str(gout), "--costs", "1,2"]) == 0
    greport = json.loads(gout.read_text())
    assert greport["objective"] == pytest.approx(2.0, abs=1e-8)
    assert greport["point"] == {"A1": pytest.approx(1.0),
                                "A2": pytest.approx(0.5)}


def test_esq_command(tmp_path, ghz_spec_file):
    out = tmp_path / "esq.json"
    code = run_command(["esq", "--state", str(ghz_spec_file),
                        "--out", str(out), "--seed", "3",
                        "--d-e-max", "2", "--restarts", "2",
                        "--iterations", "2"])
    assert code == 0
    report = json.loads(out.read_text())
    est = report["esq_estimates"]["A1+A2"]
    assert est["value"] <= 1e-6
    assert report["outer_constants"]["A1+A2"] \
        == pytest.approx(1.5, abs=1e-6)


def test_classify_command_verdicts(tmp_path, ghz_spec_file, capsys):
    out = tmp_path / "cls.json"
    code = run_command(["classify", "--state", str(ghz_spec_file),
                        "--out", str(out), "--point", "0.4,0.4",
                        "--seed", "3", "--d-e-max", "2", "--restarts", "2"])
    assert code == 0
    assert json.loads(out.read_text())["verdict"] == "not_achievable"
    assert "not_achievable" in capsys.readouterr().out

    bell_file = out.parent / "bellss.spec"
    bell_file.write_text(BELL_SENDERS_TEXT)
    out2 = tmp_path / "cls2.json"
    run_command(["classify", "--state", str(bell_file), "--out", str(out2),
                 "--point", "0.2,0.2", "--seed", "3", "--d-e-max", "2",
                 "--restarts", "2"])
    assert json.loads(out2.read_text())["verdict"] == "gap"


def test_simulate_command_csv(tmp_path, ghz_spec_file):
    bell_file = tmp_path / "bell.spec"
    bell_file.write_text("{family: bell, labels: [A, R], dims: [2, 2], "
                         "pair: [A, R], reference: R}\n")
    out = tmp_path / "curve.csv"
    code = run_command(["simulate", "--state", str(bell_file),
                        "--out", str(out), "--seed", "9", "--copies", "1",
                        "--grid", "0,1", "--trials", "4"])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "Q,trials,mean_dist,stderr_dist,mean_fid"
    first = lines[1].split(",")
    assert float(first[2]) == pytest.approx(0.75, abs=1e-9)


def test_report_determinism(tmp_path, ghz_spec_file):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run_command(["esq", "--state", str(ghz_spec_file),
                            "--out", str(path), "--seed", "11",
                            "--d-e-max", "2", "--restarts", "2"]) == 0
    assert _strip_timestamp(a.read_text()) == _strip_timestamp(b.read_text())
    assert a.read_bytes() != b"" and b.read_bytes() != b""


def test_exit_codes(tmp_path, ghz_spec_file):
    assert run_command(["region", "--state", str(tmp_path / "nope.spec"),
                        "--out", str(tmp_path / "x.json")]) == 2
    bad = tmp_path / "bad.spec"
    bad.write_text("{family: ghz, labels: [A1, A2, R], dims: [2, 0, 2], "
                   "reference: R}\n")
    assert run_command(["region", "--state", str(bad),
                        "--out", str(tmp_path / "x.json")]) == 2
    # bad flags via argparse
    assert run_command(["region"]) == 2
    assert run_command(["greedy", "--state", str(ghz_spec_file),
                        "--out", str(tmp_path / "g.json"),
                        "--costs", "1,-1"]) == 2
    assert run_command(["classify", "--state", str(ghz_spec_file),
                        "--out", str(tmp_path / "c.json"),
                        "--point", "0.1"]) == 2


def test_report_vertices_pass_membership(tmp_path, ghz_spec_file):
    out = tmp_path / "r.json"
    run_command(["region", "--state", str(ghz_spec_file),
                 "--out", str(out)])
    report = json.loads(out.read_text())
    rc = qr.region_constants(ghz_state(), "R")
    for v in report["vertices"]:
        rates = tuple(v["rates"][lab] for lab in rc.senders)
        verdict = qr.membership(rc, qr.RatePoint(rc.senders, rates)).verdict
        assert verdict in ("boundary", "inside")
