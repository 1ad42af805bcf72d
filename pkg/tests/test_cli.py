import json
from dataclasses import replace

import pytest

from mafoliation.analysis import RANK_MISMATCH
from mafoliation.catalog import CATALOG, HALFPLANE_S
from mafoliation.cli import main


def run(capsys, *argv, catalog=None):
    code = main(list(argv), catalog=catalog)
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_linear(capsys):
    code, out, _ = run(capsys, "analyze", "linear", "--point", "0.3+0.1i, 0.2-0.4i")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema_version"] == "mafoliation-report/1"
    assert doc["twist"]["max"] <= 1e-9


def test_analyze_halfplane(capsys):
    code, out, _ = run(capsys, "analyze", "halfplane", "--point", "i, 0")
    doc = json.loads(out)
    assert code == 0
    re, im = doc["twist"]["components"][0][0][0]
    assert abs(complex(re, im) + 0.5j) <= 1e-12
    gap = doc["gaps"][0]
    assert gap["S_value"] == pytest.approx(0.25)
    assert gap["equality_residual"] <= 1e-6


def test_analyze_codim_override_is_rank_mismatch(capsys):
    code, out, err = run(capsys, "analyze", "linear", "--point", "0, 0", "--codim", "2")
    assert code == 2
    assert json.loads(out)["status"] == RANK_MISMATCH
    assert "rank" in err


def test_analyze_guard_violation_is_evaluation_error(capsys):
    code, out, _ = run(capsys, "analyze", "halfplane", "--point", "0, 0")
    assert code == 3
    assert json.loads(out)["status"] != "ok"


def test_analyze_spec_file_and_out(capsys, tmp_path):
    spec = tmp_path / "u.json"
    spec.write_text(json.dumps({"n": 2, "p": 1, "potential": "abs2(z2 - z1^2)"}))
    out_file = tmp_path / "report.json"
    code, out, _ = run(capsys, "analyze", str(spec), "--point", "1, 1", "--out", str(out_file))
    assert code == 0 and out == ""
    assert json.loads(out_file.read_text())["levi"]["rank"] == 1


def test_analyze_is_deterministic(capsys):
    a = run(capsys, "analyze", "halfplane3", "--point", "0.2+1.1i, 0.3, -0.5i")[1]
    b = run(capsys, "analyze", "halfplane3", "--point", "0.2+1.1i, 0.3, -0.5i")[1]
    assert a == b


@pytest.mark.parametrize("argv", [
    ["analyze", "linear"],
    ["analyze", "linear", "--point", "1+"],
    ["analyze", "linear", "--point", "0"],
    ["analyze", "no-such-entry-or-file", "--point", "0, 0"],
    ["frame", "linear", "--point", "0, 0"],
    ["nonsense"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_scan_graph(capsys):
    code, out, _ = run(capsys, "scan", "graph", "--samples", "100", "--seed", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["analyzed"] == 100
    assert doc["aggregate"]["max_twist_max"] <= 1e-9


def test_scan_halfplane(capsys):
    code, out, _ = run(capsys, "scan", "halfplane", "--samples", "50", "--seed", "1")
    doc = json.loads(out)
    assert code == 0
    # reference_S is |S - 1/(4 Im^2 z1)| relative to the closed form
    assert CATALOG["halfplane"].reference["S"] == HALFPLANE_S
    assert doc["aggregate"]["max_reference_S"] <= 1e-8


def test_scan_zero_samples(capsys, tmp_path):
    out_file = tmp_path / "scan.json"
    code, _, _ = run(capsys, "scan", "halfplane", "--samples", "0", "--out", str(out_file))
    doc = json.loads(out_file.read_text())
    assert code == 0
    assert doc["points"] == [] and doc["aggregate"] == {}


def test_frame_slope(capsys):
    code, out, _ = run(capsys, "frame", "slope-frame", "--point", "i, 0")
    doc = json.loads(out)
    assert code == 0
    assert doc["frobenius_residual"] <= 1e-10
    re, im = doc["twist"]["components"][0][0][0]
    assert abs(complex(re, im) + 0.5j) <= 1e-12


def test_frame_noninvolutive(capsys):
    code, out, _ = run(capsys, "frame", "noninvolutive-frame", "--point", "0, 0")
    assert code == 4
    assert json.loads(out)["frobenius_residual"] >= 0.5


def test_frame_constant(capsys):
    code, out, _ = run(capsys, "frame", '{"n": 2, "p": 1, "frame": ["1, 0"]}', "--point", "0.4-2i, 1+i")
    doc = json.loads(out)
    assert code == 0
    assert doc["twist"]["max"] == 0


def test_export(capsys):
    code, out, _ = run(capsys, "export", "halfplane")
    assert code == 0
    doc = json.loads(out)
    assert doc["potential"] == "im(z2)^2/im(z1)" and doc["guards"] == ["im(z1)"]


def test_selftest_subset_passes(capsys):
    code, out, _ = run(capsys, "selftest", "--only", "2,11")
    assert code == 0
    assert out.count("PASS") == 2


def test_selftest_names_corrupted_criterion(capsys):
    bad = dict(CATALOG)
    bad["halfplane"] = replace(CATALOG["halfplane"], reference={"twist": "i/(2*im(z1))", "S": HALFPLANE_S})
    code, out, _ = run(capsys, "selftest", "--only", "5", catalog=bad)
    assert code == 5
    line = next(l for l in out.splitlines() if "halfplane closed forms" in l)
    assert "FAIL" in line


def test_selftest_bad_only(capsys):
    assert run(capsys, "selftest", "--only", "x")[0] == 1


def test_non_real_potential_is_evaluation_error(capsys):
    code, out, err = run(capsys, "analyze", '{"n": 2, "p": 1, "potential": "z1*z2"}', "--point", "1, i")
    assert code == 3
    assert "NotRealValued" in json.loads(out)["status"]
