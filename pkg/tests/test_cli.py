import json
import math

import jsonschema
import numpy as np
import pytest

from cspencer import cli, report
from cspencer.core import OMEGA, save_cmat
from cspencer.hadamard import dft


@pytest.fixture
def files(tmp_path):
    f3 = tmp_path / "f3rows.cmat.json"
    save_cmat(f3, dft(3).matrix)
    strips = tmp_path / "strips.cmat.json"
    save_cmat(strips, np.array([[1, OMEGA ** j, 0] for j in range(3)]))
    bad = tmp_path / "bad.cmat.json"
    bad.write_text('[[[1, 0], [0, 0]],\n [[0, 0] [1, 0]]]')
    return {"f3": str(f3), "strips": str(strips), "bad": str(bad), "dir": tmp_path}


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = cli.main(argv + ["--out", str(out), "--no-timing"])
    text = out.read_text()
    rec = json.loads(text)
    jsonschema.validate(rec, report.schema())
    return code, rec, text


def test_discrepancy_dft_rows(files):
    code, rec, _ = run(["discrepancy", "--in", files["f3"], "--certify", "--tol", "1e-8"], files["dir"])
    assert code == 0 and rec["status"] == "ok"
    assert rec["result"]["value"] == pytest.approx(math.sqrt(3), abs=1e-8)
    assert rec["result"]["certified"] is True
    assert rec["wall_time"] is None


def test_orbits_record(files):
    code, rec, _ = run(["orbits"], files["dir"])
    assert code == 0
    assert rec["result"]["total"] == 126 and rec["result"]["classes"] == 4
    assert rec["result"]["class1_intersections"]["violations"] == 0


def test_verify_lemmas_record(files):
    code, rec, _ = run(["verify-lemmas", "--resolution", "60", "--samples", "2000"], files["dir"])
    assert code == 0 and rec["result"]["violations"] == 0


def test_norm_kinds(files):
    _, rec, _ = run(["norm", "--kind", "inf1", "--in", files["f3"]], files["dir"])
    assert rec["result"]["lower"] <= 3 * math.sqrt(3) + 1e-9 <= rec["result"]["upper"] + 2e-9
    _, rec, _ = run(["norm", "--kind", "22", "--in", files["f3"]], files["dir"])
    assert rec["result"]["upper"] == pytest.approx(math.sqrt(3))
    _, rec, _ = run(["norm", "--kind", "1inf", "--in", files["f3"]], files["dir"])
    assert rec["result"]["upper"] == pytest.approx(1.0)
    _, rec, _ = run(["norm", "--kind", "qp", "--q", "1.5", "--p", "3", "--in", files["f3"]], files["dir"])
    assert rec["result"]["certified"] is False and rec["inputs"]["q"] == 1.5


def test_witness_strips(files):
    code, rec, _ = run(["witness", "--in", files["strips"]], files["dir"])
    assert code == 0 and rec["result"]["value"] == pytest.approx(math.sqrt(3), abs=1e-9)


def test_cover_square_and_exit_codes(files):
    code, rec, _ = run(["cover", "--subset", "(-1,-1);(0,-1);(-1,0);(0,0)"], files["dir"])
    assert code == 0 and rec["result"]["status"] == "coverable" and rec["result"]["class"] == 1


def test_cover_inconclusive_maps_to_exit_2(files):
    # a class-2 subset touches the threshold exactly, so a zero margin cannot be decided
    code, rec, _ = run(["cover", "--subset", "0b001010101", "--margin", "0"], files["dir"])
    assert code == 2 and rec["status"] == "inconclusive"


def test_parse_error_reports_location(files, capsys):
    code, rec, _ = run(["norm", "--kind", "22", "--in", files["bad"]], files["dir"])
    assert code == 1 and rec["status"] == "error"
    assert ":2:10:" in rec["result"]["message"] and "offset" in rec["result"]["message"]
    assert "offset" in capsys.readouterr().err


def test_bm_commands(files):
    code, rec, _ = run(["bm", "upper", "--n", "3", "--q", "1", "--p", "inf"], files["dir"])
    assert code == 0 and rec["result"]["upper"] == pytest.approx(math.sqrt(3))
    code, rec, _ = run(["bm", "search", "--n", "2", "--restarts", "20", "--start", "dft"], files["dir"])
    assert rec["command"] == "bm search" and rec["result"]["value"] == pytest.approx(math.sqrt(2), abs=1e-6)
    code, rec, _ = run(["bm", "counterexample", "--n", "3"], files["dir"])
    assert code == 0 and rec["result"]["norm_upper"] < 3


def test_bm_domain_error_exit_1(files):
    code, rec, _ = run(["bm", "upper", "--n", "3", "--q", "3", "--p", "1.5"], files["dir"])
    assert code == 1 and rec["result"]["error"] == "DomainError"


def test_counterexample_from_a3(files):
    code, rec, _ = run(["counterexample", "--start", "a3", "--iterations", "20"], files["dir"])
    assert code == 0 and rec["result"]["success"] is True


def test_hadamard_command(files):
    code, rec, _ = run(["hadamard", "--n", "5"], files["dir"])
    assert code == 0 and rec["result"]["flatness_defect"] <= 1e-9


def test_render_and_determinism(files):
    svg_path = files["dir"] / "f.svg"
    argv = ["render", "--preset", "dft", "--svg", str(svg_path), "--resolution", "100", "--closed"]
    _, rec1, text1 = run(argv, files["dir"], "a.json")
    bytes1 = svg_path.read_bytes()
    _, rec2, text2 = run(argv, files["dir"], "b.json")
    assert text1 == text2 and bytes1 == svg_path.read_bytes()
    assert rec1["result"]["bodies"] == 3


def test_identical_seeds_give_identical_records(files):
    argv = ["discrepancy", "--in", files["f3"], "--seed", "4"]
    assert run(argv, files["dir"], "a.json")[2] == run(argv, files["dir"], "b.json")[2]


def test_thread_count_from_environment(files, monkeypatch):
    monkeypatch.setenv("CSPENCER_THREADS", "3")
    _, rec, _ = run(["orbits"], files["dir"])
    assert rec["thread_count"] == 3


def test_invalid_resolution_rejected(files, capsys):
    assert cli.main(["orbits", "--resolution", "4"]) == 1
    assert "resolution" in capsys.readouterr().err


def test_stdout_output(capsys):
    assert cli.main(["orbits", "--no-timing"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["command"] == "orbits"


def test_timing_recorded_by_default(files):
    out = files["dir"] / "t.json"
    cli.main(["orbits", "--out", str(out)])
    assert json.loads(out.read_text())["wall_time"] >= 0
