import csv
import io
import json
import xml.etree.ElementTree as ET

import pytest

from burstyx.cli import CSV_HEADER, EXIT_IO, EXIT_OK, EXIT_USAGE, main

REGIME1_PROBS = ["--pd", "0.7", "--pc", "0.3", "--pdc", "0.5"]
WORKED = ["--M", "3", "--N", "2", "--pd", "0.7", "--pc", "0.5", "--pdc", "0.9"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bounds_json(capsys):
    code, out, _ = run(capsys, "bounds", *WORKED, "--json")
    d = json.loads(out)
    assert code == EXIT_OK and d["eta_ub"] == pytest.approx(2.5) and d["tight"] is True


def test_bounds_not_tight_prints_gap(capsys):
    code, out, _ = run(capsys, "bounds", "--M", "2", "--N", "2", "--pd", "0.7", "--pc", "0.5", "--pdc", "0.7")
    assert code == EXIT_OK and "not tight" in out and "gap" in out


@pytest.mark.parametrize("argv", [
    ["bounds", "--M", "0", "--N", "2", "--pd", "0.7", "--pc", "0.5", "--pdc", "0.9"],
    ["bounds", "--M", "3", "--N", "2", "--pd", "0.5", "--pc", "0.8", "--pdc", "0.9"],
    ["verify", "--suite", "nope"],
    ["scheme", "--family", "type2_r1", "--M", "2", "--N", "3"],
    ["curve", *REGIME1_PROBS, "--start", "20", "--stop", "30"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and err


def test_invalid_joint_names_invariant(capsys):
    _, _, err = run(capsys, "bounds", "--M", "3", "--N", "2", "--pd", "0.5", "--pc", "0.8", "--pdc", "0.9")
    assert "p_d" in err


def test_unwritable_path(capsys, tmp_path):
    code, _, _ = run(capsys, "curve", *REGIME1_PROBS, "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == EXIT_IO


def test_ratio_sweep_anchors(capsys):
    code, out, _ = run(capsys, "curve", *REGIME1_PROBS)
    assert code == EXIT_OK
    assert out.splitlines()[0] == ",".join(CSV_HEADER)
    by_x = {float(r["x"]): r for r in rows_of(out)}
    assert float(by_x[0.5]["eta_ub"]) == pytest.approx(0.7, abs=1e-12)
    assert float(by_x[1.0]["eta_ub"]) == pytest.approx(1.1, abs=1e-12)


def test_worked_gap_on_ratio_sweep(capsys):
    code, out, _ = run(capsys, "curve", "--axis", "ratio_N_over_M", "--pd", "0.7", "--pc", "0.5",
                       "--pdc", "0.9", "--cap", "3")
    row = next(r for r in rows_of(out) if abs(float(r["x"]) - 2 / 3) < 1e-9)
    gap = (float(row["eta_hkia"]) - float(row["eta_ia"])) * 3
    assert gap == pytest.approx(0.1, abs=1e-10)  # CSV keeps 12 significant digits


def test_pc_sweep(capsys):
    code, out, _ = run(capsys, "curve", "--axis", "p_c", "--M", "3", "--N", "2", "--pd", "0.7",
                       "--pdc", "0.9", "--points", "8")
    rows = rows_of(out)
    assert code == EXIT_OK and len(rows) == 8 and float(rows[0]["x"]) == 0.0


def test_plot_round_trip(capsys, tmp_path):
    csv_path, svg_path = tmp_path / "c.csv", tmp_path / "c.svg"
    assert main(["curve", *REGIME1_PROBS, "--out", str(csv_path)]) == EXIT_OK
    assert main(["plot", "--in", str(csv_path), "--out", str(svg_path)]) == EXIT_OK
    root = ET.parse(svg_path).getroot()
    assert root.get("width") == "640" and root.get("height") == "480"
    lines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
    assert len(lines) >= 2


def test_plot_single_row(tmp_path):
    src = tmp_path / "one.csv"
    src.write_text(",".join(CSV_HEADER) + "\n0.5,0.7,0.7,0.7,nan,1,true\n")
    out = tmp_path / "one.svg"
    assert main(["plot", "--in", str(src), "--out", str(out)]) == EXIT_OK
    root = ET.parse(out).getroot()
    assert root.findall(".//{http://www.w3.org/2000/svg}circle")


def test_plot_missing_column(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("x,eta_ub\n0.5,0.7\n")
    assert main(["plot", "--in", str(src), "--out", str(tmp_path / "bad.svg")]) == EXIT_USAGE


def test_plot_missing_file(tmp_path):
    assert main(["plot", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.svg")]) == EXIT_IO


def test_verify_cross_filter_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "appendixB", "--trials", "50", "--seed", "7")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["passed"]
    assert rep["cases"][0]["detail"]["pass_fraction"] == 1.0


def test_verify_type2_r1_warns(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "schemes", "--family", "type2_r1", "--trials", "2")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["counts"]["WARN"] >= 1 and rep["counts"]["FAIL"] == 0


def test_scheme_check_and_dump(capsys, tmp_path):
    dump = tmp_path / "s.json"
    code, out, _ = run(capsys, "scheme", "--family", "type2_r2_hkia", "--M", "3", "--N", "2", "--seed", "1",
                       "--check", "--dump", str(dump))
    assert code == EXIT_OK and "psi" in out
    d = json.loads(dump.read_text())
    assert d["family"] == "type2_r2_hkia"


def test_scheme_blend_split(capsys):
    code, out, _ = run(capsys, "scheme", "--family", "hkia_lb_t2_blend", "--M", "6", "--N", "5",
                       "--a", "0.86", "--b", "1")
    d = json.loads(out)
    assert code == EXIT_OK
    assert (d["extra"]["exact_dims"], d["extra"]["partial_dims"]) == (1, 1)


def test_byte_determinism(capsys, tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"v{i}.json"
        main(["verify", "--suite", "marginals", "--trials", "3", "--seed", "5", "--out", str(p)])
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    a = run(capsys, "curve", *REGIME1_PROBS)[1]
    b = run(capsys, "curve", *REGIME1_PROBS)[1]
    assert a == b


def test_config_file_with_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"M": 3, "N": 2, "p_d": 0.7, "p_c": 0.5, "p_d_given_c": 0.9}))
    d = json.loads(run(capsys, "bounds", "--config", str(cfg), "--json")[1])
    assert d["eta_ub"] == pytest.approx(2.5)
    d = json.loads(run(capsys, "--config", str(cfg), "bounds", "--M", "2", "--N", "2", "--json")[1])
    assert d["M"] == 2
