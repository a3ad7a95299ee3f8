import csv
import io
import json
from pathlib import Path

import pytest

from kahler_eta.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main, write_csv, write_structured

DATA = Path(__file__).parent / "data"


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def jsonl(text):
    lines = [json.loads(line) for line in text.splitlines()]
    assert lines[0]["kind"] == "header"
    return lines[0], lines[1:]


def test_validate_default(capsys):
    code, out, _ = run(["validate"], capsys)
    header, (rec,) = jsonl(out)
    assert code == EXIT_OK and header["command"] == "validate"
    assert rec["ok"] and rec["simple_zero_at_endpoint"]


def test_calibrate_csv(capsys):
    code, out, _ = run(["calibrate", "--config", str(DATA / "minimal.ini"), "--format", "csv"], capsys)
    assert code == EXIT_OK
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert row["passed"] == "true"
    assert float(row["einstein_constant"]) == pytest.approx(-3.0, rel=1e-9)
    assert float(row["kappa"]) == pytest.approx(1.0, rel=1e-9)


def test_eta_reports_both_routes(capsys):
    code, out, _ = run(["eta"], capsys)
    _, (rec,) = jsonl(out)
    assert code == EXIT_OK
    assert abs(rec["eta_reduced"] - rec["eta_curvature"]) == pytest.approx(rec["route_difference"])
    assert rec["bound_lo"] <= rec["eta_reduced"] <= rec["bound_hi"]


def test_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["eta", "--format", "csv", "--out", str(path), "--seed", "5"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()


def test_structured_output_differs_only_in_header(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        main(["validate", "--out", str(path)])
    assert a.read_text().splitlines()[1:] == b.read_text().splitlines()[1:]


def test_sweep_over_p_alternates_signature(capsys):
    code, out, _ = run(["sweep", "--config", str(DATA / "sweep_p.ini")], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert [r["p"] for r in rows] == ["3", "4", "5"]
    assert [int(r["sigma"]) for r in rows] == [1, 0, 1]
    for r in rows:
        assert float(r["implied_chern_number"]) == pytest.approx(2 * int(r["p"]), rel=1e-6)


def test_sweep_over_spec_field(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[run]\nn_samples = 5\n[spec]\nc = -2\n[sweep]\nparameter = c\nvalues = -2, -3\n")
    code, out, _ = run(["sweep", "--config", str(cfg)], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and [float(r["c"]) for r in rows] == [-2.0, -3.0]


def test_sweep_without_section_is_usage_error(capsys):
    code, _, err = run(["sweep"], capsys)
    assert code == EXIT_USAGE and "[sweep]" in err


def test_config_error_exit_code(capsys):
    code, out, err = run(["eta", "--config", str(DATA / "c_inside.ini")], capsys)
    assert code == EXIT_USAGE and out == ""
    assert "line 8" in err and "opposite Kahler" in err


def test_missing_config_file(capsys):
    code, _, err = run(["validate", "--config", "/nonexistent/x.ini"], capsys)
    assert code == EXIT_USAGE and "cannot read config" in err


def test_failing_validation_exit_code(tmp_path, capsys):
    cfg = tmp_path / "v.ini"
    cfg.write_text("[spec]\ncase = i\nfamily = a\nconstants = 0, 0, -6\ntau0 = 1\n")
    code, out, _ = run(["validate", "--config", str(cfg)], capsys)
    _, (rec,) = jsonl(out)
    assert code == EXIT_FAILED and not rec["ok"]


def test_verify_single_spec(tmp_path, capsys):
    cfg = tmp_path / "v.ini"
    cfg.write_text("[run]\nn_samples = 8\n[spec]\nc = -2\n")
    code, out, _ = run(["verify", "--config", str(cfg)], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert {r["target"] for r in rows} == {"models", "spec"}
    gating = [r for r in rows if r["gating"] == "true"]
    assert all(r["passed"] == "true" for r in gating)


def test_writers_handle_nonfinite_and_nested():
    buf = io.StringIO()
    write_structured("x", [{"v": float("nan"), "d": {"k": 1.5}}], buf, stamp="t")
    _, (rec,) = jsonl(buf.getvalue())
    assert rec["v"] is None and rec["d"] == {"k": 1.5}
    buf = io.StringIO()
    write_csv([{"a": 0.1, "d": {"k": True}, "l": [1, 2]}], buf)
    assert buf.getvalue() == "a,d.k,l\n0.10000000000000001,true,1;2\n"
