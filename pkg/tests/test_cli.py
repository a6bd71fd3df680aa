import json
import os

import pytest

from xychain import __version__
from xychain.cli import main, parse_range, read_config, UsageError


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, l.split(","))) for l in lines[1:]]


def test_fn_table_saturated_band(capsys):
    code, out, _ = run(["fn-table", "--h", "2", "--T", "0", "--n-max", "3"], capsys)
    assert code == 0
    assert out.startswith(f"# xychain version={__version__} command=fn-table")
    assert "tolerances=" in out.splitlines()[0]
    assert [r["f_n"] for r in csv_rows(out)] == ["1", "0", "0", "0"]


def test_concurrence_zero_field(capsys):
    code, out, _ = run(["concurrence", "--m", "2", "--h", "0", "--T", "0"], capsys)
    (row,) = csv_rows(out)
    assert code == 0 and float(row["C"]) == 0.0 and float(row["C_wootters"]) == 0.0


def test_critical_field_m2(capsys):
    code, out, _ = run(["critical-field", "--m", "2"], capsys)
    (row,) = csv_rows(out)
    assert code == 0
    assert float(row["h_c_E"]) == pytest.approx(0.5, abs=1e-3)


def test_critical_temps_two_roots(capsys):
    code, out, _ = run(["critical-temps", "--m", "2", "--h", "1.05"], capsys)
    assert code == 0
    assert [r["kind"] for r in csv_rows(out)] == ["tc_lower", "tc_upper"]


def test_sweep_is_byte_stable(tmp_path, capsys):
    args = ["sweep", "--m", "2", "--h-range", "0.5:1.0:0.25", "--T-range", "0:0.2:0.1"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(args + ["--out", str(a)], capsys)[0] == 0
    assert run(args + ["--out", str(b), "--threads", "2"], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = csv_rows(a.read_text())
    assert len(rows) == 9
    assert list(rows[0]) == ["h", "T", "m", "C", "W", "status"]
    assert [(r["h"], r["T"]) for r in rows[:3]] == [("0.5", "0"), ("0.5", "0.1"), ("0.5", "0.2")]


def test_phase_diagram_output(tmp_path, capsys):
    path = tmp_path / "pd.csv"
    code, _, _ = run(["phase-diagram", "--m", "2", "--h-range", "0.6:1.05:0.45",
                      "--out", str(path)], capsys)
    assert code == 0
    rows = csv_rows(path.read_text())
    assert [(r["h"], r["branch"]) for r in rows] == [("0.6", "single"), ("1.05", "lower"),
                                                     ("1.05", "upper")]


def test_json_format(capsys):
    code, out, _ = run(["concurrence", "--m", "1", "--h", "0.3", "--T", "0.1", "--format", "json"],
                       capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["header"]["command"] == "concurrence"
    assert doc["header"]["tolerances"]["threshold"] == 1e-12
    assert doc["columns"][:5] == ["m", "h", "T", "C", "W"]
    assert doc["rows"][0][3] > 0


def test_parse_range():
    assert parse_range("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    # the end point is kept when it lies within half a step of the grid
    assert parse_range("0:1.04:0.1")[-1] == 1.0
    assert parse_range("0:1.06:0.1")[-1] == 1.1
    assert parse_range("0.3") == [0.3]
    for bad in ("0:1", "a:b:c", "1:0:0.1", "0:1:0", "0:1:-0.1"):
        with pytest.raises(UsageError):
            parse_range(bad)


def test_malformed_range_exit_code(capsys):
    code, out, err = run(["sweep", "--m", "2", "--h-range", "0:1", "--T-range", "0"], capsys)
    assert code == 2 and out == ""
    assert err.startswith("error category=usage message=")


def test_unknown_flag(capsys):
    code, _, err = run(["fn-table", "--h", "0", "--T", "0", "--bogus"], capsys)
    assert code == 2 and "category=usage" in err


def test_parameter_error_category(capsys):
    code, _, err = run(["fn-table", "--h", "-1", "--T", "0"], capsys)
    assert code == 2 and "category=parameter" in err


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    code, _, err = run(["fn-table", "--h", "0", "--T", "0", "--out", str(target)], capsys)
    assert code == 6 and "category=io" in err


def test_config_file_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# saturated band\nh = 2\nT = 0\nn-max = 2\n")
    assert read_config(cfg) == {"h": "2", "T": "0", "n_max": "2"}
    code, out, _ = run(["fn-table", "--config", str(cfg)], capsys)
    assert code == 0 and [r["f_n"] for r in csv_rows(out)] == ["1", "0", "0"]
    code, out, _ = run(["fn-table", "--config", str(cfg), "--h", "0"], capsys)
    assert code == 0 and csv_rows(out)[0]["f_n"] == "0.5"


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(["fn-table", "--config", str(cfg)], capsys)
    assert code == 2 and "colour" in err


def test_thread_count_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("XYCHAIN_THREADS", "0")
    code, _, err = run(["fn-table", "--h", "0", "--T", "0"], capsys)
    # zero is clamped up to one worker
    assert code == 0, err
    code, _, err = run(["fn-table", "--h", "0", "--T", "0", "--threads", "0"], capsys)
    assert code == 2


def test_ed_ground_state_and_dump(tmp_path, capsys):
    dump = tmp_path / "gs.bin"
    code, out, _ = run(["ed", "--n", "8", "--bc", "periodic", "--ground", "--h", "0.3",
                        "--pair", "0", "1", "--dump", str(dump)], capsys)
    assert code == 0
    assert "# mode=ground" in out
    (row,) = csv_rows(out)
    assert float(row["C"]) > 0.1
    assert dump.stat().st_size > 0


def test_ed_thermal_matches_chain(capsys):
    code, out, _ = run(["ed", "--n", "6", "--bc", "open", "--T", "4", "--pair", "2", "3"], capsys)
    assert code == 0
    assert float(csv_rows(out)[0]["C"]) == 0.0


def test_ed_needs_a_mode(capsys):
    code, _, _ = run(["ed", "--n", "6", "--pair", "0", "1"], capsys)
    assert code == 2


def test_verify_subset(capsys):
    code, out, _ = run(["verify", "--only", "2", "7"], capsys)
    rows = csv_rows(out)
    assert code == 0
    assert [(r["criterion"], r["status"]) for r in rows] == [("2", "pass"), ("7", "pass")]


def test_help_documents_range_syntax(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "a:b:step" in capsys.readouterr().out
