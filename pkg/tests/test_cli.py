import json
import os
import subprocess
import sys

from conftest import ROOT, fixture_path
from helpers import assert_valid_dot

from sheetlint.cli import main


def run_cli(*args, cwd=None):
    env = dict(os.environ)
    env["PYTHONPATH"] = str(ROOT / "src")
    return subprocess.run(
        [sys.executable, "-m", "sheetlint", *[str(a) for a in args]],
        capture_output=True, text=True, env=env, cwd=cwd or ROOT)


def test_exit_zero_on_clean_fixture():
    proc = run_cli(fixture_path("clean_small.wb"))
    assert proc.returncode == 0, proc.stderr
    assert "score 100/100" in proc.stdout


def test_exit_one_on_defect_fixture():
    proc = run_cli(fixture_path("assign_v2.wb"))
    assert proc.returncode == 1
    assert "[R01 error]" in proc.stdout


def test_exit_two_on_corrupt_file():
    proc = run_cli(fixture_path("corrupt.wb"))
    assert proc.returncode == 2
    assert "corrupt.wb:3:" in proc.stderr


def test_exit_two_on_unknown_rule():
    proc = run_cli(fixture_path("clean_small.wb"), "--rules", "R99")
    assert proc.returncode == 2


def test_exit_two_on_unknown_flag():
    proc = run_cli(fixture_path("clean_small.wb"), "--frobnicate")
    assert proc.returncode == 2


def test_severity_threshold_controls_exit():
    # v4 has warnings and info but no errors when R02/R05 are the only rules
    path = fixture_path("assign_v4.wb")
    relaxed = run_cli(path, "--rules", "R02", "--severity-threshold", "error",
                      "--bottom-line", "Model!C51")
    assert relaxed.returncode == 0
    strict = run_cli(path, "--rules", "R02", "--severity-threshold", "info",
                     "--bottom-line", "Model!C51")
    assert strict.returncode == 1


def test_text_report_line_format():
    proc = run_cli(fixture_path("pmt_unfriendly.wb"), "--rules", "R07")
    assert proc.returncode == 1
    first = proc.stdout.splitlines()[0]
    assert first.startswith("Model!B7 [R07 warning] constant 0.07")


def test_json_report_schema(tmp_path):
    out = tmp_path / "report.json"
    proc = run_cli(fixture_path("assign_v1.wb"), "--format", "json",
                   "--output", out)
    assert proc.returncode == 1
    reports = json.loads(out.read_text())
    assert isinstance(reports, list) and len(reports) == 1
    report = reports[0]
    for key in ("tool", "version", "input", "sheets", "diagnostics",
                "skipped_rules", "notices", "score", "counts"):
        assert key in report, key
    assert report["tool"] == "sheetlint"
    assert any(d["rule"] == "R03" for d in report["diagnostics"])
    diag = report["diagnostics"][0]
    for key in ("rule", "severity", "sheet", "cell", "location", "message",
                "related", "suggestion", "guideline"):
        assert key in diag, key
    sheet = report["sheets"][0]
    for key in ("name", "cells", "content_extent", "declared_extent",
                "blank_ratio", "stacking"):
        assert key in sheet, key
    # round-trips through a generic JSON reader
    assert json.loads(json.dumps(reports)) == reports


def test_json_deterministic():
    a = run_cli(fixture_path("assign_v2.wb"), "--format", "json")
    b = run_cli(fixture_path("assign_v2.wb"), "--format", "json")
    assert a.stdout == b.stdout


def test_dot_output(tmp_path):
    out = tmp_path / "g.dot"
    proc = run_cli(fixture_path("assign_v4.wb"), "--format", "dot",
                   "--output", out, "--bottom-line", "Model!C51")
    assert proc.returncode == 1  # exit still reflects diagnostics
    text = out.read_text()
    assert_valid_dot(text)
    assert '"Model_C51"' in text


def test_rules_subset_restricts_output():
    proc = run_cli(fixture_path("assign_v2.wb"), "--rules", "R05")
    rules = {line.split("[")[1].split()[0]
             for line in proc.stdout.splitlines() if "[" in line and "]" in line}
    assert rules == {"R05"}


def test_config_file_and_flag_override(tmp_path):
    config = tmp_path / "audit.cfg"
    config.write_text("enabled_rules=R04\nseverity_R04=error\n")
    wb = tmp_path / "w.wb"
    wb.write_text("[sheet S]\nA10 num 5\nB25 formula =A10\n")
    proc = run_cli(wb, "--config", config)
    assert proc.returncode == 1
    assert "[R04 error]" in proc.stdout
    # --rules overrides the config's enabled set
    proc = run_cli(wb, "--config", config, "--rules", "R13")
    assert proc.returncode == 0


def test_multiple_inputs_reported_in_order():
    proc = run_cli(fixture_path("clean_small.wb"), fixture_path("assign_v2.wb"))
    assert proc.returncode == 1
    first = proc.stdout.index("clean_small.wb")
    second = proc.stdout.index("assign_v2.wb")
    assert first < second


def test_input_format_override(tmp_path):
    renamed = tmp_path / "model.dat"
    renamed.write_text(fixture_path("clean_small.wb").read_text())
    proc = run_cli(renamed, "--input-format", "text")
    assert proc.returncode == 0


def test_xlsx_input_through_cli(tmp_path):
    from helpers import build_xlsx, XLSX_STYLE_GREY
    path = build_xlsx(tmp_path / "model.xlsx", {"Model": {
        "A1": {"n": "5"},
        "A2": {"n": "7"},
        "A3": {"f": "SUM(A1:A2)", "style": XLSX_STYLE_GREY},
    }}, defined_names={"WBMAX": "Model!$A$3"})
    proc = run_cli(path)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "score 100/100" in proc.stdout


def test_main_entry_callable_in_process(capsys):
    code = main([str(fixture_path("clean_small.wb"))])
    captured = capsys.readouterr()
    assert code == 0
    assert "score 100/100" in captured.out
