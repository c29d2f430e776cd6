import json
import subprocess
import sys

import pytest

from artifact.base_arith import ParameterError
from artifact.cli import (
    ConfigError,
    build_config,
    emit_report,
    main,
    parse_config_file,
    parse_report,
    run_config,
)


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_config_file():
    vals = parse_config_file("# c\nsuites = weights, newton\np = 29\nallow-nongeneric = yes  # x\n")
    cfg = build_config(vals)
    assert cfg.suites == ["weights", "newton"]
    assert cfg.p == 29 and cfg.allow_nongeneric


@pytest.mark.parametrize("text", ["p 29", "colour = red"])
def test_parse_config_file_rejects(text):
    with pytest.raises(ConfigError):
        parse_config_file(text)


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("suites = newton\np = 3\nseed = 4\n")
    code, out, _ = run(["--config", str(cfg), "--p", "5"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["p"] == 5 and doc["config"]["seed"] == 4
    assert doc["config"]["suites"] == ["newton"]


def test_empty_suite_list(capsys):
    code, out, _ = run([], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert doc["checks"] == [] and doc["summary"]["total"] == 0 and doc["summary"]["ok"]


def test_weights_exit_zero(capsys):
    code, out, _ = run(["weights", "--r", "12,14", "--type", "reducible"], capsys)
    assert code == 0
    assert json.loads(out)["summary"]["failed"] == 0


def test_nongeneric_exit_two(capsys):
    code, out, err = run(["weights", "--r", "12,13"], capsys)
    assert code == 2 and out == ""
    assert "generic" in err


def test_perturbed_main_exit_one(capsys):
    code, out, _ = run(["main", "--r", "12,13", "--type", "reducible", "--perturb", "1,0",
                        "--lambda0", "3", "--lambda1", "5"], capsys)
    assert code == 1
    fails = [c for c in json.loads(out)["checks"] if c["status"] == "fail"]
    assert fails and all(c["witness"] for c in fails)


@pytest.mark.parametrize("args", [["lt", "--p", "4"], ["lt", "--f", "2", "--r", "1,2,3"],
                                  ["main", "--degree", "20", "--r", "13,14"], ["bogus"]])
def test_parameter_errors(args, capsys):
    assert run(args, capsys)[0] == 2


def test_unwritable_out(tmp_path, capsys):
    assert run(["--out", str(tmp_path / "no" / "such" / "file.json")], capsys)[0] == 2


def test_byte_identical_json(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        subprocess.run([sys.executable, "-m", "artifact", "newton", "weights", "--p", "29",
                        "--r", "13,14", "--seed", "7", "--out", str(path)], check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_sorted_and_roundtrip():
    cfg = build_config({"suites": "lt,newton", "p": "3", "f": "1"})
    reports, code = run_config(cfg)
    assert code == 0
    keys = [r.sort_key() for r in reports]
    assert keys == sorted(keys)
    text = emit_report(reports, cfg)
    doc, back = parse_report(text)
    assert emit_report(back, cfg) == text
    assert all(r.ms is None for r in back)


def test_text_format(capsys):
    code, out, _ = run(["newton", "--p", "3", "--f", "2", "--format", "text"], capsys)
    lines = out.strip().splitlines()
    assert code == 0
    assert all(l.startswith("✓ ") for l in lines[:-1])
    assert lines[-1].endswith("0 failed, 0 skipped")


def test_text_format_marks_failure(capsys):
    code, out, _ = run(["mu", "--p", "3", "--f", "2", "--format", "text"], capsys)
    assert code == 1
    assert any(l.startswith("✗ mu.h_basis") for l in out.splitlines())


def test_timings_flag(capsys):
    _, out, _ = run(["newton", "--p", "3", "--f", "2", "--timings"], capsys)
    assert all(c["ms"] is not None for c in json.loads(out)["checks"])


def test_schema_mismatch():
    with pytest.raises(ConfigError):
        parse_report('{"schema": 2, "checks": []}')
