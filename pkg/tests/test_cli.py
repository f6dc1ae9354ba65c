"""Command-line behavior: output shape, exit codes, determinism."""

import json

import pytest

from casinv.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_systems_lists_bundled(capsys):
    code, out, _ = run(capsys, "systems")
    assert code == 0
    names = out.split()
    assert "so3" in names and "light-top" in names


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", "so3")
    assert code == 0
    assert "skew: ok" in out
    assert "jacobi: ok" in out


def test_validate_corrupt_fails_with_named_triple(capsys):
    code, out, _ = run(capsys, "validate", "lv3-j1-corrupt")
    assert code == 1
    assert "jacobi: fails at triple (1,2,3)" in out


def test_rank_output(capsys):
    code, out, _ = run(capsys, "rank", "light-top")
    assert code == 0
    assert "rank: 4" in out
    assert "dependent rows 3 6" in out


def test_gamma_output(capsys):
    code, out, _ = run(capsys, "gamma", "lv3-j1")
    assert code == 0
    assert "gamma[3][1] = -a*b*x3/x1" in out
    assert "gamma[3][2] = b*x3/x2" in out


def test_casimirs_output(capsys):
    code, out, _ = run(capsys, "casimirs", "lv3-j1")
    assert code == 0
    assert "a*b*ln(x1) - b*ln(x2) + ln(x3)" in out
    assert "eta = 1/x3" in out


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "so3")
    assert code == 0
    assert "symbolic ok" in out


def test_all_with_flow(capsys):
    code, out, _ = run(capsys, "all", "light-top", "--flow")
    assert code == 0
    assert "flow:" in out
    assert "cost ratio: 1/8" in out


def test_all_skips_stages_after_jacobi_failure(capsys):
    code, out, _ = run(capsys, "all", "lv3-j1-corrupt")
    assert code == 1
    assert "later stages skipped" in out
    assert "casimir" not in out


def test_cost_direct(capsys):
    code, out, _ = run(capsys, "cost", "--dim", "6", "--rank", "4")
    assert code == 0
    assert "cost ratio: 1/8" in out


def test_cost_from_system(capsys):
    code, out, _ = run(capsys, "cost", "lv3-j2")
    assert code == 0
    assert "cost ratio: 1/2" in out


def test_cost_without_arguments_is_usage_error(capsys):
    code, _, err = run(capsys, "cost")
    assert code == 2
    assert "error" in err


def test_cost_odd_rank_is_usage_error(capsys):
    code, _, err = run(capsys, "cost", "--dim", "5", "--rank", "3")
    assert code == 2
    assert "even" in err


def test_unknown_system_is_usage_error(capsys):
    code, _, err = run(capsys, "validate", "no-such-system")
    assert code == 2
    assert "bundled" in err


def test_corrupt_casimirs_is_computation_error(capsys):
    code, _, err = run(capsys, "casimirs", "lv3-j1-corrupt")
    assert code == 3
    assert "computation failed" in err


def test_json_report_is_valid(capsys):
    code, out, _ = run(capsys, "all", "lv3-j1", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["ok"] is True
    assert data["rank"] == 2
    assert data["cost"]["ratio"] == "1/2"
    assert data["casimirs"][0]["expr"] == "a*b*ln(x1) - b*ln(x2) + ln(x3)"


def test_json_failure_keeps_ok_false(capsys):
    code, out, _ = run(capsys, "validate", "lv3-j1-corrupt", "--json")
    assert code == 1
    data = json.loads(out)
    assert data["ok"] is False
    assert data["jacobi"]["failures"] == [[1, 2, 3]]


def test_repeated_runs_identical(capsys):
    _, out1, _ = run(capsys, "all", "so3", "--flow", "--seed", "42", "--json")
    _, out2, _ = run(capsys, "all", "so3", "--flow", "--seed", "42", "--json")
    assert out1 == out2


def test_file_path_system(tmp_path, capsys):
    p = tmp_path / "mini.psys"
    p.write_text("system mini\nvars q p\nJ[1][2] = 1\nH = p^2\n")
    code, out, _ = run(capsys, "all", str(p))
    assert code == 0
    assert "rank: 2" in out


def test_parse_error_is_usage_error(tmp_path, capsys):
    p = tmp_path / "bad.psys"
    p.write_text("system bad\nvars x y\nJ[1][2] = x +\n")
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2
    assert "bad.psys" in err
