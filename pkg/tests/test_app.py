import json

import pytest

from app import build_parser, main


def _run(tmp_path, *argv):
    return main(list(argv) + ["--output", str(tmp_path), "--workers", "1"])


def test_parser_requires_a_command():
    with pytest.raises(SystemExit) as raised:
        build_parser().parse_args([])
    assert raised.value.code == 1


def test_unknown_flag_exits_with_usage_status():
    with pytest.raises(SystemExit) as raised:
        main(["exclude", "--speed", "3"])
    assert raised.value.code == 1


def test_critical(tmp_path, capsys):
    assert _run(tmp_path, "critical", "--L", "100") == 0
    assert "2 critical points" in capsys.readouterr().out


def test_invalid_beta_is_a_settings_error(tmp_path):
    assert _run(tmp_path, "critical", "--beta", "2.5") == 1


def test_small_L_is_a_usage_error(tmp_path):
    assert _run(tmp_path, "critical", "--L", "0.01") == 1


def test_orbit_writes_the_trace(tmp_path):
    assert _run(tmp_path, "orbit", "--L", "1000", "--a", "0.37", "--n-max", "10") == 0
    lines = [line for line in (tmp_path / "orbit.csv").read_text().splitlines() if not line.startswith("#")]
    assert len(lines) == 11


def test_critical_index_out_of_range(tmp_path):
    assert _run(tmp_path, "orbit", "--c", "5") == 1


def test_returns(tmp_path, capsys):
    assert _run(tmp_path, "returns", "--a", "0.37", "--n-max", "30") == 0
    assert (tmp_path / "returns.csv").exists()
    assert "free steps" in capsys.readouterr().out


def test_check_prints_one_json_line_per_condition_and_critical_point(tmp_path, capsys):
    assert _run(tmp_path, "check", "--a", "0.37", "--n", "30", "--L", "1000") == 0
    reports = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert len(reports) == 8
    assert [report["kind"] for report in reports] == ["MIS", "X", "Y", "W"] * 2
    assert [report["c"] for report in reports] == [0] * 4 + [1] * 4
    for report in reports:
        assert report["holds"] == (report["firstFailure"] is None)
        assert report["horizon"] <= 30


def test_exclude_then_report(tmp_path, capsys):
    assert _run(tmp_path, "exclude", "--samples", "200", "--n-max", "5", "--seed", "3") == 0
    content = json.loads((tmp_path / "records.json").read_text())
    assert content["records"][0]["samples"] == 200
    assert content["config"]["run"]["seed"] == 3
    assert (tmp_path / "survivors.csv").exists()
    trend = (tmp_path / "trend.csv").read_text()

    (tmp_path / "trend.csv").unlink()
    assert _run(tmp_path, "report") == 0
    assert (tmp_path / "trend.csv").read_text() == trend
    assert "fraction" in capsys.readouterr().out


def test_report_without_records_is_a_file_error(tmp_path):
    assert _run(tmp_path, "report") == 3


def test_sweep_with_bisection(tmp_path):
    assert _run(tmp_path, "sweep", "--L-list", "100", "1000", "--mode", "bisect", "--min-width", "0.05",
                "--n-max", "2") == 0
    assert (tmp_path / "cells_L100.csv").exists()
    assert (tmp_path / "plot_trend_n2.dat").exists()


def test_verify(tmp_path):
    assert _run(tmp_path, "verify", "--lemma", "distrem", "--trials", "10", "--n-max", "10") == 0
    content = json.loads((tmp_path / "lemma_distrem.json").read_text())
    assert content["trials"] == 10
    assert (tmp_path / "violations.csv").exists()


def test_config_file_is_seeded(tmp_path):
    settings = tmp_path / "settings.json"
    assert _run(tmp_path, "critical", "--config", str(settings)) == 0
    assert json.loads(settings.read_text())["run"]["L"] == 1000.0


def test_verify_needs_a_lemma(tmp_path):
    with pytest.raises(SystemExit) as raised:
        _run(tmp_path, "verify", "distrem")
    assert raised.value.code == 1


def test_reruns_with_the_same_seed_write_identical_csv_files(tmp_path):
    arguments = ("exclude", "--samples", "300", "--n-max", "6", "--seed", "11", "--L", "1000")
    assert _run(tmp_path, *arguments) == 0
    first = {name: (tmp_path / name).read_bytes() for name in ("survivors.csv", "trend.csv")}
    assert _run(tmp_path, *arguments) == 0
    assert {name: (tmp_path / name).read_bytes() for name in first} == first


def test_bisection_reruns_write_identical_cells(tmp_path):
    arguments = ("exclude", "--mode", "bisect", "--min-width", "0.01", "--n-max", "2", "--L", "1000")
    assert _run(tmp_path, *arguments) == 0
    first = (tmp_path / "cells.csv").read_bytes()
    assert _run(tmp_path, *arguments) == 0
    assert (tmp_path / "cells.csv").read_bytes() == first
