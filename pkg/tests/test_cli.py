"""CLI behavior: exit codes, report shape, artifact dumping."""

import json

from click.testing import CliRunner

from dirfib.cli import main


def write_scenario(tmp_path, tasks, **extra):
    data = {"version": 1, "grid": {"resolution": 21}, "tolerance": 1e-9,
            "seed": 3, "tasks": tasks}
    data.update(extra)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(data))
    return str(path)


MINI = [
    {"name": "theta", "kind": "theta"},
    {"name": "no-strict-lift", "kind": "wedge_strict",
     "expect": "INFEASIBLE"},
]


def test_run_reports_verdicts_and_exits_zero(tmp_path):
    path = write_scenario(tmp_path, MINI)
    result = CliRunner().invoke(main, ["run", path])
    assert result.exit_code == 0
    report = json.loads(result.output)
    verdicts = {t["name"]: t["verdict"] for t in report["tasks"]}
    assert verdicts == {"theta": "PASS", "no-strict-lift": "INFEASIBLE"}
    assert report["summary"] == {"total": 2, "as_expected": 2,
                                 "unexpected": 0}


def test_unexpected_verdict_exits_one(tmp_path):
    tasks = [{"name": "no-strict-lift", "kind": "wedge_strict"}]  # wants PASS
    path = write_scenario(tmp_path, tasks)
    result = CliRunner().invoke(main, ["run", path])
    assert result.exit_code == 1


def test_missing_file_exits_two(tmp_path):
    result = CliRunner().invoke(main, ["run", str(tmp_path / "nope.json")])
    assert result.exit_code == 2
    assert "error" in result.output


def test_malformed_scenarios_exit_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert CliRunner().invoke(main, ["run", str(bad)]).exit_code == 2
    for tasks in ([{"name": "x", "kind": "unheard_of"}],
                  [{"name": "x", "kind": "theta"},
                   {"name": "x", "kind": "theta"}],
                  [{"name": "x", "kind": "theta", "expect": "MAYBE"}]):
        path = write_scenario(tmp_path, tasks)
        assert CliRunner().invoke(main, ["run", path]).exit_code == 2
    wrong_version = tmp_path / "v.json"
    wrong_version.write_text(json.dumps({"version": 99, "tasks": []}))
    assert CliRunner().invoke(main, ["run", str(wrong_version)]).exit_code \
        == 2


def test_grid_and_tol_overrides_are_reported(tmp_path):
    path = write_scenario(tmp_path, [{"name": "theta", "kind": "theta"}])
    result = CliRunner().invoke(main, ["run", path, "--grid", "11",
                                       "--tol", "1e-6"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["grid"]["resolution"] == 11
    assert report["tolerance"] == 1e-6


def test_parallel_matches_serial(tmp_path):
    path = write_scenario(tmp_path, MINI)
    runner = CliRunner()
    serial = json.loads(runner.invoke(main, ["run", path]).output)
    parallel = json.loads(runner.invoke(main, ["run", path,
                                               "--parallel"]).output)
    strip = lambda rep: [{k: v for k, v in t.items() if k != "ms"}
                         for t in rep["tasks"]]
    assert strip(serial) == strip(parallel)


def test_dump_writes_sample_csvs(tmp_path):
    tasks = [{"name": "diag", "kind": "wedge_weak_lift"}]
    path = write_scenario(tmp_path, tasks)
    out = tmp_path / "dumps"
    result = CliRunner().invoke(main, ["run", path, "--dump", str(out)])
    assert result.exit_code == 0
    csvs = sorted(f.name for f in out.iterdir())
    assert csvs == ["diag_diagonal_lift.csv", "diag_straightening.csv"]
    lines = (out / "diag_diagonal_lift.csv").read_text().splitlines()
    assert lines[0] == "object_id,t,coord_0,coord_1"
    # the lifted path runs along the diagonal
    last = lines[-1].split(",")
    assert float(last[2]) == float(last[3]) == 1.0


def test_explain_narrates_a_report(tmp_path):
    path = write_scenario(tmp_path, MINI)
    runner = CliRunner()
    report_path = tmp_path / "report.json"
    report_path.write_text(runner.invoke(main, ["run", path]).output)
    result = runner.invoke(main, ["explain", str(report_path)])
    assert result.exit_code == 0
    assert "2/2 tasks matched" in result.output
    assert "no-lift argument" in result.output
    missing = runner.invoke(main, ["explain", str(tmp_path / "nope.json")])
    assert missing.exit_code == 2
