import json
import os
import subprocess
import sys

import pytest

from sepcoset_lab import cli
from sepcoset_lab.separating_cosets import TheoremViolation


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_dist_json(capsys):
    code, out = run(capsys, "dist", "1", "(ab)^4", "--model", "fc", "--D", "5")
    rep = json.loads(out)
    assert code == 0
    assert rep["schema"] == "sepcoset-lab/1"
    assert (rep["distance"], rep["y_distance"], rep["stable"]) == (1, 1, True)


def test_csv_and_text(capsys):
    code, out = run(capsys, "dist", "1", "aba", "--model", "fp", "--format", "csv")
    head, row = out.strip().splitlines()
    assert code == 0 and "distance" in head.split(",") and ",3," in row
    code, out = run(capsys, "phi", "b^2aba", "--model", "fc", "--format", "text")
    assert 'labels: ["x:b", "x:a^-1", "h:(ab)^2", "x:a"]' in out


def test_sepcosets_records(capsys):
    _, out = run(capsys, "sepcosets", "1", "(ab)^4", "--model", "fc", "--D", "5")
    recs = json.loads(out)["records"]
    assert [(r["coset"], r["gap"]) for r in recs] == [("1", 8)]


def test_tailcheck_sequences(capsys):
    code, out = run(capsys, "tailcheck", "pre=[2,3];per=[0,1]", "pre=[9];per=[1,0]")
    rep = json.loads(out)
    assert code == 0 and rep["equivalent"] and rep["witness"] == [2, 2]


def test_f4_free_product(capsys):
    code, out = run(capsys, "f4", "period=[h:a,h:b]", "period=[h:b^4,h:a^2]", "period=[h:a^2,h:b^2]",
                    "--model", "fp", "--D", "1")
    rep = json.loads(out)
    assert code == 0 and rep["F"] == [] and len(rep["S"]) == 12


@pytest.mark.parametrize("argv", [
    ["dist", "1", "a", "--model", "fc", "--D", "0"],
    ["dist", "1", "a", "--model", "nosuch"],
    ["verify", "nosuch", "--model", "fp"],
    ["dist", "1", "a", "--budget", "1,2"],
])
def test_usage_errors_exit_2(argv):
    try:
        code = cli.main(argv)
    except SystemExit as e:
        code = e.code
    assert code == 2


def test_inconclusive_exit_3(capsys):
    assert cli.main(["tailcheck", "period=[h:ab^3, x:a]", "period=[h:ab^3, x:a]",
                     "--depth", "2", "--model", "fc"]) == 3
    assert cli.main(["geodesics", "1", "b^2aba", "--model", "fc", "--budget", "1,8,2"]) == 3


def test_violation_exit_1(monkeypatch, capsys):
    def boom(args, model, D):
        raise TheoremViolation("planted")
    monkeypatch.setitem(cli.COMMANDS, "dist", boom)
    assert cli.main(["dist", "1", "a"]) == 1
    assert "planted" in capsys.readouterr().err


def test_verify_writes_report_and_figures(tmp_path):
    code = cli.main(["verify", "all", "--model", "fp", "--samples", "10", "--polygons", "200",
                     "--radius", "4", "--out", str(tmp_path)])
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["status"] == "pass"
    assert {p["status"] for p in rep["properties"]} == {"pass"}
    assert (tmp_path / "growth.png").stat().st_size > 0
    assert (tmp_path / "chat.png").stat().st_size > 0


def test_cache_does_not_change_answers(tmp_path, monkeypatch, capsys):
    from sepcoset_lab import y_graph
    argv = ["dist", "1", "b^2aba", "--model", "fc", "--D", "5"]
    y_graph.clear_cache()
    _, plain = run(capsys, *argv)
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path))
    y_graph.clear_cache()
    _, first = run(capsys, *argv)
    assert any(name.startswith("ymember_") for name in os.listdir(tmp_path))
    y_graph.clear_cache()
    _, second = run(capsys, *argv)
    assert plain == first == second


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "sepcoset_lab", "dist", "1", "aba", "--model", "fp"],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["distance"] == 3
