import json
import subprocess
import sys

import pytest

from glsm.cli import main

CONE = """
[ambient]
dim = 3
metric = [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]

[immersion]
chart_dim = 2
components = ["u1", "u1*cos(u2)", "u1*sin(u2)"]
domain = [[0.5, 2.0], [-3.0, 3.0]]

[sampling]
n_points = 2
"""


def test_analyze_config_to_stdout(tmp_path, capsys):
    cfg = tmp_path / "cone.toml"
    cfg.write_text(CONE)
    assert main(["analyze", "--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["points"]) == 2


def test_analyze_catalog_markdown_to_file(tmp_path):
    out = tmp_path / "r.md"
    code = main(["analyze", "--catalog", "golden-light-cone", "--points", "2", "--format", "md", "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith("# glsm report: golden-light-cone")


def test_analyze_overrides_and_theorem_filter(tmp_path, capsys):
    args = ["analyze", "--catalog", "light-cone", "--points", "1", "--seed", "7", "--fd-step", "2e-5", "--tol", "2e-6"]
    assert main(args + ["--theorems", "s3.thm.metric-connection"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["sampling"]["seed"] == 7
    assert doc["config"]["numeric"]["h_fd"] == 2e-5
    assert [t["id"] for t in doc["theorems"]] == ["s3.thm.metric-connection"]


@pytest.mark.parametrize(
    "args",
    [
        ["analyze", "--catalog", "no-such-entry"],
        ["analyze", "--catalog", "light-cone", "--theorems", "bogus"],
        ["catalog", "show", "no-such-entry"],
        ["search", "--class", "Transversal", "--dim", "8", "--signature", "4;4", "--rank", "2"],
        ["search", "--class", "Transversal", "--dim", "8", "--signature", "4,3", "--rank", "2"],
    ],
)
def test_configuration_errors_exit_2(args, capsys):
    assert main(args) == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_config_file_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(CONE.replace('"u1*sin(u2)"', '"sqrt(u1"'))
    assert main(["analyze", "--config", str(cfg)]) == 2
    assert "position 7" in capsys.readouterr().err


def test_catalog_list_and_show(capsys):
    assert main(["catalog", "list"]) == 0
    listing = capsys.readouterr().out
    assert "radical-transversal-r2" in listing
    assert main(["catalog", "show", "null-plane-r22"]) == 0
    assert "[ambient]" in capsys.readouterr().out


def test_search_not_found_exits_1_and_writes_closest(tmp_path, capsys):
    out = tmp_path / "closest.toml"
    args = ["search", "--class", "RadicalTransversal", "--dim", "8", "--signature", "4,4", "--rank", "2"]
    assert main(args + ["--budget", "1000", "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "not found" in err and "best residual" in err
    assert "[ambient]" in out.read_text()


def test_search_rank_one_exits_1(capsys):
    assert main(["search", "--class", "Transversal", "--dim", "6", "--signature", "3,3", "--rank", "1"]) == 1
    assert "g(P xi, xi)" in capsys.readouterr().err


def test_console_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "glsm.cli", "catalog", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "light-cone" in res.stdout
