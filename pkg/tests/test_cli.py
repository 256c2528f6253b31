"""Command-line behaviour: outputs, exit codes, determinism."""

import csv
import json
import math

import pytest

from fieldforge import cli, presets
from fieldforge.constants import C0
from fieldforge.scene import save_scene

FAST = ["--resolution", "10", "--edge-refinement", "1", "--n-freq", "5", "--gain-every", "0",
        "--angle-step", "10"]


@pytest.fixture(scope="module")
def dipole_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("scene") / "dipole.json"
    save_scene(presets.free_space_dipole(C0 / 28e9 / 2), path, units="mm")
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_design_writes_csv(tmp_path, capsys):
    assert cli.main(["design", "--f0", "28e9", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "design.csv")
    table = dict((r[0], r[1]) for r in rows[1:])
    assert float(table["L_m"]) == pytest.approx(2.145670e-3, abs=1e-9)
    assert len(read_csv(tmp_path / "oracle-zin.csv")) == 22
    assert "2.145670" in capsys.readouterr().out


def test_design_json(capsys):
    assert cli.main(["design", "--f0", "28e9", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["eps_eff"] == pytest.approx(6.225)


def test_missing_required_argument_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["design"])
    assert exc.value.code == cli.EXIT_USAGE


def test_negative_value_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["cavity", "--radius", "-1"])
    assert exc.value.code == cli.EXIT_USAGE


def test_empty_thickness_list_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep-thickness", "--thickness", ",", "--out", str(tmp_path)])
    assert exc.value.code == cli.EXIT_USAGE


def test_help_lists_exit_codes(capsys):
    with pytest.raises(SystemExit):
        cli.main(["simulate", "--help"])
    out = capsys.readouterr().out
    for code in range(10):
        assert f"\n  {code}  " in out


def test_cavity_budget_refusal(tmp_path, capsys):
    code = cli.main(["cavity", "--f-max", "100e9", "--budget", "1000", "--out", str(tmp_path)])
    assert code == cli.EXIT_ENUMERATION
    assert "budget" in capsys.readouterr().err


def test_cavity_outputs(tmp_path):
    code = cli.main(["cavity", "--section", "0.1", "--f-max", "5e9", "--focus", "4e9", "--window", "1e8",
                     "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "modes-a0.15-d0.1.csv")
    first = rows[1]
    assert first[0] == "TM" and (first[1], first[2], first[3]) == ("0", "1", "0")
    assert float(first[5]) == pytest.approx(0.765e9, rel=1e-3)
    assert (tmp_path / "density-a0.15-d0.1.svg").read_text().startswith("<svg")
    assert json.loads((tmp_path / "manifest.json").read_text())["exit_status"] == 0


def test_bad_scene_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["simulate", str(bad), "--out", str(tmp_path / "o")]) == cli.EXIT_SCENE


def test_cell_budget_exit(tmp_path, monkeypatch, dipole_file):
    monkeypatch.setenv("FIELDFORGE_CELL_BUDGET", "100")
    assert cli.main(["simulate", str(dipole_file), *FAST, "--out", str(tmp_path)]) == cli.EXIT_BUDGET


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["materials", "--out", str(blocker / "sub")]) == cli.EXIT_IO


def test_materials_table(tmp_path):
    assert cli.main(["materials", "--out", str(tmp_path)]) == 0
    rows = {r[0]: r for r in read_csv(tmp_path / "materials.csv")[1:] if r[1] == "cryo"}
    assert "Cu" in rows


@pytest.mark.slow
def test_simulate_outputs_and_determinism(tmp_path, dipole_file):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli.main(["simulate", str(dipole_file), *FAST, "--out", str(d)]) == 0
    csvs = sorted(p.name for p in a.glob("*.csv"))
    assert {"s-params.csv", "efficiency.csv", "grid.csv"} <= set(csvs)
    for name in csvs:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["exit_status"] == 0 and manifest["scene_hash"]
    rows = read_csv(a / "s-params.csv")
    assert len(rows) == 6 and all(math.isfinite(float(v)) for v in rows[1][1:3])
