import json
import os
import xml.etree.ElementTree as ET

import pytest

from dressedstates.cli import main
from dressedstates.output import read_csv

SMALL = ["--set", "grid.box=204.8", "--set", "spectrum.n_states=3", "--set", "laser.T=60"]
SCAN = ["--tau-min", "-60", "--tau-max", "60", "--tau-step", "60"]


def _run(args, out):
    return main(args + ["--out", str(out)])


def test_bound(tmp_path, capsys):
    assert _run(["bound"], tmp_path) == 0
    header, rows = read_csv(tmp_path / "bound_states.csv")
    assert header == ["n", "energy_au", "energy_ev"]
    assert len(rows) == 5 and rows[0][0] == "0"
    assert float(rows[1][1]) == pytest.approx(-0.40876086, abs=1e-7)
    assert "-11.12" in capsys.readouterr().out
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["version"] and "grid.dz = 0.1" in manifest["config"]
    assert set(manifest["stages_s"]) == {"spectrum"}


@pytest.mark.parametrize("extra", [["--set", "bogus.key=1"], ["--set", "grid.dz=-1"], ["--set", "grid.box=819.3"],
                                   ["--set", "nonsense"]])
def test_config_errors_exit_2(tmp_path, extra):
    assert _run(["bound"] + extra, tmp_path) == 2


def test_missing_config_file(tmp_path):
    assert _run(["bound", "--config", str(tmp_path / "nope.txt")], tmp_path) == 1


def test_propagate_schema(tmp_path):
    assert _run(["propagate", "--fields", "probe", "--initial", "0", "--stride", "50"] + SMALL, tmp_path) == 0
    header, rows = read_csv(tmp_path / "populations.csv")
    assert header == ["t_au", "t_fs", "pop_0", "pop_1", "pop_2", "ionized", "norm"]
    assert float(rows[-1][3]) > 1e-6
    assert _run(["propagate", "--initial", "9"] + SMALL, tmp_path) == 2


def test_dressed_outputs(tmp_path):
    assert _run(["dressed", "--family", "a", "--e-max", "0.02"] + SMALL, tmp_path) == 0
    header, rows = read_csv(tmp_path / "amplitudes.csv")
    assert header == ["t_au", "t_fs", "abs2_a_0", "abs2_a_1", "abs2_a_2"]
    header, rows = read_csv(tmp_path / "z10.csv")
    assert header == ["t_au", "t_fs", "re", "im", "abs2"]


def test_numerical_error_exit_3(tmp_path):
    args = ["dressed", "--family", "d", "--e-max", "0.3", "--set", "dressed.dynamic_dt=0.1"] + SMALL
    assert _run(args, tmp_path) == 3


def test_transition_json(tmp_path, capsys):
    assert _run(["transition", "--i", "0", "--f", "1", "--tau", "20"] + SMALL, tmp_path) == 0
    doc = json.loads((tmp_path / "transition.json").read_text())
    assert doc["i"] == 0 and doc["f"] == 1 and doc["tau"] == 20.0
    assert 0 < doc["p_fi"] < 1e-3
    assert set(doc["alpha"]) == {"0", "1"}
    assert json.loads(capsys.readouterr().out)["p_fi"] == doc["p_fi"]


def test_depletion_exit_4(tmp_path):
    assert _run(["transition", "--set", "model.amp_floor=2"] + SMALL, tmp_path) == 4


def test_dipole_response_outputs(tmp_path):
    assert _run(["dipole-response", "--i", "0", "--tail", "50"] + SMALL, tmp_path) == 0
    for name in ("dipole.csv", "dipole_cross.csv"):
        header, rows = read_csv(tmp_path / name)
        assert header == ["t_au", "t_fs", "d"]


def test_scan_is_bit_reproducible(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    args = ["scan", "--i", "1", "--f", "0", "--families", "u,p"] + SCAN + SMALL
    assert _run(args, a) == 0
    assert _run(args + ["--workers", "2"], b) == 0
    header, rows = read_csv(a / "scan.csv")
    assert header == ["tau_au", "tau_fs", "ratio_u", "ratio_a", "ratio_d", "ratio_p", "ratio_tdse", "flags"]
    assert len(rows) == 3 and rows[0][3] == "nan"
    assert (a / "scan.csv").read_bytes() == (b / "scan.csv").read_bytes()
    # the manifest alone is enough to reproduce the run
    assert _run(["scan", "--config", str(a / "manifest.json")], c) == 0
    assert (a / "scan.csv").read_bytes() == (c / "scan.csv").read_bytes()
    ET.parse(a / "scan.svg")
    assert sorted(os.listdir(a)) == ["manifest.json", "scan.csv", "scan.svg"]


def test_reproduce_fig1(tmp_path):
    assert _run(["reproduce", "fig1"] + SMALL, tmp_path) == 0
    header, rows = read_csv(tmp_path / "fig1.csv")
    assert header == ["t_au", "t_fs", "abs_field", "a1_u", "a1_a", "a1_d", "a1_p", "tdse"]
    root = ET.parse(tmp_path / "fig1.svg").getroot()
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) >= 5
