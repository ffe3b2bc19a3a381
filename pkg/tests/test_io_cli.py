import copy
import json
import math

import numpy as np
import pytest

from cpcomb import cli, io
from cpcomb.comb import generate_comb
from cpcomb.config import load_config, parse_config
from cpcomb.errors import ParseError, ValidationError
from cpcomb.lattice import Box
from cpcomb.spectral import autocorr_closed, diffraction_peaks

from conftest import CONFIG_DIR


@pytest.fixture
def golden_data():
    return json.loads((CONFIG_DIR / "golden.json").read_text())


@pytest.fixture
def small_data(golden_data):
    data = copy.deepcopy(golden_data)
    data["boxes"] = {"base": [[0.0, 50.0]], "growth": 4.0, "steps": 3}
    data["analysis"]["diffraction_box"] = [[0.0, 5000.0]]
    data["analysis"]["almost_period_search"] = [[0.0, 200.0]]
    data["analysis"]["top_peaks"] = 3
    data["analysis"]["top_autocorr"] = 5
    data["tolerances"] = {"density": 0.05, "autocorr": 0.05, "diffraction": 0.1}
    return data


# -- config ----------------------------------------------------------------------

def test_parse_golden_config():
    cfg = parse_config(CONFIG_DIR / "golden.json")
    assert (cfg.scheme.d, cfg.scheme.m) == (1, 1)
    assert cfg.scheme.det_abs == pytest.approx(math.sqrt(5.0))
    assert cfg.weight.kind == "gaussian"
    assert cfg.thresholds.eps_trunc == 1e-12
    assert cfg.boxes.largest.volume == pytest.approx(1e4)


def test_basis_size_mismatch_names_field(golden_data):
    golden_data["scheme"]["basis"] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    with pytest.raises(ValidationError) as info:
        load_config(golden_data)
    assert "basis" in info.value.field


def test_negative_eps_trunc_names_field(golden_data):
    golden_data["thresholds"]["eps_trunc"] = -1.0
    with pytest.raises(ValidationError) as info:
        load_config(golden_data)
    assert info.value.field == "thresholds.eps_trunc"


def test_unknown_field_rejected(golden_data):
    golden_data["scheme"]["colour"] = "blue"
    with pytest.raises(ValidationError):
        load_config(golden_data)


def test_unknown_weight_kind(golden_data):
    golden_data["weight"] = {"kind": "lorentzian"}
    with pytest.raises(ValidationError) as info:
        load_config(golden_data)
    assert info.value.field == "weight.kind"


def test_parse_error_reports_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "scheme": {\n    "d": 1,,\n  }\n}\n')
    with pytest.raises(ParseError) as info:
        parse_config(bad)
    assert "line 3" in str(info.value)


# -- CSV -------------------------------------------------------------------------

def test_peak_csv_roundtrip(tmp_path, golden, gauss, unit_dec):
    peaks = diffraction_peaks(golden, gauss, unit_dec, Box([-5.0], [5.0]), internal_cut=5.0)
    path = io.write_peaks_csv(peaks, tmp_path / "peaks.csv")
    header = path.read_text().splitlines()[0]
    assert header == "k_1,z_1,z_2,eta_1,c_re,c_im,intensity"
    back = io.read_peaks_csv(path)
    np.testing.assert_array_equal(back["z"], peaks.z)
    np.testing.assert_allclose(back["c"], peaks.c, rtol=1e-11)
    np.testing.assert_allclose(back["intensity"], np.abs(back["c"]) ** 2, atol=1e-12)


def test_autocorr_csv_roundtrip(tmp_path, golden, gauss, unit_dec):
    table = autocorr_closed(golden, gauss, unit_dec, Box([-10.0], [10.0]))
    back = io.read_autocorr_csv(io.write_autocorr_csv(table, tmp_path / "a.csv"))
    np.testing.assert_allclose(back["l"], table.displacements, rtol=1e-11)
    np.testing.assert_allclose(back["eta"], table.eta, rtol=1e-11)


def test_comb_csv_header(tmp_path, golden, gauss, unit_dec):
    comb = generate_comb(golden, gauss, unit_dec, Box([0.0], [10.0]))
    lines = io.write_comb_csv(comb, tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "position_1,weight_re,weight_im"
    assert len(lines) == len(comb) + 1


def test_comparison_entry():
    e = io.comparison_entry(2.0, 2.02, 100.0)
    assert e["abs_err"] == pytest.approx(0.02)
    assert e["rel_err"] == pytest.approx(0.01)
    assert e["box_volume"] == 100.0


# -- CLI -------------------------------------------------------------------------

def test_validate_command(tmp_path, capsys):
    code = cli.main(["validate", "--config", str(CONFIG_DIR / "golden.json"), "--out", str(tmp_path)])
    assert code == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["scheme"]["injectivity_ok"] is True
    assert cert["truncation_radius"] == pytest.approx(3.0)
    assert json.loads(capsys.readouterr().out)["exit"] == 0


def test_compare_command_passes(tmp_path, small_data):
    code = cli.run("compare", load_config(small_data), tmp_path)
    assert code == 0
    report = json.loads((tmp_path / "comparison.json").read_text())
    assert report["pass"] is True
    assert len(report["autocorr"]) == 5
    assert set(report["density"][0]) == {"closed", "estimated", "abs_err", "rel_err", "box_volume"}


def test_compare_tolerance_failure(tmp_path, small_data):
    small_data["tolerances"]["density"] = 1e-12
    assert cli.run("compare", load_config(small_data), tmp_path) == cli.EXIT_TOLERANCE


def test_sharp_window_diffract_is_domain_error(tmp_path, capsys):
    code = cli.main(["diffract", "--config", str(CONFIG_DIR / "sharp_window.json"), "--out", str(tmp_path)])
    assert code == 3
    err = json.loads((tmp_path / "error.json").read_text())
    assert err["error"] == "NonSmoothWeight"
    assert json.loads(capsys.readouterr().out)["error"] == "NonSmoothWeight"


def test_sharp_window_density_runs(tmp_path):
    cfg = parse_config(CONFIG_DIR / "sharp_window.json")
    assert cli.run("density", cfg, tmp_path) == 0
    result = json.loads((tmp_path / "density.json").read_text())
    assert result["weyl"][-1][0] == pytest.approx(1 / math.sqrt(5.0), rel=0.01)


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert cli.main(["validate", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_singular_basis_is_domain_error(tmp_path, golden_data, capsys):
    golden_data["scheme"]["basis"] = [[1.0, 2.0], [1.0, 2.0]]
    path = tmp_path / "singular.json"
    path.write_text(json.dumps(golden_data))
    assert cli.main(["validate", "--config", str(path), "--out", str(tmp_path)]) == 3
    assert json.loads(capsys.readouterr().out)["error"] == "SingularBasis"


@pytest.mark.parametrize("command", ["generate", "autocorr", "diffract", "fourier-bohr", "injectivity",
                                     "almost-periods"])
def test_commands_write_outputs(tmp_path, small_data, command):
    assert cli.run(command, load_config(small_data), tmp_path) == 0
    assert any(tmp_path.iterdir())


@pytest.mark.parametrize("command,name", [("diffract", "peaks.csv"), ("autocorr", "autocorr.csv"),
                                          ("generate", "comb.csv")])
def test_outputs_deterministic(tmp_path, small_data, command, name):
    for run in ("a", "b"):
        cli.run(command, load_config(small_data), tmp_path / run, workers=2 if run == "b" else 1)
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
