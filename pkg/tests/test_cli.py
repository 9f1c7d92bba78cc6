import json
import os

import pytest

from fowler6.cli import main


def run(argv):
    return main(argv)


def test_audit_basic(tmp_path, capsys):
    assert run(["audit", "--n", "7", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "26.75" in out
    rep = json.loads((tmp_path / "audit_n7_m3.json").read_text())
    assert rep["K"][2] == 26.75
    assert rep["oracles_agree"] is True


def test_audit_fourth_order(tmp_path):
    assert run(["audit", "--n", "5", "--m", "2", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "audit_n5_m2.json").read_text())
    assert rep["K"][1] == 6.5
    assert rep["K"][0] == 25 / 16


def test_audit_domain_error(tmp_path, capsys):
    assert run(["audit", "--n", "6", "--out", str(tmp_path)]) == 2
    assert "exceed 2m" in capsys.readouterr().err


def test_periodic_domain_error(tmp_path):
    assert run(["periodic", "--n", "7", "--a0", "0.9", "--out", str(tmp_path)]) == 2


def test_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 7\nm = 3\nseed = 7\nformat = json\n")
    assert run(["audit", "--config", str(cfg), "--out", str(tmp_path)]) == 0


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 7\nwibble = 3\n")
    assert run(["audit", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_sweep_empty_grid(tmp_path, capsys):
    assert run(["sweep", "--a0", "", "--out", str(tmp_path)]) == 2


def test_sweep_bad_grid(tmp_path):
    assert run(["sweep", "--a0", "0.1:0.8:-0.1", "--out", str(tmp_path)]) == 2


def test_reconstruct_rejects_singular_origin(tmp_path, capsys):
    code = run(["reconstruct", "--n", "7", "--a0", "0.5", "--r-min", "0",
                "--r-max", "2.0", "--out", str(tmp_path)])
    assert code == 2
    assert "singular" in capsys.readouterr().err


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FOWLER6_OUT", str(tmp_path / "envdir"))
    assert run(["audit", "--n", "7"]) == 0
    assert (tmp_path / "envdir" / "audit_n7_m3.json").exists()


def test_cmode_plumbing(tmp_path, capsys):
    assert run(["audit", "--n", "7", "--c-mode", "paper-gamma", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "audit_n7_m3.json").read_text())
    assert rep["c_mode"] == "paper-gamma"
    assert rep["c_active"] == pytest.approx(2025 / 64)
    # the gamma-mode constant is not the self-consistent one, and the audit says so
    assert rep["discrepancies"]


def test_cmode_section1_requires_third_order(tmp_path, capsys):
    assert run(["audit", "--n", "9", "--m", "2", "--c-mode", "paper-section1",
                "--out", str(tmp_path)]) == 2


def test_tolerances_must_be_positive(tmp_path, capsys):
    assert run(["audit", "--n", "7", "--tol-rel", "-1", "--out", str(tmp_path)]) == 2
