"""Command-line driver: JSON configs in, CSV + JSON summaries out,
deterministic artifacts, and non-zero exits on bad input."""

import json

import pytest

from pfhom import __version__
from pfhom.cli import main, run


def _run(tmp_path, config, name="job"):
    prefix = tmp_path / name
    code = run(config, out_prefix=str(prefix))
    return code, prefix.with_suffix(".csv"), tmp_path / f"{name}.summary.json"


def _summary(path):
    with open(path) as fh:
        return json.load(fh)


def test_cell_bulk_command(tmp_path):
    config = {
        "command": "cell-bulk",
        "f": {"kind": "homogeneous", "params": {"c": 2.0}},
        "xi": [1.0, 0.0], "x": [0.0, 0.0], "rho": 2.0, "h": 0.25,
    }
    code, csv_path, summary_path = _run(tmp_path, config)
    assert code == 0
    doc = _summary(summary_path)
    assert doc["summary"]["normalised"] == pytest.approx(2.0, abs=1e-10)
    assert doc["version"] == __version__
    assert doc["config"] == config
    header = csv_path.read_text().splitlines()[0]
    assert "normalised" in header


def test_profile1d_command_deterministic(tmp_path):
    config = {"command": "profile1d", "p": 2.0, "L": 20.0, "N": 2000}
    code1, csv1, s1 = _run(tmp_path, config, "a")
    code2, csv2, s2 = _run(tmp_path, config, "b")
    assert code1 == code2 == 0
    assert csv1.read_bytes() == csv2.read_bytes()
    assert _summary(s1)["summary"]["value"] == pytest.approx(1.0, abs=1e-3)


def test_validate_command(tmp_path):
    config = {
        "command": "validate",
        "integrand": {"kind": "checkerboard", "role": "bulk",
                      "params": {"values": [1.0, 4.0]}},
        "sample_count": 50,
    }
    code, _, summary_path = _run(tmp_path, config)
    assert code == 0
    assert _summary(summary_path)["summary"]["all_passed"] is True


def test_fidelity_command_reports_oracle(tmp_path):
    config = {
        "command": "fidelity", "preset": "step", "count": 65,
        "eps_list": [0.25, 0.125],
    }
    code, csv_path, summary_path = _run(tmp_path, config)
    assert code == 0
    doc = _summary(summary_path)
    assert "oracle" in doc["summary"]
    assert len(doc["summary"]["values"]) == 2
    assert len(csv_path.read_text().splitlines()) == 3


def test_stochastic_mc_command(tmp_path):
    config = {
        "command": "stochastic", "check": "mc", "kind": "bulk",
        "values": [1.0, 4.0], "probabilities": [0.5, 0.5],
        "param": [1.0, 0.0], "r": 4.0, "sample_count": 3,
    }
    code, csv_path, summary_path = _run(tmp_path, config)
    assert code == 0
    doc = _summary(summary_path)
    assert 1.0 <= doc["summary"]["mean"] <= 4.0
    assert len(csv_path.read_text().splitlines()) == 4


def test_unknown_command_exits_2_without_artifacts(tmp_path):
    code, csv_path, summary_path = _run(tmp_path, {"command": "frobnicate"})
    assert code == 2
    assert not csv_path.exists() and not summary_path.exists()


def test_missing_field_exits_2(tmp_path):
    code, csv_path, _ = _run(tmp_path, {"command": "profile1d", "p": 2.0})
    assert code == 2
    assert not csv_path.exists()


def test_invalid_options_exit_2(tmp_path):
    config = {"command": "profile1d", "p": 2.0, "L": 5.0, "N": 100,
              "opts": {"bogus_knob": 1}}
    code, _, _ = _run(tmp_path, config)
    assert code == 2
    code = run({"command": "profile1d", "p": 2.0, "L": 5.0, "N": 100},
               out_prefix=str(tmp_path / "j"), jobs=0)
    assert code == 2


def test_main_reads_config_file(tmp_path):
    config_path = tmp_path / "cfg.json"
    config_path.write_text(json.dumps(
        {"command": "profile1d", "p": 2.0, "L": 5.0, "N": 200}
    ))
    out = tmp_path / "out"
    assert main([str(config_path), "--out", str(out)]) == 0
    assert (tmp_path / "out.csv").exists()
    assert (tmp_path / "out.summary.json").exists()


def test_main_bad_config_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main([str(bad)]) == 2
    assert main([str(tmp_path / "missing.json")]) == 2
