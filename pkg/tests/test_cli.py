import json
import shutil
from pathlib import Path

import numpy as np
import pytest
import yaml

from hybridqm import cli
from hybridqm.config import SCENARIOS, fingerprint, load_config, validate
from hybridqm.errors import ValidationError
from hybridqm.golden import format_value, read_csv, verify_golden

RABI = {
    "scenario": "rabi",
    "panels": {
        "a": {
            "qubit": {"type": "transmon", "e_j_max": 10, "e_c": 0.5},
            "omega_b": 4.5,
            "g": 0.001,
            "flux_offsets": [0.0, 0.0002],
            "time": {"t1": 500, "steps": 11},
        }
    },
}


def _write(tmp_path, doc, name="cfg.yaml") -> Path:
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


def _panel(**changes):
    doc = json.loads(json.dumps(RABI))
    doc["panels"]["a"].update(changes)
    return doc


def test_run_writes_tables_and_manifest(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", str(_write(tmp_path, RABI)), "--out", str(out)]) == 0
    manifest = json.loads((out / "run-manifest.json").read_text())
    assert manifest["scenario"] == "rabi"
    assert manifest["fingerprint"] == fingerprint(RABI)
    assert set(manifest["tables"]) == {"a.csv", "a_summary.csv"}
    cols, data = read_csv(out / "a.csv")
    assert cols == ("flux", "t", "p_e", "log_neg", "n_b") and data.shape == (22, 5)


def test_rerun_is_byte_identical(tmp_path):
    cfg = _write(tmp_path, RABI)
    for d in ("one", "two", "three"):
        args = ["run", str(cfg), "--out", str(tmp_path / d)] + (["--threads", "2"] if d == "three" else [])
        assert cli.main(args) == 0
    for name in ("a.csv", "a_summary.csv"):
        ref = (tmp_path / "one" / name).read_bytes()
        assert (tmp_path / "two" / name).read_bytes() == ref
        assert (tmp_path / "three" / name).read_bytes() == ref


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env-out"))
    assert cli.main(["run", str(_write(tmp_path, RABI))]) == 0
    assert (tmp_path / "env-out" / "a.csv").exists()


def test_missing_omega_b_exits_2_naming_field(tmp_path, capsys):
    doc = _panel()
    del doc["panels"]["a"]["omega_b"]
    assert cli.main(["run", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "omega_b" in err and len(err.strip().splitlines()) == 1
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize(
    "doc",
    [
        _panel(gamma=-0.001),
        _panel(mech_dim=0),
        _panel(colour="blue"),
        _panel(flux=[0.28]),
        {**RABI, "scenario": "nope"},
        {**RABI, "extra": 1},
        {"scenario": "rabi"},
    ],
    ids=["negative-rate", "zero-dim", "unknown-key", "flux-and-offsets", "bad-scenario", "top-level-key", "no-panels"],
)
def test_invalid_configs_exit_2(tmp_path, doc):
    assert cli.main(["run", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 2


def test_unreadable_config_exits_2(tmp_path):
    assert cli.main(["run", str(tmp_path / "missing.yaml")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("scenario: [unclosed")
    assert cli.main(["run", str(bad)]) == 2


def test_numerical_guard_exits_3(tmp_path, capsys):
    doc = {
        "scenario": "dispersive",
        "panels": {
            "a": {
                "qubit": {"type": "transmon", "e_j_max": 10, "e_c": 0.5},
                "cavity_omega": 5.7774108603509857,
                "g": 0.05,
                "flux": [0.0],
            }
        },
    }
    assert cli.main(["run", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 3
    assert "numerical guard" in capsys.readouterr().err


def test_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert all(s in out for s in SCENARIOS)


def test_fingerprint_ignores_description_and_key_order():
    a = dict(RABI, description="x")
    b = {"panels": RABI["panels"], "scenario": "rabi"}
    assert fingerprint(a) == fingerprint(b)
    assert fingerprint(_panel(g=0.0011)) != fingerprint(RABI)


def test_validate_applies_defaults():
    cfg = validate(RABI)
    kind, fields = cfg.panels["a"]
    assert kind == "rabi" and fields["mech_dim"] == 4 and fields["gamma"] == 0.0


def test_qubit_spec_exclusive_forms():
    with pytest.raises(ValidationError):
        validate(_panel(qubit={"type": "transmon", "e_j_max": 10, "e_j1": 5, "e_c": 0.5}))


def test_format_value_is_fixed_width_and_folds_negative_zero():
    assert format_value(-0.0) == format_value(0.0) == "0.0000000000000000e+00"
    assert float(format_value(np.pi)) == np.pi


# --- golden regression -------------------------------------------------------------


@pytest.fixture
def golden_copy(tmp_path, goldens):
    for name in ("fig07", "fig11"):
        shutil.copytree(goldens / name, tmp_path / name)
    return tmp_path


def test_make_golden_then_verify(tmp_path):
    cfg = _write(tmp_path, RABI)
    assert cli.main(["make-golden", str(cfg), str(tmp_path / "g" / "rabi"), "--figure", "8"]) == 0
    meta = json.loads((tmp_path / "g" / "rabi" / "golden.json").read_text())
    assert meta["figure"] == "8" and meta["tables"] == {"a": "trajectory", "a_summary": "trajectory"}
    assert cli.main(["verify", str(tmp_path / "g")]) == 0


def test_tiny_perturbation_passes(golden_copy):
    for csv in golden_copy.glob("*/*.csv"):
        lines = csv.read_text().splitlines()
        body = [",".join(format_value(float(v) + 1e-12) for v in line.split(",")) for line in lines[1:]]
        csv.write_text("\n".join([lines[0]] + body) + "\n")
    assert cli.main(["verify", str(golden_copy)]) == 0


def _perturb_rate(directory: Path, refresh_fingerprint: bool):
    cfg_path = directory / "config.yaml"
    doc = yaml.safe_load(cfg_path.read_text())
    doc["panels"]["a"]["gamma"] *= 1.1
    cfg_path.write_text(yaml.safe_dump(doc))
    if refresh_fingerprint:
        meta_path = directory / "golden.json"
        meta = json.loads(meta_path.read_text())
        meta["fingerprint"] = load_config(cfg_path).fingerprint
        meta_path.write_text(json.dumps(meta))


def test_rate_change_is_flagged_stale(golden_copy, capsys):
    _perturb_rate(golden_copy / "fig07", refresh_fingerprint=False)
    assert cli.main(["verify", str(golden_copy)]) == 1
    out = capsys.readouterr().out
    assert "STALE" in out and "PASS     fig11" in out


def test_rate_change_fails_numeric_comparison(golden_copy):
    _perturb_rate(golden_copy / "fig07", refresh_fingerprint=True)
    res = verify_golden(golden_copy / "fig07")
    assert res.status == "FAIL"
    assert verify_golden(golden_copy / "fig11").status == "PASS"


def test_missing_golden_is_skipped(golden_copy, capsys):
    (golden_copy / "empty").mkdir()
    (golden_copy / "fig11" / "a.csv").unlink()
    assert cli.main(["verify", str(golden_copy)]) == 0
    out = capsys.readouterr().out
    assert out.count("SKIPPED") == 2
