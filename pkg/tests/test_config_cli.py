"""Config parsing, round trips, CLI subcommands, manifests, exit codes."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from levyclaw import cli
from levyclaw.config import (ConfigError, RunConfig, build_model,
                             default_config_dict, emit_config, parse_config,
                             parse_config_text)
from levyclaw.io import read_json, sha256_of


MINIMAL = '{"schema": "levyclaw/config/v1"}'


def test_minimal_config_fills_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg == RunConfig()
    assert cfg.grid.n == 512
    assert cfg.run.safety == 0.9
    assert cfg.diagnostics.entropies == ("square",)


def test_alpha_out_of_range():
    doc = '{"model": {"measure": {"kind": "fractional_laplacian", "alpha": 2.5}}}'
    with pytest.raises(ConfigError) as err:
        parse_config_text(doc)
    assert any("alpha" in path and "(0, 2)" in msg
               for path, msg in err.value.errors)


def test_duplicate_key_rejected():
    doc = '{"grid": {"n": 64, "n": 128}}'
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text(doc)


def test_unknown_key_rejected_with_path():
    doc = '{"grid": {"cells": 64}}'
    with pytest.raises(ConfigError) as err:
        parse_config_text(doc)
    assert any(path == "grid.cells" for path, _ in err.value.errors)


def test_all_errors_collected():
    doc = json.dumps({
        "model": {"measure": {"alpha": -1.0}, "flux": {"kind": "warp"}},
        "grid": {"n": 2},
        "run": {"safety": 7.0},
    })
    with pytest.raises(ConfigError) as err:
        parse_config_text(doc)
    paths = {path for path, _ in err.value.errors}
    assert {"model.measure.alpha", "model.flux.kind", "grid.n",
            "run.safety"} <= paths


def test_poly_flux_needs_coeffs():
    with pytest.raises(ConfigError, match="coeff"):
        parse_config_text('{"model": {"flux": {"kind": "poly"}}}')


def test_riemann_needs_periodic():
    doc = json.dumps({"grid": {"boundary": "zero"},
                      "initial": {"profile": "riemann"}})
    with pytest.raises(ConfigError, match="compactly"):
        parse_config_text(doc)


def _random_config(rng) -> RunConfig:
    doc = default_config_dict()
    doc["model"]["flux"] = rng.choice([
        {"kind": "burgers"},
        {"kind": "linear", "speed": float(rng.uniform(-2, 2))},
        {"kind": "zero"},
        {"kind": "poly", "coeffs": [0.0, 1.0, float(round(rng.uniform(-1, 1), 6))]},
    ])
    doc["model"]["diffusion"] = rng.choice([
        {"kind": "identity"},
        {"kind": "zero"},
        {"kind": "power", "m": float(round(rng.uniform(1.0, 3.0), 6))},
        {"kind": "piecewise", "knots": [-1.0, 0.5], "slopes": [0.5, 0.0, 2.0]},
    ])
    doc["model"]["measure"] = rng.choice([
        {"kind": "fractional_laplacian", "alpha": float(round(rng.uniform(0.2, 1.8), 6))},
        {"kind": "bounded", "mass": float(round(rng.uniform(0.5, 2.0), 6)),
         "radius": 1.0},
        {"kind": "tempered", "alpha": 0.8, "lambda": float(round(rng.uniform(0.5, 3), 6))},
    ])
    doc["grid"]["n"] = int(rng.choice([64, 128, 256]))
    doc["run"]["t_final"] = float(round(rng.uniform(0.05, 1.0), 6))
    doc["run"]["output_every"] = int(rng.integers(1, 20))
    doc["diagnostics"]["entropies"] = ["square", "kruzhkov:0.25"]
    return parse_config_text(json.dumps(doc))


def test_config_roundtrip_100_random():
    rng = np.random.default_rng(42)
    for _ in range(100):
        cfg = _random_config(rng)
        again = parse_config_text(emit_config(cfg))
        assert again == cfg


def test_build_model_from_config():
    cfg = parse_config_text(MINIMAL)
    model = build_model(cfg)
    assert model.n == 512
    assert model.flux.kind == "burgers"


# -- CLI end to end ---------------------------------------------------------------


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    out = root / "out"
    cfg = {
        "schema": "levyclaw/config/v1",
        "model": {"flux": {"kind": "burgers"},
                  "diffusion": {"kind": "identity"},
                  "measure": {"kind": "fractional_laplacian", "alpha": 1.0}},
        "grid": {"x0": -2.0, "length": 4.0, "n": 96, "boundary": "periodic"},
        "initial": {"profile": "bump", "height": 1.0, "width": 0.8},
        "run": {"t_final": 0.15, "output_every": 6, "output_dir": str(out)},
        "diagnostics": {"n_xi": 40, "entropies": ["square", "kruzhkov:0.5"]},
        "pair": {"initial": {"profile": "bump", "height": 0.8, "width": 0.8}},
    }
    cfg_path = root / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    assert cli.main(["run", str(cfg_path)]) == 0
    return root, cfg_path, out


def test_cli_run_manifest_complete(run_dir):
    _, _, out = run_dir
    manifest = read_json(out / "manifest.json")
    assert manifest["schema"] == "levyclaw/manifest/v1"
    assert manifest["invariants"]["max_principle"]
    for entry in manifest["outputs"]:
        path = out / entry["file"]
        assert path.exists()
        assert sha256_of(path) == entry["sha256"]


def test_cli_diagnose_and_byte_identical_rerun(run_dir):
    _, _, out = run_dir
    assert cli.main(["diagnose", str(out)]) == 0
    first = {name: (out / name).read_bytes()
             for name in ("n_field.csv", "m_field.csv", "residuals.json",
                          "bounds_report.json", "diagnostics_manifest.json")}
    assert cli.main(["diagnose", str(out)]) == 0
    for name, blob in first.items():
        assert (out / name).read_bytes() == blob, name
    dm = read_json(out / "diagnostics_manifest.json")
    for entry in dm["outputs"]:
        assert sha256_of(out / entry["file"]) == entry["sha256"]


def test_cli_pair(run_dir):
    root, cfg_path, _ = run_dir
    pair_out = root / "pair"
    assert cli.main(["pair", str(cfg_path), "--output", str(pair_out)]) == 0
    report = read_json(pair_out / "pair_report.json")
    assert report["contraction"]["contraction"]
    assert report["comparison"]["ordering"]
    dist = np.genfromtxt(pair_out / "pair_distance.csv", delimiter=",", names=True)
    assert np.all(np.diff(np.atleast_1d(dist["l1_distance"])) <= 1e-10)


def test_cli_bad_config_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": {"measure": {"alpha": 2.5}}}')
    assert cli.main(["run", str(bad)]) == 2


def test_cli_cfl_violation_exit_2(tmp_path, capsys):
    cfg = {
        "schema": "levyclaw/config/v1",
        "grid": {"n": 64},
        "run": {"t_final": 0.05, "dt": 10.0, "output_dir": str(tmp_path / "o")},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["run", str(path)]) == 2
    err = capsys.readouterr().err
    assert "admissible" in err


def test_cli_verify_identities_quick():
    assert cli.main(["verify-identities", "--quick"]) == 0


def test_cli_convergence(tmp_path):
    assert cli.main(["convergence", "--levels", "3", "--n0", "48",
                     "--t-final", "0.2", "--output", str(tmp_path)]) == 0
    doc = read_json(tmp_path / "convergence.json")
    assert doc["observed_order"] >= 0.5


def test_cli_output_root_env(tmp_path, monkeypatch, run_dir):
    root, cfg_path, _ = run_dir
    monkeypatch.setenv("LEVYCLAW_OUTPUT_ROOT", str(tmp_path))
    cfg = json.loads(cfg_path.read_text())
    cfg["run"]["output_dir"] = "relative_out"
    cfg["run"]["t_final"] = 0.02
    p2 = tmp_path / "cfg2.json"
    p2.write_text(json.dumps(cfg))
    assert cli.main(["run", str(p2)]) == 0
    assert (tmp_path / "relative_out" / "manifest.json").exists()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "levyclaw.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "diagnose" in proc.stdout
