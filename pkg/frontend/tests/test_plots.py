"""Plot suite: renders every artifact of a full session, deterministically."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from levyclaw_plots import SchemaError, available_kinds, load_field, load_run
from levyclaw_plots.cli import main as plots_main
from levyclaw_plots.figures import FIGURE_KINDS, FigureSpec, default_spec, render


def _levyclaw(*args):
    return subprocess.run([sys.executable, "-m", "levyclaw.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="session")
def session_dir(tmp_path_factory):
    """A full run + diagnose + pair + convergence session via the levyclaw CLI."""
    pytest.importorskip("levyclaw")
    root = tmp_path_factory.mktemp("session")
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
    for args in (("run", str(cfg_path)),
                 ("diagnose", str(out)),
                 ("pair", str(cfg_path), "--output", str(out)),
                 ("convergence", "--levels", "3", "--n0", "48",
                  "--t-final", "0.1", "--output", str(out))):
        proc = _levyclaw(*args)
        assert proc.returncode == 0, proc.stderr
    return out


def test_all_kinds_available(session_dir):
    assert set(available_kinds(session_dir)) == set(FIGURE_KINDS)


@pytest.mark.parametrize("fmt", ["png", "svg"])
def test_cli_renders_every_artifact(session_dir, tmp_path, fmt):
    out_dir = tmp_path / fmt
    rc = plots_main([str(session_dir), "--format", fmt,
                     "--output-dir", str(out_dir)])
    assert rc == 0
    images = sorted(p.name for p in out_dir.iterdir())
    assert len(images) == len(FIGURE_KINDS)
    for p in out_dir.iterdir():
        assert p.stat().st_size > 1000


def test_rendering_is_deterministic(session_dir, tmp_path):
    blobs = []
    for attempt in ("a", "b"):
        out_dir = tmp_path / attempt
        assert plots_main([str(session_dir), "--output-dir", str(out_dir)]) == 0
        blobs.append({p.name: p.read_bytes() for p in out_dir.iterdir()})
    assert blobs[0].keys() == blobs[1].keys()
    for name in blobs[0]:
        assert blobs[0][name] == blobs[1][name], name


def test_selected_kinds_only(session_dir, tmp_path):
    rc = plots_main([str(session_dir), "--kinds", "snapshots", "pair-distance",
                     "--output-dir", str(tmp_path)])
    assert rc == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == \
        ["pair_distance.png", "snapshots.png"]


def test_missing_column_names_schema(tmp_path):
    bad = tmp_path / "n_field.csv"
    bad.write_text("t,x,value\n0.0,0.0,1.0\n")
    with pytest.raises(SchemaError, match="levyclaw/field/v1"):
        load_field(bad)


def test_bad_manifest_schema(tmp_path):
    (tmp_path / "manifest.json").write_text(json.dumps({"schema": "other/v9"}))
    with pytest.raises(SchemaError, match="levyclaw/manifest/v1"):
        load_run(tmp_path)


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        FigureSpec(kind="sparkline", inputs={}, output=tmp_path / "x.png")


def test_empty_dir_exits_2(tmp_path):
    assert plots_main([str(tmp_path)]) == 2


def test_render_returns_path(session_dir, tmp_path):
    spec = default_spec("heatmap-u", session_dir, tmp_path, "png")
    path = render(spec)
    assert path.exists() and path.suffix == ".png"
