"""Run configuration: strict parsing, validation, defaults, emission.

The config is one JSON document (stdlib parsing gives exact round-trip
semantics and duplicate-key rejection).  Parsing is strict: unknown
keys are errors, every violation is collected with its key path and a
remedy hint, and nothing is silently coerced.

Schema (levyclaw/config/v1), defaults in brackets:

    schema                     "levyclaw/config/v1"
    model.flux.kind            burgers | linear | zero | poly
    model.flux.speed           linear wave speed [1.0]
    model.flux.coeffs          poly coefficients, increasing powers
    model.diffusion.kind       identity | power | piecewise | zero
    model.diffusion.m          power exponent, >= 1 [2.0]
    model.diffusion.knots      piecewise breakpoints (increasing)
    model.diffusion.slopes     piecewise slopes, len(knots)+1, all >= 0
    model.measure.kind         fractional_laplacian | bounded | tempered | tabulated
    model.measure.alpha        stability index in (0, 2) [1.0]
    model.measure.lambda       tempering rate > 0 [1.0]
    model.measure.mass         bounded-kernel total mass > 0 [1.0]
    model.measure.radius       bounded-kernel support radius > 0 [1.0]
    model.measure.table_path   tabulated CSV (z, density), z > 0
    model.measure.normalization  extra multiplicative constant > 0 [1.0]
    grid.x0, grid.length       domain [x0, x0+length) [-2.0, 4.0]
    grid.n                     cells, >= 8 [512]
    grid.boundary              periodic | zero ["periodic"]
    initial.profile            box | bump | riemann | gaussian ["bump"]
    initial.height/center/width/left/right/jump_at/sigma   profile params
    operator.strategy          direct | fft ["direct"]
    operator.split_radius_cells  r / h, >= 0.5 [1.0]
    operator.cutoff            "auto" or a radius > 0 ["auto"]
    run.t_final                final time > 0 [1.0]
    run.safety                 CFL safety in (0, 1] [0.9]
    run.dt                     "auto" or a manual dt ["auto"]
    run.output_every           snapshot stride >= 1 [10]
    run.output_dir             output directory ["out"]
    diagnostics.n_xi           xi-grid size >= 8 [128]
    diagnostics.margin         xi-range padding fraction [0.1]
    diagnostics.entropies      list: "square" | "kruzhkov:<k>" [["square"]]
    pair.initial               optional second initial block (paired runs)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .kernels import (fractional_laplacian, tabulated_from_csv, tempered_stable,
                      uniform_kernel)
from .kinetic import (burgers_flux, identity_nonlinearity, linear_flux,
                      piecewise_linear_nonlinearity, polynomial_flux,
                      power_nonlinearity, zero_flux, zero_nonlinearity)
from .operator import Boundary, GridFunction
from .scheme import ModelSpec, initial_profile, make_grid

SCHEMA = "levyclaw/config/v1"

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_config_text",
           "emit_config", "default_config_dict", "build_model", "SCHEMA"]


class ConfigError(ValueError):
    """All collected validation errors of one config document."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"  {path}: {msg}" for path, msg in self.errors]
        super().__init__("invalid configuration:\n" + "\n".join(lines))


@dataclass(frozen=True)
class FluxConfig:
    kind: str = "burgers"
    speed: float = 1.0
    coeffs: tuple = ()


@dataclass(frozen=True)
class DiffusionConfig:
    kind: str = "identity"
    m: float = 2.0
    knots: tuple = ()
    slopes: tuple = ()


@dataclass(frozen=True)
class MeasureConfig:
    kind: str = "fractional_laplacian"
    alpha: float = 1.0
    lam: float = 1.0
    mass: float = 1.0
    radius: float = 1.0
    table_path: str = ""
    normalization: float = 1.0


@dataclass(frozen=True)
class GridConfig:
    x0: float = -2.0
    length: float = 4.0
    n: int = 512
    boundary: str = "periodic"


@dataclass(frozen=True)
class InitialConfig:
    profile: str = "bump"
    height: float = 1.0
    center: float = 0.0
    width: float = 0.8
    left: float = 1.0
    right: float = 0.0
    jump_at: float = 0.0
    sigma: float = 0.25


@dataclass(frozen=True)
class OperatorConfig:
    strategy: str = "direct"
    split_radius_cells: float = 1.0
    cutoff: object = "auto"


@dataclass(frozen=True)
class RunBlockConfig:
    t_final: float = 1.0
    safety: float = 0.9
    dt: object = "auto"
    output_every: int = 10
    output_dir: str = "out"


@dataclass(frozen=True)
class DiagnosticsConfig:
    n_xi: int = 128
    margin: float = 0.1
    entropies: tuple = ("square",)


@dataclass(frozen=True)
class RunConfig:
    flux: FluxConfig = field(default_factory=FluxConfig)
    diffusion: DiffusionConfig = field(default_factory=DiffusionConfig)
    measure: MeasureConfig = field(default_factory=MeasureConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    operator: OperatorConfig = field(default_factory=OperatorConfig)
    run: RunBlockConfig = field(default_factory=RunBlockConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    pair_initial: Optional[InitialConfig] = None


# -- validation ---------------------------------------------------------------

_ENUMS = {
    "model.flux.kind": ("burgers", "linear", "zero", "poly"),
    "model.diffusion.kind": ("identity", "power", "piecewise", "zero"),
    "model.measure.kind": ("fractional_laplacian", "bounded", "tempered", "tabulated"),
    "grid.boundary": ("periodic", "zero"),
    "initial.profile": ("box", "bump", "riemann", "gaussian"),
    "operator.strategy": ("direct", "fft"),
}

_INITIAL_KEYS = {"profile", "height", "center", "width", "left", "right",
                 "jump_at", "sigma"}

_KNOWN = {
    "schema": None,
    "model": {"flux": {"kind", "speed", "coeffs"},
              "diffusion": {"kind", "m", "knots", "slopes"},
              "measure": {"kind", "alpha", "lambda", "mass", "radius",
                          "table_path", "normalization"}},
    "grid": {"x0", "length", "n", "boundary"},
    "initial": _INITIAL_KEYS,
    "operator": {"strategy", "split_radius_cells", "cutoff"},
    "run": {"t_final", "safety", "dt", "output_every", "output_dir"},
    "diagnostics": {"n_xi", "margin", "entropies"},
    "pair": {"initial": _INITIAL_KEYS},
}


def _reject_duplicates(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ValueError(f"duplicate key {key!r}")
        seen[key] = value
    return seen


def _num(doc, path, errors, default, lo=None, hi=None, strict_lo=False,
         strict_hi=False, integer=False, label=None):
    cur = doc
    for part in path.split(".")[:-1]:
        cur = cur.get(part, {}) if isinstance(cur, dict) else {}
    leaf = path.split(".")[-1]
    if not isinstance(cur, dict) or leaf not in cur:
        return default
    val = cur[leaf]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append((path, f"expected a number, got {type(val).__name__}"))
        return default
    if integer and int(val) != val:
        errors.append((path, f"expected an integer, got {val}"))
        return default
    if lo is not None and (val <= lo if strict_lo else val < lo):
        op = ">" if strict_lo else ">="
        want = label or f"a value {op} {lo}"
        errors.append((path, f"value {val} out of range; expected {want}"))
        return default
    if hi is not None and (val >= hi if strict_hi else val > hi):
        op = "<" if strict_hi else "<="
        want = label or f"a value {op} {hi}"
        errors.append((path, f"value {val} out of range; expected {want}"))
        return default
    return int(val) if integer else float(val)


def _enum(doc, path, errors, default):
    cur = doc
    for part in path.split(".")[:-1]:
        cur = cur.get(part, {}) if isinstance(cur, dict) else {}
    leaf = path.split(".")[-1]
    if not isinstance(cur, dict) or leaf not in cur:
        return default
    val = cur[leaf]
    allowed = _ENUMS[path]
    if val not in allowed:
        errors.append((path, f"{val!r} is not one of {list(allowed)}"))
        return default
    return val


def _check_unknown(doc, known, prefix, errors):
    if not isinstance(doc, dict):
        errors.append((prefix or "<root>", "expected an object"))
        return
    for key, sub in doc.items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(known, dict):
            if key not in known:
                errors.append((path, "unknown key; remove it or check the schema docs"))
            elif isinstance(known[key], (dict, set)):
                _check_unknown(sub, known[key], path, errors)
        elif isinstance(known, set):
            if key not in known:
                errors.append((path, "unknown key; remove it or check the schema docs"))


def _parse_initial(block, prefix, errors) -> InitialConfig:
    block = block if isinstance(block, dict) else {}
    profile = block.get("profile", "bump")
    if profile not in _ENUMS["initial.profile"]:
        errors.append((f"{prefix}.profile",
                       f"{profile!r} is not one of {list(_ENUMS['initial.profile'])}"))
        profile = "bump"
    defaults = {"height": 1.0, "center": 0.0, "width": 0.8, "left": 1.0,
                "right": 0.0, "jump_at": 0.0, "sigma": 0.25}
    vals = {}
    for key, dv in defaults.items():
        v = block.get(key, dv)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            errors.append((f"{prefix}.{key}",
                           f"expected a number, got {type(v).__name__}"))
            v = dv
        vals[key] = float(v)
    if profile == "box" and vals["left"] >= vals["right"]:
        errors.append((f"{prefix}.left",
                       "box profile needs left < right (the box edges)"))
    if profile == "bump" and vals["width"] <= 0:
        errors.append((f"{prefix}.width", "bump profile needs width > 0"))
    if profile == "gaussian" and vals["sigma"] <= 0:
        errors.append((f"{prefix}.sigma", "gaussian profile needs sigma > 0"))
    return InitialConfig(profile=profile, **vals)


def parse_config_text(text: str, base_dir: Optional[Path] = None) -> RunConfig:
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicates)
    except ValueError as exc:
        raise ConfigError([("<document>", f"not valid strict JSON: {exc}")])
    errors = []
    if not isinstance(doc, dict):
        raise ConfigError([("<document>", "top level must be an object")])
    _check_unknown(doc, _KNOWN, "", errors)
    if doc.get("schema", SCHEMA) != SCHEMA:
        errors.append(("schema", f"unsupported schema {doc.get('schema')!r}; "
                                 f"expected {SCHEMA!r}"))

    flux_kind = _enum(doc, "model.flux.kind", errors, "burgers")
    coeffs = ()
    model = doc.get("model", {}) if isinstance(doc.get("model", {}), dict) else {}
    flux_doc = model.get("flux", {}) if isinstance(model.get("flux", {}), dict) else {}
    if "coeffs" in flux_doc:
        raw = flux_doc["coeffs"]
        if (not isinstance(raw, list) or not raw
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in raw)):
            errors.append(("model.flux.coeffs", "expected a nonempty list of numbers"))
        else:
            coeffs = tuple(float(v) for v in raw)
    if flux_kind == "poly" and not coeffs:
        errors.append(("model.flux.coeffs", "poly flux needs its coefficients "
                                            "(increasing powers)"))
    flux_cfg = FluxConfig(kind=flux_kind,
                          speed=_num(doc, "model.flux.speed", errors, 1.0),
                          coeffs=coeffs)

    diff_kind = _enum(doc, "model.diffusion.kind", errors, "identity")
    diff_doc = model.get("diffusion", {}) if isinstance(model.get("diffusion", {}), dict) else {}
    knots, slopes = (), ()
    for name in ("knots", "slopes"):
        if name in diff_doc:
            raw = diff_doc[name]
            if (not isinstance(raw, list)
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                               for v in raw)):
                errors.append((f"model.diffusion.{name}", "expected a list of numbers"))
            elif name == "knots":
                knots = tuple(float(v) for v in raw)
            else:
                slopes = tuple(float(v) for v in raw)
    if diff_kind == "piecewise":
        if not knots or len(slopes) != len(knots) + 1:
            errors.append(("model.diffusion.slopes",
                           "piecewise diffusion needs len(slopes) == len(knots) + 1"))
        elif any(s < 0 for s in slopes):
            errors.append(("model.diffusion.slopes",
                           "slopes must be >= 0 (A nondecreasing)"))
        elif any(b <= a for a, b in zip(knots, knots[1:])):
            errors.append(("model.diffusion.knots", "knots must be strictly increasing"))
    diff_cfg = DiffusionConfig(
        kind=diff_kind,
        m=_num(doc, "model.diffusion.m", errors, 2.0, lo=1.0),
        knots=knots, slopes=slopes)

    meas_kind = _enum(doc, "model.measure.kind", errors, "fractional_laplacian")
    meas_doc = model.get("measure", {}) if isinstance(model.get("measure", {}), dict) else {}
    table_path = meas_doc.get("table_path", "")
    if table_path and not isinstance(table_path, str):
        errors.append(("model.measure.table_path", "expected a string path"))
        table_path = ""
    if meas_kind == "tabulated":
        if not table_path:
            errors.append(("model.measure.table_path",
                           "tabulated measure needs table_path (CSV of z, density)"))
        else:
            resolved = (base_dir / table_path) if base_dir and not Path(table_path).is_absolute() \
                else Path(table_path)
            if not resolved.exists():
                errors.append(("model.measure.table_path", f"file not found: {resolved}"))
            else:
                table_path = str(resolved)
    meas_cfg = MeasureConfig(
        kind=meas_kind,
        alpha=_num(doc, "model.measure.alpha", errors, 1.0, lo=0.0, hi=2.0,
                   strict_lo=True, strict_hi=True, label="alpha in (0, 2)"),
        lam=_num(doc, "model.measure.lambda", errors, 1.0, lo=0.0, strict_lo=True),
        mass=_num(doc, "model.measure.mass", errors, 1.0, lo=0.0, strict_lo=True),
        radius=_num(doc, "model.measure.radius", errors, 1.0, lo=0.0, strict_lo=True),
        table_path=table_path,
        normalization=_num(doc, "model.measure.normalization", errors, 1.0,
                           lo=0.0, strict_lo=True),
    )

    grid_cfg = GridConfig(
        x0=_num(doc, "grid.x0", errors, -2.0),
        length=_num(doc, "grid.length", errors, 4.0, lo=0.0, strict_lo=True),
        n=_num(doc, "grid.n", errors, 512, lo=8, integer=True),
        boundary=_enum(doc, "grid.boundary", errors, "periodic"),
    )

    init_cfg = _parse_initial(doc.get("initial", {}), "initial", errors)

    op_doc = doc.get("operator", {}) if isinstance(doc.get("operator", {}), dict) else {}
    cutoff = op_doc.get("cutoff", "auto")
    if cutoff != "auto":
        if isinstance(cutoff, bool) or not isinstance(cutoff, (int, float)) or cutoff <= 0:
            errors.append(("operator.cutoff", 'expected "auto" or a positive radius'))
            cutoff = "auto"
        else:
            cutoff = float(cutoff)
    op_cfg = OperatorConfig(
        strategy=_enum(doc, "operator.strategy", errors, "direct"),
        split_radius_cells=_num(doc, "operator.split_radius_cells", errors, 1.0, lo=0.5),
        cutoff=cutoff,
    )

    run_doc = doc.get("run", {}) if isinstance(doc.get("run", {}), dict) else {}
    dt = run_doc.get("dt", "auto")
    if dt != "auto":
        if isinstance(dt, bool) or not isinstance(dt, (int, float)) or dt <= 0:
            errors.append(("run.dt", 'expected "auto" or a positive time step'))
            dt = "auto"
        else:
            dt = float(dt)
    out_dir = run_doc.get("output_dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        errors.append(("run.output_dir", "expected a nonempty string"))
        out_dir = "out"
    run_cfg = RunBlockConfig(
        t_final=_num(doc, "run.t_final", errors, 1.0, lo=0.0, strict_lo=True),
        safety=_num(doc, "run.safety", errors, 0.9, lo=0.0, hi=1.0, strict_lo=True),
        dt=dt,
        output_every=_num(doc, "run.output_every", errors, 10, lo=1, integer=True),
        output_dir=out_dir,
    )

    diag_doc = doc.get("diagnostics", {}) if isinstance(doc.get("diagnostics", {}), dict) else {}
    entropies = diag_doc.get("entropies", ["square"])
    if (not isinstance(entropies, list) or not entropies
            or not all(isinstance(e, str) for e in entropies)):
        errors.append(("diagnostics.entropies", "expected a nonempty list of strings"))
        entropies = ["square"]
    else:
        for e in entropies:
            if e != "square" and not e.startswith("kruzhkov:"):
                errors.append(("diagnostics.entropies",
                               f"{e!r}: use \"square\" or \"kruzhkov:<level>\""))
            elif e.startswith("kruzhkov:"):
                try:
                    float(e.split(":", 1)[1])
                except ValueError:
                    errors.append(("diagnostics.entropies",
                                   f"{e!r}: the kruzhkov level must be a number"))
    diag_cfg = DiagnosticsConfig(
        n_xi=_num(doc, "diagnostics.n_xi", errors, 128, lo=8, integer=True),
        margin=_num(doc, "diagnostics.margin", errors, 0.1, lo=0.0),
        entropies=tuple(entropies),
    )

    pair_initial = None
    if "pair" in doc:
        pair_doc = doc["pair"] if isinstance(doc["pair"], dict) else {}
        pair_initial = _parse_initial(pair_doc.get("initial", {}), "pair.initial", errors)

    # cross-field checks
    if grid_cfg.boundary == "zero" and init_cfg.profile == "riemann":
        errors.append(("initial.profile",
                       "riemann data is not compactly supported; use a periodic grid"))
    if run_cfg.dt != "auto" and meas_cfg.kind == "fractional_laplacian":
        pass  # CFL admissibility is checked at run time against the built table

    if errors:
        raise ConfigError(errors)
    return RunConfig(flux=flux_cfg, diffusion=diff_cfg, measure=meas_cfg,
                     grid=grid_cfg, initial=init_cfg, operator=op_cfg,
                     run=run_cfg, diagnostics=diag_cfg, pair_initial=pair_initial)


def parse_config(path) -> RunConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), base_dir=path.parent)


def config_to_dict(cfg: RunConfig) -> dict:
    doc = {
        "schema": SCHEMA,
        "model": {
            "flux": {"kind": cfg.flux.kind, "speed": cfg.flux.speed,
                     "coeffs": list(cfg.flux.coeffs)},
            "diffusion": {"kind": cfg.diffusion.kind, "m": cfg.diffusion.m,
                          "knots": list(cfg.diffusion.knots),
                          "slopes": list(cfg.diffusion.slopes)},
            "measure": {"kind": cfg.measure.kind, "alpha": cfg.measure.alpha,
                        "lambda": cfg.measure.lam, "mass": cfg.measure.mass,
                        "radius": cfg.measure.radius,
                        "table_path": cfg.measure.table_path,
                        "normalization": cfg.measure.normalization},
        },
        "grid": {"x0": cfg.grid.x0, "length": cfg.grid.length, "n": cfg.grid.n,
                 "boundary": cfg.grid.boundary},
        "initial": _initial_dict(cfg.initial),
        "operator": {"strategy": cfg.operator.strategy,
                     "split_radius_cells": cfg.operator.split_radius_cells,
                     "cutoff": cfg.operator.cutoff},
        "run": {"t_final": cfg.run.t_final, "safety": cfg.run.safety,
                "dt": cfg.run.dt, "output_every": cfg.run.output_every,
                "output_dir": cfg.run.output_dir},
        "diagnostics": {"n_xi": cfg.diagnostics.n_xi,
                        "margin": cfg.diagnostics.margin,
                        "entropies": list(cfg.diagnostics.entropies)},
    }
    if cfg.pair_initial is not None:
        doc["pair"] = {"initial": _initial_dict(cfg.pair_initial)}
    # drop empty optional lists so the emitted file stays minimal but lossless
    if not cfg.flux.coeffs:
        del doc["model"]["flux"]["coeffs"]
    if not cfg.diffusion.knots:
        del doc["model"]["diffusion"]["knots"]
        del doc["model"]["diffusion"]["slopes"]
    if not cfg.measure.table_path:
        del doc["model"]["measure"]["table_path"]
    return doc


def _initial_dict(init: InitialConfig) -> dict:
    return {"profile": init.profile, "height": init.height, "center": init.center,
            "width": init.width, "left": init.left, "right": init.right,
            "jump_at": init.jump_at, "sigma": init.sigma}


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def default_config_dict() -> dict:
    return config_to_dict(RunConfig())


# -- model construction ---------------------------------------------------------


def _build_flux(cfg: FluxConfig):
    if cfg.kind == "burgers":
        return burgers_flux()
    if cfg.kind == "linear":
        return linear_flux(cfg.speed)
    if cfg.kind == "zero":
        return zero_flux()
    return polynomial_flux(list(cfg.coeffs))


def _build_diffusion(cfg: DiffusionConfig):
    if cfg.kind == "identity":
        return identity_nonlinearity()
    if cfg.kind == "zero":
        return zero_nonlinearity()
    if cfg.kind == "power":
        return power_nonlinearity(cfg.m)
    return piecewise_linear_nonlinearity(list(cfg.knots), list(cfg.slopes))


def _build_measure(cfg: MeasureConfig):
    if cfg.kind == "fractional_laplacian":
        return fractional_laplacian(cfg.alpha, normalization=cfg.normalization)
    if cfg.kind == "bounded":
        return uniform_kernel(cfg.mass * cfg.normalization, cfg.radius)
    if cfg.kind == "tempered":
        return tempered_stable(cfg.alpha, cfg.lam, normalization=cfg.normalization)
    return tabulated_from_csv(cfg.table_path)


def _initial_params(init: InitialConfig) -> dict:
    return {"height": init.height, "center": init.center, "width": init.width,
            "left": init.left, "right": init.right, "jump_at": init.jump_at,
            "sigma": init.sigma}


def build_model(cfg: RunConfig, initial: Optional[InitialConfig] = None) -> ModelSpec:
    """Instantiate the ModelSpec a config describes (optionally with the
    pair block's initial data)."""
    init = initial if initial is not None else cfg.initial
    boundary = Boundary.PERIODIC if cfg.grid.boundary == "periodic" \
        else Boundary.ZERO_EXTENSION
    x = make_grid(cfg.grid.x0, cfg.grid.length, cfg.grid.n, boundary)
    u0 = initial_profile(init.profile, x, **_initial_params(init))
    gf = GridFunction(u0, cfg.grid.length / cfg.grid.n, cfg.grid.x0, boundary)
    cutoff = None if cfg.operator.cutoff == "auto" else float(cfg.operator.cutoff)
    return ModelSpec(
        flux=_build_flux(cfg.flux),
        diffusion=_build_diffusion(cfg.diffusion),
        measure=_build_measure(cfg.measure),
        x0=cfg.grid.x0, length=cfg.grid.length, n=cfg.grid.n,
        boundary=boundary, initial=gf,
        split_radius_cells=cfg.operator.split_radius_cells,
        cutoff=cutoff, strategy=cfg.operator.strategy,
    )
