"""levyclaw command line: run, diagnose, pair, verify-identities, convergence.

Exit codes: 0 all checks passed, 2 configuration errors, 3 numeric
failures (NaN/blow-up), 4 violated run invariants.  The output root can
be overridden with the LEVYCLAW_OUTPUT_ROOT environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as lcio
from .config import (ConfigError, RunConfig, build_model, config_to_dict,
                     parse_config)
from .dissipation import (EntropyResidualReport, SpaceTimeBump,
                          entropy_residual_batch, recover_m, xi_slice_bounds)
from .harness import comparison_check, contraction_check
from .identities import run_all_sweeps
from .kinetic import kruzhkov_entropy, quadratic_entropy
from .operator import Boundary, DiscreteOperator, GridFunction
from .scheme import SolverState, Trajectory, build_table, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INVARIANT = 4


def _output_dir(cfg: RunConfig, override=None) -> Path:
    base = Path(override) if override else Path(cfg.run.output_dir)
    root = os.environ.get("LEVYCLAW_OUTPUT_ROOT")
    if root and not base.is_absolute():
        base = Path(root) / base
    base.mkdir(parents=True, exist_ok=True)
    return base


def _run_invariants(traj: Trajectory) -> dict:
    u0 = traj.states[0].u.values
    vals = traj.values
    lo, hi = float(u0.min()), float(u0.max())
    if traj.model.boundary is Boundary.ZERO_EXTENSION:
        lo, hi = min(lo, 0.0), max(hi, 0.0)
    max_principle = bool(vals.min() >= lo and vals.max() <= hi)
    steps = np.array([s.step for s in traj.states])
    mass0 = traj.conservation[0]
    drift = float(np.max(np.abs(np.array(traj.conservation) - mass0)))
    l1_0 = traj.states[0].u.h * float(np.sum(np.abs(u0)))
    l1_ok = all(
        s.u.h * float(np.sum(np.abs(s.u.values))) <= l1_0 + 1e-12 * max(1, s.step)
        for s in traj.states)
    cons_ok = drift <= 1e-12 * max(1.0, l1_0) * max(1, int(steps[-1]))
    return {"max_principle": max_principle,
            "conservation_drift": drift,
            "conservation_ok": bool(cons_ok or traj.model.boundary
                                    is Boundary.ZERO_EXTENSION),
            "l1_stable": bool(l1_ok),
            "escape_flagged": traj.escape_flagged}


def _write_run_outputs(traj: Trajectory, outdir: Path, cfg: RunConfig) -> dict:
    model = traj.model
    op = DiscreteOperator(traj.table, model.n, model.boundary)
    x = traj.states[0].u.x
    files = []
    snaps = []
    for st in traj.states:
        a_u = np.asarray(model.diffusion.a(st.u.values))
        g_a_u = op.apply_values(a_u) if model.diffusion.kind != "zero" \
            else np.zeros_like(a_u)
        name = lcio.snapshot_name(st.step)
        lcio.write_snapshot(outdir / name, x, st.u.values, a_u, g_a_u)
        files.append(outdir / name)
        snaps.append({"step": st.step, "t": st.t, "file": name})
    invariants = _run_invariants(traj)
    manifest = {
        "schema": lcio.MANIFEST_SCHEMA,
        "kind": "run",
        "config": config_to_dict(cfg),
        "cfl": {"dt": traj.dt, "steps": int(traj.states[-1].step),
                "cfl_fraction": traj.states[-1].cfl_record},
        "conservation": [{"t": s.t, "mass": m}
                         for s, m in zip(traj.states, traj.conservation)],
        "invariants": invariants,
        "snapshots": snaps,
        "outputs": [lcio.manifest_entry(f) for f in files],
    }
    lcio.write_json(outdir / "manifest.json", manifest)
    return manifest


def _load_trajectory(run_dir: Path):
    manifest = lcio.read_json(run_dir / "manifest.json")
    if manifest.get("schema") != lcio.MANIFEST_SCHEMA:
        raise ConfigError([("manifest.schema",
                            f"expected {lcio.MANIFEST_SCHEMA!r}")])
    from .config import parse_config_text
    import json as _json
    cfg = parse_config_text(_json.dumps(manifest["config"]), base_dir=run_dir)
    model = build_model(cfg)
    table = build_table(model)
    states = []
    for snap in manifest["snapshots"]:
        _, u, _, _ = lcio.read_snapshot(run_dir / snap["file"])
        gf = GridFunction(u, model.h, model.x0, model.boundary)
        states.append(SolverState(u=gf, t=float(snap["t"]), step=int(snap["step"])))
    traj = Trajectory(model=model, table=table, states=states,
                      dt=float(manifest["cfl"]["dt"]))
    traj.conservation = [s.mass for s in states]
    return cfg, traj


# -- subcommands -----------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    outdir = _output_dir(cfg, args.output)
    model = build_model(cfg)
    dt = None if cfg.run.dt == "auto" else float(cfg.run.dt)
    traj = run(model, cfg.run.t_final, output_every=cfg.run.output_every,
               safety=cfg.run.safety, dt=dt)
    manifest = _write_run_outputs(traj, outdir, cfg)
    inv = manifest["invariants"]
    print(f"run: {manifest['cfl']['steps']} steps, dt = {traj.dt:.6g}, "
          f"output -> {outdir}")
    for key in ("max_principle", "conservation_ok", "l1_stable"):
        print(f"  {key}: {'pass' if inv[key] else 'FAIL'}")
    if inv["escape_flagged"]:
        print("  warning: support reached the zero-extension boundary "
              "(domain too small)")
    ok = inv["max_principle"] and inv["conservation_ok"] and inv["l1_stable"]
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_diagnose(args) -> int:
    run_dir = Path(args.run_dir)
    cfg, traj = _load_trajectory(run_dir)
    n_xi = args.n_xi or cfg.diagnostics.n_xi
    fields = recover_m(traj, n_xi=n_xi, margin=cfg.diagnostics.margin)
    bounds = xi_slice_bounds(traj, fields)

    x = traj.states[0].u.x
    times = traj.times
    lcio.write_field_csv(run_dir / "n_field.csv", times, x, fields.xi,
                         fields.n_static)
    lcio.write_field_csv(run_dir / "m_field.csv", times[:-1], x, fields.xi,
                         fields.m)

    u0 = traj.states[0].u.values
    t_mid = 0.5 * (times[0] + times[-1])
    span = times[-1] - times[0]
    phi = SpaceTimeBump(t0=t_mid, wt=0.35 * span,
                        x0=traj.model.x0 + 0.5 * traj.model.length,
                        wx=0.35 * traj.model.length)
    triples = []
    for label in cfg.diagnostics.entropies:
        if label == "square":
            triples.append(quadratic_entropy())
        else:
            triples.append(kruzhkov_entropy(float(label.split(":", 1)[1]),
                                            fields.dxi))
    values = entropy_residual_batch(traj, triples, phi, n_xi=n_xi)
    res_report = EntropyResidualReport.collect(
        zip(cfg.diagnostics.entropies, values))
    residuals = [{"entropy": lbl, "residual": val}
                 for lbl, val in res_report.entries]
    worst = res_report.worst
    n_ok = bool(fields.n_static.min() >= 0.0)
    lo, hi = float(u0.min()), float(u0.max())
    outside = (fields.xi < lo) | (fields.xi > hi)
    supp_ok = bool(np.all(fields.n_static[:, :, outside] == 0.0))

    report = {
        "schema": lcio.REPORT_SCHEMA,
        "entropy_residuals": residuals,
        "worst_residual": worst,
        "n_nonnegative": n_ok,
        "n_support_in_range": supp_ok,
        "worst_negative_m": fields.worst_negative_m(),
        "small_jump_error_bound": fields.small_jump_error.max(),
    }
    lcio.write_json(run_dir / "residuals.json", report)

    bounds_doc = {
        "schema": lcio.REPORT_SCHEMA,
        "slice_worst_excess": bounds["slice_worst_excess"],
        "quadratic_mass": bounds["quadratic_mass"],
        "quadratic_bound": bounds["quadratic_bound"],
        "bilinear_mass": bounds["bilinear_mass"],
        "bilinear_bound": bounds["bilinear_bound"],
        "xi": fields.xi,
        "slice_mass": bounds["slice_mass"],
        "nu": bounds["nu"],
    }
    lcio.write_json(run_dir / "bounds_report.json", bounds_doc)

    outputs = [run_dir / name for name in
               ("n_field.csv", "m_field.csv", "residuals.json", "bounds_report.json")]
    lcio.write_json(run_dir / "diagnostics_manifest.json", {
        "schema": lcio.MANIFEST_SCHEMA,
        "kind": "diagnose",
        "n_xi": n_xi,
        "outputs": [lcio.manifest_entry(f) for f in outputs],
    })
    print(f"diagnose: n >= 0 {'pass' if n_ok else 'FAIL'}, support "
          f"{'pass' if supp_ok else 'FAIL'}, worst residual {worst:.3e}, "
          f"slice excess {bounds['slice_worst_excess']:.3e}")
    ok = (n_ok and supp_ok
          and bounds["slice_worst_excess"] <= 1e-6
          and bounds["quadratic_mass"] <= bounds["quadratic_bound"] + 1e-9)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_pair(args) -> int:
    cfg = parse_config(args.config)
    if cfg.pair_initial is None:
        raise ConfigError([("pair.initial",
                            "the pair subcommand needs a pair.initial block")])
    outdir = _output_dir(cfg, args.output)
    model = build_model(cfg)
    model_b = build_model(cfg, initial=cfg.pair_initial)
    u0, v0 = model.initial, model_b.initial
    contraction = contraction_check(model, u0, v0, cfg.run.t_final,
                                    output_every=cfg.run.output_every)
    report = {
        "schema": lcio.REPORT_SCHEMA,
        "contraction": contraction.verdicts,
        "initial_distance": contraction.initial_distance,
        "final_distance": float(contraction.l1_distance[-1]),
    }
    if np.all(u0.values <= v0.values) or np.all(v0.values <= u0.values):
        lo0, hi0 = (u0, v0) if np.all(u0.values <= v0.values) else (v0, u0)
        comparison = comparison_check(model, lo0, hi0, cfg.run.t_final,
                                      output_every=cfg.run.output_every)
        report["comparison"] = comparison.verdicts
    lcio.write_distance_csv(outdir / "pair_distance.csv", contraction.times,
                            contraction.l1_distance, contraction.l1_pos_part,
                            contraction.l1_neg_part)
    report["outputs"] = [lcio.manifest_entry(outdir / "pair_distance.csv")]
    lcio.write_json(outdir / "pair_report.json", report)
    comp = report.get("comparison")
    ok = contraction.passed() and (comp is None or all(comp.values()))
    print(f"pair: contraction {'pass' if contraction.passed() else 'FAIL'}, "
          f"d(0) = {contraction.initial_distance:.6g}, "
          f"d(T) = {report['final_distance']:.6g}")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_verify_identities(args) -> int:
    reports = run_all_sweeps(quick=args.quick)
    width = max(len(r["name"]) for r in reports)
    all_ok = True
    for rep in reports:
        status = "pass" if rep["passed"] else "FAIL"
        detail = ""
        if "worst_residual" in rep:
            detail = f"worst residual {rep['worst_residual']:.2e}"
        elif "isometry_max_error" in rep:
            detail = f"isometry error {rep['isometry_max_error']:.2e}"
        elif "worst_violation" in rep:
            detail = (f"worst violation {rep['worst_violation']:.2e}, "
                      f"min margin {rep['min_margin']:.2e}")
        elif "violations" in rep:
            detail = f"{rep['violations']} violations"
        print(f"{rep['name']:<{width}}  [{status}]  {detail}")
        all_ok &= rep["passed"]
    return EXIT_OK if all_ok else EXIT_INVARIANT


def cmd_convergence(args) -> int:
    cfg = parse_config(args.config) if args.config else RunConfig()
    levels = args.levels
    n0 = args.n0
    outdir = _output_dir(cfg, args.output)
    errors = []
    finest = None
    grids = [n0 * (1 << k) for k in range(levels)]
    solutions = []
    for n in grids:
        cfg_n = replace(cfg, grid=replace(cfg.grid, n=n))
        model = build_model(cfg_n)
        traj = run(model, args.t_final, output_every=10 ** 9)
        solutions.append(traj.states[-1].u.values)
    for coarse_idx in range(levels - 1):
        coarse = solutions[coarse_idx]
        fine = solutions[coarse_idx + 1]
        restricted = 0.5 * (fine[0::2] + fine[1::2])
        h = cfg.grid.length / grids[coarse_idx]
        errors.append(h * float(np.sum(np.abs(coarse - restricted))))
    orders = [float(np.log2(errors[i] / errors[i + 1]))
              for i in range(len(errors) - 1)]
    observed = min(orders) if orders else float("nan")
    doc = {"schema": lcio.REPORT_SCHEMA, "grids": grids, "l1_errors": errors,
           "orders": orders, "observed_order": observed,
           "threshold": 0.5, "passed": bool(observed >= 0.5)}
    lcio.write_json(outdir / "convergence.json", doc)
    print(f"convergence: errors {['%.3e' % e for e in errors]}, "
          f"orders {['%.2f' % o for o in orders]}")
    return EXIT_OK if doc["passed"] else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyclaw",
        description="Monotone solver and kinetic diagnostics for conservation "
                    "laws with Levy-jump diffusion")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="advance one model and write snapshots")
    p.add_argument("config")
    p.add_argument("--output", help="override run.output_dir")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("diagnose", help="dissipation fields and entropy residuals "
                                        "from a stored run directory")
    p.add_argument("run_dir")
    p.add_argument("--n-xi", type=int, default=None)
    p.set_defaults(fn=cmd_diagnose)

    p = sub.add_parser("pair", help="paired contraction/comparison runs")
    p.add_argument("config")
    p.add_argument("--output", help="override run.output_dir")
    p.set_defaults(fn=cmd_pair)

    p = sub.add_parser("verify-identities",
                       help="bulk sweeps of the closed-form kinetic identities")
    p.add_argument("--quick", action="store_true",
                   help="1% sample sizes for smoke testing")
    p.set_defaults(fn=cmd_verify_identities)

    p = sub.add_parser("convergence", help="self-convergence refinement ladder")
    p.add_argument("--config", default=None)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--n0", type=int, default=64)
    p.add_argument("--t-final", type=float, default=0.3)
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_convergence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloatingPointError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
