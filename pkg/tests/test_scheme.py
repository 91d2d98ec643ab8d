"""Monotone solver: fixed points, shock speed, CFL, exactness properties."""

import numpy as np
import pytest

import levyclaw as lc
from levyclaw.operator import Boundary, DiscreteOperator
from levyclaw.scheme import BoundaryEscape, SolverState, build_table, step
from conftest import make_model


def shelf_kernel(mass=1.0):
    # support on 1 <= |z| <= 2 only, so sigma2 vanishes for any r < 1
    return lc.bounded_kernel(
        density=lambda a: np.where((np.asarray(a) >= 1.0) & (np.asarray(a) <= 2.0),
                                   mass / 2.0, 0.0),
        total_mass=mass, support_radius=2.0)


def test_constant_initial_is_fixed_point():
    model = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                       lc.fractional_laplacian(1.0), n=64,
                       profile="box", height=0.8, left=-10, right=10)
    traj = lc.run(model, 0.05, output_every=1)
    assert np.all(traj.values == 0.8)


def test_burgers_shock_speed():
    # Rankine-Hugoniot: riemann(1, 0) travels at 1/2
    n = 512
    model = make_model(lc.burgers_flux(), lc.zero_nonlinearity(),
                       lc.fractional_laplacian(1.0), n=n,
                       profile="riemann", left=1.0, right=0.0)
    traj = lc.run(model, 1.0, output_every=10 ** 9)
    u = traj.states[-1].u
    crossings = np.flatnonzero((u.values[:-1] >= 0.5) & (u.values[1:] < 0.5))
    inner = [i for i in crossings if abs(u.x[i]) < 1.5]
    assert len(inner) == 1
    assert abs(u.x[inner[0]] - 0.5) <= 2 * u.h


def test_mass_conservation_periodic(bump_diffusion_traj):
    traj = bump_diffusion_traj
    masses = np.array(traj.conservation)
    n_steps = traj.states[-1].step
    u0_l1 = traj.states[0].u.h * np.abs(traj.states[0].u.values).sum()
    assert np.max(np.abs(masses - masses[0])) <= 1e-12 * n_steps * max(u0_l1, 1.0)


def test_l1_stability(bump_diffusion_traj):
    traj = bump_diffusion_traj
    h = traj.states[0].u.h
    l1 = [h * np.abs(s.u.values).sum() for s in traj.states]
    for s, val in zip(traj.states, l1):
        assert val <= l1[0] + 1e-12 * max(1, s.step)


def test_max_principle_exact(bump_diffusion_traj):
    traj = bump_diffusion_traj
    u0 = traj.states[0].u.values
    vals = traj.values
    assert vals.min() >= u0.min() and vals.max() <= u0.max()


# -- CFL ---------------------------------------------------------------------------


def test_cfl_pure_advection():
    model = make_model(lc.burgers_flux(), lc.zero_nonlinearity(),
                       lc.fractional_laplacian(1.0), n=128,
                       profile="box", height=1.0, left=-1.0, right=1.0)
    table = build_table(model)
    # L_F = max|u| = 1 on [0, 1], so dt = h
    assert lc.cfl_dt(model, table) == pytest.approx(model.h, rel=1e-12)


def test_cfl_pure_jump_mass():
    mass = 2.3
    model = make_model(lc.zero_flux(), lc.identity_nonlinearity(),
                       shelf_kernel(mass), n=128, profile="bump",
                       height=1.0, width=0.8)
    table = build_table(model)
    assert table.sigma2 == pytest.approx(0.0, abs=1e-15)
    assert lc.cfl_dt(model, table) == pytest.approx(1.0 / mass, rel=1e-9)


def test_cfl_combined_below_single_mechanism():
    flux_only = make_model(lc.burgers_flux(), lc.zero_nonlinearity(),
                           shelf_kernel(), n=128, profile="bump")
    diff_only = make_model(lc.zero_flux(), lc.identity_nonlinearity(),
                           shelf_kernel(), n=128, profile="bump")
    both = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                      shelf_kernel(), n=128, profile="bump")
    dt_flux = lc.cfl_dt(flux_only, build_table(flux_only))
    dt_diff = lc.cfl_dt(diff_only, build_table(diff_only))
    dt_both = lc.cfl_dt(both, build_table(both))
    assert dt_both < dt_flux and dt_both < dt_diff


def test_cfl_degenerate_bounds_uses_diffusion_only():
    model = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                       shelf_kernel(1.0), n=128, profile="bump")
    table = build_table(model)
    dt = lc.cfl_dt(model, table, bounds=(0.5, 0.5))
    assert dt == pytest.approx(1.0 / 1.0, rel=1e-9)


def test_diffusion_dominated_step_scaling():
    # with a fixed physical split radius the sigma2/h^2 term drives
    # dt ~ h^2: halving h roughly quadruples the step count
    dts = []
    for n in (128, 256):
        model = make_model(lc.zero_flux(), lc.identity_nonlinearity(),
                           lc.fractional_laplacian(1.0), n=n, profile="bump")
        model = lc.ModelSpec(**{**model.__dict__,
                                "split_radius_cells": 0.25 / model.h})
        table = build_table(model)
        dts.append(lc.cfl_dt(model, table))
    assert dts[0] / dts[1] == pytest.approx(4.0, rel=0.15)


def test_step_refuses_cfl_violation():
    model = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                       lc.fractional_laplacian(1.0), n=64, profile="bump")
    table = build_table(model)
    op = DiscreteOperator(table, model.n, model.boundary)
    admissible = lc.cfl_dt(model, table)
    with pytest.raises(ValueError, match="admissible"):
        step(SolverState(u=model.initial), model, 2.0 * admissible, op, table)
    with pytest.raises(ValueError, match="admissible"):
        lc.run(model, 0.1, dt=2.0 * admissible)


# -- monotonicity and determinism -----------------------------------------------------


@pytest.mark.parametrize("flux,diff", [
    ("burgers", "identity"), ("linear", "power"), ("burgers", "zero")])
def test_monotone_step_certificate(flux, diff):
    rng = np.random.default_rng(17)
    fl = lc.burgers_flux() if flux == "burgers" else lc.linear_flux(1.0)
    df = {"identity": lc.identity_nonlinearity(),
          "power": lc.power_nonlinearity(2.0),
          "zero": lc.zero_nonlinearity()}[diff]
    model = make_model(fl, df, lc.fractional_laplacian(1.0), n=96,
                       profile="bump", height=1.0, width=0.8)
    table = build_table(model)
    op = DiscreteOperator(table, model.n, model.boundary)
    bounds = (-0.5, 2.1)
    dt = 0.9 * lc.cfl_dt(model, table, bounds=bounds)
    for _ in range(100):
        u = rng.uniform(-0.4, 1.0, model.n)
        v = u + rng.uniform(0.0, 1.0, model.n) * (rng.random(model.n) < 0.7)
        su = step(SolverState(u=model.initial.with_values(u)), model, dt, op,
                  table, max_dt=dt)
        sv = step(SolverState(u=model.initial.with_values(v)), model, dt, op,
                  table, max_dt=dt)
        assert np.all(su.u.values <= sv.u.values)


def test_fft_strategy_matches_direct_run():
    base = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                      lc.fractional_laplacian(1.0), n=96, profile="bump")
    fft_model = lc.ModelSpec(**{**base.__dict__, "strategy": "fft"})
    t_direct = lc.run(base, 0.1, output_every=8)
    t_fft = lc.run(fft_model, 0.1, output_every=8)
    assert np.max(np.abs(t_direct.values - t_fft.values)) <= 1e-10


def test_runs_bit_identical():
    model = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                       lc.fractional_laplacian(1.2), n=96, profile="bump")
    t1 = lc.run(model, 0.1, output_every=4)
    t2 = lc.run(model, 0.1, output_every=4)
    assert np.array_equal(t1.values, t2.values)


def test_t_zero_gives_single_snapshot():
    model = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                       lc.fractional_laplacian(1.0), n=64, profile="bump")
    traj = lc.run(model, 0.0)
    assert len(traj.states) == 1
    assert np.array_equal(traj.states[0].u.values, model.initial.values)


def test_final_time_hit_exactly():
    model = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                       lc.fractional_laplacian(1.0), n=64, profile="bump")
    traj = lc.run(model, 0.17, output_every=3)
    assert traj.times[-1] == pytest.approx(0.17, rel=1e-12)


def test_nan_detection():
    model = make_model(lc.burgers_flux(), lc.zero_nonlinearity(),
                       lc.fractional_laplacian(1.0), n=64, profile="bump")
    table = build_table(model)
    op = DiscreteOperator(table, model.n, model.boundary)
    bad = SolverState(u=model.initial.with_values(
        np.full(model.n, 1e308)))
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(FloatingPointError, match="step"):
            step(bad, model, 1e-8, op, table, max_dt=1.0)


# -- zero extension --------------------------------------------------------------------


def test_zero_extension_support_margin_enforced():
    with pytest.raises(ValueError, match="margin"):
        make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                   lc.fractional_laplacian(1.0), n=64,
                   boundary=Boundary.ZERO_EXTENSION,
                   profile="box", height=1.0, left=-1.95, right=0.0)


def test_zero_extension_escape_flag():
    # fractional jumps reach the boundary immediately: the run is flagged
    model = make_model(lc.zero_flux(), lc.identity_nonlinearity(),
                       lc.fractional_laplacian(0.5), n=64,
                       boundary=Boundary.ZERO_EXTENSION,
                       profile="bump", height=1.0, width=0.5)
    traj = lc.run(model, 0.2, output_every=8)
    assert traj.escape_flagged


def test_zero_extension_max_principle_with_ghosts():
    model = make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                       shelf_kernel(), n=64, boundary=Boundary.ZERO_EXTENSION,
                       profile="bump", height=1.0, width=0.5)
    traj = lc.run(model, 0.2, output_every=8)
    vals = traj.values
    assert vals.min() >= 0.0 and vals.max() <= 1.0
