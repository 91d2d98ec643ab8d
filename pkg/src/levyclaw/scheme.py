"""Explicit monotone conservative solver for du/dt + dF(u)/dx + g[A(u)] = 0.

One forward-Euler step with the Engquist-Osher flux and the discrete
jump operator:

    u_i^{n+1} = u_i - (dt/h) [Fhat_{i+1/2} - Fhat_{i-1/2}] - dt (g[A(u)])_i,
    Fhat_{i+1/2} = fplus(u_i) + fminus(u_{i+1}).

Under the CFL bound every updated value is nondecreasing in every
stencil value, which is what the maximum principle, L1 contraction and
comparison tests exercise exactly (no tolerances).  The flux difference
is grouped as (fplus_i - fplus_{i-1}) + (fminus_{i+1} - fminus_i) so
each bracket keeps its sign in floating point at extrema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .kernels import LevyMeasure, WeightTable
from .kinetic import FluxSpec, Nonlinearity
from .operator import Boundary, DiscreteOperator, GridFunction

__all__ = [
    "ModelSpec", "SolverState", "Trajectory",
    "make_grid", "initial_profile", "cfl_dt", "step", "run",
    "build_table", "BoundaryEscape",
]

SAFETY_DEFAULT = 0.9
ESCAPE_BAND_CELLS = 5
ESCAPE_REL_TOL = 1e-8


class BoundaryEscape(RuntimeError):
    """Raised when zero-extension support reaches the artificial boundary."""


@dataclass(frozen=True)
class ModelSpec:
    """One Cauchy problem: flux F, diffusion A, measure mu, domain, data."""

    flux: FluxSpec
    diffusion: Nonlinearity
    measure: LevyMeasure
    x0: float
    length: float
    n: int
    boundary: Boundary
    initial: GridFunction
    split_radius_cells: float = 1.0
    cutoff: Optional[float] = None
    strategy: str = "direct"

    def __post_init__(self):
        if self.length <= 0 or self.n < 8:
            raise ValueError("domain needs positive length and at least 8 cells")
        u0 = self.initial
        if u0.n != self.n or abs(u0.h - self.h) > 1e-12 * self.h:
            raise ValueError("initial data does not live on the model grid")
        if self.boundary is Boundary.ZERO_EXTENSION:
            margin = 10
            peak = float(np.max(np.abs(u0.values))) or 1.0
            edge = np.concatenate([u0.values[:margin], u0.values[-margin:]])
            if np.any(np.abs(edge) > 1e-14 * peak):
                raise ValueError(
                    "zero-extension initial data must be supported strictly "
                    f"inside the domain with a margin of at least {margin} cells")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def split_radius(self) -> float:
        return self.split_radius_cells * self.h

    def data_bounds(self):
        """(umin, umax) including 0 under zero extension (the ghost value)."""
        lo = float(np.min(self.initial.values))
        hi = float(np.max(self.initial.values))
        if self.boundary is Boundary.ZERO_EXTENSION:
            lo, hi = min(lo, 0.0), max(hi, 0.0)
        return lo, hi


@dataclass(frozen=True)
class SolverState:
    u: GridFunction
    t: float = 0.0
    step: int = 0
    cfl_record: float = 0.0

    @property
    def mass(self) -> float:
        return self.u.h * float(np.sum(self.u.values))


@dataclass
class Trajectory:
    """Snapshots of one run plus the bookkeeping the diagnostics need."""

    model: ModelSpec
    table: WeightTable
    states: list
    dt: float
    conservation: list = field(default_factory=list)
    escape_flagged: bool = False

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def values(self) -> np.ndarray:
        return np.stack([s.u.values for s in self.states])


# -- grids and profiles --------------------------------------------------------


def make_grid(x0: float, length: float, n: int, boundary: Boundary) -> np.ndarray:
    return x0 + (length / n) * (np.arange(n) + 0.5)


def initial_profile(name: str, x: np.ndarray, **params) -> np.ndarray:
    """Named initial data: box, bump, riemann(uL, uR), gaussian."""
    if name == "box":
        height = params.get("height", 1.0)
        left = params.get("left", -0.5)
        right = params.get("right", 0.5)
        return np.where((x >= left) & (x <= right), height, 0.0)
    if name == "bump":
        height = params.get("height", 1.0)
        center = params.get("center", 0.0)
        width = params.get("width", 1.0)
        s = (x - center) / width
        out = np.zeros_like(x)
        inside = np.abs(s) < 1.0
        out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out
    if name == "riemann":
        u_left = params.get("left", 1.0)
        u_right = params.get("right", 0.0)
        jump_at = params.get("jump_at", 0.0)
        return np.where(x < jump_at, u_left, u_right)
    if name == "gaussian":
        height = params.get("height", 1.0)
        center = params.get("center", 0.0)
        sigma = params.get("sigma", 0.25)
        return height * np.exp(-0.5 * ((x - center) / sigma) ** 2)
    raise ValueError(f"unknown initial profile {name!r}")


def build_table(model: ModelSpec) -> WeightTable:
    """Weight table for the model grid: r = split_radius, cutoff per boundary.

    Periodic default folds 64 domain lengths of cells; zero extension stops
    at the domain edge (beyond it every jump lands on zeros and is handled
    exactly as an identity term).
    """
    h = model.h
    r = model.split_radius
    if model.cutoff is not None:
        cutoff = model.cutoff
    elif model.boundary is Boundary.PERIODIC:
        cutoff = model.measure.choose_cutoff(r, min_cutoff=model.length)
    else:
        cutoff = (model.n - 0.5) * h
    return model.measure.discrete_weights(h, r, cutoff)


# -- time stepping ---------------------------------------------------------------


def cfl_dt(model: ModelSpec, table: WeightTable, bounds=None) -> float:
    """Largest dt with dt [L_F/h + L_A (2 sigma2/h^2 + lambda_r)] <= 1.

    L_F and L_A are Lipschitz bounds on [umin, umax]; the bound is
    sufficient for monotonicity of one explicit step.  Degenerate bounds
    keep only the diffusion terms.
    """
    if bounds is None:
        bounds = model.data_bounds()
    umin, umax = bounds
    if umin > umax:
        raise ValueError("bounds must satisfy umin <= umax")
    h = model.h
    lf = 0.0 if umin == umax else model.flux.lipschitz(umin, umax)
    la = model.diffusion.lipschitz(umin, umax)
    denom = lf / h + la * (2.0 * table.sigma2 / h ** 2 + table.lambda_r)
    if denom <= 0.0:
        return np.inf
    return 1.0 / denom


def _eo_flux_difference(flux: FluxSpec, u: np.ndarray, boundary: Boundary) -> np.ndarray:
    fp = flux.fplus(u)
    fm = flux.fminus(u)
    if boundary is Boundary.PERIODIC:
        return (fp - np.roll(fp, 1)) + (np.roll(fm, -1) - fm)
    zero_p = float(flux.fplus(0.0))
    zero_m = float(flux.fminus(0.0))
    fp_left = np.concatenate([[zero_p], fp[:-1]])
    fm_right = np.concatenate([fm[1:], [zero_m]])
    return (fp - fp_left) + (fm_right - fm)


def step(state: SolverState, model: ModelSpec, dt: float,
         op: DiscreteOperator, table: WeightTable,
         max_dt: Optional[float] = None) -> SolverState:
    """One monotone forward-Euler step; refuses CFL-violating dt."""
    admissible = max_dt if max_dt is not None else cfl_dt(model, table)
    if dt > admissible * (1.0 + 1e-12):
        raise ValueError(
            f"dt = {dt} violates the CFL contract; admissible dt <= {admissible}")
    u = state.u.values
    dF = _eo_flux_difference(model.flux, u, model.boundary)
    if model.diffusion.kind == "zero":
        new = u - (dt / model.h) * dF
    else:
        ga = op.apply_values(np.asarray(model.diffusion.a(u)))
        new = u - (dt / model.h) * dF - dt * ga
    if not np.all(np.isfinite(new)):
        raise FloatingPointError(f"NaN/Inf detected at step {state.step + 1}")
    return SolverState(u=state.u.with_values(new), t=state.t + dt,
                       step=state.step + 1, cfl_record=dt / admissible)


def run(model: ModelSpec, t_final: float, output_every: int = 1,
        safety: float = SAFETY_DEFAULT, dt: Optional[float] = None,
        uniform_dt: bool = True) -> Trajectory:
    """Advance to t_final, emitting a snapshot every output_every steps.

    dt defaults to safety * cfl_dt; with uniform_dt the step count is
    rounded up so every step (including the last) has the same size,
    which keeps the diagnostic windows uniform.  Otherwise the final
    step is shortened to hit t_final exactly.
    """
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    table = build_table(model)
    op = DiscreteOperator(table, model.n, model.boundary, strategy=model.strategy)
    admissible = cfl_dt(model, table)
    state = SolverState(u=model.initial)
    traj = Trajectory(model=model, table=table, states=[state], dt=0.0)
    traj.conservation.append(state.mass)
    if t_final == 0.0:
        return traj

    if dt is None:
        dt = safety * admissible
    elif dt > admissible * (1.0 + 1e-12):
        raise ValueError(
            f"requested dt = {dt} violates CFL; admissible dt <= {admissible}")
    if not np.isfinite(dt):
        dt = t_final
    if uniform_dt:
        n_steps = max(1, int(np.ceil(t_final / dt - 1e-12)))
        # keep snapshot windows uniform: round up to a whole number of them
        output_every = min(output_every, n_steps)
        n_steps = int(np.ceil(n_steps / output_every)) * output_every
        dt = t_final / n_steps
    else:
        n_steps = int(np.ceil(t_final / dt - 1e-12))
    traj.dt = dt

    peak0 = float(np.max(np.abs(model.initial.values))) or 1.0
    for k in range(n_steps):
        this_dt = dt if uniform_dt else min(dt, t_final - state.t)
        state = step(state, model, this_dt, op, table, max_dt=admissible)
        if model.boundary is Boundary.ZERO_EXTENSION and not traj.escape_flagged:
            band = np.concatenate([state.u.values[:ESCAPE_BAND_CELLS],
                                   state.u.values[-ESCAPE_BAND_CELLS:]])
            if np.any(np.abs(band) > ESCAPE_REL_TOL * peak0):
                traj.escape_flagged = True
        if (k + 1) % output_every == 0 or k == n_steps - 1:
            traj.states.append(state)
            traj.conservation.append(state.mass)
    return traj
