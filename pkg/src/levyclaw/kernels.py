"""Symmetric Levy jump measures and their discrete quadrature weights.

Every measure here is even, vanishes at the origin, and integrates
|z|^2 near zero and 1 at infinity, so the generated jump operator is a
well-defined nonlocal diffusion.  The solver consumes measures only
through three scalar integrals (tail mass, truncated second moment,
per-cell weights), all provided in closed form where the kind admits
one and by adaptive quadrature otherwise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma

QUAD_RTOL = 1e-12

__all__ = [
    "LevyMeasure",
    "WeightTable",
    "fractional_laplacian",
    "bounded_kernel",
    "uniform_kernel",
    "tempered_stable",
    "tabulated_measure",
    "tabulated_from_csv",
    "spectral_constant",
]


def spectral_constant(alpha: float) -> float:
    """Normalization c making the symbol of c|z|^{-1-alpha} equal |k|^alpha (d=1).

    From 2c * int_0^inf (1-cos t) t^{-1-a} dt = 1 with the classical value
    of the cosine integral; the alpha = 1 limit is 1/pi.
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    if abs(alpha - 1.0) < 1e-12:
        return 1.0 / np.pi
    return alpha * (1.0 - alpha) / (2.0 * _gamma(2.0 - alpha) * np.cos(np.pi * alpha / 2.0))


@dataclass(frozen=True)
class WeightTable:
    """Cell-integrated jump weights for one grid spacing.

    ``weights[i]`` is the one-sided mass of the measure on the cell around
    ``offsets[i]*h``, clipped to (r, cutoff]; by evenness the offset -j
    carries the same weight.  ``sigma2`` is the truncated second moment
    absorbed by the Brownian surrogate, ``lambda_r`` the full tail mass
    beyond r, and ``lambda_cutoff`` the recorded truncation remainder, so
    the weights partition the tail: 2*sum(weights) + lambda_cutoff = lambda_r.
    """

    h: float
    r: float
    cutoff: float
    offsets: np.ndarray
    weights: np.ndarray
    sigma2: float
    lambda_r: float
    lambda_cutoff: float

    def __post_init__(self):
        if np.any(self.weights < 0):
            raise ValueError("negative cell weight; measure density must be >= 0")


@dataclass(frozen=True)
class LevyMeasure:
    """A symmetric pure-jump Levy measure on R minus the origin.

    ``kind`` selects the closed-form machinery; ``density_fn`` is the
    one-sided density (evaluated for z > 0 and mirrored by evenness).
    Use the module-level constructors rather than building directly.
    Immutable after construction; safe to share across threads.
    """

    kind: str
    params: dict = field(default_factory=dict)
    density_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    normalization: float = 1.0
    dimension: int = 1

    # -- density ---------------------------------------------------------

    def density(self, z):
        """Pointwise density d(mu)/dz; errors at z = 0 (mu has no atom there)."""
        z = np.asarray(z, dtype=float)
        if np.any(z == 0.0):
            raise ValueError("density undefined at z = 0")
        out = self.normalization * self._density_abs(np.abs(z))
        return out if out.ndim else float(out)

    def _density_abs(self, a):
        p = self.params
        if self.kind == "fractional_laplacian":
            return p["c"] * a ** (-1.0 - p["alpha"])
        if self.kind == "tempered_stable":
            return p["c"] * a ** (-1.0 - p["alpha"]) * np.exp(-p["lam"] * a)
        if self.kind == "bounded":
            return np.asarray(self.density_fn(a), dtype=float)
        if self.kind == "tabulated":
            return np.interp(a, p["z"], p["dens"], left=0.0, right=0.0)
        raise ValueError(f"unknown kind {self.kind!r}")

    # -- scalar integrals --------------------------------------------------

    def tail_mass(self, r: float) -> float:
        """Two-sided mass beyond radius r: int_{|z|>r} mu(z) dz."""
        if r <= 0:
            raise ValueError(f"tail_mass needs r > 0, got {r}")
        p = self.params
        c = self.normalization
        if self.kind == "fractional_laplacian":
            return 2.0 * c * p["c"] * r ** (-p["alpha"]) / p["alpha"]
        if self.kind == "bounded":
            inner, _ = quad(self.density_fn, 0.0, r, epsrel=QUAD_RTOL, epsabs=1e-15, limit=200,
                            points=self._quad_points(0.0, r))
            return c * max(p["total_mass"] - 2.0 * inner, 0.0)
        if self.kind == "tabulated":
            z = p["z"]
            return 2.0 * c * max(self._tab_prim(z[-1]) - self._tab_prim(r), 0.0)
        val, _ = quad(lambda s: self._density_abs(np.float64(s)), r, np.inf,
                      epsrel=QUAD_RTOL, epsabs=1e-15, limit=400)
        return 2.0 * c * val

    def second_moment(self, r: float) -> float:
        """Truncated second moment: int_{|z|<=r} z^2 mu(z) dz."""
        if r <= 0:
            raise ValueError(f"second_moment needs r > 0, got {r}")
        p = self.params
        c = self.normalization
        if self.kind == "fractional_laplacian":
            return 2.0 * c * p["c"] * r ** (2.0 - p["alpha"]) / (2.0 - p["alpha"])
        if self.kind == "tabulated":
            return 2.0 * c * self._tab_moment2(r)
        val, _ = quad(lambda s: s * s * self._density_abs(np.float64(s)), 0.0, r,
                      epsrel=QUAD_RTOL, epsabs=1e-15, limit=400,
                      points=self._quad_points(0.0, r))
        return 2.0 * c * val

    def levy_condition(self) -> float:
        """second_moment(1) + tail_mass(1); finite and positive for admissible kinds."""
        return self.second_moment(1.0) + self.tail_mass(1.0)

    # -- cell weights ------------------------------------------------------

    def cell_masses(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """One-sided masses of the intervals [lo, hi], vectorized, 0 < lo <= hi."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        c = self.normalization
        if self.kind == "fractional_laplacian":
            a = self.params["alpha"]
            val = (c * self.params["c"] / a) * (lo ** (-a) - hi ** (-a))
            return np.where(hi > lo, val, 0.0)
        if self.kind == "tabulated":
            return c * np.maximum(self._tab_prim(hi) - self._tab_prim(lo), 0.0)
        out = np.zeros(np.broadcast(lo, hi).shape)
        flat_lo = np.broadcast_to(lo, out.shape).ravel()
        flat_hi = np.broadcast_to(hi, out.shape).ravel()
        flat = out.ravel()
        for i in range(flat.size):
            if flat_hi[i] > flat_lo[i]:
                v, _ = quad(lambda s: float(self._density_abs(np.float64(s))),
                            flat_lo[i], flat_hi[i], epsrel=QUAD_RTOL, epsabs=1e-15, limit=200,
                            points=self._quad_points(flat_lo[i], flat_hi[i]))
                flat[i] = c * v
        return out

    def discrete_weights(self, h: float, r: float, cutoff: float) -> WeightTable:
        """Cell weights on [(j-1/2)h, (j+1/2)h] for cells meeting (r, cutoff].

        The innermost cell is clipped at r and the outermost at cutoff, so
        together with sigma2 = second_moment(r) and the remainder
        lambda_cutoff the table partitions the tail mass exactly.
        """
        if h <= 0:
            raise ValueError("h must be positive")
        if r < h / 2:
            raise ValueError(
                f"split radius r = {r} < h/2 = {h / 2}: the singular part must "
                "absorb at least the innermost half-cell")
        if cutoff < r:
            raise ValueError(f"cutoff {cutoff} must be >= split radius {r}")
        jmax = int(np.floor(cutoff / h + 0.5 + 1e-12))
        j = np.arange(1, jmax + 1)
        lo = np.maximum((j - 0.5) * h, r)
        hi = np.minimum((j + 0.5) * h, cutoff)
        keep = hi > lo
        j = j[keep]
        w = self.cell_masses(lo[keep], hi[keep])
        return WeightTable(
            h=h, r=r, cutoff=cutoff,
            offsets=j, weights=w,
            sigma2=self.second_moment(r),
            lambda_r=self.tail_mass(r),
            lambda_cutoff=self.tail_mass(cutoff),
        )

    def choose_cutoff(self, r: float, min_cutoff: float, tail_tol: float = 1e-6) -> float:
        """A cutoff >= min_cutoff with tail mass <= tail_tol where affordable.

        Compactly supported kinds return their support edge.  Slowly decaying
        power laws are capped at 64*min_cutoff; the operator spreads the
        recorded remainder, so the cap costs only a second-order symbol error.
        """
        sup = self.support_radius()
        if sup is not None:
            return max(min_cutoff, sup)
        cutoff = max(min_cutoff, r)
        while self.tail_mass(cutoff) > tail_tol and cutoff < 64.0 * min_cutoff:
            cutoff *= 2.0
        return min(cutoff, 64.0 * min_cutoff)

    def support_radius(self) -> Optional[float]:
        if self.kind == "tabulated":
            return float(self.params["z"][-1])
        if self.kind == "bounded":
            return self.params.get("support_radius")
        return None

    # -- helpers -----------------------------------------------------------

    def _quad_points(self, lo, hi):
        sup = self.support_radius()
        if sup is not None and lo < sup < hi:
            return [sup]
        return None

    def _tab_prim(self, a):
        """Exact primitive of the piecewise-linear one-sided density from z[0]."""
        p = self.params
        z, dens, prim0 = p["z"], p["dens"], p["prim0"]
        a = np.clip(np.asarray(a, dtype=float), z[0], z[-1])
        k = np.clip(np.searchsorted(z, a, side="right") - 1, 0, z.size - 2)
        dz = a - z[k]
        slope = (dens[k + 1] - dens[k]) / (z[k + 1] - z[k])
        return prim0[k] + dens[k] * dz + 0.5 * slope * dz * dz

    def _tab_moment2(self, r):
        """int_0^r s^2 density(s) ds with breakpoints inserted (exact per segment)."""
        z, dens = self.params["z"], self.params["dens"]
        r = min(r, z[-1])
        if r <= z[0]:
            return 0.0
        grid = np.unique(np.concatenate([z[(z >= z[0]) & (z < r)], [r]]))
        vals = np.interp(grid, z, dens)
        # integrand s^2 * (linear) is cubic; Simpson on each segment is exact
        mids = 0.5 * (grid[1:] + grid[:-1])
        vmid = np.interp(mids, z, dens)
        seg = (grid[1:] - grid[:-1]) / 6.0 * (
            grid[:-1] ** 2 * vals[:-1] + 4.0 * mids ** 2 * vmid + grid[1:] ** 2 * vals[1:])
        return float(np.sum(seg))


# -- constructors ------------------------------------------------------------


def fractional_laplacian(alpha: float, normalization: float = 1.0) -> LevyMeasure:
    """mu(z) = c|z|^{-1-alpha} with c fixed so the Levy symbol is |k|^alpha."""
    return LevyMeasure(
        kind="fractional_laplacian",
        params={"alpha": float(alpha), "c": spectral_constant(alpha)},
        normalization=normalization,
    )


def bounded_kernel(density: Callable, total_mass: float,
                   support_radius: Optional[float] = None,
                   normalization: float = 1.0) -> LevyMeasure:
    """Finite measure given by a one-sided density and its known total mass."""
    if total_mass <= 0:
        raise ValueError("total_mass must be positive")
    return LevyMeasure(
        kind="bounded",
        params={"total_mass": float(total_mass), "support_radius": support_radius},
        density_fn=density,
        normalization=normalization,
    )


def uniform_kernel(mass: float = 1.0, radius: float = 1.0) -> LevyMeasure:
    """Indicator kernel mass/(2*radius) on |z| <= radius; the standard bounded example."""
    height = mass / (2.0 * radius)
    return bounded_kernel(
        density=lambda a: np.where(np.asarray(a) <= radius, height, 0.0),
        total_mass=mass,
        support_radius=radius,
    )


def tempered_stable(alpha: float, lam: float, normalization: float = 1.0) -> LevyMeasure:
    """mu(z) = c|z|^{-1-alpha} e^{-lam|z|}; c matches the untempered spectral constant."""
    if lam <= 0:
        raise ValueError("tempering rate lam must be positive")
    return LevyMeasure(
        kind="tempered_stable",
        params={"alpha": float(alpha), "lam": float(lam), "c": spectral_constant(alpha)},
        normalization=normalization,
    )


def tabulated_measure(z: np.ndarray, dens: np.ndarray,
                      normalization: float = 1.0) -> LevyMeasure:
    """Piecewise-linear density from samples at z > 0, mirrored by evenness.

    The density is taken as 0 outside [z[0], z[-1]]; keep z[0] small enough
    that the omitted core carries no mass you care about.
    """
    z = np.asarray(z, dtype=float)
    dens = np.asarray(dens, dtype=float)
    if z.ndim != 1 or z.size < 2 or np.any(np.diff(z) <= 0) or z[0] <= 0:
        raise ValueError("breakpoints must be strictly increasing and positive")
    if np.any(dens < 0):
        raise ValueError("density samples must be nonnegative")
    prim0 = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(z))])
    return LevyMeasure(kind="tabulated",
                       params={"z": z, "dens": dens, "prim0": prim0},
                       normalization=normalization)


def tabulated_from_csv(path) -> LevyMeasure:
    """Two-column CSV (z, density), z > 0 only; evenness supplies z < 0."""
    zs, ds = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: expected two columns (z, density), got {row}")
            zs.append(float(row[0]))
            ds.append(float(row[1]))
    return tabulated_measure(np.array(zs), np.array(ds))
