"""Shared fixtures and independent oracles for the test suite.

The oracles here never reuse the closed forms they check: the Levy
symbol comes from oscillatory quadrature of the defining integral, the
pair functional from quadrature of its defining xi-integral, and cell
masses from brute-force adaptive quadrature of the density.
"""

import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning, quad

import levyclaw as lc
from levyclaw.operator import Boundary


def symbol_oracle(measure, k: float) -> float:
    """psi(k) = int (1 - cos kz) mu(z) dz by direct quadrature."""
    def f(z):
        return (1.0 - np.cos(k * z)) * float(measure.density(np.float64(z)))

    a = 1.0 / max(k, 1.0)
    with warnings.catch_warnings():
        # the integrand has an integrable |z|^{1-alpha} endpoint singularity;
        # QAGS extrapolates through it but warns near machine precision
        warnings.simplefilter("ignore", IntegrationWarning)
        near, _ = quad(f, 0.0, a, limit=400, epsrel=1e-11, epsabs=0.0)
    sup = measure.support_radius()
    if sup is not None:
        far, _ = quad(f, a, max(sup, a), limit=400, epsrel=1e-11, epsabs=1e-14) \
            if sup > a else (0.0, 0.0)
        return 2.0 * (near + far)
    flat, _ = quad(lambda z: float(measure.density(np.float64(z))), a, np.inf,
                   limit=400, epsrel=1e-11)
    osc, _ = quad(lambda z: float(measure.density(np.float64(z))), a, np.inf,
                  weight="cos", wvar=k, limit=400, epsrel=1e-11)
    return 2.0 * (near + flat - osc)


def f_functional_oracle(nonlin, a, b, c, d) -> float:
    """Defining integral int A'(xi)(chi(xi;a)-chi(xi;b))(chi(xi;c)-chi(xi;d)) dxi."""
    pts = {a, b, c, d, 0.0}
    if nonlin.kind == "piecewise":
        pts |= set(float(t) for t in nonlin.params["knots"])
    pts = sorted(pts)

    def integrand(xi):
        return (float(nonlin.da(xi))
                * (lc.chi(xi, a) - lc.chi(xi, b))
                * (lc.chi(xi, c) - lc.chi(xi, d)))

    lo, hi = min(pts), max(pts)
    if hi <= lo:
        return 0.0
    val, _ = quad(integrand, lo, hi, points=pts[1:-1] or None, limit=300,
                  epsrel=1e-11, epsabs=1e-13)
    return val


def dense_g_oracle(table, values, boundary: Boundary) -> np.ndarray:
    """Brute-force g: explicit loops over every offset of the table."""
    n = values.size
    out = np.zeros(n)
    s2h2 = 0.5 * table.sigma2 / table.h ** 2

    def at(i):
        if boundary is Boundary.PERIODIC:
            return values[i % n]
        return values[i] if 0 <= i < n else 0.0

    for i in range(n):
        acc = s2h2 * (2.0 * at(i) - at(i + 1) - at(i - 1))
        for j, w in zip(table.offsets, table.weights):
            acc += w * (2.0 * at(i) - at(i + int(j)) - at(i - int(j)))
        if boundary is Boundary.ZERO_EXTENSION:
            acc += table.lambda_cutoff * at(i)
        out[i] = acc
    return out


def make_model(flux, diffusion, measure, n=128, length=4.0, x0=-2.0,
               boundary=Boundary.PERIODIC, profile="bump", **profile_kw):
    x = lc.make_grid(x0, length, n, boundary)
    u0 = lc.initial_profile(profile, x, **profile_kw)
    gf = lc.GridFunction(u0, length / n, x0, boundary)
    return lc.ModelSpec(flux=flux, diffusion=diffusion, measure=measure,
                        x0=x0, length=length, n=n, boundary=boundary, initial=gf)


@pytest.fixture(scope="session")
def bump_burgers_model():
    return make_model(lc.burgers_flux(), lc.identity_nonlinearity(),
                      lc.fractional_laplacian(1.0), n=128,
                      profile="bump", height=1.0, width=0.8)


@pytest.fixture(scope="session")
def bump_diffusion_traj(bump_burgers_model):
    return lc.run(bump_burgers_model, 0.25, output_every=8)
