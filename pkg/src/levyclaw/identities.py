"""Bulk verification sweeps for the closed-form kinetic identities.

These back the `verify-identities` subcommand and the acceptance suite:
each runner draws its own reproducible sample, checks the identity in
vectorized form, and returns a small report dict with the worst margin
observed.  The F <= G sweep also records margin statistics, since the
tightness of the inequality at endpoint configurations is only observed,
never asserted.
"""

from __future__ import annotations

import numpy as np

from .kinetic import (
    EntropyTriple, F_functional_array, G_functional_array, Nonlinearity,
    chi_l1_distance, identity_nonlinearity, piecewise_linear_nonlinearity,
    power_nonlinearity, taylor_identity_residual, truncation_inequality_check,
    zero_nonlinearity,
)

__all__ = [
    "chi_identity_sweep", "taylor_sweep", "fg_sweep",
    "truncation_sweep", "sweep_nonlinearities", "random_convex_entropy",
    "run_all_sweeps",
]


def _chi_vals(xi, u):
    return ((xi > 0) & (xi < u)).astype(float) - ((xi < 0) & (xi > u)).astype(float)


def chi_identity_sweep(samples: int = 1_000_000, seed: int = 0) -> dict:
    """sgn(xi) chi = |chi| = chi^2 and the L1 isometry, vectorized."""
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-5, 5, samples)
    u = rng.uniform(-5, 5, samples)
    v = rng.uniform(-5, 5, samples)
    ch = _chi_vals(xi, u)
    sign_ok = bool(np.all(np.sign(xi) * ch == np.abs(ch)))
    square_ok = bool(np.all(np.abs(ch) == ch * ch))
    # closed-form L1 distance against |u - v|
    same = (u >= 0) == (v >= 0)
    dist = np.where(same, np.abs(u - v), np.abs(u) + np.abs(v))
    iso_err = float(np.max(np.abs(dist - np.abs(u - v))))
    return {"name": "chi-identities", "samples": samples,
            "sign_identity": sign_ok, "square_identity": square_ok,
            "isometry_max_error": iso_err,
            "passed": sign_ok and square_ok and iso_err <= 1e-12}


def random_convex_entropy(rng: np.random.Generator, max_degree: int = 6) -> EntropyTriple:
    """Convex polynomial: sum of squared affine terms plus even monomials."""
    n_sq = rng.integers(1, 4)
    affc = rng.uniform(-2, 2, size=(n_sq, 2))
    even_pows = np.arange(2, max_degree + 1, 2)
    evc = rng.uniform(0, 0.5, size=even_pows.size) * (rng.random(even_pows.size) < 0.6)

    c = np.zeros(max_degree + 1)
    for a, b in affc:
        c[0] += b * b
        c[1] += 2 * a * b
        c[2] += a * a
    for p, cc in zip(even_pows, evc):
        c[p] += cc
    poly = np.polynomial.Polynomial(c)
    d1 = poly.deriv()
    d2 = d1.deriv()
    return EntropyTriple(s=lambda u: poly(np.asarray(u, dtype=float)),
                         sp=lambda u: d1(np.asarray(u, dtype=float)),
                         spp=lambda u: d2(np.asarray(u, dtype=float)),
                         label="random-convex-poly")


def sweep_nonlinearities(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    knots = np.sort(rng.uniform(-4, 4, 4))
    slopes = rng.uniform(0, 2, 5)
    return [identity_nonlinearity(), power_nonlinearity(2.0),
            power_nonlinearity(3.0),
            piecewise_linear_nonlinearity(knots, slopes),
            zero_nonlinearity()]


def taylor_sweep(samples: int = 10_000, seed: int = 1, tol: float = 1e-8) -> dict:
    """Residual of the entropy Taylor identity over random (S, A, a, b)."""
    rng = np.random.default_rng(seed)
    nonlins = sweep_nonlinearities(seed)
    worst = 0.0
    for _ in range(samples):
        triple = random_convex_entropy(rng)
        nl = nonlins[rng.integers(0, len(nonlins))]
        a, b = rng.uniform(-5, 5, 2)
        worst = max(worst, taylor_identity_residual(triple, nl, a, b))
    return {"name": "taylor-identity", "samples": samples,
            "worst_residual": worst, "tolerance": tol, "passed": worst <= tol}


def fg_sweep(samples: int = 1_000_000, seed: int = 2, tol: float = 1e-12) -> dict:
    """F(a,b,c,d) <= G(a,b,c,d) over random quadruples and all sweep nonlinearities."""
    rng = np.random.default_rng(seed)
    results = []
    worst_violation = -np.inf
    min_margin = np.inf
    for nl in sweep_nonlinearities(seed):
        a, b, c, d = rng.uniform(-5, 5, size=(4, samples))
        fv = F_functional_array(nl, a, b, c, d)
        gv = G_functional_array(nl, a, b, c, d)
        margin = gv - fv
        worst_violation = max(worst_violation, float(-(margin.min())))
        min_margin = min(min_margin, float(margin.min()))
        results.append((nl.label, float(margin.min()), float(np.median(margin))))
    return {"name": "F-le-G", "samples": samples, "nonlinearities": len(results),
            "worst_violation": max(worst_violation, 0.0),
            "min_margin": min_margin, "margins": results,
            "tolerance": tol, "passed": worst_violation <= tol}


def truncation_sweep(samples: int = 1_000_000, seed: int = 3) -> dict:
    """Both truncation-lemma statements over random (a, b, xi, R)."""
    rng = np.random.default_rng(seed)
    nl = identity_nonlinearity()
    a, b, xi = rng.uniform(-6, 6, size=(3, samples))
    r_levels = rng.uniform(0.1, 5.0, samples)
    ok = truncation_inequality_check(nl, a, b, xi, r_levels)
    violations = int(np.sum(~ok))
    return {"name": "truncation-lemma", "samples": samples,
            "violations": violations, "passed": violations == 0}


def run_all_sweeps(quick: bool = False) -> list:
    scale = 100 if quick else 1
    return [
        chi_identity_sweep(samples=1_000_000 // scale),
        taylor_sweep(samples=10_000 // scale),
        fg_sweep(samples=1_000_000 // scale),
        truncation_sweep(samples=1_000_000 // scale),
    ]
