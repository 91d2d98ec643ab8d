"""Kinetic xi-space algebra: chi, normalized characteristic functions,
truncations, the Taylor identity, and the F/G pair functionals.

These are exact, closed-form objects; no grid is involved.  The chi
function takes values in {-1, 0, 1}, Char takes the value 1/2 at
interval endpoints (detected by exact float equality), and truncation
clamps to [-R, R].  The F functional of a quadruple has both a
definitional integral and a closed form through the overlap interval;
the closed form is used everywhere and the integral serves as an
independent oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

__all__ = [
    "chi", "chi_grid", "char_conv", "truncate", "chi_l1_distance",
    "Nonlinearity", "identity_nonlinearity", "zero_nonlinearity",
    "power_nonlinearity", "piecewise_linear_nonlinearity",
    "FluxSpec", "burgers_flux", "linear_flux", "zero_flux", "polynomial_flux",
    "EntropyTriple", "quadratic_entropy", "kruzhkov_entropy",
    "taylor_identity_residual", "F_functional", "G_functional",
    "F_functional_array", "G_functional_array",
    "truncation_identity_holds", "truncation_inequality_check",
]


# -- chi and friends ---------------------------------------------------------


def chi(xi: float, u: float) -> float:
    """Kinetic function: 1 on 0 < xi < u, -1 on u < xi < 0, else 0."""
    if 0.0 < xi < u:
        return 1.0
    if u < xi < 0.0:
        return -1.0
    return 0.0


def chi_grid(xi: np.ndarray, u: np.ndarray) -> np.ndarray:
    """chi(xi_k; u_i) as a (K, N) array for xi (K,) against u (N,)."""
    xi = np.asarray(xi, dtype=float)[:, None]
    u = np.asarray(u, dtype=float)[None, :]
    return ((xi > 0.0) & (xi < u)).astype(float) - ((xi < 0.0) & (xi > u)).astype(float)


def char_conv(xi: float, a: float, b: float) -> float:
    """Characteristic function of conv{a, b}, normalized to 1/2 at endpoints."""
    if xi == a or xi == b:
        return 0.5
    lo, hi = (a, b) if a <= b else (b, a)
    return 1.0 if lo < xi < hi else 0.0


def truncate(u, R: float):
    """Clamp to [-R, R]; R must be positive."""
    if R <= 0:
        raise ValueError(f"truncation level R must be positive, got {R}")
    if np.ndim(u):
        return np.clip(u, -R, R)
    return float(min(max(u, -R), R))


def chi_l1_distance(u: float, v: float) -> float:
    """int |chi(.; u) - chi(.; v)| d(xi), evaluated from the interval structure.

    Equals |u - v|: overlapping same-sign profiles differ on the symmetric
    difference of their supports, opposite-sign profiles on the disjoint
    union.
    """
    if (u >= 0.0) == (v >= 0.0):
        lo, hi = (u, v) if abs(u) <= abs(v) else (v, u)
        return abs(hi - lo)
    return abs(u) + abs(v)


# -- nonlinearities (the diffusion A) ----------------------------------------


@dataclass(frozen=True)
class Nonlinearity:
    """A nondecreasing diffusion nonlinearity with derivative and primitive.

    ``prim`` is S_A(v) = int_0^v A, used by the dissipation bounds and the
    time-swept diagnostics.  All callables are vectorized.
    """

    kind: str
    a: Callable
    da: Callable
    prim: Callable
    params: dict = field(default_factory=dict)
    label: str = ""

    def __call__(self, u):
        return self.a(u)

    def lipschitz(self, lo: float, hi: float) -> float:
        """max A' over [lo, hi] (finite by local Lipschitz continuity)."""
        if self.kind == "identity":
            return 1.0
        if self.kind == "zero":
            return 0.0
        if self.kind == "power":
            m = self.params["m"]
            return m * max(abs(lo), abs(hi)) ** (m - 1.0)
        if self.kind == "piecewise":
            t, s = self.params["knots"], self.params["slopes"]
            k_lo = int(np.searchsorted(t, lo, side="right"))
            k_hi = int(np.searchsorted(t, hi, side="left"))
            return float(np.max(s[k_lo:k_hi + 1]))
        raise ValueError(self.kind)


def identity_nonlinearity() -> Nonlinearity:
    return Nonlinearity("identity",
                        a=lambda u: np.asarray(u, dtype=float) + 0.0,
                        da=lambda u: np.ones_like(np.asarray(u, dtype=float)),
                        prim=lambda u: 0.5 * np.asarray(u, dtype=float) ** 2,
                        label="identity")


def zero_nonlinearity() -> Nonlinearity:
    return Nonlinearity("zero",
                        a=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
                        da=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
                        prim=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
                        label="zero")


def power_nonlinearity(m: float) -> Nonlinearity:
    """Porous-medium style A(u) = |u|^{m-1} u, m >= 1."""
    if m < 1.0:
        raise ValueError(f"power nonlinearity needs m >= 1 (local Lipschitz), got {m}")

    def a(u):
        u = np.asarray(u, dtype=float)
        return np.abs(u) ** (m - 1.0) * u

    def da(u):
        u = np.asarray(u, dtype=float)
        return m * np.abs(u) ** (m - 1.0)

    def prim(u):
        u = np.asarray(u, dtype=float)
        return np.abs(u) ** (m + 1.0) / (m + 1.0)

    return Nonlinearity("power", a, da, prim, params={"m": float(m)}, label=f"power({m:g})")


def piecewise_linear_nonlinearity(knots, slopes) -> Nonlinearity:
    """Piecewise-linear A with A(0) = 0; slopes[k] applies left of knots[k].

    len(slopes) = len(knots) + 1; all slopes must be >= 0 so A is
    nondecreasing.  Flat stretches (zero slope) give strong degeneracy.
    """
    t = np.asarray(knots, dtype=float)
    s = np.asarray(slopes, dtype=float)
    if t.ndim != 1 or s.shape != (t.size + 1,):
        raise ValueError("need len(slopes) == len(knots) + 1")
    if np.any(np.diff(t) <= 0):
        raise ValueError("knots must be strictly increasing")
    if np.any(s < 0):
        raise ValueError("slopes must be nonnegative (A nondecreasing)")

    # values at knots with the A(t[0]) = 0 gauge, then shift so A(0) = 0
    vals = np.concatenate([[0.0], np.cumsum(s[1:-1] * np.diff(t))]) if t.size > 1 \
        else np.array([0.0])

    def raw(u):
        u = np.asarray(u, dtype=float)
        k = np.searchsorted(t, u, side="right")
        base = np.where(k > 0, vals[np.clip(k - 1, 0, t.size - 1)], 0.0)
        anchor = np.where(k > 0, t[np.clip(k - 1, 0, t.size - 1)], t[0])
        return base + s[k] * (u - anchor)

    shift = float(raw(0.0))

    def a(u):
        return raw(u) - shift

    def da(u):
        u = np.asarray(u, dtype=float)
        return s[np.searchsorted(t, u, side="right")]

    # primitive of a: piecewise quadratic, accumulated at the knots
    pvals = np.zeros(t.size)
    for k in range(1, t.size):
        lo, hi = t[k - 1], t[k]
        pvals[k] = pvals[k - 1] + (vals[k - 1] - shift) * (hi - lo) + 0.5 * s[k] * (hi - lo) ** 2

    def prim_raw(u):
        u = np.asarray(u, dtype=float)
        k = np.searchsorted(t, u, side="right")
        kc = np.clip(k - 1, 0, t.size - 1)
        base = np.where(k > 0, pvals[kc], 0.0)
        anchor = np.where(k > 0, t[kc], t[0])
        aval = np.where(k > 0, vals[kc] - shift, -shift)
        return base + aval * (u - anchor) + 0.5 * s[k] * (u - anchor) ** 2

    pshift = float(prim_raw(0.0))

    def prim(u):
        return prim_raw(u) - pshift

    return Nonlinearity("piecewise", a, da, prim,
                        params={"knots": t, "slopes": s}, label="piecewise")


# -- flux specifications ------------------------------------------------------


@dataclass(frozen=True)
class FluxSpec:
    """Convective flux with its monotone (Engquist-Osher) splitting.

    fplus(u) = F(0) + int_0^u max(F', 0), fminus(u) = int_0^u min(F', 0);
    the numerical flux is fplus(a) + fminus(b).  ``fplus_prim``/
    ``fminus_prim`` are their antiderivatives from 0, used by the
    time-swept dissipation recovery.
    """

    kind: str
    f: Callable
    df: Callable
    fplus: Callable
    fminus: Callable
    fplus_prim: Callable
    fminus_prim: Callable
    params: dict = field(default_factory=dict)
    label: str = ""

    def __call__(self, u):
        return self.f(u)

    def lipschitz(self, lo: float, hi: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "linear":
            return abs(self.params["c"])
        if self.kind == "burgers":
            return max(abs(lo), abs(hi))
        if self.kind == "poly":
            crit = self.params["crit"]
            pts = [lo, hi] + [t for t in crit if lo < t < hi]
            return float(np.max(np.abs(self.df(np.array(pts)))))
        raise ValueError(self.kind)


def burgers_flux() -> FluxSpec:
    return FluxSpec(
        kind="burgers",
        f=lambda u: 0.5 * np.asarray(u, dtype=float) ** 2,
        df=lambda u: np.asarray(u, dtype=float) + 0.0,
        fplus=lambda u: 0.5 * np.maximum(np.asarray(u, dtype=float), 0.0) ** 2,
        fminus=lambda u: 0.5 * np.minimum(np.asarray(u, dtype=float), 0.0) ** 2,
        fplus_prim=lambda u: np.maximum(np.asarray(u, dtype=float), 0.0) ** 3 / 6.0,
        fminus_prim=lambda u: np.minimum(np.asarray(u, dtype=float), 0.0) ** 3 / 6.0,
        label="burgers",
    )


def linear_flux(c: float = 1.0) -> FluxSpec:
    cp, cm = max(c, 0.0), min(c, 0.0)
    return FluxSpec(
        kind="linear",
        f=lambda u: c * np.asarray(u, dtype=float),
        df=lambda u: np.full_like(np.asarray(u, dtype=float), c),
        fplus=lambda u: cp * np.asarray(u, dtype=float),
        fminus=lambda u: cm * np.asarray(u, dtype=float),
        fplus_prim=lambda u: 0.5 * cp * np.asarray(u, dtype=float) ** 2,
        fminus_prim=lambda u: 0.5 * cm * np.asarray(u, dtype=float) ** 2,
        params={"c": float(c)},
        label=f"linear({c:g})",
    )


def zero_flux() -> FluxSpec:
    z = lambda u: np.zeros_like(np.asarray(u, dtype=float))
    return FluxSpec("zero", z, z, z, z, z, z, label="zero")


def polynomial_flux(coeffs) -> FluxSpec:
    """F given by coefficients in increasing powers; exact EO split via F' roots."""
    P = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    dP = P.deriv()
    P0 = float(P(0.0))

    roots = dP.roots() if dP.degree() >= 1 else np.array([])
    crit = np.unique(np.real(roots[np.abs(np.imag(roots)) < 1e-12])) if roots.size else np.array([])

    # breakpoints of the sign of F', always including 0 as the anchor
    brk = np.unique(np.concatenate([crit, [0.0]]))

    def _split(sign):
        # cumulative int_0^{brk[k]} of F' restricted to {sign * F' > 0}
        def seg_int(a, b):
            mid = 0.5 * (a + b)
            if sign * float(dP(mid)) > 0.0:
                return float(P(b) - P(a))
            return 0.0

        i0 = int(np.searchsorted(brk, 0.0))
        cum = np.zeros(brk.size)
        for k in range(i0 + 1, brk.size):
            cum[k] = cum[k - 1] + seg_int(brk[k - 1], brk[k])
        for k in range(i0 - 1, -1, -1):
            cum[k] = cum[k + 1] - seg_int(brk[k], brk[k + 1])

        def part(u):
            u = np.asarray(u, dtype=float)
            k = np.clip(np.searchsorted(brk, u, side="right") - 1, 0, brk.size - 1)
            anchor = brk[k]
            base = cum[k]
            mid = 0.5 * (anchor + np.where(u == anchor, anchor + 1e-9, u))
            active = sign * dP(mid) > 0.0
            below = u < brk[0]
            if np.any(below):
                mid_b = 0.5 * (brk[0] + u)
                active = np.where(below, sign * dP(mid_b) > 0.0, active)
                anchor = np.where(below, brk[0], anchor)
                base = np.where(below, cum[0], base)
            return base + np.where(active, P(u) - P(anchor), 0.0)

        return part

    plus_part = _split(+1.0)
    minus_part = _split(-1.0)

    def fplus(u):
        return P0 + plus_part(u)

    def fminus(u):
        return minus_part(u)

    # antiderivatives of the split parts: evaluated by composite exact pieces
    iP = P.integ()

    def _prim(split_fn, sign):
        # int_0^v split(u) du, exact on each monotonicity cell of F'
        cache_nodes = brk
        base_vals = np.zeros(cache_nodes.size)
        i0 = int(np.searchsorted(cache_nodes, 0.0))

        def seg_prim(a, b):
            mid = 0.5 * (a + b)
            fa = float(split_fn(a))
            if sign * float(dP(mid)) > 0.0:
                # split == (P - const) on this segment with split(a) = fa
                co = float(P(a)) - fa
                return float(iP(b) - iP(a)) - co * (b - a)
            return fa * (b - a)

        for k in range(i0 + 1, cache_nodes.size):
            base_vals[k] = base_vals[k - 1] + seg_prim(cache_nodes[k - 1], cache_nodes[k])
        for k in range(i0 - 1, -1, -1):
            base_vals[k] = base_vals[k + 1] - seg_prim(cache_nodes[k], cache_nodes[k + 1])

        def prim(u):
            u = np.atleast_1d(np.asarray(u, dtype=float))
            out = np.empty_like(u)
            for i, v in enumerate(u):
                k = int(np.clip(np.searchsorted(cache_nodes, v, side="right") - 1,
                                0, cache_nodes.size - 1))
                a = cache_nodes[k] if v >= cache_nodes[0] else cache_nodes[0]
                b0 = base_vals[k] if v >= cache_nodes[0] else base_vals[0]
                out[i] = b0 + (seg_prim(a, v) if v > a else -seg_prim(v, a))
            return out if out.size > 1 else float(out[0])

        return prim

    return FluxSpec(
        kind="poly",
        f=lambda u: P(np.asarray(u, dtype=float)),
        df=lambda u: dP(np.asarray(u, dtype=float)),
        fplus=fplus,
        fminus=fminus,
        fplus_prim=_prim(lambda u: fplus(u) - P0, +1.0),
        fminus_prim=_prim(fminus, -1.0),
        params={"coeffs": np.asarray(coeffs, dtype=float), "crit": crit},
        label="poly",
    )


# -- entropies ----------------------------------------------------------------


@dataclass(frozen=True)
class EntropyTriple:
    """Convex C^2 entropy with its derivatives; eta' = S'F' and beta' = S'A'
    are realized by quadrature from the basepoint 0 when needed."""

    s: Callable
    sp: Callable
    spp: Callable
    label: str = ""

    def eta_beta(self, flux: FluxSpec, nonlin: Nonlinearity,
                 lo: float, hi: float, nodes: int = 4097):
        """Cached (eta, beta) on [lo, hi]: cumulative trapezoid of S'F', S'A'."""
        grid = np.linspace(lo, hi, nodes)
        spv = self.sp(grid)
        eta_d = spv * flux.df(grid)
        beta_d = spv * nonlin.da(grid)

        def cum(vals):
            c = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(grid))])
            c -= np.interp(0.0, grid, c)
            return c

        eta_c, beta_c = cum(eta_d), cum(beta_d)
        return (lambda u: np.interp(u, grid, eta_c),
                lambda u: np.interp(u, grid, beta_c))


def quadratic_entropy() -> EntropyTriple:
    return EntropyTriple(
        s=lambda u: np.asarray(u, dtype=float) ** 2,
        sp=lambda u: 2.0 * np.asarray(u, dtype=float),
        spp=lambda u: np.full_like(np.asarray(u, dtype=float), 2.0),
        label="square",
    )


def kruzhkov_entropy(k: float, delta: float) -> EntropyTriple:
    """Smoothed Kruzhkov entropy sqrt((u-k)^2 + delta^2) - delta (C-infinity)."""
    if delta <= 0:
        raise ValueError("smoothing width delta must be positive")

    def s(u):
        return np.sqrt((np.asarray(u, dtype=float) - k) ** 2 + delta ** 2) - delta

    def sp(u):
        d = np.asarray(u, dtype=float) - k
        return d / np.sqrt(d * d + delta ** 2)

    def spp(u):
        d = np.asarray(u, dtype=float) - k
        return delta ** 2 / (d * d + delta ** 2) ** 1.5

    return EntropyTriple(s, sp, spp, label=f"kruzhkov({k:g},{delta:g})")


def taylor_identity_residual(triple: EntropyTriple, nonlin: Nonlinearity,
                             a: float, b: float) -> float:
    """|S'(a)(A(b)-A(a)) - [beta(b)-beta(a) - int S''|A(b)-A(.)| over conv{a,b}]|.

    Both integrals run adaptively to 1e-10; the contract is residual <= 1e-8.
    """
    if a == b:
        return 0.0
    lo, hi = (a, b) if a < b else (b, a)
    kinks = []
    if nonlin.kind == "piecewise":
        kinks = [t for t in nonlin.params["knots"] if lo < t < hi]
    if nonlin.kind == "power" and lo < 0.0 < hi:
        kinks = [0.0]

    beta_diff, _ = quad(lambda s: float(triple.sp(s)) * float(nonlin.da(s)),
                        a, b, epsrel=1e-10, epsabs=1e-13, limit=400,
                        points=kinks or None)

    ab = float(nonlin.a(b))

    def integrand(s):
        return float(triple.spp(s)) * abs(ab - float(nonlin.a(s)))

    xi_int, _ = quad(integrand, lo, hi, epsrel=1e-10, epsabs=1e-13, limit=400,
                     points=kinks or None)
    lhs = float(triple.sp(a)) * (ab - float(nonlin.a(a)))
    return abs(lhs - (beta_diff - xi_int))


# -- the F and G functionals ---------------------------------------------------


def F_functional(nonlin: Nonlinearity, a: float, b: float, c: float, d: float) -> float:
    """int A'(xi) (chi(xi;a)-chi(xi;b)) (chi(xi;c)-chi(xi;d)) dxi, closed form.

    Equals sgn(a-b) sgn(c-d) (A(sup I) - A(inf I)) on the overlap
    I = conv{a,b} cap conv{c,d}, and 0 when I is empty or a point.
    """
    lo = max(min(a, b), min(c, d))
    hi = min(max(a, b), max(c, d))
    if hi <= lo:
        return 0.0
    return float(np.sign(a - b) * np.sign(c - d) * (nonlin.a(hi) - nonlin.a(lo)))


def F_functional_array(nonlin: Nonlinearity, a, b, c, d) -> np.ndarray:
    lo = np.maximum(np.minimum(a, b), np.minimum(c, d))
    hi = np.minimum(np.maximum(a, b), np.maximum(c, d))
    val = np.sign(a - b) * np.sign(c - d) * (nonlin.a(hi) - nonlin.a(lo))
    return np.where(hi > lo, val, 0.0)


def G_functional(nonlin: Nonlinearity, a: float, b: float, c: float, d: float) -> float:
    """|A(b)-A(c)| Char_{conv{a,b}}(c) + |A(d)-A(a)| Char_{conv{c,d}}(a)."""
    av, bv, cv, dv = (float(nonlin.a(v)) for v in (a, b, c, d))
    return abs(bv - cv) * char_conv(c, a, b) + abs(dv - av) * char_conv(a, c, d)


def _char_array(xi, a, b):
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    out = ((xi > lo) & (xi < hi)).astype(float)
    return np.where((xi == a) | (xi == b), 0.5, out)


def G_functional_array(nonlin: Nonlinearity, a, b, c, d) -> np.ndarray:
    av, bv, cv, dv = nonlin.a(a), nonlin.a(b), nonlin.a(c), nonlin.a(d)
    return (np.abs(bv - cv) * _char_array(c, a, b)
            + np.abs(dv - av) * _char_array(a, c, d))


# -- truncation lemma ----------------------------------------------------------


def truncation_identity_holds(a, b, xi, R) -> np.ndarray:
    """1_{(-R,R)}(xi) (chi(xi;a)-chi(xi;b)) == chi(xi;T_R a) - chi(xi;T_R b).

    R may be a scalar or an array aligned with the tuples.
    """
    if np.any(np.asarray(R) <= 0):
        raise ValueError("R must be positive")
    a, b, xi = (np.asarray(v, dtype=float) for v in (a, b, xi))
    ind = (np.abs(xi) < R).astype(float)

    def chi_v(x, u):
        return (((x > 0) & (x < u)).astype(float) - ((x < 0) & (x > u)).astype(float))

    lhs = ind * (chi_v(xi, a) - chi_v(xi, b))
    rhs = chi_v(xi, np.clip(a, -R, R)) - chi_v(xi, np.clip(b, -R, R))
    return lhs == rhs


def truncation_inequality_check(nonlin: Nonlinearity, a, b, xi, R):
    """Both truncation statements at once.

    (i) the chi identity under the cutoff indicator, and
    (ii) |A(b)-A(T_R xi)| Char_{conv{a,b}}(T_R xi)
         >= |A(T_R b)-A(T_R xi)| Char_{conv{T_R a, T_R b}}(T_R xi).
    Returns a boolean (array) that is True where both hold.  R may be a
    scalar or an array aligned with the tuples.
    """
    if np.any(np.asarray(R) <= 0):
        raise ValueError("R must be positive")
    a, b, xi = (np.asarray(v, dtype=float) for v in (a, b, xi))
    R = np.asarray(R, dtype=float)
    ok1 = truncation_identity_holds(a, b, xi, R)
    ta, tb, txi = np.clip(a, -R, R), np.clip(b, -R, R), np.clip(xi, -R, R)
    lhs = np.abs(nonlin.a(b) - nonlin.a(txi)) * _char_array(txi, a, b)
    rhs = np.abs(nonlin.a(tb) - nonlin.a(txi)) * _char_array(txi, ta, tb)
    ok2 = lhs >= rhs - 1e-15 * np.maximum(1.0, np.abs(lhs))
    out = ok1 & ok2
    return out if out.ndim else bool(out)
