"""Discrete jump operator: examples, adjointness, symbol accuracy, FFT path."""

import numpy as np
import pytest

import levyclaw as lc
from levyclaw.kernels import WeightTable
from levyclaw.operator import Boundary, DiscreteOperator
from conftest import dense_g_oracle, symbol_oracle


def periodic_gf(values, length=4.0, x0=-2.0):
    values = np.asarray(values, dtype=float)
    return lc.GridFunction(values, length / values.size, x0, Boundary.PERIODIC)


def two_point_table(h=1.0):
    # single one-sided weight w_1 = 0.25, no singular part
    return WeightTable(h=h, r=0.5 * h, cutoff=1.5 * h,
                       offsets=np.array([1]), weights=np.array([0.25]),
                       sigma2=0.0, lambda_r=0.5, lambda_cutoff=0.0)


def test_constant_annihilated_exactly():
    m = lc.fractional_laplacian(1.2)
    for boundary in Boundary:
        gf = lc.GridFunction(np.full(64, 2.75), 0.05, 0.0, boundary)
        t = m.discrete_weights(0.05, 0.05, 3.2 if boundary is Boundary.PERIODIC
                               else (64 - 0.5) * 0.05)
        out = lc.apply_g(t, gf)
        if boundary is Boundary.PERIODIC:
            assert np.all(out.values == 0.0)
        else:
            # zero extension sees the boundary; interior cells feel the tail
            # identity term only
            assert np.all(np.isfinite(out.values))


def test_two_point_example():
    f = np.zeros(16)
    f[8] = 1.0
    out = lc.apply_g(two_point_table(), periodic_gf(f, length=16.0))
    assert out.values[8] == pytest.approx(0.5, abs=0.0)
    assert out.values[7] == pytest.approx(-0.25, abs=0.0)
    assert out.values[9] == pytest.approx(-0.25, abs=0.0)


def test_plane_wave_symbol():
    n, length, k, alpha = 2048, 2 * np.pi, 2.0, 1.0
    h = length / n
    m = lc.fractional_laplacian(alpha)
    t = m.discrete_weights(h, h, 64 * length)
    x = lc.make_grid(0.0, length, n, Boundary.PERIODIC)
    gf = lc.GridFunction(np.cos(k * x), h, 0.0, Boundary.PERIODIC)
    out = lc.apply_g(t, gf)
    psi = symbol_oracle(m, k)
    rel = np.max(np.abs(out.values - psi * gf.values)) / psi
    assert rel <= 1e-2


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_symbol_convergence_order(alpha):
    # observed L-inf order >= 1 for alpha <= 1 over a 4-level ladder
    length, k = 2 * np.pi, 2.0
    m = lc.fractional_laplacian(alpha)
    psi = symbol_oracle(m, k)
    errs = []
    for n in (256, 512, 1024, 2048):
        h = length / n
        t = m.discrete_weights(h, h, 64 * length)
        x = lc.make_grid(0.0, length, n, Boundary.PERIODIC)
        gf = lc.GridFunction(np.cos(k * x), h, 0.0, Boundary.PERIODIC)
        out = lc.apply_g(t, gf)
        errs.append(np.max(np.abs(out.values - psi * gf.values)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.0), orders


def test_translation_equivariance_exact():
    rng = np.random.default_rng(3)
    m = lc.fractional_laplacian(0.8)
    n = 64
    t = m.discrete_weights(4.0 / n, 4.0 / n, 8.0)
    f = rng.standard_normal(n)
    op = DiscreteOperator(t, n, Boundary.PERIODIC)
    for shift in (1, 7, 33):
        assert np.array_equal(np.roll(op.apply_values(f), shift),
                              op.apply_values(np.roll(f, shift)))


def test_self_adjointness():
    rng = np.random.default_rng(11)
    m = lc.fractional_laplacian(1.0)
    n = 128
    h = 4.0 / n
    t = m.discrete_weights(h, h, 16.0)
    op = DiscreteOperator(t, n, Boundary.PERIODIC)
    for _ in range(100):
        f = rng.standard_normal(n)
        phi = rng.standard_normal(n)
        a = h * float(np.dot(phi, op.apply_values(f)))
        b = h * float(np.dot(f, op.apply_values(phi)))
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def test_fft_matches_direct():
    rng = np.random.default_rng(5)
    m = lc.fractional_laplacian(1.5)
    n = 256
    h = 4.0 / n
    t = m.discrete_weights(h, h, 32.0)
    direct = DiscreteOperator(t, n, Boundary.PERIODIC, strategy="direct")
    fft = DiscreteOperator(t, n, Boundary.PERIODIC, strategy="fft")
    f = rng.standard_normal(n)
    a, b = direct.apply_values(f), fft.apply_values(f)
    scale = np.max(np.abs(a)) or 1.0
    assert np.max(np.abs(a - b)) <= 1e-12 * scale


def test_fft_requires_periodic():
    t = two_point_table()
    with pytest.raises(ValueError):
        DiscreteOperator(t, 32, Boundary.ZERO_EXTENSION, strategy="fft")


def test_zero_extension_matches_dense_oracle():
    rng = np.random.default_rng(9)
    m = lc.uniform_kernel(mass=1.3, radius=0.9)
    n = 48
    h = 4.0 / n
    t = m.discrete_weights(h, h, (n - 0.5) * h)
    f = np.zeros(n)
    f[15:30] = rng.standard_normal(15)
    gf = lc.GridFunction(f, h, -2.0, Boundary.ZERO_EXTENSION)
    out = lc.apply_g(t, gf)
    oracle = dense_g_oracle(t, f, Boundary.ZERO_EXTENSION)
    assert out.values == pytest.approx(oracle, abs=1e-13)


def test_periodic_matches_dense_oracle_with_wraps():
    rng = np.random.default_rng(10)
    m = lc.fractional_laplacian(1.0)
    n = 32
    h = 4.0 / n
    t = m.discrete_weights(h, h, 2 * 4.0)  # cutoff beyond the domain: folding
    f = rng.standard_normal(n)
    op = DiscreteOperator(t, n, Boundary.PERIODIC, tail_smear=False)
    oracle = dense_g_oracle(t, f, Boundary.PERIODIC)
    assert op.apply_values(f) == pytest.approx(oracle, rel=1e-12, abs=1e-12)


def test_spacing_mismatch_rejected():
    t = two_point_table(h=1.0)
    gf = lc.GridFunction(np.zeros(16), 0.5, 0.0, Boundary.PERIODIC)
    with pytest.raises(ValueError):
        lc.apply_g(t, gf)


def test_determinism_bit_identical():
    rng = np.random.default_rng(1)
    m = lc.fractional_laplacian(0.6)
    n = 128
    h = 4.0 / n
    t = m.discrete_weights(h, h, 12.0)
    op = DiscreteOperator(t, n, Boundary.PERIODIC)
    f = rng.standard_normal(n)
    assert np.array_equal(op.apply_values(f), op.apply_values(f))


# -- bilinear form -------------------------------------------------------------------


def test_bilinear_constant_second_slot():
    rng = np.random.default_rng(2)
    m = lc.fractional_laplacian(1.0)
    n = 64
    h = 4.0 / n
    t = m.discrete_weights(h, h, 8.0)
    f = periodic_gf(rng.standard_normal(n))
    c = periodic_gf(np.full(n, 1.7))
    assert lc.bilinear_form(t, f, c) == 0.0


@pytest.mark.parametrize("boundary", list(Boundary))
def test_bilinear_summation_by_parts(boundary):
    rng = np.random.default_rng(4)
    m = lc.fractional_laplacian(0.9)
    n = 64
    h = 4.0 / n
    cutoff = 8.0 if boundary is Boundary.PERIODIC else (n - 0.5) * h
    t = m.discrete_weights(h, h, cutoff)
    for _ in range(10):
        fv = rng.standard_normal(n)
        gv = rng.standard_normal(n)
        if boundary is Boundary.ZERO_EXTENSION:
            fv[:6] = fv[-6:] = 0.0
            gv[:6] = gv[-6:] = 0.0
        f = lc.GridFunction(fv, h, -2.0, boundary)
        f2 = lc.GridFunction(gv, h, -2.0, boundary)
        lhs = lc.bilinear_form(t, f, f2)
        rhs = h * float(np.dot(f2.values, lc.apply_g(t, f).values))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_bilinear_positive_semidefinite():
    rng = np.random.default_rng(6)
    m = lc.fractional_laplacian(1.3)
    n = 48
    h = 4.0 / n
    t = m.discrete_weights(h, h, 8.0)
    for _ in range(100):
        f = periodic_gf(rng.standard_normal(n))
        assert lc.bilinear_form(t, f, f) >= 0.0


def test_bilinear_grid_mismatch():
    t = two_point_table()
    a = lc.GridFunction(np.zeros(16), 1.0, 0.0, Boundary.PERIODIC)
    b = lc.GridFunction(np.zeros(16), 1.0, 0.0, Boundary.ZERO_EXTENSION)
    with pytest.raises(ValueError):
        lc.bilinear_form(t, a, b)


def test_numpy_fallback_matches_numba():
    import levyclaw.operator as opmod
    if not opmod._HAVE_NUMBA:
        pytest.skip("numba unavailable; fallback is the active path")
    rng = np.random.default_rng(13)
    m = lc.fractional_laplacian(1.0)
    n = 64
    h = 4.0 / n
    f = rng.standard_normal(n)
    for boundary in Boundary:
        cutoff = 8.0 if boundary is Boundary.PERIODIC else (n - 0.5) * h
        t = m.discrete_weights(h, h, cutoff)
        op = DiscreteOperator(t, n, boundary)
        fast = op.apply_values(f)
        try:
            opmod._HAVE_NUMBA = False
            slow = DiscreteOperator(t, n, boundary).apply_values(f)
        finally:
            opmod._HAVE_NUMBA = True
        scale = np.max(np.abs(fast)) or 1.0
        assert np.max(np.abs(fast - slow)) <= 1e-12 * scale
