"""Spectral core: transforms, multipliers, products, norms.

Oracle tests compare against independently computed references: finite
differences on a refined grid for the derivative, zero-padded products,
and refined-grid quadrature for the norms.
"""

import numpy as np
import pytest

from wnls import (
    GridMismatch,
    NonZeroMean,
    SpectralField,
    TorusGrid,
    constant_field,
    dealias,
    derivative,
    from_modes,
    gradient,
    inverse_laplacian,
    laplacian,
    lp_norm,
    pointwise_product,
    random_band_limited,
    sobolev_norm,
    to_physical,
    to_spectral,
    zero_field,
)

TWO_PI = 2.0 * np.pi


def _embed(f: SpectralField, big: TorusGrid) -> SpectralField:
    """Copy centered-lattice coefficients onto a finer grid (zero padding)."""
    n, N = f.grid.n, big.n
    assert N >= n
    coeffs = np.zeros((N, N), dtype=np.complex128)
    half = n // 2
    for k1 in range(-half, half):
        for k2 in range(-half, half):
            coeffs[k1 % N, k2 % N] = f.coeffs[k1 % n, k2 % n]
    return SpectralField(big, coeffs, is_real=f.is_real)


@pytest.fixture(scope="module")
def grid32():
    return TorusGrid(32)


def test_grid_validation():
    with pytest.raises(ValueError, match="n must be even and >= 4"):
        TorusGrid(63)
    with pytest.raises(ValueError, match="n must be even and >= 4"):
        TorusGrid(2)
    assert TorusGrid(16).n == 16


def test_grid_equality_and_hash():
    assert TorusGrid(16) == TorusGrid(16)
    assert TorusGrid(16) != TorusGrid(32)
    assert hash(TorusGrid(16)) == hash(TorusGrid(16))


def test_field_shape_mismatch(grid32):
    with pytest.raises(GridMismatch):
        SpectralField(grid32, np.zeros((16, 16), dtype=complex))


def test_field_is_immutable(grid32):
    f = zero_field(grid32)
    with pytest.raises(AttributeError):
        f.is_real = False
    with pytest.raises(ValueError):
        f.coeffs[0, 0] = 1.0


def test_roundtrip_physical_spectral(grid32):
    rng = np.random.default_rng(3)
    values = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    f = to_spectral(grid32, values)
    assert np.max(np.abs(to_physical(f) - values)) <= 1e-12 * np.max(np.abs(values))


def test_constant_mode_convention(grid32):
    # f ≡ c is carried entirely by the (0, 0) coefficient.
    f = constant_field(grid32, 2.5 - 1.0j)
    vals = to_physical(f)
    assert np.allclose(vals, 2.5 - 1.0j, atol=1e-13)
    g = to_spectral(grid32, np.full((32, 32), 7.0))
    assert abs(g.coeffs[0, 0] - 7.0) <= 1e-12
    assert np.max(np.abs(g.coeffs.flatten()[1:])) <= 1e-12


def test_cosine_mode_pair(grid32):
    # 2cos(x1) = e^{ix1} + e^{-ix1}.
    x1, _ = grid32.nodes()
    f = to_spectral(grid32, 2.0 * np.cos(x1), is_real=True)
    assert abs(f.coeffs[1, 0] - 1.0) <= 1e-12
    assert abs(f.coeffs[-1 % 32, 0] - 1.0) <= 1e-12


def test_derivative_sin_to_cos(grid32):
    x1, _ = grid32.nodes()
    f = to_spectral(grid32, np.sin(x1), is_real=True)
    df = derivative(f, 1)
    assert df.is_real
    assert np.max(np.abs(to_physical(df).real - np.cos(x1))) <= 1e-12


def test_derivative_of_constant(grid32):
    f = constant_field(grid32, 4.0)
    for axis in (1, 2):
        assert np.max(np.abs(derivative(f, axis).coeffs)) == 0.0


def test_derivative_axis_validation(grid32):
    with pytest.raises(ValueError):
        derivative(zero_field(grid32), 3)


def test_derivative_preserves_realness():
    # The Nyquist row is unpaired; the odd multiplier must zero it or the
    # derivative of a real field picks up an imaginary part.
    grid = TorusGrid(8)
    rng = np.random.default_rng(0)
    f = to_spectral(grid, rng.standard_normal((8, 8)), is_real=True)
    for axis in (1, 2):
        vals = to_physical(derivative(f, axis))
        assert np.max(np.abs(vals.imag)) <= 1e-12 * max(np.max(np.abs(vals)), 1.0)


@pytest.mark.oracle
def test_derivative_finite_difference_oracle(grid32):
    # 4th-order centered differences on a 16x-refined grid against the
    # spectral derivative evaluated on the same nodes.
    rng = np.random.default_rng(11)
    f = random_band_limited(grid32, rng, max_mode=5)
    fine = TorusGrid(512)
    vals = to_physical(_embed(f, fine))
    h = TWO_PI / fine.n
    for axis, ax in ((1, 0), (2, 1)):
        fd = (-np.roll(vals, -2, axis=ax) + 8.0 * np.roll(vals, -1, axis=ax)
              - 8.0 * np.roll(vals, 1, axis=ax) + np.roll(vals, 2, axis=ax)) / (12.0 * h)
        exact = to_physical(_embed(derivative(f, axis), fine))
        scale = np.max(np.abs(exact))
        assert np.max(np.abs(fd - exact)) <= 1e-6 * scale


def test_inverse_laplacian_single_modes(grid32):
    g = inverse_laplacian(from_modes(grid32, {(2, 0): 1.0}))
    assert abs(g.coeffs[2, 0] - (-0.25)) <= 1e-14
    g = inverse_laplacian(from_modes(grid32, {(1, 1): 1.0}))
    assert abs(g.coeffs[1, 1] - (-0.5)) <= 1e-14


def test_inverse_laplacian_requires_zero_mean(grid32):
    with pytest.raises(NonZeroMean):
        inverse_laplacian(constant_field(grid32, 1.0))


@pytest.mark.oracle
def test_inverse_laplacian_forward_oracle(grid32):
    # Applying d1 d1 + d2 d2 to the output recovers the (mean-free, Nyquist-
    # free) input; derivative composition and the -1/|k|^2 multiplier must
    # agree mode by mode.
    rng = np.random.default_rng(7)
    f = random_band_limited(grid32, rng, max_mode=15)
    f = f - constant_field(grid32, f.coeffs[0, 0])
    g = inverse_laplacian(f)
    assert abs(g.coeffs[0, 0]) == 0.0
    back = (derivative(derivative(g, 1), 1) + derivative(derivative(g, 2), 2))
    scale = np.max(np.abs(f.coeffs))
    assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-10 * scale


def test_laplacian_inverse_roundtrip(grid32):
    rng = np.random.default_rng(8)
    f = random_band_limited(grid32, rng, max_mode=10)
    f = f - constant_field(grid32, f.coeffs[0, 0])
    h = laplacian(inverse_laplacian(f))
    assert np.max(np.abs(h.coeffs - f.coeffs)) <= 1e-12 * np.max(np.abs(f.coeffs))


def test_derivative_commutes_with_inverse_laplacian(grid32):
    rng = np.random.default_rng(9)
    f = random_band_limited(grid32, rng, max_mode=15)
    f = f - constant_field(grid32, f.coeffs[0, 0])
    scale = np.max(np.abs(f.coeffs))
    for axis in (1, 2):
        a = derivative(inverse_laplacian(f), axis)
        b = inverse_laplacian(derivative(f, axis))
        assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-12 * scale


def test_product_with_constant_is_exact(grid32):
    rng = np.random.default_rng(5)
    g = random_band_limited(grid32, rng, max_mode=9)
    two = constant_field(grid32, 2.0)
    prod = pointwise_product(two, g)
    assert np.max(np.abs(prod.coeffs - 2.0 * g.coeffs)) <= 1e-13 * np.max(np.abs(g.coeffs))


def test_product_of_plane_waves_dealiased():
    grid = TorusGrid(16)
    f = from_modes(grid, {(1, 0): 1.0})
    prod = pointwise_product(f, f, dealias=True)
    assert abs(prod.coeffs[2, 0] - 1.0) <= 1e-13
    mask = np.ones((16, 16), dtype=bool)
    mask[2, 0] = False
    assert np.max(np.abs(prod.coeffs[mask])) <= 1e-13


def test_product_grid_mismatch(grid32):
    with pytest.raises(GridMismatch):
        pointwise_product(zero_field(grid32), zero_field(TorusGrid(16)))


@pytest.mark.oracle
def test_product_zero_padding_oracle(grid32):
    # Dealiased product against the alias-free product computed on a 2x
    # grid: inputs truncated to the 2/3 band have bandwidth 10, so their
    # product (bandwidth 20) is exact on n = 64.
    rng = np.random.default_rng(13)
    raw_f = to_spectral(grid32, rng.standard_normal((32, 32))
                        + 1j * rng.standard_normal((32, 32)))
    raw_g = to_spectral(grid32, rng.standard_normal((32, 32))
                        + 1j * rng.standard_normal((32, 32)))
    got = pointwise_product(raw_f, raw_g, dealias=True)

    big = TorusGrid(64)
    bf = _embed(dealias(raw_f), big)
    bg = _embed(dealias(raw_g), big)
    oracle = to_spectral(big, to_physical(bf) * to_physical(bg))
    scale = np.max(np.abs(oracle.coeffs))
    half = 16
    for k1 in range(-half, half):
        for k2 in range(-half, half):
            want = oracle.coeffs[k1 % 64, k2 % 64] if grid32.dealias_mask[k1 % 32, k2 % 32] else 0.0
            assert abs(got.coeffs[k1 % 32, k2 % 32] - want) <= 1e-10 * scale


def test_product_symmetric_and_bilinear(grid32):
    rng = np.random.default_rng(17)
    f = random_band_limited(grid32, rng, max_mode=12)
    g = random_band_limited(grid32, rng, max_mode=12)
    h = random_band_limited(grid32, rng, max_mode=12)
    scale = np.max(np.abs(pointwise_product(f, g, dealias=True).coeffs)) + 1.0
    ab = pointwise_product(f, g, dealias=True)
    ba = pointwise_product(g, f, dealias=True)
    assert np.max(np.abs(ab.coeffs - ba.coeffs)) <= 1e-13 * scale
    lin = pointwise_product(f + 0.5 * h, g, dealias=True)
    split = pointwise_product(f, g, dealias=True) + 0.5 * pointwise_product(h, g, dealias=True)
    assert np.max(np.abs(lin.coeffs - split.coeffs)) <= 1e-12 * scale


def test_lp_norm_constant(grid32):
    f = constant_field(grid32, -3.0)
    for p in (1, 2, 4):
        assert abs(lp_norm(f, p) - 3.0 * TWO_PI ** (2.0 / p)) <= 1e-12
    assert abs(lp_norm(f, np.inf) - 3.0) <= 1e-13


def test_lp_norm_sine():
    grid = TorusGrid(64)
    x1, _ = grid.nodes()
    f = to_spectral(grid, np.sin(x1), is_real=True)
    assert abs(lp_norm(f, 2) - np.pi * np.sqrt(2.0)) <= 1e-12


def test_lp_norm_rejects_unsupported_p(grid32):
    with pytest.raises(ValueError):
        lp_norm(zero_field(grid32), 3)


@pytest.mark.oracle
def test_lp_norm_refined_quadrature_oracle(grid32):
    # p = 2, 4 on a trig polynomial of degree 7: |f|^p is band-limited well
    # below both grids, so the two quadratures agree to roundoff.  For
    # p = 1 the field is kept real and positive so |f| itself stays
    # band-limited.
    rng = np.random.default_rng(19)
    f = random_band_limited(grid32, rng, max_mode=7)
    fine = TorusGrid(128)
    f_fine = _embed(f, fine)
    for p in (2, 4):
        a, b = lp_norm(f, p), lp_norm(f_fine, p)
        assert abs(a - b) <= 1e-8 * b
    g = random_band_limited(grid32, rng, max_mode=7, is_real=True)
    g = constant_field(grid32, 2.0) + g * (0.9 / lp_norm(g, np.inf))
    a, b = lp_norm(g, 1), lp_norm(_embed(g, fine), 1)
    assert abs(a - b) <= 1e-8 * b


def test_sobolev_norm_plane_wave(grid32):
    f = from_modes(grid32, {(1, 0): 1.0})
    assert abs(sobolev_norm(f, 1.0) - TWO_PI * np.sqrt(2.0)) <= 1e-12


def test_sobolev_norm_constant(grid32):
    f = constant_field(grid32, 1.0)
    for s in (-1.0, 0.0, 2.0):
        assert abs(sobolev_norm(f, s) - TWO_PI) <= 1e-12


def test_sobolev_norm_matches_l2_at_s_zero(grid32):
    rng = np.random.default_rng(23)
    f = random_band_limited(grid32, rng, max_mode=12)
    assert abs(sobolev_norm(f, 0.0) - lp_norm(f, 2)) <= 1e-12 * lp_norm(f, 2)


def test_sobolev_multiplier_identity(grid32):
    # (1+|k|^2)^2 = 1 + 2|k|^2 + |k|^4, checked through derivative and
    # Laplacian compositions on a Nyquist-free field.
    rng = np.random.default_rng(29)
    f = random_band_limited(grid32, rng, max_mode=7)
    l2 = lp_norm(f, 2) ** 2
    grad2 = lp_norm(derivative(f, 1), 2) ** 2 + lp_norm(derivative(f, 2), 2) ** 2
    lap2 = lp_norm(laplacian(f), 2) ** 2
    combined = np.sqrt(l2 + 2.0 * grad2 + lap2)
    h2 = sobolev_norm(f, 2.0)
    assert abs(h2 - combined) <= 1e-10 * h2


def test_sobolev_monotone_in_s_for_mean_free(grid32):
    rng = np.random.default_rng(31)
    f = random_band_limited(grid32, rng, max_mode=10)
    f = f - constant_field(grid32, f.coeffs[0, 0])
    values = [sobolev_norm(f, s) for s in (-1.0, 0.0, 0.5, 1.0, 1.5, 2.0)]
    assert all(a <= b * (1 + 1e-14) for a, b in zip(values, values[1:]))


def test_parseval(grid32):
    rng = np.random.default_rng(37)
    f = to_spectral(grid32, rng.standard_normal((32, 32))
                    + 1j * rng.standard_normal((32, 32)))
    lhs = TWO_PI ** 2 * np.sum(np.abs(f.coeffs) ** 2)
    rhs = lp_norm(f, 2) ** 2
    assert abs(lhs - rhs) <= 1e-12 * rhs


def test_dealias_band(grid32):
    # 2/3 rule: survivors satisfy 3 max(|k1|, |k2|) <= n.
    rng = np.random.default_rng(41)
    f = to_spectral(grid32, rng.standard_normal((32, 32)))
    g = dealias(f)
    kmax = np.maximum(np.abs(grid32.k1), np.abs(grid32.k2))
    assert np.all(g.coeffs[kmax * 3 > 32] == 0)
    keep = kmax * 3 <= 32
    assert np.array_equal(g.coeffs[keep], f.coeffs[keep])


def test_vector_field_gradient(grid32):
    rng = np.random.default_rng(43)
    f = random_band_limited(grid32, rng, max_mode=6)
    v = gradient(f)
    assert v.grid == grid32
    assert np.array_equal(v.comp1.coeffs, derivative(f, 1).coeffs)
    assert np.array_equal(v.comp2.coeffs, derivative(f, 2).coeffs)


def test_from_modes_rejects_out_of_lattice():
    grid = TorusGrid(8)
    with pytest.raises(ValueError):
        from_modes(grid, {(4, 0): 1.0})


def test_scalar_multiplication_keeps_realness(grid32):
    x1, _ = grid32.nodes()
    f = to_spectral(grid32, np.cos(x1), is_real=True)
    assert (2.0 * f).is_real
    assert not (1j * f).is_real
    with pytest.raises(TypeError):
        f * f
