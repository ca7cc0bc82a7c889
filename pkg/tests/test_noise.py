"""White noise sampling, mollifiers, renormalization constant, Wick square,
gauge weights.

The renormalization constant is pinned by a direct lattice-sum oracle, the
noise normalization and the Wick centering by Monte Carlo.
"""

import numpy as np
import pytest

from wnls import (
    GAUSSIAN,
    RAISED_COSINE,
    ConfigError,
    NoiseRealization,
    NonPhysical,
    TorusGrid,
    UnresolvedMollifierWarning,
    build_environment,
    constant_field,
    derivative,
    from_modes,
    gauge_weights,
    get_mollifier,
    laplacian,
    mollify,
    renorm_constant,
    sample_white_noise,
    scale_noise,
    sobolev_norm,
    solve_poisson,
    to_physical,
    wick_gradient_square,
    zero_field,
)

INV_4PI2 = 1.0 / (2.0 * np.pi) ** 2


@pytest.fixture(scope="module")
def grid64():
    return TorusGrid(64)


def _zero_noise(grid):
    return NoiseRealization(seed=0, grid=grid, xi=zero_field(grid))


def test_same_seed_is_bit_identical(grid64):
    a = sample_white_noise(12345, grid64)
    b = sample_white_noise(12345, grid64)
    assert np.array_equal(a.xi.coeffs, b.xi.coeffs)
    c = sample_white_noise(12346, grid64)
    assert not np.array_equal(a.xi.coeffs, c.xi.coeffs)


def test_noise_is_hermitian_and_real(grid64):
    xi = sample_white_noise(7, grid64).xi
    assert xi.is_real
    n = grid64.n
    idx = (-np.arange(n)) % n
    mirrored = np.conj(xi.coeffs[np.ix_(idx, idx)])
    assert np.array_equal(xi.coeffs, mirrored)
    vals = to_physical(xi)
    assert np.max(np.abs(vals.imag)) <= 1e-12 * np.max(np.abs(vals))


def test_noise_zero_mode_vanishes(grid64):
    assert sample_white_noise(99, grid64).xi.coeffs[0, 0] == 0.0


@pytest.mark.oracle
def test_noise_mode_variance_monte_carlo():
    # E|xihat(3,1)|^2 = (2pi)^-2, checked over 10^4 independent seeds.
    grid = TorusGrid(8)
    m = 10_000
    draws = np.empty(m)
    for seed in range(m):
        xi = sample_white_noise(seed, grid).xi
        draws[seed] = np.abs(xi.coeffs[3, 1]) ** 2
    mean = float(np.mean(draws))
    se = float(np.std(draws, ddof=1)) / np.sqrt(m)
    assert abs(mean - INV_4PI2) <= 5.0 * se


def test_scale_noise(grid64):
    noise = sample_white_noise(4, grid64)
    doubled = scale_noise(noise, 2.0)
    assert np.array_equal(doubled.coeffs, 2.0 * noise.xi.coeffs)
    assert np.max(np.abs(scale_noise(noise, 0.0).coeffs)) == 0.0


def test_poisson_cosine_example(grid64):
    xi = from_modes(grid64, {(1, 0): 1.0, (-1, 0): 1.0}, is_real=True)
    y = solve_poisson(NoiseRealization(seed=0, grid=grid64, xi=xi))
    assert abs(y.coeffs[1, 0] - (-1.0)) <= 1e-14
    assert abs(y.coeffs[-1 % 64, 0] - (-1.0)) <= 1e-14
    x1, _ = grid64.nodes()
    assert np.max(np.abs(to_physical(y).real - (-2.0 * np.cos(x1)))) <= 1e-12


def test_poisson_zero_noise(grid64):
    y = solve_poisson(_zero_noise(grid64))
    assert np.max(np.abs(y.coeffs)) == 0.0


@pytest.mark.oracle
def test_poisson_forward_oracle(grid64):
    # Applying the Laplacian to Y returns xi.
    noise = sample_white_noise(21, grid64)
    y = solve_poisson(noise)
    assert y.coeffs[0, 0] == 0.0
    back = laplacian(y)
    scale = np.max(np.abs(noise.xi.coeffs))
    assert np.max(np.abs(back.coeffs - noise.xi.coeffs)) <= 1e-10 * scale


def test_mollify_eps_zero_is_identity(grid64):
    noise = sample_white_noise(3, grid64)
    assert np.array_equal(mollify(noise.xi, 0.0).coeffs, noise.xi.coeffs)


def test_mollify_gaussian_single_mode(grid64):
    f = from_modes(grid64, {(1, 0): 1.0})
    g = mollify(f, 1.0, GAUSSIAN)
    assert abs(g.coeffs[1, 0] - np.exp(-0.5)) <= 1e-12


def test_mollify_rejects_negative_eps(grid64):
    with pytest.raises(ValueError):
        mollify(zero_field(grid64), -0.1)


def test_mollify_h1_distance_nonincreasing(grid64):
    # Per-mode multiplier 1 - rho(eps k) shrinks as eps decreases, so the
    # H^1 distance to the unmollified field does too.
    y = solve_poisson(sample_white_noise(31, grid64))
    dists = [sobolev_norm(mollify(y, 2.0 ** -k, GAUSSIAN) - y, 1.0)
             for k in range(1, 6)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(dists, dists[1:]))


def test_gaussian_mollifier_factorization(grid64):
    # rho(e2 k) = rho(e1 k) rho(sqrt(e2^2 - e1^2) k): mollifying twice at
    # the split scales equals mollifying once at the coarser scale.
    y = solve_poisson(sample_white_noise(17, grid64))
    e1, e2 = 0.1, 0.3
    once = mollify(y, e2, GAUSSIAN)
    twice = mollify(mollify(y, e1, GAUSSIAN), np.sqrt(e2 ** 2 - e1 ** 2), GAUSSIAN)
    assert np.max(np.abs(once.coeffs - twice.coeffs)) <= 1e-14 * np.max(np.abs(y.coeffs))


def test_mollifier_symbols():
    for spec in (GAUSSIAN, RAISED_COSINE):
        assert spec.symbol(0.0) == 1.0
        vals = spec.symbol(np.linspace(0.0, 4.0, 50))
        assert np.all(np.diff(vals) <= 1e-15)
        assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert GAUSSIAN.symbol(1.0) == pytest.approx(np.exp(-0.5), rel=1e-14)
    assert RAISED_COSINE.symbol(1.0) == pytest.approx(0.5, rel=1e-12)
    assert RAISED_COSINE.symbol(2.5) == 0.0


def test_get_mollifier():
    assert get_mollifier("gaussian") is GAUSSIAN
    assert get_mollifier("raised-cosine") is RAISED_COSINE
    with pytest.raises(ConfigError):
        get_mollifier("box")


@pytest.mark.oracle
def test_renorm_constant_direct_lattice_sum():
    # n = 4, rho = 1 (eps = 0): brute-force sum over the 15 nonzero modes
    # of the centered lattice {-2,...,1}^2.
    total = 0.0
    count = 0
    for k1 in range(-2, 2):
        for k2 in range(-2, 2):
            if (k1, k2) == (0, 0):
                continue
            total += 1.0 / (k1 ** 2 + k2 ** 2)
            count += 1
    assert count == 15
    assert total == pytest.approx(7.425, abs=1e-12)
    c = renorm_constant(0.0, GAUSSIAN, TorusGrid(4))
    assert c == pytest.approx(total * INV_4PI2, rel=1e-14)
    assert c == pytest.approx(0.188077, abs=1e-6)


def test_renorm_constant_raised_cosine_vanishes():
    # eps so large that rho(eps k) = 0 on every nonzero mode.
    assert renorm_constant(10.0, RAISED_COSINE, TorusGrid(32)) == 0.0


def test_renorm_constant_monotone_in_eps(grid64):
    cs = [renorm_constant(e, GAUSSIAN, grid64) for e in (0.5, 0.25, 0.125)]
    assert cs[0] < cs[1] < cs[2]


@pytest.mark.oracle
def test_renorm_constant_log_divergence_fit():
    # C_eps against |ln eps| at n = 512, eps = 2^-3..2^-7: linear to
    # R^2 >= 0.99 while the grid still resolves every scale.
    from wnls import linear_fit

    grid = TorusGrid(512)
    eps = [2.0 ** -k for k in range(3, 8)]
    cs = [renorm_constant(e, GAUSSIAN, grid) for e in eps]
    slope, _, r2 = linear_fit([abs(np.log(e)) for e in eps], cs)
    assert slope > 0
    assert r2 >= 0.99


def test_wick_zero_field_is_minus_constant(grid64):
    w = wick_gradient_square(zero_field(grid64), 0.5)
    assert abs(w.coeffs[0, 0] - (-0.5)) <= 1e-14
    assert np.max(np.abs(w.coeffs.flatten()[1:])) == 0.0


def test_wick_cosine_example(grid64):
    x1, _ = grid64.nodes()
    y = from_modes(grid64, {(1, 0): 0.5, (-1, 0): 0.5}, is_real=True)  # cos(x1)
    w = wick_gradient_square(y, 0.0)
    assert np.max(np.abs(to_physical(w).real - np.sin(x1) ** 2)) <= 1e-12


@pytest.mark.oracle
def test_wick_centering_monte_carlo():
    # Sample mean of the spatial average of the Wick square over 10^3 seeds
    # stays within 5 standard errors of 0; the lattice C_eps makes the
    # centering exact in expectation.
    grid = TorusGrid(32)
    eps = 0.25
    c = renorm_constant(eps, GAUSSIAN, grid)
    m = 1000
    avgs = np.empty(m)
    for seed in range(m):
        y = mollify(solve_poisson(sample_white_noise(seed, grid)), eps, GAUSSIAN)
        avgs[seed] = wick_gradient_square(y, c).coeffs[0, 0].real
    mean = float(np.mean(avgs))
    se = float(np.std(avgs, ddof=1)) / np.sqrt(m)
    assert abs(mean) <= 5.0 * se


def test_gauge_weights_identity_at_zero(grid64):
    w = gauge_weights(zero_field(grid64))
    for arr in (w.e_plus, w.e_minus, w.e_plus2, w.e_minus2):
        assert np.allclose(arr, 1.0, atol=1e-15)
    assert w.k_eps == 1.0


def test_gauge_weights_cosine_k_eps(grid64):
    x1, _ = grid64.nodes()
    from wnls import to_spectral

    y = to_spectral(grid64, np.cos(x1), is_real=True)
    w = gauge_weights(y)
    assert w.k_eps == pytest.approx(np.exp(4.0), rel=1e-12)


def test_gauge_weights_product_identity(grid64):
    y = solve_poisson(sample_white_noise(41, grid64))
    w = gauge_weights(y)
    assert np.max(np.abs(w.e_plus2 * w.e_minus2 - 1.0)) <= 1e-12
    assert np.max(np.abs(w.e_plus * w.e_minus - 1.0)) <= 1e-12


def test_gauge_weights_overflow_guard(grid64):
    with pytest.raises(NonPhysical, match="exceeds"):
        gauge_weights(constant_field(grid64, 301.0))


def test_gauge_weights_reject_complex_field(grid64):
    f = from_modes(grid64, {(1, 0): 1.0})  # e^{ix1} is not real
    with pytest.raises(NonPhysical, match="real"):
        gauge_weights(f)


def test_build_environment_members(grid64):
    noise = sample_white_noise(51, grid64)
    eps = 0.25
    env = build_environment(noise, eps, GAUSSIAN, amplitude=1.0)
    assert env.eps == eps and env.seed == 51
    assert np.array_equal(env.y_eps.coeffs,
                          mollify(solve_poisson(noise), eps, GAUSSIAN).coeffs)
    assert np.array_equal(env.xi_eps.coeffs, mollify(noise.xi, eps, GAUSSIAN).coeffs)
    assert np.array_equal(env.grad_y_eps.comp1.coeffs,
                          derivative(env.y_eps, 1).coeffs)
    assert env.c_eps == pytest.approx(renorm_constant(eps, GAUSSIAN, grid64),
                                      rel=1e-14)
    assert env.k_eps == gauge_weights(env.y_eps).k_eps


def test_environment_wick_is_centered_gradient_square(grid64):
    # At eps = 0.5 the mollifier kills everything near the dealias cut, so
    # the dealiased squares agree with the plain ones to roundoff.
    env = build_environment(sample_white_noise(61, grid64), 0.5, GAUSSIAN)
    g1 = to_physical(env.grad_y_eps.comp1).real
    g2 = to_physical(env.grad_y_eps.comp2).real
    direct = g1 ** 2 + g2 ** 2 - env.c_eps
    got = to_physical(env.wick).real
    scale = np.max(np.abs(direct))
    assert np.max(np.abs(got - direct)) <= 1e-12 * scale


def test_environment_amplitude_scaling(grid64):
    noise = sample_white_noise(71, grid64)
    base = build_environment(noise, 0.25, GAUSSIAN, amplitude=1.0)
    scaled = build_environment(noise, 0.25, GAUSSIAN, amplitude=2.0)
    assert np.max(np.abs(scaled.y_eps.coeffs - 2.0 * base.y_eps.coeffs)) <= 1e-14
    assert scaled.c_eps == pytest.approx(4.0 * base.c_eps, rel=1e-14)


def test_environment_zero_amplitude(grid64):
    env = build_environment(sample_white_noise(81, grid64), 0.25, GAUSSIAN,
                            amplitude=0.0)
    assert np.max(np.abs(env.y_eps.coeffs)) == 0.0
    assert env.c_eps == 0.0
    assert env.k_eps == 1.0


def test_environment_warns_when_unresolved(grid64):
    noise = sample_white_noise(91, grid64)
    with pytest.warns(UnresolvedMollifierWarning):
        build_environment(noise, 0.01, GAUSSIAN)
    with pytest.raises(ValueError):
        build_environment(noise, -1.0, GAUSSIAN)
