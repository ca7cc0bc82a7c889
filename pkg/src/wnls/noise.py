"""Spatial white noise, mollification, and the renormalized environment.

White noise on the torus is sampled in Fourier space with independent modes
of variance E|xihat(k)|^2 = (2pi)^-2 and zero mean mode, which corresponds to
delta-correlated noise under the e^{ikx} convention.  Its zero-mean solution
Y of Laplace(Y) = xi is mollified at scale eps by a radial Fourier multiplier
rhohat(eps k).  The squared gradient of Y_eps concentrates around the
diverging constant

    C_eps = (2pi)^-2 sum_{k != 0} rhohat(eps k)^2 / |k|^2,

and the Wick square |grad Y_eps|^2 - C_eps is what enters the transformed
energy.  ``build_environment`` bundles everything a solver run needs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NonPhysical
from .spectral import (
    SpectralField,
    TorusGrid,
    VectorField,
    derivative,
    gradient,
    inverse_laplacian,
    to_physical,
)

# Exponent bound before exp() overflows or loses all accuracy.
_EXP_CAP = 300.0


class UnresolvedMollifierWarning(UserWarning):
    """eps is below the resolution threshold 4/n of the grid."""


@dataclass(frozen=True)
class MollifierSpec:
    """Radial Fourier multiplier rhohat with rhohat(0) = 1.

    kinds:
        gaussian       exp(-|kappa|^2 / 2)
        raised-cosine  cos^2(pi |kappa| / 4) for |kappa| <= 2, else 0
    """

    kind: str

    def symbol(self, kappa) -> np.ndarray:
        kappa = np.abs(np.asarray(kappa, dtype=np.float64))
        if self.kind == "gaussian":
            return np.exp(-0.5 * kappa ** 2)
        if self.kind == "raised-cosine":
            return np.where(kappa <= 2.0, np.cos(np.pi * kappa / 4.0) ** 2, 0.0)
        raise ConfigError(f"unknown mollifier kind '{self.kind}'")


GAUSSIAN = MollifierSpec("gaussian")
RAISED_COSINE = MollifierSpec("raised-cosine")

_MOLLIFIERS = {"gaussian": GAUSSIAN, "raised-cosine": RAISED_COSINE}


def get_mollifier(kind: str) -> MollifierSpec:
    try:
        return _MOLLIFIERS[kind]
    except KeyError:
        raise ConfigError(f"unknown mollifier kind '{kind}'") from None


@dataclass(frozen=True)
class NoiseRealization:
    """One draw of spatial white noise, keyed by its seed."""

    seed: int
    grid: TorusGrid
    xi: SpectralField


@lru_cache(maxsize=32)
def _half_lattice(n: int):
    """Index bookkeeping for Hermitian sampling on the centered lattice.

    Returns flat-index arrays (representatives, their conjugate mirrors,
    self-conjugate modes).  Representatives are the half lattice
    {k1 > 0} | {k1 = 0, k2 > 0} | {k1 = -n/2, k2 > 0} in lexicographic
    order on the centered pair (k1, k2); the three self-conjugate modes
    (-n/2, -n/2), (-n/2, 0), (0, -n/2) follow the same order.  The mirror
    of k is -k with Nyquist components fixed.
    """
    half = n // 2
    ks = np.arange(-half, half)
    K1, K2 = np.meshgrid(ks, ks, indexing="ij")
    rep = (K1 > 0) | ((K1 == 0) & (K2 > 0)) | ((K1 == -half) & (K2 > 0))
    r1, r2 = K1[rep], K2[rep]
    m1 = np.where(r1 == -half, -half, -r1)
    m2 = np.where(r2 == -half, -half, -r2)
    on_axis = np.isin(K1, (0, -half)) & np.isin(K2, (0, -half))
    selfc = on_axis & ~((K1 == 0) & (K2 == 0))
    s1, s2 = K1[selfc], K2[selfc]

    def flat(a, b):
        return np.ravel_multi_index(((a % n), (b % n)), (n, n))

    return flat(r1, r2), flat(m1, m2), flat(s1, s2)


def sample_white_noise(seed: int, grid: TorusGrid) -> NoiseRealization:
    """Draw white noise with E|xihat(k)|^2 = (2pi)^-2 and xihat(0) = 0.

    One Gaussian stream per seed, consumed in the fixed half-lattice order,
    so a given (seed, n) always yields the same realization.  Hermitian
    symmetry is exact by construction and the physical field is real.
    """
    n = grid.n
    rep, conj, selfc = _half_lattice(n)
    nrep = rep.size
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(2 * nrep + selfc.size)
    sigma = 1.0 / (2.0 * np.pi)
    re = z[0:2 * nrep:2] * (sigma / np.sqrt(2.0))
    im = z[1:2 * nrep:2] * (sigma / np.sqrt(2.0))
    coeffs = np.zeros(n * n, dtype=np.complex128)
    coeffs[rep] = re + 1j * im
    coeffs[conj] = re - 1j * im
    coeffs[selfc] = z[2 * nrep:] * sigma
    coeffs = coeffs.reshape(n, n)
    coeffs[0, 0] = 0.0
    xi = SpectralField(grid, coeffs, is_real=True)
    return NoiseRealization(seed=int(seed), grid=grid, xi=xi)


def scale_noise(noise: NoiseRealization, amplitude: float) -> SpectralField:
    """The field amplitude * xi; amplitude 0 gives the zero field."""
    return noise.xi * float(amplitude)


def solve_poisson(noise: NoiseRealization) -> SpectralField:
    """Zero-mean solution Y of Laplace(Y) = xi."""
    return inverse_laplacian(noise.xi)


def mollify(f: SpectralField, eps: float,
            mollifier: MollifierSpec = GAUSSIAN) -> SpectralField:
    """Multiply the spectrum by rhohat(eps |k|); eps = 0 is the identity."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return f
    mult = mollifier.symbol(eps * f.grid.abs_k)
    return SpectralField(f.grid, f.coeffs * mult, is_real=f.is_real)


def renorm_constant(eps: float, mollifier: MollifierSpec,
                    grid: TorusGrid) -> float:
    """C_eps = (2pi)^-2 sum over nonzero lattice modes of rhohat(eps k)^2/|k|^2.

    The sum runs over the full centered lattice of the grid.  For a fixed
    mollifier it grows like |ln eps| as eps decreases, until the grid cutoff
    saturates it.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    sym = mollifier.symbol(eps * grid.abs_k)
    nz = grid.k_sq > 0
    total = np.sum(sym[nz] ** 2 / grid.k_sq[nz])
    return float(total / (2.0 * np.pi) ** 2)


def wick_gradient_square(y_eps: SpectralField, c_eps: float) -> SpectralField:
    """The centered square |grad Y_eps|^2 - C_eps as a real field.

    The gradient components are truncated by the 2/3 rule before squaring;
    the square of the truncated band fits on the grid, so no aliased mode
    enters and no output truncation is applied.
    """
    grid = y_eps.grid
    parts = []
    for axis in (1, 2):
        comp = derivative(y_eps, axis)
        w = np.fft.ifft2(comp.coeffs * grid.dealias_mask) * grid.n ** 2
        parts.append(w.real ** 2 + w.imag ** 2)
    values = parts[0] + parts[1] - c_eps
    return SpectralField(grid, np.fft.fft2(values) / grid.n ** 2, is_real=True)


@dataclass(frozen=True)
class GaugeWeights:
    """Pointwise exponential weights of the gauge transform."""

    e_plus: np.ndarray       # e^{Y}
    e_minus: np.ndarray      # e^{-Y}
    e_plus2: np.ndarray      # e^{2Y}
    e_minus2: np.ndarray     # e^{-2Y}
    k_eps: float             # ||e^{2Y}||_inf * ||e^{-2Y}||_inf


def gauge_weights(y_eps: SpectralField) -> GaugeWeights:
    """Exponential weights e^{+-Y}, e^{+-2Y} evaluated on the nodes.

    Requires a physically real field with |Y| <= 300 so the doubled
    exponent stays representable.
    """
    w = to_physical(y_eps)
    scale = np.max(np.abs(w))
    if scale > 0 and np.max(np.abs(w.imag)) > 1e-8 * scale:
        raise NonPhysical("gauge weights require a real field")
    vals = w.real
    amax = float(np.max(np.abs(vals))) if vals.size else 0.0
    if amax > _EXP_CAP:
        raise NonPhysical(
            f"max |Y| = {amax:.3g} exceeds {_EXP_CAP:g}; exponential weights overflow"
        )
    e_plus = np.exp(vals)
    e_minus = np.exp(-vals)
    e_plus2 = np.exp(2.0 * vals)
    e_minus2 = np.exp(-2.0 * vals)
    k_eps = float(np.max(e_plus2) * np.max(e_minus2))
    return GaugeWeights(e_plus, e_minus, e_plus2, e_minus2, k_eps)


@dataclass(frozen=True)
class RenormEnvironment:
    """Everything derived from one noise draw at one mollification scale.

    All members refer to the scaled noise amplitude * xi: Y_eps and its
    gradient scale linearly, C_eps and the Wick square quadratically, and
    the weights exponentiate the scaled field.  Environments built from the
    same NoiseRealization at different eps share the same underlying Y.
    """

    grid: TorusGrid
    seed: int
    eps: float
    mollifier: MollifierSpec
    amplitude: float
    y_eps: SpectralField
    grad_y_eps: VectorField
    xi_eps: SpectralField
    c_eps: float
    wick: SpectralField
    weights: GaugeWeights = field(repr=False)

    @property
    def k_eps(self) -> float:
        return self.weights.k_eps


def build_environment(noise: NoiseRealization, eps: float,
                      mollifier: MollifierSpec = GAUSSIAN,
                      amplitude: float = 1.0) -> RenormEnvironment:
    """Assemble the renormalized environment for one (noise, eps) pair.

    Warns (does not fail) when 0 < eps < 4/n; callers that refuse to run at
    unresolved scales handle that policy themselves.
    """
    grid = noise.grid
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if 0 < eps < 4.0 / grid.n:
        warnings.warn(
            f"eps = {eps:.3g} is below 4/n = {4.0 / grid.n:.3g}; "
            "the mollifier is not resolved by the grid",
            UnresolvedMollifierWarning,
            stacklevel=2,
        )
    xi = scale_noise(noise, amplitude)
    y = inverse_laplacian(xi)
    y_eps = mollify(y, eps, mollifier)
    xi_eps = mollify(xi, eps, mollifier)
    c_eps = amplitude ** 2 * renorm_constant(eps, mollifier, grid)
    wick = wick_gradient_square(y_eps, c_eps)
    weights = gauge_weights(y_eps)
    return RenormEnvironment(
        grid=grid,
        seed=noise.seed,
        eps=float(eps),
        mollifier=mollifier,
        amplitude=float(amplitude),
        y_eps=y_eps,
        grad_y_eps=gradient(y_eps),
        xi_eps=xi_eps,
        c_eps=c_eps,
        wick=wick,
        weights=weights,
    )
