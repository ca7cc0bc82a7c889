"""Fourier-side representation of fields on the square torus [0, 2pi]^2.

Fields are identified with their Fourier coefficients under the convention

    f(x) = sum_k fhat(k) exp(i k . x),

where k runs over the centered integer lattice {-n/2, ..., n/2 - 1}^2.
Coefficients are stored in FFT layout: axis 0 carries k1, axis 1 carries k2,
both wrapped modulo n, so the constant mode sits at index (0, 0).  With this
convention ``to_physical`` is ``ifft2 * n**2`` and ``to_spectral`` is
``fft2 / n**2``.

Derivative multipliers are odd in k, so the unpaired Nyquist row k = -n/2 is
zeroed when differentiating.  Even multipliers (Laplacian, its inverse,
Sobolev weights) use the full lattice.
"""

from __future__ import annotations

import numpy as np

from .errors import GridMismatch, NonZeroMean

TWO_PI = 2.0 * np.pi


class TorusGrid:
    """Uniform n-by-n grid on [0, 2pi]^2 with its wavenumber bookkeeping.

    Parameters
    ----------
    n : int
        Number of nodes per axis.  Must be even and at least 4 so that the
        centered lattice and the 2/3-rule dealiasing band are well defined.
    """

    def __init__(self, n: int):
        if n % 2 != 0 or n < 4:
            raise ValueError("n must be even and >= 4")
        self.n = int(n)
        k1d = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        self.k1 = k1d[:, None] * np.ones(n, dtype=np.int64)[None, :]
        self.k2 = np.ones(n, dtype=np.int64)[:, None] * k1d[None, :]
        self.k_sq = (self.k1 ** 2 + self.k2 ** 2).astype(np.float64)
        self.abs_k = np.sqrt(self.k_sq)
        # 2/3 rule: keep modes with max(|k1|, |k2|) <= n/3.
        kmax = np.maximum(np.abs(self.k1), np.abs(self.k2))
        self.dealias_mask = (3 * kmax <= n)
        self.cell_area = (TWO_PI / n) ** 2
        self._deriv_mult = {}
        for axis, karr in ((1, self.k1), (2, self.k2)):
            mult = 1j * karr.astype(np.float64)
            mult[karr == -n // 2] = 0.0
            self._deriv_mult[axis] = mult

    def nodes(self):
        """Physical node coordinates as a meshgrid pair (X1, X2)."""
        x = TWO_PI * np.arange(self.n) / self.n
        return np.meshgrid(x, x, indexing="ij")

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and other.n == self.n

    def __hash__(self):
        return hash(("TorusGrid", self.n))

    def __repr__(self):
        return f"TorusGrid(n={self.n})"


class SpectralField:
    """Immutable scalar field stored by Fourier coefficients.

    ``is_real`` tags fields that are real in physical space; construction
    verifies Hermitian symmetry of the coefficients when the tag is set.
    """

    __slots__ = ("grid", "coeffs", "is_real")

    def __init__(self, grid: TorusGrid, coeffs, is_real: bool = False):
        coeffs = np.array(coeffs, dtype=np.complex128, copy=True)
        if coeffs.shape != (grid.n, grid.n):
            raise GridMismatch(
                f"coefficient array shape {coeffs.shape} does not match n={grid.n}"
            )
        if is_real:
            _check_hermitian(coeffs)
        coeffs.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "is_real", bool(is_real))

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    def _binary(self, other, op):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if self.grid != other.grid:
            raise GridMismatch("fields live on different grids")
        return SpectralField(
            self.grid, op(self.coeffs, other.coeffs),
            is_real=self.is_real and other.is_real,
        )

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            raise TypeError("use pointwise_product for field products")
        s = complex(scalar)
        real = self.is_real and s.imag == 0.0
        return SpectralField(self.grid, self.coeffs * s, is_real=real)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, is_real={self.is_real})"


class VectorField:
    """Pair of scalar fields forming a two-component vector field."""

    __slots__ = ("comp1", "comp2")

    def __init__(self, comp1: SpectralField, comp2: SpectralField):
        if comp1.grid != comp2.grid:
            raise GridMismatch("vector components live on different grids")
        self.comp1 = comp1
        self.comp2 = comp2

    @property
    def grid(self):
        return self.comp1.grid


def _check_hermitian(coeffs: np.ndarray):
    n = coeffs.shape[0]
    idx = (-np.arange(n)) % n
    mirrored = np.conj(coeffs[np.ix_(idx, idx)])
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return
    if np.max(np.abs(coeffs - mirrored)) > 1e-10 * scale:
        raise ValueError("coefficients are not Hermitian but is_real is set")


def to_physical(f: SpectralField) -> np.ndarray:
    """Evaluate the field on the grid nodes.  Returns a complex array."""
    return np.fft.ifft2(f.coeffs) * f.grid.n ** 2


def to_spectral(grid: TorusGrid, values, is_real: bool = False) -> SpectralField:
    """Build a field from physical node values."""
    values = np.asarray(values)
    if values.shape != (grid.n, grid.n):
        raise GridMismatch(
            f"value array shape {values.shape} does not match n={grid.n}"
        )
    return SpectralField(grid, np.fft.fft2(values) / grid.n ** 2, is_real=is_real)


def derivative(f: SpectralField, axis: int) -> SpectralField:
    """Partial derivative along axis 1 or 2.

    The multiplier is i*k with the unpaired Nyquist row zeroed, so real
    fields stay real.
    """
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    mult = f.grid._deriv_mult[axis]
    return SpectralField(f.grid, f.coeffs * mult, is_real=f.is_real)


def gradient(f: SpectralField) -> VectorField:
    return VectorField(derivative(f, 1), derivative(f, 2))


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * (-f.grid.k_sq), is_real=f.is_real)


def inverse_laplacian(f: SpectralField) -> SpectralField:
    """Solve Laplace(g) = f with zero-mean g.

    Requires a mean-free input: the constant mode must vanish relative to
    the coefficient scale.
    """
    coeffs = f.coeffs
    scale = np.max(np.abs(coeffs))
    if np.abs(coeffs[0, 0]) > 1e-10 * scale:
        raise NonZeroMean(
            "inverse Laplacian requires a mean-free field "
            f"(constant mode {coeffs[0, 0]:.3g}, scale {scale:.3g})"
        )
    out = np.zeros_like(coeffs)
    nz = f.grid.k_sq > 0
    out[nz] = -coeffs[nz] / f.grid.k_sq[nz]
    return SpectralField(f.grid, out, is_real=f.is_real)


def dealias(f: SpectralField) -> SpectralField:
    """Project onto the 2/3-rule band max(|k1|, |k2|) <= n/3."""
    return SpectralField(f.grid, f.coeffs * f.grid.dealias_mask, is_real=f.is_real)


def pointwise_product(f: SpectralField, g: SpectralField,
                      dealias: bool = False) -> SpectralField:
    """Grid product of two fields.

    With ``dealias`` set, both inputs and the output are truncated by the
    2/3 rule, so the retained band is free of aliased contributions.
    """
    if f.grid != g.grid:
        raise GridMismatch("product operands live on different grids")
    grid = f.grid
    fc, gc = f.coeffs, g.coeffs
    if dealias:
        fc = fc * grid.dealias_mask
        gc = gc * grid.dealias_mask
    wf = np.fft.ifft2(fc) * grid.n ** 2
    wg = np.fft.ifft2(gc) * grid.n ** 2
    ph = np.fft.fft2(wf * wg) / grid.n ** 2
    if dealias:
        ph = ph * grid.dealias_mask
    return SpectralField(grid, ph, is_real=f.is_real and g.is_real)


def abs_square(f: SpectralField, dealias: bool = False) -> SpectralField:
    """|f|^2 as a real field, with the same truncation policy as
    ``pointwise_product``."""
    grid = f.grid
    fc = f.coeffs * grid.dealias_mask if dealias else f.coeffs
    w = np.fft.ifft2(fc) * grid.n ** 2
    vals = w.real ** 2 + w.imag ** 2
    ph = np.fft.fft2(vals) / grid.n ** 2
    if dealias:
        ph = ph * grid.dealias_mask
    return SpectralField(grid, ph, is_real=True)


def lp_norm(f: SpectralField, p) -> float:
    """Trapezoid L^p norm on the periodic grid; p in {1, 2, 4, inf}."""
    values = to_physical(f)
    mags = np.abs(values)
    if p == np.inf or p == "inf":
        return float(np.max(mags))
    if p not in (1, 2, 4):
        raise ValueError("p must be one of 1, 2, 4, inf")
    return float((f.grid.cell_area * np.sum(mags ** p)) ** (1.0 / p))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm, ((2pi)^2 sum_k (1+|k|^2)^s |fhat(k)|^2)^(1/2)."""
    weights = (1.0 + f.grid.k_sq) ** s
    total = np.sum(weights * np.abs(f.coeffs) ** 2)
    return float(np.sqrt(TWO_PI ** 2 * total))


def constant_field(grid: TorusGrid, value) -> SpectralField:
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    coeffs[0, 0] = value
    return SpectralField(grid, coeffs, is_real=(complex(value).imag == 0.0))


def zero_field(grid: TorusGrid) -> SpectralField:
    return constant_field(grid, 0.0)


def from_modes(grid: TorusGrid, modes: dict, is_real: bool = False) -> SpectralField:
    """Build a field from a {(k1, k2): coefficient} dictionary."""
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    half = grid.n // 2
    for (k1, k2), c in modes.items():
        if not (-half <= k1 < half and -half <= k2 < half):
            raise ValueError(f"mode {(k1, k2)} outside the lattice for n={grid.n}")
        coeffs[k1 % grid.n, k2 % grid.n] = c
    return SpectralField(grid, coeffs, is_real=is_real)


def random_band_limited(grid: TorusGrid, rng: np.random.Generator,
                        max_mode: int, is_real: bool = False) -> SpectralField:
    """Random field supported on max(|k1|, |k2|) <= max_mode.

    Coefficients are iid complex Gaussians; with ``is_real`` the spectrum is
    symmetrized so the field is real.  Intended for smooth test data and
    initial conditions, not for white noise.
    """
    n = grid.n
    if max_mode >= n // 2:
        raise ValueError("max_mode must be below n/2")
    coeffs = np.zeros((n, n), dtype=np.complex128)
    band = np.maximum(np.abs(grid.k1), np.abs(grid.k2)) <= max_mode
    m = int(np.sum(band))
    draws = rng.standard_normal(2 * m)
    coeffs[band] = draws[:m] + 1j * draws[m:]
    if is_real:
        idx = (-np.arange(n)) % n
        coeffs = 0.5 * (coeffs + np.conj(coeffs[np.ix_(idx, idx)]))
    return SpectralField(grid, coeffs, is_real=is_real)
