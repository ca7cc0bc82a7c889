"""Littlewood-Paley block decomposition and Besov norms.

Blocks are sharp spectral annuli: block -1 holds only the zero mode, block
j >= 0 holds 2^j <= |k| < 2^(j+1).  Membership is decided with exact integer
comparisons on |k|^2.  Modes past the last full annulus (grid corners) join
the final block j_max = ceil(log2(n/2)).  The B^s_{p,q} norm is the l^q sum
of 2^{js} ||block_j||_{L^p}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import SpectralField, TorusGrid, lp_norm

_SUPPORTED_P = (1, 2, 4, np.inf)
_SUPPORTED_Q = (1, 2, np.inf)


def max_block_index(n: int) -> int:
    """ceil(log2(n/2)) without floating point."""
    m = n // 2
    return int(m - 1).bit_length() if m > 1 else 0


@lru_cache(maxsize=32)
def _block_masks(n: int):
    grid = TorusGrid(n)
    k_sq = (grid.k1 ** 2 + grid.k2 ** 2)  # int64, exact
    jmax = max_block_index(n)
    masks = [(k_sq == 0)]
    for j in range(jmax + 1):
        lo, hi = 4 ** j, 4 ** (j + 1)
        if j == jmax:
            m = k_sq >= lo
        else:
            m = (k_sq >= lo) & (k_sq < hi)
        masks.append(m)
    return tuple(masks)


@dataclass
class BlockDecomposition:
    """Spectral blocks of one field; indices run -1, 0, ..., j_max."""

    field: SpectralField
    indices: tuple
    blocks: tuple


def lp_block_decompose(f: SpectralField) -> BlockDecomposition:
    """Split a field into its Littlewood-Paley blocks.

    The blocks partition the lattice, so summing their coefficients
    reconstructs the input exactly.
    """
    masks = _block_masks(f.grid.n)
    blocks = tuple(
        SpectralField(f.grid, f.coeffs * m, is_real=f.is_real) for m in masks
    )
    indices = tuple(range(-1, len(masks) - 1))
    return BlockDecomposition(field=f, indices=indices, blocks=blocks)


def block_norms(f: SpectralField, p) -> np.ndarray:
    """L^p norm of each block, ordered by block index."""
    dec = lp_block_decompose(f)
    return np.array([lp_norm(b, p) for b in dec.blocks])


def besov_norm(f: SpectralField, s: float, p, q) -> float:
    """B^s_{p,q} norm with p in {1, 2, 4, inf} and q in {1, 2, inf}."""
    if p not in _SUPPORTED_P:
        raise ValueError("unsupported (p, q) combination: p must be 1, 2, 4 or inf")
    if q not in _SUPPORTED_Q:
        raise ValueError("unsupported (p, q) combination: q must be 1, 2 or inf")
    norms = block_norms(f, p)
    jmax = max_block_index(f.grid.n)
    js = np.arange(-1, jmax + 1, dtype=np.float64)
    weighted = (2.0 ** (js * s)) * norms
    if q == np.inf:
        return float(np.max(weighted))
    if q == 1:
        return float(np.sum(weighted))
    return float(np.sqrt(np.sum(weighted ** 2)))
