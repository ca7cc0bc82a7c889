"""Conserved-quantity diagnostics in the transformed (v = u e^{Y}) frame.

The transformed mass and energy

    N(v)  = int |v|^2 e^{-2Y} dx
    H(v)  = int ( |grad v|^2 / 2
                - |v|^2 (|grad Y|^2 - C) / 2
                - (lambda/4) |v|^4 e^{-2Y} ) e^{-2Y} dx

are the invariants of the gauge-transformed flow; the plain L^2 mass of u
equals N(v) identically.  The sign of the Wick term follows from
substituting u = v e^{-Y} into the conserved energy of the untransformed
equation: the cross term of |grad u|^2 integrates by parts against the
weight into -|v|^2 |grad Y|^2 / 2 plus a noise term that cancels the
potential, leaving the centered square with a minus sign.  Drift is
measured relative to the initial value with a floor of 1e-3 times the
series scale, so quantities crossing zero do not blow the ratio up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import RenormEnvironment
from .solver import Trajectory, gauge_to_v
from .spectral import (
    SpectralField,
    abs_square,
    derivative,
    pointwise_product,
    sobolev_norm,
    to_physical,
)


@dataclass
class DiagnosticSeries:
    times: np.ndarray
    mass_u: np.ndarray
    t_mass: np.ndarray
    t_energy: np.ndarray
    h1_v: np.ndarray
    h2_v: np.ndarray
    k_eps: float

    COLUMNS = ("t", "mass_u", "t_mass", "t_energy", "h1_v", "h2_v", "k_eps")


def transformed_mass(v: SpectralField, env: RenormEnvironment) -> float:
    """int |v|^2 e^{-2Y_eps} by the trapezoid rule."""
    w = to_physical(v)
    dens = (w.real ** 2 + w.imag ** 2) * env.weights.e_minus2
    return float(v.grid.cell_area * np.sum(dens))


def transformed_energy(v: SpectralField, env: RenormEnvironment,
                       lam: int) -> float:
    """Weighted energy of the transformed state.

    Quadratic terms use dealiased squares; the final weighting by the
    exponential happens pointwise on the nodes.
    """
    grid = v.grid
    grad_sq = (abs_square(derivative(v, 1), dealias=True)
               + abs_square(derivative(v, 2), dealias=True))
    v_sq = abs_square(v, dealias=True)
    v_4 = pointwise_product(v_sq, v_sq, dealias=True)
    wick_term = pointwise_product(v_sq, env.wick, dealias=True)
    integrand = (0.5 * to_physical(grad_sq).real
                 - 0.5 * to_physical(wick_term).real
                 - 0.25 * lam * to_physical(v_4).real * env.weights.e_minus2)
    return float(grid.cell_area * np.sum(integrand * env.weights.e_minus2))


def compute_series(traj: Trajectory) -> DiagnosticSeries:
    """Evaluate all diagnostics on each snapshot of a trajectory."""
    env = traj.env
    lam = traj.config.lam
    mass_u, t_mass, t_energy, h1, h2 = [], [], [], [], []
    for u in traj.snapshots:
        w = to_physical(u)
        mass_u.append(float(u.grid.cell_area
                            * np.sum(w.real ** 2 + w.imag ** 2)))
        v = gauge_to_v(u, env)
        t_mass.append(transformed_mass(v, env))
        t_energy.append(transformed_energy(v, env, lam))
        h1.append(sobolev_norm(v, 1.0))
        h2.append(sobolev_norm(v, 2.0))
    return DiagnosticSeries(
        times=np.asarray(traj.times, dtype=np.float64),
        mass_u=np.array(mass_u),
        t_mass=np.array(t_mass),
        t_energy=np.array(t_energy),
        h1_v=np.array(h1),
        h2_v=np.array(h2),
        k_eps=float(env.k_eps),
    )


def _drift(values: np.ndarray) -> float:
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return 0.0
    denom = max(abs(float(values[0])), 1e-3 * scale)
    return float(np.max(np.abs(values - values[0])) / denom)


def drift_report(series: DiagnosticSeries) -> dict:
    """Relative drift of each conserved quantity over the series."""
    if series.times.size == 0:
        raise ValueError("empty diagnostic series")
    return {
        "mass_u": _drift(series.mass_u),
        "t_mass": _drift(series.t_mass),
        "t_energy": _drift(series.t_energy),
    }


def drift_refinement(series_by_dt: dict) -> dict:
    """Drift of each quantity across a dt-refinement family.

    Input maps dt -> DiagnosticSeries.  Returns per-quantity dicts of
    drifts plus the log-log fitted order in dt (2nd-order stepping gives
    order near 2 and drift ratios near 4 under dt halving).
    """
    dts = sorted(series_by_dt.keys(), reverse=True)
    if len(dts) < 2:
        raise ValueError("refinement family needs at least two step sizes")
    out = {}
    for key in ("mass_u", "t_mass", "t_energy"):
        drifts = [drift_report(series_by_dt[dt])[key] for dt in dts]
        order = float("nan")
        if all(d > 0 for d in drifts):
            slope, _ = np.polyfit(np.log(dts), np.log(drifts), 1)
            order = float(slope)
        out[key] = {"dts": list(map(float, dts)), "drifts": drifts,
                    "order": order}
    return out
