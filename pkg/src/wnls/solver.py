"""Strang-split time integration of the cubic Schrodinger equation

    i du/dt = Laplace(u) + lambda |u|^2 u + u V,

with V the mollified noise, minus the renormalization constant when the run
is renormalized.  Both substeps are exact flows: the potential/nonlinear
half-steps are pointwise phase rotations and the Laplacian step is a
diagonal spectral rotation, so the discrete L^2 norm is conserved to
roundoff, the map is time-reversible, and shifting V by a constant c
multiplies the state by the global phase e^{i c dt} per step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import BlowUp, ConfigError, GridMismatch, SmallDataViolation
from .noise import RenormEnvironment
from .spectral import SpectralField, lp_norm, to_physical, to_spectral

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    lam: int = -1
    dt: float = 1e-3
    t_end: float = 1.0
    snapshot_every: int = 1
    renormalized: bool = True
    dealias: bool = True
    enforce_small_data: bool = True

    def __post_init__(self):
        if self.lam not in (-1, 0, 1):
            raise ConfigError("lambda must be -1, 0 or +1")
        if not (self.dt > 0):
            raise ConfigError("dt must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be a positive integer")


@dataclass(frozen=True)
class SmallDataCheck:
    passed: bool
    lhs: float
    margin: float


@dataclass
class Trajectory:
    """Snapshots of u (the untransformed state) at times[i]."""

    times: np.ndarray
    snapshots: list
    config: SolverConfig
    env: RenormEnvironment


def check_small_data(v0: SpectralField, env: RenormEnvironment,
                     lam: int) -> SmallDataCheck:
    """Focusing admissibility test on the transformed initial datum.

    lhs = ||e^{-2Y_eps}||_inf^3 ||e^{2Y_eps}||_inf ||v0||_{L^2}; the check
    binds only for lam = +1.
    """
    w = env.weights
    lhs = float(np.max(w.e_minus2) ** 3 * np.max(w.e_plus2) * lp_norm(v0, 2))
    passed = (lam != 1) or (lhs <= 1.0)
    return SmallDataCheck(passed=passed, lhs=lhs, margin=1.0 - lhs)


def gauge_to_v(u: SpectralField, env: RenormEnvironment) -> SpectralField:
    """v = u e^{Y_eps}."""
    if u.grid != env.grid:
        raise GridMismatch("field and environment grids differ")
    return to_spectral(u.grid, to_physical(u) * env.weights.e_plus,
                       is_real=u.is_real)


def gauge_to_u(v: SpectralField, env: RenormEnvironment) -> SpectralField:
    """u = v e^{-Y_eps}; inverse of gauge_to_v."""
    if v.grid != env.grid:
        raise GridMismatch("field and environment grids differ")
    return to_spectral(v.grid, to_physical(v) * env.weights.e_minus,
                       is_real=v.is_real)


def _potential(env: RenormEnvironment, config: SolverConfig) -> np.ndarray:
    v = to_physical(env.xi_eps).real
    if config.renormalized:
        v = v - env.c_eps
    return v


def _half_phase(w: np.ndarray, pot: np.ndarray, lam: int, dt: float,
                grid, dealias: bool) -> np.ndarray:
    if lam == 0:
        phase = pot
    else:
        density = w.real ** 2 + w.imag ** 2
        if dealias:
            density = np.fft.ifft2(np.fft.fft2(density) * grid.dealias_mask).real
        phase = lam * density + pot
    return w * np.exp(-0.5j * dt * phase)


def _strang(w: np.ndarray, pot: np.ndarray, lam: int, dt: float, grid,
            dealias: bool, lap_phase: np.ndarray) -> np.ndarray:
    w = _half_phase(w, pot, lam, dt, grid, dealias)
    w = np.fft.ifft2(np.fft.fft2(w) * lap_phase)
    return _half_phase(w, pot, lam, dt, grid, dealias)


def strang_step(u: SpectralField, dt: float, env: RenormEnvironment,
                config: SolverConfig) -> SpectralField:
    """One Strang step of size dt (ignores config.dt and the gate).

    Negative dt is allowed: every substep is an invertible phase, so a step
    of -dt undoes a step of dt.
    """
    if u.grid != env.grid:
        raise GridMismatch("field and environment grids differ")
    if not (np.isfinite(dt) and dt != 0):
        raise ConfigError("dt must be a nonzero finite number")
    grid = u.grid
    pot = _potential(env, config)
    lap_phase = np.exp(1j * dt * grid.k_sq)
    w = _strang(to_physical(u), pot, config.lam, dt, grid, config.dealias,
                lap_phase)
    return to_spectral(grid, w)


def _plan_steps(t_end: float, dt: float):
    """Number of full steps and the trailing remainder (0 if dt divides)."""
    ratio = t_end / dt
    n_full = int(np.floor(ratio + 1e-9))
    rem = t_end - n_full * dt
    if rem <= 1e-12 * max(dt, 1.0):
        rem = 0.0
    return n_full, rem


def integrate(u0: SpectralField, env: RenormEnvironment,
              config: SolverConfig) -> Trajectory:
    """Integrate from u0 to t_end, recording every snapshot_every-th step.

    Raises SmallDataViolation for focusing runs whose transformed datum
    fails the admissibility check (unless the config disables the gate),
    ConfigError when dt resolves the potential phase poorly, and BlowUp if
    non-finite values appear.
    """
    if u0.grid != env.grid:
        raise GridMismatch("field and environment grids differ")
    grid = u0.grid
    pot = _potential(env, config)
    if config.lam == 1 and config.enforce_small_data:
        check = check_small_data(gauge_to_v(u0, env), env, config.lam)
        if not check.passed:
            raise SmallDataViolation(check.lhs)
    w = to_physical(u0)
    phase_scale = float(np.max(np.abs(pot) +
                               abs(config.lam) * (w.real ** 2 + w.imag ** 2)))
    if config.dt * phase_scale >= np.pi:
        raise ConfigError(
            f"dt = {config.dt:g} does not resolve the potential phase "
            f"(dt * max|potential| = {config.dt * phase_scale:.3g} >= pi)"
        )
    n_full, rem = _plan_steps(config.t_end, config.dt)
    total = n_full + (1 if rem else 0)
    logger.info(
        "integrate: n=%d lambda=%+d eps=%g dt=%g steps=%d renormalized=%s",
        grid.n, config.lam, env.eps, config.dt, total, config.renormalized,
    )
    lap_phase = np.exp(1j * config.dt * grid.k_sq)
    times = [0.0]
    snapshots = [u0]
    for step in range(1, total + 1):
        if rem and step == total:
            dt_s = rem
            lap_s = np.exp(1j * dt_s * grid.k_sq)
            t = config.t_end
        else:
            dt_s = config.dt
            lap_s = lap_phase
            t = step * config.dt
        w = _strang(w, pot, config.lam, dt_s, grid, config.dealias, lap_s)
        if not np.isfinite(w.view(np.float64)).all():
            raise BlowUp(step=step, time=t)
        if step % config.snapshot_every == 0:
            times.append(t)
            snapshots.append(to_spectral(grid, w))
    return Trajectory(times=np.array(times), snapshots=snapshots,
                      config=config, env=env)


def with_renormalization(config: SolverConfig, flag: bool) -> SolverConfig:
    return replace(config, renormalized=flag)
