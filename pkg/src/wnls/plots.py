"""Figure rendering for CLI reports.

Only the command-line layer imports this module, so the library core stays
free of plotting dependencies.  Every function writes PNG files and returns
the paths it wrote.  The Agg backend is forced: figures render identically
with or without a display.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg", force=True)

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .diagnostics import DiagnosticSeries  # noqa: E402
from .spectral import SpectralField, to_physical  # noqa: E402

_DPI = 130


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_field_heatmap(field: SpectralField, path, title: str = "") -> str:
    """Physical-space magnitude of a field on the torus."""
    w = to_physical(field)
    mag = np.abs(w) if not field.is_real else w.real
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(mag.T, origin="lower", extent=(0, 2 * np.pi, 0, 2 * np.pi),
                   cmap="viridis", aspect="equal")
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def save_series_figure(series: DiagnosticSeries, path) -> str:
    """Relative drift of the conserved quantities plus Sobolev norms."""
    t = series.times
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    for name, vals in (("mass_u", series.mass_u), ("t_mass", series.t_mass),
                       ("t_energy", series.t_energy)):
        if len(vals) == 0:
            continue
        scale = max(abs(vals[0]), 1e-3 * np.max(np.abs(vals), initial=0.0), 1e-300)
        ax1.plot(t, np.abs(vals - vals[0]) / scale, label=name)
    ax1.set_yscale("log")
    ax1.set_xlabel("t")
    ax1.set_ylabel("relative drift")
    ax1.legend(fontsize=8)
    ax2.plot(t, series.h1_v, label="H1(v)")
    ax2.plot(t, series.h2_v, label="H2(v)")
    ax2.set_xlabel("t")
    ax2.set_ylabel("norm")
    ax2.legend(fontsize=8)
    return _finish(fig, path)


def _fit_figure(key, fit, path):
    xs = np.array([p[0] for p in fit.points], dtype=float)
    ys = np.array([p[1] for p in fit.points], dtype=float)
    fig, ax = plt.subplots(figsize=(4.6, 3.8))
    ax.loglog(xs, ys, "o", label="data")
    grid_x = np.geomspace(xs.min(), xs.max(), 64)
    line = np.exp(fit.intercept) * grid_x ** fit.slope
    if fit.model == "power-times-log":
        line = line * np.abs(np.log(grid_x)) ** fit.beta
    ax.loglog(grid_x, line, "-",
              label=f"slope {fit.slope:.3f}, R2 {fit.r_squared:.3f}")
    ax.set_xlabel("eps")
    ax.set_ylabel(key)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def save_report_figures(report, out_dir, stem: str = "") -> list:
    """One log-log figure per stored fit, plus special cases per table."""
    os.makedirs(out_dir, exist_ok=True)
    stem = stem or report.name
    written = []
    for key, fit in sorted(report.fits.items()):
        path = os.path.join(out_dir, f"{stem}-{key}.png")
        written.append(_fit_figure(key, fit, path))
    if "phase_error" in report.tables:
        tab = report.tables["phase_error"]
        fig, ax = plt.subplots(figsize=(4.6, 3.8))
        ax.plot(tab["t"], tab["r"], ".-")
        ax.set_xlabel("t")
        ax.set_ylabel("relative phase error")
        ax.set_yscale("symlog", linthresh=1e-16)
        written.append(_finish(fig, os.path.join(out_dir, f"{stem}-phase.png")))
    if "sup_distance" in report.tables:
        tab = report.tables["sup_distance"]
        fig, ax = plt.subplots(figsize=(4.6, 3.8))
        ax.loglog(tab["eps_pair"], tab["d_median"], "o-")
        ax.set_xlabel("eps")
        ax.set_ylabel("sup-t distance")
        written.append(_finish(fig, os.path.join(out_dir, f"{stem}-distance.png")))
    if "growth" in report.tables:
        tab = report.tables["growth"]
        fig, ax = plt.subplots(figsize=(4.6, 3.8))
        logs = np.asarray(tab["abs_log_eps"], dtype=float)
        ax.plot(logs, tab["c_eps"], "o", label="data")
        line_x = np.linspace(logs.min(), logs.max(), 16)
        ax.plot(line_x, tab["slope"][0] * line_x + tab["intercept"][0], "-",
                label=f"slope {tab['slope'][0]:.4f}, "
                      f"R2 {tab['r_squared'][0]:.4f}")
        ax.set_xlabel("|ln eps|")
        ax.set_ylabel("C_eps")
        ax.legend(fontsize=8)
        written.append(_finish(fig, os.path.join(out_dir, f"{stem}-growth.png")))
    return written
