"""Bit-exact serialization: field snapshots, series CSV, report JSON.

The snapshot format is one JSON header line followed by the raw spectral
payload.  Coefficients are written in the centered layout (k1 = -n/2 ..
n/2 - 1 along rows, k2 likewise along columns, row-major) as little-endian
IEEE-754 (re, im) double pairs, so a write/read round trip reproduces the
field bit for bit on any host.  CSV numbers use 17 significant digits for
the same reason.  Report JSON is rendered with sorted keys; rendering the
same report twice yields identical bytes.
"""

from __future__ import annotations

import json
import os
from typing import Mapping, Sequence

import numpy as np

from .diagnostics import DiagnosticSeries
from .errors import BadMagic, ConfigError, HeaderMismatch, SnapshotError, TruncatedPayload
from .spectral import SpectralField, TorusGrid

MAGIC = "WNLS1"
_LAYOUT = "row-major k1-major centered"
_VIEW = "spectral"


def write_field_snapshot(f: SpectralField, path) -> None:
    header = {
        "magic": MAGIC,
        "n": f.grid.n,
        "view": _VIEW,
        "layout": _LAYOUT,
        "real_flag": bool(f.is_real),
    }
    payload = np.ascontiguousarray(
        np.fft.fftshift(f.coeffs).astype("<c16", copy=False))
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("ascii"))
        fh.write(b"\n")
        fh.write(payload.tobytes(order="C"))


def read_field_snapshot(path) -> SpectralField:
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadMagic(f"unreadable snapshot header: {exc}") from None
    if not isinstance(header, dict) or header.get("magic") != MAGIC:
        raise BadMagic(f"bad magic {header.get('magic')!r}"
                       if isinstance(header, dict)
                       else "snapshot header is not an object")
    for key, want in (("view", _VIEW), ("layout", _LAYOUT)):
        if header.get(key) != want:
            raise HeaderMismatch(f"{key} = {header.get(key)!r}, expected {want!r}")
    n = header.get("n")
    if not isinstance(n, int) or n < 4 or n % 2:
        raise HeaderMismatch(f"invalid grid size {n!r}")
    if "real_flag" not in header or not isinstance(header["real_flag"], bool):
        raise HeaderMismatch("missing or non-boolean real_flag")
    expected = 16 * n * n
    if len(payload) < expected:
        raise TruncatedPayload(
            f"payload holds {len(payload)} bytes, expected {expected}")
    if len(payload) > expected:
        raise SnapshotError(
            f"payload holds {len(payload)} bytes beyond the declared {expected}")
    coeffs = np.frombuffer(payload, dtype="<c16").reshape(n, n)
    grid = TorusGrid(n)
    return SpectralField(grid, np.fft.ifftshift(coeffs),
                         is_real=header["real_flag"])


def write_series_csv(series: DiagnosticSeries, path) -> None:
    """CSV with one row per snapshot; header row always present."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(DiagnosticSeries.COLUMNS) + "\n")
        for i in range(len(series.times)):
            row = (series.times[i], series.mass_u[i], series.t_mass[i],
                   series.t_energy[i], series.h1_v[i], series.h2_v[i],
                   series.k_eps)
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_series_csv(path) -> DiagnosticSeries:
    """Inverse of write_series_csv; 17 digits round-trip every double.

    An empty (header-only) file reads back with k_eps = 0 since there is
    no row to take it from.
    """
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != ",".join(DiagnosticSeries.COLUMNS):
            raise ConfigError(f"unexpected series header {header!r}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = list(zip(*rows)) if rows else [[] for _ in DiagnosticSeries.COLUMNS]
    arr = [np.array([float(v) for v in col]) for col in cols]
    k_eps = float(arr[6][0]) if rows else 0.0
    return DiagnosticSeries(times=arr[0], mass_u=arr[1], t_mass=arr[2],
                            t_energy=arr[3], h1_v=arr[4], h2_v=arr[5],
                            k_eps=k_eps)


def write_report_json(report, path) -> None:
    """Stable-ordered JSON rendering of an ExperimentReport."""
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text + "\n")


def write_table_csv(table: Mapping[str, Sequence], path) -> None:
    """One CSV per report table: columns in sorted key order."""
    keys = sorted(table)
    length = max((len(table[k]) for k in keys), default=0)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(keys) + "\n")
        for i in range(length):
            cells = []
            for k in keys:
                col = table[k]
                cells.append("%.17g" % col[i] if i < len(col) else "")
            fh.write(",".join(cells) + "\n")


def load_config_file(path) -> dict:
    """JSON object of CLI parameter overrides."""
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data
