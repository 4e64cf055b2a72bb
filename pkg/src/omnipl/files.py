"""
CSV artifacts: PADP grids, path lists, pathloss summaries and per-angle
VNA sweeps.

Floats that must survive a round trip (sweeps) are written with 17
significant digits; report files use fixed precision so repeated runs are
byte-identical.
"""
from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .channel import CfrMatrix, FrequencyGrid, PathSet, UcaGeometry

__all__ = [
    "SweepFormatError",
    "write_padp_csv",
    "write_paths_csv",
    "write_summary_csv",
    "write_diagnostics_csv",
    "write_sweeps",
    "read_sweep",
    "ingest_sweeps",
]

SWEEP_HEADER = ("freq_hz", "re", "im")
SUMMARY_HEADER = ("method", "pathloss_db", "path_count", "scenario_id", "f_center_hz")
PATHS_HEADER = ("rank", "azimuth_deg", "delay_ns", "power_db")
_SWEEP_NAME = re.compile(r"^angle_(\d+)\.csv$")


class SweepFormatError(ValueError):
    """Missing, duplicate or inconsistent sweep files."""


def _db(x, floor=-300.0):
    with np.errstate(divide="ignore"):
        return np.maximum(10.0 * np.log10(x), floor)


def write_padp_csv(path, padp, max_delay_ns: float | None = None) -> None:
    """PADP in dB relative to its global peak.

    First row: ``delay_ns`` then the angle grid.  Each further row is one
    delay bin.
    """
    power = padp.power
    delays_ns = padp.delays * 1e9
    if max_delay_ns is not None:
        keep = delays_ns <= max_delay_ns
        power, delays_ns = power[keep], delays_ns[keep]
    peak = padp.power.max()
    rel = _db(power / peak) if peak > 0 else np.full(power.shape, -300.0)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("delay_ns," + ",".join(f"{a:.4f}" for a in padp.angles) + "\n")
        table = np.column_stack([delays_ns, rel])
        np.savetxt(fh, table, fmt=["%.6f"] + ["%.3f"] * rel.shape[1], delimiter=",")


def write_paths_csv(path, paths: PathSet | None) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PATHS_HEADER)
        if paths is None:
            return
        for i, (az, tau, p) in enumerate(zip(paths.azimuth_deg, paths.delay_s, paths.power), start=1):
            w.writerow([i, f"{az:.4f}", f"{tau * 1e9:.6f}", f"{_db(p):.6f}"])


def write_summary_csv(path, results, scenario_id: str, f_center_hz: float) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for r in results:
            w.writerow([r.method, f"{r.pathloss_db:.9f}", r.detected_path_count, scenario_id, f"{f_center_hz:.1f}"])


def write_diagnostics_csv(path, results) -> None:
    """Per-path contributions (dB) of every method that reports paths."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("method", "index", "azimuth_deg", "delay_ns", "contribution_db"))
        for r in results:
            if r.paths is None:
                continue
            for i, (az, tau, c) in enumerate(zip(r.paths.azimuth_deg, r.paths.delay_s, r.contributions), start=1):
                w.writerow([r.method, i, f"{az:.4f}", f"{tau * 1e9:.6f}", f"{_db(c):.6f}"])


def write_sweeps(directory, cfr: CfrMatrix) -> list:
    """One ``angle_<index>.csv`` per row of ``cfr``; returns the file paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    f = cfr.grid.frequencies
    out = []
    for i, row in enumerate(cfr.data):
        path = directory / f"angle_{i}.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(SWEEP_HEADER) + "\n")
            np.savetxt(fh, np.column_stack([f, row.real, row.imag]), fmt="%.17g", delimiter=",")
        out.append(path)
    return out


def read_sweep(path) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies and complex response of one sweep file."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = tuple(h.strip() for h in fh.readline().strip().split(","))
        if header != SWEEP_HEADER:
            raise SweepFormatError(f"{path.name}: expected header {','.join(SWEEP_HEADER)}")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise SweepFormatError(f"{path.name}: {exc}") from None
    if data.shape[0] < 2 or data.shape[1] != 3:
        raise SweepFormatError(f"{path.name}: need at least 2 rows of freq_hz,re,im")
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def ingest_sweeps(directory, num_angles: int | None = None, geometry: UcaGeometry | None = None,
                  grid: FrequencyGrid | None = None) -> CfrMatrix:
    """Assemble per-angle sweep files into a ``P x F`` response matrix.

    Rows are ordered by the index in ``angle_<index>.csv``, not by listing
    order.  With ``geometry`` the result is tagged as a virtual array,
    otherwise as a directional scan with rotation angles ``360 i / P``.
    ``grid``, when given, must match the files and is used as-is.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise SweepFormatError(f"{directory}: not a directory")
    if geometry is not None:
        num_angles = geometry.num_elements
    files = {}
    for p in sorted(directory.iterdir()):
        m = _SWEEP_NAME.match(p.name)
        if not m:
            continue
        idx = int(m.group(1))
        if idx in files:
            raise SweepFormatError(f"duplicate rotation index {idx}: {files[idx].name} and {p.name}")
        files[idx] = p
    if not files:
        raise SweepFormatError(f"{directory}: no angle_<index>.csv files")
    n = num_angles if num_angles is not None else max(files) + 1
    missing = sorted(set(range(n)) - set(files))
    if missing:
        raise SweepFormatError(f"missing rotation index(es) {missing} in {directory}")
    extra = sorted(set(files) - set(range(n)))
    if extra:
        raise SweepFormatError(f"unexpected rotation index(es) {extra} (expected 0..{n - 1})")

    freqs0 = None
    rows = []
    for i in range(n):
        f, h = read_sweep(files[i])
        if freqs0 is None:
            freqs0 = f
            step = np.diff(f)
            if np.any(step <= 0) or not np.allclose(step, step[0], rtol=1e-9, atol=0):
                raise SweepFormatError(f"{files[i].name}: frequency grid is not uniform")
        elif len(f) != len(freqs0) or not np.allclose(f, freqs0, rtol=1e-12, atol=0):
            raise SweepFormatError(f"{files[i].name}: frequency grid differs from {files[0].name}")
        rows.append(h)

    file_grid = FrequencyGrid(float(freqs0[0]), float(freqs0[-1]), len(freqs0))
    if grid is not None:
        if grid.num_points != file_grid.num_points or not np.allclose(
            [grid.f_lower, grid.f_upper], [file_grid.f_lower, file_grid.f_upper], rtol=1e-12, atol=0
        ):
            raise SweepFormatError(f"{directory}: sweep grid does not match the configured frequency grid")
    else:
        grid = file_grid
    data = np.array(rows)
    if geometry is not None:
        return CfrMatrix(data, grid, geometry=geometry)
    return CfrMatrix(data, grid, rotation_angles=360.0 * np.arange(n) / n)
