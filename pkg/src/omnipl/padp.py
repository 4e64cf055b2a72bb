"""
Power angular delay profiles and multipath detection.

The delay transform is an inverse DFT over the sweep.  Power is scaled by
``1/F^2`` (or the window's coherent gain squared) so that an on-grid path of
amplitude ``A`` seen with array gain ``G`` peaks at ``(A G)^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamform import BeamSpectrum
from .channel import CfrMatrix, PathSet

__all__ = [
    "Padp",
    "PeakConfig",
    "compute_padp",
    "compute_pdp",
    "estimate_noise_floor",
    "detect_paths",
    "detect_delay_bins",
]


@dataclass
class Padp:
    """Power over a delay grid (rows, s) and an angle grid (columns, deg).

    ``energy_weight`` converts a sum of cells into path energy: for any
    column, ``energy_weight * power.sum()`` equals the mean of ``|X(f)|^2``.
    It is 1 without zero padding or windowing.
    """

    power: np.ndarray
    delays: np.ndarray
    angles: np.ndarray
    kind: str
    num_freq: int
    energy_weight: float = 1.0

    @property
    def delay_step(self) -> float:
        return float(self.delays[1] - self.delays[0])


@dataclass(frozen=True)
class PeakConfig:
    threshold_db_above_noise: float = 6.0
    dynamic_range_db: float = 25.0
    delay_neighborhood: int = 1
    angle_neighborhood: int = 1

    def __post_init__(self):
        for name in ("threshold_db_above_noise", "dynamic_range_db", "delay_neighborhood", "angle_neighborhood"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def compute_padp(spec, zero_pad: int = 1, window: str | None = None) -> Padp:
    """PADP of a beamformed spectrum (VAA) or a DSS sweep matrix.

    Parameters
    ----------
    spec : BeamSpectrum or CfrMatrix
        ``CfrMatrix`` input must be a DSS sweep; every row is one rotation.
    zero_pad : int
        Transform length is ``zero_pad * F``.
    window : {None, "hann"}
        Frequency-domain window.  Power is corrected by the window's
        coherent gain so on-grid peak powers are unchanged.
    """
    if isinstance(spec, BeamSpectrum):
        X, grid, angles, kind = spec.Q, spec.grid, spec.angles, "vaa"
    elif isinstance(spec, CfrMatrix):
        if spec.kind != "dss":
            raise ValueError("VAA responses must be beamformed before computing a PADP")
        X, grid, angles, kind = spec.data.T, spec.grid, spec.angles, "dss"
    else:
        raise TypeError(f"cannot compute a PADP from {type(spec).__name__}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains NaN or Inf")
    zero_pad = int(zero_pad)
    if zero_pad < 1:
        raise ValueError("zero_pad must be >= 1")

    F = X.shape[0]
    if window is None:
        w = np.ones(F)
    elif window == "hann":
        w = np.hanning(F + 2)[1:-1]
    else:
        raise ValueError(f"unknown window {window!r}")
    N = F * zero_pad
    q = np.fft.ifft(X * w[:, None], n=N, axis=0) * (N / w.sum())
    delays = np.arange(N) / (N * grid.step)
    energy_weight = w.sum() ** 2 / (N * np.sum(w**2))
    return Padp(np.abs(q) ** 2, delays, np.asarray(angles, dtype=float), kind, F, float(energy_weight))


def compute_pdp(padp: Padp) -> np.ndarray:
    """Aggregate PDP: maximum over angle per delay bin."""
    return padp.power.max(axis=1)


def _tail_median(power: np.ndarray) -> float:
    n = power.shape[0]
    if n < 20:
        raise ValueError("noise floor estimation needs at least 20 delay bins")
    tail = max(1, int(np.ceil(0.1 * n)))
    return float(np.median(power[n - tail :]))


def estimate_noise_floor(padp: Padp) -> float:
    """Median power of the last 10 % of delay bins, over all angles."""
    return _tail_median(padp.power)


def _strict_local_max(x: np.ndarray, half: int, axis: int) -> np.ndarray:
    """Circular strict local maxima of ``x`` along ``axis`` within ``+-half``."""
    ok = np.ones(x.shape, dtype=bool)
    for s in range(1, half + 1):
        ok &= x > np.roll(x, s, axis=axis)
        ok &= x > np.roll(x, -s, axis=axis)
    return ok


def _level(padp: Padp, cfg: PeakConfig) -> float:
    """Detection level: ``threshold`` above the aggregate PDP tail, or the
    dynamic-range floor below the global peak, whichever is higher.

    The aggregate is a maximum over angles, so its tail median is the noise
    reference for any search that scans all angles.
    """
    pdp = compute_pdp(padp)
    rel = 10.0 ** (-cfg.dynamic_range_db / 10.0) * pdp.max()
    return max(10.0 ** (cfg.threshold_db_above_noise / 10.0) * _tail_median(pdp), rel)


def detect_delay_bins(padp: Padp, cfg: PeakConfig | None = None) -> np.ndarray:
    """Delay bins that are strict local maxima of the aggregate PDP above the level."""
    cfg = cfg or PeakConfig()
    pdp = compute_pdp(padp)
    peaks = _strict_local_max(pdp, cfg.delay_neighborhood, axis=0) & (pdp > _level(padp, cfg))
    return np.flatnonzero(peaks)


def _sorted_paths(d_idx, a_idx, padp: Padp) -> PathSet:
    d_idx = np.asarray(d_idx, dtype=int)
    a_idx = np.asarray(a_idx, dtype=int)
    power = padp.power[d_idx, a_idx]
    order = np.lexsort((padp.angles[a_idx], padp.delays[d_idx], -power))
    return PathSet(
        padp.angles[a_idx][order],
        padp.delays[d_idx][order],
        power=power[order],
    )


def detect_paths(padp: Padp, cfg: PeakConfig | None = None, mode: str = "joint") -> PathSet:
    """Detect multipath components as local maxima of the PADP.

    ``"joint"`` mode: delay peaks are searched on every per-angle PDP curve,
    then the angular cut at each peak delay must also peak there; a cell is
    kept when it is a strict maximum of its (delay x angle) neighborhood
    box and above the detection level.

    ``"delay"`` mode (directional-scan baseline): local maxima of the
    aggregate PDP, each reported at its strongest angle.

    Paths are returned by descending power, ties broken by delay then angle.
    """
    cfg = cfg or PeakConfig()
    if mode == "delay":
        bins = detect_delay_bins(padp, cfg)
        return _sorted_paths(bins, np.argmax(padp.power[bins], axis=1), padp)
    if mode != "joint":
        raise ValueError(f"unknown detection mode {mode!r}")

    P = padp.power
    nd, na = cfg.delay_neighborhood, cfg.angle_neighborhood
    peak = P > _level(padp, cfg)
    peak &= _strict_local_max(P, nd, axis=0)
    peak &= _strict_local_max(P, na, axis=1)
    for sd in range(1, nd + 1):
        for sa in range(1, na + 1):
            for dd, da in ((sd, sa), (sd, -sa), (-sd, sa), (-sd, -sa)):
                peak &= P > np.roll(P, (dd, da), axis=(0, 1))
    d_idx, a_idx = np.nonzero(peak)
    return _sorted_paths(d_idx, a_idx, padp)
