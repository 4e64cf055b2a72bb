"""
Omni-directional pathloss estimators.

``pl_omni_vaa`` is the virtual-array estimator: detected path powers are
de-embedded from the Tx/Rx antenna gains and the beamformer's array gain
and summed.  ``pl_omni_ref1`` and ``pl_omni_ref2`` are the two classic
directional-scan baselines (sum of all cells above noise, and strongest
angle per detected delay bin).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .beamform import array_gain
from .channel import PathSet, UcaGeometry
from .padp import Padp, PeakConfig, detect_paths, estimate_noise_floor
from .patterns import AntennaPattern

__all__ = [
    "METHODS",
    "NoPowerError",
    "GainBudget",
    "PathlossResult",
    "pl_omni_vaa",
    "pl_omni_ref1",
    "pl_omni_ref2",
]

METHODS = ("proposed_vaa", "ref1_sum_all", "ref2_delay_max", "free_space", "ground_truth")


class NoPowerError(ValueError):
    """No path or PADP cell survived thresholding."""


def _db_to_lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def _lin_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class GainBudget:
    """Antenna and array gains to de-embed, all linear power ratios.

    ``tx_gain`` and ``rx_gain`` are scalars or ``(angles_deg, gains)``
    tables interpolated circularly in angle.  ``array_gain`` maps
    ``(freq_hz, azimuth_deg)`` to the amplitude array gain.
    """

    tx_gain: float | tuple = 1.0
    rx_gain: float | tuple = 1.0
    array_gain: Callable[[float, float], float] | None = None

    @classmethod
    def from_db(cls, tx_gain_dbi=0.0, rx_gain_dbi=0.0, array_gain=None):
        return cls(float(_db_to_lin(tx_gain_dbi)), float(_db_to_lin(rx_gain_dbi)), array_gain)

    @classmethod
    def for_uca(cls, geom: UcaGeometry, elem: AntennaPattern, B: float = 90.0, tx_gain=1.0, rx_gain=1.0):
        """Budget whose array gain comes from the modified classical beamformer."""
        return cls(tx_gain, rx_gain, lambda f, phi: array_gain(geom, elem, f, phi, B))

    @staticmethod
    def _lookup(g, phi):
        if np.isscalar(g) or np.ndim(g) == 0:
            val = np.broadcast_to(float(g), np.shape(phi))
        else:
            ang, gains = (np.asarray(v, dtype=float) for v in g)
            val = np.interp(phi, ang, gains, period=360.0)
        if np.any(~(np.asarray(val) > 0)):
            raise ValueError("antenna gains must be positive")
        return np.asarray(val, dtype=float)

    def antenna_gain(self, phi) -> np.ndarray:
        """``G_tx(phi) * G_rx(phi)`` (linear)."""
        return self._lookup(self.tx_gain, phi) * self._lookup(self.rx_gain, phi)

    def scaled(self, factor: float) -> "GainBudget":
        """Copy with the Tx gain multiplied by ``factor``."""
        tx = self.tx_gain
        if np.ndim(tx) == 0:
            tx = float(tx) * factor
        else:
            tx = (tx[0], np.asarray(tx[1], dtype=float) * factor)
        return GainBudget(tx, self.rx_gain, self.array_gain)


@dataclass
class PathlossResult:
    method: str
    pathloss_db: float
    detected_path_count: int
    contributions: np.ndarray = field(default_factory=lambda: np.zeros(0))
    paths: PathSet | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not np.isfinite(self.pathloss_db):
            raise ValueError("pathloss must be finite")


def pl_omni_vaa(detected: PathSet, budget: GainBudget, f_center: float) -> PathlossResult:
    """Pathloss from VAA-detected paths.

    Each detected power is divided by ``G_tx G_rx |v_k|^2``.  The PADP power
    carries the squared amplitude array gain, so the square is what makes a
    single clean path round-trip to its true power.
    """
    if len(detected) == 0:
        raise NoPowerError("no paths above threshold")
    if budget.array_gain is None:
        raise ValueError("the VAA estimator needs an array gain provider")
    gains = np.array([budget.array_gain(f_center, phi) for phi in detected.azimuth_deg])
    contrib = detected.power / (budget.antenna_gain(detected.azimuth_deg) * gains**2)
    return PathlossResult("proposed_vaa", float(-_lin_to_db(contrib.sum())), len(detected), contrib, detected)


def pl_omni_ref1(dss_padp: Padp, budget: GainBudget, cfg: PeakConfig | None = None) -> PathlossResult:
    """Sum of every DSS PADP cell above ``noise floor + threshold``.

    Cells are weighted so the sum is energy-consistent under zero padding
    and windowing.
    """
    if dss_padp.kind != "dss":
        raise ValueError("Ref-1 operates on a DSS PADP")
    cfg = cfg or PeakConfig()
    level = estimate_noise_floor(dss_padp) * _db_to_lin(cfg.threshold_db_above_noise)
    d_idx, a_idx = np.nonzero(dss_padp.power > level)
    if len(d_idx) == 0:
        raise NoPowerError("no power above noise")
    cells = dss_padp.power[d_idx, a_idx] * dss_padp.energy_weight
    contrib = cells / budget.antenna_gain(dss_padp.angles[a_idx])
    return PathlossResult("ref1_sum_all", float(-_lin_to_db(contrib.sum())), len(d_idx), contrib)


def pl_omni_ref2(dss_padp: Padp, budget: GainBudget, cfg: PeakConfig | None = None) -> PathlossResult:
    """Strongest rotation angle at each delay bin detected on the aggregate PDP.

    Element patterns are boresight normalized, so de-embedding the boresight
    element gain is the division by ``G_tx``.
    """
    if dss_padp.kind != "dss":
        raise ValueError("Ref-2 operates on a DSS PADP")
    paths = detect_paths(dss_padp, cfg, mode="delay")
    if len(paths) == 0:
        raise NoPowerError("no paths above threshold")
    contrib = paths.power / budget.antenna_gain(paths.azimuth_deg)
    return PathlossResult("ref2_delay_max", float(-_lin_to_db(contrib.sum())), len(paths), contrib, paths)
