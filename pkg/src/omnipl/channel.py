"""
Synthetic channel frequency responses for virtual-array (VAA) and
directional-scanning (DSS) sounding, plus reference pathloss values.

All synthesis is a plain superposition of plane waves over the path set,
accumulated in fixed path order so results do not depend on how rows are
scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .patterns import AntennaPattern, wrap_deg

__all__ = [
    "SPEED_OF_LIGHT",
    "UcaGeometry",
    "FrequencyGrid",
    "PathSet",
    "CfrMatrix",
    "synth_vaa_cfr",
    "synth_dss_cfr",
    "add_noise",
    "free_space_pathloss_db",
    "true_omni_pathloss_db",
]

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class UcaGeometry:
    """Uniform circular array of ``num_elements`` on a circle of ``radius`` m."""

    num_elements: int
    radius: float

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 3:
            raise ValueError("a UCA needs at least 3 elements")
        if not self.radius > 0:
            raise ValueError("UCA radius must be positive")

    @property
    def element_angles(self) -> np.ndarray:
        """Element azimuths in degrees, ``360 (p-1) / P`` for ``p = 1..P``."""
        p = np.arange(self.num_elements)
        return 360.0 * p / self.num_elements


@dataclass(frozen=True)
class FrequencyGrid:
    f_lower: float
    f_upper: float
    num_points: int

    def __post_init__(self):
        if self.num_points < 2:
            raise ValueError("frequency grid needs at least 2 points")
        if not (0 < self.f_lower < self.f_upper):
            raise ValueError("need 0 < f_lower < f_upper")

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_lower, self.f_upper, self.num_points)

    @property
    def step(self) -> float:
        return (self.f_upper - self.f_lower) / (self.num_points - 1)

    @property
    def center(self) -> float:
        return 0.5 * (self.f_lower + self.f_upper)

    @property
    def max_delay(self) -> float:
        """Unambiguous delay range ``1 / df``."""
        return 1.0 / self.step


class PathSet:
    """Multipath components: azimuth (deg), delay (s) and amplitude or power.

    Ground-truth sets carry complex ``amplitude``; detected sets carry real
    linear ``power``.  Azimuths are stored wrapped to ``[-180, 180)``.
    """

    def __init__(self, azimuth_deg=(), delay_s=(), amplitude=None, power=None):
        self.azimuth_deg = wrap_deg(np.atleast_1d(np.asarray(azimuth_deg, dtype=float)))
        self.delay_s = np.atleast_1d(np.asarray(delay_s, dtype=float))
        n = len(self.azimuth_deg)
        if len(self.delay_s) != n:
            raise ValueError("azimuth and delay arrays differ in length")
        if np.any(self.delay_s < 0):
            raise ValueError("path delays must be non-negative")
        if n == 0 and amplitude is None and power is None:
            amplitude = np.zeros(0, dtype=complex)
        self.amplitude = None if amplitude is None else np.atleast_1d(np.asarray(amplitude, dtype=complex))
        self.power = None if power is None else np.atleast_1d(np.asarray(power, dtype=float))
        for name, arr in (("amplitude", self.amplitude), ("power", self.power)):
            if arr is not None and len(arr) != n:
                raise ValueError(f"{name} array has wrong length")
        if self.power is None and self.amplitude is not None:
            self.power = np.abs(self.amplitude) ** 2

    def __len__(self):
        return len(self.azimuth_deg)

    def __repr__(self):
        return f"PathSet({len(self)} paths)"

    @classmethod
    def from_db(cls, azimuth_deg, delay_s, power_db, phase_deg=0.0):
        """Ground-truth paths from powers in dB and phases in degrees."""
        power_db = np.atleast_1d(np.asarray(power_db, dtype=float))
        phase = np.broadcast_to(np.deg2rad(np.asarray(phase_deg, dtype=float)), power_db.shape)
        amp = 10.0 ** (power_db / 20.0) * np.exp(1j * phase)
        return cls(azimuth_deg, delay_s, amplitude=amp)

    def union(self, other: "PathSet") -> "PathSet":
        if self.amplitude is None or other.amplitude is None:
            raise ValueError("union is defined for ground-truth path sets")
        return PathSet(
            np.concatenate([self.azimuth_deg, other.azimuth_deg]),
            np.concatenate([self.delay_s, other.delay_s]),
            amplitude=np.concatenate([self.amplitude, other.amplitude]),
        )

    def scaled(self, factor) -> "PathSet":
        """Copy with every complex amplitude multiplied by ``factor``."""
        return PathSet(self.azimuth_deg, self.delay_s, amplitude=self.amplitude * factor)


@dataclass
class CfrMatrix:
    """``P x F`` complex frequency responses, one row per element or rotation.

    Exactly one of ``geometry`` (VAA) or ``rotation_angles`` (DSS) is set.
    """

    data: np.ndarray
    grid: FrequencyGrid
    geometry: UcaGeometry | None = None
    rotation_angles: np.ndarray | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if (self.geometry is None) == (self.rotation_angles is None):
            raise ValueError("CfrMatrix needs exactly one of geometry or rotation_angles")
        if self.data.ndim != 2 or self.data.shape[1] != self.grid.num_points:
            raise ValueError(f"CFR shape {self.data.shape} does not match grid of {self.grid.num_points} points")
        if self.data.shape[0] != len(self.angles):
            raise ValueError("CFR row count does not match the number of elements/angles")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("CFR contains NaN or Inf")

    @property
    def kind(self) -> str:
        return "vaa" if self.geometry is not None else "dss"

    @property
    def angles(self) -> np.ndarray:
        if self.geometry is not None:
            return self.geometry.element_angles
        return np.asarray(self.rotation_angles, dtype=float)

    def replace(self, data) -> "CfrMatrix":
        return CfrMatrix(data, self.grid, self.geometry, self.rotation_angles)


_SPLIT = 134217729.0  # 2**27 + 1


def _two_prod(a, b):
    """``a * b`` as an unevaluated sum ``p + e`` (Dekker)."""
    p = a * b
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def cis_cycles(a, b) -> np.ndarray:
    """``exp(-j 2 pi a b)`` with the product reduced modulo 1 before scaling.

    Phases of thousands of cycles (f tau over a wide band) keep full
    double precision this way.
    """
    p, e = _two_prod(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    frac = (p - np.round(p)) + e
    return np.exp(-2j * np.pi * frac)


def _check_delays(truth: PathSet, grid: FrequencyGrid):
    if truth.amplitude is None:
        raise ValueError("synthesis needs complex path amplitudes")
    bad = truth.delay_s >= grid.max_delay
    if np.any(bad):
        raise ValueError(
            f"path delay {truth.delay_s[bad][0]:.6g} s exceeds the unambiguous range "
            f"{grid.max_delay:.6g} s of the frequency grid"
        )


def synth_vaa_cfr(truth: PathSet, geom: UcaGeometry, elem: AntennaPattern, grid: FrequencyGrid) -> CfrMatrix:
    """Element responses of a virtual UCA built from a directional antenna.

    ``H_p(f) = sum_k a_k exp(-j2 pi f tau_k) exp(j2 pi f r cos(phi_k - phi_p)/c) g(f, phi_k - phi_p)``
    """
    _check_delays(truth, grid)
    f = grid.frequencies
    phi_p = geom.element_angles
    H = np.zeros((geom.num_elements, grid.num_points), dtype=complex)
    for az, tau, a in zip(truth.azimuth_deg, truth.delay_s, truth.amplitude):
        rel = az - phi_p
        spatial = np.cos(np.deg2rad(rel))[:, None] * (geom.radius / SPEED_OF_LIGHT)
        H += (a * cis_cycles(f, tau)) * cis_cycles(f, -spatial) * elem.evaluate(f, rel[:, None])
    return CfrMatrix(H, grid, geometry=geom)


def synth_dss_cfr(truth: PathSet, rotation_angles, elem: AntennaPattern, grid: FrequencyGrid) -> CfrMatrix:
    """Responses of a single directional antenna rotated about its phase center."""
    _check_delays(truth, grid)
    f = grid.frequencies
    theta = np.asarray(rotation_angles, dtype=float)
    H = np.zeros((len(theta), grid.num_points), dtype=complex)
    for az, tau, a in zip(truth.azimuth_deg, truth.delay_s, truth.amplitude):
        H += (a * cis_cycles(f, tau)) * elem.evaluate(f, (az - theta)[:, None])
    return CfrMatrix(H, grid, rotation_angles=theta)


def add_noise(cfr: CfrMatrix, noise_floor_db: float | None, seed: int) -> CfrMatrix:
    """Add i.i.d. circular complex Gaussian noise of power ``10**(noise_floor_db/10)``.

    Noise power is per (row, frequency) sample, in the same units as
    ``|H|^2``.  ``None`` or ``-inf`` disables noise.
    """
    if noise_floor_db is None or noise_floor_db == -np.inf:
        return cfr.replace(cfr.data.copy())
    if not np.isfinite(noise_floor_db):
        raise ValueError("noise floor must be finite or -inf")
    sigma2 = 10.0 ** (noise_floor_db / 10.0)
    rng = np.random.default_rng(seed)
    shape = cfr.data.shape
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return cfr.replace(cfr.data + np.sqrt(sigma2 / 2.0) * noise)


def free_space_pathloss_db(distance_m: float, freq_hz: float) -> float:
    """Friis free-space loss ``20 log10(4 pi d f / c)``."""
    if not (distance_m > 0 and freq_hz > 0):
        raise ValueError("distance and frequency must be positive")
    return float(20.0 * np.log10(4.0 * np.pi * distance_m * freq_hz / SPEED_OF_LIGHT))


def true_omni_pathloss_db(truth: PathSet) -> float:
    """Pathloss seen by ideal isotropic antennas: ``-10 log10(sum |a_k|^2)``."""
    if len(truth) == 0:
        raise ValueError("ground-truth path set is empty")
    if truth.amplitude is None:
        raise ValueError("ground-truth pathloss needs complex amplitudes")
    return float(-10.0 * np.log10(np.sum(np.abs(truth.amplitude) ** 2)))
