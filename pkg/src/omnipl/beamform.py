"""
Modified classical beamforming for a virtual UCA of directional elements.

Each steering direction only uses the elements whose boresight lies within
``+-B`` of it (binary angular window); the remaining weights are the
conjugate of the element's plane-wave phase relative to the array center.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import SPEED_OF_LIGHT, CfrMatrix, FrequencyGrid, UcaGeometry
from .patterns import AntennaPattern

__all__ = [
    "BeamformConfig",
    "BeamSpectrum",
    "wrap_deg_pm",
    "window_mask",
    "steering_weight",
    "steering_matrix",
    "beamform_spectrum",
    "array_beam_pattern",
    "array_gain",
    "beamwidth_deg",
]

# Frequencies per work unit.  Fixed so that results do not depend on the
# number of workers.
_CHUNK = 32


def wrap_deg_pm(angle):
    """Wrap angles in degrees to ``(-180, 180]``."""
    return 180.0 - np.mod(180.0 - np.asarray(angle, dtype=float), 360.0)


def window_mask(steer_deg, element_deg, half_width_deg: float) -> np.ndarray:
    """Boolean ``(n_steer, P)`` window; the boundary ``|dphi| = B`` is inside."""
    d = wrap_deg_pm(np.asarray(steer_deg, dtype=float)[:, None] - np.asarray(element_deg, dtype=float)[None, :])
    return np.abs(d) <= half_width_deg


@dataclass(frozen=True)
class BeamformConfig:
    """Window half-width ``B`` (deg) and steering grid (deg).

    ``steering_angles=None`` steers at the element positions.
    """

    window_half_width: float = 90.0
    steering_angles: tuple | None = None

    def __post_init__(self):
        if not (0.0 < self.window_half_width <= 180.0):
            raise ValueError("window half-width must lie in (0, 180]")

    def angles_for(self, geom: UcaGeometry) -> np.ndarray:
        if self.steering_angles is None:
            return geom.element_angles
        return np.asarray(self.steering_angles, dtype=float)


@dataclass
class BeamSpectrum:
    """Beamformed spectrum ``Q``, shape ``(F, n_steer)``."""

    Q: np.ndarray
    grid: FrequencyGrid
    angles: np.ndarray


def steering_weight(geom: UcaGeometry, f: float, steer_deg: float, p: int, B: float = 90.0) -> complex:
    """Weight of element ``p`` (1-based) when steering to ``steer_deg`` at ``f``."""
    if not 1 <= p <= geom.num_elements:
        raise IndexError(f"element index {p} outside 1..{geom.num_elements}")
    phi_p = geom.element_angles[p - 1]
    d = wrap_deg_pm(steer_deg - phi_p)
    if abs(d) > B:
        return 0j
    return complex(np.exp(-2j * np.pi * f * geom.radius * np.cos(np.deg2rad(steer_deg - phi_p)) / SPEED_OF_LIGHT))


def steering_matrix(geom: UcaGeometry, f: float, steer_deg, B: float = 90.0) -> np.ndarray:
    """All weights at one frequency, shape ``(n_steer, P)``."""
    steer = np.atleast_1d(np.asarray(steer_deg, dtype=float))
    phi_p = geom.element_angles
    mask = window_mask(steer, phi_p, B)
    cosd = np.cos(np.deg2rad(steer[:, None] - phi_p[None, :]))
    W = np.exp(-2j * np.pi * f * geom.radius * cosd / SPEED_OF_LIGHT)
    return np.where(mask, W, 0.0)


def beamform_spectrum(cfr: CfrMatrix, config: BeamformConfig | None = None, workers: int = 1) -> BeamSpectrum:
    """``Q(f, phi) = sum_p w_p(f, phi) H_p(f)`` over the steering grid.

    Only in-window (steer, element) pairs are evaluated.  Work is split in
    fixed frequency chunks; ``workers > 1`` runs chunks on a thread pool
    with bit-identical results.
    """
    if cfr.kind != "vaa":
        raise ValueError("beamforming needs a VAA response with element positions; got a DSS sweep")
    config = config or BeamformConfig()
    geom = cfr.geometry
    steer = config.angles_for(geom)
    phi_p = geom.element_angles
    mask = window_mask(steer, phi_p, config.window_half_width)
    a_idx, p_idx = np.nonzero(mask)  # row-major: grouped by steering angle, element order within
    counts = mask.sum(axis=1)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    delay = geom.radius * np.cos(np.deg2rad(steer[a_idx] - phi_p[p_idx])) / SPEED_OF_LIGHT

    freqs = cfr.grid.frequencies
    F = len(freqs)
    Q = np.zeros((F, len(steer)), dtype=complex)
    nonempty = counts > 0

    # exp(-j2 pi f d) = exp(-j2 pi f_lo d) * exp(-j2 pi m df d) within a chunk
    df = cfr.grid.step
    step_phase = np.exp(-2j * np.pi * (np.arange(_CHUNK) * df)[:, None] * delay[None, :])

    def work(lo):
        hi = min(lo + _CHUNK, F)
        base = np.exp(-2j * np.pi * freqs[lo] * delay)
        contrib = step_phase[: hi - lo] * base
        contrib *= cfr.data[p_idx, lo:hi].T
        if len(a_idx):
            Q[lo:hi, nonempty] = np.add.reduceat(contrib, starts[nonempty], axis=1)

    chunks = range(0, F, _CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))
    else:
        for lo in chunks:
            work(lo)
    return BeamSpectrum(Q, cfr.grid, steer)


def array_beam_pattern(
    geom: UcaGeometry, elem: AntennaPattern, f: float, path_deg: float, steer_deg, B: float = 90.0
) -> np.ndarray:
    """Unit beam pattern of a plane wave from ``path_deg`` over ``steer_deg``.

    The value at ``steer == path_deg`` is the array gain.
    """
    phi_p = geom.element_angles
    rel = path_deg - phi_p
    a = np.exp(2j * np.pi * f * geom.radius * np.cos(np.deg2rad(rel)) / SPEED_OF_LIGHT) * elem.evaluate(f, rel)
    return steering_matrix(geom, f, steer_deg, B) @ a


def array_gain(geom: UcaGeometry, elem: AntennaPattern, f: float, path_deg: float, B: float = 90.0) -> float:
    """Amplitude array gain ``|v(f, phi_k)|`` for a path at ``path_deg``."""
    return float(np.abs(array_beam_pattern(geom, elem, f, path_deg, [path_deg], B)[0]))


def beamwidth_deg(pattern_power, angles_deg, level_db: float = -3.0) -> float:
    """Width of the main lobe at ``level_db`` below its peak.

    ``pattern_power`` is sampled on the uniform, circular ``angles_deg``
    grid; crossings are located by linear interpolation in dB.
    """
    p = np.asarray(pattern_power, dtype=float)
    ang = np.asarray(angles_deg, dtype=float)
    step = ang[1] - ang[0]
    n = len(p)
    db = 10.0 * np.log10(np.maximum(p, 1e-300) / p.max())
    i0 = int(np.argmax(p))

    def crossing(direction):
        for m in range(1, n):
            j = (i0 + direction * m) % n
            if db[j] < level_db:
                prev = db[(j - direction) % n]
                frac = (prev - level_db) / (prev - db[j])
                return (m - 1 + frac) * step
        raise ValueError("pattern never drops below the requested level")

    return crossing(+1) + crossing(-1)
