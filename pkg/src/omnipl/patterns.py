"""
2-D antenna radiation patterns.

A pattern is evaluated as a complex, boresight-normalized gain ``g(f, phi)``
in the azimuth plane with the boresight along ``phi = 0``.  The absolute
antenna gain is carried separately in ``gain_dbi`` so that array and
pathloss bookkeeping can apply it explicitly.

Three kinds are supported:

* ``isotropic`` -- ``g = 1`` everywhere, used as the reference element.
* ``gaussian``  -- zero-phase Gaussian beam defined by its half-power
  beamwidth.  Frequency independent.
* ``tabulated`` -- measured samples loaded from a pattern CSV.  Magnitude
  (dB) and unwrapped phase (deg) are interpolated linearly in angle, with
  wraparound, and the nearest tabulated frequency is used.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "AntennaPattern",
    "PatternFormatError",
    "make_isotropic",
    "make_gaussian",
    "make_tabulated",
    "load_pattern",
    "save_pattern",
    "wrap_deg",
]

PATTERN_HEADER = ("angle_deg", "freq_hz", "mag_db", "phase_deg")
KINDS = ("isotropic", "gaussian", "tabulated")


class PatternFormatError(ValueError):
    """Raised for malformed pattern tables or pattern CSV files."""


def wrap_deg(angle):
    """Wrap angles in degrees to ``[-180, 180)``."""
    return np.mod(np.asarray(angle, dtype=float) + 180.0, 360.0) - 180.0


@dataclass(frozen=True)
class _Block:
    freq_hz: float
    angles: np.ndarray  # closed over one period: last = first + 360
    mag_db: np.ndarray
    phase_deg: np.ndarray
    peak_db: float


@dataclass(frozen=True)
class AntennaPattern:
    """Boresight-normalized 2-D complex radiation pattern.

    Instances are immutable; construct them with :func:`make_isotropic`,
    :func:`make_gaussian`, :func:`make_tabulated` or :func:`load_pattern`.
    """

    kind: str
    gain_dbi: float = 0.0
    hpbw_deg: float | None = None
    table: tuple = ()
    _blocks: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if not np.isfinite(self.gain_dbi):
            raise ValueError("gain_dbi must be finite")

    @property
    def gain_linear(self) -> float:
        return 10.0 ** (self.gain_dbi / 10.0)

    @property
    def frequencies(self) -> np.ndarray:
        """Tabulated frequencies (empty for analytic kinds)."""
        return np.array([b.freq_hz for b in self._blocks])

    def evaluate(self, freq_hz, angle_deg) -> np.ndarray:
        """Complex normalized gain at ``(freq_hz, angle_deg)``.

        Arguments broadcast against each other; the result is complex.
        """
        freq_hz, angle_deg = np.broadcast_arrays(
            np.asarray(freq_hz, dtype=float), np.asarray(angle_deg, dtype=float)
        )
        phi = wrap_deg(angle_deg)
        if self.kind == "isotropic":
            return np.ones(phi.shape, dtype=complex)
        if self.kind == "gaussian":
            # |g|^2 = exp(-4 ln2 (phi/hpbw)^2)
            amp = np.exp(-2.0 * np.log(2.0) * (phi / self.hpbw_deg) ** 2)
            return amp.astype(complex)
        return self._eval_table(freq_hz, phi)

    def power(self, freq_hz, angle_deg) -> np.ndarray:
        """Normalized power pattern ``|g|^2``."""
        return np.abs(self.evaluate(freq_hz, angle_deg)) ** 2

    def _nearest_block(self, freq_hz: np.ndarray) -> np.ndarray:
        freqs = self.frequencies
        return np.argmin(np.abs(freq_hz[..., None] - freqs), axis=-1)

    def _eval_table(self, freq_hz, phi):
        out = np.empty(phi.shape, dtype=complex)
        idx = self._nearest_block(freq_hz)
        for i, block in enumerate(self._blocks):
            sel = idx == i
            if not np.any(sel):
                continue
            a0 = block.angles[0]
            t = a0 + np.mod(phi[sel] - a0, 360.0)
            mag = np.interp(t, block.angles, block.mag_db)
            ph = np.interp(t, block.angles, block.phase_deg)
            out[sel] = 10.0 ** (mag / 20.0) * np.exp(1j * np.deg2rad(ph))
        return out

    def gain_dbi_at(self, freq_hz: float) -> float:
        """Absolute boresight gain at the tabulated frequency nearest ``freq_hz``.

        For analytic kinds this is ``gain_dbi``.
        """
        if self.kind != "tabulated":
            return self.gain_dbi
        ref = self._blocks[self._reference_block()].peak_db
        blk = self._blocks[int(self._nearest_block(np.asarray(float(freq_hz))))]
        return self.gain_dbi - ref + blk.peak_db

    def _reference_block(self) -> int:
        freqs = self.frequencies
        mid = 0.5 * (freqs.min() + freqs.max())
        return int(np.argmin(np.abs(freqs - mid)))


def make_isotropic(gain_dbi: float = 0.0) -> AntennaPattern:
    return AntennaPattern(kind="isotropic", gain_dbi=float(gain_dbi))


def make_gaussian(hpbw_deg: float, gain_dbi: float = 0.0) -> AntennaPattern:
    """Zero-phase Gaussian beam with half-power beamwidth ``hpbw_deg``.

    The power pattern is ``exp(-4 ln2 (phi / hpbw)^2)`` so that the -3 dB
    points fall at ``phi = +-hpbw/2``.
    """
    hpbw_deg = float(hpbw_deg)
    if not (0.0 < hpbw_deg < 360.0):
        raise ValueError(f"hpbw_deg must lie in (0, 360), got {hpbw_deg}")
    return AntennaPattern(kind="gaussian", gain_dbi=float(gain_dbi), hpbw_deg=hpbw_deg)


def make_tabulated(rows, gain_dbi: float = 0.0) -> AntennaPattern:
    """Build a tabulated pattern from ``(angle_deg, freq_hz, mag_db, phase_deg)`` rows.

    Rows are grouped by frequency in order of appearance.  Within a group
    the angles must be strictly increasing and span less than one full
    turn.  Each group is renormalized to a 0 dB peak; the peak of the group
    nearest the band center is added to ``gain_dbi``.
    """
    rows = [tuple(float(v) for v in r) for r in rows]
    if not rows:
        raise PatternFormatError("pattern table is empty")
    groups: dict[float, list] = {}
    for r in rows:
        if len(r) != 4 or not all(np.isfinite(r)):
            raise PatternFormatError(f"bad pattern row {r!r}")
        groups.setdefault(r[1], []).append(r)

    blocks = []
    for freq, grp in sorted(groups.items()):
        arr = np.array(grp)
        ang, mag, ph = arr[:, 0], arr[:, 2], arr[:, 3]
        if len(ang) < 2:
            raise PatternFormatError(f"need at least 2 distinct angles at {freq} Hz")
        if np.any(np.diff(ang) <= 0):
            raise PatternFormatError(f"angle grid not strictly increasing at {freq} Hz")
        if ang[-1] - ang[0] >= 360.0:
            raise PatternFormatError(f"angle grid spans a full turn or more at {freq} Hz")
        peak = float(mag.max())
        ang_c = np.append(ang, ang[0] + 360.0)
        mag_c = np.append(mag - peak, mag[0] - peak)
        ph_c = np.unwrap(np.append(ph, ph[0]), period=360.0)
        blocks.append(_Block(freq, ang_c, mag_c, ph_c, peak))

    pat = AntennaPattern(kind="tabulated", gain_dbi=0.0, table=tuple(rows), _blocks=tuple(blocks))
    ref_peak = blocks[pat._reference_block()].peak_db
    return AntennaPattern(
        kind="tabulated",
        gain_dbi=float(gain_dbi) + ref_peak,
        table=tuple(rows),
        _blocks=tuple(blocks),
    )


def load_pattern(path, gain_dbi: float = 0.0) -> AntennaPattern:
    """Load a pattern CSV (``angle_deg,freq_hz,mag_db,phase_deg``).

    Lines starting with ``#`` are ignored.  An empty ``phase_deg`` cell is
    read as 0 deg.
    """
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise PatternFormatError(f"{path}: empty pattern file")
    reader = csv.reader(lines)
    header = tuple(h.strip() for h in next(reader))
    if header != PATTERN_HEADER:
        raise PatternFormatError(f"{path}: expected header {','.join(PATTERN_HEADER)}, got {','.join(header)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) not in (3, 4):
            raise PatternFormatError(f"{path}: row {lineno}: expected 4 fields, got {len(rec)}")
        rec = list(rec) + [""] * (4 - len(rec))
        try:
            rows.append(tuple(float(v) if v.strip() else 0.0 for v in rec))
        except ValueError as exc:
            raise PatternFormatError(f"{path}: row {lineno}: {exc}") from None
    if not rows:
        raise PatternFormatError(f"{path}: no data rows")
    try:
        return make_tabulated(rows, gain_dbi=gain_dbi)
    except PatternFormatError as exc:
        raise PatternFormatError(f"{path}: {exc}") from None


def save_pattern(path, pattern: AntennaPattern, angles_deg, freqs_hz) -> None:
    """Sample ``pattern`` on a grid and write it as a pattern CSV."""
    angles_deg = np.asarray(angles_deg, dtype=float)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PATTERN_HEADER)
        for f in np.atleast_1d(freqs_hz):
            g = pattern.evaluate(f, angles_deg)
            mag = 20.0 * np.log10(np.abs(g)) + pattern.gain_dbi
            ph = np.rad2deg(np.angle(g))
            for a, m, p in zip(angles_deg, mag, ph):
                w.writerow([repr(float(a)), repr(float(f)), repr(float(m)), repr(float(p))])
