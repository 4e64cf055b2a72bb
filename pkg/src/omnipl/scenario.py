"""
Scenario configuration, built-in corridor presets and the end-to-end
comparison pipeline (VAA estimator against both directional-scan baselines).

A scenario is described by a JSON document::

    {
      "scenario_id": "los_14m",
      "frequency": {"f_lower_hz": 28e9, "f_upper_hz": 30e9, "points": 1001},
      "geometry": {"elements": 240, "radius_m": 0.15},
      "element_pattern": {"kind": "gaussian", "hpbw_deg": 40, "gain_dbi": 13.5},
      "rx_gain_dbi": 5.5,
      "paths": [{"azimuth_deg": 0, "delay_ns": 46.7, "power_db": -84.6, "phase_deg": 0}],
      "noise": {"enabled": false, "floor_db": -150, "seed": 0}
    }

Optional keys: ``distance_m`` (free-space reference), ``beamform``
(``window_half_width_deg``, ``steering_angles_deg`` or
``steering_step_deg``), ``peaks`` (fields of
:class:`~omnipl.padp.PeakConfig`), ``zero_pad``, ``window``, ``f_center_hz``,
``workers`` and ``export`` (``padp_max_delay_ns`` truncates PADP CSVs).

Path powers are channel gains without antennas; the element gain (Tx) and
``rx_gain_dbi`` are applied during synthesis.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .beamform import BeamformConfig, beamform_spectrum
from .channel import (
    SPEED_OF_LIGHT,
    CfrMatrix,
    FrequencyGrid,
    PathSet,
    UcaGeometry,
    add_noise,
    free_space_pathloss_db,
    synth_dss_cfr,
    synth_vaa_cfr,
    true_omni_pathloss_db,
)
from .estimators import GainBudget, PathlossResult, pl_omni_ref1, pl_omni_ref2, pl_omni_vaa
from .padp import Padp, PeakConfig, compute_padp, detect_paths
from .patterns import AntennaPattern, load_pattern, make_gaussian, make_isotropic

__all__ = [
    "ConfigError",
    "Scenario",
    "PipelineOutput",
    "PRESETS",
    "preset_config",
    "corridor_config",
    "load_scenario",
    "run_pipeline",
    "compare_methods",
]

CORRIDOR_GRID = {"f_lower_hz": 28e9, "f_upper_hz": 30e9, "points": 1001}
CORRIDOR_GEOMETRY = {"elements": 240, "radius_m": 0.15}
HORN = {"kind": "gaussian", "hpbw_deg": 40.0, "gain_dbi": 13.5}
BICONICAL_GAIN_DBI = 5.5

LOS_DISTANCES = (8.0, 14.0, 22.0, 30.0)
NLOS_DISTANCES = (11.4, 17.4, 25.4, 33.4)


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending field."""


def _get(cfg: dict, key: str, where: str, kind=None, default=...):
    if key not in cfg:
        if default is ...:
            raise ConfigError(f"{where}{key}: missing required field")
        return default
    val = cfg[key]
    if val is None and default is not ...:
        return default
    if kind is not None:
        try:
            if kind is int:
                if isinstance(val, bool) or int(val) != val:
                    raise ValueError
                val = int(val)
            elif kind is float:
                if isinstance(val, bool):
                    raise ValueError
                val = float(val)
            elif kind is bool:
                if not isinstance(val, bool):
                    raise ValueError
        except (TypeError, ValueError):
            raise ConfigError(f"{where}{key}: expected {kind.__name__}, got {val!r}") from None
    return val


@dataclass
class Scenario:
    scenario_id: str
    grid: FrequencyGrid
    geometry: UcaGeometry
    element: AntennaPattern
    rx_gain_dbi: float
    truth: PathSet
    noise_enabled: bool = False
    noise_floor_db: float = -np.inf
    seed: int = 0
    distance_m: float | None = None
    beamform: BeamformConfig = field(default_factory=BeamformConfig)
    peaks: PeakConfig = field(default_factory=PeakConfig)
    zero_pad: int = 1
    window: str | None = None
    f_center_hz: float | None = None
    workers: int = 1
    padp_max_delay_ns: float | None = None
    config: dict = field(default_factory=dict, repr=False)

    @property
    def f_center(self) -> float:
        return self.grid.center if self.f_center_hz is None else self.f_center_hz

    @classmethod
    def from_config(cls, cfg: dict, base_dir=None) -> "Scenario":
        """Validate a config mapping and build a scenario.

        ``base_dir`` resolves relative pattern file paths.
        """
        if not isinstance(cfg, dict):
            raise ConfigError("top level: expected a JSON object")
        base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
        sid = str(_get(cfg, "scenario_id", "", default="scenario"))

        fq = _get(cfg, "frequency", "")
        try:
            grid = FrequencyGrid(
                _get(fq, "f_lower_hz", "frequency.", float),
                _get(fq, "f_upper_hz", "frequency.", float),
                _get(fq, "points", "frequency.", int),
            )
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"frequency: {exc}") from None

        ge = _get(cfg, "geometry", "")
        try:
            geom = UcaGeometry(_get(ge, "elements", "geometry.", int), _get(ge, "radius_m", "geometry.", float))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"geometry: {exc}") from None

        element = _element_from_config(_get(cfg, "element_pattern", ""), base_dir)
        rx_gain = _get(cfg, "rx_gain_dbi", "", float, 0.0)
        truth = _paths_from_config(_get(cfg, "paths", "", default=[]))

        noise = _get(cfg, "noise", "", default={})
        enabled = _get(noise, "enabled", "noise.", bool, False)
        floor = _get(noise, "floor_db", "noise.", float, -np.inf)
        seed = _get(noise, "seed", "noise.", int, 0)
        if enabled and not np.isfinite(floor):
            raise ConfigError("noise.floor_db: must be finite when noise is enabled")

        bf = _get(cfg, "beamform", "", default={})
        steer = _get(bf, "steering_angles_deg", "beamform.", default=None)
        step = _get(bf, "steering_step_deg", "beamform.", float, None)
        if step is not None:
            if steer is not None:
                raise ConfigError("beamform: give steering_angles_deg or steering_step_deg, not both")
            if not 0 < step <= 360:
                raise ConfigError("beamform.steering_step_deg: must lie in (0, 360]")
            steer = np.arange(0.0, 360.0 - 1e-9, step)
        try:
            bcfg = BeamformConfig(
                _get(bf, "window_half_width_deg", "beamform.", float, 90.0),
                None if steer is None else tuple(float(a) for a in steer),
            )
        except ValueError as exc:
            raise ConfigError(f"beamform: {exc}") from None

        pk = _get(cfg, "peaks", "", default={})
        try:
            peaks = PeakConfig(
                _get(pk, "threshold_db_above_noise", "peaks.", float, 6.0),
                _get(pk, "dynamic_range_db", "peaks.", float, 25.0),
                _get(pk, "delay_neighborhood", "peaks.", int, 1),
                _get(pk, "angle_neighborhood", "peaks.", int, 1),
            )
        except ValueError as exc:
            raise ConfigError(f"peaks: {exc}") from None

        zero_pad = _get(cfg, "zero_pad", "", int, 1)
        if zero_pad < 1:
            raise ConfigError("zero_pad: must be >= 1")
        window = _get(cfg, "window", "", default=None)
        if window not in (None, "hann"):
            raise ConfigError(f"window: expected null or 'hann', got {window!r}")
        workers = _get(cfg, "workers", "", int, 1)
        if workers < 1:
            raise ConfigError("workers: must be >= 1")
        export = _get(cfg, "export", "", default={})
        max_delay = _get(export, "padp_max_delay_ns", "export.", float, None)
        if max_delay is not None and not max_delay > 0:
            raise ConfigError("export.padp_max_delay_ns: must be positive")
        distance = _get(cfg, "distance_m", "", float, None)
        if distance is not None and not distance > 0:
            raise ConfigError("distance_m: must be positive")
        if len(truth) and np.any(truth.delay_s >= grid.max_delay):
            raise ConfigError(f"paths: delay beyond the unambiguous range {grid.max_delay * 1e9:.1f} ns")

        return cls(
            scenario_id=sid,
            grid=grid,
            geometry=geom,
            element=element,
            rx_gain_dbi=rx_gain,
            truth=truth,
            noise_enabled=enabled,
            noise_floor_db=floor,
            seed=seed,
            distance_m=distance,
            beamform=bcfg,
            peaks=peaks,
            zero_pad=zero_pad,
            window=window,
            f_center_hz=_get(cfg, "f_center_hz", "", float, None),
            workers=workers,
            padp_max_delay_ns=max_delay,
            config=copy.deepcopy(cfg),
        )

    def effective_parameters(self) -> dict:
        """Every parameter value the pipeline actually uses."""
        return {
            "scenario_id": self.scenario_id,
            "frequency": {"f_lower_hz": self.grid.f_lower, "f_upper_hz": self.grid.f_upper,
                          "points": self.grid.num_points},
            "geometry": {"elements": self.geometry.num_elements, "radius_m": self.geometry.radius},
            "element_pattern": {"kind": self.element.kind, "hpbw_deg": self.element.hpbw_deg,
                                "gain_dbi": self.element.gain_dbi},
            "rx_gain_dbi": self.rx_gain_dbi,
            "num_paths": len(self.truth),
            "noise": {"enabled": self.noise_enabled,
                      "floor_db": self.noise_floor_db if self.noise_enabled else None,
                      "seed": self.seed},
            "beamform": {"window_half_width_deg": self.beamform.window_half_width,
                         "steering_angles": "element grid" if self.beamform.steering_angles is None
                         else len(self.beamform.steering_angles)},
            "peaks": {"threshold_db_above_noise": self.peaks.threshold_db_above_noise,
                      "dynamic_range_db": self.peaks.dynamic_range_db,
                      "delay_neighborhood": self.peaks.delay_neighborhood,
                      "angle_neighborhood": self.peaks.angle_neighborhood},
            "zero_pad": self.zero_pad,
            "window": self.window,
            "f_center_hz": self.f_center,
            "distance_m": self.distance_m,
            "workers": self.workers,
            "export": {"padp_max_delay_ns": self.padp_max_delay_ns},
        }

    def budget(self) -> GainBudget:
        return GainBudget.for_uca(
            self.geometry,
            self.element,
            self.beamform.window_half_width,
            tx_gain=self.element.gain_linear,
            rx_gain=10.0 ** (self.rx_gain_dbi / 10.0),
        )

    def antenna_truth(self) -> PathSet:
        """Ground truth scaled by the boresight Tx and Rx antenna gains."""
        return self.truth.scaled(np.sqrt(self.element.gain_linear * 10.0 ** (self.rx_gain_dbi / 10.0)))

    def synthesize(self) -> tuple[CfrMatrix, CfrMatrix]:
        """Synthetic VAA and DSS sweeps.  DSS noise uses ``seed + 1``."""
        truth = self.antenna_truth()
        vaa = synth_vaa_cfr(truth, self.geometry, self.element, self.grid)
        dss = synth_dss_cfr(truth, self.geometry.element_angles, self.element, self.grid)
        if self.noise_enabled:
            vaa = add_noise(vaa, self.noise_floor_db, self.seed)
            dss = add_noise(dss, self.noise_floor_db, self.seed + 1)
        return vaa, dss


def _element_from_config(ep, base_dir: Path) -> AntennaPattern:
    if not isinstance(ep, dict):
        raise ConfigError("element_pattern: expected an object")
    gain = _get(ep, "gain_dbi", "element_pattern.", float, 0.0)
    if "file" in ep:
        path = Path(ep["file"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"element_pattern.file: pattern file not found: {path}")
        return load_pattern(path, gain_dbi=gain)
    kind = _get(ep, "kind", "element_pattern.")
    if kind == "isotropic":
        return make_isotropic(gain)
    if kind == "gaussian":
        try:
            return make_gaussian(_get(ep, "hpbw_deg", "element_pattern.", float), gain)
        except ValueError as exc:
            raise ConfigError(f"element_pattern.hpbw_deg: {exc}") from None
    raise ConfigError(f"element_pattern.kind: unknown kind {kind!r} (or give 'file')")


def _paths_from_config(paths) -> PathSet:
    if not isinstance(paths, list):
        raise ConfigError("paths: expected a list")
    az, dl, pw, ph = [], [], [], []
    for i, p in enumerate(paths):
        where = f"paths[{i}]."
        if not isinstance(p, dict):
            raise ConfigError(f"paths[{i}]: expected an object")
        az.append(_get(p, "azimuth_deg", where, float))
        d = _get(p, "delay_ns", where, float)
        if d < 0:
            raise ConfigError(f"{where}delay_ns: must be non-negative")
        dl.append(d * 1e-9)
        pw.append(_get(p, "power_db", where, float))
        ph.append(_get(p, "phase_deg", where, float, 0.0))
    if not az:
        return PathSet(amplitude=np.zeros(0, dtype=complex))
    return PathSet.from_db(az, dl, pw, ph)


def load_scenario(path) -> Scenario:
    """Read a scenario JSON file; parse errors report line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return Scenario.from_config(cfg, base_dir=path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# -- presets ---------------------------------------------------------------

def _base_config(sid: str, distance: float) -> dict:
    return {
        "scenario_id": sid,
        "frequency": dict(CORRIDOR_GRID),
        "geometry": dict(CORRIDOR_GEOMETRY),
        "element_pattern": dict(HORN),
        "rx_gain_dbi": BICONICAL_GAIN_DBI,
        "distance_m": distance,
        "noise": {"enabled": False, "floor_db": -160.0, "seed": 0},
        # Hann + 4x zero padding + 0.5 deg steering keeps grid-straddling
        # loss of off-grid paths below ~0.1 dB
        "zero_pad": 4,
        "window": "hann",
        "beamform": {"window_half_width_deg": 90.0, "steering_step_deg": 0.5},
        "export": {"padp_max_delay_ns": 250.0},
    }


def _path(az, length_m, extra_loss_db, phase_deg):
    return {
        "azimuth_deg": float(az),
        "delay_ns": length_m / SPEED_OF_LIGHT * 1e9,
        "power_db": -free_space_pathloss_db(length_m, 29e9) - extra_loss_db,
        "phase_deg": float(phase_deg),
    }


def _los_paths(d: float) -> list:
    # Corridor 2.4 m wide, antennas 0.9 m from one wall; one back wall 3 m
    # behind the Rx.  Image-source lengths, single-bounce loss 7 dB.
    w, y0, back = 2.4, 0.9, 3.0
    near = np.hypot(d, 2 * y0)
    far = np.hypot(d, 2 * (w - y0))
    return [
        _path(0.0, d, 0.0, 0.0),
        _path(-np.degrees(np.arctan2(2 * y0, d)), near, 7.0, 140.0),
        _path(np.degrees(np.arctan2(2 * (w - y0), d)), far, 7.0, -75.0),
        _path(0.0, d + 2 * back, 9.0, 30.0),
    ]


def _nlos_paths(d: float) -> list:
    rng = np.random.default_rng(int(round(d * 10)))
    n = 6
    az = rng.uniform(-150.0, 150.0, n)
    # distinct delays at least 2 ns apart, so only the twin below shares a bin
    excess = np.cumsum(rng.uniform(0.6, 1.5, n))
    loss = 10.0 + rng.uniform(0.0, 12.0, n)
    phase = rng.uniform(-180.0, 180.0, n)
    # a weaker high-order bounce shares the delay of path 1 from a clearly
    # different direction; a delay-only search cannot separate the two
    excess[2] = excess[1]
    az[2] = az[1] + rng.choice([-1.0, 1.0]) * rng.uniform(90.0, 180.0)
    loss[2] = loss[1] + rng.uniform(3.0, 8.0)
    return [_path(a, d + e, l, p) for a, e, l, p in zip(az, excess, loss, phase)]


def _fmt(d: float) -> str:
    return f"{d:g}".replace(".", "p")


PRESETS = {}
for _d in LOS_DISTANCES:
    PRESETS[f"los_{_fmt(_d)}m"] = ("los", _d)
for _d in NLOS_DISTANCES:
    PRESETS[f"nlos_{_fmt(_d)}m"] = ("nlos", _d)
PRESETS["single_path_14m"] = ("single", 14.0)
del _d


def preset_config(name: str) -> dict:
    """Config dict of a built-in scenario (``los_14m``, ``nlos_17p4m``, ...).

    Presets use the measurement setup's grid, array, horn and biconical
    gains with synthetic corridor path sets.
    """
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    kind, d = PRESETS[name]
    cfg = _base_config(name, d)
    if kind == "los":
        cfg["paths"] = _los_paths(d)
    elif kind == "nlos":
        cfg["paths"] = _nlos_paths(d)
    else:
        cfg["paths"] = [_path(0.0, d, 0.0, 0.0)]
    return cfg


def corridor_config(seed: int, n_paths: int | None = None, los: bool = True) -> dict:
    """Randomized corridor-like scene with 4-8 paths.

    The first path sits at the link distance (LOS at -30..30 deg, or
    attenuated by 6-12 dB and at any angle for N-LOS).  One weaker
    component, 3-10 dB below it and at least 60 deg away, shares its delay.
    All other paths are at least 2 ns apart in delay, come from random
    azimuths and carry 3-20 dB extra loss.
    """
    rng = np.random.default_rng(seed)
    n = int(n_paths if n_paths is not None else rng.integers(4, 9))
    if n < 2:
        raise ValueError("a corridor scene needs at least 2 paths")
    d = float(rng.uniform(8.0, 34.0))
    cfg = _base_config(f"corridor_{seed}{'' if los else '_nlos'}", d)
    first_az = rng.uniform(-30.0, 30.0) if los else rng.uniform(-180.0, 180.0)
    paths = [_path(first_az, d, 0.0 if los else rng.uniform(6.0, 12.0), rng.uniform(-180, 180))]
    lengths = [d]
    while len(paths) < n - 1:
        length = d + rng.uniform(0.3, 18.0)
        if min(abs(length - x) for x in lengths) < 2e-9 * SPEED_OF_LIGHT:
            continue
        lengths.append(length)
        paths.append(_path(rng.uniform(-180.0, 180.0), length, rng.uniform(3.0, 20.0), rng.uniform(-180, 180)))
    partner = paths[0]
    offset = rng.uniform(60.0, 180.0) * rng.choice([-1.0, 1.0])
    twin = dict(partner)
    twin["azimuth_deg"] = float(((partner["azimuth_deg"] + offset + 180.0) % 360.0) - 180.0)
    twin["power_db"] = partner["power_db"] - float(rng.uniform(3.0, 10.0))
    twin["phase_deg"] = float(rng.uniform(-180, 180))
    paths.append(twin)
    cfg["paths"] = paths
    return cfg


# -- pipeline --------------------------------------------------------------

@dataclass
class PipelineOutput:
    scenario: Scenario
    results: list
    vaa_padp: Padp | None = None
    dss_padp: Padp | None = None
    detected: PathSet | None = None
    ref2_paths: PathSet | None = None


def run_pipeline(scenario: Scenario, vaa: CfrMatrix | None = None, dss: CfrMatrix | None = None,
                 synthesize: bool = True) -> PipelineOutput:
    """Run every estimator on a scenario.

    With ``synthesize=True`` missing sweeps are simulated from the scenario
    paths.  Otherwise only the schemes whose sweeps are given are
    evaluated (ingest mode).
    """
    if synthesize and (vaa is None or dss is None):
        sv, sd = scenario.synthesize()
        vaa = sv if vaa is None else vaa
        dss = sd if dss is None else dss
    budget = scenario.budget()
    out = PipelineOutput(scenario, [])

    if vaa is not None:
        spec = beamform_spectrum(vaa, scenario.beamform, workers=scenario.workers)
        out.vaa_padp = compute_padp(spec, scenario.zero_pad, scenario.window)
        out.detected = detect_paths(out.vaa_padp, scenario.peaks)
        out.results.append(pl_omni_vaa(out.detected, budget, scenario.f_center))
    if dss is not None:
        out.dss_padp = compute_padp(dss, scenario.zero_pad, scenario.window)
        out.results.append(pl_omni_ref1(out.dss_padp, budget, scenario.peaks))
        r2 = pl_omni_ref2(out.dss_padp, budget, scenario.peaks)
        out.ref2_paths = r2.paths
        out.results.append(r2)
    if scenario.distance_m is not None:
        out.results.append(PathlossResult("free_space", free_space_pathloss_db(scenario.distance_m, scenario.f_center), 1))
    if len(scenario.truth):
        t = scenario.truth
        out.results.append(PathlossResult("ground_truth", true_omni_pathloss_db(t), len(t), np.abs(t.amplitude) ** 2, t))
    return out


def compare_methods(scene) -> list:
    """Pathloss from the VAA method, Ref 1, Ref 2, free space and ground truth.

    ``scene`` is a :class:`Scenario`, a config dict, or a preset name.
    """
    if isinstance(scene, str):
        scene = Scenario.from_config(preset_config(scene))
    elif isinstance(scene, dict):
        scene = Scenario.from_config(scene)
    return run_pipeline(scene).results
