"""Batch front-end: ``omnipl --config scene.json --out runs/scene``."""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .estimators import NoPowerError
from .files import (
    SweepFormatError,
    ingest_sweeps,
    write_diagnostics_csv,
    write_padp_csv,
    write_paths_csv,
    write_summary_csv,
    write_sweeps,
)
from .scenario import PRESETS, ConfigError, Scenario, preset_config, run_pipeline

OUTPUTS = (
    "padp_vaa.csv",
    "padp_dss.csv",
    "paths_vaa.csv",
    "paths_ref2.csv",
    "summary.csv",
    "diagnostics.csv",
    "config.json",
    "manifest.json",
)
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class RunError(RuntimeError):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="omnipl",
        description="Omni-directional pathloss from virtual-array and directional-scan sweeps.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="scenario JSON file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in corridor scenario")
    p.add_argument("--out", type=Path, required=True, help="run directory")
    p.add_argument("--mode", choices=("simulate", "ingest"), default="simulate")
    p.add_argument("--sweeps", type=Path, help="ingest mode: directory holding vaa/ and/or dss/ sweep folders")
    p.add_argument("--force", action="store_true", help="overwrite outputs of a previous run")
    p.add_argument("--seed", type=_u64, help="noise seed (overrides the config)")
    p.add_argument("--zero-pad", type=int, help="IFFT zero-padding factor (overrides the config)")
    p.add_argument("--workers", type=int, help="beamforming threads (overrides the config)")
    p.add_argument("--export-sweeps", action="store_true",
                   help="simulate mode: also write the synthetic sweeps under <out>/sweeps")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _load_config(args) -> tuple[dict, Path]:
    if args.preset:
        return preset_config(args.preset), Path.cwd()
    path = args.config
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return cfg, path.parent


def _apply_overrides(cfg: dict, args) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("top level: expected a JSON object")
    if args.seed is not None:
        noise = cfg.get("noise") or {}
        if not isinstance(noise, dict):
            raise ConfigError("noise: expected an object")
        cfg["noise"] = {**noise, "seed": args.seed}
    if args.zero_pad is not None:
        cfg["zero_pad"] = args.zero_pad
    if args.workers is not None:
        cfg["workers"] = args.workers
    return cfg


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form of a resolved config."""
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"), allow_nan=True)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _prepare_out(out: Path, force: bool) -> None:
    if out.exists() and not out.is_dir():
        raise RunError(f"{out}: exists and is not a directory")
    clash = [n for n in OUTPUTS if (out / n).exists()]
    if (out / "sweeps").exists():
        clash.append("sweeps/")
    if clash and not force:
        raise RunError(f"{out}: refusing to overwrite {', '.join(clash)} (use --force)")
    for n in OUTPUTS:
        (out / n).unlink(missing_ok=True)
    out.mkdir(parents=True, exist_ok=True)


def _ingest(scenario: Scenario, sweeps: Path):
    if sweeps is None:
        raise RunError("--mode ingest needs --sweeps")
    vdir, ddir = sweeps / "vaa", sweeps / "dss"
    if not vdir.is_dir() and not ddir.is_dir():
        raise RunError(f"{sweeps}: expected a vaa/ or dss/ subdirectory")
    vaa = ingest_sweeps(vdir, geometry=scenario.geometry, grid=scenario.grid) if vdir.is_dir() else None
    dss = (ingest_sweeps(ddir, num_angles=scenario.geometry.num_elements, grid=scenario.grid)
           if ddir.is_dir() else None)
    return vaa, dss


def run(args) -> dict:
    """Execute one run and return its manifest."""
    t0 = time.perf_counter()
    cfg, base_dir = _load_config(args)
    cfg = _apply_overrides(cfg, args)
    scenario = Scenario.from_config(cfg, base_dir)
    out = args.out
    _prepare_out(out, args.force)

    timing = {}
    t = time.perf_counter()
    written = []
    if args.mode == "simulate":
        vaa, dss = scenario.synthesize()
        if args.export_sweeps:
            for name, cfr in (("vaa", vaa), ("dss", dss)):
                written += [str(p.relative_to(out)) for p in write_sweeps(out / "sweeps" / name, cfr)]
    else:
        vaa, dss = _ingest(scenario, args.sweeps)
    timing["acquire_s"] = time.perf_counter() - t

    t = time.perf_counter()
    result = run_pipeline(scenario, vaa, dss, synthesize=False)
    timing["pipeline_s"] = time.perf_counter() - t

    t = time.perf_counter()
    cut = scenario.padp_max_delay_ns
    if result.vaa_padp is not None:
        write_padp_csv(out / "padp_vaa.csv", result.vaa_padp, cut)
        write_paths_csv(out / "paths_vaa.csv", result.detected)
        written += ["padp_vaa.csv", "paths_vaa.csv"]
    if result.dss_padp is not None:
        write_padp_csv(out / "padp_dss.csv", result.dss_padp, cut)
        write_paths_csv(out / "paths_ref2.csv", result.ref2_paths)
        written += ["padp_dss.csv", "paths_ref2.csv"]
    write_summary_csv(out / "summary.csv", result.results, scenario.scenario_id, scenario.f_center)
    write_diagnostics_csv(out / "diagnostics.csv", result.results)
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written += ["summary.csv", "diagnostics.csv", "config.json"]
    timing["write_s"] = time.perf_counter() - t
    timing["total_s"] = time.perf_counter() - t0

    manifest = {
        "scenario_id": scenario.scenario_id,
        "config_hash": config_hash(cfg),
        "tool_version": __version__,
        "mode": args.mode,
        "outputs": sorted(written + ["manifest.json"]),
        "parameters": scenario.effective_parameters(),
        "seed": scenario.seed,
        "pathloss_db": {r.method: r.pathloss_db for r in result.results},
        "timing": timing,
    }
    missing = [n for n in written if not (out / n).exists()]
    if missing:
        raise RunError(f"outputs missing after write: {missing}")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        manifest = run(args)
    except ConfigError as exc:
        print(f"omnipl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RunError, SweepFormatError, NoPowerError, OSError, ValueError) as exc:
        print(f"omnipl: error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for method, pl in manifest["pathloss_db"].items():
        print(f"{method:16s} {pl:9.3f} dB")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
