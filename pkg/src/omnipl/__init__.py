"""Omni-directional pathloss from virtual antenna array (VAA) sweeps.

Typical use::

    from omnipl import compare_methods
    for r in compare_methods("los_14m"):
        print(r.method, r.pathloss_db)
"""
__version__ = "0.1.0"

from .beamform import BeamformConfig, BeamSpectrum, array_beam_pattern, array_gain, beamform_spectrum, beamwidth_deg
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
from .estimators import GainBudget, NoPowerError, PathlossResult, pl_omni_ref1, pl_omni_ref2, pl_omni_vaa
from .files import ingest_sweeps, write_sweeps
from .padp import Padp, PeakConfig, compute_padp, compute_pdp, detect_paths, estimate_noise_floor
from .patterns import AntennaPattern, load_pattern, make_gaussian, make_isotropic, make_tabulated, save_pattern
from .scenario import ConfigError, Scenario, compare_methods, corridor_config, load_scenario, preset_config, run_pipeline
