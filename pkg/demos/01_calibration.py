"""Single-path calibration of the virtual array.

One plane wave, one delay, no noise.  After beamforming and the IFFT the
peak cell carries |a|^2 |v|^2, and dividing by the array gain gives the
pathloss back to numerical precision.
"""
import numpy as np

from omnipl import (
    FrequencyGrid,
    GainBudget,
    PathSet,
    UcaGeometry,
    beamform_spectrum,
    compute_padp,
    detect_paths,
    make_gaussian,
    pl_omni_vaa,
    synth_vaa_cfr,
)

grid = FrequencyGrid(28e9, 30e9, 1001)
geom = UcaGeometry(240, 0.15)
horn = make_gaussian(40.0)

# a 100 dB path, placed on the delay grid so nothing straddles two bins
tau = 90 / (grid.num_points * grid.step)
truth = PathSet([geom.element_angles[17]], [tau], amplitude=[1e-5])

cfr = synth_vaa_cfr(truth, geom, horn, grid)
padp = compute_padp(beamform_spectrum(cfr))
found = detect_paths(padp)
print(f"detected {len(found)} path(s) at {found.azimuth_deg[0]:.2f} deg, {found.delay_s[0] * 1e9:.3f} ns")

budget = GainBudget.for_uca(geom, horn)
r = pl_omni_vaa(found, budget, grid.center)
print(f"pathloss {r.pathloss_db:.9f} dB (expected 100)")

# the array gain that was divided out
v = budget.array_gain(grid.center, found.azimuth_deg[0])
print(f"|v|^2 at the path = {20 * np.log10(v):.2f} dB")
