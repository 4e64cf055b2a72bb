"""Why the delay-maximum reference under-counts.

Two equal paths arrive at the same delay but 90 degrees apart.  A
rotating horn sees both, yet picking the strongest rotation per delay
keeps only one of them, so the estimate lands 3 dB high.  Summing every
rotation goes the other way and counts each path once per rotation that
sees it.  The virtual array separates the pair in angle and keeps both.
"""
from omnipl import (
    FrequencyGrid,
    GainBudget,
    PathSet,
    UcaGeometry,
    beamform_spectrum,
    compute_padp,
    detect_paths,
    make_gaussian,
    pl_omni_ref1,
    pl_omni_ref2,
    pl_omni_vaa,
    synth_dss_cfr,
    synth_vaa_cfr,
    true_omni_pathloss_db,
)

grid = FrequencyGrid(28e9, 30e9, 1001)
geom = UcaGeometry(240, 0.15)
horn = make_gaussian(40.0)
tau = 30 / (grid.num_points * grid.step)

truth = PathSet([0.0, 90.0], [tau, tau], amplitude=[1e-5, 1e-5])
pl_true = true_omni_pathloss_db(truth)

dss = compute_padp(synth_dss_cfr(truth, geom.element_angles, horn, grid))
ref1 = pl_omni_ref1(dss, GainBudget())
ref2 = pl_omni_ref2(dss, GainBudget())

vaa = compute_padp(beamform_spectrum(synth_vaa_cfr(truth, geom, horn, grid)))
prop = pl_omni_vaa(detect_paths(vaa), GainBudget.for_uca(geom, horn), grid.center)

print(f"ground truth  {pl_true:8.3f} dB")
for r in (prop, ref1, ref2):
    print(f"{r.method:14s}{r.pathloss_db:8.3f} dB  ({r.pathloss_db - pl_true:+.3f}, {r.detected_path_count} path(s))")
