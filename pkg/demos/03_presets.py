"""Corridor presets at the measured link distances.

Each preset is a small multipath scene: line of sight with wall and
floor bounces, or a blocked link with reflections only.  The table shows
how far each estimator lands from the ground truth.
"""
from omnipl import compare_methods
from omnipl.scenario import PRESETS

print(f"{'preset':14s}{'truth':>9s}{'vaa':>9s}{'ref1':>9s}{'ref2':>9s}{'fspl':>9s}")
for name in PRESETS:
    r = {x.method: x.pathloss_db for x in compare_methods(name)}
    t = r["ground_truth"]
    row = [r[m] - t for m in ("proposed_vaa", "ref1_sum_all", "ref2_delay_max")]
    fs = f"{r['free_space']:9.2f}" if "free_space" in r else f"{'':9s}"
    print(f"{name:14s}{t:9.2f}" + "".join(f"{x:+9.2f}" for x in row) + fs)
