"""Shape of the synthesized beam.

Sweeping the steering angle past a single plane wave traces the array
pattern.  With 40 degree horn elements the main lobe is under three
degrees wide and the side lobes sit some 35 dB down.  Isotropic elements
narrow the beam to about 1.4 degrees, but the side lobes climb to -8 dB.
"""
import numpy as np

from omnipl import UcaGeometry, array_beam_pattern, beamwidth_deg, make_gaussian, make_isotropic

geom = UcaGeometry(240, 0.15)
steer = np.arange(-180.0, 180.0, 0.01)
f = 29e9

for label, elem in (("horn", make_gaussian(40.0)), ("isotropic", make_isotropic())):
    p = np.abs(array_beam_pattern(geom, elem, f, 0.0, steer)) ** 2
    db = 10 * np.log10(p / p.max())
    hpbw = beamwidth_deg(p, steer, -10 * np.log10(2))
    # walk out of the main lobe before looking for the largest side lobe
    i0 = int(np.argmax(p))
    j = i0
    while db[j + 1] < db[j]:
        j += 1
    print(f"{label:10s} HPBW {hpbw:.3f} deg, peak side lobe {db[j:].max():.2f} dB")
