"""Twistor lifts and the complex/anti-complex point counts.

A conformal Weyl-harmonic surface has holomorphic twistor lifts. The residual
of the lift of the great sphere is a fixed multiple of its tension. On flat
tori the zero counts and the first Chern number are reported side by side.
"""

import numpy as np

from weylgeo import twistor as tw
from weylgeo.catalog import get_entry

hopf = get_entry("hopf_surface")
for name in ("clifford_torus", "fiber_torus", "great_sphere"):
    f = hopf.surface(name, 64)
    res = [np.nanmax(tw.holomorphicity_residual(f, hopf.weyl, s)) for s in (1, -1)]
    print(f"{name:15s} lift residual (+, -): {res[0]:.2e}, {res[1]:.2e}")

flat = get_entry("flat_kahler")
for name in ("lagrangian_torus", "anti_complex_probe"):
    rep = tw.webster_report(flat.surface(name, 64), flat.hermitian, flat.weyl)
    print(f"{name}: P={rep.P} Q={rep.Q} R={rep.R} c1={rep.c1} web1={rep.web1_residual} "
          f"sign record={rep.web2_sign_supported}")
    for z in rep.zeros:
        print("   zero", z)
