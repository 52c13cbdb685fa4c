"""Weyl mean curvature versus Riemannian mean curvature.

The fiber torus and the Clifford torus in the Hopf surface are Weyl-minimal.
A great 2-sphere slice is minimal for the round metric but not Weyl-minimal,
since the dual of alpha has a normal component of length 1/2 along it.
"""

import numpy as np

from weylgeo.catalog import get_entry
from weylgeo.surface import branch_scan, surface_diagnostics, vnorm, weyl_mean_curvature

hopf = get_entry("hopf_surface")
for name in ("fiber_torus", "clifford_torus", "great_sphere"):
    f = hopf.surface(name, 64)
    jet = f.jets()
    g = f.chart.metric_values(jet.f)
    HD, Hg = weyl_mean_curvature(jet, hopf.weyl)
    print(f"{name:15s} max|H_g| = {np.nanmax(vnorm(g, Hg)):.2e}   max|H^D| = {np.nanmax(vnorm(g, HD)):.3e}")

pb = get_entry("principal_bundle")
d = surface_diagnostics(pb.surface("swept_torus", 64), pb.weyl)
print("swept torus in the principal bundle: max|H^D| =", f"{np.nanmax(d['HD_norm']):.2e}")
print("branch points on the Clifford torus:", branch_scan(hopf.surface("clifford_torus", 32)))
