"""The Hopf surface as a Weyl manifold.

The Hopf surface S^1 x S^3 carries a Hermitian structure whose Lee form is
d(phi). Its canonical Weyl connection preserves J even though the Levi-Civita
connection does not, and the Weyl connection survives any change of gauge.
"""

import numpy as np

from weylgeo import hermitian as hm
from weylgeo import weyl
from weylgeo.catalog import get_entry

rng = np.random.default_rng(0)
hopf = get_entry("hopf_surface")
pts = hopf.chart.random_points(rng, 200)
print("chart coordinates:", hopf.chart.coords)

theta = hm.lee_form(hopf.hermitian, pts)
print("Lee form, mean over samples:", np.round(theta.mean(0), 12))
print("alpha = -theta/2:", hopf.weyl.alpha_values(pts[:1])[0])

print("metricity  |D g + 2 alpha (x) g|:", np.abs(weyl.metricity_defect(hopf.weyl, pts)).max())

Z = rng.normal(size=(200, 4))
print("|grad^D J| (canonical Weyl):", np.abs(hm.nabla_J(hopf.weyl, hopf.hermitian, pts, Z)).max())
print("|grad^g J| (Levi-Civita):   ", np.abs(hm.nabla_J(None, hopf.hermitian, pts, Z)).max())

ref = weyl.weyl_connection(hopf.weyl, pts)
for k in range(3):
    W2 = weyl.gauge_transform(hopf.weyl, weyl.damped_quadratic_gauge(rng))
    print(f"gauge change {k}: Christoffel drift {np.abs(weyl.weyl_connection(W2, pts) - ref).max():.2e}")

# alpha is closed, so the Weyl connection is flat: it is the Levi-Civita connection of the cone over S^3
print("|R^D|:", np.abs(weyl.riemann(hopf.weyl, pts[:20])).max())
radial = get_entry("hopf_cover").notes["radial"]
print("|R| of dr^2 + r^2 g_S3:", np.abs(weyl.riemann(radial, radial.random_points(rng, 20))).max())
