"""Built-in example manifolds, Hermitian structures and reference surfaces.

Coordinates are always named ``x1..x4`` in expressions; each entry records
what they mean. Reference surfaces are builders ``(n, m) -> GridImmersion``
together with the properties the test-suite checks for them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as ex
from .geom import ChartedManifold4
from .hermitian import AlmostHermitianStructure
from .surface import GridImmersion, RectDomain, TorusDomain
from .weyl import WeylStructure

TWO_PI = 2 * np.pi
ETA_MARGIN = 0.05
# L_I: e1 -> e2, e3 -> e4.  L_J: e1 -> e3, e2 -> -e4 (anticommutes with L_I)
L_I = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
L_J = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)


@dataclass
class SurfaceRef:
    build: Callable[..., GridImmersion]
    properties: dict = field(default_factory=dict)
    default_grid: tuple = (64, 64)


@dataclass
class CatalogEntry:
    name: str
    chart: ChartedManifold4
    hermitian: AlmostHermitianStructure | None = None
    weyl: WeylStructure | None = None
    surfaces: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def surface(self, name, n=None, m=None) -> GridImmersion:
        ref = self.surfaces[name]
        n = n or ref.default_grid[0]
        m = m or n
        return ref.build(n, m)


def _E(s):
    return ex.parse(s)


def mat_mul(A, B):
    """Product of object arrays of expressions (with constant folding)."""
    out = np.empty((A.shape[0], B.shape[1]), dtype=object)
    for i in range(A.shape[0]):
        for j in range(B.shape[1]):
            acc = ex.Num(0.0)
            for k in range(A.shape[1]):
                acc = ex.add(acc, ex.mul(A[i, k], B[k, j]))
            out[i, j] = acc
    return out


def _as_obj(M):
    out = np.empty(np.shape(M), dtype=object)
    for idx in np.ndindex(out.shape):
        out[idx] = ex.as_expr(M[idx])
    return out


def frame_J(E, Einv, J0):
    """Coordinate J = E^{-1} J0 E for coframe rows E and frame columns Einv."""
    return mat_mul(mat_mul(_as_obj(Einv), _as_obj(J0)), _as_obj(E))


def twisted_block(s):
    """cos(s) L_I + sin(s) L_J as expressions (an orthogonal complex structure)."""
    s = ex.as_expr(s)
    c, sn = ex.call("cos", s), ex.call("sin", s)
    out = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            out[i, j] = ex.add(ex.mul(float(L_I[i, j]), c), ex.mul(float(L_J[i, j]), sn))
    return out


def _diag(entries):
    return [[entries[i] if i == j else 0.0 for j in range(4)] for i in range(4)]


# -- flat --------------------------------------------------------------------

def _flat_chart(name, J):
    return ChartedManifold4(
        name=name, metric=_diag([1.0] * 4), periods=(TWO_PI,) * 4, J=J,
        alpha=[0.0] * 4, notes={"coords": "flat torus R^4 / (2 pi Z)^4"})


def flat_kahler() -> CatalogEntry:
    """Flat T^4 with J d1 = d2, J d3 = d4 (so omega = dx1^dx2 + dx3^dx4)."""
    chart = _flat_chart("flat_kahler", L_I)
    H = AlmostHermitianStructure(chart, integrable=True)
    W = WeylStructure(chart, [0.0] * 4, provenance="catalog")

    def lagrangian(n, m):
        return GridImmersion(TorusDomain(n, m), chart, ("u", 0.0, "v", 0.0), name="lagrangian_torus")

    def complex_torus(n, m):
        return GridImmersion(TorusDomain(n, m), chart, ("u", "v", 0.0, 0.0), name="complex_torus")

    def anti_complex_probe(n, m, eps=0.3):
        # w1 = conj(z) plus a small height wave in x3 that tilts the tangent plane
        comps = ("u", "-v", f"{eps}*(cos(u) + cos(v))", 0.0)
        return GridImmersion(TorusDomain(n, m), chart, comps, name="anti_complex_probe",
                             notes={"eps": eps})

    surfaces = {
        "lagrangian_torus": SurfaceRef(lagrangian, {"weyl_minimal": True, "minimal": True,
                                                    "lagrangian": True, "J_holomorphic": False}),
        "complex_torus": SurfaceRef(complex_torus, {"weyl_minimal": True, "minimal": True,
                                                    "lagrangian": False, "J_holomorphic": True}),
        "anti_complex_probe": SurfaceRef(anti_complex_probe, {"weyl_minimal": False}),
    }
    return CatalogEntry("flat_kahler", chart, H, W, surfaces)


def twisted_flat(eps=0.3) -> CatalogEntry:
    """Flat T^4 with a non-integrable orthogonal J rotated by s = eps(sin x1 + cos(x2 + x3))."""
    s = ex.mul(float(eps), _E("sin(x1) + cos(x2 + x3)"))
    chart = _flat_chart("twisted_flat", twisted_block(s))
    chart.alpha = None
    H = AlmostHermitianStructure(chart, name="twisted_flat", integrable=False)
    return CatalogEntry("twisted_flat", chart, H, None, {}, {"eps": eps})


# -- Hopf surface S^1 x S^3 --------------------------------------------------

def _hopf_coframe(R):
    """Rows: e1 = dphi, e2 = R(c^2 dxi1 + s^2 dxi2), e3 = R deta, e4 = R c s (dxi1 - dxi2)."""
    c2, s2, cs = _E("cos(x2)*cos(x2)"), _E("sin(x2)*sin(x2)"), _E("cos(x2)*sin(x2)")
    E = np.array([[1.0, 0.0, 0.0, 0.0],
                  [0.0, 0.0, ex.mul(R, c2), ex.mul(R, s2)],
                  [0.0, float(R), 0.0, 0.0],
                  [0.0, 0.0, ex.mul(R, cs), ex.mul(-R, cs)]], dtype=object)
    tan, cot = _E("tan(x2)"), _E("cos(x2)/sin(x2)")
    r = 1.0 / R
    Einv = np.array([[1.0, 0.0, 0.0, 0.0],
                     [0.0, 0.0, r, 0.0],
                     [0.0, r, 0.0, ex.mul(r, tan)],
                     [0.0, r, 0.0, ex.mul(-r, cot)]], dtype=object)
    return E, Einv


def _hopf_metric(R):
    R2 = float(R * R)
    return _diag([1.0, R2, ex.mul(R2, _E("cos(x2)*cos(x2)")), ex.mul(R2, _E("sin(x2)*sin(x2)"))])


def _hopf_chart(name, R, J):
    return ChartedManifold4(
        name=name, metric=_hopf_metric(R), coords=("phi", "eta", "xi1", "xi2"),
        periods=(TWO_PI, None, TWO_PI, TWO_PI),
        bounds=(None, (ETA_MARGIN, np.pi / 2 - ETA_MARGIN), None, None),
        J=J, notes={"S3_radius": R, "fiber": "d/dxi1 + d/dxi2"})


def hopf_surface(radius=2.0) -> CatalogEntry:
    """S^1 x S^3(radius) with J from the coframe (e1 = dphi, e2 along the Hopf fiber).

    With radius 2 the Lee form is exactly dphi and alpha = -dphi/2.
    """
    R = float(radius)
    E, Einv = _hopf_coframe(R)
    chart = _hopf_chart("hopf_surface", R, frame_J(E, Einv, L_I))
    chart.alpha = np.array([ex.Num(-1.0 / R), ex.Num(0.0), ex.Num(0.0), ex.Num(0.0)], dtype=object)
    H = AlmostHermitianStructure(chart, integrable=True)
    W = WeylStructure(chart, chart.alpha, provenance="catalog")
    r = 1.0 / R
    eta0 = 0.6

    def fiber_torus(n, m):
        comps = ("u", eta0, f"{r}*v", f"{r}*v")
        return GridImmersion(TorusDomain(n, m, (TWO_PI, TWO_PI * R)), chart, comps, name="fiber_torus")

    def clifford(n, m):
        comps = ("u", np.pi / 4, f"{r}*v", f"-{r}*v")
        return GridImmersion(TorusDomain(n, m, (TWO_PI, TWO_PI * R)), chart, comps,
                             name="clifford_torus")

    def great_sphere(n, m, phi0=0.7):
        comps = (phi0, "atan2(exp(u) - exp(-u), 2)", "v", 0.0)
        return GridImmersion(RectDomain((0.3, 1.5), (0.0, 1.2), n, m), chart, comps,
                             lam=f"log({R}) - log((exp(u) + exp(-u))/2)", name="great_sphere")

    surfaces = {
        "fiber_torus": SurfaceRef(fiber_torus, {"weyl_minimal": True, "minimal": True,
                                                "J_holomorphic": True, "lagrangian": False}),
        "clifford_torus": SurfaceRef(clifford, {"weyl_minimal": True, "minimal": True,
                                                "J_holomorphic": False, "lagrangian": True}),
        "great_sphere": SurfaceRef(great_sphere, {"weyl_minimal": False, "minimal": True,
                                                  "J_holomorphic": False}),
    }
    return CatalogEntry("hopf_surface", chart, H, W, surfaces,
                        {"lee_form": "dphi", "alpha": "-dphi/2", "radius": R})


def twisted_hopf(eps=0.25, radius=2.0) -> CatalogEntry:
    """Hopf metric with the coframe J rotated by s = eps(sin(x1 + x3) + cos(x2)); non-integrable."""
    R = float(radius)
    E, Einv = _hopf_coframe(R)
    s = ex.mul(float(eps), _E("sin(x1 + x3) + cos(x2)"))
    chart = _hopf_chart("twisted_hopf", R, frame_J(E, Einv, twisted_block(s)))
    H = AlmostHermitianStructure(chart, integrable=False)
    return CatalogEntry("twisted_hopf", chart, H, None, {}, {"eps": eps, "radius": R})


def hopf_cover(r_range=(0.2, 5.0)) -> CatalogEntry:
    """Universal cover R x S^3 in two presentations.

    ``chart`` uses (phi, eta, xi1, xi2) with e^{2 phi}(dphi^2 + g_S3);
    ``notes['radial']`` uses (r, eta, xi1, xi2) with dr^2 + r^2 g_S3 (flat), r = e^phi.
    """
    s3 = [_E("cos(x2)*cos(x2)"), _E("sin(x2)*sin(x2)")]
    w = _E("exp(2*x1)")
    conformal = ChartedManifold4(
        name="hopf_cover", metric=_diag([w, w, ex.mul(w, s3[0]), ex.mul(w, s3[1])]),
        coords=("phi", "eta", "xi1", "xi2"), periods=(None, None, TWO_PI, TWO_PI),
        bounds=((np.log(r_range[0]), np.log(r_range[1])), (ETA_MARGIN, np.pi / 2 - ETA_MARGIN),
                None, None),
        alpha=[0.0] * 4)
    r2 = _E("x1*x1")
    radial = ChartedManifold4(
        name="hopf_cover_radial", metric=_diag([1.0, r2, ex.mul(r2, s3[0]), ex.mul(r2, s3[1])]),
        coords=("r", "eta", "xi1", "xi2"), periods=(None, None, TWO_PI, TWO_PI),
        bounds=(tuple(r_range), (ETA_MARGIN, np.pi / 2 - ETA_MARGIN), None, None),
        alpha=[0.0] * 4)
    eta0 = 0.6

    def plane(n, m):
        # cone over a Hopf circle (a great circle), i.e. a 2-plane through the origin
        comps = ("exp(u)", eta0, "v", "v")
        return GridImmersion(RectDomain((-0.6, 0.6), (0.0, 1.5), n, m), radial, comps,
                             lam="u", name="plane_through_origin")

    entry = CatalogEntry("hopf_cover", conformal, None, WeylStructure(conformal, provenance="catalog"),
                         {"plane_through_origin": SurfaceRef(plane, {"minimal": True})},
                         {"radial": radial})
    return entry


# -- principal U(1) x U(1) bundle over a flat torus -------------------------

def principal_bundle(F1=1.0, F2=2.0) -> CatalogEntry:
    """Coordinates (t1, t2, x, y), beta_i = dt_i + F_i x dy, g = beta1^2 + beta2^2 + dx^2 + dy^2.

    J maps the beta-dual frame vector b1 -> b2 and d/dx -> d/dy - F1 x d/dt1 - F2 x d/dt2,
    so omega = beta1^beta2 + dx^dy. The Lee form is F1 beta2 - F2 beta1.
    """
    F1, F2 = float(F1), float(F2)
    x = _E("x3")
    b = [ex.mul(F1, x), ex.mul(F2, x)]
    # coframe rows (beta1, beta2, dx, dy) in coordinates (t1, t2, x, y)
    E = np.array([[1.0, 0.0, 0.0, b[0]], [0.0, 1.0, 0.0, b[1]],
                  [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]], dtype=object)
    Einv = np.array([[1.0, 0.0, 0.0, ex.neg(b[0])], [0.0, 1.0, 0.0, ex.neg(b[1])],
                     [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]], dtype=object)
    metric = mat_mul(E.T.copy(), E)
    chart = ChartedManifold4(
        name="principal_bundle", metric=metric, coords=("t1", "t2", "x", "y"),
        periods=(TWO_PI, TWO_PI, None, 1.0), bounds=(None, None, (-3.0, 3.0), None),
        J=frame_J(E, Einv, L_I),
        alpha=[0.5 * F2, -0.5 * F1, 0.0, 0.0],
        sample_box=((0, TWO_PI), (0, TWO_PI), (-1.0, 1.0), (0, 1.0)),
        notes={"F": (F1, F2)})
    H = AlmostHermitianStructure(chart, integrable=None)
    W = WeylStructure(chart, chart.alpha, provenance="catalog")
    Fn = float(np.hypot(F1, F2))

    def fiber_torus(n, m, x0=0.3, y0=0.2):
        return GridImmersion(TorusDomain(n, m, (TWO_PI, TWO_PI)), chart, ("u", "v", x0, y0),
                             name="fiber_torus")

    def swept(n, m):
        # horizontal lift of the base circle x = 0 swept along the fiber direction (-F2, F1)
        comps = (f"{-F2 / Fn}*v", f"{F1 / Fn}*v", 0.0, "u")
        period_v = _sweep_period(F1, F2) * Fn
        return GridImmersion(TorusDomain(n, m, (1.0, period_v)), chart, comps, name="swept_torus")

    surfaces = {
        "fiber_torus": SurfaceRef(fiber_torus, {"J_holomorphic": True}),
        "swept_torus": SurfaceRef(swept, {"weyl_minimal": True, "minimal": True, "lagrangian": True}),
    }
    return CatalogEntry("principal_bundle", chart, H, W, surfaces,
                        {"lee_form": "F1 beta2 - F2 beta1", "F": (F1, F2)})


def _sweep_period(F1, F2, max_q=64):
    """Smallest T > 0 with T(-F2, F1) in (2 pi Z)^2, for F2/F1 rational with small denominator."""
    from fractions import Fraction

    if F1 == 0 or F2 == 0:
        return TWO_PI / max(abs(F1), abs(F2))
    q = Fraction(F2 / F1).limit_denominator(max_q)
    if abs(float(q) - F2 / F1) > 1e-12:
        raise ValueError("F2/F1 must be rational for a closed swept torus")
    return TWO_PI * q.denominator / abs(F1)


CATALOG = {
    "flat_kahler": flat_kahler,
    "twisted_flat": twisted_flat,
    "hopf_surface": hopf_surface,
    "twisted_hopf": twisted_hopf,
    "hopf_cover": hopf_cover,
    "principal_bundle": principal_bundle,
}

HERMITIAN_ENTRIES = ("flat_kahler", "twisted_flat", "hopf_surface", "twisted_hopf", "principal_bundle")


def get_entry(name, **params) -> CatalogEntry:
    try:
        builder = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {sorted(CATALOG)}") from None
    return builder(**params)
