import numpy as np
import pytest

from weylgeo import catalog as cat
from weylgeo.hermitian import kahler_form, lee_form
from weylgeo.surface import conformality_defect, vnorm, weyl_mean_curvature
from weylgeo.twistor import alpha_beta_split
from weylgeo.weyl import WeylStructure, riemann, weyl_connection


def _weyl_minimal(e, f, jet, g):
    HD, _ = weyl_mean_curvature(jet, e.weyl)
    return np.nanmax(vnorm(g, HD))


def _minimal(e, f, jet, g):
    _, Hg = weyl_mean_curvature(jet, WeylStructure(f.chart, [0.0] * 4))
    return np.nanmax(vnorm(g, Hg))


def _J_holomorphic(e, f, jet, g):
    return vnorm(g, alpha_beta_split(jet, e.hermitian).beta_bar).max()


def _lagrangian(e, f, jet, g):
    w = kahler_form(e.hermitian, jet.f)
    return np.abs(np.einsum("...i,...ij,...j->...", jet.fu, w, jet.fv)).max()


CHECKS = {"weyl_minimal": _weyl_minimal, "minimal": _minimal, "J_holomorphic": _J_holomorphic,
          "lagrangian": _lagrangian}
TOL = {"weyl_minimal": 1e-8, "minimal": 1e-6, "J_holomorphic": 1e-9, "lagrangian": 1e-10}
LOOSE = {("principal_bundle", "swept_torus", "weyl_minimal"): 1e-7}

ANNOTATIONS = [(name, sname, prop, value)
               for name, build in cat.CATALOG.items()
               for sname, ref in build().surfaces.items()
               for prop, value in ref.properties.items()]


@pytest.mark.parametrize("name, sname, prop, value", ANNOTATIONS,
                         ids=[f"{a}-{b}-{c}" for a, b, c, _ in ANNOTATIONS])
def test_annotation(name, sname, prop, value, catalog):
    e = catalog[name]
    f = e.surface(sname, 64)
    jet = f.jets()
    g = f.chart.metric_values(jet.f)
    measured = CHECKS[prop](e, f, jet, g)
    if value:
        assert measured <= LOOSE.get((name, sname, prop), TOL[prop])
    else:
        assert measured > 1e-2


@pytest.mark.parametrize("name", list(cat.CATALOG))
def test_reference_surfaces_conformal(name, catalog):
    e = catalog[name]
    for sname in e.surfaces:
        if sname == "anti_complex_probe":
            continue
        f = e.surface(sname, 32)
        jet = f.jets()
        g = f.chart.metric_values(jet.f)
        c = conformality_defect(jet, g)
        assert np.abs(c).max() <= 1e-10, sname


def test_flat_kahler_baseline(catalog, rng):
    e = catalog["flat_kahler"]
    pts = e.chart.random_points(rng, 20)
    assert np.abs(lee_form(e.hermitian, pts)).max() == 0.0
    assert np.abs(weyl_connection(e.weyl, pts)).max() == 0.0


def test_hopf_notes(catalog, rng):
    e = catalog["hopf_surface"]
    pts = e.chart.random_points(rng, 100)
    assert np.abs(lee_form(e.hermitian, pts) - [1, 0, 0, 0]).max() <= 1e-8
    assert e.chart.coords == ("phi", "eta", "xi1", "xi2")


def test_hopf_eta_range(catalog):
    e = catalog["hopf_surface"]
    from weylgeo.geom import ChartDomainError, metric_at

    with pytest.raises(ChartDomainError):
        metric_at(e.chart, [0.0, 1.6, 0.0, 0.0])


def test_cover_presentations_agree(catalog, rng):
    e = catalog["hopf_cover"]
    radial = e.notes["radial"]
    pts = e.chart.random_points(rng, 100)
    r = np.exp(pts[:, 0])
    rpts = pts.copy()
    rpts[:, 0] = r
    # pull back dr^2 + r^2 g_S3 along r = e^phi: dr = r dphi
    Jac = np.tile(np.eye(4), (100, 1, 1))
    Jac[:, 0, 0] = r
    pulled = np.swapaxes(Jac, 1, 2) @ radial.metric_values(rpts) @ Jac
    assert np.abs(pulled - e.chart.metric_values(pts)).max() <= 1e-10


def test_cover_flat_and_planes_minimal(catalog, rng):
    e = catalog["hopf_cover"]
    radial = e.notes["radial"]
    pts = radial.random_points(rng, 100)
    assert np.abs(riemann(radial, pts)).max() <= 1e-8
    # e^{2 phi}(dphi^2 + g_S3) is the same flat metric
    assert np.abs(riemann(e.chart, e.chart.random_points(rng, 20))).max() <= 1e-8
    f = e.surface("plane_through_origin", 32)
    jet = f.jets()
    _, Hg = weyl_mean_curvature(jet, WeylStructure(radial, [0.0] * 4))
    assert vnorm(radial.metric_values(jet.f), Hg).max() <= 1e-10


def test_principal_bundle_sweep_period():
    assert cat._sweep_period(1.0, 2.0) == pytest.approx(2 * np.pi)
    assert cat._sweep_period(2.0, 3.0) == pytest.approx(np.pi * 2)
    with pytest.raises(ValueError):
        cat._sweep_period(1.0, np.sqrt(2))


def test_get_entry_unknown():
    with pytest.raises(KeyError):
        cat.get_entry("nope")
    e = cat.get_entry("principal_bundle", F1=2.0, F2=-1.0)
    assert e.notes["F"] == (2.0, -1.0)
