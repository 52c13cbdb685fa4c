"""The ten acceptance criteria, each with its tolerance and wall-clock budget.

Every test prints one PASS/FAIL line; the lines are repeated in the terminal
summary under "acceptance criteria".
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from weylgeo import hermitian as hm
from weylgeo import twistor as tw
from weylgeo import weyl
from weylgeo.catalog import CATALOG, HERMITIAN_ENTRIES, get_entry
from weylgeo.flow import phase_align, run_flow
from weylgeo.surface import (GridImmersion, TorusDomain, tension, tension_complex, vnorm,
                             weyl_mean_curvature)
from weylgeo.weyl import WeylStructure


@contextmanager
def criterion(log, number, title, budget):
    status, start = "FAIL", time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"runtime {elapsed:.1f} s exceeds {budget} s"
        status = "PASS"
    finally:
        line = f"criterion {number:2d}: {status}  {title}  [{time.perf_counter() - start:.1f} s]"
        log.append(line)
        print(line)


@pytest.fixture(scope="module")
def entries():
    return {name: build() for name, build in CATALOG.items()}


def test_c01_metricity(entries, rng, acceptance_log):
    with criterion(acceptance_log, 1, "Weyl metricity on every chart <= 1e-8", 5):
        for name, e in entries.items():
            if e.weyl is None:
                continue
            pts = e.chart.random_points(rng, 100)
            assert np.abs(weyl.metricity_defect(e.weyl, pts)).max() <= 1e-8, name


def test_c02_gauge_invariance(entries, rng, acceptance_log):
    with criterion(acceptance_log, 2, "Weyl Christoffels gauge invariant under 20 transforms <= 1e-8", 10):
        for name, e in entries.items():
            if e.weyl is None:
                continue
            pts = e.chart.random_points(rng, 100)
            ref = weyl.weyl_connection(e.weyl, pts)
            for _ in range(20):
                W2 = weyl.gauge_transform(e.weyl, weyl.damped_quadratic_gauge(rng))
                assert np.abs(weyl.weyl_connection(W2, pts) - ref).max() <= 1e-8, name


def test_c03_lee_forms(entries, rng, acceptance_log):
    with criterion(acceptance_log, 3, "Lee forms of the Hopf and principal-bundle structures <= 1e-8", 5):
        e = entries["hopf_surface"]
        pts = e.chart.random_points(rng, 100)
        assert np.abs(hm.lee_form(e.hermitian, pts) - [1.0, 0.0, 0.0, 0.0]).max() <= 1e-8
        e = entries["principal_bundle"]
        F1, F2 = e.notes["F"]
        pts = e.chart.random_points(rng, 100)
        x, one, zero = pts[:, 2], np.ones(100), np.zeros(100)
        beta1 = np.stack([one, zero, zero, F1 * x], -1)
        beta2 = np.stack([zero, one, zero, F2 * x], -1)
        assert np.abs(hm.lee_form(e.hermitian, pts) - (F1 * beta2 - F2 * beta1)).max() <= 1e-8


def test_c04_identity_suite(entries, rng, acceptance_log):
    with criterion(acceptance_log, 4, "dw/J/N and Weyl J/N identities on almost-Hermitian entries <= 1e-7", 10):
        for name in HERMITIAN_ENTRIES:
            H = entries[name].hermitian
            pts = H.chart.random_points(rng, 100)
            X, Y, Z = rng.normal(size=(3, 100, 4))
            assert np.abs(hm.verify_identity_dwJN(H, pts, X, Y, Z)).max() <= 1e-7, name
            assert np.abs(hm.verify_identity_weylJN(H, pts, X, Y, Z)).max() <= 1e-7, name


def _max_norm(f, W, which):
    jet = f.jets()
    g = f.chart.metric_values(jet.f)
    HD, Hg = weyl_mean_curvature(jet, W)
    return float(np.nanmax(vnorm(g, HD if which == "D" else Hg)))


def test_c05_weyl_minimal_surfaces(entries, acceptance_log):
    with criterion(acceptance_log, 5, "Weyl-minimal surfaces and the great-sphere control on 64^2", 30):
        hopf, pb = entries["hopf_surface"], entries["principal_bundle"]
        assert _max_norm(hopf.surface("fiber_torus", 64), hopf.weyl, "D") <= 1e-8
        assert _max_norm(hopf.surface("clifford_torus", 64), hopf.weyl, "D") <= 1e-8
        assert _max_norm(pb.surface("swept_torus", 64), pb.weyl, "D") <= 1e-7
        sphere = hopf.surface("great_sphere", 64)
        assert _max_norm(sphere, hopf.weyl, "g") <= 1e-6
        jet = sphere.jets()
        HD = vnorm(sphere.chart.metric_values(jet.f), weyl_mean_curvature(jet, hopf.weyl)[0])
        assert np.nanmax(np.abs(HD - 0.5)) <= 1e-3


def test_c06_flat_cover(entries, rng, acceptance_log):
    with criterion(acceptance_log, 6, "dr^2 + r^2 g_S3 is flat <= 1e-8", 5):
        radial = entries["hopf_cover"].notes["radial"]
        pts = radial.random_points(rng, 100)
        assert np.abs(weyl.riemann(radial, pts)).max() <= 1e-8


def test_c07_tension(entries, acceptance_log):
    with criterion(acceptance_log, 7, "real/complex tension agree <= 1e-9, conformal covariance <= 1e-12", 10):
        cases = [("hopf_surface", "clifford_torus"), ("hopf_surface", "great_sphere"),
                 ("principal_bundle", "swept_torus"), ("flat_kahler", "anti_complex_probe")]
        for entry, name in cases:
            e = entries[entry]
            jet = e.surface(name, 32).jets()
            a, b = tension(jet, e.weyl), tension_complex(jet, e.weyl)
            assert np.nanmax(np.abs(a - b.real)) <= 1e-9, name
            assert np.nanmax(np.abs(b.imag)) <= 1e-9, name
        hopf = entries["hopf_surface"]
        f = hopf.surface("clifford_torus", 32)
        f = f.with_samples(f.samples + 0.05 * np.sin(f.uv()[..., :1]) * [0, 1, 0, 0])
        jet = f.jets()
        u = 0.3 * np.sin(f.uv()[..., 0]) * np.cos(f.uv()[..., 1])
        t0 = tension(jet, hopf.weyl, jet.lam)
        t1 = tension(jet, hopf.weyl, jet.lam + u)
        assert np.abs(t1 - np.exp(-2 * u)[..., None] * t0).max() <= 1e-12


def _weyl_harmonic_surfaces(entries):
    for name, e in entries.items():
        for sname, ref in e.surfaces.items():
            if ref.properties.get("weyl_minimal") and e.hermitian is not None:
                yield e, sname


def test_c08_twistor_correspondence(entries, acceptance_log):
    with criterion(acceptance_log, 8, "twistor lifts holomorphic <= 1e-7; great sphere >= 1e-2", 30):
        seen = []
        for e, sname in _weyl_harmonic_surfaces(entries):
            f = e.surface(sname, 64)
            for sign in (1, -1):
                assert np.nanmax(tw.holomorphicity_residual(f, e.weyl, sign)) <= 1e-7, (e.name, sname, sign)
            seen.append(sname)
        assert len(seen) >= 4
        hopf = entries["hopf_surface"]
        sphere = hopf.surface("great_sphere", 64)
        for sign in (1, -1):
            assert np.nanmin(tw.holomorphicity_residual(sphere, hopf.weyl, sign)) >= 1e-2


def _webster_checks(f_of, H, W, expect, label):
    """Problems found on one surface at 64^2 and 128^2 (empty if all hold)."""
    problems, c1s = [], []
    for n in (64, 128):
        f = f_of(n)
        rep = tw.webster_report(f, H, W)
        chern = tw.chern_number(f, H, W, "T10")
        c1s.append(chern.value)
        got = (rep.P, rep.Q, rep.R)
        if got != expect:
            problems.append(f"{label} {n}^2: (P, Q, R) = {got}, expected {expect}")
        if rep.web1_residual != 0:
            problems.append(f"{label} {n}^2: web1 residual {rep.web1_residual}")
        if chern.defect > 0.05:
            problems.append(f"{label} {n}^2: integrality defect {chern.defect:.3g}")
        if rep.web2_sign_supported in (None, "neither"):
            problems.append(f"{label} {n}^2: winding c1 disagrees with curvature c1 ({rep.web2_sign_supported})")
    if c1s[0] != c1s[1]:
        problems.append(f"{label}: c1 changed under refinement {c1s}")
    return problems


def test_c09_webster(acceptance_log):
    with criterion(acceptance_log, 9, "Webster identities on the Lagrangian torus and the Q=1 surface", 60):
        e = get_entry("flat_kahler")
        problems = _webster_checks(lambda n: e.surface("lagrangian_torus", n), e.hermitian, e.weyl,
                                   (0, 0, 0), "lagrangian torus")
        problems += _webster_checks(lambda n: e.surface("anti_complex_probe", n), e.hermitian, e.weyl,
                                    (0, 1, 0), "constructed surface")
        assert not problems, "; ".join(problems)


def test_c10_flow(acceptance_log):
    with criterion(acceptance_log, 10, "perturbed Clifford torus flows back (32^2, RK4)", 120):
        hopf = get_entry("hopf_surface")
        ref = hopf.surface("clifford_torus", 32)
        comps = ("u", "pi/4 + 0.05*sin(u)", "0.5*v", "-0.5*v")
        f = GridImmersion(TorusDomain(32, 32, ref.domain.periods), hopf.chart, comps, name="perturbed")
        result = run_flow(f, hopf.weyl, max_steps=10_000, tol=1e-4, method="rk4", monotone=True)
        assert result.status == "converged" and result.state.step <= 10_000
        l2 = np.array([row[3] for row in result.log])
        assert np.all(np.diff(l2) <= 1e-10 * l2[0])
        dist, _ = phase_align(result.state.samples, ref)
        assert dist <= 1e-3
