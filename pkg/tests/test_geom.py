import numpy as np
import pytest

from weylgeo import geom
from weylgeo.catalog import get_entry
from weylgeo.geom import ChartedManifold4, NonSPDMetricError, PAIRS


def random_spd(rng, n=None):
    shape = () if n is None else (n,)
    A = rng.normal(size=shape + (4, 4))
    return A @ np.swapaxes(A, -1, -2) + 0.5 * np.eye(4)


def flat_chart():
    return ChartedManifold4("flat", geom.flat_metric_exprs())


def e(i, j):
    v = np.zeros(6)
    v[PAIRS.index((i, j))] = 1.0
    return v


def test_flat_metric_at():
    g, ginv, vol = geom.metric_at(flat_chart(), [0.1, 0.2, 0.3, 0.4])
    assert np.array_equal(g, np.eye(4)) and np.array_equal(ginv, np.eye(4)) and vol == 1.0


def test_hopf_metric_at_quarter_pi():
    chart = get_entry("hopf_surface", radius=1.0).chart
    g, ginv, vol = geom.metric_at(chart, [0.3, np.pi / 4, 1.0, 2.0])
    assert np.allclose(g, np.diag([1, 1, 0.5, 0.5]), atol=1e-15)
    assert vol == pytest.approx(0.5)


def test_degenerate_metric_rejected():
    M = ChartedManifold4("degenerate", [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]])
    with pytest.raises(NonSPDMetricError):
        geom.metric_at(M, [0, 0, 0, 0])
    M = ChartedManifold4("indefinite", [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, "x1"]])
    with pytest.raises(NonSPDMetricError):
        geom.metric_at(M, [-1.0, 0, 0, 0])


def test_asymmetric_metric_rejected():
    with pytest.raises(ValueError):
        ChartedManifold4("bad", [[1, "x1", 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def test_sharp_flat():
    assert np.array_equal(geom.sharp(np.eye(4), np.array([1.0, 0, 0, 0])), [1, 0, 0, 0])
    chart = get_entry("hopf_surface", radius=1.0).chart
    g = chart.metric_values(np.array([0.0, np.pi / 4, 0.0, 0.0]))
    assert np.allclose(geom.sharp(g, np.array([0, 0, 1.0, 0])), [0, 0, 2, 0], atol=1e-14)


def test_sharp_flat_round_trip(rng):
    g = random_spd(rng, 100)
    beta = rng.normal(size=(100, 4))
    assert np.abs(geom.flat(g, geom.sharp(g, beta)) - beta).max() <= 1e-12


def test_flat_star():
    assert np.allclose(geom.hodge_star2(np.eye(4), 1, e(0, 1)), e(2, 3))
    assert np.allclose(geom.hodge_star2(np.eye(4), -1, e(0, 1)), -e(2, 3))
    assert np.allclose(geom.hodge_star2(np.eye(4), 1, e(0, 2)), -e(1, 3))


def test_star_involution(rng):
    g = random_spd(rng, 100)
    beta = rng.normal(size=(100, 6))
    twice = geom.hodge_star2(g, 1, geom.hodge_star2(g, 1, beta))
    assert np.abs(twice - beta).max() <= 1e-10


def test_star_is_isometry_and_wedge_identity(rng):
    g = random_spd(rng, 50)
    a, b = rng.normal(size=(2, 50, 6))
    # a ^ *b = <a, b> vol
    lhs = geom.wedge22(a, geom.hodge_star2(g, 1, b))
    rhs = geom.two_form_inner(g, a, b) * geom.volume_density(g)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


def test_projectors(rng):
    for g in random_spd(rng, 20):
        Pp = geom.selfdual_projector(g, 1, 1)
        Pm = geom.selfdual_projector(g, 1, -1)
        assert np.abs(Pp @ Pp - Pp).max() <= 1e-10
        assert np.abs(Pm @ Pm - Pm).max() <= 1e-10
        assert np.abs(Pp @ Pm).max() <= 1e-10
        assert np.abs(Pp + Pm - np.eye(6)).max() <= 1e-12


def test_flat_selfdual_basis_spans_standard_forms():
    B = geom.selfdual_basis(np.eye(4))
    std = np.array([e(0, 1) + e(2, 3), e(0, 2) - e(1, 3), e(0, 3) + e(1, 2)]) / np.sqrt(2)
    # same span, orthonormal change of basis
    C = B @ std.T
    assert np.allclose(C @ C.T, np.eye(3), atol=1e-12)
    assert np.allclose(C.T @ B, std, atol=1e-12)


def test_selfdual_basis_properties(rng):
    for g in random_spd(rng, 10):
        for sign in (1, -1):
            B = geom.selfdual_basis(g, 1, sign)
            G = geom.two_form_gram(g)
            assert np.allclose(B @ G @ B.T, np.eye(3), atol=1e-10)
            for b in B:
                assert np.abs(geom.hodge_star2(g, 1, b) - sign * b).max() <= 1e-10
        assert geom.star_eigen_dimensions(g) == (3, 3)


def test_wrap_difference():
    chart = get_entry("hopf_surface").chart
    d = chart.wrap_difference(np.array([6.0, 0.1, -6.0, 3.0]))
    assert np.allclose(d, [6.0 - 2 * np.pi, 0.1, 2 * np.pi - 6.0, 3.0])


def test_chart_bounds():
    chart = get_entry("hopf_surface").chart
    with pytest.raises(geom.ChartDomainError):
        chart.check_points(np.array([0.0, 0.01, 0.0, 0.0]))
    chart.check_points(np.array([0.0, 0.5, 0.0, 0.0]))


def test_tjet_product_rule(rng):
    x = rng.normal(size=(5, 4))
    A = geom.TJet(rng.normal(size=(5, 4, 4)), rng.normal(size=(5, 4, 4, 4)))
    B = geom.TJet(rng.normal(size=(5, 4, 4)), rng.normal(size=(5, 4, 4, 4)))
    C = geom.tein("...ij,...jk->...ik", A, B)
    assert np.allclose(C.val, A.val @ B.val)
    expect = np.einsum("...ijZ,...jk->...ikZ", A.d, B.val) + np.einsum("...ij,...jkZ->...ikZ", A.val, B.d)
    assert np.allclose(C.d, expect)
    g = geom.TJet(random_spd(rng, 5), rng.normal(size=(5, 4, 4, 4)))
    gi = geom.tinv(g)
    prod = geom.tein("...ij,...jk->...ik", g, gi)
    assert np.allclose(prod.val, np.eye(4)) and np.abs(prod.d).max() < 1e-10
