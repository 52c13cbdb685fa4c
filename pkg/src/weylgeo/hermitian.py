"""Almost-Hermitian structures: Kahler form, Lee form, Nijenhuis tensor, nabla J.

Index conventions follow :mod:`weylgeo.geom`: ``J[..., i, j] = J^i_j``,
``omega_ij = g(J d_i, d_j) = J^k_i g_kj``. Three-forms are full antisymmetric
arrays with ``(d omega)_ijk = d_i omega_jk + d_j omega_ki + d_k omega_ij``
and ``(theta ^ omega)_ijk = theta_i omega_jk + theta_j omega_ki + theta_k omega_ij``,
so ``d omega(X, Y, Z) = (d omega)_ijk X^i Y^j Z^k``.

The Lee form is ``theta = J delta omega`` with the divergence
``(delta omega)_j = -g^{ik} (nabla_i omega)_kj`` and ``(J beta)_j = -beta_i J^i_j``.
The canonical Weyl structure has gauge form ``alpha = -theta/2``.

Gauge law: keeping J fixed and rescaling ``g -> e^{2u} g`` gives
``omega -> e^{2u} omega`` and ``d(e^{2u} omega) = (theta + 2 du) ^ e^{2u} omega``,
so ``theta -> theta + 2 du`` and ``alpha -> alpha - du`` as for any Weyl structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geom import ChartedManifold4, TJet, check_spd, tein, tinv
from .weyl import WeylStructure, _christoffel_from, _christoffel_from_tjet, weyl_connection

COMPAT_TOL = 1e-8
# independent components of a 3-form in 4 dimensions
TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


class IncompatibleStructureError(ValueError):
    """J is not an almost-complex structure orthogonal for g."""

    def __init__(self, j2_defect, orth_defect):
        self.j2_defect = float(j2_defect)
        self.orth_defect = float(orth_defect)
        super().__init__(
            f"J incompatible with metric: max|J^2+I| = {self.j2_defect:.3e}, "
            f"max|g(J.,J.)-g| = {self.orth_defect:.3e}")


def compatibility_defects(g, J):
    I = np.eye(4)
    j2 = np.abs(J @ J + I).max()
    orth = np.abs(np.swapaxes(J, -1, -2) @ g @ J - g).max()
    return j2, orth


@dataclass
class AlmostHermitianStructure:
    """A chart with metric and almost-complex structure ``J`` (expression array)."""

    chart: ChartedManifold4
    name: str = ""
    integrable: bool | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.chart.J is None:
            raise ValueError(f"chart {self.chart.name!r} carries no almost-complex structure")
        if not self.name:
            self.name = self.chart.name

    def fields(self, points, order=2):
        """Metric and J with derivatives up to ``order`` (AD)."""
        g = self.chart.metric_fields(points, order)
        J = self.chart.J_fields(points, order)
        return g, J

    def check(self, points, tol=COMPAT_TOL):
        g = self.chart.metric_values(points)
        J = self.chart.J_fields(points, 0)[0]
        j2, orth = compatibility_defects(g, J)
        if j2 > tol or orth > tol:
            raise IncompatibleStructureError(j2, orth)
        return j2, orth

    def J_values(self, points):
        return self.chart.J_fields(points, 0)[0]


def kahler_form(H: AlmostHermitianStructure, points):
    """omega_ij = g(J d_i, d_j) at ``points``; raises on incompatible J."""
    H.check(points)
    g = H.chart.metric_values(points)
    J = H.J_values(points)
    return np.einsum("...ki,...kj->...ij", J, g)


def _omega_jets(H: AlmostHermitianStructure, points):
    """omega as TJet(val, d) and d omega as TJet(d, d2), d on trailing axes."""
    (g, dg, d2g), (J, dJ, d2J) = H.fields(points, 2)
    gt, Jt = TJet(g, dg), TJet(J, dJ)
    gd, Jd = TJet(dg, d2g), TJet(dJ, d2J)
    omega = tein("...ki,...kj->...ij", Jt, gt)
    domega = tein("...mik,...mj->...ijk", Jd, gt) + tein("...mi,...mjk->...ijk", Jt, gd)
    return gt, gd, Jt, omega, domega


def exterior_d2(domega):
    """(d omega)_ijk from partials ``domega[..., i, j, k] = d_k omega_ij``."""
    a = np.einsum("...jki->...ijk", domega)
    return a + np.einsum("...ijk->...jki", a) + np.einsum("...ijk->...kij", a)


def wedge12(theta, omega):
    t = np.einsum("...i,...jk->...ijk", theta, omega)
    return t + np.einsum("...ijk->...jki", t) + np.einsum("...ijk->...kij", t)


def lee_form_tjet(H: AlmostHermitianStructure, points) -> TJet:
    """Lee form with its coordinate derivatives (divergence formula, AD)."""
    points = np.asarray(points, dtype=float)
    gt, gd, Jt, omega, domega = _omega_jets(H, points)
    check_spd(gt.val)
    ginv, gamma = _christoffel_from_tjet(gt, gd)
    # (nabla_k omega)_ij at [i, j, k]
    nab = (domega - tein("...mki,...mj->...ijk", gamma, omega)
           - tein("...mkj,...im->...ijk", gamma, omega))
    delta = tein("...ik,...kji->...j", ginv, nab).scale(-1.0)
    return tein("...i,...ij->...j", delta, Jt).scale(-1.0)


def lee_form(H: AlmostHermitianStructure, points):
    """Lee form theta = J delta omega at ``points``."""
    H.check(points)
    return lee_form_tjet(H, points).val


def d_omega(H: AlmostHermitianStructure, points):
    """Exterior derivative of the Kahler form as a full 3-form array."""
    _, _, _, _, domega = _omega_jets(H, points)
    return exterior_d2(domega.val)


def lee_form_coframe_oracle(H: AlmostHermitianStructure, points):
    """Independent Lee form: solve d omega = theta ^ omega for theta pointwise.

    Wedging with a nondegenerate 2-form is an isomorphism from one-forms to
    three-forms in dimension four, so the 4x4 system is square.
    """
    points = np.asarray(points, dtype=float)
    omega = kahler_form(H, points)
    dw = d_omega(H, points)
    E = np.eye(4)
    cols = [wedge12(np.broadcast_to(E[m], omega.shape[:-1]), omega) for m in range(4)]
    A = np.stack([np.stack([c[..., i, j, k] for (i, j, k) in TRIPLES], -1) for c in cols], -1)
    b = np.stack([dw[..., i, j, k] for (i, j, k) in TRIPLES], -1)
    return np.linalg.solve(A, b[..., None])[..., 0]


def lee_identity_residual(H: AlmostHermitianStructure, points):
    """max |theta ^ omega - d omega| per point."""
    theta = lee_form(H, points)
    r = wedge12(theta, kahler_form(H, points)) - d_omega(H, points)
    return np.abs(r).reshape(r.shape[:-3] + (-1,)).max(-1)


def canonical_weyl(H: AlmostHermitianStructure) -> WeylStructure:
    """Weyl structure with alpha = -theta/2 (gauge form derived from J)."""

    def provider(points, _H=H):
        return lee_form_tjet(_H, points).scale(-0.5)

    return WeylStructure(H.chart, provider, provenance="derived-from-J")


def d_D_omega_residual(H: AlmostHermitianStructure, W: WeylStructure, points):
    """Gauge-fixed d^D omega_c = 2 alpha ^ omega + d omega (zero for the canonical alpha)."""
    omega = kahler_form(H, points)
    a = W.alpha_values(points)
    r = 2.0 * wedge12(a, omega) + d_omega(H, points)
    return np.abs(r).reshape(r.shape[:-3] + (-1,)).max(-1)


def nijenhuis(H: AlmostHermitianStructure, points, X, Y):
    """N(X,Y) = [X,Y] + J[JX,Y] + J[X,JY] - [JX,JY] for constant-coefficient X, Y."""
    J, dJ, _ = H.chart.J_fields(points, 1)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    JX = np.einsum("...ij,...j->...i", J, X)
    JY = np.einsum("...ij,...j->...i", J, Y)

    def dJ_along(V, W_):
        # (V . d J) W: V^i d_i J^k_m W^m
        return np.einsum("...kmi,...i,...m->...k", dJ, V, W_)

    br_JX_Y = -dJ_along(Y, X)
    br_X_JY = dJ_along(X, Y)
    br_JX_JY = dJ_along(JX, Y) - dJ_along(JY, X)
    return (np.einsum("...ij,...j->...i", J, br_JX_Y + br_X_JY) - br_JX_JY)


def nabla_J_from(G, J, dJ, Z):
    """(nabla_Z J)^k_j for connection coefficients ``G``."""
    t = dJ + np.einsum("...kim,...mj->...kji", G, J) - np.einsum("...km,...mij->...kji", J, G)
    return np.einsum("...kji,...i->...kj", t, Z)


def nabla_J(W: WeylStructure | None, H: AlmostHermitianStructure, points, Z):
    """(nabla^D_Z J) as an endomorphism; ``W=None`` uses the Levi-Civita connection."""
    J, dJ, _ = H.chart.J_fields(points, 1)
    if W is None:
        g, dg, _ = H.chart.metric_fields(points, 1)
        G = _christoffel_from(np.linalg.inv(g), dg)
    else:
        G = weyl_connection(W, points)
    return nabla_J_from(G, J, dJ, np.asarray(Z, dtype=float))


def _form3(w, X, Y, Z):
    return np.einsum("...ijk,...i,...j,...k->...", w, X, Y, Z)


def verify_identity_dwJN(H: AlmostHermitianStructure, points, X, Y, Z):
    """<N(X,Y),JZ> - [d omega(X,Y,Z) - d omega(JX,JY,Z) - 2<(nabla^g_Z J)X, Y>]."""
    g = H.chart.metric_values(points)
    J = H.J_values(points)
    X, Y, Z = (np.broadcast_to(np.asarray(v, dtype=float), g.shape[:-1]) for v in (X, Y, Z))
    jv = lambda v: np.einsum("...ij,...j->...i", J, v)  # noqa: E731
    ip = lambda a, b: np.einsum("...i,...ij,...j->...", a, g, b)  # noqa: E731
    lhs = ip(nijenhuis(H, points, X, Y), jv(Z))
    dw = d_omega(H, points)
    nJ = nabla_J(None, H, points, Z)
    rhs = _form3(dw, X, Y, Z) - _form3(dw, jv(X), jv(Y), Z) - 2.0 * ip(np.einsum("...ij,...j->...i", nJ, X), Y)
    return lhs - rhs


def verify_identity_weylJN(H: AlmostHermitianStructure, points, X, Y, Z, W: WeylStructure | None = None):
    """c(N(X,Y), JZ) + 2 c((nabla^D_Z J)X, Y) with D canonical unless ``W`` is given."""
    W = canonical_weyl(H) if W is None else W
    g = H.chart.metric_values(points)
    J = H.J_values(points)
    X, Y, Z = (np.broadcast_to(np.asarray(v, dtype=float), g.shape[:-1]) for v in (X, Y, Z))
    ip = lambda a, b: np.einsum("...i,...ij,...j->...", a, g, b)  # noqa: E731
    lhs = ip(nijenhuis(H, points, X, Y), np.einsum("...ij,...j->...i", J, Z))
    nJ = nabla_J(W, H, points, Z)
    return lhs + 2.0 * ip(np.einsum("...ij,...j->...i", nJ, X), Y)


def identity_vectors(rng, n_random=20):
    """Coordinate frame plus random unit vectors, as used by the identity suites."""
    R = rng.normal(size=(n_random, 4))
    R /= np.linalg.norm(R, axis=1, keepdims=True)
    return np.concatenate([np.eye(4), R])
