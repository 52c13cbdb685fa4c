"""Levi-Civita and Weyl connections, curvature and gauge changes.

Connection coefficients are arrays ``G[..., k, i, j] = Gamma^k_{ij}`` so
that ``(nabla_X Y)^k = X^i d_i Y^k + Gamma^k_{ij} X^i Y^j``. Curvature uses
``R[..., l, i, j, k] = R^l_{ijk}`` with ``R(d_i, d_j) d_k = R^l_{ijk} d_l``.

A Weyl structure is a metric representative together with its gauge
one-form ``alpha``; the Weyl connection is

    nabla^D_X Y = nabla^g_X Y + alpha(X) Y + alpha(Y) X - g(X, Y) alpha^#

and satisfies ``nabla^D g = -2 alpha (x) g``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import expr as ex
from .geom import ChartedManifold4, TJet, check_spd, field_jets, tein, tinv

EYE4 = np.eye(4)


def _christoffel_from(ginv, dg):
    # dg[..., i, j, k] = d_k g_ij
    first = 0.5 * (np.swapaxes(dg, -1, -2) + dg - np.moveaxis(dg, -1, -3))
    # first[..., l, i, j] = (d_i g_lj + d_j g_li - d_l g_ij) / 2
    return np.einsum("...kl,...lij->...kij", ginv, first)


def _christoffel_from_tjet(g: TJet, dg: TJet):
    ginv = tinv(g)
    # index layout of dg.val: [..., i, j, k] = d_k g_ij
    t1 = tein("...lji->...lij", dg)  # d_i g_lj
    t3 = tein("...ijl->...lij", dg)  # d_l g_ij
    first = (t1 + dg - t3).scale(0.5)
    return ginv, tein("...kl,...lij->...kij", ginv, first)


def levi_civita(M: ChartedManifold4, points):
    """Christoffel symbols of the chart metric at ``points`` (..., 4)."""
    g, dg, _ = M.metric_fields(points, 1)
    check_spd(g)
    return _christoffel_from(np.linalg.inv(g), dg)


def levi_civita_tjet(M: ChartedManifold4, points):
    """Christoffel symbols with their coordinate derivatives (AD second order)."""
    g, dg, d2g = M.metric_fields(points, 2)
    check_spd(g)
    return _christoffel_from_tjet(TJet(g, dg), TJet(dg, d2g))


@dataclass
class WeylStructure:
    """Gauge-fixed Weyl structure: chart metric plus gauge one-form.

    ``alpha`` is either an array of four expressions or a callable
    ``points -> TJet`` (used for structures derived from an almost-complex
    structure, whose gauge form is only available numerically).
    """

    chart: ChartedManifold4
    alpha: object = None
    provenance: str = "user-supplied"

    def __post_init__(self):
        if self.alpha is None:
            self.alpha = self.chart.alpha if self.chart.alpha is not None else [0.0] * 4
        if not callable(self.alpha):
            self.alpha = np.array([ex.as_expr(a) for a in self.alpha], dtype=object)

    @property
    def expression_backed(self):
        return not callable(self.alpha)

    def alpha_tjet(self, points) -> TJet:
        if callable(self.alpha):
            return self.alpha(points)
        val, d1, _ = field_jets(self.alpha, points, 1)
        return TJet(val, d1)

    def alpha_values(self, points):
        if callable(self.alpha):
            return self.alpha(points).val
        return field_jets(self.alpha, points, 0)[0]

    def metric(self, points):
        return self.chart.metric_values(points)


def _weyl_terms(alpha, g, ginv):
    """alpha_i delta^k_j + alpha_j delta^k_i - g_ij alpha^k, works on TJet or arrays."""
    if isinstance(alpha, TJet):
        a_up = tein("...kl,...l->...k", ginv, alpha)
        t1 = tein("...i,kj->...kij", alpha, EYE4)
        t2 = tein("...j,ki->...kij", alpha, EYE4)
        t3 = tein("...ij,...k->...kij", g, a_up)
        return t1 + t2 - t3
    a_up = np.einsum("...kl,...l->...k", ginv, alpha)
    return (np.einsum("...i,kj->...kij", alpha, EYE4) + np.einsum("...j,ki->...kij", alpha, EYE4)
            - np.einsum("...ij,...k->...kij", g, a_up))


def weyl_connection(W: WeylStructure, points):
    """Connection coefficients of nabla^D at ``points``."""
    g, dg, _ = W.chart.metric_fields(points, 1)
    check_spd(g)
    ginv = np.linalg.inv(g)
    gamma = _christoffel_from(ginv, dg)
    return gamma + _weyl_terms(W.alpha_values(points), g, ginv)


def weyl_connection_tjet(W: WeylStructure, points) -> TJet:
    g, dg, d2g = W.chart.metric_fields(points, 2)
    check_spd(g)
    gj = TJet(g, dg)
    ginv, gamma = _christoffel_from_tjet(gj, TJet(dg, d2g))
    return gamma + _weyl_terms(W.alpha_tjet(points), gj, ginv)


def curvature_from(gamma: TJet):
    """R^l_{ijk} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk} - G^l_{jm} G^m_{ik}."""
    dG = gamma.d  # [..., l, j, k, i] = d_i G^l_{jk}
    G = gamma.val
    term = np.einsum("...ljki->...lijk", dG)
    quad = np.einsum("...lim,...mjk->...lijk", G, G)
    return term - np.swapaxes(term, -3, -2) + quad - np.swapaxes(quad, -3, -2)


def riemann(structure, points):
    """Curvature tensor of the Levi-Civita connection (chart) or of nabla^D (Weyl structure)."""
    if isinstance(structure, WeylStructure):
        gamma = weyl_connection_tjet(structure, points)
    else:
        gamma = levi_civita_tjet(structure, points)[1]
    return curvature_from(gamma)


def nabla_metric(W: WeylStructure, points):
    """(nabla^D_k g)_ij at ``points`` as [..., k, i, j]."""
    g, dg, _ = W.chart.metric_fields(points, 1)
    G = weyl_connection(W, points)
    dgk = np.moveaxis(dg, -1, -3)
    return dgk - np.einsum("...mki,...mj->...kij", G, g) - np.einsum("...mkj,...im->...kij", G, g)


def metricity_defect(W: WeylStructure, points):
    """nabla^D g + 2 alpha (x) g; zero for a Weyl connection."""
    g = W.chart.metric_values(points)
    a = W.alpha_values(points)
    return nabla_metric(W, points) + 2.0 * np.einsum("...k,...ij->...kij", a, g)


def gauge_transform(W: WeylStructure, u) -> WeylStructure:
    """Change of length scale: returns (e^{2u} g, alpha - du)."""
    u = ex.as_expr(u)
    M = W.chart
    factor = ex.call("exp", ex.mul(2.0, u))
    metric = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            metric[i, j] = ex.mul(factor, M.metric[i, j])
    du = np.array([ex.diff(u, name) for name in ex.CHART_VARS], dtype=object)
    J = M.J
    chart = ChartedManifold4(
        name=f"{M.name}|gauge", metric=metric, coords=M.coords, periods=M.periods,
        bounds=M.bounds, alpha=None, J=J, orientation=M.orientation,
        sample_box=M.sample_box)
    if W.expression_backed:
        alpha = [ex.sub(W.alpha[i], du[i]) for i in range(4)]
        out = WeylStructure(chart, alpha, W.provenance)
        chart.alpha = out.alpha
        return out

    def provider(points, _old=W.alpha_tjet, _du=du):
        val, d1, _ = field_jets(_du, points, 1)
        return _old(points) - TJet(val, d1)

    return WeylStructure(chart, provider, W.provenance)


def covariant_derivative_along(W: WeylStructure, point, velocity, field, field_derivative):
    """nabla^D_X V = dV/dt + Gamma(X, V) for a field V along a curve or map.

    ``velocity`` is the image X of the domain direction, ``field`` the field
    values and ``field_derivative`` their ordinary derivative in that
    direction. Complex inputs are accepted (connection is real-linear).
    """
    point = np.asarray(point, dtype=float)
    velocity = np.asarray(velocity)
    field = np.asarray(field)
    if velocity.shape[-1] != 4 or field.shape[-1] != 4 or np.shape(field_derivative)[-1] != 4:
        raise ValueError("dimension mismatch: vectors must have 4 chart components")
    G = weyl_connection(W, point)
    return np.asarray(field_derivative) + np.einsum("...kij,...i,...j->...k", G, velocity, field)


def parallel_transport(W: WeylStructure, path: Callable, velocity: Callable, v0, t0, t1, steps=200):
    """Transport ``v0`` along ``path(t)`` by RK4 on dV/dt = -Gamma(path', V)."""
    v = np.asarray(v0, dtype=float)
    h = (t1 - t0) / steps

    def rhs(t, v):
        G = weyl_connection(W, path(t))
        return -np.einsum("kij,i,j->k", G, velocity(t), v)

    t = t0
    for _ in range(steps):
        k1 = rhs(t, v)
        k2 = rhs(t + h / 2, v + h / 2 * k1)
        k3 = rhs(t + h / 2, v + h / 2 * k2)
        k4 = rhs(t + h, v + h * k3)
        v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return v


def damped_quadratic_gauge(rng, scale=0.3):
    """Random degree-2 polynomial damped by exp(-|x|^2/4), as an expression."""
    xs = [ex.Var(n) for n in ex.CHART_VARS]
    poly = ex.Num(float(rng.normal() * scale))
    for i in range(4):
        poly = ex.add(poly, ex.mul(float(rng.normal() * scale), xs[i]))
        for j in range(i, 4):
            poly = ex.add(poly, ex.mul(float(rng.normal() * scale), ex.mul(xs[i], xs[j])))
    r2 = xs[0] * xs[0]
    for x in xs[1:]:
        r2 = ex.add(r2, ex.mul(x, x))
    return ex.mul(poly, ex.call("exp", ex.mul(-0.25, r2)))
