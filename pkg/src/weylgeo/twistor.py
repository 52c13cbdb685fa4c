"""Twistor lifts, holomorphicity residuals, the alpha / beta-bar split and index bookkeeping.

For an immersion point with orthonormal tangent frame (e1, e2) (e1 along f_u)
and oriented normal frame (n1, n2), the two orthogonal complex structures are

    J_+ : e1 -> e2, n1 -> n2        J_- : e1 -> e2, n1 -> -n2

and the lifts are sigma_pm = g(J_pm ., .) = (1 pm *)(e^1 ^ e^2), with |sigma|^2 = 2.

Chern numbers are computed by integrating the trace of the curvature of the
compressed connection Pi nabla^D Pi on the pulled-back subbundle Pi(C^4); for
Pi = (I - iJ)/2 this is the connection nabla^{D,J} = nabla^D - J(nabla^D J)/2.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .geom import hodge_matrix, to_matrix, to_vec6, two_form_gram
from .hermitian import AlmostHermitianStructure
from .surface import (D1, OFFSETS, GridImmersion, SurfaceJet, _gamma, bilinear, conformality_defect,
                      dbar_fz, flag_zeros, hermitian, local_winding, ring, tangent_frame, vnorm)
from .weyl import WeylStructure, curvature_from, weyl_connection, weyl_connection_tjet

SCHEMA_VERSION = 1
I4 = np.eye(4)
J0_PLUS = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
J0_MINUS = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)


class NotConformalError(ValueError):
    pass


def _matvec(A, x):
    return np.einsum("...ij,...j->...i", A, x)


# -- complex structures along the surface ----------------------------------

def adapted_frame(jet: SurfaceJet, g, orientation=1):
    """Columns (e1, e2, n1, n2): g-orthonormal, positively oriented, e1 ~ f_u."""
    e1, e2, immersed = tangent_frame(jet, g)
    shape = jet.f.shape[:-1]
    F = np.zeros(shape + (4, 4))
    F[..., :, 0] = e1
    F[..., :, 1] = e2

    def proj_out(x, basis):
        for b in basis:
            x = x - bilinear(g, x, b)[..., None] * b
        return x

    # normal candidates from the coordinate frame; pivot on the largest residuals
    cands = np.stack([proj_out(np.broadcast_to(I4[k], shape + (4,)), (e1, e2)) for k in range(4)], -2)
    norms = np.sqrt(np.maximum(np.einsum("...ki,...ij,...kj->...k", cands, g, cands), 0))
    order = np.argsort(-norms, axis=-1, kind="stable")
    c1 = np.take_along_axis(cands, order[..., 0, None, None], axis=-2)[..., 0, :]
    c2 = np.take_along_axis(cands, order[..., 1, None, None], axis=-2)[..., 0, :]
    n1 = c1 / np.sqrt(bilinear(g, c1, c1))[..., None]
    w = proj_out(c2, (n1,))
    n2 = w / np.sqrt(bilinear(g, w, w))[..., None]
    F[..., :, 2] = n1
    F[..., :, 3] = n2
    with np.errstate(invalid="ignore"):  # NaN margin nodes of finite-difference jets
        flip = np.sign(np.linalg.det(F)) * orientation < 0
    F[flip, :, 3] *= -1
    return F, immersed


@dataclass
class TangentJPair:
    plus: np.ndarray
    minus: np.ndarray
    immersed: np.ndarray

    def get(self, sign):
        return self.plus if sign > 0 else self.minus


def surface_J(jet: SurfaceJet, g, orientation=1) -> TangentJPair:
    F, immersed = adapted_frame(jet, g, orientation)
    Finv = np.einsum("...ji,...jk->...ik", F, g)  # F^T g
    Jp = F @ J0_PLUS @ Finv
    Jm = F @ J0_MINUS @ Finv
    return TangentJPair(Jp, Jm, immersed)


def kahler_of(J, g):
    """omega_ij = g(J d_i, d_j) as a 6-vector."""
    return to_vec6(np.einsum("...ki,...kj->...ij", J, g))


@dataclass
class TwistorLiftValue:
    sigma: np.ndarray
    sign: int
    norm2: np.ndarray


def twistor_lift(jet: SurfaceJet, g, sign=1, orientation=1, conf_tol=1e-8) -> TwistorLiftValue:
    """((1 +- *) f_z ^ f_zbar / (i c(f_z, f_zbar)))^flat, a (anti-)self-dual 2-form."""
    conf = np.abs(conformality_defect(jet, g))
    scale = np.real(bilinear(g, jet.fz, np.conj(jet.fz)))
    if np.any(conf > conf_tol * np.maximum(scale, 1e-300)):
        raise NotConformalError(f"conformality defect {conf.max():.3e} above tolerance")
    fz, fzb = jet.fz, jet.fzb
    biv = (np.einsum("...i,...j->...ij", fz, fzb) - np.einsum("...i,...j->...ij", fzb, fz))
    biv = biv / (1j * bilinear(g, fz, fzb))[..., None, None]
    low = np.einsum("...ik,...kl,...jl->...ij", g, np.real(biv), g)
    s = to_vec6(low)
    sigma = s + sign * np.einsum("...ab,...b->...a", hodge_matrix(g, orientation), s)
    norm2 = np.einsum("...a,...ab,...b->...", sigma, two_form_gram(g), sigma)
    return TwistorLiftValue(sigma, sign, norm2)


# -- holomorphicity ---------------------------------------------------------

def holomorphicity_residual(f: GridImmersion, W: WeylStructure, sign=1, method=None, orientation=None):
    """|Pi_pm(nabla^D_{d/dz} f_zbar)| per node with Pi = (I - i J_pm)/2 and h(X, Y) = g(X, conj Y)."""
    jet = f.jets(method)
    orientation = f.chart.orientation if orientation is None else orientation
    g = f.chart.metric_values(jet.f)
    Js = surface_J(jet, g, orientation).get(sign)
    v = np.conj(dbar_fz(jet, W))
    pv = 0.5 * (v - 1j * _matvec(Js, v))
    res = vnorm(g, pv)
    if jet.valid is not None:
        res = np.where(jet.valid, res, np.nan)
    return res


def _fd_grid(arr, domain, axis):
    h = domain.spacing[axis]
    out = sum(c * np.roll(arr, -k, axis=axis) for c, k in zip(D1, OFFSETS) if c) / h
    if not domain.periodic:
        bad = ~domain.interior()
        out[bad] = np.nan
    return out


def lift_vertical_defect(f: GridImmersion, W: WeylStructure, sign=1, method=None):
    """Vertical part of the holomorphicity defect of the lift: |nabla_v J + J nabla_u J| per node.

    nabla^D J along the surface uses finite differences of J_pm on the grid.
    This is an independent cross-check of :func:`holomorphicity_residual`.
    """
    jet = f.jets(method)
    g = f.chart.metric_values(jet.f)
    Js = surface_J(jet, g, f.chart.orientation).get(sign)
    G = weyl_connection(W, jet.f)

    def nabla(axis, X):
        A = np.einsum("...kij,...i->...kj", G, X)
        return _fd_grid(Js, f.domain, axis) + A @ Js - Js @ A

    du, dv = nabla(0, jet.fu), nabla(1, jet.fv)
    D = dv + Js @ du
    return np.sqrt(np.einsum("...ij,...ij->...", D, D))


# -- alpha / beta-bar split -------------------------------------------------

@dataclass
class SplitPair:
    alpha: np.ndarray
    beta_bar: np.ndarray
    fz: np.ndarray

    def norms(self, g):
        return vnorm(g, self.alpha), vnorm(g, self.beta_bar)


def alpha_beta_split(jet: SurfaceJet, H: AlmostHermitianStructure) -> SplitPair:
    J = H.J_values(jet.f)
    Jfz = _matvec(J, jet.fz)
    return SplitPair(0.5 * (jet.fz - 1j * Jfz), 0.5 * (jet.fz + 1j * Jfz), jet.fz)


def split_equation_residual(f: GridImmersion, H: AlmostHermitianStructure, W: WeylStructure, method=None):
    """Norms of nabla^{D,J}_zbar alpha + (i/2)(nabla^D_zbar J) beta_bar and
    nabla^{D,J}_zbar beta_bar - (i/2)(nabla^D_zbar J) alpha, per node."""
    jet = f.jets(method)
    g = f.chart.metric_values(jet.f)
    J, dJ, _ = H.chart.J_fields(jet.f, 1)
    G = weyl_connection(W, jet.f)
    sp = alpha_beta_split(jet, H)
    fzb = jet.fzb
    dJ_zb = np.einsum("...kjl,...l->...kj", dJ, fzb)
    A_zb = np.einsum("...kij,...i->...kj", G, fzb)
    nJ = dJ_zb + A_zb @ J - J @ A_zb
    fzzb = jet.fzzb
    d_alpha = 0.5 * (fzzb - 1j * _matvec(dJ_zb, jet.fz) - 1j * _matvec(J, fzzb))
    d_beta = 0.5 * (fzzb + 1j * _matvec(dJ_zb, jet.fz) + 1j * _matvec(J, fzzb))

    def nabla_DJ(d_sec, sec):
        nab = d_sec + _matvec(A_zb, sec)
        return nab - 0.5 * _matvec(J, _matvec(nJ, sec))

    r1 = nabla_DJ(d_alpha, sp.alpha) + 0.5j * _matvec(nJ, sp.beta_bar)
    r2 = nabla_DJ(d_beta, sp.beta_bar) - 0.5j * _matvec(nJ, sp.alpha)
    return vnorm(g, r1), vnorm(g, r2)


# -- index counting ---------------------------------------------------------

def unitary_frame_10(J, g):
    """Hermitian-orthonormal frame (u1, u2) of T^{1,0} = ker(J - i) from the coordinate frame.

    Pivot order is fixed (d1, d2, d3, d4) with a fallback to the next vector
    when the projection degenerates.
    """
    shape = J.shape[:-2]
    P = 0.5 * (I4 - 1j * J)
    frame = []
    for k in range(4):
        x = np.broadcast_to(P[..., :, k], shape + (4,)).astype(complex)
        for b in frame:
            x = x - hermitian(g, x, b)[..., None] * b
        nrm = vnorm(g, x)
        if len(frame) < 2 and np.all(nrm > 1e-3):
            frame.append(x / nrm[..., None])
    if len(frame) < 2:
        raise ValueError("could not build a unitary frame of T^{1,0}")
    return frame


def _coefficients(x, frame, g):
    return np.stack([hermitian(g, x, b) for b in frame], -1)


def orthogonal_line_coefficient(x, other, frame, g):
    """Coefficient of ``x`` along the unit vector of the rank-2 bundle orthogonal to ``other``."""
    o = _coefficients(other, frame, g)
    e = np.stack([-np.conj(o[..., 1]), np.conj(o[..., 0])], -1)
    e = e / np.maximum(np.linalg.norm(e, axis=-1, keepdims=True), 1e-300)
    c = _coefficients(x, frame, g)
    return np.sum(c * np.conj(e), -1)


@dataclass
class ZeroRecord:
    kind: str
    node: tuple
    uv: tuple
    order: int | None
    loop_radius: int


@dataclass
class IndexCount:
    P: int | None
    Q: int | None
    R: int
    zeros: list = field(default_factory=list)
    degenerate: str | None = None
    alpha_order_sum: int = 0
    beta_order_sum: int = 0


class NonIsolatedZerosError(ValueError):
    pass


def count_indices(f: GridImmersion, H: AlmostHermitianStructure, threshold=1e-5, method=None,
                  strict=True) -> IndexCount:
    """R = sum of orders of f_z zeros; Q, P from the zeros of alpha and beta-bar."""
    if not f.domain.periodic:
        raise ValueError("index counting needs a torus domain")
    jet = f.jets(method)
    g = f.chart.metric_values(jet.f)
    sp = alpha_beta_split(jet, H)
    J = H.J_values(jet.f)
    fz_mag = vnorm(g, jet.fz)
    ref = float(np.median(fz_mag))
    floor = threshold * ref
    U, V = f.domain.nodes()
    n, m = fz_mag.shape
    zeros = []
    degenerate = None

    def flagged(kind, mag, coef):
        nonlocal degenerate
        reps, clusters, line = flag_zeros(mag, threshold, ref)
        if line:
            degenerate = degenerate or f"holomorphic-degenerate: {kind} vanishes on a grid line"
            return None
        total = 0
        for node in reps:
            order, radius = local_winding(coef, mag, node, floor)
            zeros.append(ZeroRecord(kind, (int(node[0]), int(node[1])),
                                    (float(U[node]), float(V[node])), order, radius))
            if order is None:
                raise NonIsolatedZerosError(f"could not resolve the order of the {kind} zero at {node}")
            total += order
        return total

    # f_z: winding of the dominant component near each zero
    dom = int(np.argmax(np.abs(jet.fz).sum(axis=(0, 1))))
    R = flagged("f_z", fz_mag, jet.fz[..., dom])
    frame = unitary_frame_10(J, g)
    beta = np.conj(sp.beta_bar)
    a_mag = vnorm(g, sp.alpha)
    b_mag = vnorm(g, sp.beta_bar)
    alpha_coef = orthogonal_line_coefficient(sp.alpha, beta, frame, g)
    # beta-bar lives in T^{0,1}: use the conjugate frame, orthogonal to conj(alpha)
    cframe = [np.conj(b) for b in frame]
    beta_coef = orthogonal_line_coefficient(sp.beta_bar, np.conj(sp.alpha), cframe, g)
    A = flagged("alpha", a_mag, alpha_coef)
    B = flagged("beta_bar", b_mag, beta_coef)
    if R is None:
        raise NonIsolatedZerosError("f_z vanishes along a grid line")
    if A is None or B is None:
        if strict:
            raise NonIsolatedZerosError(degenerate)
        return IndexCount(None if B is None else B - R, None if A is None else A - R, R, zeros,
                          degenerate, A or 0, B or 0)
    return IndexCount(B - R, A - R, R, zeros, None, A, B)


# -- Chern numbers ------------------------------------------------------------

def chern_from_projector(Pi, dPi_u, dPi_v, A_u, A_v, F_uv, cell_area):
    """(i / 2 pi) * sum tr F_E over the grid for E = Pi(C^N) with connection Pi (d + A) Pi.

    Returns the real part of the integral (the imaginary part is reported by
    :func:`chern_integrand`).
    """
    return float(np.real(chern_integrand(Pi, dPi_u, dPi_v, A_u, A_v, F_uv).sum() * cell_area))


def chern_integrand(Pi, dPi_u, dPi_v, A_u, A_v, F_uv):
    Q = np.eye(Pi.shape[-1]) - Pi
    C_u = Pi @ (A_u - dPi_u) @ Q
    C_v = Pi @ (A_v - dPi_v) @ Q
    B_u = Q @ (dPi_u + A_u) @ Pi
    B_v = Q @ (dPi_v + A_v) @ Pi
    trF = (np.einsum("...ii->...", Pi @ F_uv) - np.einsum("...ii->...", C_u @ B_v)
           + np.einsum("...ii->...", C_v @ B_u))
    return 1j / (2 * np.pi) * trF


def fukui_chern(states):
    """Lattice Chern number of a rank-1 bundle from normalized states on a periodic (n, m) grid."""
    def link(a, b):
        z = np.einsum("...i,...i->...", np.conj(a), b)
        return z / np.abs(z)

    s = states
    U1 = link(s, np.roll(s, -1, axis=0))
    U2 = link(s, np.roll(s, -1, axis=1))
    Fp = np.angle(U1 * np.roll(U2, -1, axis=0) / np.roll(U1, -1, axis=1) / U2)
    return -float(Fp.sum() / (2 * np.pi))


@dataclass
class ChernResult:
    value: int
    raw: float
    defect: float
    imag: float


class IntegralityError(ValueError):
    pass


def _ambient_connection(f: GridImmersion, W: WeylStructure, jet: SurfaceJet):
    gamma = weyl_connection_tjet(W, jet.f)
    G = gamma.val
    R = curvature_from(gamma)
    A_u = np.einsum("...kij,...i->...kj", G, jet.fu)
    A_v = np.einsum("...kij,...i->...kj", G, jet.fv)
    F = np.einsum("...lijk,...i,...j->...lk", R, jet.fu, jet.fv)
    return A_u, A_v, F


def chern_number(f: GridImmersion, H: AlmostHermitianStructure | None, W: WeylStructure,
                 bundle="T10", method=None, tol=0.05) -> ChernResult:
    """c_1 of f*T^{1,0}M (``bundle='T10'``), of f*T^{1,0}_pm M (``'T+'``, ``'T-'``), or of
    the trivial line (``'trivial'``), by curvature integration over the torus domain."""
    if not f.domain.periodic:
        raise ValueError("Chern numbers need a closed (torus) domain")
    jet = f.jets(method)
    g = f.chart.metric_values(jet.f)
    A_u, A_v, F = _ambient_connection(f, W, jet)
    if bundle == "T10":
        J, dJ, _ = H.chart.J_fields(jet.f, 1)
        dJu = np.einsum("...kjl,...l->...kj", dJ, jet.fu)
        dJv = np.einsum("...kjl,...l->...kj", dJ, jet.fv)
    elif bundle in ("T+", "T-"):
        J = surface_J(jet, g, f.chart.orientation).get(1 if bundle == "T+" else -1)
        dJu = _fd_grid(J, f.domain, 0)
        dJv = _fd_grid(J, f.domain, 1)
    elif bundle == "trivial":
        shape = jet.f.shape[:-1]
        z = np.zeros(shape + (1, 1))
        Pi = np.ones(shape + (1, 1))
        raw = chern_from_projector(Pi, z, z, z, z, z, f.domain.cell_area)
        return ChernResult(int(round(raw)), raw, abs(raw - round(raw)), 0.0)
    else:
        raise ValueError(f"unknown bundle {bundle!r}")
    Pi = 0.5 * (I4 - 1j * J)
    integrand = chern_integrand(Pi, -0.5j * dJu, -0.5j * dJv, A_u, A_v, F)
    total = integrand.sum() * f.domain.cell_area
    raw = float(np.real(total))
    value = int(round(raw))
    defect = abs(raw - value)
    if defect > tol:
        raise IntegralityError(f"Chern integral {raw:.4f} is {defect:.3f} away from an integer")
    return ChernResult(value, raw, defect, float(np.imag(total)))


# -- Webster bookkeeping ----------------------------------------------------

@dataclass
class WebsterReport:
    schema_version: int
    surface: str
    P: int | None
    Q: int | None
    R: int | None
    chi_sigma: int
    chiT: int | None
    chiN: int | None
    c1: int
    c1_raw: float
    c1_minus: int
    c1_minus_raw: float
    web1_residual: int | None
    web2_residual_P_minus_Q: int | None
    web2_residual_Q_minus_P: int | None
    web2_sign_supported: str | None
    adjunction_slack_P: int | None
    adjunction_slack_Q: int | None
    label: str
    zeros: list

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def webster_report(f: GridImmersion, H: AlmostHermitianStructure, W: WeylStructure,
                   threshold=1e-5, method=None) -> WebsterReport:
    """Indices P, Q, R from zero counting and c_1 from curvature integration, side by side."""
    chi_sigma = 0  # torus domains only
    c1 = chern_number(f, H, W, "T10", method)
    counts = count_indices(f, H, threshold, method, strict=False)
    zeros = [asdict(z) for z in counts.zeros]
    if counts.degenerate:
        return WebsterReport(SCHEMA_VERSION, f.name, counts.P, counts.Q, counts.R, chi_sigma,
                             None, None, c1.value, c1.raw, 0, 0.0, None, None, None, None, None,
                             None, counts.degenerate.split(":")[0], zeros)
    c1m = chern_number(f, H, W, "T-", method)
    P, Q, R = counts.P, counts.Q, counts.R
    chiT = chi_sigma + R
    chiN = chiT - c1m.value
    web1 = chiT + chiN + P + Q
    r_pq = c1.value - (P - Q)
    r_qp = c1.value - (Q - P)
    if r_pq == 0 and r_qp == 0:
        supported = "both"
    elif r_pq == 0:
        supported = "P-Q"
    elif r_qp == 0:
        supported = "Q-P"
    else:
        supported = "neither"
    return WebsterReport(SCHEMA_VERSION, f.name, P, Q, R, chi_sigma, chiT, chiN, c1.value, c1.raw,
                         c1m.value, c1m.raw, web1, r_pq, r_qp, supported, -2 * P, -2 * Q,
                         "ok", zeros)
