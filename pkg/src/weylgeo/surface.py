"""Maps from a Riemann-surface domain into a charted 4-manifold.

A surface is sampled on a grid over either a flat torus (periodic) or an
open rectangle. The domain metric is ``e^{2 lam}(du^2 + dv^2)``, so
``(u, v)`` are isothermal by construction and ``z = u + i v``.

Jets hold chart-component arrays with a trailing axis of length 4:
``f, fu, fv, fuu, fuv, fvv``. Complex derivatives follow
``f_z = (f_u - i f_v)/2`` and ``f_zbar = (f_u + i f_v)/2``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .geom import ChartedManifold4
from .weyl import WeylStructure, _christoffel_from, weyl_connection

# 4th-order central stencils on offsets -2..2
D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
OFFSETS = (-2, -1, 0, 1, 2)
RANK_TOL = 1e-10


@dataclass
class TorusDomain:
    """Flat torus R^2 / (Pu Z x Pv Z) sampled on an n x m grid."""

    n: int
    m: int
    periods: tuple = (2 * np.pi, 2 * np.pi)
    periodic: bool = field(default=True, init=False)

    @property
    def spacing(self):
        return self.periods[0] / self.n, self.periods[1] / self.m

    def nodes(self):
        hu, hv = self.spacing
        u = np.arange(self.n) * hu
        v = np.arange(self.m) * hv
        return np.meshgrid(u, v, indexing="ij")

    def interior(self):
        return np.ones((self.n, self.m), dtype=bool)

    @property
    def cell_area(self):
        hu, hv = self.spacing
        return hu * hv


@dataclass
class RectDomain:
    """Open rectangle sampled on an n x m grid including a 2-node margin."""

    u_range: tuple
    v_range: tuple
    n: int
    m: int
    margin: int = 2
    periodic: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.margin < 2:
            raise ValueError("rectangles need a margin of at least 2 nodes for 4th-order stencils")
        if self.n < 2 * self.margin + 1 or self.m < 2 * self.margin + 1:
            raise ValueError("grid too small for the margin")

    @property
    def spacing(self):
        return ((self.u_range[1] - self.u_range[0]) / (self.n - 1),
                (self.v_range[1] - self.v_range[0]) / (self.m - 1))

    def nodes(self):
        u = np.linspace(*self.u_range, self.n)
        v = np.linspace(*self.v_range, self.m)
        return np.meshgrid(u, v, indexing="ij")

    def interior(self):
        mask = np.zeros((self.n, self.m), dtype=bool)
        k = self.margin
        mask[k:-k, k:-k] = True
        return mask

    @property
    def cell_area(self):
        hu, hv = self.spacing
        return hu * hv


@dataclass
class SurfaceJet:
    f: np.ndarray
    fu: np.ndarray
    fv: np.ndarray
    fuu: np.ndarray
    fuv: np.ndarray
    fvv: np.ndarray
    lam: np.ndarray
    valid: np.ndarray | None = None

    @property
    def fz(self):
        return 0.5 * (self.fu - 1j * self.fv)

    @property
    def fzb(self):
        return 0.5 * (self.fu + 1j * self.fv)

    @property
    def fzzb(self):
        return 0.25 * (self.fuu + self.fvv)

    def at(self, idx):
        sl = tuple(idx)
        return SurfaceJet(self.f[sl], self.fu[sl], self.fv[sl], self.fuu[sl], self.fuv[sl],
                          self.fvv[sl], self.lam[sl], None if self.valid is None else self.valid[sl])


@dataclass
class GridImmersion:
    """A sampled map into ``chart``, backed by expressions in u, v or by raw samples."""

    domain: TorusDomain | RectDomain
    chart: ChartedManifold4
    exprs: tuple | None = None
    samples: np.ndarray | None = None
    lam: object = 0.0
    name: str = ""
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lam = ex.as_expr(self.lam)
        if self.exprs is not None:
            if len(self.exprs) != 4:
                raise ValueError("dimension mismatch: a surface needs 4 component expressions")
            self.exprs = tuple(ex.as_expr(e) for e in self.exprs)
            for e in self.exprs + (self.lam,):
                extra = ex.variables_of(e) - set(ex.SURFACE_VARS)
                if extra:
                    raise ex.ExprNameError(sorted(extra)[0], None)
            self.samples = self._eval_exprs()
        elif self.samples is None:
            raise ValueError("GridImmersion needs expressions or samples")
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != (self.domain.n, self.domain.m, 4):
            raise ValueError(f"samples must have shape {(self.domain.n, self.domain.m, 4)}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite surface samples")

    @property
    def expression_backed(self):
        return self.exprs is not None

    def uv(self):
        U, V = self.domain.nodes()
        return np.stack([U, V], -1)

    def _eval_exprs(self):
        uv = self.uv()
        return np.stack([ex.eval_values(e, uv, ex.SURFACE_VARS) for e in self.exprs], -1)

    def lam_values(self):
        return ex.eval_values(self.lam, self.uv(), ex.SURFACE_VARS)

    def with_samples(self, samples, name=None):
        return GridImmersion(self.domain, self.chart, None, samples, self.lam,
                             name or self.name, dict(self.notes))

    def with_lam(self, lam):
        return GridImmersion(self.domain, self.chart, self.exprs,
                             None if self.exprs is not None else self.samples,
                             lam, self.name, dict(self.notes))

    def jets(self, method=None) -> SurfaceJet:
        if method is None:
            method = "ad" if self.expression_backed else "fd"
        if method == "ad":
            if not self.expression_backed:
                raise ValueError("AD jets need an expression-backed surface")
            return ad_jets(self.exprs, self.uv(), self.lam_values())
        if method == "fd":
            return fd_jets(self.samples, self.domain, self.chart, self.lam_values())
        raise ValueError(f"unknown jet method {method!r}")


def ad_jets(exprs, uv, lam):
    comps = [ex.eval_jet(e, uv, ex.SURFACE_VARS, order=2) for e in exprs]
    f = np.stack([c.value for c in comps], -1)
    fu = np.stack([c.grad[0] for c in comps], -1)
    fv = np.stack([c.grad[1] for c in comps], -1)
    fuu = np.stack([c.hess[0, 0] for c in comps], -1)
    fuv = np.stack([c.hess[0, 1] for c in comps], -1)
    fvv = np.stack([c.hess[1, 1] for c in comps], -1)
    return SurfaceJet(f, fu, fv, fuu, fuv, fvv, np.asarray(lam, dtype=float),
                      np.ones(uv.shape[:-1], dtype=bool))


def _shift(a, du, dv):
    return np.roll(a, (-du, -dv), axis=(0, 1))


def fd_jets(samples, domain, chart: ChartedManifold4, lam, mixed=True) -> SurfaceJet:
    """4th-order central differences; differences of periodic chart coordinates are wrapped.

    ``mixed=False`` skips f_uv (left as NaN), which the tension does not need.
    """
    hu, hv = domain.spacing
    f = samples

    def rel(du, dv):
        return chart.wrap_difference(_shift(f, du, dv) - f)

    ru = {k: rel(k, 0) for k in OFFSETS if k}
    rv = {k: rel(0, k) for k in OFFSETS if k}
    fu = sum(c * ru[k] for c, k in zip(D1, OFFSETS) if k) / hu
    fv = sum(c * rv[k] for c, k in zip(D1, OFFSETS) if k) / hv
    fuu = sum(c * ru[k] for c, k in zip(D2, OFFSETS) if k) / hu**2
    fvv = sum(c * rv[k] for c, k in zip(D2, OFFSETS) if k) / hv**2
    if mixed:
        fuv = sum(a * b * rel(i, j) for a, i in zip(D1, OFFSETS) for b, j in zip(D1, OFFSETS)
                  if a and b) / (hu * hv)
    else:
        fuv = np.full_like(fu, np.nan)
    valid = domain.interior()
    if not domain.periodic:
        bad = ~valid
        for arr in (fu, fv, fuu, fvv, fuv):
            arr[bad] = np.nan
    return SurfaceJet(f, fu, fv, fuu, fuv, fvv, np.asarray(lam, dtype=float), valid)


def jet_at(f: GridImmersion, p, method=None) -> SurfaceJet:
    """Jet at a grid node ``(i, j)`` (ints) or, for expression-backed maps, a point ``(u, v)``."""
    if all(isinstance(k, (int, np.integer)) for k in p):
        jet = f.jets(method)
        if jet.valid is not None and not jet.valid[tuple(p)]:
            raise ValueError(f"node {tuple(p)} lies in the rectangle margin")
        return jet.at(p)
    if not f.expression_backed:
        raise ValueError("continuous points need an expression-backed surface")
    uv = np.asarray(p, dtype=float)
    if not f.domain.periodic:
        (u0, u1), (v0, v1) = f.domain.u_range, f.domain.v_range
        if not (u0 < uv[0] < u1 and v0 < uv[1] < v1):
            raise ValueError(f"point {tuple(uv)} outside the rectangle")
    lam = ex.eval_values(f.lam, uv, ex.SURFACE_VARS)
    return ad_jets(f.exprs, uv, lam)


# -- pointwise operators ----------------------------------------------------

def bilinear(g, X, Y):
    """Complex-bilinear extension of g."""
    return np.einsum("...i,...ij,...j->...", X, g, Y)


def hermitian(g, X, Y):
    """h(X, Y) = g(X, conj Y)."""
    return np.einsum("...i,...ij,...j->...", X, g, np.conj(Y))


def vnorm(g, X):
    return np.sqrt(np.maximum(np.real(hermitian(g, X, X)), 0.0))


def conformality_defect(jet: SurfaceJet, g):
    """c(f_z, f_z) = (|f_u|^2 - |f_v|^2 - 2i<f_u, f_v>)/4."""
    return bilinear(g, jet.fz, jet.fz)


def tangent_frame(jet: SurfaceJet, g):
    """Orthonormal (e1, e2) by Gram-Schmidt on (f_u, f_v) and an immersion mask."""
    guu = bilinear(g, jet.fu, jet.fu)
    guv = bilinear(g, jet.fu, jet.fv)
    gvv = bilinear(g, jet.fv, jet.fv)
    area2 = guu * gvv - guv**2
    scale = np.maximum(guu * gvv, 1e-300)
    immersed = (area2 / scale > RANK_TOL) & (guu > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        e1 = jet.fu / np.sqrt(guu)[..., None]
        w = jet.fv - guv[..., None] / guu[..., None] * jet.fu
        e2 = w / np.sqrt(bilinear(g, w, w))[..., None]
    return e1, e2, immersed


def projectors(jet: SurfaceJet, g):
    """Tangent projector matrices P[..., k, l] (acting on vectors) and the normal complement."""
    e1, e2, immersed = tangent_frame(jet, g)
    ge1 = np.einsum("...ij,...j->...i", g, e1)
    ge2 = np.einsum("...ij,...j->...i", g, e2)
    P = np.einsum("...k,...l->...kl", e1, ge1) + np.einsum("...k,...l->...kl", e2, ge2)
    return P, np.eye(4) - P, immersed


def _levi_civita_at(chart, f):
    g, dg, _ = chart.metric_fields(f, 1)
    return g, _christoffel_from(np.linalg.inv(g), dg)


def _gamma(G, X, Y):
    return np.einsum("...kij,...i,...j->...k", G, X, Y)


@dataclass
class SecondFundamental:
    A: np.ndarray        # [..., a, b, k] classical, a, b in (u, v)
    B: np.ndarray        # Weyl second fundamental form, same layout
    P_tan: np.ndarray
    P_nor: np.ndarray
    immersed: np.ndarray


def second_fundamental(jet: SurfaceJet, W: WeylStructure) -> SecondFundamental:
    """A_g(d_a, d_b) = (nabla^g_a f_b)^perp and B^D = A_g - <f_a, f_b>(alpha^#)^perp."""
    chart = W.chart
    g, G = _levi_civita_at(chart, jet.f)
    P, Q, immersed = projectors(jet, g)
    d = {(0, 0): (jet.fuu, jet.fu, jet.fu), (0, 1): (jet.fuv, jet.fu, jet.fv),
         (1, 1): (jet.fvv, jet.fv, jet.fv)}
    shape = jet.f.shape[:-1] + (2, 2, 4)
    A = np.zeros(shape)
    B = np.zeros(shape)
    a_up = np.einsum("...kl,...l->...k", np.linalg.inv(g), W.alpha_values(jet.f))
    a_perp = np.einsum("...kl,...l->...k", Q, a_up)
    for (a, b), (second, X, Y) in d.items():
        Aab = np.einsum("...kl,...l->...k", Q, second + _gamma(G, X, Y))
        Bab = Aab - bilinear(g, X, Y)[..., None] * a_perp
        A[..., a, b, :] = A[..., b, a, :] = Aab
        B[..., a, b, :] = B[..., b, a, :] = Bab
    bad = ~immersed
    A[bad] = np.nan
    B[bad] = np.nan
    return SecondFundamental(A, B, P, Q, immersed)


def weyl_mean_curvature(jet: SurfaceJet, W: WeylStructure):
    """(H^D, H_g): half the trace of B^D and A_g in the induced metric."""
    sf = second_fundamental(jet, W)
    g = W.chart.metric_values(jet.f)
    h = np.empty(jet.f.shape[:-1] + (2, 2))
    h[..., 0, 0] = bilinear(g, jet.fu, jet.fu)
    h[..., 0, 1] = h[..., 1, 0] = bilinear(g, jet.fu, jet.fv)
    h[..., 1, 1] = bilinear(g, jet.fv, jet.fv)
    with np.errstate(invalid="ignore"):
        hinv = np.linalg.inv(np.where(sf.immersed[..., None, None], h, np.eye(2)))
    HD = 0.5 * np.einsum("...ab,...abk->...k", hinv, sf.B)
    Hg = 0.5 * np.einsum("...ab,...abk->...k", hinv, sf.A)
    return HD, Hg


def tension(jet: SurfaceJet, W: WeylStructure, lam=None):
    """tau = e^{-2 lam}(nabla^g_u f_u + nabla^g_v f_v + 2a(f_u)f_u + 2a(f_v)f_v - (|f_u|^2+|f_v|^2) a^#)."""
    lam = jet.lam if lam is None else lam
    g, G = _levi_civita_at(W.chart, jet.f)
    a = W.alpha_values(jet.f)
    a_up = np.einsum("...kl,...l->...k", np.linalg.inv(g), a)
    au = np.einsum("...i,...i->...", a, jet.fu)
    av = np.einsum("...i,...i->...", a, jet.fv)
    t = (jet.fuu + _gamma(G, jet.fu, jet.fu) + jet.fvv + _gamma(G, jet.fv, jet.fv)
         + 2 * au[..., None] * jet.fu + 2 * av[..., None] * jet.fv
         - (bilinear(g, jet.fu, jet.fu) + bilinear(g, jet.fv, jet.fv))[..., None] * a_up)
    return np.exp(-2.0 * np.asarray(lam))[..., None] * t


def tension_complex(jet: SurfaceJet, W: WeylStructure, lam=None):
    """4 e^{-2 lam} nabla^D_{d/dzbar} f_z, evaluated in complex arithmetic."""
    lam = jet.lam if lam is None else lam
    GD = weyl_connection(W, jet.f)
    val = jet.fzzb + _gamma(GD, jet.fzb, jet.fz)
    return 4.0 * np.exp(-2.0 * np.asarray(lam))[..., None] * val


def dbar_fz(jet: SurfaceJet, W: WeylStructure):
    """nabla^D_{d/dzbar} f_z (complex target vector)."""
    GD = weyl_connection(W, jet.f)
    return jet.fzzb + _gamma(GD, jet.fzb, jet.fz)


# -- zeros and winding ------------------------------------------------------

def ring(i, j, radius, n, m, periodic=True):
    """Counter-clockwise node loop of the (2r+1)^2 box around (i, j) in (u, v) orientation."""
    r = radius
    path = ([(i + a, j - r) for a in range(-r, r)] + [(i + r, j + b) for b in range(-r, r)]
            + [(i - a, j + r) for a in range(-r, r)] + [(i - r, j - b) for b in range(-r, r)])
    if periodic:
        return [(a % n, b % m) for a, b in path]
    if any(not (0 <= a < n and 0 <= b < m) for a, b in path):
        return None
    return path


def winding(values):
    """Winding number of a closed sequence of complex numbers around 0."""
    z = np.asarray(values)
    dphi = np.angle(np.roll(z, -1) / z)
    return int(np.rint(dphi.sum() / (2 * np.pi)))


def flag_zeros(mag, threshold, ref=None):
    """Nodes with ``mag < threshold * median`` grouped into 8-connected clusters.

    Returns (list of representative nodes, list of clusters, line_flag) where
    line_flag is True when an entire grid row or column is flagged.
    """
    ref = np.median(mag) if ref is None else ref
    flagged = mag < threshold * ref
    n, m = mag.shape
    line = bool(np.any(flagged.all(axis=0)) or np.any(flagged.all(axis=1)))
    seen = np.zeros_like(flagged)
    clusters = []
    for i, j in zip(*np.nonzero(flagged)):
        if seen[i, j]:
            continue
        stack, comp = [(i, j)], []
        seen[i, j] = True
        while stack:
            a, b = stack.pop()
            comp.append((a, b))
            for da in (-1, 0, 1):
                for db in (-1, 0, 1):
                    c, d = (a + da) % n, (b + db) % m
                    if flagged[c, d] and not seen[c, d]:
                        seen[c, d] = True
                        stack.append((c, d))
        clusters.append(comp)
    reps = [min(c, key=lambda node: mag[node]) for c in clusters]
    return reps, clusters, line


def local_winding(coef, mag, node, floor, periodic=True):
    """Winding of ``coef`` (complex grid) around ``node``; 3x3 loop escalated to 5x5."""
    n, m = coef.shape
    for radius in (1, 2):
        path = ring(node[0], node[1], radius, n, m, periodic)
        if path is None:
            return None, radius
        loop_min = min(mag[p] for p in path)
        if loop_min >= 10 * floor or radius == 2:
            return winding([coef[p] for p in path]), radius
    return None, 2


@dataclass
class BranchFlag:
    node: tuple
    order: int | None
    loop_radius: int
    magnitude: float


def branch_scan(f: GridImmersion, W: WeylStructure | None = None, threshold=1e-5, method=None):
    """Nodes where |f_z| < threshold * median|f_z| with local winding order of f_z."""
    jet = f.jets(method)
    g = f.chart.metric_values(jet.f)
    fz = jet.fz
    mag = vnorm(g, fz)
    valid = jet.valid if jet.valid is not None else np.ones(mag.shape, bool)
    ref = np.median(mag[valid])
    mag_for_flag = np.where(valid, mag, np.inf)
    reps, _, _ = flag_zeros(mag_for_flag, threshold, ref)
    out = []
    for node in reps:
        path = ring(node[0], node[1], 2, *mag.shape, f.domain.periodic)
        comp_src = path if path else [node]
        k = int(np.argmax(np.sum([np.abs(fz[p]) for p in comp_src], axis=0)))
        order, radius = local_winding(fz[..., k], mag, node, threshold * ref, f.domain.periodic)
        out.append(BranchFlag(tuple(int(x) for x in node), order, radius, float(mag[node])))
    return out


# -- reports ----------------------------------------------------------------

SURFACE_CSV_COLUMNS = ("u_index", "v_index", "conf_defect_re", "conf_defect_im",
                       "tau_norm", "HD_norm", "Hg_norm")


def surface_diagnostics(f: GridImmersion, W: WeylStructure, method=None):
    jet = f.jets(method)
    g = f.chart.metric_values(jet.f)
    conf = conformality_defect(jet, g)
    tau = tension(jet, W)
    HD, Hg = weyl_mean_curvature(jet, W)
    out = {
        "conf": conf,
        "tau_norm": vnorm(g, tau),
        "HD_norm": vnorm(g, HD),
        "Hg_norm": vnorm(g, Hg),
        "valid": jet.valid if jet.valid is not None else np.ones(conf.shape, bool),
    }
    return out


def write_surface_csv(path, diag):
    n, m = diag["conf"].shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SURFACE_CSV_COLUMNS)
        for i in range(n):
            for j in range(m):
                if not diag["valid"][i, j]:
                    continue
                c = diag["conf"][i, j]
                w.writerow([i, j, repr(float(c.real)), repr(float(c.imag)),
                            repr(float(diag["tau_norm"][i, j])), repr(float(diag["HD_norm"][i, j])),
                            repr(float(diag["Hg_norm"][i, j]))])
