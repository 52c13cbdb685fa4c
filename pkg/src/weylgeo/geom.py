"""Chart-level linear algebra on a 4-dimensional coordinate chart.

Metric evaluation, musical isomorphisms, the Hodge star on 2-forms and the
self-dual/anti-self-dual split. 2-forms are stored as 6-vectors in the
ordered basis (12, 13, 14, 23, 24, 34), which turns the Hodge star into a
6x6 matrix.

All pointwise functions broadcast over leading axes: a metric of shape
(..., 4, 4) acts on forms of shape (..., 6) and so on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class NonSPDMetricError(ValueError):
    def __init__(self, eigenvalue, point=None):
        self.eigenvalue = eigenvalue
        self.point = point
        super().__init__(f"metric is not positive definite (eigenvalue {eigenvalue:.3e})")


class ChartDomainError(ValueError):
    pass


def _levi_civita_symbol():
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(perm[i] > perm[j] for i in range(4) for j in range(i + 1, 4))
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


EPS4 = _levi_civita_symbol()


# ---------------------------------------------------------------------------
# First-order tensor jets: a field value with its coordinate gradient stored
# on a trailing axis. Products follow the Leibniz rule.


@dataclass
class TJet:
    val: np.ndarray
    d: np.ndarray  # val.shape + (4,)

    def __add__(self, other):
        if isinstance(other, TJet):
            return TJet(self.val + other.val, self.d + other.d)
        return TJet(self.val + other, self.d)

    def __sub__(self, other):
        if isinstance(other, TJet):
            return TJet(self.val - other.val, self.d - other.d)
        return TJet(self.val - other, self.d)

    def __neg__(self):
        return TJet(-self.val, -self.d)

    def scale(self, c):
        return TJet(self.val * c, self.d * c)

    @classmethod
    def const(cls, val):
        val = np.asarray(val, dtype=float)
        return cls(val, np.zeros(val.shape + (4,)))


def tein(subscripts, *ops):
    """einsum over TJet/array operands with the product rule.

    Subscripts are written for the values; the derivative axis is handled
    internally and must not use the letter ``Z``.
    """
    lhs, out = subscripts.split("->")
    terms = lhs.split(",")
    vals = [op.val if isinstance(op, TJet) else op for op in ops]
    val = np.einsum(subscripts, *vals, optimize=True)
    d = None
    for k, op in enumerate(ops):
        if not isinstance(op, TJet):
            continue
        t = list(terms)
        t[k] = t[k] + "Z"
        args = list(vals)
        args[k] = op.d
        part = np.einsum(",".join(t) + "->" + out + "Z", *args, optimize=True)
        d = part if d is None else d + part
    if d is None:
        return val
    return TJet(val, d)


def tinv(g: TJet) -> TJet:
    ginv = np.linalg.inv(g.val)
    d = -np.einsum("...ia,...abZ,...bj->...ijZ", ginv, g.d, ginv, optimize=True)
    return TJet(ginv, d)


# ---------------------------------------------------------------------------
# Expression-backed fields


def expr_array(entries, shape):
    arr = np.empty(shape, dtype=object)
    flat = list(np.asarray(entries, dtype=object).reshape(-1))
    if len(flat) != arr.size:
        raise ValueError(f"expected {arr.size} entries, got {len(flat)}")
    for i, e in enumerate(flat):
        arr.flat[i] = ex.as_expr(e)
    return arr


def field_jets(exprs: np.ndarray, points, order=1, variables=ex.CHART_VARS):
    """Evaluate an array of expressions with derivatives.

    Returns (val, d1, d2) with val shape pts.shape[:-1] + exprs.shape,
    d1 adding one trailing derivative axis and d2 two (``None`` unless
    ``order == 2``).
    """
    points = np.asarray(points, dtype=float)
    base = points.shape[:-1]
    n = len(variables)
    val = np.zeros(base + exprs.shape)
    d1 = np.zeros(base + exprs.shape + (n,))
    d2 = np.zeros(base + exprs.shape + (n, n)) if order >= 2 else None
    cache = {}
    for idx in np.ndindex(exprs.shape):
        e = exprs[idx]
        if ex.is_zero(e):
            continue
        if isinstance(e, ex.Num):
            val[(Ellipsis,) + idx] = e.value
            continue
        if e not in cache:
            if order == 0:
                cache[e] = ex.eval_values(e, points, variables)
            else:
                cache[e] = ex.eval_jet(e, points, variables, order=order)
        j = cache[e]
        if order == 0:
            val[(Ellipsis,) + idx] = j
            continue
        val[(Ellipsis,) + idx] = j.value
        d1[(Ellipsis,) + idx + (slice(None),)] = np.moveaxis(j.grad, 0, -1)
        if order >= 2:
            d2[(Ellipsis,) + idx + (slice(None), slice(None))] = np.moveaxis(j.hess, (0, 1), (-2, -1))
    return val, d1, d2


@dataclass
class ChartedManifold4:
    """A single 4-dimensional chart with expression-valued fields.

    ``metric`` is a symmetric 4x4 array of expressions in ``x1..x4``;
    ``alpha`` the optional gauge one-form; ``J`` the optional
    almost-complex structure with ``J[i, j] = J^i_j`` (column j is the
    image of the j-th coordinate vector).
    """

    name: str
    metric: np.ndarray
    coords: tuple = ("x1", "x2", "x3", "x4")
    periods: tuple = (None, None, None, None)
    bounds: tuple = (None, None, None, None)
    alpha: np.ndarray | None = None
    J: np.ndarray | None = None
    orientation: int = 1
    sample_box: tuple | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.metric = expr_array(self.metric, (4, 4))
        for i in range(4):
            for j in range(i + 1, 4):
                if self.metric[i, j] != self.metric[j, i]:
                    raise ValueError(f"metric expressions not symmetric at ({i}, {j})")
        if self.alpha is not None:
            self.alpha = expr_array(self.alpha, (4,))
        if self.J is not None:
            self.J = expr_array(self.J, (4, 4))
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    # -- evaluation -------------------------------------------------------

    def metric_fields(self, points, order=1):
        return field_jets(self.metric, points, order)

    def metric_tjet(self, points):
        g, dg, _ = self.metric_fields(points, 1)
        return TJet(g, dg)

    def J_fields(self, points, order=1):
        if self.J is None:
            raise ValueError(f"chart {self.name!r} has no almost-complex structure")
        return field_jets(self.J, points, order)

    def alpha_fields(self, points, order=1):
        if self.alpha is None:
            pts = np.asarray(points, dtype=float)
            z = np.zeros(pts.shape[:-1] + (4,))
            return z, np.zeros(z.shape + (4,)), np.zeros(z.shape + (4, 4)) if order >= 2 else None
        return field_jets(self.alpha, points, order)

    def metric_values(self, points):
        return field_jets(self.metric, points, 0)[0]

    def check_points(self, points):
        points = np.asarray(points, dtype=float)
        for k, b in enumerate(self.bounds):
            if b is None:
                continue
            lo, hi = b
            x = points[..., k]
            if np.any((x <= lo) | (x >= hi)):
                bad = x[(x <= lo) | (x >= hi)].ravel()[0]
                raise ChartDomainError(
                    f"coordinate {self.coords[k]} = {bad:.6g} outside chart interval ({lo}, {hi})")
        if not np.all(np.isfinite(points)):
            raise ChartDomainError("non-finite chart coordinates")

    def wrap(self, points):
        points = np.array(points, dtype=float)
        for k, p in enumerate(self.periods):
            if p:
                points[..., k] = np.mod(points[..., k], p)
        return points

    def wrap_difference(self, delta):
        """Map coordinate differences of periodic coordinates into [-P/2, P/2)."""
        delta = np.array(delta, dtype=float)
        for k, p in enumerate(self.periods):
            if p:
                delta[..., k] = delta[..., k] - p * np.round(delta[..., k] / p)
        return delta

    def random_points(self, rng, n):
        box = self.sample_box
        if box is None:
            box = []
            for k in range(4):
                if self.bounds[k] is not None:
                    lo, hi = self.bounds[k]
                    pad = 0.05 * (hi - lo)
                    box.append((lo + pad, hi - pad))
                elif self.periods[k]:
                    box.append((0.0, self.periods[k]))
                else:
                    box.append((-1.0, 1.0))
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        return lo + (hi - lo) * rng.random((n, 4))


def metric_at(M: ChartedManifold4, p):
    """Metric, inverse and volume density at a single point; checks SPD."""
    p = np.asarray(p, dtype=float)
    M.check_points(p)
    g = M.metric_values(p)
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= 0.0:
        raise NonSPDMetricError(eig[0], p)
    return g, np.linalg.inv(g), float(np.sqrt(np.linalg.det(g)))


def check_spd(g):
    eig = np.linalg.eigvalsh(g)
    lo = eig[..., 0]
    if np.any(lo <= 0.0):
        raise NonSPDMetricError(float(np.min(lo)))


def sharp(g, form):
    return np.linalg.solve(g, form[..., None])[..., 0]


def flat(g, vector):
    return np.einsum("...ij,...j->...i", g, vector)


# ---------------------------------------------------------------------------
# 2-forms


def to_matrix(beta):
    beta = np.asarray(beta)
    m = np.zeros(beta.shape[:-1] + (4, 4), dtype=beta.dtype)
    for k, (i, j) in enumerate(PAIRS):
        m[..., i, j] = beta[..., k]
        m[..., j, i] = -beta[..., k]
    return m


def to_vec6(m):
    m = np.asarray(m)
    return np.stack([m[..., i, j] for i, j in PAIRS], axis=-1)


def two_form_gram(g):
    """6x6 matrix of the induced inner product on 2-forms."""
    ginv = np.linalg.inv(g)
    G = np.empty(g.shape[:-2] + (6, 6))
    for a, (i, j) in enumerate(PAIRS):
        for b, (k, l) in enumerate(PAIRS):
            G[..., a, b] = ginv[..., i, k] * ginv[..., j, l] - ginv[..., i, l] * ginv[..., j, k]
    return G


def hodge_matrix(g, orientation=1):
    """6x6 matrix of the Hodge star on 2-forms for metric ``g``."""
    ginv = np.linalg.inv(g)
    vol = orientation * np.sqrt(np.linalg.det(g))
    H = np.empty(g.shape[:-2] + (6, 6))
    for b, (i, j) in enumerate(PAIRS):
        # raise indices of the unit form dx^i ^ dx^j
        up = ginv[..., :, i, None] * ginv[..., None, j, :] - ginv[..., :, j, None] * ginv[..., None, i, :]
        for a, (k, l) in enumerate(PAIRS):
            H[..., a, b] = 0.5 * vol * np.einsum("...pq,pq->...", up, EPS4[:, :, k, l])
    return H


def hodge_star2(g, orientation, beta):
    return np.einsum("...ab,...b->...a", hodge_matrix(g, orientation), beta)


def two_form_inner(g, beta, gamma):
    return np.einsum("...a,...ab,...b->...", beta, two_form_gram(g), gamma)


def wedge22(beta, gamma):
    """Coefficient of dx1^dx2^dx3^dx4 in beta ^ gamma."""
    b, c = beta, gamma
    return (b[..., 0] * c[..., 5] - b[..., 1] * c[..., 4] + b[..., 2] * c[..., 3]
            + b[..., 3] * c[..., 2] - b[..., 4] * c[..., 1] + b[..., 5] * c[..., 0])


def volume_density(g, orientation=1):
    return orientation * np.sqrt(np.linalg.det(g))


def selfdual_projector(g, orientation=1, sign=1):
    return 0.5 * (np.eye(6) + sign * hodge_matrix(g, orientation))


def selfdual_basis(g, orientation=1, sign=1):
    """Three 2-forms spanning the ``sign`` eigenspace of the Hodge star,
    orthonormal in the induced 2-form metric. Returns shape (3, 6)."""
    g = np.asarray(g, dtype=float)
    P = selfdual_projector(g, orientation, sign)
    G = two_form_gram(g)
    # P is G-self-adjoint; orthonormalize its column space in the G metric
    u, s, _ = np.linalg.svd(P)
    rank = int(np.sum(s > 1e-8 * s[0]))
    if rank != 3:
        raise ValueError(f"eigenspace has dimension {rank}, expected 3")
    B = u[:, :3].T
    basis = []
    for b in B:
        for c in basis:
            b = b - (c @ G @ b) * c
        b = b / np.sqrt(b @ G @ b)
        basis.append(b)
    return np.array(basis)


def star_eigen_dimensions(g, orientation=1):
    w = np.linalg.eigvals(hodge_matrix(g, orientation))
    return int(np.sum(np.abs(w - 1) < 1e-8)), int(np.sum(np.abs(w + 1) < 1e-8))


def flat_metric_exprs():
    return [[1.0 if i == j else 0.0 for j in range(4)] for i in range(4)]
