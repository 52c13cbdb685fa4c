"""Weyl-harmonic map flow df/dt = tau(f) on a periodic grid.

The flow runs in chart coordinates with finite-difference jets; periodic
chart coordinates are wrapped after every step. On rectangles the margin
nodes are boundary data and do not move. It is a relaxation device,
not a gradient flow of a known functional, so the monotonicity of ||tau||_2
is monitored rather than assumed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .geom import ChartDomainError
from .surface import GridImmersion, fd_jets, tension, vnorm
from .weyl import WeylStructure

KAPPA = 0.2
TRAJECTORY_COLUMNS = ("step", "time", "tau_inf", "tau_l2", "energy")


class FlowDivergence(RuntimeError):
    """Raised when the residual grows 10x or ||tau||_2 increases."""

    def __init__(self, message, state=None, log=None):
        super().__init__(message)
        self.state = state
        self.log = log or []


class StabilityBoundError(ValueError):
    pass


@dataclass
class FlowState:
    samples: np.ndarray
    time: float
    dt: float
    energy: float
    tau_inf: float
    tau_l2: float
    step: int = 0


def stability_bound(domain, kappa=KAPPA):
    return kappa * min(domain.spacing) ** 2


def evaluate(f: GridImmersion, W: WeylStructure, samples):
    """tau field and the monitors (energy, ||tau||_inf, ||tau||_2) for ``samples``."""
    lam = f.lam_values()
    jet = fd_jets(samples, f.domain, f.chart, lam, mixed=False)
    g = f.chart.metric_values(samples)
    # rectangle margins carry no stencil: they are held fixed (Dirichlet data)
    ok = jet.valid[..., None]
    tau = np.where(ok, tension(jet, W), 0.0)
    t_norm = vnorm(g, tau)
    e2l = np.exp(2 * lam)
    dA = f.domain.cell_area
    fu, fv = np.where(ok, jet.fu, 0.0), np.where(ok, jet.fv, 0.0)
    grad2 = np.einsum("...i,...ij,...j->...", fu, g, fu) + np.einsum("...i,...ij,...j->...", fv, g, fv)
    energy = float(np.sum(e2l * grad2) * dA)
    l2 = float(np.sqrt(np.sum(e2l * t_norm**2) * dA))
    return tau, energy, float(t_norm.max()), l2


def _rhs(f, W, samples):
    f.chart.check_points(samples)
    return evaluate(f, W, samples)[0]


def flow_step(f: GridImmersion, W: WeylStructure, state: FlowState, method="rk4") -> FlowState:
    """Advance one explicit step (Euler or RK4) and wrap periodic coordinates."""
    x, h = state.samples, state.dt
    if method == "euler":
        new = x + h * _rhs(f, W, x)
    elif method == "rk4":
        k1 = _rhs(f, W, x)
        k2 = _rhs(f, W, x + 0.5 * h * k1)
        k3 = _rhs(f, W, x + 0.5 * h * k2)
        k4 = _rhs(f, W, x + h * k3)
        new = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(new)):
        raise FlowDivergence("non-finite samples after step", state)
    f.chart.check_points(new)
    new = f.chart.wrap(new)
    _, energy, tinf, tl2 = evaluate(f, W, new)
    return FlowState(new, state.time + h, h, energy, tinf, tl2, state.step + 1)


def initial_state(f: GridImmersion, W: WeylStructure, dt=None, kappa=KAPPA, enforce_bound=True):
    bound = stability_bound(f.domain, kappa)
    dt = bound if dt is None else float(dt)
    if enforce_bound and dt > bound * (1 + 1e-12):
        raise StabilityBoundError(f"dt = {dt:.3e} exceeds the stability bound {bound:.3e}")
    samples = f.chart.wrap(f.samples)
    _, energy, tinf, tl2 = evaluate(f, W, samples)
    return FlowState(samples, 0.0, dt, energy, tinf, tl2)


@dataclass
class FlowResult:
    state: FlowState
    log: list
    status: str
    surface: GridImmersion = field(repr=False, default=None)


def run_flow(f: GridImmersion, W: WeylStructure, dt=None, max_steps=10_000, tol=1e-4,
             method="rk4", kappa=KAPPA, enforce_bound=True, monotone=True, growth_limit=10.0,
             log_every=1) -> FlowResult:
    """Flow until ||tau||_inf <= tol or ``max_steps``; aborts on divergence."""
    state = initial_state(f, W, dt, kappa, enforce_bound)
    log = [(0, 0.0, state.tau_inf, state.tau_l2, state.energy)]
    start = state.tau_inf
    # ||tau||_2 may wobble at round-off level once the residual is tiny
    slack = 1e-10 * max(state.tau_l2, 1e-300)
    while state.tau_inf > tol and state.step < max_steps:
        prev = state
        state = flow_step(f, W, state, method)
        if state.step % log_every == 0:
            log.append((state.step, state.time, state.tau_inf, state.tau_l2, state.energy))
        if state.tau_inf > growth_limit * max(start, 1e-300):
            raise FlowDivergence(
                f"residual grew from {start:.3e} to {state.tau_inf:.3e} at step {state.step}", state, log)
        if monotone and state.tau_l2 > prev.tau_l2 + slack:
            raise FlowDivergence(
                f"||tau||_2 increased from {prev.tau_l2:.6e} to {state.tau_l2:.6e} at step {state.step}",
                state, log)
    status = "converged" if state.tau_inf <= tol else "max_steps"
    return FlowResult(state, log, status, f.with_samples(state.samples, f.name))


def write_trajectory_csv(path, log):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for step, t, tinf, tl2, e in log:
            w.writerow([step, repr(float(t)), repr(float(tinf)), repr(float(tl2)), repr(float(e))])


def write_surface_csv(path, f: GridImmersion):
    U, V = f.domain.nodes()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("u_index", "v_index", "u", "v", "x1", "x2", "x3", "x4"))
        for i in range(f.domain.n):
            for j in range(f.domain.m):
                w.writerow([i, j, repr(float(U[i, j])), repr(float(V[i, j]))]
                           + [repr(float(x)) for x in f.samples[i, j]])


def richardson_order(f: GridImmersion, W: WeylStructure, T, method="rk4"):
    """Observed order from N = 1, 2, 4 steps over a fixed time T.

    Returns (order, ratio) with ratio = |y1 - y2| / |y2 - y4|.
    """
    ys = []
    for n in (1, 2, 4):
        state = FlowState(f.chart.wrap(f.samples), 0.0, T / n, 0.0, 0.0, 0.0)
        for _ in range(n):
            state = flow_step(f, W, state, method)
        ys.append(state.samples)
    d12 = np.abs(f.chart.wrap_difference(ys[0] - ys[1])).max()
    d24 = np.abs(f.chart.wrap_difference(ys[1] - ys[2])).max()
    ratio = d12 / d24
    return float(np.log2(ratio)), float(ratio)


def phase_align(samples, reference: GridImmersion, chart=None, x0=None):
    """Minimize the max node distance over domain translations (a, b) of the reference.

    The reference must be expression-backed so it can be evaluated off-grid.
    Returns (max_distance, (a, b)).
    """
    from . import expr as ex

    if not reference.expression_backed:
        raise ValueError("phase alignment needs an expression-backed reference")
    chart = chart or reference.chart
    uv = reference.uv()

    def dist(shift, reduce=np.max):
        pts = uv + np.asarray(shift)
        ref = np.stack([ex.eval_values(e, pts, ex.SURFACE_VARS) for e in reference.exprs], -1)
        d = chart.wrap_difference(samples - ref)
        g = chart.metric_values(samples)
        return float(reduce(np.sqrt(np.einsum("...i,...ij,...j->...", d, g, d))))

    hu, hv = reference.domain.spacing
    if x0 is None:
        cands = [(a * hu, b * hv) for a in range(-2, 3) for b in range(-2, 3)]
        x0 = min(cands, key=lambda s: dist(s, np.mean))
    res = optimize.minimize(lambda s: dist(s, np.mean), x0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    res = optimize.minimize(dist, res.x, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    return float(res.fun), (float(res.x[0]), float(res.x[1]))


__all__ = ["FlowState", "FlowResult", "FlowDivergence", "StabilityBoundError", "ChartDomainError",
           "flow_step", "run_flow", "initial_state", "stability_bound", "evaluate", "phase_align",
           "richardson_order", "write_trajectory_csv", "write_surface_csv", "replace"]
