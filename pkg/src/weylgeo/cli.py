"""Command-line front end: ``weylgeo <verify|surface|twistor|flow> --scenario FILE``.

Exit codes: 0 all checks pass, 1 a check failed (or flow hit max steps),
2 configuration error, 3 numerical domain error, 4 flow divergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import catalog as cat
from . import expr as ex
from .flow import (FlowDivergence, StabilityBoundError, phase_align, run_flow, write_surface_csv,
                   write_trajectory_csv)
from .geom import ChartDomainError, ChartedManifold4, NonSPDMetricError
from .hermitian import (AlmostHermitianStructure, IncompatibleStructureError, canonical_weyl,
                        d_D_omega_residual, identity_vectors, lee_identity_residual, nijenhuis,
                        verify_identity_dwJN, verify_identity_weylJN)
from .surface import GridImmersion, RectDomain, TorusDomain, surface_diagnostics, write_surface_csv as write_nodes_csv
from .twistor import (IntegralityError, NonIsolatedZerosError, NotConformalError, holomorphicity_residual,
                      kahler_of, surface_J, twistor_lift, webster_report)
from .weyl import WeylStructure, damped_quadratic_gauge, gauge_transform, metricity_defect, weyl_connection

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_DIVERGE = 0, 1, 2, 3, 4

DEFAULT_TOLERANCES = {
    "metricity": 1e-8,
    "gauge": 1e-8,
    "lee": 1e-8,
    "identity": 1e-7,
    "dD_omega": 1e-8,
    "antilinearity": 1e-9,
    "weyl_minimal": 1e-7,
    "minimal": 1e-6,
    "conformal": 1e-8,
    "holomorphic": 1e-7,
    "lift": 1e-9,
    "flow": 1e-4,
    "alignment": 1e-3,
}
SCENARIO_KEYS = {"name", "manifold", "manifold_params", "weyl", "surface", "resolution", "tolerances",
                 "seed", "samples", "expect", "flow", "reference", "threshold", "outputs"}
CHART_KEYS = {"name", "metric", "J", "alpha", "periods", "bounds", "orientation", "sample_box"}
SURFACE_KEYS = {"name", "components", "domain", "lam"}
DOMAIN_KEYS = {"type", "periods", "u_range", "v_range"}
FLOW_KEYS = {"dt", "kappa", "max_steps", "method", "enforce_stability_bound", "monotone"}
EXPECT_KEYS = {"weyl_minimal", "minimal", "conformal", "J_holomorphic", "lagrangian"}
OUTPUT_KEYS = {"report", "csv", "trajectory", "final_surface"}


class ConfigError(ValueError):
    pass


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")


def _expr(x, where):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return ex.Num(float(x))
    if not isinstance(x, str):
        raise ConfigError(f"{where}: expected an expression string or number")
    try:
        return ex.parse(x)
    except ex.ExprSyntaxError as err:
        raise ConfigError(f"{where}: {err}") from err
    except ex.ExprNameError as err:
        raise ConfigError(f"{where}: {err}") from err


@dataclass
class Scenario:
    name: str
    entry: cat.CatalogEntry | None
    chart: ChartedManifold4
    hermitian: AlmostHermitianStructure | None
    weyl: WeylStructure
    surface: GridImmersion | None
    reference: GridImmersion | None
    resolution: int
    tolerances: dict
    seed: int
    samples: int
    expect: dict
    flow: dict
    threshold: float
    outputs: dict = field(default_factory=dict)


def _inline_chart(spec):
    _check_keys(spec, CHART_KEYS, "manifold")
    if "metric" not in spec:
        raise ConfigError("manifold: inline charts need a 'metric'")
    metric = spec["metric"]
    if not (isinstance(metric, list) and len(metric) == 4 and all(isinstance(r, list) and len(r) == 4 for r in metric)):
        raise ConfigError("manifold.metric: expected a 4x4 array")
    M = [[_expr(metric[i][j], f"manifold.metric[{i}][{j}]") for j in range(4)] for i in range(4)]
    J = None
    if spec.get("J") is not None:
        Jm = spec["J"]
        if not (isinstance(Jm, list) and len(Jm) == 4 and all(isinstance(r, list) and len(r) == 4 for r in Jm)):
            raise ConfigError("manifold.J: expected a 4x4 array")
        J = [[_expr(Jm[i][j], f"manifold.J[{i}][{j}]") for j in range(4)] for i in range(4)]
    alpha = None
    if spec.get("alpha") is not None:
        if not (isinstance(spec["alpha"], list) and len(spec["alpha"]) == 4):
            raise ConfigError("manifold.alpha: expected 4 expressions")
        alpha = [_expr(a, f"manifold.alpha[{k}]") for k, a in enumerate(spec["alpha"])]
    periods = tuple(spec.get("periods", [None] * 4))
    bounds = tuple(None if b is None else tuple(b) for b in spec.get("bounds", [None] * 4))
    if len(periods) != 4 or len(bounds) != 4:
        raise ConfigError("manifold: periods and bounds need 4 entries")
    try:
        return ChartedManifold4(spec.get("name", "inline"), M, periods=periods, bounds=bounds, alpha=alpha,
                                J=J, orientation=int(spec.get("orientation", 1)),
                                sample_box=None if spec.get("sample_box") is None else tuple(map(tuple, spec["sample_box"])))
    except ValueError as err:
        raise ConfigError(f"manifold: {err}") from err


def _inline_surface(spec, chart, n, where="surface"):
    _check_keys(spec, SURFACE_KEYS, where)
    comps = spec.get("components")
    if not (isinstance(comps, list) and len(comps) == 4):
        raise ConfigError(f"{where}.components: expected 4 expressions")
    exprs = tuple(_expr(c, f"{where}.components[{k}]") for k, c in enumerate(comps))
    dom = spec.get("domain", {"type": "torus"})
    _check_keys(dom, DOMAIN_KEYS, f"{where}.domain")
    kind = dom.get("type", "torus")
    if kind == "torus":
        periods = tuple(float(p) for p in dom.get("periods", (2 * math.pi, 2 * math.pi)))
        domain = TorusDomain(n, n, periods)
    elif kind == "rect":
        try:
            domain = RectDomain(tuple(dom["u_range"]), tuple(dom["v_range"]), n, n)
        except KeyError as err:
            raise ConfigError(f"{where}.domain: missing {err}") from err
    else:
        raise ConfigError(f"{where}.domain.type must be 'torus' or 'rect'")
    lam = _expr(spec.get("lam", 0.0), f"{where}.lam")
    for e in exprs + (lam,):
        extra = ex.variables_of(e) - set(ex.SURFACE_VARS)
        if extra:
            raise ConfigError(f"{where}: surface expressions may only use u, v (found {sorted(extra)})")
    return GridImmersion(domain, chart, exprs, lam=lam, name=spec.get("name", "inline"))


def load_scenario(path, resolution=None, seed=None) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read scenario: {err}") from err
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"JSON parse error at line {err.lineno}, column {err.colno} "
                          f"(offset {err.pos}): {err.msg}") from err
    return build_scenario(raw, resolution, seed)


def build_scenario(raw, resolution=None, seed=None) -> Scenario:
    _check_keys(raw, SCENARIO_KEYS, "scenario")
    n = int(resolution if resolution is not None else raw.get("resolution", 64))
    if n < 16:
        raise ConfigError(f"resolution must be >= 16 (got {n})")
    seed = int(seed if seed is not None else raw.get("seed", 0))
    tol = dict(DEFAULT_TOLERANCES)
    user_tol = raw.get("tolerances", {})
    _check_keys(user_tol, set(DEFAULT_TOLERANCES), "tolerances")
    for k, v in user_tol.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise ConfigError(f"tolerances.{k} must be a positive number")
        tol[k] = float(v)
    man = raw.get("manifold")
    if man is None:
        raise ConfigError("scenario: 'manifold' is required")
    params = raw.get("manifold_params", {})
    if not isinstance(params, dict):
        raise ConfigError("manifold_params: expected an object")
    entry = None
    if isinstance(man, str):
        try:
            entry = cat.get_entry(man, **params)
        except KeyError as err:
            raise ConfigError(str(err.args[0])) from err
        except TypeError as err:
            raise ConfigError(f"manifold_params: {err}") from err
        chart, H = entry.chart, entry.hermitian
    else:
        chart = _inline_chart(man)
        H = AlmostHermitianStructure(chart) if chart.J is not None else None
    wspec = raw.get("weyl")
    if wspec is None:
        if entry is not None and entry.weyl is not None:
            W = entry.weyl
        elif H is not None:
            W = canonical_weyl(H)
        else:
            W = WeylStructure(chart)
    elif wspec == "canonical":
        if H is None:
            raise ConfigError("weyl: 'canonical' needs an almost-complex structure")
        W = canonical_weyl(H)
    elif isinstance(wspec, list) and len(wspec) == 4:
        W = WeylStructure(chart, [_expr(a, f"weyl[{k}]") for k, a in enumerate(wspec)], provenance="scenario")
    else:
        raise ConfigError("weyl: expected 'canonical' or a list of 4 expressions")

    def surface_from(spec, where):
        if spec is None:
            return None
        if isinstance(spec, str):
            if entry is None or spec not in entry.surfaces:
                known = sorted(entry.surfaces) if entry else []
                raise ConfigError(f"{where}: unknown surface {spec!r}; known: {known}")
            return entry.surface(spec, n)
        return _inline_surface(spec, chart, n, where)

    surf = surface_from(raw.get("surface"), "surface")
    ref = surface_from(raw.get("reference"), "reference")
    for f in (surf, ref):
        if f is not None:
            f.chart.check_points(f.samples)
    expect = raw.get("expect")
    if expect is None:
        expect = {}
        if isinstance(raw.get("surface"), str) and entry is not None:
            expect = {k: v for k, v in entry.surfaces[raw["surface"]].properties.items() if k in EXPECT_KEYS}
    _check_keys(expect, EXPECT_KEYS, "expect")
    flow = raw.get("flow", {})
    _check_keys(flow, FLOW_KEYS, "flow")
    outputs = raw.get("outputs", {})
    _check_keys(outputs, OUTPUT_KEYS, "outputs")
    samples = int(raw.get("samples", 100))
    if samples < 1:
        raise ConfigError("samples must be positive")
    threshold = float(raw.get("threshold", 1e-5))
    if not threshold > 0:
        raise ConfigError("threshold must be positive")
    return Scenario(raw.get("name", chart.name), entry, chart, H, W, surf, ref, n, tol, seed, samples,
                    expect, flow, threshold, outputs)


# -- commands ---------------------------------------------------------------

def _check(value, tol):
    value = float(value)
    return {"max_residual": value, "tolerance": tol, "pass": bool(value <= tol)}


def _nanmax(x):
    x = np.asarray(x, dtype=float)
    return float(np.nanmax(x)) if np.any(np.isfinite(x)) else float("nan")


def cmd_verify(sc: Scenario):
    rng = np.random.default_rng(sc.seed)
    pts = sc.chart.random_points(rng, sc.samples)
    checks = {"metricity": _check(np.abs(metricity_defect(sc.weyl, pts)).max(), sc.tolerances["metricity"])}
    G0 = weyl_connection(sc.weyl, pts)
    worst = 0.0
    for _ in range(3):
        u = damped_quadratic_gauge(rng, 0.2)
        worst = max(worst, float(np.abs(weyl_connection(gauge_transform(sc.weyl, u), pts) - G0).max()))
    checks["gauge_invariance"] = _check(worst, sc.tolerances["gauge"])
    if sc.hermitian is not None:
        H = sc.hermitian
        checks["lee_identity"] = _check(lee_identity_residual(H, pts).max(), sc.tolerances["lee"])
        vecs = identity_vectors(rng)
        r1 = r2 = anti = 0.0
        J = H.J_values(pts)
        for k in range(len(vecs)):
            X, Y, Z = vecs[k], vecs[(k + 1) % len(vecs)], vecs[(k + 2) % len(vecs)]
            r1 = max(r1, float(np.abs(verify_identity_dwJN(H, pts, X, Y, Z)).max()))
            r2 = max(r2, float(np.abs(verify_identity_weylJN(H, pts, X, Y, Z, sc.weyl)).max()))
            JX = np.einsum("...ij,j->...i", J, X)
            N = nijenhuis(H, pts, X, Y)
            anti = max(anti, float(np.abs(nijenhuis(H, pts, JX, Y) + np.einsum("...ij,...j->...i", J, N)).max()))
        checks["identity_dwJN"] = _check(r1, sc.tolerances["identity"])
        checks["identity_weylJN"] = _check(r2, sc.tolerances["identity"])
        checks["nijenhuis_antilinearity"] = _check(anti, sc.tolerances["antilinearity"])
        checks["dD_omega"] = _check(d_D_omega_residual(H, sc.weyl, pts).max(), sc.tolerances["dD_omega"])
    ok = all(c["pass"] for c in checks.values())
    return {"command": "verify", "checks": checks, "pass": ok}, (EXIT_OK if ok else EXIT_CHECK), {}


def _need_surface(sc):
    if sc.surface is None:
        raise ConfigError("this command needs a 'surface'")
    return sc.surface


def cmd_surface(sc: Scenario):
    f = _need_surface(sc)
    W = sc.weyl if sc.weyl.chart is f.chart else WeylStructure(f.chart, sc.weyl.alpha)
    d = surface_diagnostics(f, W)
    v = d["valid"]
    summary = {
        "max_conf_defect": float(np.abs(d["conf"])[v].max()),
        "max_tau": _nanmax(d["tau_norm"][v]),
        "max_HD": _nanmax(d["HD_norm"][v]),
        "max_Hg": _nanmax(d["Hg_norm"][v]),
        "min_HD": float(np.nanmin(d["HD_norm"][v])),
    }
    checks = {}
    if "weyl_minimal" in sc.expect:
        val = summary["max_HD"] if sc.expect["weyl_minimal"] else -summary["min_HD"]
        tol = sc.tolerances["weyl_minimal"] if sc.expect["weyl_minimal"] else -1e-3
        checks["weyl_minimal"] = _check(val, tol)
        checks["weyl_minimal"]["expected"] = bool(sc.expect["weyl_minimal"])
    if sc.expect.get("minimal"):
        checks["minimal"] = _check(summary["max_Hg"], sc.tolerances["minimal"])
    if sc.expect.get("conformal"):
        checks["conformal"] = _check(summary["max_conf_defect"], sc.tolerances["conformal"])
    ok = all(c["pass"] for c in checks.values())
    report = {"command": "surface", "surface": f.name, "summary": summary, "checks": checks, "pass": ok}
    return report, (EXIT_OK if ok else EXIT_CHECK), {"csv": ("surface_nodes.csv", lambda p: write_nodes_csv(p, d))}


def cmd_twistor(sc: Scenario):
    f = _need_surface(sc)
    W = sc.weyl
    jet = f.jets()
    g = f.chart.metric_values(jet.f)
    res = {s: _nanmax(holomorphicity_residual(f, W, s)) for s in (1, -1)}
    report = {"command": "twistor", "surface": f.name,
              "holomorphicity_residual": {"plus": res[1], "minus": res[-1]}}
    checks = {}
    try:
        pair = surface_J(jet, g, f.chart.orientation)
        gap = 0.0
        for s in (1, -1):
            lift = twistor_lift(jet, g, s, f.chart.orientation, sc.tolerances["conformal"])
            diff = np.abs(lift.sigma - kahler_of(pair.get(s), g))
            if jet.valid is not None:
                diff = diff[jet.valid]
            gap = max(gap, float(diff.max()))
        checks["lift_consistency"] = _check(gap, sc.tolerances["lift"])
    except NotConformalError as err:
        report["lift"] = f"not conformal: {err}"
    if "weyl_minimal" in sc.expect:
        worst = max(res.values())
        if sc.expect["weyl_minimal"]:
            checks["holomorphic_lifts"] = _check(worst, sc.tolerances["holomorphic"])
        else:
            checks["holomorphic_lifts"] = {"min_residual": worst, "threshold": 1e-2, "pass": bool(worst >= 1e-2),
                                           "expected": False}
    if sc.hermitian is not None and f.domain.periodic:
        try:
            rep = webster_report(f, sc.hermitian, W, sc.threshold)
            report["webster"] = json.loads(rep.to_json())
            if rep.label == "ok":
                checks["web1"] = {"residual": rep.web1_residual, "pass": rep.web1_residual == 0}
        except (IntegralityError, NonIsolatedZerosError) as err:
            report["webster"] = {"error": str(err)}
    ok = all(c["pass"] for c in checks.values())
    report["checks"] = checks
    report["pass"] = ok
    return report, (EXIT_OK if ok else EXIT_CHECK), {}


def cmd_flow(sc: Scenario):
    f = _need_surface(sc)
    fl = sc.flow
    extra = {}
    try:
        result = run_flow(f, sc.weyl, dt=fl.get("dt"), max_steps=int(fl.get("max_steps", 10_000)),
                          tol=sc.tolerances["flow"], method=fl.get("method", "rk4"),
                          kappa=float(fl.get("kappa", 0.2)),
                          enforce_bound=bool(fl.get("enforce_stability_bound", True)),
                          monotone=bool(fl.get("monotone", True)))
    except StabilityBoundError as err:
        raise ConfigError(str(err)) from err
    except FlowDivergence as err:
        report = {"command": "flow", "status": "diverged", "message": str(err), "pass": False,
                  "steps": err.state.step if err.state else 0}
        log = err.log
        extra["trajectory"] = ("flow_trajectory.csv", lambda p: write_trajectory_csv(p, log))
        return report, EXIT_DIVERGE, extra
    st = result.state
    report = {"command": "flow", "status": result.status, "steps": st.step, "time": st.time, "dt": st.dt,
              "tau_inf": st.tau_inf, "tau_l2": st.tau_l2, "energy": st.energy}
    ok = result.status == "converged"
    if sc.reference is not None:
        dist, shift = phase_align(st.samples, sc.reference)
        report["alignment"] = {"max_distance": dist, "shift": list(shift),
                               "pass": bool(dist <= sc.tolerances["alignment"])}
        ok = ok and report["alignment"]["pass"]
    report["pass"] = ok
    extra["trajectory"] = ("flow_trajectory.csv", lambda p: write_trajectory_csv(p, result.log))
    extra["final_surface"] = ("flow_surface.csv", lambda p: write_surface_csv(p, result.surface))
    return report, (EXIT_OK if ok else EXIT_CHECK), extra


COMMANDS = {"verify": cmd_verify, "surface": cmd_surface, "twistor": cmd_twistor, "flow": cmd_flow}


def _clean(obj):
    """Make a report JSON-safe (no NaN/inf, numpy scalars converted)."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def run(command, scenario_path, out_dir=".", resolution=None, seed=None, stream=sys.stdout):
    try:
        sc = load_scenario(scenario_path, resolution, seed)
        report, code, files = COMMANDS[command](sc)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (ex.ExprDomainError, NonSPDMetricError, ChartDomainError, IncompatibleStructureError,
            np.linalg.LinAlgError, FloatingPointError) as err:
        print(f"numerical domain error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    report = {"schema_version": SCHEMA_VERSION, "scenario": sc.name, "seed": sc.seed,
              "resolution": sc.resolution, **report}
    os.makedirs(out_dir, exist_ok=True)
    names = {"report": f"{command}_report.json"}
    names.update({k: v[0] for k, v in files.items()})
    names.update(sc.outputs)
    for key, (_, writer) in files.items():
        writer(os.path.join(out_dir, names[key]))
    text = json.dumps(_clean(report), sort_keys=True, indent=2)
    with open(os.path.join(out_dir, names["report"]), "w") as fh:
        fh.write(text + "\n")
    status = "PASS" if report.get("pass") else "FAIL"
    print(f"{command}: {status} (exit {code}) -> {os.path.join(out_dir, names['report'])}", file=stream)
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(prog="weylgeo", description="Weyl-geometry numerical workbench")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--resolution", type=int, default=None, help="grid resolution (>= 16)")
    parser.add_argument("--seed", type=int, default=None, help="seed for sampled test points")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return run(args.command, args.scenario, args.out, args.resolution, args.seed)


if __name__ == "__main__":
    sys.exit(main())
