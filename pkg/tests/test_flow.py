import csv

import numpy as np
import pytest

from weylgeo import flow as fl
from weylgeo.catalog import get_entry
from weylgeo.geom import ChartedManifold4, flat_metric_exprs
from weylgeo.surface import GridImmersion, TorusDomain
from weylgeo.weyl import WeylStructure, gauge_transform


@pytest.fixture(scope="module")
def hopf():
    return get_entry("hopf_surface")


def perturbed_clifford(hopf, n=32, amp=0.05):
    f = hopf.surface("clifford_torus", n)
    U, V = f.domain.nodes()
    bump = amp * np.sin(U) * np.cos(V / 2)
    return f.with_samples(f.samples + bump[..., None] * [0, 1, 0, 0], "perturbed")


def test_fixed_point_unchanged(hopf):
    f = hopf.surface("clifford_torus", 32)
    state = fl.initial_state(f, hopf.weyl)
    for _ in range(3):
        new = fl.flow_step(f, hopf.weyl, state)
        assert np.abs(f.chart.wrap_difference(new.samples - state.samples)).max() <= 1e-12
        state = new


def test_linear_map_stationary():
    chart = ChartedManifold4("flat", flat_metric_exprs(), periods=(2 * np.pi,) * 4)
    W = WeylStructure(chart, [0.0] * 4)
    f = GridImmersion(TorusDomain(16, 16), chart, ("u", "v", "u + v", 0.0))
    state = fl.initial_state(f, W)
    new = fl.flow_step(f, W, state, "euler")
    assert np.abs(chart.wrap_difference(new.samples - state.samples)).max() <= 1e-12


def test_richardson_order_four(hopf):
    f = perturbed_clifford(hopf, 16, 0.2)
    order, _ = fl.richardson_order(f, hopf.weyl, T=0.05)
    assert order == pytest.approx(4.0, rel=0.2)
    order_e, _ = fl.richardson_order(f, hopf.weyl, T=0.05, method="euler")
    assert order_e == pytest.approx(1.0, rel=0.2)


@pytest.mark.parametrize("name", ["clifford_torus", "fiber_torus"])
def test_weyl_minimal_surfaces_stay_fixed(name, hopf):
    f = hopf.surface(name, 32)
    res = fl.run_flow(f, hopf.weyl, max_steps=20, tol=0.0, monotone=False)
    assert max(row[2] for row in res.log) <= 1e-8
    assert np.abs(f.chart.wrap_difference(res.state.samples - f.samples)).max() <= 1e-8


def test_great_sphere_drifts_without_converging(hopf):
    f = hopf.surface("great_sphere", 24)
    res = fl.run_flow(f, hopf.weyl, max_steps=300, tol=1e-4, monotone=False, log_every=100)
    assert res.status == "max_steps"
    assert res.state.tau_inf > 0.1
    drift = res.state.samples[12, 12, 0] - f.samples[12, 12, 0]
    assert drift > 0.05
    # boundary data is held fixed
    assert np.array_equal(res.state.samples[0], f.samples[0])


def test_stability_bound_enforced(hopf):
    f = hopf.surface("clifford_torus", 32)
    bound = fl.stability_bound(f.domain)
    assert bound == pytest.approx(0.2 * min(f.domain.spacing) ** 2)
    with pytest.raises(fl.StabilityBoundError):
        fl.run_flow(f, hopf.weyl, dt=2 * bound)


def test_unstable_step_aborts(hopf):
    f = perturbed_clifford(hopf)
    with pytest.raises(fl.FlowDivergence) as err:
        fl.run_flow(f, hopf.weyl, dt=0.2, method="euler", enforce_bound=False, max_steps=200)
    assert err.value.log and err.value.state is not None


def test_short_flow_monotone_and_decreasing(hopf):
    f = perturbed_clifford(hopf)
    res = fl.run_flow(f, hopf.weyl, max_steps=50, tol=0.0)
    l2 = [row[3] for row in res.log]
    assert all(b <= a + 1e-10 * l2[0] for a, b in zip(l2, l2[1:]))
    assert l2[-1] < l2[0]


def test_flow_commutes_with_gauge(hopf):
    """tau depends only on nabla^D and lam, so the flow is the same in every gauge."""
    f = perturbed_clifford(hopf, 16)
    W2 = gauge_transform(hopf.weyl, "0.1 + 0.2*sin(x1)*cos(x2)")
    f2 = GridImmersion(f.domain, W2.chart, None, f.samples, f.lam, f.name)
    s1 = fl.initial_state(f, hopf.weyl, dt=1e-3)
    s2 = fl.initial_state(f2, W2, dt=1e-3)
    for _ in range(5):
        s1 = fl.flow_step(f, hopf.weyl, s1)
        s2 = fl.flow_step(f2, W2, s2)
    assert np.abs(f.chart.wrap_difference(s1.samples - s2.samples)).max() <= 1e-12
    assert s1.energy != pytest.approx(s2.energy)  # the energy is gauge dependent


def test_csv_outputs(tmp_path, hopf):
    f = perturbed_clifford(hopf, 16)
    res = fl.run_flow(f, hopf.weyl, max_steps=5, tol=0.0)
    fl.write_trajectory_csv(tmp_path / "t.csv", res.log)
    fl.write_surface_csv(tmp_path / "s.csv", res.surface)
    t = list(csv.reader(open(tmp_path / "t.csv")))
    s = list(csv.reader(open(tmp_path / "s.csv")))
    assert tuple(t[0]) == fl.TRAJECTORY_COLUMNS and len(t) == 7
    assert s[0][:2] == ["u_index", "v_index"] and len(s) == 16 * 16 + 1


def test_phase_align_recovers_shift(hopf):
    f = hopf.surface("clifford_torus", 16)
    shifted = GridImmersion(f.domain, f.chart, ("u + 0.013", np.pi / 4, "(v - 0.02)/2", "-(v - 0.02)/2"))
    dist, (a, b) = fl.phase_align(shifted.samples, f)
    assert dist <= 1e-7
    assert a == pytest.approx(0.013, abs=1e-6) and b == pytest.approx(-0.02, abs=1e-6)
