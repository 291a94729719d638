import csv
import io

import numpy as np
import pytest

from liehamilton.catalog import get_system
from liehamilton.errors import CoefficientDomain, DomainViolation, GridMismatch, NotACasimir
from liehamilton.geom import VectorField, hamiltonian_vf
from liehamilton.lieham import LHSystem
from liehamilton.numint import (
    CONSERVATION_TOL,
    FAILURE_TOL,
    IntegratorConfig,
    Trajectory,
    compare_trajectories,
    integrate,
    leaf_check,
    monitor,
    solve_rk4,
)
from liehamilton.symexpr import CoeffFn, Expr, parse_expr

SW = get_system("sw")
KS = get_system("ks2")
EULER = get_system("euler_so3")
GY = get_system("gaudin_counterexample", field="Y")
SW_MOVING = {"x1": 1.0, "x2": 1.5, "p1": 0.2, "p2": -0.1}


def zero_system():
    sys = EULER
    return LHSystem(sys.chart, sys.poisson, ("Z",), (VectorField(sys.chart),), (CoeffFn("1"),))


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(1.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(0.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        IntegratorConfig(0.0, 1.0, 0.1, record_every=0)
    assert IntegratorConfig(0.0, 10.0, 1e-3).steps == 10000


def test_zero_field_is_constant():
    sys = zero_system()
    tr = integrate(sys, {"s1": 1.0, "s2": -2.0, "s3": 0.5}, IntegratorConfig(0, 1, 0.1))
    assert np.all(tr.states == tr.states[0])
    assert tr.error_estimate == 0.0
    rep = monitor(sys, tr, [parse_expr("s1*s2 + s3", sys.chart)])
    assert rep.drifts[0].max_abs == 0.0
    assert leaf_check(sys, tr, [parse_expr("s1^2 + s2^2 + s3^2", sys.chart)]).max_rel == 0.0


def test_grid_and_final_time():
    tr = integrate(KS, {"x": 1.0, "p": 1.0}, IntegratorConfig(0.0, 1.0, 0.1, record_every=4))
    assert tr.times[0] == 0.0 and tr.times[-1] == 1.0
    assert np.all(np.diff(tr.times) > 0)
    assert tr.final["c0"] == 1.0


def test_sw_integral_conserved():
    tr = integrate(SW, SW_MOVING, IntegratorConfig(0.0, 10.0, 1e-3))
    rep = monitor(SW, tr, SW.constants_of_motion)
    assert rep.ok
    assert rep.max_rel < CONSERVATION_TOL


def test_monitor_constant_function():
    tr = integrate(SW, SW_MOVING, IntegratorConfig(0.0, 1.0, 1e-2))
    rep = monitor(SW, tr, [Expr.const(SW.chart, 3)])
    assert rep.drifts[0].max_abs == 0.0


def test_ks_h2_drifts():
    tr = integrate(KS, {"x": 1.0, "p": 1.0}, IntegratorConfig(0.0, 1.0, 1e-3))
    assert np.all(tr.states[:, 0] > 0)
    rep = monitor(KS, tr, [KS.hamiltonians[1]])
    assert rep.max_rel > FAILURE_TOL
    assert not rep.ok


def test_euler_casimir_confined():
    tr = integrate(EULER, {"s1": 1.0, "s2": 2.0, "s3": 2.0}, IntegratorConfig(0.0, 10.0, 1e-3))
    assert leaf_check(EULER, tr, EULER.constants_of_motion).max_rel < CONSERVATION_TOL


def test_gaudin_y_casimir_confined():
    tr = integrate(GY, {"s1": 1.0, "s2": 0.5, "s3": 0.3}, IntegratorConfig(0.0, 2.0, 1e-3))
    assert leaf_check(GY, tr, [parse_expr("s1^2 - s2^2 + s3^2", GY.chart)]).ok
    assert monitor(GY, tr, GY.constants_of_motion).ok


def test_leaf_check_rejects_non_casimir():
    tr = integrate(GY, {"s1": 1.0, "s2": 0.5, "s3": 0.3}, IntegratorConfig(0.0, 0.1, 1e-2))
    with pytest.raises(NotACasimir):
        leaf_check(GY, tr, [parse_expr("s1", GY.chart)])


def test_symbolic_and_numeric_layers_agree():
    tr = integrate(SW, SW_MOVING, IntegratorConfig(0.0, 10.0, 1e-3))
    certified = SW.constants_of_motion[0]
    refuted = SW.hamiltonians[2]
    assert monitor(SW, tr, [certified]).max_rel < CONSERVATION_TOL
    assert monitor(SW, tr, [refuted]).max_rel > FAILURE_TOL


@pytest.mark.parametrize("dt", [0.1, 0.05])
def test_rk4_order(dt):
    cfg = lambda h: IntegratorConfig(0.0, 2.0, h)  # noqa: E731
    ref = solve_rk4(SW, SW_MOVING, cfg(dt / 4)).states[-1]
    e1 = np.linalg.norm(solve_rk4(SW, SW_MOVING, cfg(dt)).states[-1] - ref)
    e2 = np.linalg.norm(solve_rk4(SW, SW_MOVING, cfg(dt / 2)).states[-1] - ref)
    assert 12 <= e1 / e2 <= 20


def test_error_estimate_tracks_true_error():
    cfg = IntegratorConfig(0.0, 2.0, 0.05)
    tr = integrate(SW, SW_MOVING, cfg)
    ref = solve_rk4(SW, SW_MOVING, IntegratorConfig(0.0, 2.0, 0.005)).states[-1]
    true_err = np.linalg.norm(tr.states[-1] - ref)
    assert 0.2 < tr.error_estimate / true_err < 5


def test_domain_exit_reports_time():
    with pytest.raises(DomainViolation) as info:
        integrate(KS, {"x": 1.0, "p": -5.0}, IntegratorConfig(0.0, 1.0, 1.0))
    assert info.value.time == 1.0


def test_negative_domain_exit():
    ric = get_system("riccati2")
    push = LHSystem(ric.chart, ric.poisson, ("P",), (VectorField(ric.chart, {"p": "1"}),), (CoeffFn("1"),))
    with pytest.raises(DomainViolation) as info:
        integrate(push, {"x": 0.0, "p": -0.5}, IntegratorConfig(0.0, 1.0, 0.25))
    assert info.value.time == 0.5


def test_initial_point_outside_domain():
    with pytest.raises(DomainViolation):
        integrate(KS, {"x": 0.0, "p": 1.0}, IntegratorConfig(0.0, 1.0, 0.1))


def test_coefficient_domain():
    sys = get_system("ks2", b1="1/t")
    with pytest.raises(CoefficientDomain) as info:
        integrate(sys, {"x": 1.0, "p": 1.0}, IntegratorConfig(0.0, 1.0, 0.1))
    assert info.value.time == 0.0


# -- comparison --------------------------------------------------------------------

def test_compare_with_itself():
    tr = integrate(SW, SW_MOVING, IntegratorConfig(0.0, 1.0, 1e-2))
    assert compare_trajectories(tr, tr) == 0.0


def test_compare_interpolates():
    times = np.linspace(0, 1, 11)
    a = Trajectory(("y",), times, times[:, None] * 2)
    fine = np.linspace(0, 1, 101)
    b = Trajectory(("y",), fine, fine[:, None] * 2)
    assert compare_trajectories(a, b) == pytest.approx(0.0, abs=1e-15)
    short = Trajectory(("y",), fine[:50], fine[:50, None])
    with pytest.raises(GridMismatch):
        compare_trajectories(a, short)
    two = Trajectory(("y", "z"), times, np.zeros((11, 2)))
    with pytest.raises(GridMismatch):
        compare_trajectories(a, two)


def test_compare_with_map():
    tr = integrate(KS, {"x": 1.0, "p": 1.0}, IntegratorConfig(0.0, 0.5, 1e-2))
    xp = [parse_expr("x*p", KS.chart)]
    mapped = Trajectory(("h",), tr.times, tr.states[:, 0] * tr.states[:, 1])
    assert compare_trajectories(tr, mapped, xp) == pytest.approx(0.0, abs=1e-14)


def test_casimir_shift_invariance():
    x0 = {"s1": 1.0, "s2": 2.0, "s3": 2.0}
    cfg = IntegratorConfig(0.0, 5.0, 1e-2)
    C = EULER.constants_of_motion[0]
    shifted_h = tuple(h + C for h in EULER.hamiltonians)
    same_fields = EULER.with_hamiltonians(shifted_h)
    a = integrate(EULER, x0, cfg)
    b = integrate(same_fields, x0, cfg)
    assert np.array_equal(a.states, b.states)
    rederived = LHSystem(
        EULER.chart, EULER.poisson, EULER.names,
        tuple(hamiltonian_vf(EULER.poisson, h) for h in shifted_h), EULER.coefficients, shifted_h,
    )
    c = integrate(rederived, x0, cfg)
    assert compare_trajectories(a, c) < 1e-12


# -- CSV -----------------------------------------------------------------------------

def test_csv_format():
    tr = integrate(KS, {"x": 1.0, "p": 1.0}, IntegratorConfig(0.0, 0.3, 0.1))
    text = tr.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "x", "p"]
    assert len(rows) == len(tr) + 1
    assert float(rows[1][0]) == 0.0
    for row, state in zip(rows[1:], tr.states):
        assert [float(v) for v in row[1:]] == state.tolist()
    assert [float(r[0]) for r in rows[1:]] == tr.times.tolist()
