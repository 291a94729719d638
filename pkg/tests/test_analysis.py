import numpy as np
import pytest

from liehamilton.analysis import (
    constant_of_motion_check,
    integrals_poisson_closed,
    linearize,
    poisson_commute_report,
    symmetry_check,
    symmetry_from_constant,
)
from liehamilton.catalog import get_system
from liehamilton.errors import (
    DimensionMismatch,
    NotAConstant,
    NotStrongComomentum,
)
from liehamilton.geom import (
    VectorField,
    apply_vf,
    exterior_d,
    find_hamiltonian,
    hat_lambda,
    jacobi_check,
    lie_bracket_vf,
    poisson_bracket,
)
from liehamilton.liealg import closure_vf, jacobi_identity_check, perfect_check
from liehamilton.numint import IntegratorConfig, linearization_oracle
from liehamilton.symexpr import Expr, parse_expr

SW = get_system("sw")
KS = get_system("ks2")
GX = get_system("gaudin_counterexample", field="X")
GY = get_system("gaudin_counterexample", field="Y")
AFF = get_system("affine_linearizable")
I_SW = SW.constants_of_motion[0]

Y_DISPLAYED = {
    "x1": "2*(x1*p2 - p1*x2)*x2",
    "x2": "-2*(x1*p2 - p1*x2)*x1",
    "p1": "2*((x1*p2 - p1*x2)*p2 + k*(x1^4 - x2^4)/(x1^3*x2^2))",
    "p2": "-2*((x1*p2 - p1*x2)*p1 + k*(x1^4 - x2^4)/(x2^3*x1^2))",
}


def S(text, sys):
    return parse_expr(text, sys.chart)


# -- constants of motion -------------------------------------------------------

def test_sw_integral_is_constant():
    assert constant_of_motion_check(SW, I_SW)


def test_gaudin_first_integrals():
    assert constant_of_motion_check(GX, S("s1", GX))
    assert constant_of_motion_check(GX, S("s2", GX))


def test_ks_h3_is_not_constant():
    res = constant_of_motion_check(KS, KS.hamiltonians[2])
    assert not res
    name, value = res.witness
    assert name == "X1"
    assert value == S("2*p*x", KS)
    assert value == poisson_bracket(KS.poisson, KS.hamiltonians[2], KS.hamiltonians[0])


def test_commute_report_sw():
    report = poisson_commute_report(SW, I_SW)
    assert len(report) == 3
    assert all(entry.zero for entry in report)


def test_commute_report_gaudin():
    (entry,) = poisson_commute_report(GY, S("s2", GY))
    assert entry.function == S("s1", GY)
    assert entry.bracket == S("s3", GY)
    assert poisson_bracket(GY.poisson, S("s1", GY), S("s2", GY)) == S("-s3", GY)


def test_commute_report_casimir():
    C = S("s1^2 - s2^2 + s3^2", GY)
    assert all(entry.zero for entry in poisson_commute_report(GY, C))


@pytest.mark.parametrize("text", ["s1", "s2", "s3", "s2^2 - s3^2", "s1*s2", "s1^2 - s2^2 + s3^2"])
def test_commute_report_matches_constant_check(text):
    f = S(text, GY)
    assert all(e.zero for e in poisson_commute_report(GY, f)) == bool(constant_of_motion_check(GY, f))


# -- symmetries -------------------------------------------------------------------

def test_symmetry_from_sw_integral_matches_display():
    Y = symmetry_from_constant(SW, I_SW)
    assert Y == VectorField(SW.chart, Y_DISPLAYED)
    for X in SW.generators:
        assert lie_bracket_vf(Y, X).is_zero()
    assert symmetry_check(SW, Y)


def test_symmetry_from_casimir_is_zero():
    C = S("s1^2 - s2^2 + s3^2", GY)
    assert symmetry_from_constant(GY, C).is_zero()


def test_gaudin_y_is_minus_hat_ds1():
    assert GY.generators[0] == -hat_lambda(GY.poisson, exterior_d(S("s1", GY)))
    assert GY.generators[0] == VectorField(GY.chart, {"s2": "s3", "s3": "s2"})


def test_symmetry_from_non_constant():
    with pytest.raises(NotAConstant):
        symmetry_from_constant(KS, KS.hamiltonians[0])


def test_symmetry_check_examples():
    assert symmetry_check(GY, GY.generators[0])
    res = symmetry_check(KS, KS.generators[1])
    assert not res
    assert res.witness[0] == "X1"
    assert res.witness[1] == -KS.generators[0]


def test_generated_symmetries_commute_on_catalog():
    cases = [
        (SW, I_SW),
        (GY, S("s2^2 - s3^2", GY)),
        (GY, S("s1", GY)),
        (get_system("euler_so3"), S("s1^2 + s2^2 + s3^2", get_system("euler_so3"))),
    ]
    for sys, f in cases:
        Y = hat_lambda(sys.poisson, exterior_d(f))
        for X in closure_vf(sys.generators).basis:
            assert lie_bracket_vf(Y, X).is_zero()


# -- integrals ---------------------------------------------------------------------

def test_gaudin_y_integrals_close():
    fs = [S("s1", GY), S("s2^2 - s3^2", GY)]
    rep = integrals_poisson_closed(GY, fs)
    assert rep.ok
    bracket = rep.table[(0, 1)]
    assert apply_vf(GY.generators[0], bracket).is_zero()


def test_single_integral_closes():
    assert integrals_poisson_closed(SW, [I_SW]).ok


def test_gaudin_x_integrals_do_not_close():
    rep = integrals_poisson_closed(GX, [S("s1", GX), S("s2", GX)])
    assert not rep
    assert rep.witnesses == [(0, 1, S("-s3", GX))]


def test_integrals_rejects_non_constant():
    with pytest.raises(NotAConstant):
        integrals_poisson_closed(KS, [KS.hamiltonians[0]])


def test_perfect_algebra_symmetry_property():
    assert perfect_check(closure_vf(SW.generators).structure)
    Y = symmetry_from_constant(SW, I_SW)
    assert Y == hat_lambda(SW.poisson, exterior_d(I_SW))
    f = find_hamiltonian(SW.poisson, Y)
    shift = f + I_SW
    assert all(shift.is_zero() or not shift.depends_on(v) for v in SW.chart.state_names)
    assert constant_of_motion_check(SW, f)


# -- linearization ----------------------------------------------------------------

def test_linearize_affine():
    res = linearize(AFF)
    assert res.new_coordinates == [S("p", AFF), S("x*p", AFF)]
    u, v = (Expr.var(res.new_chart, n) for n in res.new_chart.names)
    assert res.linear_bivector.entry(0, 1) == -u
    assert poisson_bracket(res.linear_bivector, u, v) == -u
    det, point = res.independence_certificate
    assert det == S("-p", AFF)
    assert point["p"] != 0


def test_linear_matrix():
    res = linearize(AFF)
    # X_t = cos(t) X1 + 1/2 X2; u = p, v = x p: u' = -u/2, v' = cos(t) u
    for t in (0.0, 0.4, 1.3):
        np.testing.assert_allclose(res.matrix(t), [[-0.5, 0.0], [np.cos(t), 0.0]], atol=1e-15)


def test_linearization_consistency():
    res = linearize(AFF, new_names=["u", "v"])
    assert jacobi_check(res.linear_bivector)
    assert jacobi_identity_check(res.fn_structure)
    hs = [Expr.var(res.new_chart, n) for n in res.new_chart.names]
    n = len(hs)
    for i in range(n):
        for j in range(n):
            expected = sum(
                (res.fn_structure[i, j, k] * hs[k] for k in range(n)), start=Expr.zero(res.new_chart)
            )
            assert poisson_bracket(res.linear_bivector, hs[i], hs[j]) == expected
            orig = sum(
                (res.fn_structure[i, j, k] * res.new_coordinates[k] for k in range(n)),
                start=Expr.zero(AFF.chart),
            )
            assert poisson_bracket(AFF.poisson, res.new_coordinates[i], res.new_coordinates[j]) == orig


def test_linearization_oracle():
    res = linearize(AFF)
    dev = linearization_oracle(AFF, res, {"x": 0.7, "p": -1.2}, IntegratorConfig(0.0, 1.0, 1e-4))
    assert dev < 1e-6


def test_linearize_ks_dimension_mismatch():
    with pytest.raises(DimensionMismatch, match="3"):
        linearize(KS)


def test_linearize_euler_rank():
    with pytest.raises(DimensionMismatch, match="rank"):
        linearize(get_system("euler_so3"))


def test_linearize_riccati_not_strong():
    with pytest.raises(NotStrongComomentum):
        linearize(get_system("riccati2"))


def test_linearize_sample_without_rank():
    with pytest.raises(DimensionMismatch):
        linearize(get_system("euler_so3"), sample={"s1": 1.0, "s2": 0.0, "s3": 0.0})
