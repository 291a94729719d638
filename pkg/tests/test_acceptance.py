"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline;
they are printed with capture disabled either way.
"""

import time
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liehamilton.analysis import (
    constant_of_motion_check,
    integrals_poisson_closed,
    linearize,
    symmetry_from_constant,
    symmetry_check,
)
from liehamilton.catalog import NAMES, SL2, SO3, gaudin_bivector, get_system
from liehamilton.errors import DimensionMismatch, NotStrongComomentum
from liehamilton.geom import (
    Bivector,
    VectorField,
    apply_vf,
    cyclic_sum,
    exterior_d,
    find_hamiltonian,
    hamiltonian_vf,
    hat_lambda,
    jacobi_check,
    jacobiator,
    lie_bracket_vf,
    lie_derivative_bivector,
    lie_poisson_bivector,
    oneform_bracket,
    poisson_bracket,
)
from liehamilton.liealg import closure_fn, closure_vf, span_reduce
from liehamilton.lieham import casimir_kernel, strong_comomentum_check, upsilon
from liehamilton.numint import IntegratorConfig, integrate, leaf_check, linearization_oracle, monitor, solve_rk4
from liehamilton.symexpr import Chart, Expr, VarSpec, diff, eval_num, parse_expr, to_string
from strategies import CHART, exprs, points, polynomials


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}" + (f" ({detail})" if detail else "")
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def _relation(res, i, j):
    return {k: res.structure[i, j, k] for k in range(res.dimension) if res.structure[i, j, k]}


def test_criterion_1_ks_relations(report):
    ks = get_system("ks2")
    X1, X2, X3 = ks.generators
    h1, h2, h3 = ks.hamiltonians
    vf = closure_vf([X1, X3])
    fn = closure_fn(ks.poisson, [h1, h3])
    # the closure creates 2*X2 and -2*h2
    ok_vf = vf.dimension == 3 and vf.basis[2] == 2 * X2
    # [X1,X3] = e3 = 2 X2; [X1,e3] = 2[X1,X2] = 2 X1; [X3,e3] = 2[X3,X2] = -2 X3
    ok_vf = ok_vf and _relation(vf, 0, 1) == {2: 1} and _relation(vf, 0, 2) == {0: 2} and _relation(vf, 1, 2) == {1: -2}
    ok_vf = ok_vf and lie_bracket_vf(X1, X3) == 2 * X2 and lie_bracket_vf(X1, X2) == X1 and lie_bracket_vf(X2, X3) == X3
    ok_fn = fn.dimension == 3 and fn.basis[2] == -2 * h2
    ok_fn = ok_fn and poisson_bracket(ks.poisson, h1, h3) == -2 * h2
    ok_fn = ok_fn and poisson_bracket(ks.poisson, h1, h2) == -h1
    ok_fn = ok_fn and poisson_bracket(ks.poisson, h2, h3) == -h3
    full = closure_vf(ks.generators)
    ok_full = _relation(full, 0, 2) == {1: 2} and _relation(full, 0, 1) == {0: 1} and _relation(full, 1, 2) == {2: 1}
    full_fn = closure_fn(ks.poisson, ks.hamiltonians)
    ok_full_fn = (
        _relation(full_fn, 0, 2) == {1: -2} and _relation(full_fn, 0, 1) == {0: -1} and _relation(full_fn, 1, 2) == {2: -1}
    )
    report(1, "KS relations", ok_vf and ok_fn and ok_full and ok_full_fn,
           f"dim V={vf.dimension}, dim W={fn.dimension}")


def test_criterion_2_sw_relations(report):
    failures = []
    for n in (1, 2, 3):
        sw = get_system("sw", n=n)
        vf = closure_vf(sw.generators)
        fn = closure_fn(sw.poisson, sw.hamiltonians)
        if not (
            vf.dimension == 3
            and _relation(vf, 0, 2) == {1: 2}
            and _relation(vf, 0, 1) == {0: 1}
            and _relation(vf, 1, 2) == {2: 1}
        ):
            failures.append(f"n={n} fields")
        if not (
            fn.dimension == 3
            and _relation(fn, 0, 2) == {1: -2}
            and _relation(fn, 0, 1) == {0: -1}
            and _relation(fn, 1, 2) == {2: -1}
        ):
            failures.append(f"n={n} functions")
        if any(hamiltonian_vf(sw.poisson, h) != X for X, h in zip(sw.generators, sw.hamiltonians)):
            failures.append(f"n={n} pairing")
        if not any(v == "k" for v in sw.chart.parameter_names):
            failures.append("k not symbolic")
    report(2, "SW relations for n in {1,2,3}", not failures, ", ".join(failures))


def test_criterion_3_riccati_dimensions(report):
    ric = get_system("riccati2")
    vf = closure_vf(ric.generators[:4])
    fn = closure_fn(ric.poisson, ric.hamiltonians[:4])
    kernel = casimir_kernel(ric.poisson, fn.basis)
    gains_x5 = len(span_reduce(vf.basis + [ric.generators[4]]).basis) == 5
    ok = (
        vf.dimension == 5
        and gains_x5
        and fn.dimension == 6
        and kernel == [Expr.const(ric.chart, 1)]
        and fn.dimension == vf.dimension + len(kernel)
    )
    report(3, "Riccati dimensions 6 = 5 + 1", ok, f"{fn.dimension} = {vf.dimension} + {len(kernel)}")


def test_criterion_4_hamiltonian_pairing(report):
    failures = []
    systems = [get_system(n) for n in NAMES if n != "gaudin_counterexample"]
    systems.append(get_system("gaudin_counterexample", field="Y"))
    for sys in systems:
        for name, X, h in zip(sys.names, sys.generators, sys.hamiltonians):
            if hamiltonian_vf(sys.poisson, h) != X:
                failures.append(f"{sys.label}:{name}")
    ric = get_system("riccati2")
    for name, X, h in zip(ric.names, ric.generators, ric.hamiltonians):
        if find_hamiltonian(ric.poisson, X) != h:
            failures.append(f"find_hamiltonian riccati2:{name}")
    report(4, "Hamiltonianity pairing", not failures, ", ".join(failures))


def test_criterion_5_gaudin(report):
    gx = get_system("gaudin_counterexample", field="X")
    gy = get_system("gaudin_counterexample", field="Y")
    L = gx.poisson
    s = {v: parse_expr(v, gx.chart) for v in ("s1", "s2", "s3")}
    checks = {
        "L_X Lambda != 0": not lie_derivative_bivector(VectorField(gx.chart, {"s3": "1"}), L).is_zero(),
        "{s1,s2} = -s3": poisson_bracket(L, s["s1"], s["s2"]) == -s["s3"],
        "s1 integral of X": bool(constant_of_motion_check(gx, s["s1"])),
        "s2 integral of X": bool(constant_of_motion_check(gx, s["s2"])),
    }
    closed = integrals_poisson_closed(gx, [s["s1"], s["s2"]])
    checks["X integrals not closed, witness -s3"] = (not closed) and closed.witnesses[0][2] == -s["s3"]
    Y = gy.generators[0]
    checks["Y = -hat(ds1)"] = Y == -hat_lambda(gy.poisson, exterior_d(parse_expr("s1", gy.chart)))
    f1, f2 = parse_expr("s1", gy.chart), parse_expr("s2^2 - s3^2", gy.chart)
    checks["s1, s2^2-s3^2 certified for Y"] = bool(constant_of_motion_check(gy, f1)) and bool(
        constant_of_motion_check(gy, f2)
    )
    checks["Y{s1, s2^2-s3^2} = 0"] = apply_vf(Y, poisson_bracket(gy.poisson, f1, f2)).is_zero()
    failed = [k for k, v in checks.items() if not v]
    report(5, "Gaudin counterexample", not failed, ", ".join(failed))


def test_criterion_6_sw_integral_and_symmetry(report):
    sw = get_system("sw")
    chart = sw.chart
    I = parse_expr("(x1*p2 - p1*x2)^2 + k*((x1/x2)^2 + (x2/x1)^2)", chart)
    displayed = VectorField(chart, {
        "x1": "2*(x1*p2 - p1*x2)*x2",
        "x2": "-2*(x1*p2 - p1*x2)*x1",
        "p1": "2*((x1*p2 - p1*x2)*p2 + k*(x1^4 - x2^4)/(x1^3*x2^2))",
        "p2": "-2*((x1*p2 - p1*x2)*p1 + k*(x1^4 - x2^4)/(x2^3*x1^2))",
    })
    commute = all(poisson_bracket(sw.poisson, I, h).is_zero() for h in sw.hamiltonians)
    Y = symmetry_from_constant(sw, I)
    matches = Y == displayed
    commutes = all(lie_bracket_vf(Y, X).is_zero() for X in sw.generators) and bool(symmetry_check(sw, Y))
    report(6, "SW integral and symmetry", commute and matches and commutes,
           f"{{I,h}}=0: {commute}, Y matches: {matches}, [Y,X]=0: {commutes}")


def test_criterion_7_strong_comomentum(report):
    ks, ric = get_system("ks2"), get_system("riccati2")
    ks_ok = bool(strong_comomentum_check(ks))
    res = strong_comomentum_check(ric)
    ups = upsilon(ric)
    ric_ok = (not res) and res.witness[:2] == ("X1", "X5") and ups.entry("X1", "X5") == Expr.const(ric.chart, 2)
    systems = [get_system(n) for n in NAMES if n != "gaudin_counterexample"]
    systems += [get_system("gaudin_counterexample", field="Y"), get_system("sw", n=1), get_system("sw", n=3)]
    agree = all(bool(strong_comomentum_check(s)) == upsilon(s).is_zero() for s in systems)
    report(7, "strong comomentum", ks_ok and ric_ok and agree,
           f"KS passes: {ks_ok}, Riccati fails with 2: {ric_ok}, agreement: {agree}")


def test_criterion_8_linearization(report):
    aff = get_system("affine_linearizable")
    res = linearize(aff)
    dev = linearization_oracle(aff, res, {"x": 0.7, "p": -1.2}, IntegratorConfig(0.0, 1.0, 1e-4))
    dev2 = linearization_oracle(aff, res, res.sample_point, IntegratorConfig(0.0, 1.0, 1e-4))
    errors = {}
    for name in ("ks2", "euler_so3"):
        try:
            linearize(get_system(name))
            errors[name] = None
        except (DimensionMismatch, NotStrongComomentum) as exc:
            errors[name] = type(exc).__name__
    ok = max(dev, dev2) < 1e-6 and errors == {"ks2": "DimensionMismatch", "euler_so3": "DimensionMismatch"}
    report(8, "linearization", ok, f"oracle deviation {max(dev, dev2):.2e}, errors {errors}")


def test_criterion_9_numeric_conservation(report):
    sw = get_system("sw", n=2, k=1, omega="1")
    cfg = IntegratorConfig(0.0, 10.0, 1e-3)
    t = time.perf_counter()
    traj = integrate(sw, {"x1": 1.0, "x2": 1.0, "p1": 0.0, "p2": 0.0}, cfg)
    sw_drift = monitor(sw, traj, sw.constants_of_motion).max_rel
    moving = integrate(sw, {"x1": 1.0, "x2": 1.5, "p1": 0.2, "p2": -0.1}, cfg)
    sw_moving = monitor(sw, moving, sw.constants_of_motion).max_rel
    eu = get_system("euler_so3")
    eu_traj = integrate(eu, {"s1": 1.0, "s2": 2.0, "s3": 2.0}, cfg)
    eu_drift = leaf_check(eu, eu_traj, eu.constants_of_motion).max_rel
    x0 = {"x1": 1.0, "x2": 1.5, "p1": 0.2, "p2": -0.1}
    dt = 0.05
    ref = solve_rk4(sw, x0, IntegratorConfig(0.0, 2.0, dt / 4)).states[-1]
    e1 = np.linalg.norm(solve_rk4(sw, x0, IntegratorConfig(0.0, 2.0, dt)).states[-1] - ref)
    e2 = np.linalg.norm(solve_rk4(sw, x0, IntegratorConfig(0.0, 2.0, dt / 2)).states[-1] - ref)
    ratio = e1 / e2
    elapsed = time.perf_counter() - t
    ok = max(sw_drift, sw_moving) < 1e-6 and eu_drift < 1e-6 and 12 <= ratio <= 20
    report(9, "numeric conservation", ok,
           f"I drift {sw_drift:.1e} (moving start {sw_moving:.1e}), Casimir drift {eu_drift:.1e}, "
           f"order ratio {ratio:.2f}, {elapsed:.1f}s")


# -- criterion 10: property suites ---------------------------------------------------------

_PROPERTY_FAILURES = []


def _run_property(fn):
    try:
        fn()
    except Exception as exc:  # noqa: BLE001 - collected and reported below
        _PROPERTY_FAILURES.append(f"{fn.__name__}: {type(exc).__name__}")


@settings(max_examples=1000, database=None)
@given(exprs(), exprs(), exprs(), points(), st.sampled_from(CHART.names))
def _symexpr_properties(a, b, c, point, v):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert diff(a * b, v) == diff(a, v) * b + a * diff(b, v)
    h = 1e-3

    def at(delta):
        shifted = dict(point)
        shifted[v] += delta
        return eval_num(a, shifted)

    exact = eval_num(diff(a, v), point)
    fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)
    assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))
    assert parse_expr(to_string(a), CHART) == a


_XP = Chart([VarSpec("x"), VarSpec("p")])
_S = Chart([VarSpec("s1"), VarSpec("s2"), VarSpec("s3")])
_R4 = Chart([VarSpec(v) for v in ("x1", "x2", "p1", "p2")])
_STRUCTURES = [
    Bivector.canonical(_XP, [("x", "p")]),
    Bivector.canonical(_R4, [("x1", "p1"), ("x2", "p2")]),
    lie_poisson_bivector(SO3, _S),
    lie_poisson_bivector(SL2, _S),
    gaudin_bivector(_S),
]


@st.composite
def _structure_pair(draw):
    L = draw(st.sampled_from(_STRUCTURES))
    return L, draw(polynomials(L.chart)), draw(polynomials(L.chart))


@settings(max_examples=200, database=None)
@given(_structure_pair())
def _geom_properties(data):
    L, f, g = data
    Xf, Xg = hamiltonian_vf(L, f), hamiltonian_vf(L, g)
    assert hamiltonian_vf(L, poisson_bracket(L, f, g)) == -lie_bracket_vf(Xf, Xg)
    assert oneform_bracket(L, exterior_d(f), exterior_d(g)) == exterior_d(poisson_bracket(L, f, g))


@settings(max_examples=200, database=None)
@given(st.lists(polynomials(_S, 2, 2), min_size=3, max_size=3))
def _jacobi_agreement(entries):
    L = Bivector(_S, dict(zip(combinations(_S.names, 2), entries)))
    x = [Expr.var(_S, v) for v in _S.names]
    pb = lambda a, b: poisson_bracket(L, a, b)  # noqa: E731
    triple = pb(x[0], pb(x[1], x[2])) + pb(x[1], pb(x[2], x[0])) + pb(x[2], pb(x[0], x[1]))
    assert jacobiator(L, 0, 1, 2) == triple
    assert cyclic_sum(L, 0, 1, 2) == -triple
    assert bool(jacobi_check(L)) == triple.is_zero()


def test_criterion_10_property_suites(report):
    _PROPERTY_FAILURES.clear()
    for fn in (_symexpr_properties, _geom_properties, _jacobi_agreement):
        _run_property(fn)
    report(10, "property suites (1000 symexpr, 200 geom, 200 Jacobi cases)", not _PROPERTY_FAILURES,
           ", ".join(_PROPERTY_FAILURES))
