"""Exact reconstructions of the worked example systems.

Each entry builds an :class:`~liehamilton.lieham.LHSystem` from expression
strings and records the facts the test-suite checks against
(``CatalogEntry.expect``).  Parameters such as ``k`` and ``c0`` are symbolic
chart variables; their numeric values only matter for integration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .errors import BadParams, UnknownSystem
from .geom import Bivector, StructureConstants, VectorField, lie_poisson_bivector
from .lieham import LHSystem
from .symexpr import Chart, CoeffFn, Expr, VarSpec, parse_expr


@dataclass
class CatalogEntry:
    name: str
    system: LHSystem
    expect: dict[str, Any] = field(default_factory=dict)


def _coeff(value) -> CoeffFn:
    if isinstance(value, CoeffFn):
        return value
    if isinstance(value, (int, float, Fraction, str)):
        return CoeffFn(str(value))
    raise BadParams(f"cannot use {value!r} as a time coefficient")


def _number(name: str, value) -> float:
    try:
        return float(Fraction(str(value)))
    except (ValueError, ZeroDivisionError):
        raise BadParams(f"parameter {name} must be a number, got {value!r}") from None


def _system(label, chart, poisson, gens, coeffs, hams=None, consts=(), comomentum=None, params=None):
    names = tuple(n for n, _ in gens)
    fields = tuple(VectorField(chart, comps) for _, comps in gens)
    hs = None if hams is None else tuple(parse_expr(h, chart) for h in hams)
    lam = None
    if comomentum == "minus_h":
        lam = {n: -h for n, h in zip(names, hs)}
    return LHSystem(
        chart=chart,
        poisson=poisson,
        names=names,
        generators=fields,
        coefficients=tuple(_coeff(c) for c in coeffs),
        hamiltonians=hs,
        constants_of_motion=tuple(parse_expr(c, chart) for c in consts),
        comomentum=lam,
        parameters=dict(params or {}),
        label=label,
    )


def _riccati2(a0="1", a1="1", a2="1") -> CatalogEntry:
    chart = Chart([VarSpec("x"), VarSpec("p", "negative")])
    L = Bivector.canonical(chart, [("x", "p")])
    gens = [
        ("X1", {"x": "sqrt(-p)^(-1)"}),
        ("X2", {"x": "1"}),
        ("X3", {"x": "x", "p": "-p"}),
        ("X4", {"x": "x^2", "p": "-2*x*p"}),
        ("X5", {"x": "x*sqrt(-p)^(-1)", "p": "2*sqrt(-p)"}),
    ]
    a0, a1, a2 = (_coeff(a) for a in (a0, a1, a2))
    coeffs = [
        "1",
        CoeffFn(f"-({a0.text})"),
        CoeffFn(f"-({a1.text})"),
        CoeffFn(f"-({a2.text})"),
        "0",
    ]
    hams = ["-2*sqrt(-p)", "p", "x*p", "x^2*p", "-2*x*sqrt(-p)"]
    sys = _system("riccati2", chart, L, gens, coeffs, hams, comomentum="minus_h")
    return CatalogEntry(
        "riccati2",
        sys,
        {
            "vf_dimension": 5,
            "fn_dimension": 6,
            "casimir_kernel": ["1"],
            "driving_generators": ["X1", "X2", "X3", "X4"],
            "strong_comomentum": False,
            "comomentum_witness": ("X1", "X5"),
            "upsilon": {("X1", "X5"): "2"},
        },
    )


def _ks2(c0=1, b1="sin(t)") -> CatalogEntry:
    chart = Chart([VarSpec("x", "nonzero"), VarSpec("p"), VarSpec("c0", parameter=True)])
    L = Bivector.canonical(chart, [("x", "p")])
    gens = [
        ("X1", {"p": "4/x^2"}),
        ("X2", {"x": "x", "p": "-p"}),
        ("X3", {"x": "1/2*p*x^3", "p": "-3/4*p^2*x^2 - 4*c0"}),
    ]
    hams = ["4/x", "x*p", "1/4*p^2*x^3 + 4*c0*x"]
    sys = _system(
        "ks2", chart, L, gens, [b1, "0", "1"], hams,
        comomentum="minus_h", params={"c0": _number("c0", c0)},
    )
    return CatalogEntry(
        "ks2",
        sys,
        {
            "vf_dimension": 3,
            "fn_dimension": 3,
            "casimir_kernel": [],
            "vf_relations": {("X1", "X3"): {"X2": 2}, ("X1", "X2"): {"X1": 1}, ("X2", "X3"): {"X3": 1}},
            "fn_relations": {("X1", "X3"): {"X2": -2}, ("X1", "X2"): {"X1": -1}, ("X2", "X3"): {"X3": -1}},
            "strong_comomentum": True,
        },
    )


def _sw(n=2, k=1, omega="1") -> CatalogEntry:
    try:
        n = int(n)
    except (TypeError, ValueError):
        raise BadParams(f"n must be a positive integer, got {n!r}") from None
    if n < 1:
        raise BadParams(f"n must be a positive integer, got {n!r}")
    xs = [f"x{i}" for i in range(1, n + 1)]
    ps = [f"p{i}" for i in range(1, n + 1)]
    chart = Chart(
        [VarSpec(x, "nonzero") for x in xs] + [VarSpec(p) for p in ps] + [VarSpec("k", parameter=True)]
    )
    L = Bivector.canonical(chart, list(zip(xs, ps)))
    X1 = {p: f"-{x}" for x, p in zip(xs, ps)}
    X2 = {}
    for x, p in zip(xs, ps):
        X2[x] = f"-1/2*{x}"
        X2[p] = f"1/2*{p}"
    X3 = {}
    for x, p in zip(xs, ps):
        X3[x] = p
        X3[p] = f"k/{x}^3"
    h1 = " + ".join(f"1/2*{x}^2" for x in xs)
    h2 = " + ".join(f"(-1/2)*{x}*{p}" for x, p in zip(xs, ps))
    h3 = " + ".join(f"1/2*{p}^2 + 1/2*k/{x}^2" for x, p in zip(xs, ps))
    omega = _coeff(omega)
    consts = []
    if n >= 2:
        consts.append("(x1*p2 - p1*x2)^2 + k*((x1/x2)^2 + (x2/x1)^2)")
    sys = _system(
        "sw", chart, L, [("X1", X1), ("X2", X2), ("X3", X3)],
        [CoeffFn(f"({omega.text})^2"), "0", "1"], [h1, h2, h3], consts,
        comomentum="minus_h", params={"k": _number("k", k)},
    )
    return CatalogEntry(
        "sw",
        sys,
        {
            "vf_dimension": 3,
            "fn_dimension": 3,
            "casimir_kernel": [],
            "vf_relations": {("X1", "X3"): {"X2": 2}, ("X1", "X2"): {"X1": 1}, ("X2", "X3"): {"X3": 1}},
            "fn_relations": {("X1", "X3"): {"X2": -2}, ("X1", "X2"): {"X1": -1}, ("X2", "X3"): {"X3": -1}},
            "perfect": True,
        },
    )


SO3 = StructureConstants.from_brackets(3, {(0, 1): {2: 1}, (1, 2): {0: 1}, (0, 2): {1: -1}})
# [e1,e3] = 2 e2, [e1,e2] = e1, [e2,e3] = e3
SL2 = StructureConstants.from_brackets(3, {(0, 2): {1: 2}, (0, 1): {0: 1}, (1, 2): {2: 1}})


def _euler(label: str, sc: StructureConstants, casimir: str, b1="1", b2="1/2", b3="1/3") -> CatalogEntry:
    chart = Chart([VarSpec("s1"), VarSpec("s2"), VarSpec("s3")])
    L = lie_poisson_bivector(sc, chart)
    s = [Expr.var(chart, v) for v in chart.names]
    gens = []
    for a in range(3):
        comps = {}
        for j in range(3):
            e = Expr.zero(chart)
            for k in range(3):
                e = e + sc.c[a][j][k] * s[k]
            comps[chart.names[j]] = e
        gens.append((f"Y{a + 1}", comps))
    # h_a = -<e_a, .> = -s_a makes X_{h_a} = hat(ds_a) = Y_a exactly.
    hams = ["-s1", "-s2", "-s3"]
    sys = _system(label, chart, L, gens, [b1, b2, b3], hams, [casimir], comomentum="minus_h")
    return CatalogEntry(
        label,
        sys,
        {
            "vf_dimension": 3,
            "fn_dimension": 3,
            "casimir_kernel": [],
            "casimir": casimir,
            "generic_rank": 2,
        },
    )


def _euler_so3(**kw) -> CatalogEntry:
    return _euler("euler_so3", SO3, "s1^2 + s2^2 + s3^2", **kw)


def _euler_sl2(**kw) -> CatalogEntry:
    return _euler("euler_sl2", SL2, "s2^2 - s1*s3", **kw)


def gaudin_bivector(chart: Chart) -> Bivector:
    """``s3 d2^d1 - s1 d2^d3 + s2 d3^d1``."""
    return Bivector(chart, {("s2", "s1"): "s3", ("s2", "s3"): "-s1", ("s3", "s1"): "s2"})


def _gaudin(field="X") -> CatalogEntry:
    chart = Chart([VarSpec("s1"), VarSpec("s2"), VarSpec("s3")])
    L = gaudin_bivector(chart)
    if field == "X":
        sys = _system("gaudin_counterexample", chart, L, [("X", {"s3": "1"})], ["1"], None, ["s1", "s2"])
        expect = {"lie_hamilton": False, "integrals": ["s1", "s2"], "integral_bracket": "-s3"}
    elif field == "Y":
        sys = _system(
            "gaudin_counterexample", chart, L, [("Y", {"s2": "s3", "s3": "s2"})], ["1"], ["s1"],
            ["s1", "s2^2 - s3^2", "s1^2 - s2^2 + s3^2"], comomentum="minus_h",
        )
        expect = {"lie_hamilton": True, "vf_dimension": 1, "fn_dimension": 1, "casimir": "s1^2 - s2^2 + s3^2"}
    else:
        raise BadParams(f"field must be 'X' or 'Y', got {field!r}")
    return CatalogEntry("gaudin_counterexample", sys, expect)


def _affine(b1="cos(t)", b2="1/2") -> CatalogEntry:
    chart = Chart([VarSpec("x"), VarSpec("p", "nonzero")])
    L = Bivector.canonical(chart, [("x", "p")])
    gens = [("X1", {"x": "1"}), ("X2", {"x": "x", "p": "-p"})]
    sys = _system("affine_linearizable", chart, L, gens, [b1, b2], ["p", "x*p"], comomentum="minus_h")
    return CatalogEntry(
        "affine_linearizable",
        sys,
        {"vf_dimension": 2, "fn_dimension": 2, "casimir_kernel": [], "strong_comomentum": True},
    )


_BUILDERS: dict[str, Callable[..., CatalogEntry]] = {
    "riccati2": _riccati2,
    "ks2": _ks2,
    "sw": _sw,
    "euler_so3": _euler_so3,
    "euler_sl2": _euler_sl2,
    "gaudin_counterexample": _gaudin,
    "affine_linearizable": _affine,
}

NAMES = tuple(_BUILDERS)


def get_entry(name: str, **params) -> CatalogEntry:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownSystem(f"unknown system {name!r}; known: {', '.join(NAMES)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise BadParams(f"bad parameters for {name}: {exc}") from None


def get_system(name: str, **params) -> LHSystem:
    """Build a catalog system, e.g. ``get_system("ks2", c0=1, b1="sin(t)")``."""
    return get_entry(name, **params).system
