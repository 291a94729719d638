"""Constants of motion, Lie symmetries and linearization of Lie-Hamilton systems."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CapExceeded,
    DegenerateJacobian,
    DimensionMismatch,
    DomainViolation,
    InternalInconsistency,
    NotAConstant,
    NotClosed,
    NotStrongComomentum,
)
from .geom import (
    Bivector,
    StructureConstants,
    VectorField,
    apply_vf,
    exterior_d,
    hat_lambda,
    lie_bracket_vf,
    lie_poisson_bivector,
    poisson_bracket,
)
from .liealg import DEFAULT_CAP, ClosureResult, closure_fn, distribution_rank, jacobi_identity_check
from .lieham import (
    LHSystem,
    _fill_hamiltonians,
    basis_names,
    extend_assignment,
    strong_comomentum_check,
    vf_closure,
)
from .symexpr import Chart, CoeffFn, Expr, VarSpec, diff, eval_num


@dataclass(frozen=True)
class Verdict:
    """Boolean outcome with the first counterexample found."""

    ok: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.ok


# -- constants of motion --------------------------------------------------------

def constant_of_motion_check(sys: LHSystem, f: Expr, cap: int = DEFAULT_CAP) -> Verdict:
    """``f`` is annihilated by every element of the closure of the generators.

    The witness is ``(basis_name, Y f)`` for the first failure.
    """
    closure = vf_closure(sys, cap)
    for name, Y in zip(basis_names(sys, closure), closure.basis):
        yf = apply_vf(Y, f)
        if not yf.is_zero():
            return Verdict(False, (name, yf))
    return Verdict(True)


@dataclass(frozen=True)
class CommuteEntry:
    function: Expr
    bracket: Expr

    @property
    def zero(self) -> bool:
        return self.bracket.is_zero()


def _fn_closure(sys: LHSystem, cap: int) -> ClosureResult:
    try:
        return closure_fn(sys.poisson, _fill_hamiltonians(sys), cap)
    except CapExceeded as exc:
        raise NotClosed(f"function closure did not converge within cap {cap}") from exc


def poisson_commute_report(sys: LHSystem, f: Expr, cap: int = DEFAULT_CAP) -> list[CommuteEntry]:
    """``{f, h}`` for every ``h`` in the closure of the Hamiltonians."""
    closure = _fn_closure(sys, cap)
    return [CommuteEntry(h, poisson_bracket(sys.poisson, f, h)) for h in closure.basis]


# -- symmetries ------------------------------------------------------------------

def symmetry_check(sys: LHSystem, Y: VectorField, cap: int = DEFAULT_CAP) -> Verdict:
    """``[Y, X] = 0`` for every closure basis element; witness ``(name, [Y, X])``."""
    closure = vf_closure(sys, cap)
    for name, X in zip(basis_names(sys, closure), closure.basis):
        br = lie_bracket_vf(Y, X)
        if not br.is_zero():
            return Verdict(False, (name, br))
    return Verdict(True)


def symmetry_from_constant(sys: LHSystem, f: Expr, cap: int = DEFAULT_CAP) -> VectorField:
    """The Lie symmetry ``hat(df)`` generated by a t-independent constant of motion."""
    check = constant_of_motion_check(sys, f, cap)
    if not check:
        raise NotAConstant(f"{f} is not a constant of motion: {check.witness[0]} f = {check.witness[1]}")
    Y = hat_lambda(sys.poisson, exterior_d(f))
    sym = symmetry_check(sys, Y, cap)
    if not sym:
        raise InternalInconsistency(f"hat(df) fails to commute with {sym.witness[0]}")
    return Y


@dataclass
class IntegralsReport:
    ok: bool
    table: dict[tuple[int, int], Expr]
    witnesses: list[tuple[int, int, Expr]]

    def __bool__(self):
        return self.ok


def integrals_poisson_closed(sys: LHSystem, fs: Sequence[Expr], cap: int = DEFAULT_CAP) -> IntegralsReport:
    """Check that brackets of constants of motion are constants of motion.

    ``table[(i, j)]`` holds ``{f_i, f_j}`` for ``i < j``; each failing bracket
    is listed in ``witnesses``.
    """
    for i, f in enumerate(fs):
        if not constant_of_motion_check(sys, f, cap):
            raise NotAConstant(f"input {i} ({f}) is not a constant of motion")
    table, witnesses = {}, []
    for i, j in combinations(range(len(fs)), 2):
        b = poisson_bracket(sys.poisson, fs[i], fs[j])
        table[(i, j)] = b
        if not constant_of_motion_check(sys, b, cap):
            witnesses.append((i, j, b))
    return IntegralsReport(not witnesses, table, witnesses)


# -- linearization ------------------------------------------------------------

def _det(m: list[list[Expr]], zero: Expr) -> Expr:
    """Laplace expansion along the first row (small n only)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = zero
    for k in range(n):
        if m[0][k].is_zero():
            continue
        minor = [row[:k] + row[k + 1:] for row in m[1:]]
        term = m[0][k] * _det(minor, zero)
        total = total + term if k % 2 == 0 else total - term
    return total


_LATTICE = (1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 3.0, 1.5, -3.0)


def _lattice_points(chart: Chart, parameters: Mapping[str, float], limit: int = 5000):
    state = chart.state_names
    choices = [[v for v in _LATTICE if chart.spec(s).admits(v)] for s in state]
    for count, values in enumerate(product(*choices)):
        if count >= limit:
            return
        point = dict(parameters)
        point.update(zip(state, values))
        yield point


@dataclass
class LinearizationResult:
    new_coordinates: list[Expr]
    new_chart: Chart
    fn_structure: StructureConstants
    linear_bivector: Bivector
    linear_system: list[list[CoeffFn]]
    jacobian_determinant: Expr
    sample_point: dict[str, float]

    @property
    def independence_certificate(self) -> tuple[Expr, dict[str, float]]:
        return self.jacobian_determinant, self.sample_point

    def matrix(self, t: float) -> np.ndarray:
        return np.array([[a(t) for a in row] for row in self.linear_system], dtype=float)

    def map_point(self, point: Mapping[str, float]) -> list[float]:
        return [eval_num(h, point) for h in self.new_coordinates]


def linearize(
    sys: LHSystem,
    lam: Mapping[str, Expr] | None = None,
    sample: Mapping[str, float] | None = None,
    new_names: Sequence[str] | None = None,
    cap: int = DEFAULT_CAP,
) -> LinearizationResult:
    """Global coordinates ``h_i = -lambda(X_i)`` in which the system and the
    Poisson structure are both linear.

    Preconditions are checked in order: strong comomentum, ``dim V = n``,
    full distribution rank at a sample point, and a Jacobian determinant that
    is symbolically nonzero and nonzero at a sample point.
    """
    check = strong_comomentum_check(sys, lam, cap)
    if not check:
        raise NotStrongComomentum(f"comomentum map is not strong: {check.reason}", check.witness)
    closure = vf_closure(sys, cap)
    chart = sys.chart
    state = chart.state_names
    n = len(state)
    if closure.dimension != n:
        raise DimensionMismatch(f"dim V = {closure.dimension} but the manifold has dimension {n}")

    if lam is None:
        lam = sys.comomentum if sys.comomentum is not None else {a: -h for a, h in zip(sys.names, sys.hamiltonians)}
    hs = [-v for v in extend_assignment(sys, closure, lam)]

    params = dict(sys.parameters)
    if sample is not None:
        points = [{**params, **sample}]
    else:
        points = _lattice_points(chart, params)
    best_rank = 0
    rank_point = None
    for point in points:
        try:
            r = distribution_rank(closure.basis, point)
        except DomainViolation:
            continue
        best_rank = max(best_rank, r)
        if r == n:
            rank_point = point
            break
    if rank_point is None:
        where = "at the sample point" if sample is not None else "at any lattice point"
        raise DimensionMismatch(f"distribution rank is {best_rank} < {n} {where}")

    zero = Expr.zero(chart)
    jac = [[diff(h, v) for v in state] for h in hs]
    det = _det(jac, zero)
    if det.is_zero():
        raise DegenerateJacobian("the Jacobian determinant of the new coordinates vanishes identically")
    candidates = [rank_point] if sample is not None else [rank_point, *_lattice_points(chart, params)]
    cert = None
    for point in candidates:
        try:
            value = eval_num(det, point)
            for h in hs:
                eval_num(h, point)
        except DomainViolation:
            continue
        if value != 0 and math.isfinite(value):
            cert = dict(point)
            break
    if cert is None:
        raise DegenerateJacobian(f"no sample point with nonzero Jacobian determinant {det}")

    try:
        fn = closure_fn(sys.poisson, hs, cap)
    except CapExceeded as exc:
        raise InternalInconsistency("new coordinates do not close under the Poisson bracket") from exc
    if fn.dimension != n or fn.generator_index != list(range(n)):
        raise InternalInconsistency("new coordinates are not a basis of their Poisson closure")
    cbar = fn.structure
    if not jacobi_identity_check(cbar):
        raise InternalInconsistency("structure constants of the new coordinates fail Jacobi")

    names = list(new_names) if new_names is not None else [f"h{i + 1}" for i in range(n)]
    if len(names) != n:
        raise ValueError(f"expected {n} new coordinate names, got {len(names)}")
    new_chart = Chart([VarSpec(v) for v in names])
    linear = lie_poisson_bivector(cbar, new_chart)

    # X_t = sum_a b_a(t) X_a = sum_l B_l(t) E_l over the closure basis E.
    coords = [closure.coordinates(X) for X in sys.generators]
    A = []
    for j in range(n):
        row = []
        for k in range(n):
            pairs = []
            for a, b in enumerate(sys.coefficients):
                c = -sum((coords[a][l] * cbar.c[l][j][k] for l in range(n)), Fraction(0))
                pairs.append((c, b))
            row.append(CoeffFn.combine(pairs))
        A.append(row)
    return LinearizationResult(hs, new_chart, cbar, linear, A, det, cert)
