"""Lie-Hamilton systems and Lie-Hamiltonian structures.

Bookkeeping: each generator ``X_a`` is paired with a Hamiltonian ``h_a`` such
that ``X_a = X_{h_a} = -hat(dh_a)``.  Linear maps ``T`` (Hamiltonian
assignments) and comomentum maps ``lambda`` both use the value ``-h_a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

from .errors import (
    CapExceeded,
    ChartMismatch,
    DegenerateBivector,
    InclusionViolated,
    InternalInconsistency,
    LogarithmicTerm,
    NotClosed,
    NotHamiltonian,
    NotHamiltonianGenerator,
    NotPoisson,
)
from .geom import (
    Bivector,
    VectorField,
    find_hamiltonian,
    hamiltonian_vf,
    jacobi_check,
    lie_derivative_bivector,
    poisson_bracket,
)
from .liealg import DEFAULT_CAP, ClosureResult, closure_fn, closure_vf, rational_nullspace, span_reduce
from .symexpr import Chart, CoeffFn, Expr


@dataclass(frozen=True)
class LHSystem:
    """A t-dependent system ``X_t = sum_a b_a(t) X_a`` on a Poisson chart.

    ``parameters`` holds numeric values for the chart's parameter variables;
    symbolic checks never look at them.
    """

    chart: Chart
    poisson: Bivector
    names: tuple[str, ...]
    generators: tuple[VectorField, ...]
    coefficients: tuple[CoeffFn, ...]
    hamiltonians: tuple[Expr, ...] | None = None
    constants_of_motion: tuple[Expr, ...] = ()
    comomentum: Mapping[str, Expr] | None = None
    parameters: Mapping[str, float] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        n = len(self.generators)
        if len(self.names) != n or len(self.coefficients) != n:
            raise ValueError("names, generators and coefficients must be aligned")
        if len(set(self.names)) != n:
            raise ValueError("generator names must be unique")
        if self.hamiltonians is not None and len(self.hamiltonians) != n:
            raise ValueError("hamiltonians must be aligned with generators")
        objs = [self.poisson, *self.generators, *(self.hamiltonians or ()), *self.constants_of_motion]
        objs += list((self.comomentum or {}).values())
        for o in objs:
            if o.chart != self.chart:
                raise ChartMismatch(f"{o!r} is not on the system chart")
        if self.comomentum is not None and set(self.comomentum) - set(self.names):
            raise ValueError(f"comomentum names {sorted(set(self.comomentum) - set(self.names))} are not generators")
        jc = jacobi_check(self.poisson)
        if not jc:
            raise NotPoisson(f"bivector fails the Jacobi identity on {jc.triple}", jc)
        for name, X, h in zip(self.names, self.generators, self.hamiltonians or ()):
            if hamiltonian_vf(self.poisson, h) != X:
                raise NotHamiltonianGenerator(name, lie_derivative_bivector(X, self.poisson))

    def generator(self, name: str) -> VectorField:
        return self.generators[self.names.index(name)]

    def hamiltonian(self, name: str) -> Expr:
        if self.hamiltonians is None:
            raise ValueError("system has no Hamiltonians")
        return self.hamiltonians[self.names.index(name)]

    def with_hamiltonians(self, hamiltonians: Sequence[Expr]) -> "LHSystem":
        return LHSystem(
            self.chart, self.poisson, self.names, self.generators, self.coefficients,
            tuple(hamiltonians), self.constants_of_motion, self.comomentum, self.parameters, self.label,
        )


def vf_closure(sys: LHSystem, cap: int = DEFAULT_CAP) -> ClosureResult:
    """``closure_vf`` of the generators with :class:`NotClosed` on failure."""
    try:
        return closure_vf(sys.generators, cap)
    except CapExceeded as exc:
        raise NotClosed(f"vector-field closure did not converge within cap {cap}") from exc


def basis_names(sys: LHSystem, closure: ClosureResult) -> list[str]:
    names: list[str] = []
    for k, prov in enumerate(closure.provenance):
        if prov is None:
            names.append(sys.names[closure.generator_index[k]])
        else:
            i, j = prov
            names.append(f"[{names[i]},{names[j]}]")
    return names


def extend_assignment(sys: LHSystem, closure: ClosureResult, values: Mapping[str, Expr]) -> list[Expr]:
    """Values of a ``T``/``lambda`` map on every closure basis element.

    Generators must be named in ``values``; an element ``[X_i, X_j]`` produced
    by the closure gets ``values[[X_i,X_j]]`` if supplied and otherwise
    ``{T_i, T_j}``, the only choice compatible with ``X_{-T}`` being the
    bracket.
    """
    names = basis_names(sys, closure)
    out: list[Expr] = []
    for k, name in enumerate(names):
        if name in values:
            out.append(values[name])
            continue
        prov = closure.provenance[k]
        if prov is None:
            raise KeyError(f"no value assigned to generator {name!r}")
        i, j = prov
        out.append(poisson_bracket(sys.poisson, out[i], out[j]))
    return out


def default_assignment(sys: LHSystem) -> dict[str, Expr]:
    """``T(X_a) = -h_a`` for every generator."""
    if sys.hamiltonians is None:
        raise ValueError("system has no Hamiltonians to build T = -h from")
    return {n: -h for n, h in zip(sys.names, sys.hamiltonians)}


# -- Casimirs ------------------------------------------------------------------

def casimir_check(L: Bivector, f: Expr) -> bool:
    return hamiltonian_vf(L, f).is_zero()


def casimir_kernel(L: Bivector, fn_basis: Sequence[Expr]) -> list[Expr]:
    """Basis of the Casimir functions inside ``span(fn_basis)``.

    Each element is scaled so its first canonical term has coefficient 1.
    """
    if not fn_basis:
        return []
    fields = [hamiltonian_vf(L, f) for f in fn_basis]
    out = []
    for vec in rational_nullspace(fields):
        e = Expr.zero(L.chart)
        for c, f in zip(vec, fn_basis):
            if c:
                e = e + c * f
        if e.is_zero():
            continue
        lead = next(iter(e))[1]
        out.append(e * (1 / lead))
    return out


# -- structure verification -------------------------------------------------------

@dataclass
class LHReport:
    vf_dimension: int
    fn_dimension: int
    casimir_kernel_basis: list[Expr]
    exact_sequence_ok: bool
    verdicts: dict[str, bool]
    hamiltonians: list[Expr]
    vf_closure: ClosureResult
    fn_closure: ClosureResult


def _fill_hamiltonians(sys: LHSystem) -> list[Expr]:
    if sys.hamiltonians is not None:
        return list(sys.hamiltonians)
    hs = []
    for name, X in zip(sys.names, sys.generators):
        try:
            hs.append(find_hamiltonian(sys.poisson, X))
        except (NotHamiltonian, DegenerateBivector, LogarithmicTerm):
            raise NotHamiltonianGenerator(name, lie_derivative_bivector(X, sys.poisson)) from None
    return hs


def verify_lh_structure(sys: LHSystem, cap: int = DEFAULT_CAP) -> LHReport:
    """Certify that ``sys`` admits a Lie-Hamiltonian structure.

    Raises :class:`NotHamiltonianGenerator` with ``L_X Lambda`` as witness for
    the first generator that is not ``X_{h}`` of its Hamiltonian, and
    :class:`CapExceeded` if either closure fails to converge.
    """
    hs = _fill_hamiltonians(sys)
    verdicts = {}
    for name, X, h in zip(sys.names, sys.generators, hs):
        if hamiltonian_vf(sys.poisson, h) != X:
            raise NotHamiltonianGenerator(name, lie_derivative_bivector(X, sys.poisson))
        verdicts[name] = True
    vf = closure_vf(sys.generators, cap)
    fn = closure_fn(sys.poisson, hs, cap)
    kernel = casimir_kernel(sys.poisson, fn.basis)
    ok = fn.dimension == vf.dimension + len(kernel)
    return LHReport(vf.dimension, fn.dimension, kernel, ok, verdicts, hs, vf, fn)


# -- obstruction and extension --------------------------------------------------

@dataclass
class UpsilonResult:
    names: list[str]
    matrix: list[list[Expr]]

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.matrix for e in row)

    def entry(self, a: str, b: str) -> Expr:
        return self.matrix[self.names.index(a)][self.names.index(b)]


def upsilon(sys: LHSystem, T: Mapping[str, Expr] | None = None, cap: int = DEFAULT_CAP) -> UpsilonResult:
    """``Y_ab = {T_a, T_b} - sum_c c_abc T_c`` over the closure basis.

    With ``T_a = -h_a`` this is ``{h_a, h_b} + sum_c c_abc h_c``.  Every entry
    must be a Casimir function.
    """
    closure = vf_closure(sys, cap)
    values = extend_assignment(sys, closure, T if T is not None else default_assignment(sys))
    sc = closure.structure
    n = closure.dimension
    zero = Expr.zero(sys.chart)
    matrix = [[zero] * n for _ in range(n)]
    for a, b in combinations(range(n), 2):
        e = poisson_bracket(sys.poisson, values[a], values[b])
        for c in range(n):
            if sc.c[a][b][c]:
                e = e - sc.c[a][b][c] * values[c]
        if not casimir_check(sys.poisson, e):
            raise InternalInconsistency(
                f"obstruction entry ({a}, {b}) = {e} is not a Casimir; T does not assign Hamiltonians"
            )
        matrix[a][b] = e
        matrix[b][a] = -e
    return UpsilonResult(basis_names(sys, closure), matrix)


@dataclass
class Extension:
    basis: list[Expr]
    w0: list[Expr]
    wc: list[Expr]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def build_extension(sys: LHSystem, T: Mapping[str, Expr] | None = None, cap: int = DEFAULT_CAP) -> Extension:
    """Finite-dimensional function algebra ``W0 + WC`` containing the curve ``h_t``."""
    ups = upsilon(sys, T, cap)
    closure = vf_closure(sys, cap)
    values = extend_assignment(sys, closure, T if T is not None else default_assignment(sys))
    w0 = [-v for v in values]
    n = len(w0)
    entries = [ups.matrix[a][b] for a, b in combinations(range(n), 2)]
    red = span_reduce(w0 + entries)
    basis = red.basis
    w0_kept = span_reduce(w0).basis
    wc = span_reduce(entries).basis
    L = sys.poisson

    for (i, f), (j, g) in combinations(enumerate(wc), 2):
        if not poisson_bracket(L, f, g).is_zero():
            raise InclusionViolated("{WC, WC} != 0", (f, g))
    for f in wc:
        for g in w0:
            if not poisson_bracket(L, f, g).is_zero():
                raise InclusionViolated("{WC, W0} != 0", (f, g))
    span = span_reduce(basis)
    for f, g in combinations(w0, 2):
        b = poisson_bracket(L, f, g)
        if len(span_reduce(span.basis + [b]).basis) != len(span.basis):
            raise InclusionViolated("{W0, W0} is not inside W0 + WC", (f, g))
    return Extension(basis, w0_kept, wc)


# -- strong comomentum maps -------------------------------------------------------

@dataclass(frozen=True)
class ComomentumResult:
    ok: bool
    witness: tuple | None = None  # (name_a, name_b, residue) or (name, X_{-lambda} - X)
    reason: str = ""

    def __bool__(self):
        return self.ok


def strong_comomentum_check(
    sys: LHSystem, lam: Mapping[str, Expr] | None = None, cap: int = DEFAULT_CAP
) -> ComomentumResult:
    """Check that ``lambda`` lifts the algebra: ``hat(d lambda(X)) = X`` and
    ``lambda([X_a, X_b]) = {lambda(X_a), lambda(X_b)}``.
    """
    closure = vf_closure(sys, cap)
    if lam is None:
        lam = sys.comomentum if sys.comomentum is not None else default_assignment(sys)
    values = extend_assignment(sys, closure, lam)
    names = basis_names(sys, closure)
    L = sys.poisson
    for name, X, v in zip(names, closure.basis, values):
        diff = hamiltonian_vf(L, -v) - X
        if not diff.is_zero():
            return ComomentumResult(False, (name, diff), "lambda(X) is not minus a Hamiltonian of X")
    sc = closure.structure
    for a, b in combinations(range(closure.dimension), 2):
        lhs = poisson_bracket(L, values[a], values[b])
        rhs = Expr.zero(sys.chart)
        for c in range(closure.dimension):
            if sc.c[a][b][c]:
                rhs = rhs + sc.c[a][b][c] * values[c]
        if lhs != rhs:
            return ComomentumResult(False, (names[a], names[b], lhs - rhs), "lambda is not a Lie algebra morphism")
    return ComomentumResult(True)
