"""Vector fields, one-forms and bivectors with exact components.

Sign conventions used throughout the package::

    {f, g}   = Lambda(df, dg) = sum_{i<j} L^{ij} (d_i f d_j g - d_j f d_i g)
    hat(w)^j = sum_i L^{ij} w_i
    X_f      = -hat(df),   so X_f g = {g, f}  and  X_{{f,g}} = -[X_f, X_g]
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .errors import (
    BadStructureConstants,
    ChartMismatch,
    DegenerateBivector,
    NotHamiltonian,
)
from .symexpr import Chart, Expr, antiderivative, diff, parse_expr


def _same_chart(*objs) -> Chart:
    chart = objs[0].chart
    for o in objs[1:]:
        if o.chart != chart:
            raise ChartMismatch(f"{o.chart!r} != {chart!r}")
    return chart


def _components(chart: Chart, components, kind: str) -> tuple[Expr, ...]:
    """Normalize a mapping ``name -> Expr|str`` or a full sequence into a tuple."""
    if isinstance(components, Mapping):
        out = [Expr.zero(chart)] * len(chart)
        for name, value in components.items():
            out[chart.index(name)] = _as_expr(chart, value)
        return tuple(out)
    comps = tuple(_as_expr(chart, c) for c in components)
    if len(comps) != len(chart):
        raise ValueError(f"{kind} needs {len(chart)} components, got {len(comps)}")
    return comps


def _as_expr(chart: Chart, value) -> Expr:
    if isinstance(value, Expr):
        if value.chart != chart:
            raise ChartMismatch(f"{value.chart!r} != {chart!r}")
        return value
    if isinstance(value, str):
        return parse_expr(value, chart)
    return Expr.const(chart, value)


class _Componentwise:
    __slots__ = ("chart", "components")
    _kind = "object"

    def __init__(self, chart: Chart, components=()):
        self.chart = chart
        self.components = _components(chart, components or {}, self._kind)

    def __getitem__(self, name: str) -> Expr:
        return self.components[self.chart.index(name)]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def items(self):
        return zip(self.chart.names, self.components)

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and self.chart == other.chart
            and self.components == other.components
        )

    def __hash__(self):
        return hash((type(self).__name__, self.chart, self.components))

    def __add__(self, other):
        _same_chart(self, other)
        return type(self)(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        _same_chart(self, other)
        return type(self)(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return type(self)(self.chart, [-a for a in self.components])

    def __mul__(self, scalar):
        return type(self)(self.chart, [a * scalar for a in self.components])

    __rmul__ = __mul__

    def __repr__(self):
        return f"{type(self).__name__}({self.as_text()})"


class VectorField(_Componentwise):
    """``sum_v X^v d/dv``; missing components are zero."""

    _kind = "vector field"

    def as_text(self) -> str:
        parts = [f"({c})*d/d{v}" for v, c in self.items() if not c.is_zero()]
        return " + ".join(parts) if parts else "0"


class OneForm(_Componentwise):
    """``sum_v w_v dv``."""

    _kind = "one-form"

    def as_text(self) -> str:
        parts = [f"({c})*d{v}" for v, c in self.items() if not c.is_zero()]
        return " + ".join(parts) if parts else "0"


class Bivector:
    """``sum_{i<j} L^{ij} d_i ^ d_j`` stored on strictly upper-triangular keys."""

    __slots__ = ("chart", "_entries")

    def __init__(self, chart: Chart, entries: Mapping[tuple[str, str], Expr | str | int] = ()):
        self.chart = chart
        acc: dict[tuple[int, int], Expr] = {}
        for (a, b), value in dict(entries).items():
            i, j = chart.index(a), chart.index(b)
            if i == j:
                raise ValueError(f"diagonal bivector entry ({a}, {b})")
            e = _as_expr(chart, value)
            if i > j:
                i, j, e = j, i, -e
            acc[(i, j)] = acc.get((i, j), Expr.zero(chart)) + e
        self._entries = {k: v for k, v in sorted(acc.items()) if not v.is_zero()}

    @classmethod
    def canonical(cls, chart: Chart, pairs: Sequence[tuple[str, str]]) -> "Bivector":
        return cls(chart, {pair: 1 for pair in pairs})

    def entry(self, i: int, j: int) -> Expr:
        """``L^{ij}`` with antisymmetry, by chart index."""
        if i == j:
            return Expr.zero(self.chart)
        if i < j:
            return self._entries.get((i, j), Expr.zero(self.chart))
        return -self._entries.get((j, i), Expr.zero(self.chart))

    def __getitem__(self, pair: tuple[str, str]) -> Expr:
        return self.entry(self.chart.index(pair[0]), self.chart.index(pair[1]))

    def items(self):
        names = self.chart.names
        return [((names[i], names[j]), e) for (i, j), e in self._entries.items()]

    def is_zero(self) -> bool:
        return not self._entries

    def __eq__(self, other):
        return isinstance(other, Bivector) and self.chart == other.chart and self._entries == other._entries

    def __hash__(self):
        return hash((self.chart, tuple(self._entries.items())))

    def __repr__(self):
        parts = [f"({e})*d{a}^d{b}" for (a, b), e in self.items()]
        return f"Bivector({' + '.join(parts) if parts else '0'})"


# -- calculus ----------------------------------------------------------------

def exterior_d(f: Expr) -> OneForm:
    return OneForm(f.chart, [diff(f, v) for v in f.chart.names])


def apply_vf(X: VectorField, f: Expr) -> Expr:
    chart = _same_chart(X, f)
    total = Expr.zero(chart)
    for v, c in X.items():
        if not c.is_zero():
            total = total + c * diff(f, v)
    return total


def lie_bracket_vf(X: VectorField, Y: VectorField) -> VectorField:
    chart = _same_chart(X, Y)
    return VectorField(chart, [apply_vf(X, b) - apply_vf(Y, a) for a, b in zip(X.components, Y.components)])


def hat_lambda(L: Bivector, w: OneForm) -> VectorField:
    chart = _same_chart(L, w)
    n = len(chart)
    comps = []
    for j in range(n):
        total = Expr.zero(chart)
        for i in range(n):
            if not w.components[i].is_zero():
                lij = L.entry(i, j)
                if not lij.is_zero():
                    total = total + lij * w.components[i]
        comps.append(total)
    return VectorField(chart, comps)


def pairing(L: Bivector, w: OneForm, u: OneForm) -> Expr:
    """``Lambda(w, u) = sum_{i,j} L^{ij} w_i u_j``."""
    chart = _same_chart(L, w, u)
    total = Expr.zero(chart)
    for (i, j), lij in L._entries.items():
        total = total + lij * (w.components[i] * u.components[j] - w.components[j] * u.components[i])
    return total


def poisson_bracket(L: Bivector, f: Expr, g: Expr) -> Expr:
    _same_chart(L, f, g)
    return pairing(L, exterior_d(f), exterior_d(g))


def hamiltonian_vf(L: Bivector, f: Expr) -> VectorField:
    return -hat_lambda(L, exterior_d(f))


def jacobiator(L: Bivector, i: int, j: int, k: int) -> Expr:
    """``{x_i,{x_j,x_k}} + {x_j,{x_k,x_i}} + {x_k,{x_i,x_j}}`` on coordinates."""
    chart = L.chart
    total = Expr.zero(chart)
    for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
        inner = L.entry(b, c)
        for l, v in enumerate(chart.names):
            lal = L.entry(a, l)
            if not lal.is_zero():
                total = total + lal * diff(inner, v)
    return total


def cyclic_sum(L: Bivector, i: int, j: int, k: int) -> Expr:
    """``sum_l (L^{li} d_l L^{jk} + L^{lj} d_l L^{ki} + L^{lk} d_l L^{ij})``.

    Equals ``-jacobiator(L, i, j, k)``.
    """
    chart = L.chart
    total = Expr.zero(chart)
    for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
        inner = L.entry(b, c)
        for l, v in enumerate(chart.names):
            lla = L.entry(l, a)
            if not lla.is_zero():
                total = total + lla * diff(inner, v)
    return total


@dataclass(frozen=True)
class JacobiResult:
    ok: bool
    triple: tuple[str, str, str] | None = None
    residue: Expr | None = None

    def __bool__(self):
        return self.ok


def jacobi_check(L: Bivector) -> JacobiResult:
    """Check ``[L, L]_S = 0`` through the coordinate Jacobi identity.

    On failure the witness is the first triple ``i<j<k`` and its nonzero
    Jacobiator ``{x_i,{x_j,x_k}} + cyclic``.
    """
    names = L.chart.names
    for i, j, k in combinations(range(len(names)), 3):
        r = jacobiator(L, i, j, k)
        if not r.is_zero():
            return JacobiResult(False, (names[i], names[j], names[k]), r)
    return JacobiResult(True)


def lie_derivative_bivector(X: VectorField, L: Bivector) -> Bivector:
    chart = _same_chart(X, L)
    names = chart.names
    n = len(names)
    entries = {}
    for i, j in combinations(range(n), 2):
        total = apply_vf(X, L.entry(i, j))
        for l, v in enumerate(names):
            llj, lil = L.entry(l, j), L.entry(i, l)
            if not llj.is_zero():
                total = total - llj * diff(X.components[i], v)
            if not lil.is_zero():
                total = total - lil * diff(X.components[j], v)
        entries[(names[i], names[j])] = total
    return Bivector(chart, entries)


def lie_derivative_oneform(X: VectorField, w: OneForm) -> OneForm:
    chart = _same_chart(X, w)
    names = chart.names
    comps = []
    for i, vi in enumerate(names):
        total = apply_vf(X, w.components[i])
        for j in range(len(names)):
            if not w.components[j].is_zero():
                total = total + w.components[j] * diff(X.components[j], vi)
        comps.append(total)
    return OneForm(chart, comps)


def oneform_bracket(L: Bivector, w: OneForm, u: OneForm) -> OneForm:
    """``[w, u]_L = L_{hat(w)} u - L_{hat(u)} w - d L(w, u)``."""
    _same_chart(L, w, u)
    return (
        lie_derivative_oneform(hat_lambda(L, w), u)
        - lie_derivative_oneform(hat_lambda(L, u), w)
        - exterior_d(pairing(L, w, u))
    )


# -- structure constants and Lie-Poisson bivectors ----------------------------

class StructureConstants:
    """``[e_i, e_j] = sum_k c[i][j][k] e_k`` with exact rational entries."""

    __slots__ = ("n", "c")

    def __init__(self, c):
        self.c = [[[Fraction(x) for x in row] for row in plane] for plane in c]
        self.n = len(self.c)
        if any(len(p) != self.n or any(len(r) != self.n for r in p) for p in self.c):
            raise BadStructureConstants("structure constants must be an n x n x n array")

    @classmethod
    def zeros(cls, n: int) -> "StructureConstants":
        return cls([[[0] * n for _ in range(n)] for _ in range(n)])

    @classmethod
    def from_brackets(cls, n: int, brackets: Mapping[tuple[int, int], Mapping[int, Fraction]]):
        """Build from ``{(i, j): {k: c_ijk}}`` for ``i < j`` (0-based)."""
        c = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        for (i, j), coords in brackets.items():
            for k, v in coords.items():
                c[i][j][k] = Fraction(v)
                c[j][i][k] = -Fraction(v)
        return cls(c)

    def __getitem__(self, ijk):
        i, j, k = ijk
        return self.c[i][j][k]

    def __eq__(self, other):
        return isinstance(other, StructureConstants) and self.c == other.c

    def __repr__(self):
        nz = [
            f"c{i + 1}{j + 1}{k + 1}={self.c[i][j][k]}"
            for i in range(self.n)
            for j in range(i + 1, self.n)
            for k in range(self.n)
            if self.c[i][j][k]
        ]
        return f"StructureConstants(n={self.n}, {', '.join(nz) or 'abelian'})"

    def is_antisymmetric(self) -> bool:
        n = self.n
        return all(
            self.c[i][j][k] == -self.c[j][i][k]
            for i in range(n)
            for j in range(n)
            for k in range(n)
        )

    def jacobi_witness(self):
        """First ``(i, j, k, l)`` violating the quadratic Jacobi identity, or ``None``."""
        n, c = self.n, self.c
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        s = sum(
                            c[i][j][m] * c[m][k][l] + c[j][k][m] * c[m][i][l] + c[k][i][m] * c[m][j][l]
                            for m in range(n)
                        )
                        if s:
                            return (i, j, k, l)
        return None


def lie_poisson_bivector(sc: StructureConstants, chart: Chart) -> Bivector:
    """Linear bivector ``L^{ij} = sum_k c_ijk x_k`` on the dual of the algebra."""
    if not sc.is_antisymmetric():
        raise BadStructureConstants("structure constants are not antisymmetric")
    if sc.jacobi_witness() is not None:
        raise BadStructureConstants(f"Jacobi identity fails at {sc.jacobi_witness()}")
    names = chart.state_names
    if len(names) != sc.n:
        raise BadStructureConstants(f"chart has {len(names)} coordinates, algebra has {sc.n}")
    entries = {}
    for i, j in combinations(range(sc.n), 2):
        e = Expr.zero(chart)
        for k in range(sc.n):
            if sc.c[i][j][k]:
                e = e + sc.c[i][j][k] * Expr.var(chart, names[k])
        entries[(names[i], names[j])] = e
    return Bivector(chart, entries)


# -- Hamiltonian recovery -------------------------------------------------------

def canonical_pairs(L: Bivector) -> list[tuple[str, str]]:
    """Return the ``(x_i, p_i)`` pairs if ``L`` is ``sum d_{x_i} ^ d_{p_i}``.

    Parameters of the chart are excluded; every state variable must occur in
    exactly one pair with constant coefficient 1.
    """
    state = set(L.chart.state_names)
    pairs, seen = [], set()
    for (a, b), e in L.items():
        if e != 1 or a not in state or b not in state or a in seen or b in seen:
            raise DegenerateBivector(f"bivector is not canonical: entry ({a}, {b}) = {e}")
        seen.update((a, b))
        pairs.append((a, b))
    if seen != state:
        raise DegenerateBivector(f"variables {sorted(state - seen)} are not paired")
    return pairs


def find_hamiltonian(L: Bivector, X: VectorField) -> Expr:
    """Solve ``hamiltonian_vf(L, h) = X`` for a canonical ``L``.

    Integrates ``dh/dp_i = X^{x_i}`` and ``dh/dx_i = -X^{p_i}`` one coordinate
    at a time; the result has zero additive constant.
    """
    chart = _same_chart(L, X)
    pairs = canonical_pairs(L)
    for name in chart.parameter_names:
        if not X[name].is_zero():
            raise NotHamiltonian(f"field moves the parameter {name!r}")
    relations = []
    for x, p in pairs:
        relations.append((p, X[x]))
        relations.append((x, -X[p]))
    h = Expr.zero(chart)
    done: list[str] = []
    for v, target in relations:
        residual = target - diff(h, v)
        if any(residual.depends_on(u) for u in done):
            raise NotHamiltonian(f"integrability fails at d/d{v}: residual {residual}")
        h = h + antiderivative(residual, v)
        done.append(v)
    if hamiltonian_vf(L, h) != X:
        raise NotHamiltonian(f"post-check failed: X_h != X for h = {h}")
    return h
