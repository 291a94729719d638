"""Exact span reduction, bracket closure and structure constants.

Linear independence over the reals is decided exactly: distinct canonical
monomials are linearly independent functions on any open set, so a family of
expressions (or vector fields) is independent iff its coefficient matrix on
the joint monomial support has full rank over the rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Hashable, Mapping, Sequence, Union

import numpy as np

from .errors import CapExceeded, ChartMismatch
from .geom import Bivector, StructureConstants, VectorField, lie_bracket_vf, poisson_bracket
from .symexpr import Expr, eval_num

Item = Union[VectorField, Expr]
Vector = dict  # sparse: coordinate -> Fraction


def flatten(item: Item) -> Vector:
    """Coordinates of an expression or field on its monomial support."""
    if isinstance(item, Expr):
        return dict(item.terms)
    out = {}
    for i, comp in enumerate(item.components):
        for key, c in comp:
            out[(i, key)] = c
    return out


def _axpy(y: Vector, a: Fraction, x: Vector) -> None:
    """``y += a * x`` in place, dropping zeros."""
    for k, v in x.items():
        s = y.get(k, 0) + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


class Echelon:
    """Incremental exact row reduction that remembers how each row was built.

    Rows are expressed as combinations of the *kept* input vectors, so a
    dependent vector can be written back in terms of the kept ones.
    """

    def __init__(self):
        self.rows: list[tuple[Hashable, Vector, Vector]] = []  # (pivot, row, combo)
        self.size = 0

    def reduce(self, v: Mapping) -> tuple[Vector, Vector]:
        """Return ``(residual, combo)`` with ``v = residual + sum combo[i] * kept[i]``."""
        r = dict(v)
        combo: Vector = {}
        for pivot, row, rc in self.rows:
            f = r.get(pivot)
            if f:
                _axpy(r, -f, row)
                _axpy(combo, f, rc)
        return r, combo

    def coordinates(self, v: Mapping) -> Vector | None:
        r, combo = self.reduce(v)
        return None if r else combo

    def add(self, v: Mapping) -> Vector | None:
        """Insert ``v``; return ``None`` if it was new, else its coordinates."""
        r, combo = self.reduce(v)
        if not r:
            return combo
        pivot = next(iter(r))
        inv = 1 / r[pivot]
        row = {k: x * inv for k, x in r.items()}
        rc = {k: -x * inv for k, x in combo.items()}
        rc[self.size] = inv
        self.rows.append((pivot, row, rc))
        self.size += 1
        return None


@dataclass
class SpanReduction:
    kept: list[int]  # indices into the input list
    basis: list
    coordinates: dict[int, list[Fraction]]  # rejected index -> coords in basis


def _check_charts(items: Sequence) -> None:
    if items:
        chart = items[0].chart
        for it in items[1:]:
            if it.chart != chart:
                raise ChartMismatch("items live on different charts")


def span_reduce(items: Sequence[Item]) -> SpanReduction:
    """Greedy left-to-right independent subset plus coordinates of the rest."""
    _check_charts(items)
    ech = Echelon()
    kept, coords = [], {}
    for idx, item in enumerate(items):
        c = ech.add(flatten(item))
        if c is None:
            kept.append(idx)
        else:
            coords[idx] = [c.get(k, Fraction(0)) for k in range(len(kept))]
    return SpanReduction(kept, [items[i] for i in kept], coords)


def exact_rank(vectors: Sequence[Mapping]) -> int:
    ech = Echelon()
    for v in vectors:
        ech.add(v)
    return ech.size


def rational_nullspace(items: Sequence[Item]) -> list[list[Fraction]]:
    """Basis of ``{c : sum c_a items[a] = 0}`` over the rationals."""
    red = span_reduce(items)
    out = []
    for idx, coords in sorted(red.coordinates.items()):
        vec = [Fraction(0)] * len(items)
        vec[idx] = Fraction(1)
        for pos, c in zip(red.kept, coords):
            vec[pos] -= c
        out.append(vec)
    return out


@dataclass
class ClosureResult:
    """Basis of the generated Lie algebra.

    ``provenance[k]`` is ``None`` for an element taken from the generators
    (``generator_index[k]`` then gives its position) or the pair ``(i, j)``
    of basis indices whose bracket produced it.
    """

    basis: list
    structure: StructureConstants | None
    converged: bool
    rounds: int
    provenance: list = field(default_factory=list)
    generator_index: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def coordinates(self, item: Item) -> list[Fraction] | None:
        ech = Echelon()
        for b in self.basis:
            ech.add(flatten(b))
        c = ech.coordinates(flatten(item))
        return None if c is None else [c.get(k, Fraction(0)) for k in range(len(self.basis))]


def _closure(generators: Sequence[Item], bracket: Callable[[Item, Item], Item], cap: int) -> ClosureResult:
    if cap < len(generators):
        raise ValueError(f"cap {cap} is smaller than the number of generators {len(generators)}")
    _check_charts(generators)
    ech = Echelon()
    basis, provenance, gen_index = [], [], []
    for idx, g in enumerate(generators):
        if ech.add(flatten(g)) is None:
            basis.append(g)
            provenance.append(None)
            gen_index.append(idx)
    brackets: dict[tuple[int, int], Item] = {}
    rounds = 0
    new_start = 0
    while True:
        added = False
        old_len = len(basis)
        for i, j in combinations(range(old_len), 2):
            if j < new_start:
                continue
            b = bracket(basis[i], basis[j])
            brackets[(i, j)] = b
            if ech.add(flatten(b)) is None:
                basis.append(b)
                provenance.append((i, j))
                gen_index.append(None)
                added = True
                if len(basis) > cap:
                    raise CapExceeded(
                        f"closure exceeded cap {cap} after {rounds + 1} rounds", list(basis), rounds + 1
                    )
        rounds += 1
        if not added:
            break
        new_start = old_len
    n = len(basis)
    coords = {}
    for i, j in combinations(range(n), 2):
        b = brackets.get((i, j))
        if b is None:
            b = bracket(basis[i], basis[j])
        c = ech.coordinates(flatten(b))
        assert c is not None, "closure basis is not bracket-closed"
        coords[(i, j)] = c
    return ClosureResult(basis, StructureConstants.from_brackets(n, coords), True, rounds, provenance, gen_index)


DEFAULT_CAP = 32


def closure_vf(generators: Sequence[VectorField], cap: int = DEFAULT_CAP) -> ClosureResult:
    """Smallest Lie algebra of vector fields containing ``generators``."""
    return _closure(list(generators), lie_bracket_vf, cap)


def closure_fn(L: Bivector, generators: Sequence[Expr], cap: int = DEFAULT_CAP) -> ClosureResult:
    """Smallest Lie algebra of functions under ``{., .}_L`` containing ``generators``."""
    return _closure(list(generators), lambda f, g: poisson_bracket(L, f, g), cap)


def distribution_rank(basis: Sequence[VectorField], point: Mapping[str, float], rtol: float = 1e-10) -> int:
    """Numeric dimension of the span of ``basis`` at ``point``."""
    if not basis:
        return 0
    chart = basis[0].chart
    state = chart.state_names
    rows = [[eval_num(X[v], point) for v in state] for X in basis]
    s = np.linalg.svd(np.array(rows, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def bracket_image_rank(sc: StructureConstants) -> int:
    n = sc.n
    rows = [{k: sc.c[i][j][k] for k in range(n) if sc.c[i][j][k]} for i, j in combinations(range(n), 2)]
    return exact_rank(rows)


def perfect_check(sc: StructureConstants) -> bool:
    """True iff ``[g, g] = g``."""
    return bracket_image_rank(sc) == sc.n


@dataclass(frozen=True)
class JacobiConstantsResult:
    ok: bool
    witness: tuple[int, int, int, int] | None = None

    def __bool__(self):
        return self.ok


def jacobi_identity_check(sc: StructureConstants) -> JacobiConstantsResult:
    w = sc.jacobi_witness()
    return JacobiConstantsResult(w is None, w)
