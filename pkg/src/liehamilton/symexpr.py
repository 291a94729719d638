"""Exact symbolic expressions over a chart of signed real variables.

An :class:`Expr` is a finite sum of monomials ``c * prod x**a * prod (s*x)**f``
with rational ``c``, integer ``a`` and radical exponents ``f`` in ``(0, 1)``.
The radical base ``s*x`` is ``x`` for a positive variable and ``-x`` for a
negative one, so every radical stays real on the chart's domain.  Integer
parts of radical exponents are folded into the integer exponents, which makes
the representation canonical: two expressions are equal as functions on the
chart iff their term dictionaries are identical.

Time-dependent coefficients ``b(t)`` are handled separately by
:class:`CoeffFn`, which is numeric only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from . import _parsing
from .errors import (
    ChartMismatch,
    CoefficientDomain,
    DomainViolation,
    ExprSyntaxError,
    IllegalRadical,
    LogarithmicTerm,
    NotRepresentable,
    UnknownVariable,
)

DOMAINS = ("positive", "negative", "nonzero", "any")

# (sorted ((var, int exponent), ...), sorted ((var, radical exponent), ...))
Key = tuple[tuple[tuple[str, int], ...], tuple[tuple[str, Fraction], ...]]
_ONE_KEY: Key = ((), ())


@dataclass(frozen=True)
class VarSpec:
    """A chart coordinate.

    ``parameter`` marks symbolic constants such as ``k`` or ``c0``: they sit
    in the chart so identities hold for every parameter value, but they never
    evolve in time and do not count towards the manifold dimension.
    """

    name: str
    domain: str = "any"
    parameter: bool = False

    def __post_init__(self):
        if not self.name.isidentifier():
            raise ValueError(f"invalid variable name {self.name!r}")
        if self.domain not in DOMAINS:
            raise ValueError(f"domain of {self.name!r} must be one of {DOMAINS}, got {self.domain!r}")
        if self.name == "sqrt":
            raise ValueError("'sqrt' is reserved")

    @property
    def radical_sign(self) -> int | None:
        return {"positive": 1, "negative": -1}.get(self.domain)

    def admits(self, value: float) -> bool:
        if self.domain == "positive":
            return value > 0
        if self.domain == "negative":
            return value < 0
        if self.domain == "nonzero":
            return value != 0
        return True


class Chart:
    """Ordered tuple of :class:`VarSpec` with unique names."""

    __slots__ = ("variables", "_index")

    def __init__(self, variables: Iterable[VarSpec]):
        self.variables = tuple(variables)
        self._index = {v.name: i for i, v in enumerate(self.variables)}
        if len(self._index) != len(self.variables):
            raise ValueError("variable names in a chart must be unique")

    @classmethod
    def of(cls, *names: str, **domains: str) -> "Chart":
        """Shorthand: ``Chart.of("x", "p", p="negative")``."""
        return cls(VarSpec(n, domains.get(n, "any")) for n in names)

    def __eq__(self, other):
        return isinstance(other, Chart) and self.variables == other.variables

    def __hash__(self):
        return hash(self.variables)

    def __len__(self):
        return len(self.variables)

    def __iter__(self) -> Iterator[VarSpec]:
        return iter(self.variables)

    def __contains__(self, name) -> bool:
        return name in self._index

    def __repr__(self):
        return f"Chart({', '.join(f'{v.name}:{v.domain}' for v in self.variables)})"

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def state_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if not v.parameter)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.parameter)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(f"{name!r} is not a chart variable") from None

    def spec(self, name: str) -> VarSpec:
        return self.variables[self.index(name)]

    def check_point(self, point: Mapping[str, float]) -> None:
        for name, value in point.items():
            if name in self._index and not self.spec(name).admits(value):
                raise DomainViolation(
                    f"{name}={value!r} violates domain {self.spec(name).domain!r}"
                )


def _check_same_chart(a: Chart, b: Chart) -> None:
    if a != b:
        raise ChartMismatch(f"{a!r} != {b!r}")


def _split(q: Fraction) -> tuple[int, Fraction]:
    n = math.floor(q)
    return n, q - n


def _iroot(n: int, d: int) -> int | None:
    """Exact integer ``d``-th root of ``n >= 0`` or ``None``."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + d - 1) // d)
    while True:
        y = ((d - 1) * x + n // x ** (d - 1)) // d
        if y >= x:
            break
        x = y
    return x if x**d == n else None


def _rational_power(c: Fraction, q: Fraction) -> Fraction:
    if q.denominator == 1:
        return c ** int(q)
    if c <= 0:
        raise IllegalRadical(f"fractional power of non-positive constant {c}")
    d = q.denominator
    num, den = _iroot(c.numerator, d), _iroot(c.denominator, d)
    if num is None or den is None:
        raise NotRepresentable(f"{c}^({q}) is irrational")
    return Fraction(num, den) ** q.numerator


class Expr:
    """Canonical exact expression; immutable.

    Equality is syntactic on the canonical form, which coincides with equality
    of functions on the chart's domain.
    """

    __slots__ = ("chart", "_terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[Key, Fraction] | None = None):
        self.chart = chart
        items = [(k, Fraction(c)) for k, c in (terms or {}).items() if c != 0]
        items.sort(key=lambda kc: kc[0])
        self._terms: dict[Key, Fraction] = dict(items)
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, chart: Chart, value) -> "Expr":
        return cls(chart, {_ONE_KEY: Fraction(value)})

    @classmethod
    def zero(cls, chart: Chart) -> "Expr":
        return cls(chart)

    @classmethod
    def var(cls, chart: Chart, name: str) -> "Expr":
        chart.index(name)
        return cls(chart, {(((name, 1),), ()): Fraction(1)})

    # -- inspection -------------------------------------------------------
    def __iter__(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(k == _ONE_KEY for k in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get(_ONE_KEY, Fraction(0))

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def variables(self) -> set[str]:
        out = set()
        for ints, rads in self._terms:
            out.update(v for v, _ in ints)
            out.update(v for v, _ in rads)
        return out

    def depends_on(self, name: str) -> bool:
        return name in self.variables()

    # -- ring operations --------------------------------------------------
    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            _check_same_chart(self.chart, other.chart)
            return other
        if isinstance(other, (int, Rational)):
            return Expr.const(self.chart, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms.get(k, 0) + c
        return Expr(self.chart, terms)

    __radd__ = __add__

    def __neg__(self):
        return Expr(self.chart, {k: -c for k, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: dict[Key, Fraction] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                sign, k = _mul_keys(self.chart, k1, k2)
                terms[k] = terms.get(k, 0) + sign * c1 * c2
        return Expr(self.chart, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.reciprocal()

    def reciprocal(self) -> "Expr":
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of zero expression")
        if not self.is_monomial():
            raise NotRepresentable(f"cannot divide by the non-monomial {self}")
        return self ** -1

    def __pow__(self, q):
        q = Fraction(q)
        if q.denominator == 1 and q >= 0:
            result = Expr.const(self.chart, 1)
            base = self
            n = int(q)
            while n:
                if n & 1:
                    result = result * base
                base = base * base
                n >>= 1
            return result
        if self.is_zero():
            raise ZeroDivisionError("zero raised to a negative or fractional power")
        if not self.is_monomial():
            raise NotRepresentable(f"({self})^({q}) is outside the monomial class")
        (key, coeff), = self._terms.items()
        c, k = _mono_pow(self.chart, coeff, key, q)
        return Expr(self.chart, {k: c})

    # -- comparison / hashing --------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Expr):
            return self.chart == other.chart and self._terms == other._terms
        if isinstance(other, (int, Rational)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, tuple(self._terms.items())))
        return self._hash

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"Expr({to_string(self)!r})"


def _mul_keys(chart: Chart, k1: Key, k2: Key) -> tuple[int, Key]:
    ints = dict(k1[0])
    for v, a in k2[0]:
        ints[v] = ints.get(v, 0) + a
    rads = dict(k1[1])
    sign = 1
    for v, f in k2[1]:
        s = rads.get(v, 0) + f
        if s >= 1:
            s -= 1
            ints[v] = ints.get(v, 0) + 1
            sign *= chart.spec(v).radical_sign
        rads[v] = s
    return sign, _key(ints, rads)


def _key(ints: Mapping[str, int], rads: Mapping[str, Fraction]) -> Key:
    return (
        tuple(sorted((v, a) for v, a in ints.items() if a != 0)),
        tuple(sorted((v, Fraction(f)) for v, f in rads.items() if f != 0)),
    )


def _mono_pow(chart: Chart, coeff: Fraction, key: Key, q: Fraction) -> tuple[Fraction, Key]:
    ints, rads = dict(key[0]), dict(key[1])
    new_ints: dict[str, int] = {}
    new_rads: dict[str, Fraction] = {}
    sign = 1
    if q.denominator == 1:
        for v, a in ints.items():
            new_ints[v] = a * int(q)
        for v, f in rads.items():
            n, frac = _split(f * q)
            new_ints[v] = new_ints.get(v, 0) + n
            new_rads[v] = frac
            sign *= chart.spec(v).radical_sign ** (n % 2)
        return sign * coeff ** int(q), _key(new_ints, new_rads)
    # Non-integer power: rewrite x^a = s^a (s x)^a so every factor sits on
    # its radical base, then take the power of the (positive) coefficient.
    base_coeff = coeff
    for v in set(ints) | set(rads):
        s = chart.spec(v).radical_sign
        if s is None:
            raise IllegalRadical(
                f"fractional power of {v!r} requires a positive or negative domain"
            )
        a = ints.get(v, 0)
        base_coeff *= s ** (a % 2)
        n, frac = _split((a + rads.get(v, 0)) * q)
        new_ints[v] = n
        new_rads[v] = frac
        sign *= s ** (n % 2)
    return sign * _rational_power(base_coeff, q), _key(new_ints, new_rads)


# -- parsing and printing -------------------------------------------------

def parse_expr(text: str, chart: Chart) -> Expr:
    """Parse ``text`` into a canonical :class:`Expr` over ``chart``."""
    return _build(_parsing.parse(text), chart)


def _build(node, chart: Chart) -> Expr:
    kind = node[0]
    if kind == "num":
        return Expr.const(chart, node[1])
    if kind == "var":
        if node[1] not in chart:
            raise UnknownVariable(f"unknown variable {node[1]!r} at position {node[2]}")
        return Expr.var(chart, node[1])
    if kind == "neg":
        return -_build(node[1], chart)
    if kind == "add":
        return _build(node[1], chart) + _build(node[2], chart)
    if kind == "sub":
        return _build(node[1], chart) - _build(node[2], chart)
    if kind == "mul":
        return _build(node[1], chart) * _build(node[2], chart)
    if kind == "div":
        denom = _build(node[2], chart)
        if denom.is_zero():
            raise NotRepresentable(f"division by zero at position {node[3]}")
        return _build(node[1], chart) / denom
    if kind == "pow":
        return _build(node[1], chart) ** node[2]
    if kind == "call":
        name, arg, pos = node[1], node[2], node[3]
        if name != "sqrt":
            raise ExprSyntaxError(f"unknown function {name!r}", pos, ("sqrt",))
        return _sqrt_of(arg, chart, pos)
    raise AssertionError(node)


def _sqrt_of(arg, chart: Chart, pos: int) -> Expr:
    sign = 1
    if arg[0] == "neg":
        sign, arg = -1, arg[1]
    if arg[0] != "var":
        raise IllegalRadical(f"sqrt at position {pos} must be applied to v or -v")
    name = arg[1]
    if name not in chart:
        raise UnknownVariable(f"unknown variable {name!r} at position {arg[2]}")
    if chart.spec(name).radical_sign != sign:
        raise IllegalRadical(
            f"sqrt({'-' if sign < 0 else ''}{name}) is not real on domain {chart.spec(name).domain!r}"
        )
    return Expr(chart, {((), ((name, Fraction(1, 2)),)): Fraction(1)})


def _fmt_exponent(q: Fraction) -> str:
    if q.denominator == 1 and q >= 0:
        return str(q.numerator)
    return f"({q})"


def _factors(key: Key, chart: Chart) -> list[str]:
    out = []
    for v, a in key[0]:
        out.append(v if a == 1 else f"{v}^{_fmt_exponent(Fraction(a))}")
    for v, f in key[1]:
        base = f"sqrt({'-' if chart.spec(v).radical_sign < 0 else ''}{v})"
        out.append(base if f == Fraction(1, 2) else f"{base}^{_fmt_exponent(2 * f)}")
    return out


def to_string(e: Expr) -> str:
    if e.is_zero():
        return "0"
    parts = []
    for i, (key, c) in enumerate(e):
        facs = _factors(key, e.chart)
        mag = abs(c)
        if not facs:
            body = str(mag)
        elif mag == 1:
            body = "*".join(facs)
        else:
            body = f"{mag}*" + "*".join(facs)
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


# -- calculus -------------------------------------------------------------

def _exponent_in(key: Key, v: str) -> Fraction:
    return Fraction(dict(key[0]).get(v, 0)) + dict(key[1]).get(v, 0)


def _shift(key: Key, v: str, delta: int) -> Key:
    ints = dict(key[0])
    ints[v] = ints.get(v, 0) + delta
    return _key(ints, dict(key[1]))


def diff(f: Expr, v: str) -> Expr:
    """Exact partial derivative; ``d(s x)^e/dx = e (s x)^e / x`` for every base."""
    f.chart.index(v)
    terms: dict[Key, Fraction] = {}
    for key, c in f:
        e = _exponent_in(key, v)
        if e:
            k = _shift(key, v, -1)
            terms[k] = terms.get(k, 0) + c * e
    return Expr(f.chart, terms)


def antiderivative(f: Expr, v: str) -> Expr:
    """Antiderivative in ``v`` with zero integration constant.

    Raises :class:`LogarithmicTerm` when a term has total exponent -1 in ``v``.
    """
    f.chart.index(v)
    terms: dict[Key, Fraction] = {}
    for key, c in f:
        e = _exponent_in(key, v)
        if e == -1:
            raise LogarithmicTerm(f"term with {v}^(-1) in {f} integrates to a logarithm")
        k = _shift(key, v, 1)
        terms[k] = terms.get(k, 0) + c / (e + 1)
    result = Expr(f.chart, terms)
    if diff(result, v) != f:
        raise AssertionError(f"antiderivative post-check failed for {f}")
    return result


def expr_equal(a: Expr, b: Expr) -> bool:
    _check_same_chart(a.chart, b.chart)
    return (a - b).is_zero()


# -- numerics -------------------------------------------------------------

def eval_num(f: Expr, point: Mapping[str, float]) -> float:
    """Evaluate ``f`` in IEEE doubles, summing terms in canonical order."""
    chart = f.chart
    chart.check_point(point)
    total = 0.0
    for (ints, rads), c in f:
        val = float(c)
        for v, a in ints:
            x = _lookup(point, v)
            if x == 0 and a < 0:
                raise DomainViolation(f"{v}=0 in a negative power of {f}")
            val *= x**a
        for v, fr in rads:
            base = chart.spec(v).radical_sign * _lookup(point, v)
            if base <= 0:
                raise DomainViolation(f"radical base of {v} is not positive at {point}")
            val *= base ** float(fr)
        total += val
    return total


def _lookup(point: Mapping[str, float], v: str) -> float:
    try:
        return float(point[v])
    except KeyError:
        raise DomainViolation(f"no value for {v!r}") from None


def compile_exprs(exprs: Sequence[Expr], names: Sequence[str]) -> Callable[..., tuple]:
    """Compile expressions into one fast float function of ``names``.

    The caller is responsible for domain checks; the compiled code evaluates
    terms in canonical order like :func:`eval_num`.
    """
    args = [f"_a{i}" for i in range(len(names))]
    local = dict(zip(names, args))
    bodies = []
    for e in exprs:
        if any(v not in local for v in e.variables()):
            missing = sorted(v for v in e.variables() if v not in local)
            raise UnknownVariable(f"compiled expression needs values for {missing}")
        term_src = []
        for (ints, rads), c in e:
            factors = [repr(float(c))]
            for v, a in ints:
                factors.append(f"{local[v]}**{a}" if a != 1 else local[v])
            for v, fr in rads:
                s = "" if e.chart.spec(v).radical_sign > 0 else "-"
                factors.append(f"({s}{local[v]})**{float(fr)!r}")
            term_src.append("*".join(factors))
        bodies.append("+".join(term_src) if term_src else "0.0")
    src = f"def _compiled({', '.join(args)}):\n    return ({', '.join(bodies)}{',' if bodies else ''})\n"
    namespace: dict = {}
    exec(src, namespace)
    return namespace["_compiled"]


# -- time coefficients ----------------------------------------------------

_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp}


class CoeffFn:
    """Numeric function of ``t`` built from the same grammar as :class:`Expr`.

    Only ``t``, literals, ``+ - * / ^`` and ``sin``, ``cos``, ``exp`` are
    allowed.  It is never differentiated.
    """

    __slots__ = ("text", "_fn")

    def __init__(self, text: str | int | Fraction):
        self.text = str(text).strip()
        self._fn = _compile_coeff(_parsing.parse(self.text))

    def __call__(self, t: float) -> float:
        return eval_coeff(self, t)

    def __eq__(self, other):
        return isinstance(other, CoeffFn) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __repr__(self):
        return f"CoeffFn({self.text!r})"

    @classmethod
    def combine(cls, pairs: Iterable[tuple[Fraction, "CoeffFn"]]) -> "CoeffFn":
        """Rational linear combination, e.g. a row of a linearized system matrix."""
        parts = []
        for c, fn in pairs:
            if c == 0:
                continue
            parts.append(f"({fn.text})" if c == 1 else f"({c})*({fn.text})")
        return cls(" + ".join(parts) if parts else "0")


def _compile_coeff(node) -> Callable[[float], float]:
    kind = node[0]
    if kind == "num":
        value = float(node[1])
        return lambda t: value
    if kind == "var":
        if node[1] != "t":
            raise UnknownVariable(f"time coefficients may only use 't', got {node[1]!r}")
        return lambda t: t
    if kind == "neg":
        a = _compile_coeff(node[1])
        return lambda t: -a(t)
    if kind in ("add", "sub", "mul", "div"):
        a, b = _compile_coeff(node[1]), _compile_coeff(node[2])
        if kind == "add":
            return lambda t: a(t) + b(t)
        if kind == "sub":
            return lambda t: a(t) - b(t)
        if kind == "mul":
            return lambda t: a(t) * b(t)
        return lambda t: a(t) / b(t)
    if kind == "pow":
        a, q = _compile_coeff(node[1]), node[2]
        if q.denominator == 1:
            n = int(q)
            return lambda t: a(t) ** n
        qf = float(q)

        def frac_pow(t):
            base = a(t)
            if base < 0:
                raise DomainViolation(f"fractional power of negative value at t={t}")
            return base**qf

        return frac_pow
    if kind == "call":
        name = node[1]
        if name not in _FUNCS:
            raise ExprSyntaxError(f"unknown function {name!r}", node[3], tuple(_FUNCS))
        fn, a = _FUNCS[name], _compile_coeff(node[2])
        return lambda t: fn(a(t))
    raise AssertionError(node)


def eval_coeff(fn: CoeffFn, t: float) -> float:
    try:
        value = fn._fn(float(t))
    except (ZeroDivisionError, OverflowError) as exc:
        raise CoefficientDomain(f"{fn.text} undefined at t={t}: {exc}", t) from None
    except DomainViolation as exc:
        raise CoefficientDomain(str(exc), t) from None
    if isinstance(value, complex) or math.isnan(value):
        raise CoefficientDomain(f"{fn.text} undefined at t={t}", t)
    return float(value)
