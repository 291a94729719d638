"""JSON system-definition documents.

Layout (every key other than ``variables``, ``poisson`` and ``generators`` is
optional; unknown keys are rejected)::

    {
      "name": "ks2",
      "variables":   [{"name": "x", "domain": "nonzero"}, {"name": "p"}],
      "parameters":  [{"name": "c0", "domain": "any", "value": 1}],
      "poisson":     {"type": "canonical", "pairs": [["x", "p"]]},
      "generators":  [{"name": "X1", "components": {"p": "4*x^(-2)"}}],
      "coefficients": [{"generator": "X1", "fn": "sin(t)"}],
      "hamiltonians": {"X1": "4*x^(-1)"},
      "constants_of_motion": ["..."],
      "comomentum":  {"X1": "-4*x^(-1)"}
    }

``poisson`` may also be ``{"type": "explicit", "components": [{"pair": [a, b],
"value": expr}]}`` or ``{"type": "lie_poisson", "structure_constants": c}``
with ``c[i][j][k]`` rational strings.  Generators without a coefficient entry
get ``"0"``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .errors import DefinitionError, DegenerateBivector
from .geom import Bivector, StructureConstants, VectorField, canonical_pairs, lie_poisson_bivector
from .lieham import LHSystem
from .symexpr import Chart, CoeffFn, VarSpec, parse_expr, to_string

TOP_KEYS = (
    "name",
    "variables",
    "parameters",
    "poisson",
    "generators",
    "coefficients",
    "hamiltonians",
    "constants_of_motion",
    "comomentum",
)
REQUIRED = ("variables", "poisson", "generators")


def _keys(obj: Any, allowed, where: str, required=()) -> dict:
    if not isinstance(obj, dict):
        raise DefinitionError(f"{where} must be an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise DefinitionError(f"unknown keys in {where}: {extra}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise DefinitionError(f"missing keys in {where}: {missing}")
    return obj


def _list(obj: Any, where: str) -> list:
    if not isinstance(obj, list):
        raise DefinitionError(f"{where} must be a list")
    return obj


def _text(value: Any, where: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise DefinitionError(f"{where} must be an expression string")
    return str(value)


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool):
        raise DefinitionError(f"{where} must be a number")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(Fraction(str(value)))
    except (ValueError, ZeroDivisionError):
        raise DefinitionError(f"{where} must be a number, got {value!r}") from None


def _poisson(doc: Mapping, chart: Chart) -> Bivector:
    kind = doc.get("type") if isinstance(doc, dict) else None
    if kind == "canonical":
        _keys(doc, ("type", "pairs"), "poisson")
        state = chart.state_names
        if "pairs" in doc:
            pairs = [tuple(p) for p in _list(doc["pairs"], "poisson.pairs")]
            if any(len(p) != 2 for p in pairs):
                raise DefinitionError("poisson.pairs entries must have two names")
        else:
            if len(state) % 2:
                raise DefinitionError("canonical structure needs an even number of variables")
            half = len(state) // 2
            pairs = list(zip(state[:half], state[half:]))
        return Bivector.canonical(chart, pairs)
    if kind == "explicit":
        _keys(doc, ("type", "components"), "poisson", ("components",))
        entries = {}
        for i, comp in enumerate(_list(doc["components"], "poisson.components")):
            _keys(comp, ("pair", "value"), f"poisson.components[{i}]", ("pair", "value"))
            pair = comp["pair"]
            if not isinstance(pair, list) or len(pair) != 2:
                raise DefinitionError(f"poisson.components[{i}].pair must have two names")
            if tuple(pair) in entries:
                raise DefinitionError(f"duplicate bivector entry {pair}")
            entries[tuple(pair)] = parse_expr(_text(comp["value"], "bivector entry"), chart)
        return Bivector(chart, entries)
    if kind == "lie_poisson":
        _keys(doc, ("type", "structure_constants"), "poisson", ("structure_constants",))
        try:
            sc = StructureConstants(
                [[[Fraction(str(x)) for x in row] for row in plane] for plane in doc["structure_constants"]]
            )
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise DefinitionError(f"bad structure constants: {exc}") from None
        return lie_poisson_bivector(sc, chart)
    raise DefinitionError(f"poisson.type must be canonical, explicit or lie_poisson, got {kind!r}")


def load_definition(doc: Mapping) -> LHSystem:
    """Build an :class:`LHSystem` from a parsed JSON document."""
    _keys(doc, TOP_KEYS, "definition", REQUIRED)
    specs, values = [], {}
    for i, v in enumerate(_list(doc["variables"], "variables")):
        _keys(v, ("name", "domain"), f"variables[{i}]", ("name",))
        try:
            specs.append(VarSpec(v["name"], v.get("domain", "any")))
        except (TypeError, ValueError) as exc:
            raise DefinitionError(str(exc)) from None
    for i, v in enumerate(_list(doc.get("parameters", []), "parameters")):
        _keys(v, ("name", "domain", "value"), f"parameters[{i}]", ("name",))
        try:
            specs.append(VarSpec(v["name"], v.get("domain", "any"), parameter=True))
        except (TypeError, ValueError) as exc:
            raise DefinitionError(str(exc)) from None
        if "value" in v:
            values[v["name"]] = _number(v["value"], f"parameters[{i}].value")
    try:
        chart = Chart(specs)
    except ValueError as exc:
        raise DefinitionError(str(exc)) from None
    try:
        chart.check_point(values)
    except ValueError as exc:
        raise DefinitionError(f"parameter value: {exc}") from None

    L = _poisson(doc["poisson"], chart)
    names, fields = [], []
    for i, g in enumerate(_list(doc["generators"], "generators")):
        _keys(g, ("name", "components"), f"generators[{i}]", ("name", "components"))
        comps = _keys(g["components"], chart.names, f"generators[{i}].components")
        names.append(str(g["name"]))
        fields.append(VectorField(chart, {v: parse_expr(_text(e, "component"), chart) for v, e in comps.items()}))
    if not names:
        raise DefinitionError("at least one generator is required")

    coeffs = {}
    for i, c in enumerate(_list(doc.get("coefficients", []), "coefficients")):
        _keys(c, ("generator", "fn"), f"coefficients[{i}]", ("generator", "fn"))
        if c["generator"] not in names:
            raise DefinitionError(f"coefficient for unknown generator {c['generator']!r}")
        if c["generator"] in coeffs:
            raise DefinitionError(f"duplicate coefficient for {c['generator']!r}")
        coeffs[c["generator"]] = CoeffFn(_text(c["fn"], "coefficient"))

    hams = None
    if "hamiltonians" in doc:
        h = _keys(doc["hamiltonians"], names, "hamiltonians", names)
        hams = tuple(parse_expr(_text(h[n], "hamiltonian"), chart) for n in names)
    lam = None
    if "comomentum" in doc:
        lam = {
            n: parse_expr(_text(e, "comomentum value"), chart)
            for n, e in _keys(doc["comomentum"], names, "comomentum").items()
        }
    consts = tuple(
        parse_expr(_text(e, "constant of motion"), chart)
        for e in _list(doc.get("constants_of_motion", []), "constants_of_motion")
    )
    try:
        return LHSystem(
            chart=chart,
            poisson=L,
            names=tuple(names),
            generators=tuple(fields),
            coefficients=tuple(coeffs.get(n, CoeffFn("0")) for n in names),
            hamiltonians=hams,
            constants_of_motion=consts,
            comomentum=lam,
            parameters=values,
            label=str(doc.get("name", "")),
        )
    except ValueError as exc:
        raise DefinitionError(str(exc)) from None


def load_file(path: str | Path) -> LHSystem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DefinitionError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DefinitionError(f"{path}: invalid JSON: {exc}") from None
    return load_definition(doc)


def _number_out(x: float):
    return int(x) if float(x).is_integer() else x


def dump_definition(sys: LHSystem) -> dict:
    chart = sys.chart
    doc: dict[str, Any] = {}
    if sys.label:
        doc["name"] = sys.label
    doc["variables"] = [{"name": v.name, "domain": v.domain} for v in chart if not v.parameter]
    if chart.parameter_names:
        doc["parameters"] = []
        for v in chart:
            if v.parameter:
                entry = {"name": v.name, "domain": v.domain}
                if v.name in sys.parameters:
                    entry["value"] = _number_out(sys.parameters[v.name])
                doc["parameters"].append(entry)
    try:
        pairs = canonical_pairs(sys.poisson)
        doc["poisson"] = {"type": "canonical", "pairs": [list(p) for p in pairs]}
    except DegenerateBivector:
        doc["poisson"] = {
            "type": "explicit",
            "components": [{"pair": [a, b], "value": to_string(e)} for (a, b), e in sys.poisson.items()],
        }
    doc["generators"] = [
        {"name": n, "components": {v: to_string(e) for v, e in X.items() if not e.is_zero()}}
        for n, X in zip(sys.names, sys.generators)
    ]
    doc["coefficients"] = [{"generator": n, "fn": c.text} for n, c in zip(sys.names, sys.coefficients)]
    if sys.hamiltonians is not None:
        doc["hamiltonians"] = {n: to_string(h) for n, h in zip(sys.names, sys.hamiltonians)}
    if sys.constants_of_motion:
        doc["constants_of_motion"] = [to_string(f) for f in sys.constants_of_motion]
    if sys.comomentum is not None:
        doc["comomentum"] = {n: to_string(sys.comomentum[n]) for n in sys.names if n in sys.comomentum}
    return doc


def dumps(sys: LHSystem) -> str:
    return json.dumps(dump_definition(sys), indent=2) + "\n"

