"""``lieham`` command-line front end.

Every command prints a JSON report to stdout (or ``--report PATH``).  Exit
codes: 0 ok, 1 refuted, 2 parse/validation, 3 closure cap exceeded,
4 linearization precondition failed, 5 left the chart domain.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Any, Sequence

from . import catalog
from .analysis import (
    constant_of_motion_check,
    linearize,
    poisson_commute_report,
    symmetry_from_constant,
)
from .errors import (
    BadParams,
    BadStructureConstants,
    CapExceeded,
    ChartMismatch,
    DefinitionError,
    DegenerateJacobian,
    DimensionMismatch,
    DomainViolation,
    ExprSyntaxError,
    IllegalRadical,
    LieHamError,
    NotClosed,
    NotHamiltonianGenerator,
    NotPoisson,
    NotRepresentable,
    NotStrongComomentum,
    UnknownSystem,
    UnknownVariable,
)
from .geom import Bivector, StructureConstants, VectorField
from .liealg import DEFAULT_CAP, ClosureResult, closure_fn, closure_vf
from .lieham import LHSystem, _fill_hamiltonians, basis_names, casimir_check, verify_lh_structure
from .numint import CONSERVATION_TOL, IntegratorConfig, MonitorReport, integrate, leaf_check, linearization_oracle, monitor
from .serialize import dump_definition, load_file
from .symexpr import parse_expr, to_string

EXIT_OK, EXIT_REFUTED, EXIT_PARSE, EXIT_CAP, EXIT_LINEARIZE, EXIT_DOMAIN = range(6)

PARSE_ERRORS = (
    DefinitionError,
    ExprSyntaxError,
    UnknownVariable,
    IllegalRadical,
    NotRepresentable,
    ChartMismatch,
    BadStructureConstants,
    UnknownSystem,
    BadParams,
)
LINEARIZE_ERRORS = (NotStrongComomentum, DimensionMismatch, DegenerateJacobian)


class Outcome(Exception):
    """Carries a finished report and exit code out of a command."""

    def __init__(self, report: dict, code: int):
        self.report = report
        self.code = code


# -- formatting -----------------------------------------------------------------

def q(x: Fraction) -> str:
    return str(Fraction(x))


def fmt_field(X: VectorField) -> dict[str, str]:
    return {v: to_string(e) for v, e in X.items() if not e.is_zero()}


def fmt_bivector(L: Bivector) -> list[dict]:
    return [{"pair": [a, b], "value": to_string(e)} for (a, b), e in L.items()]


def fmt_structure(sc: StructureConstants, names: Sequence[str]) -> list[dict]:
    out = []
    for i, j in combinations(range(sc.n), 2):
        result = {names[k]: q(sc.c[i][j][k]) for k in range(sc.n) if sc.c[i][j][k]}
        out.append({"bracket": [names[i], names[j]], "result": result})
    return out


def fmt_closure_vf(sys: LHSystem, res: ClosureResult) -> dict:
    names = basis_names(sys, res)
    return {
        "dimension": res.dimension,
        "rounds": res.rounds,
        "basis": [{"name": n, "field": fmt_field(X)} for n, X in zip(names, res.basis)],
        "structure_constants": fmt_structure(res.structure, names),
    }


def fmt_closure_fn(res: ClosureResult) -> dict:
    names = [f"F{k + 1}" for k in range(res.dimension)]
    return {
        "dimension": res.dimension,
        "rounds": res.rounds,
        "basis": [{"name": n, "function": to_string(f)} for n, f in zip(names, res.basis)],
        "structure_constants": fmt_structure(res.structure, names),
    }


def fmt_monitor(rep: MonitorReport) -> list[dict]:
    return [
        {
            "function": to_string(d.function),
            "initial": d.initial,
            "max_abs_drift": d.max_abs,
            "max_rel_drift": d.max_rel,
            "conserved": d.max_rel <= rep.tolerance,
        }
        for d in rep.drifts
    ]


def _cap(args) -> int:
    if args.cap is not None:
        return args.cap
    env = os.environ.get("LIEHAM_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise DefinitionError(f"LIEHAM_CAP must be an integer, got {env!r}") from None
    return DEFAULT_CAP


def _cap_outcome(report: dict, exc: CapExceeded, what: str) -> Outcome:
    partial = []
    for item in exc.partial_basis:
        partial.append(fmt_field(item) if isinstance(item, VectorField) else to_string(item))
    report.update(
        status="cap_exceeded",
        error={"type": "CapExceeded", "closure": what, "message": str(exc), "rounds": exc.rounds},
        partial_basis=partial,
    )
    return Outcome(report, EXIT_CAP)


# -- system loading -----------------------------------------------------------

def data_dir():
    return resources.files("liehamilton") / "data" / "systems"


def load_system(ref: str) -> LHSystem:
    """Load a definition file, or a shipped catalog file via ``catalog:NAME``."""
    if ref.startswith("catalog:"):
        name = ref.split(":", 1)[1]
        target = data_dir() / f"{name}.json"
        if not target.is_file():
            raise UnknownSystem(f"no shipped definition named {name!r}")
        with resources.as_file(target) as path:
            return load_file(path)
    return load_file(ref)


# -- commands -------------------------------------------------------------------

def cmd_check(sys: LHSystem, args) -> tuple[dict, int]:
    cap = _cap(args)
    report: dict[str, Any] = {"jacobi": True}
    try:
        res = verify_lh_structure(sys, cap)
    except NotHamiltonianGenerator as exc:
        report.update(
            lie_hamilton=False,
            status="refuted",
            witness={"generator": exc.name, "lie_derivative_of_bivector": fmt_bivector(exc.witness)},
        )
        return report, EXIT_REFUTED
    except CapExceeded as exc:
        raise _cap_outcome(report, exc, "vector fields or functions")
    report.update(
        lie_hamilton=res.exact_sequence_ok,
        status="ok" if res.exact_sequence_ok else "refuted",
        vf_dimension=res.vf_dimension,
        fn_dimension=res.fn_dimension,
        casimir_kernel=[to_string(c) for c in res.casimir_kernel_basis],
        exact_sequence={"fn": res.fn_dimension, "vf": res.vf_dimension, "casimirs": len(res.casimir_kernel_basis),
                        "ok": res.exact_sequence_ok},
        hamiltonians={n: to_string(h) for n, h in zip(sys.names, res.hamiltonians)},
        vf_closure=fmt_closure_vf(sys, res.vf_closure),
        fn_closure=fmt_closure_fn(res.fn_closure),
    )
    return report, EXIT_OK if res.exact_sequence_ok else EXIT_REFUTED


def cmd_closure(sys: LHSystem, args) -> tuple[dict, int]:
    cap = _cap(args)
    report: dict[str, Any] = {"cap": cap}
    try:
        vf = closure_vf(sys.generators, cap)
    except CapExceeded as exc:
        raise _cap_outcome(report, exc, "vector fields")
    report["vf_closure"] = fmt_closure_vf(sys, vf)
    try:
        hs = _fill_hamiltonians(sys)
    except NotHamiltonianGenerator as exc:
        report["fn_closure"] = None
        report["fn_closure_skipped"] = f"generator {exc.name} has no Hamiltonian function"
        report["status"] = "ok"
        return report, EXIT_OK
    try:
        fn = closure_fn(sys.poisson, hs, cap)
    except CapExceeded as exc:
        raise _cap_outcome(report, exc, "functions")
    report["fn_closure"] = fmt_closure_fn(fn)
    report["status"] = "ok"
    return report, EXIT_OK


def cmd_constants(sys: LHSystem, args) -> tuple[dict, int]:
    cap = _cap(args)
    texts = args.candidate or [to_string(f) for f in sys.constants_of_motion]
    candidates = [parse_expr(t, sys.chart) for t in texts]
    try:
        _fill_hamiltonians(sys)
        has_hamiltonians = True
    except NotHamiltonianGenerator:
        has_hamiltonians = False
    rows, all_ok = [], True
    try:
        for f in candidates:
            check = constant_of_motion_check(sys, f, cap)
            row: dict[str, Any] = {"candidate": to_string(f), "constant_of_motion": check.ok}
            if not check.ok:
                all_ok = False
                row["witness"] = {"field": check.witness[0], "derivative": to_string(check.witness[1])}
            if has_hamiltonians:
                commute = poisson_commute_report(sys, f, cap)
                row["poisson_commute"] = [
                    {"function": to_string(e.function), "bracket": to_string(e.bracket)} for e in commute
                ]
                row["poisson_commute_all_zero"] = all(e.zero for e in commute)
            if check.ok:
                row["symmetry"] = fmt_field(symmetry_from_constant(sys, f, cap))
            rows.append(row)
    except NotClosed as exc:
        raise _cap_outcome({"candidates": rows}, exc.__cause__, "vector fields or functions")
    report = {"candidates": rows, "status": "ok" if all_ok else "refuted"}
    return report, EXIT_OK if all_ok else EXIT_REFUTED


def _point(sys: LHSystem, values: Sequence[str] | None) -> dict[str, float] | None:
    """Parse ``--x0``: plain numbers in state order, or ``name=value`` pairs."""
    if not values:
        return None
    state = sys.chart.state_names
    point: dict[str, float] = {}
    try:
        if all("=" in v for v in values):
            for v in values:
                name, num = v.split("=", 1)
                if name not in state:
                    raise DefinitionError(f"--x0 names unknown state variable {name!r}")
                point[name] = float(Fraction(num))
        else:
            if len(values) != len(state):
                raise DefinitionError(f"--x0 needs {len(state)} values ({', '.join(state)}), got {len(values)}")
            point = {v: float(Fraction(x)) for v, x in zip(state, values)}
    except (ValueError, ZeroDivisionError) as exc:
        raise DefinitionError(f"bad --x0 value: {exc}") from None
    missing = [v for v in state if v not in point]
    if missing:
        raise DefinitionError(f"--x0 lacks values for {missing}")
    return point


def cmd_linearize(sys: LHSystem, args) -> tuple[dict, int]:
    cap = _cap(args)
    x0 = _point(sys, args.x0)
    names = args.names
    try:
        res = linearize(sys, sample=x0, new_names=names, cap=cap)
    except LINEARIZE_ERRORS as exc:
        report = {"status": "precondition_failed", "error": {"type": type(exc).__name__, "message": str(exc)}}
        if isinstance(exc, NotStrongComomentum) and exc.witness:
            report["error"]["witness"] = [w if isinstance(w, str) else to_string(w) for w in exc.witness]
        return report, EXIT_LINEARIZE
    except NotClosed as exc:
        raise _cap_outcome({}, exc.__cause__, "vector fields")
    new = list(res.new_chart.names)
    cfg = IntegratorConfig(args.t0, args.t1, args.dt)
    start = x0 if x0 is not None else {v: res.sample_point[v] for v in sys.chart.state_names}
    deviation = linearization_oracle(sys, res, start, cfg)
    ok = deviation < args.tol
    report = {
        "status": "ok" if ok else "refuted",
        "new_coordinates": {n: to_string(h) for n, h in zip(new, res.new_coordinates)},
        "structure_constants": fmt_structure(res.fn_structure, new),
        "linear_bivector": fmt_bivector(res.linear_bivector),
        "linear_system": [[a.text for a in row] for row in res.linear_system],
        "jacobian_determinant": to_string(res.jacobian_determinant),
        "sample_point": res.sample_point,
        "oracle": {"x0": start, "t0": cfg.t0, "t1": cfg.t1, "dt": cfg.dt, "max_deviation": deviation,
                   "tolerance": args.tol, "ok": ok},
    }
    return report, EXIT_OK if ok else EXIT_REFUTED


def cmd_integrate(sys: LHSystem, args) -> tuple[dict, int]:
    x0 = _point(sys, args.x0)
    if x0 is None:
        raise DefinitionError("--x0 is required")
    try:
        cfg = IntegratorConfig(args.t0, args.t1, args.dt, args.record_every)
    except ValueError as exc:
        raise DefinitionError(str(exc)) from None
    if args.monitor:
        watched = [parse_expr(t, sys.chart) for t in args.monitor]
    else:
        watched = list(sys.constants_of_motion)
    casimirs = [f for f in sys.constants_of_motion if casimir_check(sys.poisson, f) and not f.is_constant()]
    report: dict[str, Any] = {"x0": x0, "t0": cfg.t0, "t1": cfg.t1, "dt": cfg.dt}
    try:
        traj = integrate(sys, x0, cfg)
        report["steps"] = len(traj) - 1
        report["final_state"] = traj.final
        report["error_estimate"] = traj.error_estimate
        report["monitor"] = fmt_monitor(monitor(sys, traj, watched, args.tol))
        leaf = leaf_check(sys, traj, casimirs, args.tol)
        report["leaf_check"] = {"casimirs": fmt_monitor(leaf), "confined": leaf.ok}
    except DomainViolation as exc:
        report.update(status="domain_violation", error={"type": type(exc).__name__, "message": str(exc)},
                      exit_time=exc.time)
        return report, EXIT_DOMAIN
    if args.out:
        Path(args.out).write_text(traj.to_csv())
        report["csv"] = str(args.out)
    report["status"] = "ok"
    return report, EXIT_OK


def cmd_export(args) -> tuple[str, int]:
    params = {}
    for item in args.param or ():
        if "=" not in item:
            raise BadParams(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k] = v
    sys = catalog.get_system(args.name, **params)
    return json.dumps(dump_definition(sys), indent=2) + "\n", EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lieham", description="Lie-Hamilton system checks and integration.")
    sub = p.add_subparsers(dest="command", required=True)

    def system_cmd(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("file", help="system definition JSON, or catalog:NAME for a shipped one")
        sp.add_argument("--cap", type=int, default=None, help="closure cap (default $LIEHAM_CAP or 32)")
        sp.add_argument("--report", help="write the JSON report here instead of stdout")
        return sp

    system_cmd("check", "certify a Lie-Hamiltonian structure")
    system_cmd("closure", "compute the generated Lie algebras")
    sp = system_cmd("constants", "verify candidate constants of motion")
    sp.add_argument("--candidate", nargs="+", help="expressions (default: the file's constants_of_motion)")
    sp = system_cmd("linearize", "build linear coordinates and run the numeric oracle")
    sp.add_argument("--x0", nargs="+", help="oracle start point (default: the certificate sample point)")
    sp.add_argument("--names", nargs="+", help="names of the new coordinates")
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--t1", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp = system_cmd("integrate", "RK4 integration with drift monitoring")
    sp.add_argument("--x0", nargs="+", help="initial state, in chart order or as name=value")
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--t1", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--record-every", type=int, default=1)
    sp.add_argument("--monitor", nargs="+", help="functions whose drift is reported (default: the file's constants_of_motion)")
    sp.add_argument("--tol", type=float, default=CONSERVATION_TOL, help="relative drift tolerance")
    sp.add_argument("--out", help="write the trajectory CSV here")

    sp = sub.add_parser("export", help="write a catalog system as a definition file")
    sp.add_argument("name", choices=catalog.NAMES)
    sp.add_argument("--param", nargs="+", help="catalog parameters as key=value")
    sp.add_argument("-o", "--output", help="output path (default stdout)")

    sub.add_parser("list", help="list catalog systems and shipped definition files")
    return p


COMMANDS = {
    "check": cmd_check,
    "closure": cmd_closure,
    "constants": cmd_constants,
    "linearize": cmd_linearize,
    "integrate": cmd_integrate,
}


def _error_report(exc: BaseException) -> dict:
    err: dict[str, Any] = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ExprSyntaxError):
        err["position"] = exc.position
        err["expected"] = list(exc.expected)
    return err


def run(argv: Sequence[str] | None = None) -> tuple[str, int, str | None]:
    """Execute a command; return ``(output text, exit code, output path)``."""
    args = build_parser().parse_args(argv)
    if args.command == "list":
        shipped = sorted(p.name[:-5] for p in data_dir().iterdir() if p.name.endswith(".json"))
        text = json.dumps({"catalog": list(catalog.NAMES), "files": [f"catalog:{s}" for s in shipped]}, indent=2)
        return text + "\n", EXIT_OK, None
    if args.command == "export":
        try:
            text, code = cmd_export(args)
        except (UnknownSystem, BadParams, ExprSyntaxError, UnknownVariable) as exc:
            return json.dumps({"status": "error", "error": _error_report(exc)}, indent=2) + "\n", EXIT_PARSE, None
        return text, code, args.output

    report: dict[str, Any] = {"command": args.command, "file": args.file}
    try:
        sys_ = load_system(args.file)
        report["system"] = sys_.label
        body, code = COMMANDS[args.command](sys_, args)
        report.update(body)
    except Outcome as out:
        report.update(out.report)
        code = out.code
    except NotPoisson as exc:
        i, j, k = exc.witness.triple
        report.update(status="refuted", jacobi=False,
                      witness={"triple": [i, j, k], "jacobiator": to_string(exc.witness.residue)})
        code = EXIT_REFUTED
    except NotHamiltonianGenerator as exc:
        report.update(status="refuted", lie_hamilton=False,
                      witness={"generator": exc.name, "lie_derivative_of_bivector": fmt_bivector(exc.witness)})
        code = EXIT_REFUTED
    except PARSE_ERRORS as exc:
        report.update(status="error", error=_error_report(exc))
        code = EXIT_PARSE
    except DomainViolation as exc:
        report.update(status="domain_violation", error=_error_report(exc), exit_time=exc.time)
        code = EXIT_DOMAIN
    except (LieHamError, ValueError) as exc:
        report.update(status="error", error=_error_report(exc))
        code = EXIT_PARSE
    report["exit_code"] = code
    return json.dumps(report, indent=2) + "\n", code, getattr(args, "report", None)


def main(argv: Sequence[str] | None = None) -> int:
    text, code, path = run(argv)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
