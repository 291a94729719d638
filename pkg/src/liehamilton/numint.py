"""Fixed-step RK4 integration with invariant monitoring."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainViolation, GridMismatch, NotACasimir
from .lieham import LHSystem, casimir_check
from .symexpr import Chart, CoeffFn, Expr, compile_exprs, eval_coeff

CONSERVATION_TOL = 1e-6
FAILURE_TOL = 1e-3


@dataclass(frozen=True)
class IntegratorConfig:
    t0: float = 0.0
    t1: float = 1.0
    dt: float = 1e-3
    record_every: int = 1

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("t1 must exceed t0")
        if not 0 < self.dt <= self.t1 - self.t0:
            raise ValueError("dt must be positive and at most t1 - t0")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")

    @property
    def steps(self) -> int:
        return max(1, round((self.t1 - self.t0) / self.dt))


@dataclass
class Trajectory:
    variables: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray  # shape (len(times), len(variables))
    error_estimate: float | None = None
    parameters: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float).reshape(len(self.times), len(self.variables))
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> dict[str, float]:
        point = dict(zip(self.variables, self.states[i].tolist()))
        point.update(self.parameters)
        return point

    @property
    def final(self) -> dict[str, float]:
        return self.state(len(self) - 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.variables])
        for t, row in zip(self.times, self.states):
            w.writerow([f"{t:.17g}", *(f"{x:.17g}" for x in row)])
        return buf.getvalue()


def _vector_field(sys: LHSystem) -> tuple[Callable, list[CoeffFn]]:
    state = sys.chart.state_names
    names = list(state) + list(sys.chart.parameter_names)
    comps = [X[v] for X in sys.generators for v in state]
    return compile_exprs(comps, names), list(sys.coefficients)


def _domain_guard(chart: Chart, state: Sequence[str], y0: np.ndarray):
    """Check the chart's sign constraints after each step.

    A ``nonzero`` variable must keep the sign it started with: a sign flip
    between grid points means the exact flow crossed the excluded hyperplane.
    """
    checks = []
    for i, v in enumerate(state):
        spec = chart.spec(v)
        if spec.domain != "any":
            sign = math.copysign(1.0, y0[i]) if spec.domain == "nonzero" else None
            checks.append((i, v, spec, sign))

    def guard(y: np.ndarray, t: float):
        if not np.all(np.isfinite(y)):
            raise DomainViolation(f"state is no longer finite at t={t:.17g}", t)
        for i, v, spec, sign in checks:
            if not spec.admits(y[i]) or (sign is not None and y[i] * sign < 0):
                raise DomainViolation(f"{v}={y[i]:.17g} leaves the {spec.domain} domain at t={t:.17g}", t)

    return guard


def solve_rk4(sys: LHSystem, x0: Mapping[str, float], cfg: IntegratorConfig) -> Trajectory:
    """Single classical RK4 pass with ``N = round((t1 - t0) / dt)`` steps."""
    chart = sys.chart
    state = chart.state_names
    missing = [p for p in chart.parameter_names if p not in sys.parameters]
    if missing:
        raise DomainViolation(f"no numeric value for parameters {missing}")
    start = {**sys.parameters, **x0}
    chart.check_point({v: start[v] for v in state if v in start})
    try:
        y = np.array([float(start[v]) for v in state])
    except KeyError as exc:
        raise DomainViolation(f"initial condition lacks {exc.args[0]!r}") from None
    params = [float(sys.parameters[p]) for p in chart.parameter_names]
    fn, coeffs = _vector_field(sys)
    m, d = len(coeffs), len(state)
    guard = _domain_guard(chart, state, y)

    def rhs(t, y):
        try:
            vals = np.array(fn(*y.tolist(), *params), dtype=float).reshape(m, d) if m else np.zeros((0, d))
        except (ZeroDivisionError, ValueError, OverflowError):
            raise DomainViolation(f"vector field undefined at t={t:.17g}", t) from None
        b = np.array([eval_coeff(c, t) for c in coeffs])
        if not m:
            return np.zeros(d)
        with np.errstate(invalid="ignore", over="ignore"):
            return b @ vals

    N = cfg.steps
    h = (cfg.t1 - cfg.t0) / N
    times, states = [cfg.t0], [y.copy()]
    for k in range(N):
        t = cfg.t0 + k * h
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t_next = cfg.t0 + (k + 1) * h
        guard(y, t_next)
        if (k + 1) % cfg.record_every == 0 or k + 1 == N:
            times.append(t_next)
            states.append(y.copy())
    return Trajectory(state, np.array(times), np.array(states), None, dict(sys.parameters))


def integrate(sys: LHSystem, x0: Mapping[str, float], cfg: IntegratorConfig) -> Trajectory:
    """RK4 at ``dt`` and ``dt/2``; returns the finer run with the endpoint
    difference (Richardson-scaled by 1/15) as ``error_estimate``.
    """
    coarse = solve_rk4(sys, x0, cfg)
    fine_cfg = IntegratorConfig(cfg.t0, cfg.t1, (cfg.t1 - cfg.t0) / (2 * cfg.steps), cfg.record_every)
    fine = solve_rk4(sys, x0, fine_cfg)
    fine.error_estimate = float(np.linalg.norm(fine.states[-1] - coarse.states[-1]) / 15)
    return fine


# -- monitoring -----------------------------------------------------------------

@dataclass(frozen=True)
class Drift:
    function: Expr
    initial: float
    max_abs: float
    max_rel: float


@dataclass
class MonitorReport:
    drifts: list[Drift]
    tolerance: float = CONSERVATION_TOL

    @property
    def max_rel(self) -> float:
        return max((d.max_rel for d in self.drifts), default=0.0)

    @property
    def ok(self) -> bool:
        return self.max_rel <= self.tolerance

    def __bool__(self):
        return self.ok


def monitor(sys: LHSystem, traj: Trajectory, fs: Sequence[Expr], tol: float = CONSERVATION_TOL) -> MonitorReport:
    """Drift of each ``f`` along ``traj``; relative drift is ``|f - f0| / (1 + |f0|)``."""
    names = list(traj.variables) + [p for p in sys.chart.parameter_names]
    params = [float(traj.parameters.get(p, sys.parameters.get(p, math.nan))) for p in sys.chart.parameter_names]
    drifts = []
    for f in fs:
        fn = compile_exprs([f], names)
        try:
            vals = np.array([fn(*row, *params)[0] for row in traj.states], dtype=float)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainViolation(f"{f} cannot be evaluated along the trajectory: {exc}") from None
        if not np.all(np.isfinite(vals)):
            raise DomainViolation(f"{f} is not finite along the trajectory")
        f0 = vals[0]
        dev = np.abs(vals - f0)
        drifts.append(Drift(f, float(f0), float(dev.max()), float(dev.max() / (1 + abs(f0)))))
    return MonitorReport(drifts, tol)


def leaf_check(sys: LHSystem, traj: Trajectory, casimirs: Sequence[Expr], tol: float = CONSERVATION_TOL) -> MonitorReport:
    """Drift report for Casimir functions; ``ok`` is the confinement verdict."""
    for c in casimirs:
        if not casimir_check(sys.poisson, c):
            raise NotACasimir(f"{c} is not a Casimir function of the Poisson structure")
    return monitor(sys, traj, casimirs, tol)


# -- comparison ---------------------------------------------------------------

def _mapped(traj: Trajectory, map_fn: Sequence[Expr] | None) -> np.ndarray:
    if map_fn is None:
        return traj.states
    names = list(traj.variables) + list(traj.parameters)
    fn = compile_exprs(list(map_fn), names)
    pvals = list(traj.parameters.values())
    return np.array([fn(*row, *pvals) for row in traj.states], dtype=float)


def compare_trajectories(a: Trajectory, b: Trajectory, map_fn: Sequence[Expr] | None = None) -> float:
    """Max Euclidean distance between ``map_fn(a)`` and ``b`` over ``a``'s grid.

    ``b`` is linearly interpolated when the grids differ.
    """
    sa = _mapped(a, map_fn)
    sb = b.states
    if sa.shape[1] != sb.shape[1]:
        raise GridMismatch(f"state dimensions differ: {sa.shape[1]} vs {sb.shape[1]}")
    if len(a.times) == len(b.times) and np.array_equal(a.times, b.times):
        resampled = sb
    else:
        span = b.times[-1] - b.times[0]
        slack = 1e-12 * max(1.0, abs(span))
        if a.times[0] < b.times[0] - slack or a.times[-1] > b.times[-1] + slack:
            raise GridMismatch("first trajectory extends beyond the second's time range")
        resampled = np.column_stack([np.interp(a.times, b.times, sb[:, j]) for j in range(sb.shape[1])])
    return float(np.max(np.linalg.norm(sa - resampled, axis=1)))


def integrate_linear(A: Callable[[float], np.ndarray], y0: Sequence[float], cfg: IntegratorConfig) -> np.ndarray:
    """RK4 for ``y' = A(t) y`` on the same grid as :func:`solve_rk4`; returns all steps."""
    y = np.array(y0, dtype=float)
    N = cfg.steps
    h = (cfg.t1 - cfg.t0) / N
    out = [y.copy()]
    for k in range(N):
        t = cfg.t0 + k * h
        k1 = A(t) @ y
        k2 = A(t + h / 2) @ (y + h / 2 * k1)
        k3 = A(t + h / 2) @ (y + h / 2 * k2)
        k4 = A(t + h) @ (y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % cfg.record_every == 0 or k + 1 == N:
            out.append(y.copy())
    return np.array(out)


def linearization_oracle(sys: LHSystem, result, x0: Mapping[str, float], cfg: IntegratorConfig | None = None) -> float:
    """Integrate ``sys`` and the linear system from the mapped initial point;
    return the max deviation between the mapped trajectory and the linear one.
    """
    cfg = cfg or IntegratorConfig(0.0, 1.0, 1e-4)
    traj = solve_rk4(sys, x0, cfg)
    y0 = result.map_point({**sys.parameters, **x0})
    lin_states = integrate_linear(result.matrix, y0, cfg)
    lin = Trajectory(tuple(result.new_chart.names), traj.times, lin_states)
    return compare_trajectories(traj, lin, result.new_coordinates)
