"""Accelerated primal-dual solver (Options 1 and 2) plus baseline schemes.

All solvers share the trace-row schema and an optional per-iteration
observer invoked as ``observer(row, state)``; the observer may fill the
``gap_ref`` and ``energy`` fields in place before the row is stored.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .problem import ReferencePoint, SaddleProblem, StepParams, validate_params
from .proxfuns import ProxFunction, SmoothFunction, ZeroSmooth

__all__ = [
    "DivergenceError",
    "UnsupportedStructureError",
    "next_t",
    "nesterov_branch_active",
    "TSequence",
    "IapdState",
    "SolverOptions",
    "TraceRow",
    "init_iapd_state",
    "iapd_step",
    "solve_iapd",
    "solve_pda",
    "solve_apda",
    "solve_fista",
    "solve_tseng",
]


class DivergenceError(RuntimeError):
    """A solver produced a non-finite iterate."""


class UnsupportedStructureError(ValueError):
    """A baseline needs full-prox f and g (no composite smooth parts)."""


# -- extrapolation scalar sequence ----------------------------------------


def next_t(t: float, a: float) -> float:
    """min of the Nesterov branch and the strongly-convex branch sqrt(t^2 + a t)."""
    return min(0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t)), math.sqrt(t * t + a * t))


def nesterov_branch_active(t: float, a: float) -> bool:
    """True when the Nesterov branch attains the min at scalar t."""
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t)) <= math.sqrt(t * t + a * t)


class TSequence:
    """The scalar sequence t_1, t_2, ... with growth parameter a = mu_g * beta."""

    def __init__(self, t1: float, a: float):
        if t1 < 1:
            raise ValueError("t1 must be >= 1")
        if a < 0:
            raise ValueError("a must be nonnegative")
        self.t = float(t1)
        self.a = float(a)

    def advance(self) -> float:
        self.t = next_t(self.t, self.a)
        return self.t


# -- accelerated primal-dual ----------------------------------------------


@dataclass
class IapdState:
    """Full iterate state at index k (k = 1 is the initial state)."""

    x: np.ndarray
    x_prev: np.ndarray
    y: np.ndarray
    y_prev: np.ndarray
    u: np.ndarray
    v: np.ndarray
    v_prev: np.ndarray
    t: float
    t_next: float
    k: int = 1


@dataclass
class SolverOptions:
    max_iters: int
    option: str = "option1"
    observer_stride: int = 1
    gap_tol: float | None = None
    reference: ReferencePoint | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.observer_stride < 1:
            raise ValueError("observer_stride must be >= 1")
        if self.option not in ("option1", "option2"):
            raise ValueError(f"unknown option {self.option!r}")


@dataclass
class TraceRow:
    algorithm: str
    k: int
    t_k: float
    objective: float
    gap_ref: float = math.nan
    dx: float = math.nan
    dy: float = math.nan
    energy: float = math.nan
    elapsed_s: float = 0.0


def init_iapd_state(
    problem: SaddleProblem,
    params: StepParams,
    x0: np.ndarray | None = None,
    y0: np.ndarray | None = None,
) -> IapdState:
    """Initial state: u_1 = x_1 = x_0 and v_1 = v_0 = y_1 = y_0."""
    x0 = np.zeros(problem.primal_dim) if x0 is None else np.asarray(x0, dtype=np.float64)
    y0 = np.zeros(problem.dual_dim) if y0 is None else np.asarray(y0, dtype=np.float64)
    a = problem.mu_g * params.beta
    return IapdState(
        x=x0.copy(),
        x_prev=x0.copy(),
        y=y0.copy(),
        y_prev=y0.copy(),
        u=x0.copy(),
        v=y0.copy(),
        v_prev=y0.copy(),
        t=float(params.t1),
        t_next=next_t(params.t1, a),
        k=1,
    )


def iapd_step(
    problem: SaddleProblem,
    params: StepParams,
    state: IapdState,
    option: str = "option1",
) -> IapdState:
    """One accelerated primal-dual iteration; returns the advanced state."""
    alpha, beta = params.alpha, params.beta
    t, t_next = state.t, state.t_next
    ratio = (t - 1.0) / t_next

    xbar = state.x + ratio * (state.x - state.x_prev)
    ybar = state.y + ratio * (state.y - state.y_prev)

    v_extra = state.v + (t / t_next) * (state.v - state.v_prev)
    w = problem.f2.grad(xbar) + problem.K.apply_adjoint(v_extra)

    if option == "option1":
        x_next = problem.f1.prox(alpha, xbar - alpha * w)
        u_next = x_next + (t_next - 1.0) * (x_next - state.x)
    elif option == "option2":
        u_next = problem.f1.prox(alpha * t_next, state.u - alpha * t_next * w)
        x_next = ((t_next - 1.0) * state.x + u_next) / t_next
    else:
        raise ValueError(f"unknown option {option!r}")

    dual_step = beta / t_next
    v_next = problem.g1.prox(dual_step, state.v - dual_step * (problem.g2.grad(ybar) - problem.K.apply(u_next)))
    y_next = ((t_next - 1.0) * state.y + v_next) / t_next

    if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(y_next)) and np.all(np.isfinite(v_next))):
        raise DivergenceError(f"non-finite iterate at iteration {state.k + 1}")

    a = problem.mu_g * beta
    return IapdState(
        x=x_next,
        x_prev=state.x,
        y=y_next,
        y_prev=state.y,
        u=u_next,
        v=v_next,
        v_prev=state.v,
        t=t_next,
        t_next=next_t(t_next, a),
        k=state.k + 1,
    )


def _stop_by_gap(opts: SolverOptions, objective, x) -> bool:
    if opts.gap_tol is None or opts.reference is None or objective is None:
        return False
    return objective(x) - opts.reference.objective_value <= opts.gap_tol


def solve_iapd(
    problem: SaddleProblem,
    params: StepParams,
    opts: SolverOptions,
    observer=None,
    state: IapdState | None = None,
    objective=None,
    name: str | None = None,
) -> tuple[IapdState, list[TraceRow]]:
    """Iterate the accelerated primal-dual scheme under the given options.

    Raises ValueError for infeasible parameters. On divergence the partial
    trace is attached to the raised :class:`DivergenceError` as ``rows``.
    """
    report = validate_params(problem, params)
    if not report.ok:
        raise ValueError(f"invalid step parameters: {[str(v) for v in report.violations]}")
    if state is None:
        state = init_iapd_state(problem, params)
    name = name or ("iapd-op1" if opts.option == "option1" else "iapd-op2")

    rows: list[TraceRow] = []
    start = time.monotonic()
    for i in range(1, opts.max_iters + 1):
        try:
            state = iapd_step(problem, params, state, opts.option)
        except DivergenceError as err:
            err.rows = rows
            raise
        if i % opts.observer_stride == 0 or i == opts.max_iters:
            row = TraceRow(
                algorithm=name,
                k=state.k,
                t_k=state.t,
                objective=float(objective(state.x)) if objective else math.nan,
                dx=float(np.linalg.norm(state.x - state.x_prev)),
                dy=float(np.linalg.norm(state.y - state.y_prev)),
                elapsed_s=time.monotonic() - start,
            )
            if observer is not None:
                observer(row, state)
            rows.append(row)
        if _stop_by_gap(opts, objective, state.x):
            break
    return state, rows


# -- baselines -------------------------------------------------------------


def _require_full_prox(problem: SaddleProblem, algorithm: str) -> None:
    if not isinstance(problem.f2, ZeroSmooth) or not isinstance(problem.g2, ZeroSmooth):
        raise UnsupportedStructureError(
            f"{algorithm} needs prox-friendly f and g; composite smooth parts are not supported"
        )


def _trace_loop(name, opts, iterate, x_of, y_of, t_of, observer, objective):
    """Shared driver: run ``iterate(i)`` max_iters times, recording rows."""
    rows: list[TraceRow] = []
    start = time.monotonic()
    x_prev = x_of()
    y_prev = y_of() if y_of else None
    for i in range(1, opts.max_iters + 1):
        iterate(i)
        x = x_of()
        if not np.all(np.isfinite(x)):
            err = DivergenceError(f"non-finite iterate at iteration {i}")
            err.rows = rows
            raise err
        if i % opts.observer_stride == 0 or i == opts.max_iters:
            y = y_of() if y_of else None
            row = TraceRow(
                algorithm=name,
                k=i,
                t_k=t_of() if t_of else math.nan,
                objective=float(objective(x)) if objective else math.nan,
                dx=float(np.linalg.norm(x - x_prev)),
                dy=float(np.linalg.norm(y - y_prev)) if y is not None else math.nan,
                elapsed_s=time.monotonic() - start,
            )
            if observer is not None:
                observer(row, {"x": x, "y": y})
            rows.append(row)
        x_prev = x
        if y_of:
            y_prev = y_of()
        if _stop_by_gap(opts, objective, x):
            break
    return rows


def solve_pda(
    problem: SaddleProblem,
    alpha: float,
    beta: float,
    theta: float,
    opts: SolverOptions,
    observer=None,
    x0: np.ndarray | None = None,
    y0: np.ndarray | None = None,
    objective=None,
) -> tuple[np.ndarray, np.ndarray, list[TraceRow]]:
    """Fixed-step primal-dual iteration with extrapolation parameter theta.

    theta = 0 gives the plain alternating (Arrow-Hurwicz) ordering.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    _require_full_prox(problem, "pda")

    x = np.zeros(problem.primal_dim) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    y = np.zeros(problem.dual_dim) if y0 is None else np.asarray(y0, dtype=np.float64).copy()
    box = {"x": x, "y": y}

    def iterate(_i):
        x_new = problem.f1.prox(alpha, box["x"] - alpha * problem.K.apply_adjoint(box["y"]))
        xbar = x_new + theta * (x_new - box["x"])
        box["y"] = problem.g1.prox(beta, box["y"] + beta * problem.K.apply(xbar))
        box["x"] = x_new

    rows = _trace_loop("pda", opts, iterate, lambda: box["x"], lambda: box["y"], None, observer, objective)
    return box["x"], box["y"], rows


def solve_apda(
    problem: SaddleProblem,
    tau0: float,
    sigma0: float,
    gamma: float,
    opts: SolverOptions,
    observer=None,
    x0: np.ndarray | None = None,
    y0: np.ndarray | None = None,
    objective=None,
) -> tuple[np.ndarray, np.ndarray, list[TraceRow]]:
    """Adaptive-step primal-dual baseline exploiting dual strong convexity.

    Steps follow theta_k = 1/sqrt(1 + 2 gamma sigma_k), sigma <- theta sigma,
    tau <- tau/theta; gamma = 0 freezes the scheme to fixed-step form.
    """
    _require_full_prox(problem, "apda")
    knorm = problem.K.norm()
    if tau0 <= 0 or sigma0 <= 0:
        raise ValueError("tau0 and sigma0 must be positive")
    if tau0 * sigma0 * knorm**2 > 1.0 + 1e-12:
        raise ValueError("need tau0 * sigma0 * ||K||^2 <= 1")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")

    x = np.zeros(problem.primal_dim) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    y = np.zeros(problem.dual_dim) if y0 is None else np.asarray(y0, dtype=np.float64).copy()
    box = {"x": x, "y": y, "xbar": x.copy(), "tau": float(tau0), "sigma": float(sigma0)}

    def iterate(_i):
        box["y"] = problem.g1.prox(box["sigma"], box["y"] + box["sigma"] * problem.K.apply(box["xbar"]))
        x_new = problem.f1.prox(box["tau"], box["x"] - box["tau"] * problem.K.apply_adjoint(box["y"]))
        theta = 1.0 / math.sqrt(1.0 + 2.0 * gamma * box["sigma"])
        box["sigma"] *= theta
        box["tau"] /= theta
        box["xbar"] = x_new + theta * (x_new - box["x"])
        box["x"] = x_new

    rows = _trace_loop("apda", opts, iterate, lambda: box["x"], lambda: box["y"], None, observer, objective)
    return box["x"], box["y"], rows


def solve_fista(
    f1: ProxFunction,
    f2: SmoothFunction,
    alpha: float,
    opts: SolverOptions,
    observer=None,
    x0: np.ndarray | None = None,
    t1: float = 1.0,
    objective=None,
    name: str = "fista",
) -> tuple[np.ndarray, list[TraceRow]]:
    """Accelerated proximal gradient for min f1 + f2 (Beck-Teboulle scheme)."""
    if f2.lipschitz <= 0:
        raise ValueError("f2 must have a positive Lipschitz constant")
    if alpha > 1.0 / f2.lipschitz:
        raise ValueError(f"alpha must be <= 1/L = {1.0 / f2.lipschitz:.6g}")
    if x0 is None:
        raise ValueError("x0 is required")

    box = {
        "x": np.asarray(x0, dtype=np.float64).copy(),
        "x_prev": np.asarray(x0, dtype=np.float64).copy(),
        "t": float(t1),
        "t_next": 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t1 * t1)),
    }

    def iterate(_i):
        t, t_next = box["t"], box["t_next"]
        xbar = box["x"] + ((t - 1.0) / t_next) * (box["x"] - box["x_prev"])
        box["x_prev"] = box["x"]
        box["x"] = f1.prox(alpha, xbar - alpha * f2.grad(xbar))
        box["t"] = t_next
        box["t_next"] = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_next * t_next))

    rows = _trace_loop(name, opts, iterate, lambda: box["x"], None, lambda: box["t"], observer, objective)
    return box["x"], rows


def solve_tseng(
    f1: ProxFunction,
    f2: SmoothFunction,
    alpha: float,
    opts: SolverOptions,
    observer=None,
    x0: np.ndarray | None = None,
    t1: float = 1.0,
    objective=None,
    name: str = "tseng",
) -> tuple[np.ndarray, list[TraceRow]]:
    """Accelerated proximal gradient with Tseng's auxiliary-sequence update."""
    if f2.lipschitz <= 0:
        raise ValueError("f2 must have a positive Lipschitz constant")
    if alpha > 1.0 / f2.lipschitz:
        raise ValueError(f"alpha must be <= 1/L = {1.0 / f2.lipschitz:.6g}")
    if x0 is None:
        raise ValueError("x0 is required")

    x0 = np.asarray(x0, dtype=np.float64)
    box = {
        "x": x0.copy(),
        "x_prev": x0.copy(),
        "u": x0.copy(),
        "t": float(t1),
        "t_next": 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t1 * t1)),
    }

    def iterate(_i):
        t, t_next = box["t"], box["t_next"]
        xbar = box["x"] + ((t - 1.0) / t_next) * (box["x"] - box["x_prev"])
        step = alpha * t_next
        u_next = f1.prox(step, box["u"] - step * f2.grad(xbar))
        box["x_prev"] = box["x"]
        box["x"] = ((t_next - 1.0) * box["x"] + u_next) / t_next
        box["u"] = u_next
        box["t"] = t_next
        box["t_next"] = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_next * t_next))

    rows = _trace_loop(name, opts, iterate, lambda: box["x"], None, lambda: box["t"], observer, objective)
    return box["x"], rows
