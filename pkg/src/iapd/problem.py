"""Saddle-point problem model, Lagrangian, step-size feasibility, reference points."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import LinearMap
from .proxfuns import ProxFunction, ShiftedQuadratic, SmoothFunction, ZeroSmooth

__all__ = [
    "SaddleProblem",
    "StepParams",
    "ParamViolation",
    "ParamReport",
    "ReferencePoint",
    "validate_params",
    "default_step_params",
    "compute_reference",
]


@dataclass(frozen=True)
class SaddleProblem:
    """min_x max_y  f1(x) + f2(x) + <Kx, y> - g1(y) - g2(y).

    g1 must be strongly convex (modulus > 0); nonemptiness of the saddle
    set is a caller obligation and is not checked.
    """

    f1: ProxFunction
    f2: SmoothFunction
    g1: ProxFunction
    g2: SmoothFunction
    K: LinearMap

    def __post_init__(self):
        if not self.g1.strong_convexity > 0:
            raise ValueError("g1 must be strongly convex (modulus > 0)")
        if isinstance(self.g1, ShiftedQuadratic) and self.g1.shift.shape != (self.K.rows,):
            raise ValueError("g1 shift length must match the row count of K")

    @property
    def primal_dim(self) -> int:
        return self.K.cols

    @property
    def dual_dim(self) -> int:
        return self.K.rows

    @property
    def mu_g(self) -> float:
        return self.g1.strong_convexity

    def lagrangian(self, x: np.ndarray, y: np.ndarray) -> float:
        """f(x) + <Kx, y> - g(y); +inf for infeasible x, -inf for infeasible y.

        Infeasible x takes precedence when both occur.
        """
        fx = self.f1.value(x)
        if np.isinf(fx):
            return np.inf
        gy = self.g1.value(y)
        if np.isinf(gy):
            return -np.inf
        return (
            fx
            + self.f2.value(x)
            + float(self.K.apply(x) @ np.asarray(y, dtype=np.float64))
            - gy
            - self.g2.value(y)
        )

    def primal_objective(self, x: np.ndarray) -> float:
        """f(x) + g*(Kx), the primal value of the saddle formulation.

        Requires g2 to vanish and g1 to have a closed-form conjugate.
        """
        if not isinstance(self.g2, ZeroSmooth):
            raise ValueError("primal objective needs a vanished g2")
        return self.f1.value(x) + self.f2.value(x) + self.g1.conjugate(self.K.apply(x))


@dataclass(frozen=True)
class StepParams:
    """Primal step alpha, dual step beta, initial extrapolation scalar t1."""

    alpha: float
    beta: float
    t1: float = 1.0


@dataclass(frozen=True)
class ParamViolation:
    condition: str
    lhs: float
    rhs: float

    def __str__(self) -> str:
        return f"{self.condition}: {self.lhs:.6g} >= {self.rhs:.6g}"


@dataclass(frozen=True)
class ParamReport:
    ok: bool
    violations: tuple[ParamViolation, ...] = ()
    norm_estimate: float = 0.0


def validate_params(problem: SaddleProblem, params: StepParams) -> ParamReport:
    """Check the strict step-size inequalities with the safety-factored norm.

    Returns a structured report; violations are not raised. The smooth-part
    conditions are vacuous when the corresponding Lipschitz constant is 0.
    """
    violations = []
    alpha, beta, t1 = params.alpha, params.beta, params.t1
    if not alpha > 0:
        violations.append(ParamViolation("alpha > 0", alpha, 0.0))
    if not beta > 0:
        violations.append(ParamViolation("beta > 0", beta, 0.0))
    if not t1 >= 1:
        violations.append(ParamViolation("t1 >= 1", t1, 1.0))
    if violations:
        return ParamReport(False, tuple(violations))

    lf2 = problem.f2.lipschitz
    lg2 = problem.g2.lipschitz
    knorm = problem.K.norm()
    if lf2 > 0 and not alpha < 1.0 / lf2:
        violations.append(ParamViolation("alpha < 1/L_f2", alpha, 1.0 / lf2))
    if lg2 > 0 and not beta < t1**2 / lg2:
        violations.append(ParamViolation("beta < t1^2/L_g2", beta, t1**2 / lg2))
    if not violations:
        lhs = alpha * beta * knorm**2
        rhs = (1.0 - alpha * lf2) * (1.0 - beta * lg2 / t1**2)
        if not lhs < rhs:
            violations.append(
                ParamViolation("alpha*beta*||K||^2 < (1-alpha*L_f2)(1-beta*L_g2/t1^2)", lhs, rhs)
            )
    return ParamReport(not violations, tuple(violations), knorm)


def default_step_params(problem: SaddleProblem, t1: float = 5.0) -> StepParams:
    """A feasible step-size choice derived from the problem constants.

    Smooth-part conditions are met with factor 0.5, and the coupling
    inequality with factor 0.98; when a side is unconstrained the split
    alpha = 0.98/(2 ||K||), beta = 2/||K|| is used.
    """
    lf2 = problem.f2.lipschitz
    lg2 = problem.g2.lipschitz
    knorm = problem.K.norm()

    alpha = 0.5 / lf2 if lf2 > 0 else None
    beta = 0.5 * t1**2 / lg2 if lg2 > 0 else None
    if knorm == 0.0:
        alpha = alpha if alpha is not None else 1.0
        beta = beta if beta is not None else max(2.0, 2.0 / problem.mu_g)
        return StepParams(alpha, beta, t1)

    budget = 0.98 * (1.0 - (alpha or 0.0) * lf2) * (1.0 - (beta or 0.0) * lg2 / t1**2)
    if alpha is None and beta is None:
        alpha = np.sqrt(budget) / (2.0 * knorm)
        beta = 2.0 * np.sqrt(budget) / knorm
    elif alpha is None:
        alpha = budget / (beta * knorm**2)
    elif beta is None:
        beta = budget / (alpha * knorm**2)
    else:
        scale = budget / (alpha * beta * knorm**2)
        if scale < 1.0:
            alpha *= np.sqrt(scale)
            beta *= np.sqrt(scale)
    params = StepParams(float(alpha), float(beta), t1)
    report = validate_params(problem, params)
    if not report.ok:
        raise RuntimeError(f"internal: default parameters infeasible: {report.violations}")
    return params


@dataclass(frozen=True)
class ReferencePoint:
    """A high-accuracy saddle-point estimate with a self-reported accuracy gap."""

    x_star: np.ndarray = field(repr=False)
    y_star: np.ndarray = field(repr=False)
    objective_value: float
    accuracy: float = 0.0


def compute_reference(
    problem: SaddleProblem,
    effort: int,
    params: StepParams | None = None,
    objective=None,
) -> ReferencePoint:
    """Run the accelerated primal-dual solver long enough to act as ground truth.

    ``effort`` is the iteration budget (use ~10x the benchmark budget). The
    reported accuracy is the Lagrangian gap between the final iterate and a
    checkpoint taken at 90% of the budget, so callers can scale tolerances.
    """
    from . import solvers

    if effort < 1:
        raise ValueError("effort must be >= 1")
    if params is None:
        params = default_step_params(problem)
    report = validate_params(problem, params)
    if not report.ok:
        raise ValueError(f"invalid reference parameters: {[str(v) for v in report.violations]}")

    checkpoint_at = max(1, (9 * effort) // 10)
    state = solvers.init_iapd_state(problem, params)
    check = None
    for _ in range(effort):
        state = solvers.iapd_step(problem, params, state, "option1")
        if state.k - 1 == checkpoint_at:
            check = (state.x.copy(), state.y.copy())
    if check is None:
        check = (state.x, state.y)

    gap = problem.lagrangian(state.x, check[1]) - problem.lagrangian(check[0], state.y)
    if objective is not None:
        value = float(objective(state.x))
    else:
        try:
            value = problem.primal_objective(state.x)
        except (ValueError, NotImplementedError):
            value = problem.lagrangian(state.x, state.y)
    return ReferencePoint(state.x, state.y, value, abs(float(gap)))
