"""Energy-sequence evaluation, certified rate bounds, and empirical slopes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import ReferencePoint, SaddleProblem, StepParams
from .solvers import IapdState

__all__ = [
    "EnergyReport",
    "InsufficientDataError",
    "energy",
    "energy_initial_closed_form",
    "energy_trace",
    "certify",
    "CertificateSummary",
    "SlopeFit",
    "slope",
]


class InsufficientDataError(ValueError):
    """Too few usable rows for a rate fit."""


@dataclass(frozen=True)
class EnergyReport:
    """Per-iteration energy terms and certificate quantities at the reference point."""

    k: int
    t_k: float
    t_next: float
    energy: float
    i1: float
    i2: float
    i3: float
    i4: float
    gap_ref: float
    bound_gap: float
    dual_dist_sq: float
    dual_bound: float
    v_dist_sq: float
    v_bound: float
    dx: float
    dy: float


def energy(
    problem: SaddleProblem,
    params: StepParams,
    state: IapdState,
    ref: ReferencePoint,
    e1: float | None = None,
) -> EnergyReport:
    """Evaluate the four-term energy at the reference point for one state.

    ``e1`` is the initial-state energy used in the certified bounds; when
    omitted (only sensible at k = 1) the state's own energy is used.
    """
    alpha, beta = params.alpha, params.beta
    t, t_next = state.t, state.t_next
    xs, ys = ref.x_star, ref.y_star

    gap = problem.lagrangian(state.x, ys) - problem.lagrangian(xs, state.y)
    i1 = t * t * gap

    du = state.u - xs
    i2 = float(du @ du) / (2.0 * alpha)

    dv = state.v - ys
    i3 = (t_next * t_next) * float(dv @ dv) / (2.0 * beta)

    # K is applied to u_k - x* directly, keeping the diagnostic independent
    # of any product cached inside the solver.
    dvv = state.v - state.v_prev
    i4 = -t * float(problem.K.apply(du) @ dvv) + (
        (t * t - beta * problem.g2.lipschitz) * float(dvv @ dvv) / (2.0 * beta)
    )

    total = i1 + i2 + i3 + i4
    if e1 is None:
        e1 = total

    dy_ref = state.y - ys
    return EnergyReport(
        k=state.k,
        t_k=t,
        t_next=t_next,
        energy=total,
        i1=i1,
        i2=i2,
        i3=i3,
        i4=i4,
        gap_ref=gap,
        bound_gap=e1 / (t * t),
        dual_dist_sq=float(dy_ref @ dy_ref),
        dual_bound=2.0 * e1 / (problem.mu_g * t * t),
        v_dist_sq=float(dv @ dv),
        v_bound=2.0 * beta * e1 / (t_next * t_next),
        dx=float(np.linalg.norm(state.x - state.x_prev)),
        dy=float(np.linalg.norm(state.y - state.y_prev)),
    )


def energy_initial_closed_form(
    problem: SaddleProblem,
    params: StepParams,
    state: IapdState,
    x: np.ndarray,
    y: np.ndarray,
) -> float:
    """The initial energy in its reduced three-term form (valid at k = 1 only)."""
    if state.k != 1:
        raise ValueError("closed form is only valid at the initial state")
    gap = problem.lagrangian(state.x, y) - problem.lagrangian(x, state.y)
    dx = state.x - x
    dy = state.y - y
    return (
        params.t1**2 * gap
        + float(dx @ dx) / (2.0 * params.alpha)
        + state.t_next**2 * float(dy @ dy) / (2.0 * params.beta)
    )


def energy_trace(
    problem: SaddleProblem,
    params: StepParams,
    states: list[IapdState],
    ref: ReferencePoint,
) -> list[EnergyReport]:
    """Energy reports for a list of states, with bounds anchored at the first."""
    if not states:
        return []
    first = energy(problem, params, states[0], ref)
    e1 = first.energy
    return [first] + [energy(problem, params, st, ref, e1) for st in states[1:]]


@dataclass
class CertificateSummary:
    """Violation counts for the proven bounds plus windowed residual scales."""

    rows: int
    gap_violations: int = 0
    dual_violations: int = 0
    v_violations: int = 0
    t_lower_violations: int = 0
    max_gap_excess: float = 0.0
    max_dx_t: float = 0.0
    max_dy_t2: float = 0.0
    violating_k: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.gap_violations == 0
            and self.dual_violations == 0
            and self.v_violations == 0
            and self.t_lower_violations == 0
        )


def certify(
    reports: list[EnergyReport],
    t1: float,
    a: float,
    tol: float = 1e-6,
    inflation: float = 0.0,
) -> CertificateSummary:
    """Check the certified bounds along a trace of energy reports.

    ``a`` is mu_g * beta; ``inflation`` is an extra relative slack for an
    inexact reference point. The displacement scales dx * t_k and
    dy * t_k^2 are reported as maxima, not pass/fail checks.
    """
    if not reports:
        raise ValueError("empty trace")
    slack = 1.0 + tol + inflation
    b = 2.0 * a * t1 / (a + 4.0 * t1) if a > 0 else 0.0
    t_factor = min(0.5, b)
    summary = CertificateSummary(rows=len(reports))
    for r in reports:
        if r.gap_ref > r.bound_gap * slack:
            summary.gap_violations += 1
            summary.max_gap_excess = max(summary.max_gap_excess, r.gap_ref - r.bound_gap)
            summary.violating_k.append(r.k)
        if r.dual_dist_sq > r.dual_bound * slack:
            summary.dual_violations += 1
        if r.v_dist_sq > r.v_bound * slack:
            summary.v_violations += 1
        if r.t_k < t_factor * (r.k + 1) * (1.0 - 1e-12):
            summary.t_lower_violations += 1
        summary.max_dx_t = max(summary.max_dx_t, r.dx * r.t_k)
        summary.max_dy_t2 = max(summary.max_dy_t2, r.dy * r.t_k**2)
    return summary


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    n_used: int
    n_excluded: int


def slope(reports: list[EnergyReport], k_min: int, k_max: int) -> SlopeFit:
    """Least-squares slope of log(gap) against log(k) over [k_min, k_max].

    Rows with nonpositive gap are excluded and counted; fewer than five
    usable rows raises :class:`InsufficientDataError`.
    """
    if not k_max > k_min >= 1:
        raise ValueError("need k_max > k_min >= 1")
    ks, gaps = [], []
    excluded = 0
    for r in reports:
        if k_min <= r.k <= k_max:
            if r.gap_ref > 0:
                ks.append(r.k)
                gaps.append(r.gap_ref)
            else:
                excluded += 1
    if len(ks) < 5:
        raise InsufficientDataError(
            f"only {len(ks)} usable rows in [{k_min}, {k_max}] ({excluded} nonpositive)"
        )
    logk = np.log(np.asarray(ks, dtype=np.float64))
    logg = np.log(np.asarray(gaps, dtype=np.float64))
    coef = np.polyfit(logk, logg, 1)
    return SlopeFit(float(coef[0]), float(coef[1]), len(ks), excluded)
