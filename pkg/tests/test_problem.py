"""Problem model, Lagrangian values, step-size feasibility, reference points."""

import math

import numpy as np
import pytest

from iapd.linalg import LinearMap
from iapd.problem import (
    SaddleProblem,
    StepParams,
    compute_reference,
    default_step_params,
    validate_params,
)
from iapd.proxfuns import (
    L1Norm,
    NonnegIndicator,
    ShiftedQuadratic,
    SmoothFunction,
    ZeroProx,
    ZeroSmooth,
)


def scalar_problem(f1=None, shift=0.0):
    return SaddleProblem(
        f1=f1 if f1 is not None else L1Norm(0.1),
        f2=ZeroSmooth(),
        g1=ShiftedQuadratic([shift]),
        g2=ZeroSmooth(),
        K=LinearMap.identity(1),
    )


class TenLipschitz(SmoothFunction):
    lipschitz = 10.0

    def value(self, x):
        return 5.0 * float(x @ x)

    def grad(self, x):
        return 10.0 * np.asarray(x, dtype=np.float64)


def test_requires_strongly_convex_g1():
    with pytest.raises(ValueError):
        SaddleProblem(
            f1=L1Norm(0.1), f2=ZeroSmooth(), g1=ZeroProx(), g2=ZeroSmooth(),
            K=LinearMap.identity(2),
        )


def test_shift_length_must_match_rows():
    with pytest.raises(ValueError):
        SaddleProblem(
            f1=L1Norm(0.1), f2=ZeroSmooth(), g1=ShiftedQuadratic([1.0, 2.0]),
            g2=ZeroSmooth(), K=LinearMap.identity(3),
        )


def test_dims_and_mu():
    p = SaddleProblem(
        f1=L1Norm(0.1), f2=ZeroSmooth(), g1=ShiftedQuadratic(np.zeros(3)),
        g2=ZeroSmooth(), K=LinearMap.zeros(3, 5),
    )
    assert (p.primal_dim, p.dual_dim, p.mu_g) == (5, 3, 1.0)


def test_lagrangian_scalar_hand_value():
    # 0.1|x| + x y - 0.5 y^2 at x = y = 1 gives 0.1 + 1 - 0.5 = 0.6.
    p = scalar_problem()
    assert p.lagrangian(np.array([1.0]), np.array([1.0])) == pytest.approx(0.6)


def test_lagrangian_zero_like_parts_vanish():
    # With a centered quadratic dual term, L(x, 0) = f(x); ZeroProx-style
    # primal gives 0 for every x at y = 0.
    p = scalar_problem(f1=ZeroProx())
    for x in (-3.0, 0.0, 7.5):
        assert p.lagrangian(np.array([x]), np.array([0.0])) == 0.0


def test_lagrangian_infeasible_primal_dominates():
    p = SaddleProblem(
        f1=NonnegIndicator(), f2=ZeroSmooth(), g1=ShiftedQuadratic([0.0]),
        g2=ZeroSmooth(), K=LinearMap.identity(1),
    )
    assert p.lagrangian(np.array([-1.0]), np.array([0.0])) == np.inf


def test_primal_objective_matches_sup_over_y():
    p = SaddleProblem(
        f1=L1Norm(0.3), f2=ZeroSmooth(), g1=ShiftedQuadratic([2.0, -1.0]),
        g2=ZeroSmooth(), K=LinearMap(np.array([[1.0, 0.5], [0.0, 2.0]])),
    )
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.standard_normal(2)
        direct = p.primal_objective(x)
        # sup_y attained at y = Kx - shift
        y = p.K.apply(x) - p.g1.shift
        assert direct == pytest.approx(p.lagrangian(x, y), rel=1e-12, abs=1e-12)
        # any other y gives a smaller Lagrangian value
        assert p.lagrangian(x, y + rng.standard_normal(2)) <= direct + 1e-10


# -- step-size feasibility -------------------------------------------------


def test_validate_params_accepts_strict_choice():
    p = scalar_problem()
    knorm = p.K.norm()
    params = StepParams(alpha=0.98 / (2.0 * knorm), beta=2.0 / knorm, t1=5.0)
    report = validate_params(p, params)
    assert report.ok and not report.violations


def test_validate_params_rejects_coupling_violation():
    p = scalar_problem()
    knorm = p.K.norm()
    report = validate_params(p, StepParams(alpha=2.0 / knorm, beta=2.0 / knorm))
    assert not report.ok
    assert any("K" in v.condition for v in report.violations)


def test_validate_params_rejects_smooth_violation():
    p = SaddleProblem(
        f1=L1Norm(0.1), f2=TenLipschitz(), g1=ShiftedQuadratic([0.0]),
        g2=ZeroSmooth(), K=LinearMap.identity(1),
    )
    report = validate_params(p, StepParams(alpha=0.2, beta=0.01))
    assert not report.ok
    assert any("1/L_f2" in v.condition for v in report.violations)


def test_validate_params_rejects_nonpositive_and_bad_t1():
    p = scalar_problem()
    assert not validate_params(p, StepParams(alpha=-1.0, beta=1.0)).ok
    assert not validate_params(p, StepParams(alpha=0.1, beta=0.0)).ok
    assert not validate_params(p, StepParams(alpha=0.1, beta=0.1, t1=0.5)).ok


def test_validate_params_monotone_in_alpha():
    # Shrinking a feasible alpha never introduces a violation.
    p = scalar_problem()
    knorm = p.K.norm()
    base = StepParams(alpha=0.98 / (2.0 * knorm), beta=2.0 / knorm, t1=5.0)
    assert validate_params(p, base).ok
    for scale in (0.5, 0.1, 1e-3):
        assert validate_params(p, StepParams(base.alpha * scale, base.beta, base.t1)).ok


def test_default_step_params_feasible_across_structures():
    rng = np.random.default_rng(4)
    dense = SaddleProblem(
        f1=L1Norm(0.1), f2=ZeroSmooth(), g1=ShiftedQuadratic(rng.standard_normal(6)),
        g2=ZeroSmooth(), K=LinearMap(rng.standard_normal((6, 9))),
    )
    assert validate_params(dense, default_step_params(dense)).ok
    smooth = SaddleProblem(
        f1=L1Norm(0.1), f2=TenLipschitz(), g1=ShiftedQuadratic([0.0]),
        g2=ZeroSmooth(), K=LinearMap.identity(1),
    )
    assert validate_params(smooth, default_step_params(smooth)).ok
    decoupled = SaddleProblem(
        f1=L1Norm(0.1), f2=ZeroSmooth(), g1=ShiftedQuadratic([0.0]),
        g2=ZeroSmooth(), K=LinearMap.zeros(1, 4),
    )
    assert validate_params(decoupled, default_step_params(decoupled)).ok


# -- reference points ------------------------------------------------------


def test_compute_reference_scalar_nnls():
    # dual part 0.5 (y + 2)^2 has conjugate 0.5 z^2 - 2 z, so the primal
    # objective over x >= 0 is 0.5 x^2 - 2 x: x* = 2, y* = x* - 2 = 0.
    p = SaddleProblem(
        f1=NonnegIndicator(), f2=ZeroSmooth(), g1=ShiftedQuadratic([2.0]),
        g2=ZeroSmooth(), K=LinearMap.identity(1),
    )
    ref = compute_reference(p, 20000)
    assert ref.x_star[0] == pytest.approx(2.0, abs=1e-5)
    assert ref.y_star[0] == pytest.approx(0.0, abs=1e-5)
    assert ref.objective_value == pytest.approx(-2.0, abs=1e-9)
    assert ref.accuracy <= 1e-8


def test_compute_reference_decoupled_l1_gives_zero():
    p = SaddleProblem(
        f1=L1Norm(0.5), f2=ZeroSmooth(), g1=ShiftedQuadratic([0.0]),
        g2=ZeroSmooth(), K=LinearMap.zeros(1, 3),
    )
    ref = compute_reference(p, 50)
    assert np.array_equal(ref.x_star, np.zeros(3))


def test_compute_reference_agrees_with_independent_solver():
    from iapd.bench import generate_l1ls
    from iapd.proxfuns import LeastSquares
    from iapd.solvers import SolverOptions, solve_fista

    inst = generate_l1ls(30, 60, 0.1, seed=5)
    ref = compute_reference(inst.problem, 8000, objective=inst.objective)
    f2 = LeastSquares(inst.problem.K, inst.b)
    x, _ = solve_fista(
        inst.problem.f1, f2, 1.0 / f2.lipschitz,
        SolverOptions(max_iters=20000), x0=np.zeros(60),
    )
    fista_val = inst.objective(x)
    assert ref.objective_value == pytest.approx(fista_val, rel=1e-8, abs=1e-10)


def test_reference_satisfies_saddle_inequalities_on_probes():
    from iapd.bench import generate_l1ls

    inst = generate_l1ls(25, 40, 0.1, seed=9)
    p = inst.problem
    ref = compute_reference(p, 6000)
    mid = p.lagrangian(ref.x_star, ref.y_star)
    rng = np.random.default_rng(1)
    tol = 1e-6 * (1.0 + abs(mid))
    for _ in range(50):
        x = ref.x_star + 0.1 * rng.standard_normal(p.primal_dim)
        y = ref.y_star + 0.1 * rng.standard_normal(p.dual_dim)
        assert p.lagrangian(x, ref.y_star) >= mid - tol
        assert p.lagrangian(ref.x_star, y) <= mid + tol


def test_compute_reference_rejects_bad_inputs():
    p = scalar_problem()
    with pytest.raises(ValueError):
        compute_reference(p, 0)
    with pytest.raises(ValueError):
        compute_reference(p, 10, params=StepParams(alpha=-1.0, beta=1.0))


def test_nesterov_branch_locks_in_under_strong_dual_steps():
    # With beta * mu_g > 1 + 1/t1 the strongly convex branch never binds,
    # so the scalar sequence follows the plain Nesterov recursion forever.
    from iapd.solvers import TSequence, nesterov_branch_active

    t1 = 1.0
    a = 1.0 + 1.0 / t1 + 0.5
    seq = TSequence(t1, a)
    t_plain = t1
    for _ in range(10_000):
        assert nesterov_branch_active(seq.t, a)
        seq.advance()
        t_plain = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_plain * t_plain))
        assert seq.t == t_plain
