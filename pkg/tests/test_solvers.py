import numpy as np
import pytest

from secopt.errors import ConfigError, DivergenceError, DomainError
from secopt.experiments import (build_numerical_example, build_traffic_example,
                                reference_optimum)
from secopt.problem import (AgentSpec, BoxSet, NegLog, PrimalDualState,
                            ProblemSpec, Quadratic, SolverParams, Zero,
                            initial_state)
from secopt.solvers import (dual_subgradient, eval_objective,
                            primal_subgradient, project_box, rpds_step,
                            solve_plaintext, spds_step, stopping_error)

# reported two-agent optimizer used as a fixed evaluation point; the exact
# objective value there was computed independently in rational arithmetic
X_EVAL = [np.array([0.0, 0.5750]), np.array([0.4814, 0.0564])]
OBJ_AT_X_EVAL = 3.084022845


def _zero_spec(n=2, dim=2):
    agents = [AgentSpec(np.zeros((dim, dim)), np.zeros((dim, dim)), Zero(),
                        BoxSet([0.0] * dim, [1.0] * dim)) for _ in range(n)]
    return ProblemSpec(agents, c=np.zeros(dim), d=np.zeros(dim))


# ---------------------------------------------------------------------------
# objective and subgradients
# ---------------------------------------------------------------------------

def test_objective_known_value():
    spec, _ = build_numerical_example()
    assert eval_objective(spec, X_EVAL) == pytest.approx(OBJ_AT_X_EVAL, abs=1e-12)


def test_objective_all_zero():
    spec = _zero_spec()
    assert eval_objective(spec, [np.zeros(2), np.zeros(2)]) == 0.0


def test_objective_single_agent_identity():
    a = AgentSpec(np.eye(2), np.zeros((1, 2)), Zero(), BoxSet([0, 0], [2, 2]))
    spec = ProblemSpec([a], c=np.zeros(2), d=np.zeros(1), rho=2.0)
    assert eval_objective(spec, [np.array([1.0, 1.0])]) == 2.0


def test_primal_subgradient_at_origin():
    spec, _ = build_numerical_example()
    x0 = [np.zeros(2), np.zeros(2)]
    g = primal_subgradient(spec, x0, np.zeros(2), 0)
    assert np.allclose(g, [1.0, 0.5], atol=0)


def test_primal_subgradient_zero_problem():
    spec = _zero_spec()
    g = primal_subgradient(spec, [np.zeros(2), np.zeros(2)], np.zeros(2), 1)
    assert np.array_equal(g, np.zeros(2))


def test_primal_subgradient_neglog():
    a = AgentSpec(np.zeros((1, 1)), np.zeros((1, 1)), NegLog(10.0),
                  BoxSet([0.0], [np.inf]))
    spec = ProblemSpec([a], c=[0.0], d=[0.0])
    g = primal_subgradient(spec, [np.zeros(1)], np.zeros(1), 0)
    assert np.array_equal(g, [-10.0])


def test_primal_subgradient_bad_index():
    spec = _zero_spec()
    with pytest.raises(ConfigError):
        primal_subgradient(spec, [np.zeros(2), np.zeros(2)], np.zeros(2), 5)


def test_neglog_domain_error_propagates():
    a = AgentSpec(np.zeros((1, 1)), np.zeros((1, 1)), NegLog(10.0),
                  BoxSet([0.0], [np.inf]))
    spec = ProblemSpec([a], c=[0.0], d=[0.0])
    with pytest.raises(DomainError):
        primal_subgradient(spec, [np.array([-2.0])], np.zeros(1), 0)


def test_dual_subgradient_at_origin_is_offset():
    spec, _ = build_numerical_example()
    g = dual_subgradient(spec, [np.zeros(2), np.zeros(2)])
    assert np.array_equal(g, [-1.0, 1.0])


def test_dual_subgradient_feasible_at_optimum():
    spec, _ = build_numerical_example()
    g = dual_subgradient(spec, reference_optimum("numerical"))
    assert np.all(g <= 1e-3)


def test_traffic_dual_subgradient_at_origin():
    spec, _ = build_traffic_example()
    g = dual_subgradient(spec, [np.zeros(1) for _ in range(5)])
    assert np.array_equal(g, -np.ones(9))


def test_gradient_matches_finite_differences():
    # Lagrangian gradient vs central differences at random interior points
    rng = np.random.default_rng(0)
    cases = []
    spec_n, _ = build_numerical_example()
    for _ in range(50):
        x = [rng.uniform(0.05, 0.95, 2), rng.uniform(0.05, 0.95, 2)]
        lam = rng.uniform(0.0, 2.0, 2)
        cases.append((spec_n, x, lam))
    spec_t, _ = build_traffic_example()
    for _ in range(50):
        x = [rng.uniform(0.1, 2.0, 1) for _ in range(5)]
        lam = rng.uniform(0.0, 2.0, 9)
        cases.append((spec_t, x, lam))

    def lagrangian(spec, x, lam):
        return eval_objective(spec, x) + float(lam @ dual_subgradient(spec, x))

    h = 1e-6
    for spec, x, lam in cases:
        for i in range(spec.n):
            g = primal_subgradient(spec, x, lam, i)
            for j in range(x[i].size):
                xp = [xi.copy() for xi in x]
                xm = [xi.copy() for xi in x]
                xp[i][j] += h
                xm[i][j] -= h
                fd = (lagrangian(spec, xp, lam) - lagrangian(spec, xm, lam)) / (2 * h)
                assert abs(fd - g[j]) <= 1e-6 * max(1.0, abs(g[j]))


# ---------------------------------------------------------------------------
# update steps
# ---------------------------------------------------------------------------

def test_project_box_examples():
    box = BoxSet([0.0, 0.0], [1.0, 1.0])
    assert np.array_equal(project_box(box, np.array([-0.2, 1.5])), [0.0, 1.0])
    assert np.array_equal(project_box(box, np.array([0.4, 0.6])), [0.4, 0.6])


def test_spds_zero_subgradient_fixed_point():
    spec = _zero_spec()
    params = SolverParams(alpha=(0.1,), beta=0.1, tau_x=0.98, tau_lambda=0.98)
    state = PrimalDualState([np.array([0.3, 0.7]), np.array([0.5, 0.2])],
                            np.zeros(2))
    new = spds_step(spec, params, state)
    for xi, xo in zip(new.x, state.x):
        assert np.allclose(xi, xo, rtol=1e-15, atol=0)


def test_spds_tau_one_is_plain_projected_step():
    spec, p = build_numerical_example()
    params = SolverParams(alpha=p.alpha, beta=p.beta, tau_x=1.0, tau_lambda=1.0)
    state = initial_state(spec)
    state.x = [np.array([0.2, 0.8]), np.array([0.5, 0.1])]
    state.lam = np.array([0.3, 0.0])
    new = spds_step(spec, params, state)
    for i, a in enumerate(spec.agent_specs):
        g = primal_subgradient(spec, state.x, state.lam, i)
        want = a.box.project(state.x[i] - params.alpha_for(i, 2) * g)
        assert np.array_equal(new.x[i], want)
    g_lam = dual_subgradient(spec, state.x)
    want_lam = np.minimum(np.maximum(state.lam + params.beta * g_lam, 0.0),
                          params.lambda_max)
    assert np.array_equal(new.lam, want_lam)


def test_spds_single_step_from_origin():
    # frozen one-step values worked out by hand for the two-agent benchmark
    spec, params = build_numerical_example()
    new = spds_step(spec, params, initial_state(spec))
    assert np.array_equal(new.x[0], [0.0, 0.0])
    assert np.array_equal(new.x[1], [0.0, 0.061224489795918366])
    assert np.array_equal(new.lam, [0.0, 2.0408163265306123])


def test_rpds_single_step_from_origin():
    spec, p = build_numerical_example()
    params = SolverParams(alpha=p.alpha, beta=p.beta, tau_x=1.0, tau_lambda=1.0,
                          v=0.01, eps_reg=0.01)
    new = rpds_step(spec, params, initial_state(spec))
    assert np.array_equal(new.x[0], [0.0, 0.0])
    assert np.array_equal(new.x[1], [0.0, 0.06])
    assert np.array_equal(new.lam, [0.0, 2.0])


def test_rpds_matches_spds_when_unregularized():
    spec, p = build_numerical_example()
    params = SolverParams(alpha=p.alpha, beta=p.beta, tau_x=1.0, tau_lambda=1.0)
    state = initial_state(spec)
    state.x = [np.array([0.1, 0.9]), np.array([0.4, 0.6])]
    a = spds_step(spec, params, state)
    b = rpds_step(spec, params, state)
    assert all(np.array_equal(x, y) for x, y in zip(a.x, b.x))
    assert np.array_equal(a.lam, b.lam)


def test_rpds_shrinks_toward_zero_on_null_problem():
    dim = 2
    a = AgentSpec(np.zeros((dim, dim)), np.zeros((dim, dim)), Zero(),
                  BoxSet([0.0] * dim, [1.0] * dim))
    spec = ProblemSpec([a], c=np.zeros(dim), d=np.zeros(dim))
    params = SolverParams(alpha=(0.1,), beta=0.1, v=0.5)
    state = PrimalDualState([np.array([0.4, 0.8])], np.zeros(dim))
    new = rpds_step(spec, params, state)
    assert np.allclose(new.x[0], (1 - 0.1 * 0.5) * state.x[0], rtol=1e-15)


# ---------------------------------------------------------------------------
# full solves
# ---------------------------------------------------------------------------

def test_solve_trivial_quadratic():
    a = AgentSpec(np.zeros((1, 1)), np.zeros((1, 1)),
                  Quadratic([[1.0]], [0.0]), BoxSet([0.0], [1.0]))
    spec = ProblemSpec([a], c=[0.0], d=[0.0])
    params = SolverParams(alpha=(0.2,), beta=0.1, eps0=1e-10, k_max=500)
    init = PrimalDualState([np.array([0.9])], np.zeros(1))
    traj = solve_plaintext(spec, params, init=init)
    assert abs(traj[-1].x[0][0]) <= 1e-6


def test_solve_numerical_reaches_reference():
    spec, params = build_numerical_example()
    traj = solve_plaintext(spec, params)
    ref = reference_optimum("numerical")
    for xi, ri in zip(traj[-1].x, ref):
        assert np.linalg.norm(xi - ri) <= 5e-3


def test_solve_traffic_reaches_reference():
    spec, params = build_traffic_example()
    traj = solve_plaintext(spec, params)
    ref = reference_optimum("traffic")
    for xi, ri in zip(traj[-1].x, ref):
        assert np.linalg.norm(xi - ri) <= 1e-2


def test_solve_terminates_at_cap():
    spec = _zero_spec()
    params = SolverParams(alpha=(0.1,), beta=0.1, eps0=1e-300, k_max=50)
    traj = solve_plaintext(spec, params)
    assert len(traj) == 51
    assert traj[-1].k == 50


def test_methods_agree_unregularized():
    spec, p = build_numerical_example()
    params = SolverParams(alpha=p.alpha, beta=p.beta, tau_x=1.0, tau_lambda=1.0,
                          eps0=1e-300, k_max=200)
    ta = solve_plaintext(spec, params, method="spds")
    tb = solve_plaintext(spec, params, method="rpds")
    for sa, sb in zip(ta, tb):
        assert all(np.array_equal(x, y) for x, y in zip(sa.x, sb.x))
        assert np.array_equal(sa.lam, sb.lam)


def test_unknown_method():
    spec, params = build_numerical_example()
    with pytest.raises(ConfigError):
        solve_plaintext(spec, params, method="admm")


def test_divergence_reported():
    a = AgentSpec(np.zeros((1, 1)), np.zeros((1, 1)),
                  Quadratic([[1.0]], [0.0]),
                  BoxSet([-np.inf], [np.inf]))
    spec = ProblemSpec([a], c=[0.0], d=[0.0])
    params = SolverParams(alpha=(2.0,), beta=0.1, eps0=1e-300, k_max=5000)
    init = PrimalDualState([np.array([1.0])], np.zeros(1))
    with pytest.raises(DivergenceError) as exc:
        solve_plaintext(spec, params, init=init)
    assert exc.value.iteration > 0


def test_stopping_error_definition():
    s0 = PrimalDualState([np.array([0.0, 0.0])], np.array([0.0]), 0)
    s1 = PrimalDualState([np.array([3.0, 4.0])], np.array([2.0]), 1)
    assert stopping_error(s0, s1) == 5.0 + 2.0


def test_feasibility_after_every_step():
    spec, params = build_numerical_example()
    state = initial_state(spec)
    for _ in range(50):
        state = spds_step(spec, params, state)
        for xi, a in zip(state.x, spec.agent_specs):
            assert a.box.contains(xi)
        assert np.all(state.lam >= 0) and np.all(state.lam <= params.lambda_max)
