"""Plaintext primal-dual subgradient solvers.

Two update rules operate on the relaxed Lagrangian
L(x, lam) = (rho/2)||sum_i A_ui x_i + c||^2 + sum_i f_i(x_i) + lam' (sum_i A_gi x_i + d):

* shrunken updates ("spds"): double box projection around shrink factors
  tau_x, tau_lambda, no regularization bias;
* regularized updates ("rpds"): plain projections on the regularized
  Lagrangian, which adds v/2 ||x||^2 and subtracts eps_reg/2 ||lam||^2.

Both evaluate subgradients at the previous iterate for every agent
(Jacobi-style), which is what the encrypted message flow replicates.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError, DivergenceError
from .problem import BoxSet, PrimalDualState, ProblemSpec, SolverParams, initial_state

METHODS = ("spds", "rpds")


def coupling_sum(spec: ProblemSpec, x: list[np.ndarray]) -> np.ndarray:
    """sum_i A_ui x_i + c, the quantity agents receive from aggregation."""
    total = spec.c.copy()
    for a, xi in zip(spec.agent_specs, x):
        total += a.A_u @ xi
    return total


def eval_objective(spec: ProblemSpec, x: list[np.ndarray]) -> float:
    """Objective value (rho/2)||sum A_ui x_i + c||^2 + sum f_i(x_i)."""
    spec.check_point(x)
    agg = coupling_sum(spec, x)
    val = 0.5 * spec.rho * float(agg @ agg)
    for a, xi in zip(spec.agent_specs, x):
        val += a.local_objective.value(np.asarray(xi, dtype=float))
    return val


def primal_subgradient(spec: ProblemSpec, x: list[np.ndarray],
                       lam: np.ndarray, i: int,
                       coupling: np.ndarray | None = None) -> np.ndarray:
    """Gradient of the Lagrangian in agent i's block.

    `coupling` overrides sum_j A_uj x_j + c; the protocol passes the
    decrypted aggregate here so quantization flows through exactly as the
    agent would see it.
    """
    spec.check_point(x)
    if not (0 <= i < spec.n):
        raise ConfigError(f"agent index {i} out of range for n={spec.n}")
    a = spec.agent_specs[i]
    agg = coupling_sum(spec, x) if coupling is None else coupling
    xi = np.asarray(x[i], dtype=float)
    return spec.rho * (a.A_u.T @ agg) + a.local_objective.grad(xi) + a.A_g.T @ lam


def dual_subgradient(spec: ProblemSpec, x: list[np.ndarray]) -> np.ndarray:
    """Constraint value sum_i A_gi x_i + d, the dual ascent direction."""
    spec.check_point(x)
    total = spec.d.copy()
    for a, xi in zip(spec.agent_specs, x):
        total += a.A_g @ xi
    return total


def project_box(box: BoxSet, v: np.ndarray) -> np.ndarray:
    """Elementwise clamp of v into the box."""
    return box.project(v)


def dual_box(spec: ProblemSpec, params: SolverParams) -> BoxSet:
    m = spec.dual_dim
    return BoxSet(np.zeros(m), np.full(m, params.lambda_max))


def shrunken_update(box: BoxSet, z: np.ndarray, g: np.ndarray,
                    step: float, tau: float) -> np.ndarray:
    """P(P(tau z + step g) / tau): the doubly projected move shared by the
    plaintext solver and the protocol agents. Pass step = -alpha for primal
    descent, step = +beta for dual ascent."""
    return box.project(box.project(tau * z + step * g) / tau)


def plain_update(box: BoxSet, z: np.ndarray, g: np.ndarray, step: float) -> np.ndarray:
    """P(z + step g), the regularized-method move."""
    return box.project(z + step * g)


def spds_step(spec: ProblemSpec, params: SolverParams, state: PrimalDualState,
              coupling: np.ndarray | None = None,
              constraint: np.ndarray | None = None) -> PrimalDualState:
    """One shrunken primal-dual update.

    x_i <- P_X( P_X(tau_x x_i - alpha_i g_i) / tau_x )
    lam <- P_D( P_D(tau_l lam + beta g_lam) / tau_l )

    with D = [0, lambda_max]^m. `coupling`/`constraint` optionally supply the
    aggregated sums (as decrypted by agents); defaults recompute them exactly.
    """
    agg = coupling_sum(spec, state.x) if coupling is None else coupling
    g_lam = dual_subgradient(spec, state.x) if constraint is None else constraint

    new_x = []
    for i, a in enumerate(spec.agent_specs):
        gi = primal_subgradient(spec, state.x, state.lam, i, coupling=agg)
        ai = params.alpha_for(i, spec.n)
        new_x.append(shrunken_update(a.box, state.x[i], gi, -ai, params.tau_x))

    new_lam = shrunken_update(dual_box(spec, params), state.lam, g_lam,
                              params.beta, params.tau_lambda)
    return PrimalDualState(new_x, new_lam, state.k + 1)


def rpds_step(spec: ProblemSpec, params: SolverParams, state: PrimalDualState,
              coupling: np.ndarray | None = None,
              constraint: np.ndarray | None = None) -> PrimalDualState:
    """One regularized primal-dual update.

    x_i <- P_X(x_i - alpha_i (g_i + v x_i));  lam <- P_D(lam + beta (g_lam - eps_reg lam)).
    """
    agg = coupling_sum(spec, state.x) if coupling is None else coupling
    g_lam = dual_subgradient(spec, state.x) if constraint is None else constraint

    new_x = []
    for i, a in enumerate(spec.agent_specs):
        gi = primal_subgradient(spec, state.x, state.lam, i, coupling=agg)
        gi = gi + params.v * state.x[i]
        ai = params.alpha_for(i, spec.n)
        new_x.append(plain_update(a.box, state.x[i], gi, -ai))

    g_reg = g_lam - params.eps_reg * state.lam
    new_lam = plain_update(dual_box(spec, params), state.lam, g_reg, params.beta)
    return PrimalDualState(new_x, new_lam, state.k + 1)


def stopping_error(prev: PrimalDualState, new: PrimalDualState) -> float:
    """||x_new - x_prev||_2 + ||lam_new - lam_prev||_2."""
    dx = new.flat_x() - prev.flat_x()
    return float(np.linalg.norm(dx) + np.linalg.norm(new.lam - prev.lam))


def solve_plaintext(spec: ProblemSpec, params: SolverParams, method: str = "spds",
                    init: PrimalDualState | None = None) -> list[PrimalDualState]:
    """Iterate until the stopping error drops to eps0 or k_max is reached.

    Returns the full trajectory, starting from the initial state. This is
    the no-encryption baseline against which the protocol is compared.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}, expected one of {METHODS}")
    step = spds_step if method == "spds" else rpds_step
    state = initial_state(spec) if init is None else init.copy()
    traj = [state.copy()]
    for _ in range(params.k_max):
        new = step(spec, params, state)
        if not (np.all(np.isfinite(new.flat_x())) and np.all(np.isfinite(new.lam))):
            raise DivergenceError(
                f"non-finite iterate at iteration {new.k}", new.k)
        traj.append(new.copy())
        if stopping_error(state, new) <= params.eps0:
            return traj
        state = new
    return traj
