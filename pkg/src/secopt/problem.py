"""Problem model for the coupled convex program.

The program minimized by this package is

    (rho/2) * || sum_i A_ui x_i + c ||^2  +  sum_i f_i(x_i)

subject to per-agent box constraints x_i in X_i and the linear coupled
constraint sum_i A_gi x_i + d <= 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, DomainError


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got ndim={m.ndim}")
    return m


def _as_vector(a) -> np.ndarray:
    v = np.asarray(a, dtype=float)
    if v.ndim != 1:
        v = v.reshape(-1)
    return v


@dataclass(frozen=True)
class BoxSet:
    """Per-coordinate interval constraints; bounds may be +-inf."""

    lo: np.ndarray
    hi: np.ndarray

    def __init__(self, lo, hi):
        object.__setattr__(self, "lo", _as_vector(lo))
        object.__setattr__(self, "hi", _as_vector(hi))
        if self.lo.shape != self.hi.shape:
            raise ConfigError("box bounds must have equal length")
        if np.any(self.lo > self.hi):
            bad = int(np.argmax(self.lo > self.hi))
            raise ConfigError(f"box lower bound exceeds upper bound at coordinate {bad}")

    @property
    def dim(self) -> int:
        return self.lo.size

    def project(self, v: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(np.asarray(v, dtype=float), self.lo), self.hi)

    def contains(self, v: np.ndarray, atol: float = 0.0) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= self.lo - atol) and np.all(v <= self.hi + atol))


@dataclass(frozen=True)
class Quadratic:
    """Local cost ||A_q x||^2 + A_l x + C_t with gradient 2 A_q'A_q x + A_l'."""

    A_q: np.ndarray
    A_l: np.ndarray
    C_t: float = 0.0

    def __init__(self, A_q, A_l, C_t: float = 0.0):
        object.__setattr__(self, "A_q", _as_matrix(A_q))
        object.__setattr__(self, "A_l", _as_vector(A_l))
        object.__setattr__(self, "C_t", float(C_t))

    def value(self, x: np.ndarray) -> float:
        qx = self.A_q @ x
        return float(qx @ qx + self.A_l @ x + self.C_t)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * (self.A_q.T @ (self.A_q @ x)) + self.A_l


@dataclass(frozen=True)
class NegLog:
    """Local cost -k * sum_j log(1 + x_j); defined for x > -1 elementwise."""

    k: float

    def value(self, x: np.ndarray) -> float:
        if np.any(x <= -1.0):
            raise DomainError("neg-log cost evaluated at x <= -1")
        return float(-self.k * np.sum(np.log1p(x)))

    def grad(self, x: np.ndarray) -> np.ndarray:
        if np.any(x <= -1.0):
            raise DomainError("neg-log gradient evaluated at x <= -1")
        return -self.k / (1.0 + np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Zero:
    """No local cost."""

    def value(self, x: np.ndarray) -> float:
        return 0.0

    def grad(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))


LocalObjective = Quadratic | NegLog | Zero


@dataclass(frozen=True)
class AgentSpec:
    """One agent's slice of the problem data."""

    A_u: np.ndarray
    A_g: np.ndarray
    local_objective: LocalObjective
    box: BoxSet

    def __init__(self, A_u, A_g, local_objective: LocalObjective, box: BoxSet):
        object.__setattr__(self, "A_u", _as_matrix(A_u))
        object.__setattr__(self, "A_g", _as_matrix(A_g))
        object.__setattr__(self, "local_objective", local_objective)
        object.__setattr__(self, "box", box)

    @property
    def dim(self) -> int:
        return self.A_u.shape[1]


@dataclass(frozen=True)
class ProblemSpec:
    """Full instance: agent slices plus the shared offsets and weights."""

    agent_specs: tuple[AgentSpec, ...]
    c: np.ndarray
    d: np.ndarray
    rho: float = 1.0

    def __init__(self, agent_specs, c, d, rho: float = 1.0):
        object.__setattr__(self, "agent_specs", tuple(agent_specs))
        object.__setattr__(self, "c", _as_vector(c))
        object.__setattr__(self, "d", _as_vector(d))
        object.__setattr__(self, "rho", float(rho))
        self._validate()

    def _validate(self) -> None:
        if not self.agent_specs:
            raise ConfigError("at least one agent is required")
        if self.rho <= 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        p, m = self.c.size, self.d.size
        for i, a in enumerate(self.agent_specs):
            if a.A_u.shape[0] != p:
                raise DimensionError(
                    f"agent {i}: A_u has {a.A_u.shape[0]} rows, expected {p}")
            if a.A_g.shape[0] != m:
                raise DimensionError(
                    f"agent {i}: A_g has {a.A_g.shape[0]} rows, expected {m}")
            if a.A_u.shape[1] != a.dim or a.A_g.shape[1] != a.dim:
                raise DimensionError(
                    f"agent {i}: column counts of A_u ({a.A_u.shape[1]}) and "
                    f"A_g ({a.A_g.shape[1]}) must both match the agent dimension")
            if a.box.dim != a.dim:
                raise DimensionError(
                    f"agent {i}: box has dimension {a.box.dim}, expected {a.dim}")
            lo = a.local_objective
            if isinstance(lo, Quadratic):
                if lo.A_q.shape[1] != a.dim:
                    raise DimensionError(
                        f"agent {i}: quadratic A_q has {lo.A_q.shape[1]} columns, "
                        f"expected {a.dim}")
                if lo.A_l.size != a.dim:
                    raise DimensionError(
                        f"agent {i}: linear A_l has length {lo.A_l.size}, expected {a.dim}")
            elif isinstance(lo, NegLog):
                if np.any(a.box.lo < 0):
                    raise ConfigError(
                        f"agent {i}: neg-log local cost requires a box lower bound >= 0")

    @property
    def n(self) -> int:
        return len(self.agent_specs)

    @property
    def dual_dim(self) -> int:
        return self.d.size

    @property
    def primal_dim(self) -> int:
        return sum(a.dim for a in self.agent_specs)

    def check_point(self, x: list[np.ndarray]) -> None:
        """Raise DimensionError if x is not a valid primal point."""
        if len(x) != self.n:
            raise DimensionError(f"expected {self.n} agent blocks, got {len(x)}")
        for i, (xi, a) in enumerate(zip(x, self.agent_specs)):
            if np.asarray(xi).size != a.dim:
                raise DimensionError(
                    f"agent {i}: variable has length {np.asarray(xi).size}, "
                    f"expected {a.dim}")


@dataclass(frozen=True)
class SolverParams:
    """Step sizes, shrink factors, regularizers, and stopping controls."""

    alpha: tuple[float, ...]
    beta: float
    tau_x: float = 1.0
    tau_lambda: float = 1.0
    v: float = 0.0
    eps_reg: float = 0.0
    lambda_max: float = 1e3
    eps0: float = 1e-4
    k_max: int = 10_000

    def __init__(self, alpha, beta, tau_x=1.0, tau_lambda=1.0, v=0.0,
                 eps_reg=0.0, lambda_max=1e3, eps0=1e-4, k_max=10_000):
        alpha = tuple(float(a) for a in np.atleast_1d(alpha))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", float(beta))
        object.__setattr__(self, "tau_x", float(tau_x))
        object.__setattr__(self, "tau_lambda", float(tau_lambda))
        object.__setattr__(self, "v", float(v))
        object.__setattr__(self, "eps_reg", float(eps_reg))
        object.__setattr__(self, "lambda_max", float(lambda_max))
        object.__setattr__(self, "eps0", float(eps0))
        object.__setattr__(self, "k_max", int(k_max))
        self._validate()

    def _validate(self) -> None:
        if any(a <= 0 for a in self.alpha):
            raise ConfigError("all primal step sizes must be positive")
        if self.beta <= 0:
            raise ConfigError("dual step size must be positive")
        for name in ("tau_x", "tau_lambda"):
            t = getattr(self, name)
            if not (0.0 < t <= 1.0):
                raise ConfigError(f"{name} must lie in (0, 1], got {t}")
        if self.v < 0 or self.eps_reg < 0:
            raise ConfigError("regularization parameters must be nonnegative")
        if self.lambda_max <= 0:
            raise ConfigError("lambda_max must be positive")
        if self.eps0 <= 0:
            raise ConfigError("eps0 must be positive")
        if self.k_max < 1:
            raise ConfigError("k_max must be at least 1")

    def alpha_for(self, i: int, n: int) -> float:
        """Step size for agent i; a single alpha is shared by all agents."""
        if len(self.alpha) == 1:
            return self.alpha[0]
        if len(self.alpha) != n:
            raise ConfigError(
                f"alpha has {len(self.alpha)} entries for {n} agents")
        return self.alpha[i]


@dataclass
class PrimalDualState:
    """Iterate: per-agent primal blocks, the shared dual vector, and k."""

    x: list[np.ndarray]
    lam: np.ndarray
    k: int = 0

    def copy(self) -> "PrimalDualState":
        return PrimalDualState([xi.copy() for xi in self.x], self.lam.copy(), self.k)

    def flat_x(self) -> np.ndarray:
        return np.concatenate([np.asarray(xi, dtype=float) for xi in self.x])


def initial_state(spec: ProblemSpec, x0: list[np.ndarray] | None = None,
                  lam0: np.ndarray | None = None) -> PrimalDualState:
    """Zero start projected into each agent's box unless overridden."""
    if x0 is None:
        x = [a.box.project(np.zeros(a.dim)) for a in spec.agent_specs]
    else:
        spec.check_point(x0)
        x = [spec.agent_specs[i].box.project(np.asarray(xi, dtype=float))
             for i, xi in enumerate(x0)]
    lam = np.zeros(spec.dual_dim) if lam0 is None else np.asarray(lam0, dtype=float)
    if lam.size != spec.dual_dim:
        raise DimensionError(
            f"dual start has length {lam.size}, expected {spec.dual_dim}")
    return PrimalDualState(x, lam, 0)
