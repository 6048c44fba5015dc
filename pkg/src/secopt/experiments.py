"""Benchmark problem builders, accuracy metrics, and the paired-run harness.

Two built-in instances exercise the full pipeline:

* "numerical": two agents with 2-d variables, quadratic local costs, signed
  coupling matrices, and an offset c != 0 (affine masking);
* "traffic": five single-variable agents routing flow over a 9-link network,
  congestion cost on shared links, neg-log local utilities, zero objective
  offset (zero-mode masking with surrogate vectors) and capacity constraints.

Reference optimizers are cached under data/ with the solver settings that
produced them; `regenerate_reference` recomputes them from scratch.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .errors import ConfigError, DimensionError
from .masks import ZERO
from .problem import (AgentSpec, BoxSet, NegLog, PrimalDualState, ProblemSpec,
                      Quadratic, SolverParams)
from .protocol import ProtocolConfig, ProtocolRunResult, run_protocol
from .records import IterationRecord
from .solvers import solve_plaintext

EXPERIMENTS = ("numerical", "traffic")


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

def build_numerical_example() -> tuple[ProblemSpec, SolverParams]:
    """Two-agent benchmark with quadratic local costs and signed coefficients."""
    a1 = AgentSpec(
        A_u=[[-1.0, 0.0], [1.0, -0.5]],
        A_g=[[1.0, 0.0], [1.0, -1.0]],
        local_objective=Quadratic(A_q=[[1.0, 0.0], [1.0, 1.0]],
                                  A_l=[1.0, 1.0], C_t=1.0),
        box=BoxSet([0.0, 0.0], [1.0, 1.0]),
    )
    a2 = AgentSpec(
        A_u=[[0.0, -2.0], [0.0, -10.0]],
        A_g=[[0.0, 1.0], [-1.0, -1.0]],
        local_objective=Quadratic(A_q=[[0.0, 1.0], [1.0, 1.0]],
                                  A_l=[1.0, 0.0], C_t=0.0),
        box=BoxSet([0.0, 0.0], [1.0, 1.0]),
    )
    spec = ProblemSpec([a1, a2], c=[1.0, 1.0], d=[-1.0, 1.0], rho=1.0)
    params = SolverParams(alpha=(5e-3, 5e-3), beta=2.0, tau_x=0.98,
                          tau_lambda=0.98, eps0=1e-4, k_max=5000)
    return spec, params


@dataclass(frozen=True)
class TrafficConfig:
    """Routing table and cost data for the congestion benchmark."""

    routes: tuple[tuple[int, ...], ...] = ((2, 3, 6), (2, 5, 9), (1, 5, 9),
                                           (6, 4, 9), (8, 9))
    k_weights: tuple[float, ...] = (10.0, 0.0, 10.0, 10.0, 10.0)
    b: tuple[float, ...] = (1.0,) * 9
    n_links: int = 9

    def __post_init__(self):
        if len(self.k_weights) != len(self.routes):
            raise ConfigError("one cost weight per agent is required")
        if len(self.b) != self.n_links:
            raise ConfigError("capacity vector length must equal the link count")
        if any(cap <= 0 for cap in self.b):
            raise ConfigError("link capacities must be positive")

    @property
    def n_agents(self) -> int:
        return len(self.routes)


def incidence_matrix(routes, n_links: int, n_agents: int) -> np.ndarray:
    """0/1 matrix with entry (j, i) = 1 iff link j+1 lies on agent i's route."""
    A = np.zeros((n_links, n_agents))
    for i, route in enumerate(routes):
        for link in route:
            if not (1 <= link <= n_links):
                raise ConfigError(
                    f"agent {i}: link index {link} outside [1, {n_links}]")
            A[link - 1, i] = 1.0
    return A


def build_traffic_example(config: TrafficConfig | None = None,
                          ) -> tuple[ProblemSpec, SolverParams]:
    """Congestion benchmark: scalar flow per agent, shared-link quadratic
    congestion cost (no offset), capacity constraints sum_i A_i x_i <= b."""
    cfg = config or TrafficConfig()
    A = incidence_matrix(cfg.routes, cfg.n_links, cfg.n_agents)
    agents = []
    for i in range(cfg.n_agents):
        col = A[:, i].reshape(-1, 1)
        agents.append(AgentSpec(
            A_u=col, A_g=col,
            local_objective=NegLog(cfg.k_weights[i]),
            box=BoxSet([0.0], [np.inf]),
        ))
    spec = ProblemSpec(agents, c=np.zeros(cfg.n_links),
                       d=-np.asarray(cfg.b, dtype=float), rho=2.0)
    params = SolverParams(alpha=(1e-3,) * cfg.n_agents, beta=0.5, tau_x=0.98,
                          tau_lambda=0.98, eps0=1e-4, k_max=5000)
    return spec, params


def build_experiment(name: str) -> tuple[ProblemSpec, SolverParams]:
    if name == "numerical":
        return build_numerical_example()
    if name == "traffic":
        return build_traffic_example()
    raise ConfigError(f"unknown experiment {name!r}, expected one of {EXPERIMENTS}")


# ---------------------------------------------------------------------------
# reference optimizers
# ---------------------------------------------------------------------------

_REFERENCE_FILES = {"numerical": "numerical_reference.json",
                    "traffic": "traffic_reference.json"}


def reference_optimum(name: str) -> list[np.ndarray]:
    """Cached high-accuracy optimizer blocks for a built-in experiment."""
    if name not in _REFERENCE_FILES:
        raise ConfigError(f"no reference optimum for experiment {name!r}")
    path = resources.files("secopt.data").joinpath(_REFERENCE_FILES[name])
    payload = json.loads(path.read_text())
    return [np.asarray(block, dtype=float) for block in payload["x_star"]]


def regenerate_reference(name: str, eps0: float = 1e-8,
                         k_max: int = 500_000) -> dict:
    """Recompute a reference optimizer with the plaintext solver at a tight
    tolerance; returns the payload that data/ caches."""
    spec, params = build_experiment(name)
    tight = replace(params, eps0=eps0, k_max=k_max)
    traj = solve_plaintext(spec, tight, method="spds")
    final = traj[-1]
    return {
        "experiment": name,
        "method": "spds",
        "eps0": eps0,
        "k_max": k_max,
        "iterations": final.k,
        "provenance": "plaintext solver run at the stated tolerance",
        "x_star": [xi.tolist() for xi in final.x],
        "lambda_star": final.lam.tolist(),
    }


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def split_blocks(spec: ProblemSpec, flat: np.ndarray) -> list[np.ndarray]:
    """Slice a flattened primal vector back into per-agent blocks."""
    flat = np.asarray(flat, dtype=float)
    if flat.size != spec.primal_dim:
        raise DimensionError(
            f"flat vector has {flat.size} entries, expected {spec.primal_dim}")
    out, pos = [], 0
    for a in spec.agent_specs:
        out.append(flat[pos:pos + a.dim])
        pos += a.dim
    return out


def encryption_error(x_enc: list[np.ndarray], x_plain: list[np.ndarray]) -> float:
    """Sum over agents of ||x_enc_i - x_plain_i||_2 at one iteration."""
    if len(x_enc) != len(x_plain):
        raise DimensionError(
            f"block count mismatch: {len(x_enc)} vs {len(x_plain)}")
    total = 0.0
    for i, (a, b) in enumerate(zip(x_enc, x_plain)):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if a.shape != b.shape:
            raise DimensionError(f"agent {i}: block shapes differ")
        total += float(np.linalg.norm(a - b))
    return total


def optimality_gap(x: list[np.ndarray], x_star: list[np.ndarray]) -> float:
    """Sum over agents of ||x_i - x_star_i||_2."""
    return encryption_error(x, x_star)


# ---------------------------------------------------------------------------
# paired-run harness
# ---------------------------------------------------------------------------

@dataclass
class ComparisonResult:
    """Encrypted run, its paired baseline, and enriched per-iteration records."""

    encrypted: ProtocolRunResult
    baseline: ProtocolRunResult
    records: list[IterationRecord]

    @property
    def max_encryption_error(self) -> float:
        vals = [r.p_e for r in self.records if r.p_e is not None]
        return max(vals) if vals else float("nan")


def attach_gaps(spec: ProblemSpec, records: list[IterationRecord],
                reference: list[np.ndarray]) -> None:
    for r in records:
        r.g_e = optimality_gap(split_blocks(spec, r.x), reference)


def run_with_baseline(config: ProtocolConfig,
                      reference: list[np.ndarray] | None = None) -> ComparisonResult:
    """Run the encrypted protocol and a plaintext twin on the same mask
    stream, then fill in per-iteration encryption errors (and optimality
    gaps when a reference is supplied).

    The twin consumes the identical coordinator randomness, so masks enter
    both runs and cancel identically; the only difference is fixed-point
    encoding. The twin is run without early stopping so every encrypted
    iteration has a partner.
    """
    if config.ctx is None:
        raise ConfigError("run_with_baseline needs an encrypted configuration")
    enc = run_protocol(config)
    twin_params = replace(config.params,
                          eps0=5e-324 if config.params.eps0 > 0 else config.params.eps0,
                          k_max=max(len(enc.records), 1))
    twin_cfg = replace(config, ctx=None, params=twin_params,
                       record_transcripts=False)
    plain = run_protocol(twin_cfg)

    spec = config.spec
    records = []
    for r in enc.records:
        rec = IterationRecord(r.k, r.x, r.lam, r.eps)
        if r.k <= len(plain.records):
            twin = plain.records[r.k - 1]
            rec.p_e = encryption_error(split_blocks(spec, r.x),
                                       split_blocks(spec, twin.x))
        if reference is not None:
            rec.g_e = optimality_gap(split_blocks(spec, r.x), reference)
        records.append(rec)
    return ComparisonResult(enc, plain, records)
