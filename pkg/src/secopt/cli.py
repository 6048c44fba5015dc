"""Command-line entry point: config ingestion, run orchestration, output.

Usage:
    secopt run --experiment numerical --scheme singlemod --sigma 3 --seed 42

A JSON config file can carry any long-option value (keys use underscores);
explicit flags override file values, and unknown keys are rejected.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from .crypto import make_context
from .errors import ConfigError, SecoptError
from .experiments import (EXPERIMENTS, attach_gaps, build_experiment,
                          reference_optimum, run_with_baseline, split_blocks)
from .masks import MODES
from .problem import (AgentSpec, BoxSet, NegLog, ProblemSpec, Quadratic,
                      SolverParams, Zero)
from .protocol import ProtocolConfig, derive_rng, run_protocol, transcript_lines
from .solvers import METHODS

SCHEME_CHOICES = ("singlemod", "paillier", "none")
FORMAT_CHOICES = ("csv", "jsonl")
OUTPUT_DIR_ENV = "SECOPT_OUTPUT_DIR"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    method: str = "spds"
    scheme: str = "singlemod"
    sigma: int = 3
    key_bits: int | None = None
    m_bits: int = 40
    b_max: float = 1e3
    master_seed: int = 0
    k_max: int | None = None
    eps0: float | None = None
    mask_mode: str | None = None
    compare_plaintext: bool = False
    output: str | None = None
    format: str = "csv"
    transcript: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.scheme not in SCHEME_CHOICES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.format not in FORMAT_CHOICES:
            raise ConfigError(f"unknown output format {self.format!r}")
        if self.mask_mode is not None and self.mask_mode not in MODES:
            raise ConfigError(f"unknown mask mode {self.mask_mode!r}")


_OVERRIDE_KEYS = ("sigma", "key_bits", "m_bits")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secopt")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment end to end")
    run_p.add_argument("--config", help="JSON config file; flags override it")
    run_p.add_argument("--experiment",
                       help=f"builtin name {EXPERIMENTS} or a problem file path")
    run_p.add_argument("--method", choices=METHODS)
    run_p.add_argument("--scheme", choices=SCHEME_CHOICES)
    run_p.add_argument("--sigma", type=int)
    run_p.add_argument("--key-bits", type=int, dest="key_bits")
    run_p.add_argument("--m-bits", type=int, dest="m_bits")
    run_p.add_argument("--b-max", type=float, dest="b_max")
    run_p.add_argument("--seed", type=int, dest="master_seed")
    run_p.add_argument("--k-max", type=int, dest="k_max")
    run_p.add_argument("--eps0", type=float)
    run_p.add_argument("--mask-mode", choices=MODES, dest="mask_mode")
    run_p.add_argument("--compare-plaintext", action="store_true", default=None,
                       dest="compare_plaintext")
    run_p.add_argument("--output")
    run_p.add_argument("--format", choices=FORMAT_CHOICES)
    run_p.add_argument("--transcript")
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    """Merge CLI flags over an optional config file into a RunConfig."""
    ns = _build_parser().parse_args(argv)
    known = {f.name for f in fields(RunConfig)}

    values: dict = {}
    file_values: dict = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                file_values = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed config file: {e}") from e
        if not isinstance(file_values, dict):
            raise ConfigError("config file must hold a JSON object")
        for key in file_values:
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
        values.update(file_values)

    explicit = set()
    for f in fields(RunConfig):
        flag_val = getattr(ns, f.name, None)
        if flag_val is not None:
            values[f.name] = flag_val
            explicit.add(f.name)

    if "experiment" not in values:
        raise ConfigError("an experiment (builtin name or problem file) is required")

    cfg = RunConfig(**values)
    if cfg.scheme == "none":
        offending = [k for k in _OVERRIDE_KEYS
                     if k in explicit or k in file_values]
        if offending:
            raise ConfigError(
                f"scheme 'none' does not accept encryption settings: "
                f"{', '.join(offending)}")
        if cfg.transcript:
            raise ConfigError("transcripts require an encrypted scheme")
    return cfg


# ---------------------------------------------------------------------------
# problem-definition files
# ---------------------------------------------------------------------------

_LOCAL_BUILDERS = {
    "quadratic": lambda d: Quadratic(d["A_q"], d["A_l"], d.get("C_t", 0.0)),
    "neglog": lambda d: NegLog(float(d["k"])),
    "zero": lambda d: Zero(),
}


def _bound(vals, default):
    return [default if v is None else float(v) for v in vals]


def load_problem_file(path: str) -> tuple[ProblemSpec, SolverParams, list | None]:
    """Read a problem definition: agents, offsets, solver parameters, and an
    optional reference optimizer for gap reporting."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read problem file: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed problem file: {e}") from e

    allowed = {"agents", "c", "d", "rho", "params", "reference"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown problem file key {sorted(unknown)[0]!r}")

    agents = []
    for i, a in enumerate(doc.get("agents", [])):
        local = a.get("local", {"type": "zero"})
        builder = _LOCAL_BUILDERS.get(local.get("type"))
        if builder is None:
            raise ConfigError(
                f"agent {i}: unknown local objective type {local.get('type')!r}")
        box = a.get("box", {})
        dim = np.asarray(a["A_u"]).shape[-1]
        lo = _bound(box.get("lo", [None] * dim), -np.inf)
        hi = _bound(box.get("hi", [None] * dim), np.inf)
        agents.append(AgentSpec(a["A_u"], a["A_g"], builder(local), BoxSet(lo, hi)))
    spec = ProblemSpec(agents, doc["c"], doc["d"], doc.get("rho", 1.0))
    params = SolverParams(**doc.get("params", {"alpha": 1e-3, "beta": 1.0}))
    reference = None
    if "reference" in doc:
        reference = [np.asarray(b, dtype=float) for b in doc["reference"]]
    return spec, params, reference


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.12g}"


def _default_output(cfg: RunConfig) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV, ".")
    ext = "csv" if cfg.format == "csv" else "jsonl"
    return os.path.join(base, f"secopt_run.{ext}")


def write_records(path: str, records, spec: ProblemSpec, fmt: str) -> None:
    p, m = spec.primal_dim, spec.dual_dim
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = (["k"] + [f"x_{i+1}" for i in range(p)]
                      + [f"lambda_{j+1}" for j in range(m)]
                      + ["P_e", "G_e", "eps"])
            writer.writerow(header)
            for r in records:
                row = ([str(r.k)] + [_fmt(v) for v in r.x]
                       + [_fmt(v) for v in r.lam]
                       + [_fmt(r.p_e), _fmt(r.g_e), _fmt(r.eps)])
                writer.writerow(row)
    else:
        with open(path, "w") as fh:
            for r in records:
                fh.write(json.dumps({
                    "k": r.k,
                    "x": [float(_fmt(v)) for v in r.x],
                    "lambda": [float(_fmt(v)) for v in r.lam],
                    "P_e": None if r.p_e is None else float(_fmt(r.p_e)),
                    "G_e": None if r.g_e is None else float(_fmt(r.g_e)),
                    "eps": float(_fmt(r.eps)),
                }, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

def run(cfg: RunConfig) -> int:
    """Execute one configured run; returns the process exit code."""
    if cfg.experiment in EXPERIMENTS:
        spec, params = build_experiment(cfg.experiment)
        reference = reference_optimum(cfg.experiment)
    else:
        spec, params, reference = load_problem_file(cfg.experiment)

    overrides = {}
    if cfg.k_max is not None:
        overrides["k_max"] = cfg.k_max
    if cfg.eps0 is not None:
        overrides["eps0"] = cfg.eps0
    if overrides:
        params = replace(params, **overrides)

    if cfg.scheme == "none":
        ctx = None
    else:
        ctx = make_context(cfg.scheme, cfg.sigma, key_bits=cfg.key_bits,
                           m_bits=cfg.m_bits, b_max=cfg.b_max,
                           rng=derive_rng(cfg.master_seed, "keygen"))

    pconfig = ProtocolConfig(spec=spec, params=params, ctx=ctx,
                             method=cfg.method, master_seed=cfg.master_seed,
                             mask_mode_r=cfg.mask_mode, mask_mode_s=cfg.mask_mode,
                             record_transcripts=bool(cfg.transcript))

    if ctx is not None and cfg.compare_plaintext:
        comparison = run_with_baseline(pconfig, reference)
        result, records = comparison.encrypted, comparison.records
    else:
        result = run_protocol(pconfig)
        records = result.records
        if reference is not None:
            attach_gaps(spec, records, reference)

    out_path = cfg.output or _default_output(cfg)
    write_records(out_path, records, spec, cfg.format)
    if cfg.transcript:
        with open(cfg.transcript, "w") as fh:
            for line in transcript_lines(result):
                fh.write(line + "\n")

    final = records[-1]
    p_es = [r.p_e for r in records if r.p_e is not None]
    summary = {
        "iterations": final.k,
        "final_G_e": None if final.g_e is None else float(_fmt(final.g_e)),
        "max_P_e": None if not p_es else float(_fmt(max(p_es))),
        "converged": result.converged,
        "output": out_path,
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except SecoptError as e:
        print(f"{type(e).__module__}.{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
