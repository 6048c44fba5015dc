"""Simulation of the masked, encrypted aggregation protocol.

One iteration exchanges three message rounds between the coordinator (the
system operator, "so") and the n agents:

1. the SO draws fresh mask coefficients and sends agent i the mask shares
   r_i*c and s_i*d (plaintext vectors that reveal neither the offsets nor
   the coefficients);
2. agent i encrypts A_ui x_i + r_i c and A_gi x_i + s_i d elementwise and
   uploads the ciphertext vectors;
3. the SO sums the uploads over ciphertext, obtaining encryptions of
   sum_j A_uj x_j + c and sum_j A_gj x_j + d without decrypting anything,
   and sends the aggregates back to every agent.

Each agent decrypts the aggregates, forms its subgradient locally, and
applies the primal update to its own block plus an identical, replicated
dual update. All randomness derives from per-role streams seeded from a
single master seed, so a run is fully reproducible, and the paired
no-encryption baseline consumes the identical mask stream.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .crypto import Ciphertext, CryptoContext, cipher_add
from .errors import (ConfigError, DivergenceError, EncodingOverflowError,
                     KeyMismatchError, ProtocolStallError, SchemeError)
from .masks import AFFINE, ZERO, MaskSet, generate_masks
from .problem import PrimalDualState, ProblemSpec, SolverParams, initial_state
from .records import IterationRecord
from .solvers import (METHODS, dual_box, plain_update, shrunken_update,
                      stopping_error)

SO = "so"

MASK_SHARE = "mask_share"
AGENT_UPLOAD = "agent_upload"
AGGREGATE_BROADCAST = "aggregate_broadcast"


def agent_id(i: int) -> str:
    return f"agent/{i}"


def derive_rng(master_seed: int, role: str) -> random.Random:
    """Independent, reproducible stream per role under one master seed."""
    digest = hashlib.sha256(f"{master_seed}/{role}".encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


@dataclass(frozen=True)
class Message:
    """One protocol message; payload values are tuples of Ciphertext for the
    encrypted rounds and tuples of floats for mask shares."""

    k: int
    sender: str
    receiver: str
    kind: str
    payload: dict


@dataclass(frozen=True)
class AdversaryTap:
    """Everything one observer can see. All observers wiretap every link;
    they differ in what else they hold (the shared key for curious agents,
    the mask coefficients for the SO)."""

    observer: str
    messages: tuple[Message, ...]


@dataclass
class MaskRecord:
    """Ground truth for one iteration's masking (kept by the runner for
    audits; never transmitted)."""

    masks: MaskSet
    c_eff: np.ndarray
    d_eff: np.ndarray


@dataclass
class ProtocolState:
    """Full run history: iterates, masks, message log."""

    x: list[np.ndarray]
    lam: np.ndarray
    k: int = 0
    mask_records: list[MaskRecord] = field(default_factory=list)
    upload_x: list[list[np.ndarray]] = field(default_factory=list)
    messages: list[Message] = field(default_factory=list)
    converged: bool = False

    def transcripts(self, n_agents: int) -> dict[str, AdversaryTap]:
        msgs = tuple(self.messages)
        taps = {
            "eavesdropper": AdversaryTap("eavesdropper", msgs),
            SO: AdversaryTap(SO, msgs),
        }
        for j in range(n_agents):
            name = f"curious_{agent_id(j)}"
            taps[name] = AdversaryTap(name, msgs)
        return taps


@dataclass(frozen=True)
class ProtocolConfig:
    spec: ProblemSpec
    params: SolverParams
    ctx: CryptoContext | None            # None runs the plaintext channel
    method: str = "spds"
    master_seed: int = 0
    mask_mode_r: str | None = None       # None: affine unless c == 0
    mask_mode_s: str | None = None
    record_transcripts: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.spec.n < 2:
            raise ConfigError("the protocol requires at least two agents")

    def resolved_modes(self) -> tuple[str, str]:
        mode_r = self.mask_mode_r or (ZERO if not np.any(self.spec.c) else AFFINE)
        mode_s = self.mask_mode_s or (ZERO if not np.any(self.spec.d) else AFFINE)
        return mode_r, mode_s


@dataclass
class ProtocolRunResult:
    records: list[IterationRecord]
    state: ProtocolState
    config: ProtocolConfig

    @property
    def converged(self) -> bool:
        return self.state.converged

    def transcripts(self) -> dict[str, AdversaryTap]:
        return self.state.transcripts(self.config.spec.n)


class SystemOperator:
    """Holds the offsets, draws masks, aggregates ciphertexts. Performs no
    decryption and never sees a plaintext decision variable."""

    def __init__(self, spec: ProblemSpec, mode_r: str, mode_s: str,
                 rng: random.Random):
        self.spec = spec
        self.mode_r = mode_r
        self.mode_s = mode_s
        self.rng = rng

    def draw_masks(self, k: int) -> MaskRecord:
        masks = generate_masks(self.spec.n, self.mode_r, self.rng,
                               mode_s=self.mode_s, k=k)
        # zero mode replaces a zero offset with a random surrogate so the
        # shares are still nonzero; the coefficients cancel it in aggregate
        if self.mode_r == ZERO:
            c_eff = np.array([self.rng.uniform(-1.0, 1.0)
                              for _ in range(self.spec.c.size)])
        else:
            c_eff = self.spec.c
        if self.mode_s == ZERO:
            d_eff = np.array([self.rng.uniform(-1.0, 1.0)
                              for _ in range(self.spec.d.size)])
        else:
            d_eff = self.spec.d
        return MaskRecord(masks, c_eff, d_eff)

    def distribute_masks(self, rec: MaskRecord) -> list[Message]:
        out = []
        for i in range(self.spec.n):
            payload = {
                "rc": tuple(float(v) for v in rec.masks.r[i] * rec.c_eff),
                "sd": tuple(float(v) for v in rec.masks.s[i] * rec.d_eff),
            }
            out.append(Message(rec.masks.k, SO, agent_id(i), MASK_SHARE, payload))
        return out

    def aggregate(self, k: int, uploads: list[Message]) -> tuple[tuple, tuple]:
        got = {m.sender: m for m in uploads}
        for i in range(self.spec.n):
            if agent_id(i) not in got:
                raise ProtocolStallError(
                    f"iteration {k}: missing upload from {agent_id(i)}")
        if len(uploads) != self.spec.n:
            raise ProtocolStallError(
                f"iteration {k}: expected {self.spec.n} uploads, got {len(uploads)}")
        ordered = [got[agent_id(i)] for i in range(self.spec.n)]

        def fold(fieldname):
            vecs = [m.payload[fieldname] for m in ordered]
            acc = list(vecs[0])
            for vec in vecs[1:]:
                for j, ct in enumerate(vec):
                    acc[j] = self._combine(acc[j], ct)
            return tuple(acc)

        return fold("enc_u"), fold("enc_g")

    @staticmethod
    def _combine(a, b):
        if isinstance(a, Ciphertext):
            return cipher_add(a, b)
        return a + b  # plaintext channel: plain float sum


class AgentNode:
    """One participant: holds its own coefficient slices, its block of the
    primal variable, a replica of the dual variable, and the shared key."""

    def __init__(self, i: int, spec: ProblemSpec, params: SolverParams,
                 ctx: CryptoContext | None, method: str, rng: random.Random):
        self.i = i
        self.spec = spec
        self.agent = spec.agent_specs[i]
        self.params = params
        self.ctx = ctx
        self.method = method
        self.rng = rng
        self.x = self.agent.box.project(np.zeros(self.agent.dim))
        self.lam = np.zeros(spec.dual_dim)

    def upload(self, k: int, share: Message) -> Message:
        rc = np.asarray(share.payload["rc"], dtype=float)
        sd = np.asarray(share.payload["sd"], dtype=float)
        msg_u = self.agent.A_u @ self.x + rc
        msg_g = self.agent.A_g @ self.x + sd
        if self.ctx is None:
            payload = {"enc_u": tuple(map(float, msg_u)),
                       "enc_g": tuple(map(float, msg_g))}
        else:
            for name, vec in (("objective", msg_u), ("constraint", msg_g)):
                worst = float(np.max(np.abs(vec)))
                if worst > self.ctx.b_max:
                    raise EncodingOverflowError(
                        f"iteration {k}, {agent_id(self.i)}: {name} message "
                        f"component {worst} exceeds bound {self.ctx.b_max}")
            payload = {"enc_u": self.ctx.encrypt_vector(msg_u, self.rng),
                       "enc_g": self.ctx.encrypt_vector(msg_g, self.rng)}
        return Message(k, agent_id(self.i), SO, AGENT_UPLOAD, payload)

    def open_aggregate(self, broadcast: Message) -> tuple[np.ndarray, np.ndarray]:
        """Decrypt both aggregates and sanity-check their magnitude."""
        if self.ctx is None:
            return (np.asarray(broadcast.payload["enc_u"], dtype=float),
                    np.asarray(broadcast.payload["enc_g"], dtype=float))
        u_vec = self.ctx.decrypt_vector(broadcast.payload["enc_u"])
        g_vec = self.ctx.decrypt_vector(broadcast.payload["enc_g"])
        # a wrong key decrypts to noise on the order of modulus / 10^sigma,
        # far outside what n bounded messages can sum to
        plaus = self.spec.n * self.ctx.b_max + 1.0
        worst = max(float(np.max(np.abs(u_vec))), float(np.max(np.abs(g_vec))))
        if worst > plaus:
            raise KeyMismatchError(
                f"{agent_id(self.i)}: decrypted aggregate magnitude {worst:.3g} "
                f"is implausible (bound {plaus:.3g}); wrong private key?")
        return u_vec, g_vec

    def apply_update(self, u_vec: np.ndarray, g_vec: np.ndarray) -> None:
        grad = (self.spec.rho * (self.agent.A_u.T @ u_vec)
                + self.agent.local_objective.grad(self.x)
                + self.agent.A_g.T @ self.lam)
        alpha = self.params.alpha_for(self.i, self.spec.n)
        dbox = dual_box(self.spec, self.params)
        if self.method == "spds":
            self.x = shrunken_update(self.agent.box, self.x, grad,
                                     -alpha, self.params.tau_x)
            self.lam = shrunken_update(dbox, self.lam, g_vec,
                                       self.params.beta, self.params.tau_lambda)
        else:
            self.x = plain_update(self.agent.box, self.x,
                                  grad + self.params.v * self.x, -alpha)
            g_reg = g_vec - self.params.eps_reg * self.lam
            self.lam = plain_update(dbox, self.lam, g_reg, self.params.beta)


def run_protocol(config: ProtocolConfig) -> ProtocolRunResult:
    """Run the full loop until the stopping error reaches eps0 or k_max.

    Deterministic in (config, master_seed): every mask coefficient, surrogate
    vector, and encryption randomizer comes from a role stream derived from
    the master seed.
    """
    spec, params, ctx = config.spec, config.params, config.ctx
    if ctx is not None:
        ctx.check_aggregation_capacity(spec.n)
    mode_r, mode_s = config.resolved_modes()

    so = SystemOperator(spec, mode_r, mode_s,
                        derive_rng(config.master_seed, "so/masks"))
    agents = [AgentNode(i, spec, params, ctx, config.method,
                        derive_rng(config.master_seed, f"{agent_id(i)}/crypto"))
              for i in range(spec.n)]

    state = ProtocolState([a.x.copy() for a in agents], agents[0].lam.copy())
    records: list[IterationRecord] = []

    for k in range(1, params.k_max + 1):
        rec = so.draw_masks(k)
        shares = so.distribute_masks(rec)
        uploads = [agents[i].upload(k, shares[i]) for i in range(spec.n)]
        agg_u, agg_g = so.aggregate(k, uploads)
        broadcasts = [Message(k, SO, agent_id(i), AGGREGATE_BROADCAST,
                              {"enc_u": agg_u, "enc_g": agg_g})
                      for i in range(spec.n)]

        if config.record_transcripts:
            state.messages.extend(shares)
            state.messages.extend(uploads)
            state.messages.extend(broadcasts)
        state.mask_records.append(rec)
        state.upload_x.append([a.x.copy() for a in agents])

        prev = PrimalDualState([a.x.copy() for a in agents],
                               agents[0].lam.copy(), k - 1)
        for a in agents:
            u_vec, g_vec = a.open_aggregate(broadcasts[a.i])
            a.apply_update(u_vec, g_vec)

        lam0 = agents[0].lam
        for a in agents[1:]:
            if not np.array_equal(a.lam, lam0):
                raise AssertionError(
                    "dual replicas diverged; identical inputs must give "
                    "identical updates")

        new = PrimalDualState([a.x.copy() for a in agents], lam0.copy(), k)
        if not (np.all(np.isfinite(new.flat_x())) and np.all(np.isfinite(new.lam))):
            raise DivergenceError(f"non-finite iterate at iteration {k}", k)

        eps = stopping_error(prev, new)
        records.append(IterationRecord(k, new.flat_x(), new.lam.copy(), eps))
        state.x, state.lam, state.k = new.x, new.lam, k
        if eps <= params.eps0:
            state.converged = True
            break

    return ProtocolRunResult(records, state, config)


def _payload_strings(payload: dict) -> dict:
    out = {}
    for name, vec in payload.items():
        out[name] = [str(v.value) if isinstance(v, Ciphertext) else repr(float(v))
                     for v in vec]
    return out


def transcript_lines(result: ProtocolRunResult) -> Iterator[str]:
    """Line-delimited JSON records of every observable message."""
    for m in result.state.messages:
        yield json.dumps({"k": m.k, "sender": m.sender, "receiver": m.receiver,
                          "kind": m.kind, "payload": _payload_strings(m.payload)},
                         sort_keys=True)
