"""Adversary-view audit of a finished protocol run.

Replays the message log against the run's ground truth and asserts, for each
adversary class, that nothing beyond its entitlement is derivable:

* (schema) no message of any kind carries a plaintext decision variable;
  mask shares are exactly r_i*c and s_i*d, functions of coordinator state
  only;
* (curious agent) an agent that wiretaps a peer's upload and decrypts it
  with the shared key obtains only the masked image A_u x + r*c, which is
  displaced from the true A_u x by the mask offset whenever that offset is
  nonzero;
* (coordinator) everything the SO receives is ciphertext;
* (eavesdropper) raw ciphertext values, read without the key, decode to
  magnitudes far outside the plausible message range.

Iterations whose drawn mask offset is too small to displace anything are
reported as degenerate (a warning, not a failure).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .crypto import Ciphertext
from .errors import SecurityRegressionError
from .protocol import (AGENT_UPLOAD, AGGREGATE_BROADCAST, MASK_SHARE, SO,
                       ProtocolRunResult, agent_id)


@dataclass
class AuditReport:
    ok: bool = True
    checks: dict = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)
    degenerate_iterations: list[int] = field(default_factory=list)
    messages_scanned: int = 0

    def fail(self, check: str, detail: str) -> None:
        self.ok = False
        self.checks[check] = False
        self.violations.append(f"{check}: {detail}")

    def mark(self, check: str) -> None:
        self.checks.setdefault(check, True)


def _is_cipher_vector(vec) -> bool:
    return all(isinstance(v, Ciphertext) for v in vec)


def adversary_audit(result: ProtocolRunResult,
                    raise_on_failure: bool = True) -> AuditReport:
    """Scan every recorded message; raise SecurityRegressionError on any
    violated assertion unless raise_on_failure is False."""
    cfg = result.config
    spec, ctx = cfg.spec, cfg.ctx
    if ctx is None:
        raise SecurityRegressionError(
            "audit requires an encrypted run; the plaintext channel makes "
            "no privacy claims")
    if not result.state.messages:
        raise SecurityRegressionError("run recorded no transcripts to audit")

    report = AuditReport()
    quant = 0.5 * 10.0 ** (-ctx.sigma)
    plausible = 10 ** ctx.sigma * (spec.n * ctx.b_max)

    by_iter_uploads: dict[int, dict[str, object]] = {}
    for m in result.state.messages:
        report.messages_scanned += 1
        k = m.k
        mask_rec = result.state.mask_records[k - 1]
        if m.kind == MASK_SHARE:
            # shares must be recomputable from coordinator state alone
            i = int(m.receiver.split("/")[1])
            want_rc = mask_rec.masks.r[i] * mask_rec.c_eff
            want_sd = mask_rec.masks.s[i] * mask_rec.d_eff
            if (not np.array_equal(np.asarray(m.payload["rc"]), want_rc)
                    or not np.array_equal(np.asarray(m.payload["sd"]), want_sd)):
                report.fail("schema", f"iteration {k}: mask share to {m.receiver} "
                                      "is not a pure function of masks and offsets")
            report.mark("schema")
        elif m.kind in (AGENT_UPLOAD, AGGREGATE_BROADCAST):
            for name, vec in m.payload.items():
                if not _is_cipher_vector(vec):
                    report.fail("schema", f"iteration {k}: {m.kind} field {name} "
                                          "carries non-ciphertext payload")
                else:
                    for ct in vec:
                        if ct.value <= plausible:
                            report.fail(
                                "eavesdropper",
                                f"iteration {k}: raw ciphertext decodes into the "
                                f"plausible message range without the key")
            report.mark("schema")
            report.mark("eavesdropper")
            if m.kind == AGENT_UPLOAD:
                by_iter_uploads.setdefault(k, {})[m.sender] = m
                if m.receiver != SO:
                    report.fail("schema", f"iteration {k}: upload addressed to "
                                          f"{m.receiver}, not the coordinator")
        else:
            report.fail("schema", f"iteration {k}: unknown message kind {m.kind!r}")

    # coordinator view: every inbound message is ciphertext-only
    for m in result.state.messages:
        if m.receiver == SO and m.kind != AGENT_UPLOAD:
            report.fail("so_view", f"iteration {m.k}: unexpected inbound {m.kind}")
    report.mark("so_view")

    # curious agent: decrypt peers' uploads with the shared key
    for k, uploads in by_iter_uploads.items():
        mask_rec = result.state.mask_records[k - 1]
        x_true = result.state.upload_x[k - 1]
        for j in range(spec.n):
            msg = uploads.get(agent_id(j))
            if msg is None:
                continue
            seen_u = ctx.decrypt_vector(msg.payload["enc_u"])
            true_image = spec.agent_specs[j].A_u @ x_true[j]
            offset = mask_rec.masks.r[j] * mask_rec.c_eff
            p = true_image.size
            quant_norm = quant * np.sqrt(p)
            # decryption must reproduce the masked image, nothing sharper
            if np.linalg.norm(seen_u - (true_image + offset)) > quant_norm:
                report.fail("curious_agent",
                            f"iteration {k}: decrypted upload of {agent_id(j)} "
                            "does not match the masked image")
            off_norm = float(np.linalg.norm(offset))
            if off_norm <= 2.0 * quant_norm:
                if k not in report.degenerate_iterations:
                    report.degenerate_iterations.append(k)
            elif np.linalg.norm(seen_u - true_image) < off_norm - quant_norm:
                report.fail("curious_agent",
                            f"iteration {k}: decrypted view of {agent_id(j)} is "
                            "closer to the true message than the mask allows")
        report.mark("curious_agent")

    if raise_on_failure and not report.ok:
        raise SecurityRegressionError(
            "adversary audit failed: " + "; ".join(report.violations[:5]))
    return report
