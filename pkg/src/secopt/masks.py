"""Per-iteration mask coefficients that split the shared offsets across agents.

The coordinator draws coefficients r_1..r_n and s_1..s_n and sends agent i
the vectors r_i*c and s_i*d. In affine mode the coefficients sum to 1, so the
masked contributions reassemble the true offset after aggregation; in zero
mode they sum to 0, which is used when the true offset is a zero vector (a
random surrogate vector is multiplied instead, so individual shares are still
nonzero but cancel in the aggregate).
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ConfigError

AFFINE = "affine"
ZERO = "zero"
MODES = (AFFINE, ZERO)

_SUM_TOL = 1e-12


def mode_target(mode: str) -> float:
    if mode not in MODES:
        raise ConfigError(f"unknown mask mode {mode!r}")
    return 1.0 if mode == AFFINE else 0.0


def _draw_summing_to(n: int, target: float, rng: random.Random) -> tuple[float, ...]:
    """n-1 uniform draws on [-1, 1]; the last entry closes the sum, with a
    short correction loop to absorb floating-point residue."""
    vals = [rng.uniform(-1.0, 1.0) for _ in range(n - 1)]
    vals.append(target - sum(vals))
    for _ in range(4):
        err = sum(vals) - target
        if err == 0.0:
            break
        vals[-1] -= err
    return tuple(vals)


@dataclass(frozen=True)
class MaskSet:
    """Coefficients for one iteration; r masks the objective offset c,
    s masks the constraint offset d."""

    r: tuple[float, ...]
    s: tuple[float, ...]
    mode_r: str
    mode_s: str
    k: int

    def __post_init__(self):
        for name, coeffs, mode in (("r", self.r, self.mode_r),
                                   ("s", self.s, self.mode_s)):
            target = mode_target(mode)
            if abs(sum(coeffs) - target) > _SUM_TOL:
                raise ConfigError(
                    f"mask coefficients {name} sum to {sum(coeffs)!r}, "
                    f"expected {target}")


def generate_masks(n: int, mode: str, rng: random.Random, *,
                   mode_s: str | None = None, k: int = 0) -> MaskSet:
    """Fresh mask coefficients for n agents.

    `mode` governs the r coefficients; `mode_s` the s coefficients and
    defaults to `mode`. Requires n >= 2: with a single agent the affine
    coefficient is forced to 1 and the share would reveal the offset itself.
    """
    if n < 2:
        raise ConfigError("masking requires at least two agents")
    mode_s = mode if mode_s is None else mode_s
    r = _draw_summing_to(n, mode_target(mode), rng)
    s = _draw_summing_to(n, mode_target(mode_s), rng)
    return MaskSet(r, s, mode, mode_s, k)
