"""Signed fixed-point codec between reals and modular residues.

A real r is carried as the residue round(10^sigma * r) mod M, where sigma is
the number of preserved decimal fraction digits and M the scheme modulus.
Negative values occupy the upper half of the residue range: a residue z
decodes to z/10^sigma when z <= (M-1)/2 and to (z-M)/10^sigma otherwise.

Rounding is half away from zero, computed in exact rational arithmetic so
binary floating point cannot tip a tie the wrong way. Each encode therefore
perturbs the value by at most 0.5 * 10^-sigma.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError, EncodingOverflowError


def round_half_away(q: Fraction) -> int:
    """Nearest integer to q, ties away from zero."""
    if q >= 0:
        return int((2 * q + 1) // 2)
    return -int((-2 * q + 1) // 2)


@dataclass(frozen=True)
class FixedPointCodec:
    """Raw real <-> residue transform for a given precision and modulus."""

    sigma: int
    modulus: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.modulus % 2 == 0 or self.modulus <= 2 * 10 ** self.sigma:
            raise ConfigError(
                "modulus must be odd and greater than 2 * 10^sigma")

    @property
    def scale_factor(self) -> int:
        return 10 ** self.sigma

    @property
    def max_abs(self) -> float:
        """Largest |r| that encodes without wrapping."""
        return (self.modulus - 1) / (2 * self.scale_factor)

    def encode(self, r: float) -> int:
        """Residue of round(10^sigma * r), or raise on out-of-range input."""
        z = round_half_away(Fraction(r) * self.scale_factor)
        if 2 * abs(z) > self.modulus - 1:
            raise EncodingOverflowError(
                f"value {r!r} exceeds representable range +-{self.max_abs}")
        return z % self.modulus

    def decode(self, z: int, scale: int = 1) -> float:
        """Real value of residue z.

        `scale` counts accumulated 10^sigma factors: 1 for a freshly encoded
        value, 2 after one ciphertext product.
        """
        if not (0 <= z < self.modulus):
            raise EncodingOverflowError(
                f"residue {z} outside [0, {self.modulus})")
        signed = z if 2 * z <= self.modulus - 1 else z - self.modulus
        return signed / 10 ** (self.sigma * scale)
