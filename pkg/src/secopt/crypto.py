"""Ciphertext algebra and the encode/encrypt context shared by protocol roles.

A `Ciphertext` is an arbitrary-precision integer tagged with its scheme and a
scale exponent counting accumulated 10^sigma factors (1 after encryption,
2 after one ciphertext product). Additions require matching scheme, key, and
scale; products are available for the private-key scheme only.

`CryptoContext` bundles the codec, the key material, and the overflow policy:
every encoded component must satisfy |value| <= b_max, and the modulus must
exceed 2 * 10^sigma * b_max * n_agents so that aggregating n ciphertexts can
never wrap the residue range. Wraparound after aggregation is undetectable,
which is why the bound is enforced up front.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import paillier, singlemod
from .codec import FixedPointCodec
from .errors import ConfigError, EncodingOverflowError, SchemeError

SCHEMES = ("singlemod", "paillier")


@dataclass(frozen=True)
class Ciphertext:
    value: int
    scheme: str
    scale: int = 1
    modulus_sq: int | None = None  # Paillier only: n^2, needed to combine

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise SchemeError(f"unknown scheme {self.scheme!r}")
        if self.scale < 1:
            raise SchemeError("ciphertext scale must be at least 1")


def _check_compatible(a: Ciphertext, b: Ciphertext) -> None:
    if a.scheme != b.scheme:
        raise SchemeError(f"scheme mismatch: {a.scheme} vs {b.scheme}")
    if a.modulus_sq != b.modulus_sq:
        raise SchemeError("ciphertexts were produced under different keys")


def cipher_add(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    """Combine so that decryption yields the modular sum of plaintexts."""
    _check_compatible(a, b)
    if a.scale != b.scale:
        raise SchemeError(f"scale mismatch: {a.scale} vs {b.scale}")
    if a.scheme == "singlemod":
        return Ciphertext(a.value + b.value, a.scheme, a.scale)
    return Ciphertext(a.value * b.value % a.modulus_sq, a.scheme, a.scale, a.modulus_sq)


def cipher_mul(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    """Combine so that decryption yields the modular product of plaintexts.

    Only the private-key scheme supports this; scales add because each
    operand carries its own 10^sigma factor.
    """
    _check_compatible(a, b)
    if a.scheme != "singlemod":
        raise SchemeError("ciphertext products are unsupported for paillier")
    return Ciphertext(a.value * b.value, a.scheme, a.scale + b.scale)


@dataclass(frozen=True)
class CryptoContext:
    """Codec + key material + message magnitude policy for one run."""

    scheme: str
    codec: FixedPointCodec
    b_max: float
    sm_key: singlemod.SingleModKey | None = None
    paillier_pub: paillier.PaillierPublicKey | None = None
    paillier_priv: paillier.PaillierPrivateKey | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.b_max <= 0:
            raise ConfigError("b_max must be positive")
        if self.scheme == "singlemod" and self.sm_key is None:
            raise ConfigError("singlemod context requires a key")
        if self.scheme == "paillier" and (self.paillier_pub is None
                                          or self.paillier_priv is None):
            raise ConfigError("paillier context requires a key pair")
        if self.codec.modulus != self.modulus:
            raise ConfigError("codec modulus does not match the key modulus")

    @property
    def modulus(self) -> int:
        if self.scheme == "singlemod":
            return self.sm_key.w
        return self.paillier_pub.n

    @property
    def sigma(self) -> int:
        return self.codec.sigma

    def check_aggregation_capacity(self, n_agents: int) -> None:
        """Overflow guard: modulus > 2 * 10^sigma * b_max * n_agents."""
        needed = 2 * 10 ** self.codec.sigma * self.b_max * n_agents
        if self.modulus <= needed:
            raise ConfigError(
                f"modulus {self.modulus} too small to aggregate {n_agents} "
                f"messages of magnitude {self.b_max} at sigma={self.codec.sigma}; "
                f"need > {needed:.3g}")

    def encode(self, r: float) -> int:
        if abs(r) > self.b_max:
            raise EncodingOverflowError(
                f"message component {r!r} exceeds the configured bound {self.b_max}")
        return self.codec.encode(r)

    def decode(self, z: int, scale: int = 1) -> float:
        return self.codec.decode(z, scale)

    def encrypt(self, z: int, rng: random.Random) -> Ciphertext:
        if self.scheme == "singlemod":
            return Ciphertext(singlemod.encrypt(self.sm_key, z, rng), "singlemod")
        value = self.paillier_pub.encrypt(z, rng)
        return Ciphertext(value, "paillier", 1, self.paillier_pub.n_sq)

    def decrypt(self, ct: Ciphertext) -> int:
        if ct.scheme != self.scheme:
            raise SchemeError(
                f"context scheme {self.scheme} cannot decrypt {ct.scheme}")
        if self.scheme == "singlemod":
            return singlemod.decrypt(self.sm_key, ct.value)
        return self.paillier_priv.decrypt(ct.value)

    def encrypt_vector(self, v: np.ndarray, rng: random.Random) -> tuple[Ciphertext, ...]:
        return tuple(self.encrypt(self.encode(float(r)), rng) for r in np.asarray(v, dtype=float))

    def decrypt_vector(self, cts) -> np.ndarray:
        return np.array([self.decode(self.decrypt(ct), ct.scale) for ct in cts])


def make_context(scheme: str, sigma: int, *, key_bits: int | None = None,
                 m_bits: int = singlemod.DEFAULT_M_BITS, b_max: float = 1e3,
                 rng: random.Random | None = None) -> CryptoContext:
    """Generate keys and assemble a context; deterministic under a seeded rng."""
    rng = rng or random.Random()
    if scheme == "singlemod":
        key = singlemod.keygen(key_bits if key_bits is not None else 51, m_bits, rng)
        codec = FixedPointCodec(sigma, key.w)
        return CryptoContext("singlemod", codec, b_max, sm_key=key)
    if scheme == "paillier":
        pub, priv = paillier.keygen(key_bits if key_bits is not None else 512, rng)
        codec = FixedPointCodec(sigma, pub.n)
        return CryptoContext("paillier", codec, b_max,
                             paillier_pub=pub, paillier_priv=priv)
    raise ConfigError(f"unknown scheme {scheme!r}")
