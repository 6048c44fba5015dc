"""Private-key encryption of residues as e = m*w + z.

The private key w is a large prime shared by all agents; m is a fresh random
multiplier per encryption. Decryption is reduction mod w. The scheme is
additively and multiplicatively homomorphic over plain integer arithmetic:
sums of ciphertexts decrypt to modular sums of plaintexts, products to
modular products.

The scheme is NOT semantically secure (a ciphertext is a noisy multiple of
the key); it is included for its homomorphic properties and cheapness, and
key sizes of at least 2000 bits are recommended outside of demonstrations.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ConfigError, SchemeError

MIN_KEY_BITS = 32
DEFAULT_M_BITS = 40

_SMALL_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_probable_prime(n: int, rng: random.Random, rounds: int = 64) -> bool:
    """Miller-Rabin with rng-drawn bases; error probability < 4^-rounds."""
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: random.Random) -> int:
    """Uniform-ish prime with exactly `bits` bits, deterministic under rng."""
    if bits < 2:
        raise ConfigError("prime size must be at least 2 bits")
    while True:
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(cand, rng):
            return cand


@dataclass(frozen=True)
class SingleModKey:
    """Private key w plus the multiplier width used at encryption time."""

    w: int
    m_bits: int = DEFAULT_M_BITS

    def __post_init__(self):
        if self.w.bit_length() < MIN_KEY_BITS:
            raise ConfigError(
                f"key must have at least {MIN_KEY_BITS} bits, "
                f"got {self.w.bit_length()}")
        if self.m_bits < 1:
            raise ConfigError("m_bits must be positive")

    @property
    def bits(self) -> int:
        return self.w.bit_length()


def keygen(bits: int, m_bits: int = DEFAULT_M_BITS,
           rng: random.Random | None = None) -> SingleModKey:
    """Generate a fresh prime key of the requested bit length."""
    if bits < MIN_KEY_BITS:
        raise ConfigError(f"key size must be at least {MIN_KEY_BITS} bits, got {bits}")
    rng = rng or random.Random()
    return SingleModKey(random_prime(bits, rng), m_bits)


def encrypt(key: SingleModKey, z: int, rng: random.Random) -> int:
    """Ciphertext value m*w + z with m uniform in [1, 2^m_bits]."""
    if not (0 <= z < key.w):
        raise SchemeError(f"residue {z} outside [0, w)")
    m = rng.randrange(1, (1 << key.m_bits) + 1)
    return m * key.w + z


def decrypt(key: SingleModKey, value: int) -> int:
    """Recover the residue: value mod w."""
    return value % key.w
