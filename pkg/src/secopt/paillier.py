"""Paillier public-key backend (additively homomorphic only).

Standard construction with g = n + 1: a residue z encrypts to
(1 + n*z) * r^n mod n^2 for random r in (0, n); products of ciphertexts
decrypt to modular sums of plaintexts. Signed fixed-point values use the
same upper-half residue convention as the rest of the package, with
modulus n.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ConfigError, SchemeError
from .singlemod import random_prime

try:
    from gmpy2 import powmod as _powmod
except ImportError:  # pure-python fallback, noticeably slower
    _powmod = pow

MIN_KEY_BITS = 512


@dataclass(frozen=True)
class PaillierPublicKey:
    n: int

    @property
    def n_sq(self) -> int:
        return self.n * self.n

    def encrypt(self, z: int, rng: random.Random) -> int:
        if not (0 <= z < self.n):
            raise SchemeError(f"residue {z} outside [0, n)")
        r = rng.randrange(1, self.n)
        # g = n + 1 makes g^z = 1 + n*z (mod n^2), no exponentiation needed
        return (1 + self.n * z) * int(_powmod(r, self.n, self.n_sq)) % self.n_sq


@dataclass(frozen=True)
class PaillierPrivateKey:
    public: PaillierPublicKey
    p: int
    q: int
    hp: int        # (L_p((n+1)^(p-1) mod p^2))^-1 mod p
    hq: int        # (L_q((n+1)^(q-1) mod q^2))^-1 mod q
    p_inv_q: int   # p^-1 mod q, for the CRT recombination

    def decrypt(self, value: int) -> int:
        # CRT decryption: work mod p^2 and q^2 with half-size exponents
        p, q, n = self.p, self.q, self.public.n
        mp = (int(_powmod(value, p - 1, p * p)) - 1) // p * self.hp % p
        mq = (int(_powmod(value, q - 1, q * q)) - 1) // q * self.hq % q
        return (mp + p * ((mq - mp) * self.p_inv_q % q)) % n


def keygen(bits: int = 2048,
           rng: random.Random | None = None) -> tuple[PaillierPublicKey, PaillierPrivateKey]:
    """Generate an n of roughly `bits` bits from two equal-size primes."""
    if bits < MIN_KEY_BITS:
        raise ConfigError(
            f"Paillier keys below {MIN_KEY_BITS} bits are rejected, got {bits}")
    rng = rng or random.Random()
    half = bits // 2
    while True:
        p = random_prime(half, rng)
        q = random_prime(bits - half, rng)
        if p != q:
            break
    n = p * q
    pub = PaillierPublicKey(n)
    return pub, PaillierPrivateKey(pub, p, q, _h_part(p, n), _h_part(q, n),
                                   pow(p, -1, q))


def _h_part(prime: int, n: int) -> int:
    sq = prime * prime
    u = int(_powmod(n + 1, prime - 1, sq))
    return pow((u - 1) // prime, -1, prime)
