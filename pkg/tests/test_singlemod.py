import random

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from secopt import singlemod
from secopt.crypto import Ciphertext, cipher_add, cipher_mul
from secopt.errors import ConfigError, SchemeError


@pytest.fixture(scope="module")
def key():
    return singlemod.keygen(51, rng=random.Random(7))


def test_keygen_bit_length_and_primality(key):
    assert key.w.bit_length() == 51
    # independent primality oracle
    assert sympy.isprime(key.w)


def test_keygen_deterministic():
    k1 = singlemod.keygen(51, rng=random.Random(123))
    k2 = singlemod.keygen(51, rng=random.Random(123))
    assert k1.w == k2.w


def test_keygen_minimum_size():
    with pytest.raises(ConfigError):
        singlemod.keygen(8)


def test_roundtrip_bulk(key):
    rng = random.Random(0)
    for _ in range(2000):
        z = rng.randrange(key.w)
        assert singlemod.decrypt(key, singlemod.encrypt(key, z, rng)) == z


def test_fresh_randomness(key):
    rng = random.Random(5)
    e1 = singlemod.encrypt(key, 42, rng)
    e2 = singlemod.encrypt(key, 42, rng)
    assert e1 != e2


def test_zero_message_is_multiple_of_key(key):
    rng = random.Random(5)
    assert singlemod.encrypt(key, 0, rng) % key.w == 0


def test_decrypt_known_forms(key):
    assert singlemod.decrypt(key, 3 * key.w + 5) == 5
    assert singlemod.decrypt(key, key.w) == 0


def test_residue_out_of_range(key):
    with pytest.raises(SchemeError):
        singlemod.encrypt(key, key.w, random.Random(0))
    with pytest.raises(SchemeError):
        singlemod.encrypt(key, -1, random.Random(0))


def _enc(key, z, rng):
    return Ciphertext(singlemod.encrypt(key, z, rng), "singlemod")


def test_cipher_add_small(key):
    rng = random.Random(1)
    ct = cipher_add(_enc(key, 3, rng), _enc(key, 4, rng))
    assert singlemod.decrypt(key, ct.value) == 7


def test_cipher_add_zero_identity(key):
    rng = random.Random(2)
    base = _enc(key, 1234, rng)
    summed = cipher_add(base, _enc(key, 0, rng))
    assert singlemod.decrypt(key, summed.value) == 1234


@settings(max_examples=150)
@given(st.lists(st.integers(min_value=0), min_size=2, max_size=8),
       st.integers(min_value=0))
def test_cipher_add_matches_modular_sum(zs, seed):
    key = singlemod.SingleModKey(2**61 - 1)
    rng = random.Random(seed)
    zs = [z % key.w for z in zs]
    acc = _enc(key, zs[0], rng)
    for z in zs[1:]:
        acc = cipher_add(acc, _enc(key, z, rng))
    assert singlemod.decrypt(key, acc.value) == sum(zs) % key.w


def test_cipher_mul_small(key):
    rng = random.Random(3)
    ct = cipher_mul(_enc(key, 3, rng), _enc(key, 4, rng))
    assert ct.scale == 2
    assert singlemod.decrypt(key, ct.value) == 12


def test_cipher_mul_one_identity(key):
    rng = random.Random(4)
    ct = cipher_mul(_enc(key, 987, rng), _enc(key, 1, rng))
    assert singlemod.decrypt(key, ct.value) == 987


@settings(max_examples=150)
@given(st.integers(min_value=0), st.integers(min_value=0), st.integers(min_value=0))
def test_cipher_mul_matches_modular_product(a, b, seed):
    key = singlemod.SingleModKey(2**61 - 1)
    rng = random.Random(seed)
    a, b = a % key.w, b % key.w
    ct = cipher_mul(_enc(key, a, rng), _enc(key, b, rng))
    assert singlemod.decrypt(key, ct.value) == a * b % key.w


def test_scale_mismatch_rejected(key):
    rng = random.Random(6)
    a = _enc(key, 1, rng)
    b = cipher_mul(_enc(key, 2, rng), _enc(key, 3, rng))
    with pytest.raises(SchemeError):
        cipher_add(a, b)


def test_scheme_mismatch_rejected(key):
    rng = random.Random(6)
    a = _enc(key, 1, rng)
    b = Ciphertext(123, "paillier", 1, 17**2)
    with pytest.raises(SchemeError):
        cipher_add(a, b)


def test_miller_rabin_against_oracle():
    rng = random.Random(99)
    for n in range(2, 2000):
        assert singlemod.is_probable_prime(n, rng) == sympy.isprime(n), n
