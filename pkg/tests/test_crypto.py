import random

import numpy as np
import pytest

from secopt.crypto import Ciphertext, CryptoContext, make_context
from secopt.codec import FixedPointCodec
from secopt.errors import ConfigError, EncodingOverflowError, SchemeError


@pytest.fixture(scope="module")
def ctx():
    return make_context("singlemod", 3, key_bits=51, b_max=1e3,
                        rng=random.Random(17))


def test_vector_roundtrip_zero(ctx):
    rng = random.Random(0)
    cts = ctx.encrypt_vector(np.zeros(4), rng)
    assert np.array_equal(ctx.decrypt_vector(cts), np.zeros(4))


def test_vector_roundtrip_quantization(ctx):
    rng = random.Random(1)
    v = np.array([1.23456, -0.98765, 17.5, -0.0004])
    back = ctx.decrypt_vector(ctx.encrypt_vector(v, rng))
    assert np.all(np.abs(back - v) <= 0.5e-3)


def test_masked_message_roundtrip(ctx):
    # the exact shape of an upload: A x + r c for the two-agent benchmark
    rng = random.Random(2)
    A = np.array([[-1.0, 0.0], [1.0, -0.5]])
    c = np.array([1.0, 1.0])
    x = np.array([rng.uniform(0, 1), rng.uniform(0, 1)])
    r = rng.uniform(-1, 1)
    msg = A @ x + r * c
    back = ctx.decrypt_vector(ctx.encrypt_vector(msg, rng))
    assert np.all(np.abs(back - msg) <= 0.5e-3)


def test_component_over_bound_rejected(ctx):
    rng = random.Random(3)
    with pytest.raises(EncodingOverflowError):
        ctx.encrypt_vector(np.array([0.0, 1e3 + 1]), rng)


def test_capacity_guard():
    ctx = make_context("singlemod", 9, key_bits=51, b_max=1e6,
                       rng=random.Random(17))
    with pytest.raises(ConfigError):
        ctx.check_aggregation_capacity(2)


def test_capacity_ok_at_demo_settings(ctx):
    ctx.check_aggregation_capacity(8)


def test_codec_key_consistency():
    with pytest.raises(ConfigError):
        CryptoContext("singlemod", FixedPointCodec(3, 10**15 + 37), 1e3,
                      sm_key=make_context("singlemod", 3, key_bits=51,
                                          rng=random.Random(1)).sm_key)


def test_context_scheme_mismatch(ctx):
    foreign = Ciphertext(12345, "paillier", 1, 99)
    with pytest.raises(SchemeError):
        ctx.decrypt(foreign)


def test_unknown_scheme():
    with pytest.raises(ConfigError):
        make_context("benaloh", 3)


def test_scaled_decode_after_mul(ctx):
    from secopt.crypto import cipher_mul
    rng = random.Random(4)
    a = ctx.encrypt(ctx.encode(2.5), rng)
    b = ctx.encrypt(ctx.encode(-1.5), rng)
    prod = cipher_mul(a, b)
    assert ctx.decode(ctx.decrypt(prod), prod.scale) == 2.5 * -1.5
