import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from turboeq.outer_code import (ConvCodeSpec, all_codewords, brute_force_code_posterior,
                                decode_siso, encode, hard_decision)

CODE = ConvCodeSpec()


def poly_coeffs(poly, m):
    """Coefficients by delay, delay 0 first (delay 0 is the most significant bit)."""
    return [(poly >> (m - j)) & 1 for j in range(m + 1)]


def series_division(num, den, n):
    """First ``n`` GF(2) coefficients of num(D) / den(D)."""
    q = []
    for i in range(n):
        v = num[i] if i < len(num) else 0
        for j in range(1, len(den)):
            if i - j >= 0 and den[j]:
                v ^= q[i - j]
        q.append(v)
    return q


def reference_encoder(code, info):
    """Shift-register encoder written directly from the polynomial coefficients."""
    m = code.memory
    fb, ff = poly_coeffs(code.feedback, m), poly_coeffs(code.feedforward, m)
    reg = [0] * m  # reg[j-1] holds w delayed by j
    out = []

    def step(u):
        fbv = 0
        for j in range(1, m + 1):
            fbv ^= fb[j] & reg[j - 1]
        w = u ^ fbv
        p = ff[0] & w
        for j in range(1, m + 1):
            p ^= ff[j] & reg[j - 1]
        reg.insert(0, w)
        reg.pop()
        return p, fbv

    for u in info:
        p, _ = step(int(u))
        out += [int(u), p]
    for _ in range(m):
        fbv = 0
        for j in range(1, m + 1):
            fbv ^= fb[j] & reg[j - 1]
        p, _ = step(fbv)  # tail input cancels the feedback, feeding zeros
        out += [fbv, p]
    assert not any(reg)
    return np.array(out, dtype=np.int8)


def test_lengths():
    assert CODE.coded_length(507) == 1024
    assert CODE.coded_length(2043) == 4096
    assert CODE.info_length(1024) == 507
    with pytest.raises(ValueError):
        CODE.info_length(1023)


def test_zero_codeword():
    assert not encode(CODE, np.zeros(20, dtype=np.int8)).any()


def test_impulse_response_matches_long_division():
    n = 30
    info = np.zeros(n, dtype=np.int8)
    info[0] = 1
    coded = encode(CODE, info)
    m = CODE.memory
    expected = series_division(poly_coeffs(CODE.feedforward, m), poly_coeffs(CODE.feedback, m), n)
    assert coded[1:2 * n:2].tolist() == expected
    assert coded[0:2 * n:2].tolist() == info.tolist()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=60))
def test_matches_reference_encoder(bits):
    info = np.array(bits, dtype=np.int8)
    assert np.array_equal(encode(CODE, info), reference_encoder(CODE, info))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=40))
def test_linearity(bits):
    rng = np.random.default_rng(len(bits))
    a = np.array(bits, dtype=np.int8)
    b = rng.integers(0, 2, a.size, dtype=np.int8)
    assert np.array_equal(encode(CODE, a ^ b), encode(CODE, a) ^ encode(CODE, b))


def test_other_polynomials():
    code = ConvCodeSpec(memory=2, feedback=0o7, feedforward=0o5)
    info = np.array([1, 0, 1, 1, 0, 0, 1], dtype=np.int8)
    assert np.array_equal(encode(code, info), reference_encoder(code, info))


def test_invalid_specs():
    with pytest.raises(ValueError):
        ConvCodeSpec(memory=2, feedback=0o3, feedforward=0o5)  # no delay-0 feedback tap
    with pytest.raises(ValueError):
        ConvCodeSpec(memory=2, feedback=0o17, feedforward=0o5)
    with pytest.raises(ValueError):
        ConvCodeSpec(terminated=False)


def test_hard_decision():
    assert hard_decision([2.0, -0.1, 0.0, -40.0]).tolist() == [0, 1, 0, 1]


def test_noiseless_decode():
    rng = np.random.default_rng(3)
    info = rng.integers(0, 2, 200, dtype=np.int8)
    la = 10.0 * (1 - 2 * encode(CODE, info).astype(float))
    res = decode_siso(CODE, la)
    assert np.array_equal(hard_decision(res.aposteriori_info), info)


def test_matches_enumeration():
    rng = np.random.default_rng(11)
    for n_info in (1, 3, 8):
        la = rng.normal(0, 2, CODE.coded_length(n_info))
        got, ref = decode_siso(CODE, la), brute_force_code_posterior(CODE, la)
        np.testing.assert_allclose(got.aposteriori_info, ref.aposteriori_info, atol=1e-9)
        np.testing.assert_allclose(got.aposteriori_coded, ref.aposteriori_coded, atol=1e-9)
        np.testing.assert_allclose(got.extrinsic_coded, ref.extrinsic_coded, atol=1e-9)


def test_all_codewords_are_codewords():
    info, words = all_codewords(CODE, 4)
    assert info.shape == (16, 4)
    for u, c in zip(info, words):
        assert np.array_equal(encode(CODE, u), c)


def test_extrinsic_excludes_apriori():
    rng = np.random.default_rng(4)
    la = rng.normal(0, 2, CODE.coded_length(30))
    res = decode_siso(CODE, la)
    np.testing.assert_allclose(res.extrinsic_coded, res.aposteriori_coded - la, atol=1e-12)


def test_flow_constant():
    rng = np.random.default_rng(5)
    res = decode_siso(CODE, rng.normal(0, 2, CODE.coded_length(100)))
    assert np.ptp(res.flow) / max(1.0, abs(res.flow[0])) <= 1e-8


def test_bad_length():
    with pytest.raises(ValueError):
        decode_siso(CODE, np.zeros(11))


def test_round_trip_noisy_ensemble():
    rng = np.random.default_rng(6)
    errors = 0
    for _ in range(1000):
        info = rng.integers(0, 2, 64, dtype=np.int8)
        x = 1 - 2 * encode(CODE, info).astype(float)
        y = x + 0.5 * rng.normal(size=x.size)
        res = decode_siso(CODE, 2 * y / 0.25)
        errors += int(np.count_nonzero(hard_decision(res.aposteriori_info) != info))
    assert errors == 0
