import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from succinct_rmq.bits import (
    BitReader, BitVec, BitWriter, DecodeError, excess_array, findopen_oracle,
    gamma_length, gamma_read, gamma_write,
)


def test_rank_select_small():
    v = BitVec.from_string("110100")
    assert v.rank1(4) == 3
    assert v.select1(3) == 4
    assert v.select1(4) is None
    assert v.rank0(6) == 3
    assert [v.select0(k) for k in (1, 2, 3)] == [3, 5, 6]
    assert v.select0(4) is None
    with pytest.raises(IndexError):
        v.rank1(7)


def test_bits_beyond_length_are_zero():
    v = BitVec.from_bits([1] * 70)
    assert len(v) == 70
    assert int(v.words[1]) == (1 << 6) - 1
    assert v.ones == 70


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=1500))
def test_rank_select_inverse(bits):
    v = BitVec.from_bits(bits)
    assert v.to_list() == bits
    pref = np.concatenate([[0], np.cumsum(bits)]) if bits else np.zeros(1, int)
    for i in range(len(bits) + 1):
        assert v.rank1(i) == pref[i]
    ones = [i for i, b in enumerate(bits, 1) if b]
    zeros = [i for i, b in enumerate(bits, 1) if not b]
    for k, p in enumerate(ones, 1):
        assert v.select1(k) == p
        assert v.rank1(p) == k
    for k, p in enumerate(zeros, 1):
        assert v.select0(k) == p
    assert v.select1(len(ones) + 1) is None
    assert v.select0(len(zeros) + 1) is None


@pytest.mark.parametrize("density", [0.02, 0.5, 0.97])
def test_rank_select_large_vector(density):
    rng = np.random.default_rng(7)
    n = 1 << 20
    arr = (rng.random(n) < density).astype(np.uint8)
    v = BitVec.from_bits(arr)
    pref = np.concatenate([[0], np.cumsum(arr)])
    ones = np.flatnonzero(arr) + 1
    zeros = np.flatnonzero(arr == 0) + 1
    for i in rng.integers(0, n + 1, 3000):
        assert v.rank1(int(i)) == pref[i]
    for k in rng.integers(1, len(ones) + 1, 2000):
        assert v.select1(int(k)) == ones[k - 1]
    for k in rng.integers(1, len(zeros) + 1, 2000):
        assert v.select0(int(k)) == zeros[k - 1]
    assert v.rank1(n) == len(ones)


def test_bitvec_serialization_roundtrip():
    v = BitVec.from_string("1011001110001")
    buf = v.to_bytes()
    w, off = BitVec.from_bytes(b"xx" + buf, 2)
    assert w == v and off == len(buf) + 2
    assert v.serialized_size() == len(buf)
    with pytest.raises(DecodeError):
        BitVec.from_bytes(buf[:-1])
    bad = bytearray(buf)
    bad[-1] |= 0x80
    with pytest.raises(DecodeError):
        BitVec.from_bytes(bytes(bad))


def test_msb_and_lsb_reads():
    v = BitVec.from_msb_int(0b10110, 5)
    assert v.to_string() == "10110"
    assert v.read_msb(0, 5) == 0b10110
    assert v.read_msb(1, 3) == 0b011
    u = BitVec.from_int(0b10110, 5)
    assert u.read_lsb(0, 5) == 0b10110
    with pytest.raises(DecodeError):
        v.read_msb(3, 3)


def _gamma_bits(x):
    w = BitWriter()
    gamma_write(w, x)
    return w.bits()


def test_gamma_examples():
    assert _gamma_bits(1) == [1]
    assert len(_gamma_bits(5)) == 5
    assert _gamma_bits(5) == [0, 0, 1, 0, 1]
    with pytest.raises(ValueError):
        gamma_write(BitWriter(), 0)


def test_gamma_roundtrip_random():
    rng = random.Random(3)
    xs = [rng.randint(1, 10 ** 6) for _ in range(2000)]
    w = BitWriter()
    for x in xs:
        gamma_write(w, x)
    assert len(w) == sum(gamma_length(x) for x in xs)
    r = BitReader(w.to_bitvec())
    assert [gamma_read(r) for _ in xs] == xs
    assert r.at_end()


@given(st.integers(1, 1 << 40))
def test_gamma_length_formula(x):
    bits = _gamma_bits(x)
    assert len(bits) == gamma_length(x) == 2 * (x.bit_length() - 1) + 1
    assert gamma_read(BitReader(bits)) == x


def test_gamma_prefix_free():
    codes = sorted("".join(map(str, _gamma_bits(x))) for x in range(1, (1 << 16) + 1))
    for a, b in zip(codes, codes[1:]):
        assert not b.startswith(a)


def test_gamma_malformed_stream():
    with pytest.raises(DecodeError):
        gamma_read(BitReader([0, 0, 1]))
    with pytest.raises(DecodeError):
        gamma_read(BitReader([0, 0, 0]))


def test_findopen_oracle_examples():
    assert findopen_oracle("(())", 4) == 1
    assert findopen_oracle("(())", 3) == 2
    assert findopen_oracle("()()", 4) == 3
    with pytest.raises(ValueError):
        findopen_oracle("(()", 3)
    with pytest.raises(ValueError):
        findopen_oracle("()", 1)


def test_excess_examples():
    assert excess_array("(()())") == [1, 2, 1, 2, 1, 0]
    assert excess_array("()") == [1, 0]


@given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
def test_excess_steps(bits):
    e = excess_array(bits)
    prev = 0
    for x in e:
        assert abs(x - prev) == 1
        prev = x
    balanced = min(e) >= 0 and e[-1] == 0
    try:
        findopen_oracle(bits, 1)
        stack_ok = True
    except ValueError as exc:
        stack_ok = "unbalanced" not in str(exc)
    assert balanced == stack_ok
