"""Bit vectors with rank/select, Elias gamma codes and parenthesis oracles.

Positions are 1-based at the API; words are little-endian (bit j of the
vector lives in word j // 64 at bit j % 64).  An open parenthesis is a 1 bit
and a close is a 0 bit.
"""

import struct

import numpy as np

__all__ = [
    "BitVec",
    "BitWriter",
    "BitReader",
    "DecodeError",
    "gamma_write",
    "gamma_read",
    "gamma_length",
    "findopen_oracle",
    "excess_array",
]

WORD = 64
SUPER = 512
_WPS = SUPER // WORD


class DecodeError(ValueError):
    pass


class IntegrityError(ValueError):
    """Stored data disagrees with what it is supposed to describe."""


def _popcount(words):
    return np.bitwise_count(words).astype(np.int64)


class BitVec:
    """Immutable bit vector with a two-level rank directory."""

    def __init__(self, words, length):
        nwords = (length + WORD - 1) // WORD
        words = np.asarray(words, dtype=np.uint64)
        if len(words) < nwords:
            words = np.concatenate([words, np.zeros(nwords - len(words), np.uint64)])
        words = words[:nwords].copy()
        if length % WORD and nwords:
            words[-1] &= np.uint64((1 << (length % WORD)) - 1)
        words.setflags(write=False)
        self.words = words
        self.length = length
        self._dir = None
        self._int = None

    # construction helpers
    @classmethod
    def from_bits(cls, bits):
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8)
        n = len(arr)
        if n == 0:
            return cls(np.zeros(0, np.uint64), 0)
        pad = (-n) % WORD
        if pad:
            arr = np.concatenate([arr, np.zeros(pad, np.uint8)])
        packed = np.packbits(arr, bitorder="little")
        return cls(packed.view("<u8").astype(np.uint64), n)

    @classmethod
    def from_string(cls, s):
        table = {"1": 1, "0": 0, "(": 1, ")": 0}
        return cls.from_bits([table[c] for c in s])

    @classmethod
    def from_int(cls, value, length):
        """Bit j (0-based) of the vector is bit j of ``value``."""
        nbytes = (length + 7) // 8
        raw = value.to_bytes(max(nbytes, 1), "little")[:nbytes]
        pad = (-len(raw)) % 8
        arr = np.frombuffer(raw + b"\0" * pad, dtype="<u8").astype(np.uint64)
        return cls(arr, length)

    @classmethod
    def from_msb_int(cls, value, length):
        """Offset 0 holds the most significant of ``length`` bits of ``value``."""
        if length == 0:
            return cls(np.zeros(0, np.uint64), 0)
        s = format(value, "0%db" % length)
        return cls.from_bits(np.frombuffer(s.encode(), dtype=np.uint8) - 48)

    def __len__(self):
        return self.length

    def __eq__(self, other):
        return (isinstance(other, BitVec) and self.length == other.length
                and np.array_equal(self.words, other.words))

    def __hash__(self):
        return hash((self.length, self.words.tobytes()))

    def __repr__(self):
        if self.length <= 64:
            return "BitVec(%r)" % self.to_string()
        return "BitVec(length=%d)" % self.length

    def as_int(self):
        if self._int is None:
            self._int = int.from_bytes(self.words.astype("<u8").tobytes(), "little")
        return self._int

    def to_list(self):
        if self.length == 0:
            return []
        raw = np.unpackbits(self.words.astype("<u8").view(np.uint8), bitorder="little")
        return raw[: self.length].tolist()

    def to_numpy(self):
        if self.length == 0:
            return np.zeros(0, np.uint8)
        raw = np.unpackbits(self.words.astype("<u8").view(np.uint8), bitorder="little")
        return raw[: self.length]

    def to_string(self, parens=False):
        a, b = ("(", ")") if parens else ("1", "0")
        return "".join(a if x else b for x in self.to_list())

    def get(self, i):
        if not 1 <= i <= self.length:
            raise IndexError("bit position out of range")
        j = i - 1
        return int(self.words[j >> 6] >> np.uint64(j & 63)) & 1

    def read_msb(self, off, k):
        """k bits starting at 0-based offset ``off``, first bit most significant."""
        if k == 0:
            return 0
        if off < 0 or off + k > self.length:
            raise DecodeError("read past end of bit vector")
        chunk = (self.as_int() >> off) & ((1 << k) - 1)
        return int(format(chunk, "0%db" % k)[::-1], 2)

    def read_lsb(self, off, k):
        if off < 0 or off + k > self.length:
            raise DecodeError("read past end of bit vector")
        return (self.as_int() >> off) & ((1 << k) - 1)

    # rank / select
    def _directory(self):
        if self._dir is None:
            pc = _popcount(self.words)
            cum = np.concatenate([[0], np.cumsum(pc)])
            nsuper = (len(self.words) + _WPS - 1) // _WPS
            sup = cum[::_WPS][: nsuper + 1].astype(np.int64)
            if len(sup) < nsuper + 1:
                sup = np.append(sup, cum[-1])
            rel = (cum[:-1] - np.repeat(sup[:nsuper], _WPS)[: len(self.words)]).astype(np.uint16)
            self._dir = (sup, rel, int(cum[-1]))
        return self._dir

    def directory_bits(self):
        """Bits a two-level directory would occupy: 64 per superblock, 10 per word."""
        nwords = len(self.words)
        return 64 * ((nwords + _WPS - 1) // _WPS) + 10 * nwords

    @property
    def ones(self):
        return self._directory()[2]

    def rank1(self, i):
        if not 0 <= i <= self.length:
            raise IndexError("rank position out of range")
        if i == 0:
            return 0
        sup, rel, _ = self._directory()
        w = (i - 1) >> 6
        partial = int(self.words[w]) & ((1 << (((i - 1) & 63) + 1)) - 1)
        return int(sup[w // _WPS]) + int(rel[w]) + partial.bit_count()

    def rank0(self, i):
        return i - self.rank1(i)

    def select1(self, k):
        """Position of the k-th one, or None when there are fewer than k."""
        sup, rel, total = self._directory()
        if k < 1 or k > total:
            return None
        s = int(np.searchsorted(sup, k, side="left")) - 1
        base = int(sup[s])
        w = s * _WPS
        end = min(w + _WPS, len(self.words))
        while w + 1 < end and base + int(rel[w + 1]) < k:
            w += 1
        need = k - base - int(rel[w])
        return w * WORD + _select_in_word(int(self.words[w]), need)

    def select0(self, k):
        if k < 1 or k > self.length - self.ones:
            return None
        sup, rel, _ = self._directory()
        lo, hi = 0, len(sup) - 1
        # largest superblock whose zeros-before < k
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if mid * SUPER - int(sup[mid]) < k:
                lo = mid
            else:
                hi = mid - 1
        s = lo
        w = s * _WPS
        end = min(w + _WPS, len(self.words))
        zeros_before = lambda ww: ww * WORD - int(sup[s]) - int(rel[ww])
        while w + 1 < end and zeros_before(w + 1) < k:
            w += 1
        need = k - zeros_before(w)
        inv = ~int(self.words[w]) & ((1 << WORD) - 1)
        return w * WORD + _select_in_word(inv, need)

    # serialization
    def to_bytes(self):
        return struct.pack("<Q", self.length) + self.words.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, buf, offset=0):
        """Returns (BitVec, new offset)."""
        if len(buf) < offset + 8:
            raise DecodeError("truncated bit vector header")
        (length,) = struct.unpack_from("<Q", buf, offset)
        nwords = (length + WORD - 1) // WORD
        start = offset + 8
        end = start + 8 * nwords
        if len(buf) < end:
            raise DecodeError("truncated bit vector payload")
        words = np.frombuffer(buf[start:end], dtype="<u8").astype(np.uint64)
        bv = cls(words, length)
        if not np.array_equal(bv.words, words):
            raise DecodeError("nonzero bits beyond logical length")
        return bv, end

    def serialized_size(self):
        return 8 + 8 * len(self.words)


def _select_in_word(word, k):
    """1-based position inside ``word`` of its k-th one bit."""
    for _ in range(k - 1):
        word &= word - 1
    return ((word & -word).bit_length())


class BitWriter:
    def __init__(self):
        self._bits = []

    def write_bit(self, b):
        self._bits.append(1 if b else 0)

    def write_bits(self, value, k):
        """k bits of value, most significant first."""
        for j in range(k - 1, -1, -1):
            self._bits.append((value >> j) & 1)

    def __len__(self):
        return len(self._bits)

    @property
    def position(self):
        return len(self._bits)

    def bits(self):
        return list(self._bits)

    def to_bitvec(self):
        return BitVec.from_bits(self._bits)


class BitReader:
    def __init__(self, source):
        if isinstance(source, BitVec):
            source = source.to_list()
        self._bits = list(source)
        self.pos = 0

    def read_bit(self):
        if self.pos >= len(self._bits):
            raise DecodeError("read past end of stream")
        b = self._bits[self.pos]
        self.pos += 1
        return b

    def read_bits(self, k):
        v = 0
        for _ in range(k):
            v = (v << 1) | self.read_bit()
        return v

    def at_end(self):
        return self.pos >= len(self._bits)


def gamma_length(x):
    return 2 * (x.bit_length() - 1) + 1


def gamma_write(w, x):
    if x < 1:
        raise ValueError("gamma code needs x >= 1")
    nb = x.bit_length()
    for _ in range(nb - 1):
        w.write_bit(0)
    w.write_bits(x, nb)


def gamma_read(r):
    zeros = 0
    while r.read_bit() == 0:
        zeros += 1
        if zeros > 4096:
            raise DecodeError("malformed gamma code")
    return (1 << zeros) | r.read_bits(zeros)


def _as_list(parens):
    if isinstance(parens, BitVec):
        return parens.to_list()
    if isinstance(parens, str):
        return BitVec.from_string(parens).to_list()
    return list(parens)


def excess_array(parens):
    out = []
    e = 0
    for b in _as_list(parens):
        e += 1 if b else -1
        out.append(e)
    return out


def findopen_oracle(parens, i):
    """Matching open of the close at 1-based position i, by stack simulation."""
    bits = _as_list(parens)
    stack = []
    match = {}
    for pos, b in enumerate(bits, 1):
        if b:
            stack.append(pos)
        else:
            if not stack:
                raise ValueError("unbalanced parenthesis string")
            match[pos] = stack.pop()
    if stack:
        raise ValueError("unbalanced parenthesis string")
    if i not in match:
        raise ValueError("position %d does not hold a close" % i)
    return match[i]
