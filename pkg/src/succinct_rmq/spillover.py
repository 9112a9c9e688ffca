"""Spill-over representations: storing a value as (M bits, a number in [K]).

A *layout* packs a finite family of entries, entry x carrying a payload of
``M_x`` bits and a spill in ``[K_x]``, into one pair ``(M*, K*)``.  Entries
are placed in a virtual line ``V = spill * 2^H + header`` as intervals of
length ``K_x * 2^(M_x - m0)``, longest granularity first, so no alignment is
wasted.  The memory of the packed value is ``header(h_x bits) || y_M`` where
``h_x = M* - M_x``: a decoder reads the spill, then header bits until the
entry is unique, and the payload of x starts right after its header.

Two ways to pick the target ``(M*, K*)``:

* exact: from the true total ``T = sum K_x 2^M_x`` and a parameter r, giving
  ``K* <= 2r`` and ``M* + log2 K* <= log2 T + log2(1 + 1/r)``;
* budget: from a count c and a scale bound ``1 + delta`` so that
  ``K* 2^M* <= c (1 + delta')`` with K* near ``2^Q``.  Nested structures use
  this so that targets depend only on counts, never on the stored data.
"""

import math
import struct
from fractions import Fraction
from functools import lru_cache

from .bits import BitVec, DecodeError
from .catalan import log2_int
from .probes import NULL

__all__ = [
    "Q",
    "SpillRep",
    "DensityModel",
    "Layout",
    "UniformLayout",
    "exact_target",
    "budget",
    "step_delta",
    "spill_encode",
    "spill_decode",
    "SetSelectRep",
    "set_select_build",
    "set_select",
    "setsel_model",
    "setsel_encode",
    "setsel_select",
]

Q = 40
# slack on float log2 estimates of large counts (relative error of lgamma is ~1e-15)
GUARD = 2e-9
EXACT_LOG2 = Q + 6


def step_delta(delta):
    """Scale bound after one budget application on inputs bounded by 1 + delta."""
    grow = (1.0 + delta * (1.0 + 1e-9)) * (1.0 + 2.0 ** -Q) * 2.0 ** (2 * GUARD)
    return (grow - 1.0) * (1.0 + 1e-9)


def budget(count, log2c, delta):
    """Target (M, K) with K * 2^M >= count * (1 + delta).

    ``count`` is the exact value when known (required when small) and None
    otherwise; ``log2c`` must then be accurate to GUARD.
    """
    if count is not None:
        if count <= 0:
            raise ValueError("budget needs a positive count")
        if count < (1 << (Q + 1)):
            K = count + math.floor(count * delta * (1.0 + 1e-9))
            if K < (1 << (Q + 1)):
                return 0, K
        log2c = log2_int(count)
    elif log2c < EXACT_LOG2 - 2:
        raise ValueError("small counts must be given exactly")
    L = log2c + math.log2(1.0 + delta) + GUARD
    M = max(0, math.floor(L) - Q)
    K = math.ceil(2.0 ** (L - M))
    return M, K


def exact_target(T, r, min_M=0):
    """(M*, K*) with K* 2^M* >= T, K* <= 2r, and loss <= log2(1 + 1/r)."""
    if T <= 0:
        raise ValueError("empty layout")
    if T < r:
        M = 0
    else:
        M = T.bit_length() - r.bit_length()
        while (T >> M) < r:
            M -= 1
        while (T >> (M + 1)) >= r:
            M += 1
    M = max(M, min_M)
    K = (T + (1 << M) - 1) >> M
    return M, K


class Layout:
    """Placement of entries (index -> M_x, K_x) under a target (M*, K*).

    Starts are not stored; both directions scan the entries, which keeps
    memory linear in the domain size.
    """

    __slots__ = ("Ms", "Ks", "order", "m0", "Mstar", "Kstar", "H")

    def __init__(self, Ms, Ks, Mstar, Kstar, check=True):
        self.Ms = Ms
        self.Ks = Ks
        self.order = sorted(range(len(Ms)), key=lambda i: -Ms[i])
        self.m0 = min(Ms) if Ms else 0
        self.Mstar = Mstar
        self.Kstar = Kstar
        self.H = Mstar - self.m0
        if check:
            if Ms and max(Ms) > Mstar:
                raise ValueError("entry payload longer than target memory")
            total = self.total()
            if total > Kstar << Mstar:
                raise ValueError("layout exceeds its target capacity")

    def total(self):
        return sum(K << M for M, K in zip(self.Ms, self.Ks))

    def encode(self, idx, y_K, y_M):
        """Returns (spill, memory int of M* bits, MSB-first)."""
        Ms, Ks, m0 = self.Ms, self.Ks, self.m0
        Mx = Ms[idx]
        if not 0 <= y_K < Ks[idx]:
            raise ValueError("spill value out of range")
        if y_M >> Mx:
            raise ValueError("payload longer than M_x bits")
        start = 0
        for i in self.order:
            if i == idx:
                break
            start += Ks[i] << (Ms[i] - m0)
        g = Mx - m0
        v_hi = (start >> g) + y_K
        h = self.Mstar - Mx
        spill = v_hi >> h
        if spill >= self.Kstar:
            raise AssertionError("layout overflow")
        header = v_hi & ((1 << h) - 1)
        return spill, (header << Mx) | y_M

    def decode(self, spill, read, counter=NULL, region=None):
        """Recover (idx, y_K, h_x) from the spill and a header reader.

        ``read(off, k)`` returns k memory bits at offset ``off`` MSB-first.
        """
        if not 0 <= spill < self.Kstar:
            raise DecodeError("spill value out of range")
        Ms, Ks, m0, H = self.Ms, self.Ks, self.m0, self.H
        counter.touch("table", region)
        lo = spill << H
        known = 0
        start = 0
        for i in self.order:
            end = start + (Ks[i] << (Ms[i] - m0))
            if end <= lo:
                start = end
                continue
            while known < H and lo < end < lo + (1 << (H - known)):
                k = min(64, H - known)
                lo += read(known, k) << (H - known - k)
                known += k
            if lo >= end:
                start = end
                continue
            g = Ms[i] - m0
            h = self.Mstar - Ms[i]
            if known < h:
                k = h - known
                lo += read(known, k) << (H - known - k)
                known = h
            y_K = (lo >> g) - (start >> g)
            return i, y_K, h
        raise DecodeError("corrupted spill-over representation")


class UniformLayout:
    """Layout of ``count`` entries that all share the same (M, K)."""

    __slots__ = ("count", "M", "K", "Mstar", "Kstar")

    def __init__(self, count, M, K, Mstar, Kstar):
        if M > Mstar or (count * K) << M > Kstar << Mstar:
            raise ValueError("uniform layout exceeds its target capacity")
        self.count = count
        self.M = M
        self.K = K
        self.Mstar = Mstar
        self.Kstar = Kstar

    def encode(self, idx, y_K, y_M):
        if not (0 <= idx < self.count and 0 <= y_K < self.K) or y_M >> self.M:
            raise ValueError("value outside the uniform layout")
        v_hi = idx * self.K + y_K
        h = self.Mstar - self.M
        return v_hi >> h, ((v_hi & ((1 << h) - 1)) << self.M) | y_M

    def decode(self, spill, read, counter=NULL, region=None):
        if not 0 <= spill < self.Kstar:
            raise DecodeError("spill value out of range")
        counter.touch("table", region)
        h = self.Mstar - self.M
        v_hi = (spill << h) | (read(0, h) if h else 0)
        idx, y_K = divmod(v_hi, self.K)
        if idx >= self.count:
            raise DecodeError("corrupted spill-over representation")
        return idx, y_K, h


class SpillRep:
    """(memory of M* bits, spill in [K*])."""

    __slots__ = ("memory", "spill", "Mstar", "Kstar")

    def __init__(self, memory, spill, Mstar, Kstar):
        if len(memory) != Mstar:
            raise ValueError("memory length must equal M*")
        if not 0 <= spill < Kstar:
            raise ValueError("spill out of range")
        self.memory = memory
        self.spill = spill
        self.Mstar = Mstar
        self.Kstar = Kstar

    @property
    def accounted_bits(self):
        return self.Mstar + math.log2(self.Kstar)

    @property
    def physical_bits(self):
        return self.Mstar + (self.Kstar - 1).bit_length()

    def to_bytes(self):
        if self.Kstar >= 1 << 64:
            raise ValueError("spill universe does not fit a u64")
        return struct.pack("<QQQ", self.Mstar, self.Kstar, self.spill) + self.memory.to_bytes()

    @classmethod
    def from_bytes(cls, buf, offset=0):
        if len(buf) < offset + 24:
            raise DecodeError("truncated spill-over header")
        Mstar, Kstar, spill = struct.unpack_from("<QQQ", buf, offset)
        mem, off = BitVec.from_bytes(buf, offset + 24)
        if len(mem) != Mstar or not 0 <= spill < Kstar:
            raise DecodeError("inconsistent spill-over representation")
        return cls(mem, spill, Mstar, Kstar), off

    def __eq__(self, other):
        return (isinstance(other, SpillRep) and self.Mstar == other.Mstar
                and self.Kstar == other.Kstar and self.spill == other.spill
                and self.memory == other.memory)

    def __repr__(self):
        return "SpillRep(M*=%d, K*=%d, spill=%d)" % (self.Mstar, self.Kstar, self.spill)


class DensityModel:
    """Finite domain with exact probabilities, payload lengths and spill sizes.

    The budget H must satisfy ``log2(1/p(x)) + M(x) + log2 K(x) <= H`` for
    every x; it defaults to the smallest such H.
    """

    def __init__(self, domain, p, M, K, H=None):
        self.domain = list(domain)
        if not self.domain:
            raise ValueError("empty domain")
        self.p = {x: Fraction(p[x]) for x in self.domain}
        self.M = {x: int(M[x]) for x in self.domain}
        self.K = {x: int(K[x]) for x in self.domain}
        if sum(self.p.values()) != 1 or min(self.p.values()) <= 0:
            raise ValueError("probabilities must be positive and sum to 1")
        if min(self.M.values()) < 0 or min(self.K.values()) < 1:
            raise ValueError("M must be >= 0 and K >= 1")
        need = max(self._cost(x) for x in self.domain)
        if H is None:
            H = need
        elif need > H + 1e-12:
            raise ValueError("model violates its space budget H")
        # exact check: K 2^M <= p 2^H for every x (H may be irrational, use floats only as a guard)
        self.H = H
        self.index = {x: i for i, x in enumerate(self.domain)}
        self._layouts = {}

    def _cost(self, x):
        p = self.p[x]
        return (math.log2(p.denominator) - math.log2(p.numerator)) + self.M[x] + math.log2(self.K[x])

    def total(self):
        return sum(self.K[x] << self.M[x] for x in self.domain)

    def layout(self, r):
        """The lookup table of the lemma: depends only on the model and r."""
        if r not in self._layouts:
            T = self.total()
            Mstar, Kstar = exact_target(T, r)
            Ms, Ks = [], []
            for x in self.domain:
                Mx, Kx = self.M[x], self.K[x]
                if Mx > Mstar:
                    # top payload bits move into the spill
                    Kx <<= Mx - Mstar
                    Mx = Mstar
                Ms.append(Mx)
                Ks.append(Kx)
            self._layouts[r] = Layout(Ms, Ks, Mstar, Kstar)
        return self._layouts[r]

    def table_words(self, r):
        return 2 * len(self.domain)


def spill_encode(x, y_M, y_K, model, r):
    if x not in model.index:
        raise ValueError("x outside the model domain")
    Mx = model.M[x]
    if len(y_M) != Mx:
        raise ValueError("payload length does not match M(x)")
    if not 0 <= y_K < model.K[x]:
        raise ValueError("spill outside [K(x)]")
    lay = model.layout(r)
    idx = model.index[x]
    payload = y_M.read_msb(0, Mx) if Mx else 0
    moved = Mx - lay.Ms[idx]
    if moved > 0:
        y_K = (y_K << moved) | (payload >> lay.Ms[idx])
        payload &= (1 << lay.Ms[idx]) - 1
    spill, mem = lay.encode(idx, y_K, payload)
    return SpillRep(BitVec.from_msb_int(mem, lay.Mstar), spill, lay.Mstar, lay.Kstar)


def spill_decode(rep, model, r, counter=NULL):
    lay = model.layout(r)
    if rep.Mstar != lay.Mstar or rep.Kstar != lay.Kstar:
        raise DecodeError("representation does not match the model")
    counter.touch("spill", 0)
    mem = rep.memory

    def read(off, k):
        counter.touch_bits("memory", off, k)
        return mem.read_msb(off, k)

    idx, y_K, h = lay.decode(rep.spill, read, counter)
    x = model.domain[idx]
    Mx = model.M[x]
    kept = lay.Ms[idx]
    payload = mem.read_msb(h, kept) if kept else 0
    moved = Mx - kept
    if moved > 0:
        payload |= (y_K & ((1 << moved) - 1)) << kept
        y_K >>= moved
    y_M = BitVec.from_msb_int(payload, Mx)
    return x, y_M, y_K


# ---------------------------------------------------------------------------
# set-select: a k-subset of [u] by balanced binomial splits

@lru_cache(maxsize=None)
def _ss_delta(u):
    if u <= 1:
        return 0.0
    u1 = (u + 1) // 2
    inner = (1.0 + _ss_delta(u1)) * (1.0 + _ss_delta(u - u1)) - 1.0
    return step_delta(inner * (1.0 + 1e-12))


def setsel_delta(u):
    """Uniform scale bound of every set-select node over a universe of size <= u."""
    return _ss_delta_max(u)


_ss_running_max = [0.0, 0.0]


def _ss_delta_max(u):
    while len(_ss_running_max) <= u:
        v = len(_ss_running_max)
        _ss_running_max.append(max(_ss_running_max[-1], _ss_delta(v)))
    return _ss_running_max[max(u, 0)]


def _log2_binom(u, k):
    return (math.lgamma(u + 1) - math.lgamma(k + 1) - math.lgamma(u - k + 1)) / math.log(2)


def binom_count(u, k):
    """(exact or None, log2) for binom(u, k)."""
    lg = _log2_binom(u, k)
    if lg < EXACT_LOG2:
        return math.comb(u, k), lg
    return None, lg


@lru_cache(maxsize=200000)
def setsel_model(u, k):
    """(M, K) of the set-select node for k-subsets of [u]."""
    if k == 0 or k == u:
        return 0, 1
    c, lg = binom_count(u, k)
    u1 = (u + 1) // 2
    inner = (1.0 + _ss_delta(u1)) * (1.0 + _ss_delta(u - u1)) - 1.0
    return budget(c, lg, inner * (1.0 + 1e-12))


@lru_cache(maxsize=20000)
def _ss_layout(u, k):
    u1 = (u + 1) // 2
    u2 = u - u1
    jlo, jhi = max(0, k - u2), min(k, u1)
    Ms, Ks = [], []
    for j in range(jlo, jhi + 1):
        M1, K1 = setsel_model(u1, j)
        M2, K2 = setsel_model(u2, k - j)
        Ms.append(M1 + M2)
        Ks.append(K1 * K2)
    M, K = setsel_model(u, k)
    return Layout(Ms, Ks, M, K), jlo


def setsel_encode(bits):
    """bits: 0/1 list over the universe.  Returns (spill, memory int, M, K)."""
    u = len(bits)
    k = sum(bits)
    M, K = setsel_model(u, k)
    if k == 0 or k == u:
        return 0, 0, M, K
    u1 = (u + 1) // 2
    s1, m1, M1, K1 = setsel_encode(bits[:u1])
    s2, m2, M2, K2 = setsel_encode(bits[u1:])
    lay, jlo = _ss_layout(u, k)
    j = sum(bits[:u1])
    spill, mem = lay.encode(j - jlo, s1 * K2 + s2, (m1 << M2) | m2)
    return spill, mem, M, K


def setsel_select(u, k, spill, read, offset, i, counter=NULL, region=None):
    """Position (1-based) of the i-th one.  ``read(off, k)`` reads memory bits."""
    if not 1 <= i <= k:
        raise IndexError("select index out of range")
    base = 0
    while True:
        if k == u:
            return base + i
        u1 = (u + 1) // 2
        u2 = u - u1
        lay, jlo = _ss_layout(u, k)
        off = offset
        idx, y_K, h = lay.decode(spill, lambda o, c: read(off + o, c), counter, region)
        j = jlo + idx
        M1, K1 = setsel_model(u1, j)
        M2, K2 = setsel_model(u2, k - j)
        s1, s2 = divmod(y_K, K2)
        if i <= j:
            u, k, spill, offset = u1, j, s1, offset + h
        else:
            u, k, spill, offset = u2, k - j, s2, offset + h + M1
            i -= j
            base += u1


class SetSelectRep:
    """A k-subset of [u] with select in O(log u) layout decodes."""

    def __init__(self, u, k, rep, inner):
        self.u = u
        self.k = k
        self.rep = rep
        self._inner = inner  # (M, K) of the set-select root

    @property
    def accounted_bits(self):
        return self.rep.accounted_bits

    def select(self, i, counter=NULL):
        if not 1 <= i <= self.k:
            raise IndexError("select index out of range")
        M, K = self._inner
        lay = Layout([M], [K], self.rep.Mstar, self.rep.Kstar, check=False)
        mem = self.rep.memory

        def read(off, c):
            counter.touch_bits("memory", off, c)
            return mem.read_msb(off, c)

        counter.touch("spill", 0)
        _, spill, h = lay.decode(self.rep.spill, read, counter)
        return setsel_select(self.u, self.k, spill, read, h, i, counter)


def set_select_build(S, u, r):
    S = sorted(S)
    if len(set(S)) != len(S) or (S and (S[0] < 1 or S[-1] > u)):
        raise ValueError("S must be a set of distinct elements of [u]")
    bits = [0] * u
    for s in S:
        bits[s - 1] = 1
    spill, mem, M, K = setsel_encode(bits)
    Mstar, Kstar = exact_target(K << M, r, min_M=M)
    lay = Layout([M], [K], Mstar, Kstar)
    s2, m2 = lay.encode(0, spill, mem)
    rep = SpillRep(BitVec.from_msb_int(m2, Mstar), s2, Mstar, Kstar)
    return SetSelectRep(u, len(S), rep, (M, K))


def set_select(rep, i, counter=NULL):
    return rep.select(i, counter)
