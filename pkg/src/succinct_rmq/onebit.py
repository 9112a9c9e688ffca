"""RMQ in log2(C_n) + 1 bits with logarithmic query.

The array is cut into a complete binary decomposition (left half gets the
ceiling).  Every node v stores its label (|S_l|, |S_r|): the lengths of the
greedy decreasing sequences read from its left end (prefix minima) and from
its right end (suffix minima).  A node with children p, q additionally needs
the *merge witness*: how the part of S_r(p) and S_l(q) that sits above the
smaller of the two minima interleaves in sorted order.  Labels, children and
witness of every node are folded together with spill-over layouts whose
targets depend on counts only, so the whole tree costs about log2 C_n bits.

Conventions: S_r(v) is listed from position R_v leftwards (index 1 is the
largest value, the last entry is min(v)); S_l(v) is listed from L_v
rightwards.  Values are compared by (A[i], i), i.e. leftmost minimum wins.
"""

import math
import struct
from functools import lru_cache

from .bits import BitVec, DecodeError
from .cartesian import check_range
from .catalan import catalan_number, log2_int, mfold_value
from .probes import NULL
from .spillover import (
    EXACT_LOG2,
    Layout,
    SpillRep,
    UniformLayout,
    budget,
    exact_target,
    setsel_delta,
    setsel_encode,
    setsel_model,
    setsel_select,
    step_delta,
)

__all__ = [
    "OneBitRMQ",
    "build_onebit",
    "query_onebit",
    "relocate",
    "count_N",
    "count_N_recursive",
    "merge_count",
    "mergeable_labels",
    "greedy_sequences",
    "label_of",
]

_LN2 = math.log(2)


# ---------------------------------------------------------------------------
# counting

def count_N(s, l, r):
    """Number of s-node Cartesian trees whose root label is (l, r).

    Equals the (l+r-2)-fold Catalan convolution of s-1.
    """
    if s < 1 or l < 1 or r < 1:
        return 0
    if s == 1:
        return 1 if l == r == 1 else 0
    return mfold_value(l + r - 2, s - 1)


def merge_count(phi, phi1, phi2):
    """Number of merge witnesses turning child labels phi1, phi2 into phi."""
    l, r = phi
    l1, r1 = phi1
    l2, r2 = phi2
    if l == l1 and r2 + 1 <= r <= r1 + r2:
        j = r - r2  # elements of S_r(left child) below min(right child)
        return math.comb(r1 - j + l2 - 1, l2 - 1)
    if r == r2 and l1 + 1 <= l <= l1 + l2:
        i = l - l1
        return math.comb(l2 - i + r1 - 1, r1 - 1)
    raise ValueError("label %r is not mergeable from %r and %r" % (phi, phi1, phi2))


def mergeable_labels(phi1, phi2):
    l1, r1 = phi1
    l2, r2 = phi2
    out = [(l1, r) for r in range(r2 + 1, r1 + r2 + 1)]
    out += [(l, r2) for l in range(l1 + 1, l1 + l2 + 1)]
    return out


def _labels(s):
    return [(l, r) for l in range(1, s + 1) for r in range(1, s + 2 - l)]


@lru_cache(maxsize=None)
def _count_table(s):
    if s == 1:
        return {(1, 1): 1}
    a = (s + 1) // 2
    b = s - a
    out = {}
    ta, tb = _count_table(a), _count_table(b)
    for p1, c1 in ta.items():
        for p2, c2 in tb.items():
            for phi in mergeable_labels(p1, p2):
                out[phi] = out.get(phi, 0) + c1 * c2 * merge_count(phi, p1, p2)
    return out


def count_N_recursive(s, l, r):
    """count_N by the merge recursion over the balanced split (test oracle)."""
    return _count_table(s).get((l, r), 0)


def greedy_sequences(A, L, R):
    """(S_l, S_r) of A[L..R] by direct scan, positions in the listing order above."""
    key = lambda i: (A[i - 1], i)
    Sl = [L]
    for i in range(L + 1, R + 1):
        if key(i) < key(Sl[-1]):
            Sl.append(i)
    Sr = [R]
    for i in range(R - 1, L - 1, -1):
        if key(i) < key(Sr[-1]):
            Sr.append(i)
    return Sl, Sr


def label_of(A, L=1, R=None):
    R = len(A) if R is None else R
    Sl, Sr = greedy_sequences(A, L, R)
    return len(Sl), len(Sr)


# ---------------------------------------------------------------------------
# count estimates: exact when small, log2 otherwise

def _log2F(m, U):
    if m == 0:
        return 0.0
    t = 2 * U - m
    return (math.log(m) - math.log(t) + math.lgamma(t + 1) - math.lgamma(U + 1)
            - math.lgamma(U - m + 1)) / _LN2


@lru_cache(maxsize=1 << 20)
def _F(m, U):
    """(exact or None, log2) of the m-fold convolution of U; requires 0 <= m <= U."""
    if m == 0:
        return (1, 0.0) if U == 0 else (0, -math.inf)
    lg = _log2F(m, U)
    if lg < EXACT_LOG2:
        return mfold_value(m, U), lg
    return None, lg


def _N(s, l, r):
    if s == 1:
        return (1, 0.0) if l == r == 1 else (0, -math.inf)
    m = l + r - 2
    if m < 1 or m > s - 1:
        return 0, -math.inf
    return _F(m, s - 1)


def _mul(*terms):
    lg = sum(t[1] for t in terms)
    if lg < EXACT_LOG2 and all(t[0] is not None for t in terms):
        v = 1
        for t in terms:
            v *= t[0]
        return v, lg
    return None, lg


def _witness_count(u, k):
    M, K = setsel_model(u, k)
    return M, K


# ---------------------------------------------------------------------------
# scale bounds (functions of node size only)

@lru_cache(maxsize=None)
def _deltas(s):
    """(delta entering step B, delta entering step A, node delta) for size s."""
    if s == 1:
        return 0.0, 0.0, 0.0
    a = (s + 1) // 2
    b = s - a
    dB = ((1.0 + _deltas(a)[2]) * (1.0 + _deltas(b)[2]) * (1.0 + setsel_delta(s)) - 1.0) * (1.0 + 1e-12)
    dA = step_delta(dB)
    return dB, dA, step_delta(dA)


def _warm_deltas(n):
    # fill caches bottom-up to keep recursion shallow
    sizes = set()
    stack = [n]
    while stack:
        s = stack.pop()
        if s in sizes:
            continue
        sizes.add(s)
        if s > 1:
            stack.extend(((s + 1) // 2, s // 2))
    for s in sorted(sizes):
        setsel_delta(s)
        _deltas(s)


@lru_cache(maxsize=1 << 20)
def node_model(s, l, r):
    """(M, K) of a node of size s with label (l, r)."""
    if s == 1:
        return 0, 1
    c, lg = _N(s, l, r)
    if c == 0:
        raise ValueError("label (%d, %d) impossible for size %d" % (l, r, s))
    return budget(c, lg, _deltas(s)[1])


@lru_cache(maxsize=1 << 18)
def _stepB_target(s, l, r, case, j, e):
    a = (s + 1) // 2
    b = s - a
    if case == 0:
        c = _mul(_N(a, l, j + e), _F(r - j + e, b + e))
    else:
        c = _mul(_N(b, j + e, r), _F(l - j + e, a + e))
    return budget(c[0], c[1], _deltas(s)[0])


def _stepA_entries(s, l, r):
    """Domain of the first layout: (case, j, e) in a fixed order."""
    a = (s + 1) // 2
    b = s - a
    keys = []
    if l <= a:
        for j in range(max(1, r - b), min(r - 1, a - l + 1) + 1):
            for e in range(0, a - l - j + 2):
                if _N(a, l, j + e)[1] > -math.inf:
                    keys.append((0, j, e))
    if r <= b:
        for i in range(max(1, l - a), min(l - 1, b - r + 1) + 1):
            for e in range(0, b - r - i + 2):
                if _N(b, i + e, r)[1] > -math.inf:
                    keys.append((1, i, e))
    return keys


class _LayoutA:
    __slots__ = ("layout", "keys", "index")

    def __init__(self, s, l, r):
        keys = _stepA_entries(s, l, r)
        Ms, Ks = [], []
        for case, j, e in keys:
            M, K = _stepB_target(s, l, r, case, j, e)
            Ms.append(M)
            Ks.append(K)
        M, K = node_model(s, l, r)
        self.layout = Layout(Ms, Ks, M, K)
        self.keys = keys
        self.index = None

    def idx(self, key):
        if self.index is None:
            self.index = {k: i for i, k in enumerate(self.keys)}
        return self.index[key]


@lru_cache(maxsize=4096)
def _layout_A(s, l, r):
    return _LayoutA(s, l, r)


def _stepB_parts(s, l, r, case, j, e, x):
    """Children labels and witness shape for step-B entry x (1-based)."""
    a = (s + 1) // 2
    b = s - a
    if case == 0:
        h = x
        return (l, j + e), (h, r - j), (e + h - 1, h - 1)
    rp = x
    return (l - j, rp), (j + e, r), (rp - 1 + e, e)


def _stepB_values(s, l, r, case, j, e):
    """Admissible step-B entries x (h for case 0, r' for case 1) with nonzero count."""
    a = (s + 1) // 2
    b = s - a
    if case == 0:
        xs = range(1, b - (r - j) + 2)
        return [x for x in xs if _N(b, x, r - j)[1] > -math.inf]
    xs = range(1, a - (l - j) + 2)
    return [x for x in xs if _N(a, l - j, x)[1] > -math.inf]


class _LayoutB:
    __slots__ = ("layout", "xs", "index")

    def __init__(self, s, l, r, case, j, e):
        a = (s + 1) // 2
        b = s - a
        Ms, Ks = [], []
        self.xs = _stepB_values(s, l, r, case, j, e)
        for x in self.xs:
            pl, ql, (u, k) = _stepB_parts(s, l, r, case, j, e, x)
            Mp, Kp = node_model(a, *pl)
            Mq, Kq = node_model(b, *ql)
            Mw, Kw = setsel_model(u, k)
            Ms.append(Mp + Mq + Mw)
            Ks.append(Kp * Kq * Kw)
        M, K = _stepB_target(s, l, r, case, j, e)
        self.layout = Layout(Ms, Ks, M, K)
        self.index = {x: i for i, x in enumerate(self.xs)}


@lru_cache(maxsize=1 << 16)
def _layout_B(s, l, r, case, j, e):
    return _LayoutB(s, l, r, case, j, e)


# root chain: label (l, r) of the whole array in two steps, m = l + r - 2 first

@lru_cache(maxsize=64)
def _root_layouts(n):
    d = _deltas(n)[2]
    inner = {}
    Ms1, Ks1 = [], []
    for m in range(1, n):
        # every label with l + r = m + 2 has the same count, hence the same (M, K)
        M, K = node_model(n, 1, m + 1)
        c = _mul((m + 1, math.log2(m + 1)), _F(m, n - 1))
        M2, K2 = budget(c[0], c[1], d)
        inner[m] = UniformLayout(m + 1, M, K, M2, K2)
        Ms1.append(M2)
        Ks1.append(K2)
    T = sum(K << M for M, K in zip(Ms1, Ks1))
    Mstar, Kstar = exact_target(T, 8 * n, min_M=max(Ms1))
    return Layout(Ms1, Ks1, Mstar, Kstar), inner


# ---------------------------------------------------------------------------
# build

def _ranks(A):
    order = sorted(range(len(A)), key=lambda i: (A[i], i))
    key = [0] * (len(A) + 1)
    for rnk, i in enumerate(order):
        key[i + 1] = rnk
    return key


def _merge_bits(first, second, key):
    """Interleave two key-decreasing position lists; 1 marks ``second``."""
    out = []
    i = j = 0
    while i < len(first) or j < len(second):
        if j == len(second) or (i < len(first) and key[first[i]] > key[second[j]]):
            out.append(0)
            i += 1
        else:
            out.append(1)
            j += 1
    return out


def _encode(L, R, key):
    """Returns (label, spill, mem, M, K, S_l, S_r)."""
    if L == R:
        return (1, 1), 0, 0, 0, 1, [L], [L]
    s = R - L + 1
    mid = (L + R) // 2
    lp, sp, mp, Mp, Kp, Slp, Srp = _encode(L, mid, key)
    lq, sq, mq, Mq, Kq, Slq, Srq = _encode(mid + 1, R, key)
    minp, minq = Slp[-1], Slq[-1]
    if key[minp] < key[minq]:
        case = 0
        kq = key[minq]
        e = 0
        while key[Srp[e]] > kq:
            e += 1
        j = len(Srp) - e
        h = len(Slq)
        Sl, Sr = Slp, Srq + Srp[e:]
        wbits = _merge_bits(Srp[:e], Slq[:h - 1], key)
        x, jj, ee = h, j, e
    else:
        case = 1
        kp = key[minp]
        e = 0
        while key[Slq[e]] > kp:
            e += 1
        i = len(Slq) - e
        rp = len(Srp)
        Sl, Sr = Slp + Slq[e:], Srq
        wbits = _merge_bits(Srp[:rp - 1], Slq[:e], key)
        x, jj, ee = rp, i, e
    l, r = len(Sl), len(Sr)
    sw, mw, Mw, Kw = setsel_encode(wbits)
    y_K = (sp * Kq + sq) * Kw + sw
    y_M = (((mp << Mq) | mq) << Mw) | mw
    lb = _layout_B(s, l, r, case, jj, ee)
    sB, memB = lb.layout.encode(lb.index[x], y_K, y_M)
    la = _layout_A(s, l, r)
    sA, memA = la.layout.encode(la.idx((case, jj, ee)), sB, memB)
    M, K = node_model(s, l, r)
    return (l, r), sA, memA, M, K, Sl, Sr


class _Node:
    """Decoded contents of one decomposition node."""

    __slots__ = ("L", "R", "label", "case", "j", "e", "x", "children", "witness", "cells")

    def __init__(self, L, R, label):
        self.L = L
        self.R = R
        self.label = label
        self.case = None
        self.children = None  # ((label, spill, offset), (label, spill, offset))
        self.witness = None  # (u, k, spill, offset)
        self.cells = ()


class _Recorder:
    def __init__(self, w):
        self.w = w
        self.cells = []

    def touch(self, region, index):
        self.cells.append((region, index))

    def touch_bits(self, region, off, k):
        if k <= 0:
            return
        for c in range(off // self.w, (off + k - 1) // self.w + 1):
            self.cells.append((region, c))


class OneBitRMQ:
    """Succinct RMQ of log2 C_n + O(1/n) accounted bits."""

    KIND = 1

    def __init__(self, n, rep, r=None):
        self.n = n
        self.r = 8 * n if r is None else r
        self.rep = rep
        self._cache = {}
        self._mem = rep.memory

    # -- construction
    @classmethod
    def build(cls, A):
        n = len(A)
        if n < 1:
            raise ValueError("array must be non-empty")
        if n == 1:
            return cls(1, SpillRep(BitVec.from_bits([]), 0, 0, 1))
        _warm_deltas(n)
        key = _ranks(A)
        label, spill, mem, M, K, _, _ = _encode(1, n, key)
        lay1, inner = _root_layouts(n)
        l, r = label
        m = l + r - 2
        s2, mem2 = inner[m].encode(l - 1, spill, mem)
        s1, mem1 = lay1.encode(m - 1, s2, mem2)
        rep = SpillRep(BitVec.from_msb_int(mem1, lay1.Mstar), s1, lay1.Mstar, lay1.Kstar)
        return cls(n, rep)

    # -- space
    @property
    def accounted_bits(self):
        return self.rep.accounted_bits

    @property
    def physical_bits(self):
        return self.rep.physical_bits

    def benchmark_bits(self):
        return log2_int(catalan_number(self.n))

    # -- decoding
    def _read(self, rec):
        mem = self._mem

        def read(off, k):
            rec.touch_bits("memory", off, k)
            return mem.read_msb(off, k)

        return read

    def _root(self):
        node = self._cache.get((1, self.n))
        if node is not None:
            return node
        rec = _Recorder(64)
        read = self._read(rec)
        rec.touch("spill", 0)
        if self.n == 1:
            node = _Node(1, 1, (1, 1))
            node.cells = tuple(rec.cells)
            self._cache[(1, 1)] = node
            return node
        _warm_deltas(self.n)
        lay1, inner = _root_layouts(self.n)
        i1, s2, h1 = lay1.decode(self.rep.spill, read, rec)
        m = i1 + 1
        i2, s3, h2 = inner[m].decode(s2, lambda o, k: read(h1 + o, k), rec)
        l = i2 + 1
        node = self._decode_node(1, self.n, (l, m + 2 - l), s3, h1 + h2, rec)
        return node

    def _decode_node(self, L, R, label, spill, offset, rec=None):
        node = _Node(L, R, label)
        if rec is None:
            rec = _Recorder(64)
        if L < R:
            read = self._read(rec)
            s = R - L + 1
            a = (s + 1) // 2
            b = s - a
            l, r = label
            la = _layout_A(s, l, r)
            iA, sB, hA = la.layout.decode(spill, lambda o, k: read(offset + o, k), rec)
            case, j, e = la.keys[iA]
            lb = _layout_B(s, l, r, case, j, e)
            iB, yK, hB = lb.layout.decode(sB, lambda o, k: read(offset + hA + o, k), rec)
            x = lb.xs[iB]
            pl, ql, (u, k) = _stepB_parts(s, l, r, case, j, e, x)
            Mp, Kp = node_model(a, *pl)
            Mq, Kq = node_model(b, *ql)
            Mw, Kw = setsel_model(u, k)
            rest, sw = divmod(yK, Kw)
            sp, sq = divmod(rest, Kq)
            base = offset + hA + hB
            node.case, node.j, node.e, node.x = case, j, e, x
            node.children = ((pl, sp, base), (ql, sq, base + Mp))
            node.witness = (u, k, sw, base + Mp + Mq)
        node.cells = tuple(rec.cells)
        self._cache[(L, R)] = node
        return node

    def _child(self, node, side):
        L, R = node.L, node.R
        mid = (L + R) // 2
        rng = (L, mid) if side == 0 else (mid + 1, R)
        got = self._cache.get(rng)
        if got is not None:
            return got
        label, spill, off = node.children[side]
        return self._decode_node(rng[0], rng[1], label, spill, off)

    def clear_cache(self):
        self._cache = {}

    # -- query
    def query(self, a, b, counter=NULL):
        check_range(self.n, a, b)
        seen = set()

        def visit(node):
            if (node.L, node.R) not in seen:
                seen.add((node.L, node.R))
                counter.touch_many(node.cells)
            return node

        v = visit(self._root())
        while True:
            if v.L == v.R:
                return v.L
            mid = (v.L + v.R) // 2
            if b <= mid:
                v = visit(self._child(v, 0))
            elif a > mid:
                v = visit(self._child(v, 1))
            else:
                break
        p = visit(self._child(v, 0))
        q = visit(self._child(v, 1))
        ap = self._find_a(p, a, visit)
        bp = self._find_b(q, b, visit)
        if self._left_wins(v, ap, bp, counter):
            return self._find_a_pos(p, ap, visit)
        return self._find_b_pos(q, bp, visit)

    def _left_wins(self, v, ap, bp, counter):
        """Is S_r(p)[ap] smaller than S_l(q)[bp]?  Uses the merge witness."""
        rp = v.children[0][0][1]
        hq = v.children[1][0][0]
        if v.case == 0:
            e = v.e
            if ap > e:
                return True
            if bp == hq:
                return False
        else:
            e = v.e
            if bp > e:
                return False
            if ap == rp:
                return True
        u, k, sw, off = v.witness
        rec = _Recorder(64)
        pos = setsel_select(u, k, sw, self._read(rec), off, bp, rec)
        counter.touch_many(rec.cells)
        return not pos >= ap + bp

    def _find_a(self, v, a, visit):
        """Rank in S_r(v) of the minimum of A[a..R_v]."""
        if v.L == v.R:
            return 1
        mid = (v.L + v.R) // 2
        right = visit(self._child(v, 1))
        if a > mid:
            return self._find_a(right, a, visit)
        left = visit(self._child(v, 0))
        d = left.label[1] + right.label[1] - v.label[1]
        return right.label[1] + max(0, self._find_a(left, a, visit) - d)

    def _find_b(self, v, b, visit):
        """Rank in S_l(v) of the minimum of A[L_v..b]."""
        if v.L == v.R:
            return 1
        mid = (v.L + v.R) // 2
        left = visit(self._child(v, 0))
        if b <= mid:
            return self._find_b(left, b, visit)
        right = visit(self._child(v, 1))
        d = left.label[0] + right.label[0] - v.label[0]
        return left.label[0] + max(0, self._find_b(right, b, visit) - d)

    def _find_a_pos(self, v, k, visit):
        """Position of S_r(v)[k]."""
        while v.L < v.R:
            right = visit(self._child(v, 1))
            if k <= right.label[1]:
                v = right
                continue
            left = visit(self._child(v, 0))
            d = left.label[1] + right.label[1] - v.label[1]
            k = k - right.label[1] + d
            v = left
        return v.L

    def _find_b_pos(self, v, k, visit):
        """Position of S_l(v)[k]."""
        while v.L < v.R:
            left = visit(self._child(v, 0))
            if k <= left.label[0]:
                v = left
                continue
            right = visit(self._child(v, 1))
            d = left.label[0] + right.label[0] - v.label[0]
            k = k - left.label[0] + d
            v = right
        return v.L

    def node(self, L, R):
        """Decoded node covering [L, R] of the decomposition (walks from the root)."""
        v = self._root()
        while (v.L, v.R) != (L, R):
            mid = (v.L + v.R) // 2
            if R <= mid:
                v = self._child(v, 0)
            elif L > mid:
                v = self._child(v, 1)
            else:
                raise ValueError("[%d, %d] is not a decomposition node" % (L, R))
        return v

    def relocate(self, p_range, q_range, a, b):
        p = self.node(*p_range)
        q = self.node(*q_range)
        visit = lambda x: x
        return self._find_a(p, a, visit), self._find_b(q, b, visit)

    # -- serialization
    def to_bytes(self):
        return struct.pack("<QQ", self.n, self.r) + self.rep.to_bytes()

    @classmethod
    def from_bytes(cls, buf, offset=0):
        if len(buf) < offset + 16:
            raise DecodeError("truncated structure")
        n, r = struct.unpack_from("<QQ", buf, offset)
        rep, off = SpillRep.from_bytes(buf, offset + 16)
        if n < 1 or r != 8 * n:
            raise DecodeError("bad onebit parameters")
        if n > 1:
            _warm_deltas(n)
            lay1, _ = _root_layouts(n)
            if (rep.Mstar, rep.Kstar) != (lay1.Mstar, lay1.Kstar):
                raise DecodeError("representation size does not match n")
        return cls(n, rep, r), off

    def space_report(self):
        return {
            "n": self.n,
            "kind": "onebit",
            "total_bits": self.accounted_bits,
            "physical_bits": self.physical_bits,
            "benchmark_bits": self.benchmark_bits(),
            "redundancy_bits": self.accounted_bits - self.benchmark_bits(),
            "components": {"memory_bits": self.rep.Mstar, "spill_universe": self.rep.Kstar},
        }


def build_onebit(A):
    return OneBitRMQ.build(A)


def query_onebit(ds, a, b, counter=NULL):
    return ds.query(a, b, counter)


def relocate(ds, p_range, q_range, a, b):
    return ds.relocate(p_range, q_range, a, b)
