"""Hard-instance machinery for predecessor-with-payload inputs.

Samples Catalan-weighted subsets of [B], embeds d of them plus a payload z
into an RMQ array, answers predecessor queries and recovers z through any
RMQ oracle, and estimates the distributional quantities of random blocks by
Monte Carlo.
"""

import bisect
import math
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .bits import BitReader, BitWriter, DecodeError, IntegrityError, gamma_read, gamma_write
from .cartesian import canonical_array
from .catalan import (TreeShape, capacity_M, catalan_number, interleave_rank,
                      interleave_unrank, tree_rank, tree_unrank)

SEQUENTIAL_MAX_B = 256
Z95 = 1.959963984540054


# -- parameters and instances -------------------------------------------------

def derive_params(n, r):
    """(d, B, u, Z) for an array of length n carrying r payload chunks."""
    if r < 1:
        raise ValueError("r must be positive")
    d = 2 * r
    B = n // d - 1
    if B < 1:
        raise ValueError("n too small for r: need n >= 4r")
    u = math.isqrt(B)
    return d, B, u, math.comb(2 * u, u) ** r


def gaps(B, S):
    """Gap lengths s_{j+1} - s_j - 1 with sentinels 0 and B+1."""
    pts = [0] + list(S) + [B + 1]
    return [pts[j + 1] - pts[j] - 1 for j in range(len(pts) - 1)]


def set_weight(B, S):
    w = 1
    for g in gaps(B, S):
        w *= catalan_number(g)
    return w


@dataclass
class PredZInstance:
    d: int
    B: int
    u: int
    Z: int
    sets: list
    z: int = 1

    def z_bound(self):
        bound = self.Z
        for S in self.sets:
            bound *= set_weight(self.B, S)
        return bound

    def validate(self):
        if len(self.sets) != self.d:
            raise ValueError("expected %d sets" % self.d)
        for S in self.sets:
            if len(S) != self.u or list(S) != sorted(set(S)) or (S and not 1 <= S[0] <= S[-1] <= self.B):
                raise ValueError("each set must be %d sorted distinct elements of [1, %d]" % (self.u, self.B))
        if not 1 <= self.z <= self.z_bound():
            raise ValueError("z outside its range")

    def to_json(self):
        return {"d": self.d, "B": self.B, "u": self.u, "Z": str(self.Z),
                "sets": [list(map(int, S)) for S in self.sets], "z": str(self.z)}

    @classmethod
    def from_json(cls, obj):
        inst = cls(int(obj["d"]), int(obj["B"]), int(obj["u"]), int(obj["Z"]),
                   [list(map(int, S)) for S in obj["sets"]], int(obj["z"]))
        inst.validate()
        return inst


# -- exact set sampling -------------------------------------------------------

def marginal_pmf(B, u):
    """Exact probability of every u-subset of [B], by enumeration."""
    from fractions import Fraction
    from itertools import combinations
    total = capacity_M(B, u)
    return {S: Fraction(set_weight(B, S), total) for S in combinations(range(1, B + 1), u)}


class _GapTables:
    """Cumulative first-element weights C_{y-1} * M(B-y, u-1) per (B, u) state."""

    def __init__(self):
        self._cache = {}

    def table(self, B, u):
        key = (B, u)
        tab = self._cache.get(key)
        if tab is None:
            tab, acc = [], 0
            for y in range(1, B - u + 2):
                acc += catalan_number(y - 1) * capacity_M(B - y, u - 1)
                tab.append(acc)
            self._cache[key] = tab
        return tab


_TABLES = _GapTables()


def _sample_sequential(B, u, rng):
    out, base = [], 0
    while u:
        tab = _TABLES.table(B, u)
        y = bisect.bisect_right(tab, rng.randrange(tab[-1])) + 1
        base += y
        out.append(base)
        B -= y
        u -= 1
    return out


def _sample_cycle(B, u, gen):
    # a forest of u+1 binary trees with B-u nodes in total, read as a +-1 word
    N, m = B - u, u + 1
    L = 2 * N + m
    seq = np.full(L, -1, np.int64)
    seq[gen.choice(L, N, replace=False)] = 1
    P = np.cumsum(seq)
    prev = np.minimum.accumulate(np.concatenate(([0], P[:-1])))
    hits = np.flatnonzero(P < prev)
    k = int(hits[len(hits) - m + int(gen.integers(m))]) + 1
    word = np.concatenate((seq[k:], seq[:k]))
    Q = np.cumsum(word)
    prevq = np.minimum.accumulate(np.concatenate(([0], Q[:-1])))
    ends = np.flatnonzero(Q < prevq)
    lengths = np.diff(np.concatenate(([-1], ends)))
    g = (lengths - 1) // 2
    return (np.cumsum(g + 1)[:u]).tolist()


def sample_set(B, u, rng, method="auto"):
    """A u-subset of [B] drawn with probability proportional to its gap weight."""
    if not 0 <= u <= B:
        raise ValueError("need 0 <= u <= B")
    if method == "auto":
        method = "sequential" if B <= SEQUENTIAL_MAX_B else "cycle"
    if method == "sequential":
        return _sample_sequential(B, u, rng)
    if method == "cycle":
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng.getrandbits(64))
        return _sample_cycle(B, u, gen)
    raise ValueError("unknown method %r" % (method,))


def sample_sets(B, u, count, rng, method="auto"):
    if method == "auto":
        method = "sequential" if B <= SEQUENTIAL_MAX_B else "cycle"
    if method == "cycle":
        gen = np.random.default_rng(rng.getrandbits(64))
        return [_sample_cycle(B, u, gen) for _ in range(count)]
    return [_sample_sequential(B, u, rng) for _ in range(count)]


def sample_instance(d, B, u, Z, rng, method="auto"):
    sets = [sample_set(B, u, rng, method) for _ in range(d)]
    inst = PredZInstance(d, B, u, Z, sets)
    inst.z = rng.randrange(inst.z_bound()) + 1
    return inst


def tv_distance(B, u, samples, rng, method="auto"):
    """Total variation between sampled sets and the exact marginal."""
    pmf = marginal_pmf(B, u)
    counts = Counter(tuple(S) for S in sample_sets(B, u, samples, rng, method))
    return 0.5 * sum(abs(counts.get(S, 0) / samples - float(p)) for S, p in pmf.items())


# -- reduction to RMQ ---------------------------------------------------------

@dataclass
class ReductionLayout:
    n: int
    r: int
    d: int
    B: int
    u: int
    Z: int
    A: list
    instance: PredZInstance = field(repr=False)

    def pivot(self, i):
        """Shared pivot position of set i (odd sets sit left of it, even ones right)."""
        return (i if i % 2 else i - 1) * (self.B + 1)


def split_z(inst):
    """z as (k_1..k_r, gap payloads per set), least significant digit first."""
    rem = inst.z - 1
    base = math.comb(2 * inst.u, inst.u)
    ks = []
    for _ in range(inst.d // 2):
        rem, dgt = divmod(rem, base)
        ks.append(dgt + 1)
    zs = []
    for S in inst.sets:
        row = []
        for g in gaps(inst.B, S):
            rem, dgt = divmod(rem, catalan_number(g))
            row.append(dgt + 1)
        zs.append(row)
    if rem:
        raise ValueError("z exceeds its range")
    return ks, zs


def join_z(inst, ks, zs):
    z = 0
    mult = 1
    base = math.comb(2 * inst.u, inst.u)
    for k in ks:
        z += (k - 1) * mult
        mult *= base
    for S, row in zip(inst.sets, zs):
        for g, dgt in zip(gaps(inst.B, S), row):
            z += (dgt - 1) * mult
            mult *= catalan_number(g)
    return z + 1


def _gap_positions(B, S, p, left):
    """Array positions of every gap of S around pivot p, each left to right."""
    pts = [0] + list(S) + [B + 1]
    out = []
    for j in range(len(pts) - 1):
        if left:
            out.append(list(range(p - pts[j + 1] + 1, p - pts[j])))
        else:
            out.append(list(range(p + pts[j] + 1, p + pts[j + 1])))
    return out


def reduce_to_array(inst, n, r):
    d, B, u, Z = derive_params(n, r)
    if (inst.d, inst.B, inst.u, inst.Z) != (d, B, u, Z):
        raise ValueError("instance parameters do not match (n, r)")
    inst.validate()
    ks, zs = split_z(inst)
    A = [None] * (n + 1)
    top = 2 * u + 1
    base = top + 1
    for i in range(1, d, 2):
        p = i * (B + 1)
        Sl, Sr = inst.sets[i - 1], inst.sets[i]
        A[p] = top
        a = b = 0
        v = 2 * u
        for bit in interleave_unrank(u, u, ks[(i - 1) // 2]):
            if bit:
                A[p + Sr[b]] = v
                b += 1
            else:
                A[p - Sl[a]] = v
                a += 1
            v -= 1
        for S, row, left in ((Sl, zs[i - 1], True), (Sr, zs[i], False)):
            for pos, dgt in zip(_gap_positions(B, S, p, left), row):
                vals = canonical_array(tree_unrank(len(pos), dgt))
                for q, val in zip(pos, vals):
                    A[q] = base + val
    filler = base + B + 1
    for q in range(1, n + 1):
        if A[q] is None:
            A[q] = filler + q
    return ReductionLayout(n, r, d, B, u, Z, A[1:], inst)


def check_layout(layout):
    """Independent check of the order constraints the reduction promises."""
    from .cartesian import build_cartesian
    inst, B, u = layout.instance, layout.B, layout.u
    A = [None] + list(layout.A)
    ks, zs = split_z(inst)
    for i in range(1, layout.d, 2):
        p = i * (B + 1)
        Sl, Sr = inst.sets[i - 1], inst.sets[i]
        chain_l = [p - s for s in Sl]
        chain_r = [p + s for s in Sr]
        for chain in (chain_l, chain_r):
            seq = [A[p]] + [A[q] for q in chain]
            if any(x <= y for x, y in zip(seq, seq[1:])):
                return False
        marked = set(chain_l) | set(chain_r) | {p}
        hi = max(A[q] for q in marked)
        for q in range((i - 1) * (B + 1) + 1, (i + 1) * (B + 1)):
            if q not in marked and A[q] <= hi:
                return False
        merged = sorted(chain_l + chain_r, key=lambda q: -A[q])
        bits = [1 if q > p else 0 for q in merged]
        if interleave_rank(bits) != ks[(i - 1) // 2]:
            return False
        for S, row, left in ((Sl, zs[i - 1], True), (Sr, zs[i], False)):
            for pos, dgt in zip(_gap_positions(B, S, p, left), row):
                sub = [A[q] for q in pos]
                rank = tree_rank(build_cartesian(sub)) if sub else 1
                if rank != dgt:
                    return False
    return True


def _ask(rmq, a, b):
    return rmq.query(a, b) if hasattr(rmq, "query") else rmq(a, b)


def pred_via_rmq(layout, rmq, i, x):
    """Predecessor of x in set i, answered by one range-minimum query."""
    if not 1 <= i <= layout.d or not 1 <= x <= layout.B:
        raise ValueError("query out of range")
    p = layout.pivot(i)
    if i % 2:
        return p - _ask(rmq, p - x, p)
    return _ask(rmq, p, p + x) - p


def pred_direct(S, x):
    k = bisect.bisect_right(S, x)
    return S[k - 1] if k else 0


def _tree_by_queries(rmq, lo, hi):
    size = hi - lo + 1
    left = [0] * (size + 1)
    right = [0] * (size + 1)

    def rec(a, b):
        if a > b:
            return 0
        m = _ask(rmq, a, b)
        if not a <= m <= b:
            raise IntegrityError("answer outside the query window")
        left[m - lo + 1] = rec(a, m - 1)
        right[m - lo + 1] = rec(m + 1, b)
        return m - lo + 1

    if size == 0:
        return TreeShape(0, [0], [0], 0)
    stack_limit = 10000
    if size > stack_limit:
        raise ValueError("gap too long for recursive recovery")
    root = rec(lo, hi)
    return TreeShape(size, left, right, root)


def recover_sets(layout, rmq):
    sets = []
    for i in range(1, layout.d + 1):
        S = sorted({pred_via_rmq(layout, rmq, i, x) for x in range(1, layout.B + 1)} - {0})
        if len(S) != layout.u:
            raise IntegrityError("set %d has %d elements, expected %d" % (i, len(S), layout.u))
        sets.append(S)
    return sets


def recover_z(layout, rmq):
    """Reassemble z from answers of the RMQ oracle alone."""
    B, u = layout.B, layout.u
    sets = recover_sets(layout, rmq)
    shell = PredZInstance(layout.d, B, u, layout.Z, sets)
    ks = []
    for i in range(1, layout.d, 2):
        p = i * (B + 1)
        Sl, Sr = sets[i - 1], sets[i]
        bits, a, b = [], 0, 0
        while a < u and b < u:
            m = _ask(rmq, p - Sl[a], p + Sr[b])
            if m == p - Sl[a]:
                bits.append(1)
                b += 1
            elif m == p + Sr[b]:
                bits.append(0)
                a += 1
            else:
                raise IntegrityError("comparison query returned a non-chain position")
        bits += [0] * (u - a) + [1] * (u - b)
        ks.append(interleave_rank(bits))
    zs = []
    for i, S in enumerate(sets, 1):
        p = layout.pivot(i)
        row = []
        for pos in _gap_positions(B, S, p, bool(i % 2)):
            t = _tree_by_queries(rmq, pos[0], pos[-1]) if pos else TreeShape(0, [0], [0], 0)
            row.append(tree_rank(t))
        zs.append(row)
    return join_z(shell, ks, zs)


# -- blocks, indicators and ext -----------------------------------------------

@dataclass(frozen=True)
class Block:
    x: int
    y: int
    m: int


def is_good_block(x, y, m):
    return m * m <= 2 * (y - x) and (y - x) <= 2 * m * m


def block_of(S, B, c, m):
    """The block from the c-th to the (c+m)-th point (0 and B+1 as sentinels)."""
    pts = [0] + list(S) + [B + 1]
    return Block(pts[c], pts[c + m], m)


def window_len(m, k):
    return max(1, (m * m) // k)


def window_count(block, k):
    return (block.y - block.x) // window_len(block.m, k)


def window_bounds(block, k, delta, j):
    L = window_len(block.m, k)
    lo = block.x + j * L + delta
    return lo, lo + L


def indicators(S, block, k, delta):
    """E_j = 1 iff S has a point in (x + jL + delta, x + (j+1)L + delta], j = 1..K."""
    S = sorted(S)
    out = []
    for j in range(1, window_count(block, k) + 1):
        lo, hi = window_bounds(block, k, delta, j)
        a = bisect.bisect_right(S, lo)
        out.append(1 if a < len(S) and S[a] <= hi else 0)
    return out


def _hit_windows(points, block, k, delta):
    L = window_len(block.m, k)
    K = window_count(block, k)
    out = set()
    for s in points:
        j = -((block.x + delta - s) // L) - 1
        if 1 <= j <= K:
            out.add(j)
    return out


def ext_encode(delta, S, block, k, sub):
    """Prefix-free description of the non-empty windows given the subset ``sub``."""
    nonempty = [j for j, e in enumerate(indicators(S, block, k, delta), 1) if e]
    known = _hit_windows(sub, block, k, delta)
    if not known <= set(nonempty):
        raise ValueError("subset contains points outside S")
    w = BitWriter()
    gamma_write(w, len(nonempty) + 1)
    prev_i = 0
    for i, I in enumerate(nonempty, 1):
        if I in known:
            continue
        gamma_write(w, i - prev_i)
        gamma_write(w, I - (nonempty[i - 2] if i > 1 else 0))
        prev_i = i
    return w.bits()


def ext_decode(bits, sub, delta, block, k):
    rd = BitReader(bits)
    kne = gamma_read(rd) - 1
    known = sorted(_hit_windows(sub, block, k, delta))
    if len(known) > kne:
        raise DecodeError("fewer non-empty windows than known ones")
    unknown = {}
    i = 0
    for _ in range(kne - len(known)):
        i += gamma_read(rd)
        unknown[i] = gamma_read(rd)
    if not rd.at_end():
        raise DecodeError("trailing bits in ext string")
    if unknown and max(unknown) > kne:
        raise DecodeError("window index beyond the declared count")
    windows, it, prev = [], iter(known), 0
    for i in range(1, kne + 1):
        prev = prev + unknown[i] if i in unknown else next(it)
        windows.append(prev)
    K = window_count(block, k)
    if any(a >= b for a, b in zip(windows, windows[1:])) or (windows and not 1 <= windows[0] <= windows[-1] <= K):
        raise DecodeError("decoded windows are inconsistent")
    E = [0] * K
    for j in windows:
        E[j - 1] = 1
    return E


# -- estimators -----------------------------------------------------------------

def wilson(successes, trials, z=Z95):
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    den = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def _mean_ci(values):
    n = len(values)
    if n == 0:
        return 0.0, 0.0, 0.0
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    half = Z95 * float(arr.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return mean, mean - half, mean + half


def _blocks(B, u, m, trials, rng, c=None):
    """Yields (S, block) for each sampled set whose block is good."""
    c = u // 2 if c is None else c
    if not (0 <= c and c + m <= u + 1):
        raise ValueError("block indices out of range")
    for S in sample_sets(B, u, trials, rng):
        blk = block_of(S, B, c, m)
        if is_good_block(blk.x, blk.y, m):
            yield S, blk


def est_good_block_prob(B, u, m, trials, rng, c=None):
    c = u // 2 if c is None else c
    good = 0
    for S in sample_sets(B, u, trials, rng):
        blk = block_of(S, B, c, m)
        good += is_good_block(blk.x, blk.y, m)
    lo, hi = wilson(good, trials)
    return {"estimate": good / trials, "ci_low": lo, "ci_high": hi, "trials": trials, "good": good}


def _entropy(counts, total, miller_madow=True):
    h = 0.0
    for v in counts.values():
        q = v / total
        h -= q * math.log2(q)
    if miller_madow:
        h += (len(counts) - 1) / (2 * total * math.log(2))
    return h


def est_indicator_entropy(B, u, k, trials, rng, m=8, c=None, history=12, plugin_max_K=24):
    """Entropy of the window indicators of a good block, in bits.

    Conditioned on the offset and on the number of windows, both of which a
    reader of the block already knows.
    """
    samples = []
    L = window_len(m, k)
    for S, blk in _blocks(B, u, m, trials, rng, c):
        delta = rng.randrange(L) + 1
        samples.append((delta, tuple(indicators(S, blk, k, delta))))
    N = len(samples)
    if N == 0:
        return {"estimate": 0.0, "plugin": 0.0, "mode": "none", "samples": 0, "K_max": 0}
    Kmax = max(len(e) for _, e in samples)
    if Kmax <= plugin_max_K:
        joint = Counter(samples)
        given = Counter((dl, len(e)) for dl, e in samples)
        est = _entropy(joint, N) - _entropy(given, N)
        plug = _entropy(joint, N, False) - _entropy(given, N, False)
        mode = "plugin"
    else:
        est = plug = 0.0
        padded = [(dl, len(e), e + (2,) * (Kmax - len(e))) for dl, e in samples]
        for j in range(Kmax):
            ctx = Counter((dl, K, e[max(0, j - history):j]) for dl, K, e in padded if K > j)
            full = Counter((dl, K, e[max(0, j - history):j + 1]) for dl, K, e in padded if K > j)
            n_j = sum(ctx.values())
            # windows past the end are determined by K and carry no entropy
            w = n_j / N
            est += w * (_entropy(full, n_j) - _entropy(ctx, n_j))
            plug += w * (_entropy(full, n_j, False) - _entropy(ctx, n_j, False))
        mode = "chain"
    return {"estimate": est, "plugin": plug, "mode": mode, "samples": N, "K_max": Kmax}


def _window_counts(S, blk, k, delta):
    L = window_len(blk.m, k)
    S = sorted(S)
    out = []
    for j in range(1, window_count(blk, k) + 1):
        lo = blk.x + j * L + delta
        out.append(bisect.bisect_right(S, lo + L) - bisect.bisect_right(S, lo))
    return out


def est_small_intervals(B, u, k, l, trials, rng, m=8, c=None):
    """Mean number of windows holding between ceil(l/2) and l points."""
    L = window_len(m, k)
    lo_c = (l + 1) // 2
    vals = []
    for S, blk in _blocks(B, u, m, trials, rng, c):
        delta = rng.randrange(L) + 1
        vals.append(sum(1 for v in _window_counts(S, blk, k, delta) if lo_c <= v <= l))
    mean, lo, hi = _mean_ci(vals)
    return {"estimate": mean, "ci_low": lo, "ci_high": hi, "samples": len(vals)}


def est_gap_pairs(B, u, k, t_gap, trials, rng, m=8, c=None):
    """Mean count of consecutive non-empty windows separated by t_gap-1 .. 2t_gap-1 empty ones."""
    L = window_len(m, k)
    pairs, nonempty = [], []
    for S, blk in _blocks(B, u, m, trials, rng, c):
        delta = rng.randrange(L) + 1
        I = [j for j, e in enumerate(indicators(S, blk, k, delta), 1) if e]
        nonempty.append(len(I))
        pairs.append(sum(1 for a, b in zip(I, I[1:]) if t_gap - 1 <= b - a - 1 < 2 * t_gap))
    mean, lo, hi = _mean_ci(pairs)
    ne, ne_lo, ne_hi = _mean_ci(nonempty)
    return {"estimate": mean, "ci_low": lo, "ci_high": hi, "nonempty_mean": ne,
            "nonempty_ci_low": ne_lo, "nonempty_ci_high": ne_hi, "samples": len(pairs)}
