"""Blocked DFUDS range-minimum structure with a space/probe trade-off.

The parenthesis string of the 2d-min-heap is cut into blocks of ``r_blk``
positions.  Each block carries a ``b_br``-ary tree of depth ``t`` whose
leaves are runs of ``leaf_cells`` machine words; every stored child entry
holds a close count and the minimum excess relative to the child start.
On top of the blocks sit cumulative close counts, block minima with a sparse
table, bucketed predecessor directories and the pioneer index used by
``findopen``.

Positions are 1-based over the full string, which includes the leading
open and trailing close of the virtual root.  Only the 2n middle bits are
stored; the two outer ones are implied.
"""

import math
import struct

import numpy as np

from .bits import BitVec, DecodeError, IntegrityError
from .cartesian import check_range, dfuds_of_array
from .kernels import cell_summaries, match_closes, sparse_levels
from .probes import NULL

MAGIC = b"SRMQ"
VERSION = 1
KIND = 2
WORD = 64


def _width(maxval):
    return max(1, int(maxval).bit_length())


class PackedArray:
    """Fixed-width unsigned entries laid out back to back in a bit stream."""

    def __init__(self, values, width=None, region="packed"):
        v = np.asarray(values, dtype=np.int64).ravel()
        if v.size and int(v.min()) < 0:
            raise ValueError("packed arrays hold non-negative values")
        if width is None:
            width = _width(int(v.max())) if v.size else 1
        if v.size and int(v.max()) >= (1 << width):
            raise ValueError("value does not fit the declared width")
        self.values = v
        self.width = width
        self.region = region

    def __len__(self):
        return len(self.values)

    @property
    def bits(self):
        return self.width * len(self.values)

    def get(self, i, counter=NULL):
        counter.touch_bits(self.region, i * self.width, self.width)
        return int(self.values[i])

    def get_range(self, i, j, counter=NULL):
        j = min(j, len(self.values))
        if j > i:
            counter.touch_bits(self.region, i * self.width, (j - i) * self.width)
        return self.values[i:j]

    def to_bytes(self):
        w, v = self.width, self.values.astype(np.uint64)
        if v.size:
            shifts = np.arange(w, dtype=np.uint64)
            flat = ((v[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).ravel()
            raw = np.packbits(flat, bitorder="little").tobytes()
        else:
            raw = b""
        raw += b"\0" * ((-len(raw)) % 8)
        return struct.pack("<IQ", w, len(v)) + raw

    @classmethod
    def from_bytes(cls, buf, offset=0, region="packed"):
        if len(buf) < offset + 12:
            raise DecodeError("truncated packed array header")
        w, count = struct.unpack_from("<IQ", buf, offset)
        offset += 12
        nbytes = (w * count + 7) // 8
        nbytes += (-nbytes) % 8
        if w > 63 or len(buf) < offset + nbytes:
            raise DecodeError("packed array section is malformed or truncated")
        raw = np.frombuffer(buf, dtype=np.uint8, count=nbytes, offset=offset)
        flat = np.unpackbits(raw, bitorder="little")[: w * count].astype(np.int64)
        if count:
            vals = flat.reshape(count, w) @ (np.int64(1) << np.arange(w, dtype=np.int64))
        else:
            vals = np.zeros(0, np.int64)
        return cls(vals, w, region), offset + nbytes


def resolve_params(n, t):
    """Block length, branching and leaf size for depth ``t``.

    Larger ``t`` means longer leaves and blocks: fewer stored summaries and
    more probes per query.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    lg = max(1.0, math.log2(max(n, 2)))
    b = max(2, 1 << math.ceil(math.log2(max(2.0, lg / t))))
    leaf_cells = 1 << (t - 1)
    r = WORD * leaf_cells * b ** t
    return r, b, leaf_cells


class BlockedParens:
    """rank/select of closes, +-1 range minimum and findopen on a balanced string."""

    def __init__(self, bits, depth=1, branch=2, leaf_cells=1, cell=WORD):
        bits = np.asarray(bits, dtype=np.uint8)
        if len(bits) == 0 or len(bits) % 2:
            raise ValueError("balanced string of positive even length expected")
        self.N = N = len(bits)
        self.t, self.b, self.s, self.cell = depth, branch, leaf_cells, cell
        self.ell = cell * leaf_cells
        self.r = r = self.ell * branch ** depth
        self.nb = nb = (N + r - 1) // r
        nleaves = (N + self.ell - 1) // self.ell
        pad = nleaves * self.ell - N
        # positions past the end read as opens, which never lowers a minimum
        self.pb = np.concatenate([bits, np.ones(pad, np.uint8)])
        self.steps = 2 * self.pb.astype(np.int64) - 1
        match = match_closes(bits)

        lc, ld, lm, _ = cell_summaries(self.pb, self.ell)
        lc, ld, lm = np.asarray(lc), np.asarray(ld), np.asarray(lm)
        self.levels = []
        for k in range(1, depth + 1):
            per = branch ** (depth - k)
            length = self.ell * per
            count = (N + length - 1) // length
            groups = (nleaves + per - 1) // per
            tot = groups * per
            c = np.zeros(tot, np.int64)
            d = np.zeros(tot, np.int64)
            m = np.full(tot, 1 << 40, np.int64)
            c[:nleaves], d[:nleaves], m[:nleaves] = lc, ld, lm
            c, d, m = c.reshape(groups, per), d.reshape(groups, per), m.reshape(groups, per)
            before = np.cumsum(d, axis=1) - d
            closes = c.sum(axis=1)[:count]
            mins = (before + m).min(axis=1)[:count]
            self.levels.append((
                length,
                PackedArray(closes, _width(length), "tree%d.closes" % k),
                PackedArray(mins + length, _width(2 * length), "tree%d.min" % k),
            ))

        # block level
        blk_closes = np.zeros(nb, np.int64)
        np.add.at(blk_closes, np.arange(N) // r, 1 - bits.astype(np.int64))
        ncum = np.cumsum(blk_closes)
        ex = np.cumsum(2 * bits.astype(np.int64) - 1)
        bmin = np.minimum.reduceat(ex, np.arange(0, N, r))
        self.Nc = PackedArray(ncum, _width(N), "N")
        self.Mb = PackedArray(bmin, _width(N), "M")
        lv = sparse_levels(bmin)
        self.sparse = [PackedArray(np.asarray(lv[j]), _width(max(nb - 1, 1)), "sparse%d" % j)
                       for j in range(1, len(lv))]
        self.G = r
        total = int(ncum[-1])
        self.closes = total
        starts = np.arange(0, total, self.G) + 1
        self.D = PackedArray(np.searchsorted(ncum, starts, "left"), _width(nb), "N.dir")

        cl = np.flatnonzero(bits == 0)
        far = cl[(cl // r) != (match[cl] // r)]
        tgt = match[far] // r
        keep = np.ones(len(far), bool)
        if len(far) > 1:
            keep[:-1] = tgt[:-1] != tgt[1:]
        ppos = far[keep] + 1
        self.pio_pos = PackedArray(ppos, _width(N), "pioneer.pos")
        self.pio_tgt = PackedArray(tgt[keep], _width(max(nb - 1, 1)), "pioneer.block")
        bounds = np.arange(nb + 1) * r
        self.Dp = PackedArray(np.searchsorted(ppos, bounds, "right"), _width(len(ppos)), "pioneer.dir")

    # -- accounting -------------------------------------------------------

    def components(self):
        comp = {}
        for k, (_, c, m) in enumerate(self.levels, 1):
            comp["tree%d" % k] = c.bits + m.bits
        comp["N"] = self.Nc.bits
        comp["N_dir"] = self.D.bits
        comp["M"] = self.Mb.bits
        comp["M_sparse"] = sum(p.bits for p in self.sparse)
        comp["pioneer_pos"] = self.pio_pos.bits
        comp["pioneer_block"] = self.pio_tgt.bits
        comp["pioneer_dir"] = self.Dp.bits
        return comp

    def arrays(self):
        out = []
        for _, c, m in self.levels:
            out += [c, m]
        out += [self.Nc, self.D, self.Mb] + self.sparse + [self.pio_pos, self.pio_tgt, self.Dp]
        return out

    @property
    def pioneers(self):
        return len(self.pio_pos)

    def node_payload_bits(self):
        return max(self.b * (c.width + m.width) for _, c, m in self.levels)

    # -- primitive reads --------------------------------------------------

    def _node(self, k, nu, counter):
        length, c, m = self.levels[k - 1]
        lo = nu * self.b
        return length, c.get_range(lo, lo + self.b, counter), m.get_range(lo, lo + self.b, counter) - length

    def _leaf(self, g, counter):
        start = g * self.ell
        for j in range(self.s):
            counter.touch_bits("dfuds", start + j * self.cell, self.cell)
        return start, self.steps[start:start + self.ell]

    def _nc(self, blk, counter):
        return self.Nc.get(blk - 1, counter) if blk > 0 else 0

    def _base(self, blk, counter):
        return blk * self.r - 2 * self._nc(blk, counter)

    # -- rank / select ----------------------------------------------------

    def rank_close(self, p, counter=NULL):
        """Number of closes among positions 1..p."""
        if p < 0 or p > self.N:
            raise ValueError("position out of range")
        if p == 0:
            return 0
        idx = p - 1
        blk = idx // self.r
        cnt = self._nc(blk, counter)
        nu = blk
        for k in range(1, self.t + 1):
            length, c, _ = self._node(k, nu, counter)
            g = idx // length
            cnt += int(c[: g - nu * self.b].sum())
            nu = g
        start, st = self._leaf(nu, counter)
        seg = st[: idx - start + 1]
        return cnt + int((seg < 0).sum())

    def select_close(self, k, counter=NULL):
        """Position of the k-th close, or None."""
        if k < 1 or k > self.closes:
            return None
        g = (k - 1) // self.G
        lo = self.D.get(g, counter)
        hi = self.D.get(g + 1, counter) if g + 1 < len(self.D) else self.nb - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.Nc.get(mid, counter) >= k:
                hi = mid
            else:
                lo = mid + 1
        blk = lo
        rem = k - self._nc(blk, counter)
        nu = blk
        for lev in range(1, self.t + 1):
            _, c, _ = self._node(lev, nu, counter)
            for j, z in enumerate(c):
                if z >= rem:
                    break
                rem -= int(z)
            nu = nu * self.b + j
        start, st = self._leaf(nu, counter)
        where = np.flatnonzero(st < 0)
        return start + int(where[rem - 1]) + 1

    # -- excess minimum ---------------------------------------------------

    def _rmin(self, k, nu, start, e, lo, hi, counter):
        """Leftmost (index, value) of the excess minimum over 0-based [lo, hi] in node (k, nu)."""
        if k > self.t:
            s0, st = self._leaf(nu, counter)
            ex = e + np.cumsum(st)
            a, z = max(lo, s0) - s0, min(hi, s0 + self.ell - 1) - s0
            off = a + int(np.argmin(ex[a:z + 1]))
            return s0 + off, int(ex[off])
        length, c, m = self._node(k, nu, counter)
        best = None
        full = None
        for j in range(len(c)):
            cs = start + j * length
            ce = cs + length - 1
            d = length - 2 * int(c[j])
            if ce < lo:
                e += d
                continue
            if cs > hi:
                break
            if lo <= cs and ce <= hi:
                v = e + int(m[j])
                if best is None or v < best[1]:
                    best = (None, v)
                    full = (nu * self.b + j, cs, e)
            else:
                res = self._rmin(k + 1, nu * self.b + j, cs, e, lo, hi, counter)
                if best is None or res[1] < best[1]:
                    best = res
            e += d
        if best[0] is None:
            g, cs, e0 = full
            return self._leftmost(k + 1, g, cs, e0, best[1], counter), best[1]
        return best

    def _leftmost(self, k, nu, start, e, target, counter):
        """First index in node (k, nu) whose excess equals the node minimum ``target``."""
        while k <= self.t:
            length, c, m = self._node(k, nu, counter)
            for j in range(len(c)):
                if e + int(m[j]) == target:
                    break
                e += length - 2 * int(c[j])
            nu, start, k = nu * self.b + j, start + j * length, k + 1
        s0, st = self._leaf(nu, counter)
        ex = e + np.cumsum(st)
        return s0 + int(np.flatnonzero(ex == target)[0])

    def _block_min(self, blk, lo, hi, counter):
        return self._rmin(1, blk, blk * self.r, self._base(blk, counter), lo, hi, counter)

    def _sparse_query(self, a, b, counter):
        if a == b:
            return a
        j = (b - a + 1).bit_length() - 1
        lv = self.sparse[j - 1]
        x, y = lv.get(a, counter), lv.get(b - (1 << j) + 1, counter)
        return x if self.Mb.get(x, counter) <= self.Mb.get(y, counter) else y

    def pm1rmq(self, x, y, counter=NULL):
        """Leftmost position of the minimum excess over positions x..y."""
        if not 1 <= x <= y <= self.N:
            raise ValueError("invalid range")
        lo, hi = x - 1, y - 1
        bx, by = lo // self.r, hi // self.r
        if bx == by:
            return self._block_min(bx, lo, hi, counter)[0] + 1
        cands = [self._block_min(bx, lo, bx * self.r + self.r - 1, counter)]
        mid = None
        if by - bx >= 2:
            mid = self._sparse_query(bx + 1, by - 1, counter)
            cands.append((None, self.Mb.get(mid, counter)))
        cands.append(self._block_min(by, by * self.r, hi, counter))
        best = cands[0]
        for cnd in cands[1:]:
            if cnd[1] < best[1]:
                best = cnd
        if best[0] is None:
            idx = self._leftmost(1, mid, mid * self.r, self._base(mid, counter), best[1], counter)
            return idx + 1
        return best[0] + 1

    # -- findopen ---------------------------------------------------------

    def _last_leq(self, k, nu, start, e, lo, hi, target, counter):
        """Largest 0-based index in [lo, hi] within node (k, nu) with excess <= target."""
        if k > self.t:
            s0, st = self._leaf(nu, counter)
            ex = e + np.cumsum(st)
            a, z = max(lo, s0) - s0, min(hi, s0 + self.ell - 1) - s0
            hit = np.flatnonzero(ex[a:z + 1] <= target)
            return s0 + a + int(hit[-1]) if len(hit) else None
        length, c, m = self._node(k, nu, counter)
        es = [e]
        for z in c[:-1]:
            es.append(es[-1] + length - 2 * int(z))
        for j in range(len(c) - 1, -1, -1):
            cs = start + j * length
            ce = cs + length - 1
            if ce < lo or cs > hi:
                continue
            if lo <= cs and ce <= hi:
                if es[j] + int(m[j]) <= target:
                    return self._last_leq(k + 1, nu * self.b + j, cs, es[j], cs, ce, target, counter)
            else:
                res = self._last_leq(k + 1, nu * self.b + j, cs, es[j], lo, hi, target, counter)
                if res is not None:
                    return res
        return None

    def _next_pioneer(self, w, counter):
        g = (w - 1) // self.r
        lo, hi = self.Dp.get(g, counter), self.Dp.get(g + 1, counter)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.pio_pos.get(mid, counter) >= w:
                hi = mid
            else:
                lo = mid + 1
        return self.pio_tgt.get(lo, counter)

    def findopen(self, w, counter=NULL):
        """Position of the open matching the close at position w."""
        if not 1 <= w <= self.N or self.pb[w - 1]:
            raise ValueError("position %r does not hold a close" % (w,))
        target = w - 2 * self.rank_close(w, counter)
        idx = w - 1
        blk = idx // self.r
        eb = self._base(blk, counter)
        if idx > blk * self.r:
            q = self._last_leq(1, blk, blk * self.r, eb, blk * self.r, idx - 1, target, counter)
            if q is not None:
                return q + 2
        if eb <= target:
            return blk * self.r + 1
        tb = self._next_pioneer(w, counter)
        s = tb * self.r
        q = self._last_leq(1, tb, s, self._base(tb, counter), s, s + self.r - 1, target, counter)
        return q + 2 if q is not None else s + 1


class TradeoffRMQ:
    """Range-minimum index over the DFUDS of the 2d-min-heap."""

    def __init__(self, n, t, dfuds, core, r_blk, b_br, leaf_cells, cell=WORD):
        self.n, self.t = n, t
        self.dfuds = dfuds
        self.core = core
        self.r_blk, self.b_br, self.leaf_cells, self.cell = r_blk, b_br, leaf_cells, cell

    @classmethod
    def build(cls, A, t=1, branch=None, leaf_cells=None, cell=WORD):
        A = np.asarray(A, dtype=np.int64)
        n = len(A)
        if n < 1:
            raise ValueError("empty array")
        r, b, s = resolve_params(n, t)
        b = branch or b
        s = leaf_cells or s
        d = dfuds_of_array(A)
        core = BlockedParens(d.full_bits(), t, b, s, cell)
        return cls(n, t, d, core, core.r, b, s, cell)

    def query(self, i, j, counter=NULL):
        check_range(self.n, i, j)
        if i == j:
            return i
        P = self.core
        x = P.select_close(i + 1, counter)
        y = P.select_close(j, counter)
        w = P.pm1rmq(x, y, counter)
        if P.rank_close(P.findopen(w, counter), counter) == i:
            return i
        return P.rank_close(w, counter)

    # accounting

    @property
    def dfuds_bits(self):
        return 2 * self.n

    def components(self):
        return self.core.components()

    @property
    def redundancy_bits(self):
        return sum(self.components().values())

    @property
    def total_bits(self):
        return self.dfuds_bits + self.redundancy_bits

    def space_report(self):
        from .catalan import catalan_number, log2_int
        return {
            "n": self.n,
            "kind": "tradeoff",
            "t": self.t,
            "r_blk": self.r_blk,
            "b_br": self.b_br,
            "leaf_cells": self.leaf_cells,
            "total_bits": self.total_bits,
            "dfuds_bits": self.dfuds_bits,
            "redundancy_bits": self.redundancy_bits,
            "benchmark_bits": log2_int(catalan_number(self.n)),
            "pioneers": self.core.pioneers,
            "blocks": self.core.nb,
            "node_payload_bits": self.core.node_payload_bits(),
            "components": self.components(),
        }

    # serialization

    def to_bytes(self):
        head = MAGIC + struct.pack("<IBQIQI", VERSION, KIND, self.n, self.t, self.r_blk, self.b_br)
        params = struct.pack("<II", self.leaf_cells, self.cell)
        body = [struct.pack("<Q", len(params)) + params, self.dfuds.core.to_bytes()]
        for arr in self.core.arrays():
            raw = arr.to_bytes()
            body.append(struct.pack("<Q", len(raw)) + raw)
        return head + b"".join(body)

    @classmethod
    def from_bytes(cls, buf):
        buf = bytes(buf)
        if buf[:4] != MAGIC:
            raise DecodeError("bad magic")
        version, kind, n, t, r_blk, b_br = struct.unpack_from("<IBQIQI", buf, 4)
        if version != VERSION or kind != KIND:
            raise DecodeError("unsupported structure version or kind")
        off = 4 + struct.calcsize("<IBQIQI")
        (plen,) = struct.unpack_from("<Q", buf, off)
        leaf_cells, cell = struct.unpack_from("<II", buf, off + 8)
        off += 8 + plen
        core_bits, off = BitVec.from_bytes(buf, off)
        if core_bits.length != 2 * n:
            raise DecodeError("dfuds length does not match n")
        from .cartesian import DfudsString, dfuds_decode
        d = DfudsString(n, core_bits)
        dfuds_decode(d, n)
        core = BlockedParens(d.full_bits(), t, b_br, leaf_cells, cell)
        if core.r != r_blk:
            raise IntegrityError("block length does not match parameters")
        for arr in core.arrays():
            (ln,) = struct.unpack_from("<Q", buf, off)
            stored, _ = PackedArray.from_bytes(buf, off + 8, arr.region)
            off += 8 + ln
            if stored.width != arr.width or not np.array_equal(stored.values, arr.values):
                raise IntegrityError("auxiliary section %s is inconsistent with the dfuds" % arr.region)
            arr.values = stored.values
        if off != len(buf):
            raise DecodeError("trailing bytes after structure")
        return cls(n, t, d, core, r_blk, b_br, leaf_cells, cell)

    def header_overhead_bits(self):
        """Bits of the file that are framing rather than payload."""
        return 8 * len(self.to_bytes()) - self.total_bits


def build_tradeoff(A, t=1, **kw):
    return TradeoffRMQ.build(A, t, **kw)


def query_tradeoff(ds, i, j, counter=NULL):
    return ds.query(i, j, counter)
