"""Cartesian trees, reference RMQ oracles and the DFUDS encoding of the 2d-min-heap."""

import numpy as np

from . import _kernels_py
from . import kernels
from .bits import BitVec
from .catalan import TreeShape

__all__ = [
    "CartesianTree",
    "DfudsString",
    "build_cartesian",
    "rmq_scan",
    "SparseTable",
    "sparse_table_build",
    "sparse_table_query",
    "dfuds_encode",
    "dfuds_decode",
    "dfuds_of_array",
    "cartesian_equivalent",
    "canonical_array",
    "lca_naive",
    "check_range",
]


def _as_int64(A):
    try:
        return np.asarray(A, dtype=np.int64), kernels
    except OverflowError:
        return list(A), _kernels_py


class CartesianTree(TreeShape):
    """TreeShape whose root is the leftmost minimum of the source array."""

    @classmethod
    def from_shape(cls, shape):
        return cls(shape.n, shape.left, shape.right, shape.root)


def build_cartesian(A):
    n = len(A)
    if n < 1:
        raise ValueError("array must be non-empty")
    arr, backend = _as_int64(A)
    left, right, root = backend.cartesian_links(arr)
    return CartesianTree(n, left.tolist(), right.tolist(), int(root))


def check_range(n, a, b):
    if not (1 <= a <= b <= n):
        raise IndexError("query range [%d, %d] invalid for n=%d" % (a, b, n))


def rmq_scan(A, a, b):
    check_range(len(A), a, b)
    best = a
    for i in range(a + 1, b + 1):
        if A[i - 1] < A[best - 1]:
            best = i
    return best


class SparseTable:
    """O(n log n)-word table with O(1) leftmost-argmin queries."""

    def __init__(self, A):
        self.n = len(A)
        arr, backend = _as_int64(A)
        self.values = arr
        self.levels = backend.sparse_levels(arr)

    def query(self, a, b, counter=None):
        check_range(self.n, a, b)
        k = (b - a + 1).bit_length() - 1
        lvl = self.levels[k]
        x = int(lvl[a - 1])
        y = int(lvl[b - (1 << k)])
        if counter is not None:
            counter.touch(("sparse", k), a - 1)
            counter.touch(("sparse", k), b - (1 << k))
            counter.touch("values", x)
            counter.touch("values", y)
        return (x if self.values[x] <= self.values[y] else y) + 1

    def total_bits(self):
        return 64 * sum(len(l) for l in self.levels) + 64 * self.n


def sparse_table_build(A):
    return SparseTable(A)


def sparse_table_query(table, a, b):
    return table.query(a, b)


def canonical_array(t):
    """An array whose Cartesian tree is ``t``: each position holds its depth."""
    depth = [0] * (t.n + 1)
    stack = [(t.root, 0)] if t.root else []
    while stack:
        v, d = stack.pop()
        depth[v] = d
        for c in (t.left[v], t.right[v]):
            if c:
                stack.append((c, d + 1))
    return depth[1:]


def cartesian_equivalent(A1, A2):
    if len(A1) != len(A2):
        raise ValueError("arrays differ in length")
    return build_cartesian(A1) == build_cartesian(A2)


def lca_naive(t, a, b):
    par = t.parent_array()
    anc = set()
    v = a
    while v:
        anc.add(v)
        v = par[v]
    v = b
    while v not in anc:
        v = par[v]
    return v


class DfudsString:
    """DFUDS of the 2d-min-heap of an n-element array.

    The full parenthesis string has 2n+2 symbols; its first symbol is the
    artificial leading open and its last is always a close, so only the 2n
    symbols in between are stored (``core``).
    """

    __slots__ = ("n", "core")

    def __init__(self, n, core):
        if len(core) != 2 * n:
            raise ValueError("DFUDS core must hold exactly 2n bits")
        self.n = n
        self.core = core

    def full_bits(self):
        return [1] + self.core.to_list() + [0]

    def full(self):
        return BitVec.from_bits(self.full_bits())

    def __eq__(self, other):
        return isinstance(other, DfudsString) and self.n == other.n and self.core == other.core

    def __repr__(self):
        return "DfudsString(%s)" % BitVec.from_bits(self.full_bits()).to_string(parens=True)


def _heap_parents(A):
    arr, backend = _as_int64(A)
    return backend.prev_smaller_eq(arr)


def _dfuds_from_parents(par, n):
    deg = np.bincount(np.asarray(par[1:], dtype=np.int64), minlength=n + 1)
    out = np.zeros(2 * n + 2, np.uint8)
    pos = 1  # out[0] is the artificial open
    for v in range(n + 1):
        d = int(deg[v])
        out[pos:pos + d] = 1
        pos += d + 1
    return DfudsString(n, BitVec.from_bits(out[1:2 * n + 1]))


def dfuds_of_array(A):
    return _dfuds_from_parents(_heap_parents(A), len(A))


def dfuds_encode(t):
    return dfuds_of_array(canonical_array(t))


def dfuds_decode(s, n=None):
    """Rebuild the Cartesian tree; rejects malformed or unbalanced strings."""
    if isinstance(s, DfudsString):
        n, bits = s.n, s.full_bits()
    else:
        core = s.to_list() if isinstance(s, BitVec) else list(s)
        if len(core) % 2:
            raise ValueError("DFUDS core length must be even")
        n = len(core) // 2
        bits = [1] + core + [0]
    if n < 1:
        raise ValueError("empty DFUDS")
    par = [0] * (n + 1)
    stack = []
    pos = 1
    for v in range(n + 1):
        d = 0
        while pos < len(bits) and bits[pos] == 1:
            d += 1
            pos += 1
        if pos >= len(bits):
            raise ValueError("malformed DFUDS: missing close")
        pos += 1
        if v > 0:
            if not stack:
                raise ValueError("malformed DFUDS: node without parent")
            p, rem = stack[-1]
            par[v] = p
            if rem == 1:
                stack.pop()
            else:
                stack[-1] = (p, rem - 1)
        if d:
            stack.append((v, d))
    if stack or pos != len(bits):
        raise ValueError("malformed DFUDS: unbalanced")
    depth = [0] * (n + 1)
    for v in range(1, n + 1):
        depth[v] = depth[par[v]] + 1
    # earlier siblings must compare larger so that prev-smaller-or-equal is the parent
    A = [depth[v] * (n + 1) - v for v in range(1, n + 1)]
    return build_cartesian(A)
