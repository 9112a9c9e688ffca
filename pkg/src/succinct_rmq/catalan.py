"""Exact Catalan combinatorics and the ranking bijections built on them."""

import itertools
import math
from functools import lru_cache

__all__ = [
    "TreeShape",
    "catalan_number",
    "mfold_convolution",
    "mfold_convolution_bruteforce",
    "capacity_M",
    "capacity_M_enumerate",
    "log2_bounds_M",
    "log2_int",
    "entropy_budget",
    "tree_unrank",
    "tree_rank",
    "interleave_unrank",
    "interleave_rank",
    "all_trees",
]

BRUTE_BUDGET = 24


@lru_cache(maxsize=4096)
def catalan_number(x):
    if x < 0:
        raise ValueError("catalan_number needs x >= 0")
    return math.comb(2 * x, x) // (x + 1)


def mfold_convolution(m, U):
    """Sum over compositions of U into m positive parts of prod C_{part-1}.

    Closed form ``m/(2U-m) * binom(2U-m, U)``.  ``m = 0`` is allowed as an
    extension (empty product), giving 1 for ``U = 0`` and 0 otherwise.
    """
    if m < 0 or U < 0:
        raise ValueError("negative argument")
    if m == 0:
        return 1 if U == 0 else 0
    if m > U:
        raise ValueError("mfold_convolution requires m <= U")
    top = 2 * U - m
    return m * math.comb(top, U) // top


def mfold_value(m, U):
    """Like mfold_convolution but returns 0 outside the support."""
    if m < 0 or U < 0 or m > U:
        return 0
    return mfold_convolution(m, U)


def mfold_convolution_bruteforce(m, U):
    if not 1 <= m <= U:
        raise ValueError("need 1 <= m <= U")
    if U > BRUTE_BUDGET:
        raise ValueError("U beyond enumeration budget (%d)" % BRUTE_BUDGET)
    total = 0
    # compositions of U into m parts <-> (m-1)-subsets of the U-1 cut points
    for cuts in itertools.combinations(range(1, U), m - 1):
        bounds = (0,) + cuts + (U,)
        prod = 1
        for lo, hi in zip(bounds, bounds[1:]):
            prod *= catalan_number(hi - lo - 1)
        total += prod
    return total


def capacity_M(B, u):
    """Total Catalan weight of all u-subsets of [B]."""
    if u < 0 or B < 0:
        raise ValueError("negative argument")
    if u > B:
        raise ValueError("capacity_M requires u <= B")
    return mfold_convolution(u + 1, B + 1)


def capacity_M_enumerate(B, u):
    """Direct sum over subsets of prod C_{gap}, with sentinels 0 and B+1."""
    total = 0
    for S in itertools.combinations(range(1, B + 1), u):
        pts = (0,) + S + (B + 1,)
        prod = 1
        for lo, hi in zip(pts, pts[1:]):
            prod *= catalan_number(hi - lo - 1)
        total += prod
    return total


def log2_int(x):
    """log2 of a positive integer, accurate to double precision at any size."""
    if x <= 0:
        raise ValueError("log2 of non-positive value")
    k = x.bit_length()
    if k <= 1000:
        return math.log2(x)
    top = x >> (k - 64)
    return math.log2(top) + (k - 64)


def log2_bounds_M(B, u, c_slack=2.0):
    """Explicit envelope (lo, hi) around log2 capacity_M(B, u).

    ``lo`` is ``-inf`` when ``u**3 > B**2`` where the lower envelope is not
    claimed.  The slack widens both sides by ``log2(c_slack)``.
    """
    if u > B or B < 1:
        raise ValueError("need 1 <= B and u <= B")
    slack = math.log2(c_slack)
    if u == 0:
        # Catalan asymptotic 4^B / (sqrt(pi) * B^{1/2} * (B+1))
        base = 2 * B - 0.5 * math.log2(B) - math.log2(B + 1) - 0.5 * math.log2(math.pi)
        return base - slack, base + slack
    lead = (math.log2(2 * u) - 0.5 * math.log2(math.pi / 2)
            - 1.5 * math.log2(2 * B - u) + (2 * B - u))
    hi = lead - (u * u / (4 * B)) / math.log(2) + slack
    if u ** 3 > B * B:
        return -math.inf, hi
    lo = lead - (u * u / (4 * B - 2 * u)) / math.log(2) - slack
    return lo, hi


def entropy_budget(d, u, B, Z):
    return d * log2_int(capacity_M(B, u)) + log2_int(Z)


class TreeShape:
    """Binary tree on nodes 1..n whose in-order is 1..n. 0 marks absence."""

    __slots__ = ("n", "left", "right", "root")

    def __init__(self, n, left, right, root):
        self.n = n
        self.left = list(left)
        self.right = list(right)
        self.root = root

    def parent_array(self):
        par = [0] * (self.n + 1)
        for v in range(1, self.n + 1):
            for c in (self.left[v], self.right[v]):
                if c:
                    par[c] = v
        return par

    def validate(self):
        n = self.n
        seen = []
        stack, v = [], self.root
        while stack or v:
            while v:
                stack.append(v)
                v = self.left[v]
            v = stack.pop()
            seen.append(v)
            v = self.right[v]
        if seen != list(range(1, n + 1)):
            raise ValueError("in-order traversal is not 1..n")

    def __eq__(self, other):
        return (isinstance(other, TreeShape) and self.n == other.n
                and self.root == other.root and self.left == other.left
                and self.right == other.right)

    def __hash__(self):
        return hash((self.n, self.root, tuple(self.left), tuple(self.right)))

    def __repr__(self):
        return "TreeShape(n=%d, root=%d)" % (self.n, self.root)


def _ballot(L, opens_left, height):
    """Dyck completions: L steps left, ``opens_left`` of them opens."""
    if opens_left < 0 or height < 0:
        return 0
    return math.comb(L, opens_left) - (math.comb(L, opens_left - 1) if opens_left else 0)


def _dyck_to_tree(word, n):
    # word: list of 1 (open) / 0 (close); T -> ( left ) right
    left = [0] * (n + 1)
    right = [0] * (n + 1)
    close_rank = {}
    match = {}
    stack = []
    k = 0
    for pos, c in enumerate(word):
        if c:
            stack.append(pos)
        else:
            k += 1
            o = stack.pop()
            match[o] = pos
            close_rank[o] = k
    for o, c in match.items():
        v = close_rank[o]
        if word[o + 1] == 1:
            left[v] = close_rank[o + 1]
        if c + 1 < len(word) and word[c + 1] == 1:
            right[v] = close_rank[c + 1]
    root = close_rank[0] if n else 0
    return TreeShape(n, left, right, root)


def _tree_to_dyck(t):
    out = []
    stack = [("node", t.root)] if t.root else []
    while stack:
        kind, v = stack.pop()
        if kind == "close":
            out.append(0)
            continue
        out.append(1)
        if t.right[v]:
            stack.append(("node", t.right[v]))
        stack.append(("close", v))
        if t.left[v]:
            stack.append(("node", t.left[v]))
    return out


def tree_unrank(n, z):
    """The z-th n-node tree (1-based) in lexicographic balanced-parenthesis order."""
    if n < 0:
        raise ValueError("n must be >= 0")
    total = catalan_number(n)
    if not 1 <= z <= total:
        raise ValueError("z out of range [1, C_n]")
    rank = z - 1
    word = []
    o = c = 0
    for _ in range(2 * n):
        if o < n:
            cnt = _ballot(2 * n - o - c - 1, n - o - 1, o + 1 - c)
            if rank < cnt:
                word.append(1)
                o += 1
                continue
            rank -= cnt
        word.append(0)
        c += 1
    return _dyck_to_tree(word, n)


def tree_rank(t):
    n = t.n
    word = _tree_to_dyck(t)
    rank = 0
    o = c = 0
    for bit in word:
        if bit:
            o += 1
        else:
            if o < n:
                rank += _ballot(2 * n - o - c - 1, n - o - 1, o + 1 - c)
            c += 1
    return rank + 1


def all_trees(n):
    return [tree_unrank(n, z) for z in range(1, catalan_number(n) + 1)]


def interleave_unrank(a, b, k):
    """k-th (1-based) string with a zeros and b ones, in lexicographic order."""
    total = math.comb(a + b, a)
    if not 1 <= k <= total:
        raise ValueError("k out of range")
    rank = k - 1
    out = []
    za, ob = a, b
    while za or ob:
        if za:
            cnt = math.comb(za - 1 + ob, ob)
            if rank < cnt:
                out.append(0)
                za -= 1
                continue
            rank -= cnt
        out.append(1)
        ob -= 1
    return out


def interleave_rank(bits):
    za = bits.count(0)
    ob = len(bits) - za
    rank = 0
    for bit in bits:
        if bit:
            if za:
                rank += math.comb(za - 1 + ob, ob)
            ob -= 1
        else:
            za -= 1
    return rank + 1
