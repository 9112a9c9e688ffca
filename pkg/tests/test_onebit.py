import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from succinct_rmq.bits import DecodeError
from succinct_rmq.cartesian import SparseTable, canonical_array, rmq_scan
from succinct_rmq.catalan import catalan_number, log2_int, tree_unrank
from succinct_rmq.onebit import (
    OneBitRMQ, build_onebit, count_N, count_N_recursive, greedy_sequences, label_of,
    merge_count, mergeable_labels, query_onebit, relocate,
)
from succinct_rmq.probes import ProbeCounter


def _label_census(n):
    counts = {}
    for perm in itertools.permutations(range(n)):
        lab = label_of(list(perm))
        counts[lab] = counts.get(lab, 0) + 1
    return counts


def test_count_examples():
    assert count_N(1, 1, 1) == 1
    assert sum(count_N(3, l, r) for l in range(1, 5) for r in range(1, 5)) == 5
    assert sum(count_N(8, l, r) for l in range(1, 10) for r in range(1, 10)) == 1430


def test_count_matches_tree_enumeration():
    for n in range(1, 7):
        census = {}
        for z in range(1, catalan_number(n) + 1):
            lab = label_of(canonical_array(tree_unrank(n, z)))
            census[lab] = census.get(lab, 0) + 1
        for (l, r), c in census.items():
            assert count_N(n, l, r) == c
        assert sum(census.values()) == catalan_number(n)


def test_count_closed_form_matches_recursion():
    for s in range(1, 40):
        for l in range(1, s + 1):
            for r in range(1, s + 2 - l):
                assert count_N(s, l, r) == count_N_recursive(s, l, r)


def test_merge_count_examples():
    assert merge_count((1, 2), (1, 1), (1, 1)) == 1
    assert merge_count((2, 1), (1, 1), (1, 1)) == 1
    with pytest.raises(ValueError):
        merge_count((2, 2), (1, 1), (1, 1))


def test_merge_count_symmetry():
    for a in range(1, 7):
        for b in range(1, 7):
            for p1 in [(l, r) for l in range(1, a + 1) for r in range(1, a + 2 - l)]:
                for p2 in [(l, r) for l in range(1, b + 1) for r in range(1, b + 2 - l)]:
                    for phi in mergeable_labels(p1, p2):
                        mirror = merge_count(phi[::-1], p2[::-1], p1[::-1])
                        assert merge_count(phi, p1, p2) == mirror


def test_greedy_sequences_listing():
    A = [3, 1, 4, 1, 5, 2]
    Sl, Sr = greedy_sequences(A, 1, 6)
    assert Sl == [1, 2]
    assert Sr == [6, 4, 2]
    assert label_of(A) == (2, 3)
    assert label_of([7]) == (1, 1)


def _relocate_oracle(A, p, q, a, b):
    _, Sr = greedy_sequences(A, *p)
    Sl, _ = greedy_sequences(A, *q)
    ap = max(i for i, x in enumerate(Sr, 1) if x >= a)
    bp = max(i for i, x in enumerate(Sl, 1) if x <= b)
    return ap, bp


def _split_nodes(n):
    out = []
    stack = [(1, n)]
    while stack:
        L, R = stack.pop()
        if L < R:
            mid = (L + R) // 2
            out.append(((L, mid), (mid + 1, R)))
            stack += [(L, mid), (mid + 1, R)]
    return out


def test_relocate_boundaries():
    rng = random.Random(3)
    A = [rng.randint(0, 50) for _ in range(40)]
    ds = build_onebit(A)
    for p, q in _split_nodes(40):
        _, Sr = greedy_sequences(A, *p)
        assert relocate(ds, p, q, p[0], q[0]) == (len(Sr), 1)


def test_relocate_matches_oracle():
    rng = random.Random(4)
    checked = 0
    while checked < 10 ** 4:
        n = rng.randint(2, 512)
        A = [rng.randint(0, rng.choice([3, n, 10 ** 6])) for _ in range(n)]
        ds = build_onebit(A)
        nodes = _split_nodes(n)
        for _ in range(200):
            p, q = rng.choice(nodes)
            a = rng.randint(*p)
            b = rng.randint(*q)
            assert relocate(ds, p, q, a, b) == _relocate_oracle(A, p, q, a, b)
            checked += 1


def test_space_small_cases():
    assert build_onebit([5]).accounted_bits == 0
    ds = build_onebit([4, 2, 3, 1])
    assert ds.accounted_bits <= math.log2(14) + 1


@pytest.mark.parametrize("n", [2, 3, 5, 17, 100, 256])
def test_space_law(n):
    rng = random.Random(n)
    ds = build_onebit([rng.random() for _ in range(n)])
    lc = log2_int(catalan_number(n))
    assert ds.accounted_bits <= lc + 1
    assert ds.physical_bits <= math.ceil(lc) + 2


def test_all_classes_small_n():
    for n in range(1, 7):
        for z in range(1, catalan_number(n) + 1):
            A = canonical_array(tree_unrank(n, z))
            ds = build_onebit(A)
            for a in range(1, n + 1):
                for b in range(a, n + 1):
                    assert query_onebit(ds, a, b) == rmq_scan(A, a, b)


def test_exhaustive_windows_up_to_128():
    rng = random.Random(5)
    for n in list(range(1, 40)) + [63, 64, 65, 100, 127, 128]:
        A = [rng.randint(0, rng.choice([2, 1000])) for _ in range(n)]
        ds = build_onebit(A)
        for a in range(1, n + 1):
            for b in range(a, n + 1):
                assert ds.query(a, b) == rmq_scan(A, a, b)


def test_singletons_and_ties():
    rng = random.Random(6)
    A = [rng.randint(0, 3) for _ in range(64)]
    ds = build_onebit(A)
    assert all(ds.query(a, a) == a for a in range(1, 65))
    ds = build_onebit([2] * 30)
    assert ds.query(5, 30) == 5
    with pytest.raises(IndexError):
        ds.query(3, 2)


def test_random_windows_vs_sparse_table():
    rng = random.Random(7)
    n = 1024
    A = [rng.randint(0, 10 ** 9) for _ in range(n)]
    ds, st_ = build_onebit(A), SparseTable(A)
    for _ in range(20000):
        a = rng.randint(1, n)
        b = rng.randint(a, n)
        assert ds.query(a, b) == st_.query(a, b)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=1, max_size=60))
def test_value_invariance_of_structure(A):
    B = [10 * x + 7 for x in A]
    assert build_onebit(A).to_bytes() == build_onebit(B).to_bytes()


def test_serialization_roundtrip_and_determinism():
    rng = random.Random(8)
    A = [rng.randint(0, 99) for _ in range(300)]
    buf = build_onebit(A).to_bytes()
    assert buf == build_onebit(list(A)).to_bytes()
    ds, off = OneBitRMQ.from_bytes(buf)
    assert off == len(buf)
    for _ in range(500):
        a = rng.randint(1, 300)
        b = rng.randint(a, 300)
        assert ds.query(a, b) == rmq_scan(A, a, b)
    with pytest.raises(DecodeError):
        OneBitRMQ.from_bytes(buf[:20])


def test_probe_counts_logarithmic():
    rng = random.Random(9)
    n = 2048
    ds = build_onebit([rng.random() for _ in range(n)])
    worst = 0
    for _ in range(300):
        a = rng.randint(1, n)
        b = rng.randint(a, n)
        c = ProbeCounter()
        ds.query(a, b, c)
        worst = max(worst, c.distinct)
    assert 0 < worst <= 20 * math.log2(n)
