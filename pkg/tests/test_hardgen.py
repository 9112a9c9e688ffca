import itertools
import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from succinct_rmq import hardgen as hg
from succinct_rmq.bits import BitWriter, DecodeError, gamma_write
from succinct_rmq.cartesian import SparseTable, rmq_scan


def test_marginal_small_cases():
    assert hg.marginal_pmf(2, 1) == {(1,): Fraction(1, 2), (2,): Fraction(1, 2)}
    assert hg.marginal_pmf(3, 1) == {(1,): Fraction(2, 5), (2,): Fraction(1, 5), (3,): Fraction(2, 5)}
    for B in range(1, 9):
        pmf = hg.marginal_pmf(B, B)
        assert pmf == {tuple(range(1, B + 1)): 1}


def test_marginal_sums_to_one():
    for B in range(1, 11):
        for u in range(0, B + 1):
            assert sum(hg.marginal_pmf(B, u).values()) == 1


@pytest.mark.parametrize("method", ["sequential", "cycle"])
def test_sampler_full_set_and_determinism(method):
    rng = random.Random(0)
    assert hg.sample_set(6, 6, rng, method) == [1, 2, 3, 4, 5, 6]
    assert hg.sample_set(6, 0, rng, method) == []
    a = hg.sample_sets(40, 5, 50, random.Random(3), method)
    b = hg.sample_sets(40, 5, 50, random.Random(3), method)
    assert a == b
    for S in a:
        assert len(S) == 5 and S == sorted(set(S)) and 1 <= S[0] and S[-1] <= 40


@pytest.mark.parametrize("method", ["sequential", "cycle"])
def test_sampler_tv_small(method):
    assert hg.tv_distance(6, 2, 40000, random.Random(1), method) < 0.02


def test_sampler_rejects_bad_args():
    with pytest.raises(ValueError):
        hg.sample_set(3, 4, random.Random(0))
    with pytest.raises(ValueError):
        hg.sample_set(3, 1, random.Random(0), "nope")


def test_sets_independent_across_instances():
    rng = random.Random(2)
    d, B, u, Z = hg.derive_params(200, 2)
    xs, ys = [], []
    for _ in range(3000):
        inst = hg.sample_instance(d, B, u, Z, rng)
        xs.append(sum(inst.sets[0]))
        ys.append(sum(inst.sets[1]))
    rho = np.corrcoef(xs, ys)[0, 1]
    assert abs(rho) <= 3 / math.sqrt(len(xs))


def test_instance_z_collapses():
    inst = hg.sample_instance(2, 4, 4, 1, random.Random(0))
    assert inst.z == 1 and inst.z_bound() == 1


def test_instance_json_roundtrip():
    d, B, u, Z = hg.derive_params(64, 2)
    inst = hg.sample_instance(d, B, u, Z, random.Random(5))
    obj = json.loads(json.dumps(inst.to_json()))
    assert isinstance(obj["z"], str)
    back = hg.PredZInstance.from_json(obj)
    assert back == inst
    obj["sets"][0] = obj["sets"][0][::-1]
    with pytest.raises(ValueError):
        hg.PredZInstance.from_json(obj)


def test_derive_params():
    assert hg.derive_params(8, 1) == (2, 3, 1, 2)
    with pytest.raises(ValueError):
        hg.derive_params(7, 2)


def test_reduction_r1_n8_exhaustive():
    d, B, u, Z = hg.derive_params(8, 1)
    count = 0
    for S1, S2 in itertools.product(itertools.combinations(range(1, 4), 1), repeat=2):
        inst = hg.PredZInstance(d, B, u, Z, [list(S1), list(S2)])
        for z in range(1, inst.z_bound() + 1):
            inst.z = z
            lay = hg.reduce_to_array(inst, 8, 1)
            assert hg.check_layout(lay)
            for x in range(1, 4):
                assert 4 - rmq_scan(lay.A, 4 - x, 4) == hg.pred_direct(S1, x)
                assert hg.pred_via_rmq(lay, SparseTable(lay.A), 2, x) == hg.pred_direct(S2, x)
            assert hg.recover_z(lay, SparseTable(lay.A)) == z
            count += 1
    assert count == sum(hg.PredZInstance(d, B, u, Z, [list(a), list(b)]).z_bound()
                        for a, b in itertools.product([[1], [2], [3]], repeat=2))


def test_reduction_random_instances():
    rng = random.Random(6)
    for _ in range(150):
        r = rng.randint(1, 4)
        n = rng.randint(4 * r, 30 * r)
        d, B, u, Z = hg.derive_params(n, r)
        inst = hg.sample_instance(d, B, u, Z, rng)
        lay = hg.reduce_to_array(inst, n, r)
        assert len(lay.A) == n and d * (B + 1) <= n
        assert hg.check_layout(lay)
        oracle = SparseTable(lay.A)
        for i, S in enumerate(inst.sets, 1):
            for x in range(1, B + 1):
                assert hg.pred_via_rmq(lay, oracle, i, x) == hg.pred_direct(S, x)
        assert hg.recover_z(lay, oracle) == inst.z
        # order-preserving relabelling changes no answer
        shifted = SparseTable([7 * v - 3 for v in lay.A])
        assert hg.recover_z(lay, shifted) == inst.z


def test_reduction_minimal_z_and_mismatch():
    d, B, u, Z = hg.derive_params(40, 2)
    inst = hg.sample_instance(d, B, u, Z, random.Random(7))
    inst.z = 1
    lay = hg.reduce_to_array(inst, 40, 2)
    assert hg.recover_z(lay, SparseTable(lay.A)) == 1
    with pytest.raises(ValueError):
        hg.reduce_to_array(inst, 60, 2)
    with pytest.raises(ValueError):
        hg.pred_via_rmq(lay, SparseTable(lay.A), 1, 0)


def test_pred_edge_cases():
    d, B, u, Z = hg.derive_params(40, 1)
    inst = hg.sample_instance(d, B, u, Z, random.Random(8))
    lay = hg.reduce_to_array(inst, 40, 1)
    oracle = SparseTable(lay.A)
    for i, S in enumerate(inst.sets, 1):
        for x in range(1, S[0]):
            assert hg.pred_via_rmq(lay, oracle, i, x) == 0
        for s in S:
            assert hg.pred_via_rmq(lay, oracle, i, s) == s


def test_split_join_inverse():
    rng = random.Random(9)
    d, B, u, Z = hg.derive_params(80, 2)
    for _ in range(50):
        inst = hg.sample_instance(d, B, u, Z, rng)
        ks, zs = hg.split_z(inst)
        assert hg.join_z(inst, ks, zs) == inst.z


def test_recover_detects_bad_oracle():
    d, B, u, Z = hg.derive_params(40, 1)
    inst = hg.sample_instance(d, B, u, Z, random.Random(10))
    lay = hg.reduce_to_array(inst, 40, 1)
    with pytest.raises(hg.IntegrityError):
        hg.recover_z(lay, lambda a, b: b + 1)


def test_good_block_boundaries():
    m = 4
    assert hg.is_good_block(0, 8, m) and hg.is_good_block(0, 32, m)
    assert not hg.is_good_block(0, 7, m) and not hg.is_good_block(0, 33, m)
    assert not hg.is_good_block(10, 14, 3) and hg.is_good_block(10, 15, 3)
    assert hg.is_good_block(10, 28, 3) and not hg.is_good_block(10, 29, 3)


def _blk():
    # m=4, k=4: L=4, x=1, K=9; window j is (4j+2, 4j+6] at delta=1
    return hg.Block(1, 40, 4)


def test_indicator_examples():
    blk = _blk()
    assert hg.window_count(blk, 4) == 9
    assert hg.indicators(list(range(1, 60)), blk, 4, 1) == [1] * 9
    assert hg.indicators([15], blk, 4, 1) == [0, 0, 1, 0, 0, 0, 0, 0, 0]
    assert hg.indicators([14], blk, 4, 1) == [0, 1, 0, 0, 0, 0, 0, 0, 0]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 80), max_size=12, unique=True), st.integers(1, 4))
def test_indicators_match_pred_comparisons(S, delta):
    S = sorted(S)
    blk = _blk()
    E = hg.indicators(S, blk, 4, delta)
    for j, e in enumerate(E, 1):
        lo, hi = hg.window_bounds(blk, 4, delta, j)
        assert e == int(hg.pred_direct(S, lo) != hg.pred_direct(S, hi))


def test_ext_hand_trace():
    blk = _blk()
    S, sub = [11, 23, 27], [11, 27]
    assert [j for j, e in enumerate(hg.indicators(S, blk, 4, 1), 1) if e] == [2, 5, 6]
    bits = hg.ext_encode(1, S, blk, 4, sub)
    w = BitWriter()
    for x in (4, 2, 3):
        gamma_write(w, x)
    assert bits == w.bits()
    assert hg.ext_decode(bits, sub, 1, blk, 4) == hg.indicators(S, blk, 4, 1)


def test_ext_full_knowledge_is_count_only():
    from succinct_rmq.verify import random_ext_case
    rng = random.Random(11)
    for _ in range(300):
        S, blk, delta, _ = random_ext_case(rng)
        kne = sum(hg.indicators(S, blk, 16, delta))
        bits = hg.ext_encode(delta, S, blk, 16, S)
        w = BitWriter()
        gamma_write(w, kne + 1)
        assert bits == w.bits()


def test_ext_roundtrip_and_prefix_free():
    from succinct_rmq.verify import random_ext_case
    rng = random.Random(12)
    for _ in range(2000):
        S, blk, delta, sub = random_ext_case(rng)
        bits = hg.ext_encode(delta, S, blk, 16, sub)
        assert hg.ext_decode(bits, sub, delta, blk, 16) == hg.indicators(S, blk, 16, delta)
        with pytest.raises(DecodeError):
            hg.ext_decode(bits + [1], sub, delta, blk, 16)


def test_ext_rejects_foreign_subset():
    with pytest.raises(ValueError):
        hg.ext_encode(1, [11], _blk(), 4, [23])


def test_good_block_estimator():
    res = hg.est_good_block_prob(4096, 64, 8, 4000, random.Random(0))
    assert 0.05 <= res["ci_low"] <= res["estimate"] <= res["ci_high"]
    again = hg.est_good_block_prob(4096, 64, 8, 4000, random.Random(0))
    assert again == res
    other = hg.est_good_block_prob(4096, 64, 8, 4000, random.Random(1))
    assert other["ci_low"] <= res["ci_high"] and res["ci_low"] <= other["ci_high"]
    # u = B forces the spread to be exactly m
    assert hg.est_good_block_prob(40, 40, 5, 20, random.Random(0))["estimate"] == 0.0
    assert hg.est_good_block_prob(40, 40, 2, 20, random.Random(0))["estimate"] == 1.0


def test_entropy_estimator():
    one = hg.est_indicator_entropy(4096, 64, 1, 3000, random.Random(0))
    assert one["estimate"] <= 1.0
    a = hg.est_indicator_entropy(4096, 64, 16, 3000, random.Random(0))
    b = hg.est_indicator_entropy(4096, 64, 64, 3000, random.Random(0))
    assert a["mode"] == "chain" and b["estimate"] > a["estimate"] > 0.15 * 4
    assert hg.est_indicator_entropy(4096, 64, 16, 3000, random.Random(0)) == a


def test_small_intervals_estimator():
    res = hg.est_small_intervals(4096, 64, 1, 1, 3000, random.Random(0))
    assert res["estimate"] <= 1.0 and res["ci_low"] <= res["estimate"] <= res["ci_high"]
    a = hg.est_small_intervals(4096, 64, 16, 1, 3000, random.Random(0))
    b = hg.est_small_intervals(4096, 64, 16, 2, 3000, random.Random(0))
    assert 1.3 <= b["estimate"] / a["estimate"] <= 3.0


def test_gap_pairs_estimator():
    vals = [hg.est_gap_pairs(4096, 64, 16, t, 3000, random.Random(0))["estimate"] for t in (1, 2, 4, 8)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    res = hg.est_gap_pairs(4096, 64, 16, 32, 3000, random.Random(0))
    assert res["estimate"] == 0.0
    assert res["nonempty_mean"] > 0


def test_wilson_interval():
    lo, hi = hg.wilson(50, 100)
    assert lo < 0.5 < hi
    assert hg.wilson(0, 0) == (0.0, 1.0)
    assert hg.wilson(0, 10)[0] == 0.0
