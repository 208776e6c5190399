import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from hiddenmult.errors import NotInSubgroup, PoolTooLarge, ThresholdOutOfRange
from hiddenmult.numtheory import GroupElement
from hiddenmult.scheme import encode_message
from hiddenmult.threshold import (
    build_set_system,
    derive_key,
    level_size,
    threshold_decrypt,
    threshold_encrypt,
    threshold_setup,
)


def test_set_system_s2():
    system = build_set_system(2)
    assert system.subset(1, 2) == {1, 3} and system.subset(2, 2) == {1, 2}
    assert system.union([1, 2], 2) == {1, 2, 3}


def test_set_system_s3_level2():
    system = build_set_system(3)
    assert level_size(3, 2) == 4
    assert [system.subset(j, 2) for j in (1, 2, 3)] == [{1, 3, 4}, {1, 2, 4}, {1, 2, 3}]
    for j in (1, 2, 3):
        assert len(frozenset(range(1, 5)) - system.subset(j, 2)) == 1


@pytest.mark.parametrize("s", range(1, 8))
def test_cover_and_deficiency(s):
    system = build_set_system(s)
    assert all(system.subset(j, 1) == {1} for j in range(1, s + 1))
    assert len(system.union(range(1, s + 1), s)) == 2**s - 1
    for k in range(1, s + 1):
        full = frozenset(range(1, level_size(s, k) + 1))
        for group in itertools.combinations(range(1, s + 1), k):
            assert system.union(group, k) == full
        for group in itertools.combinations(range(1, s + 1), k - 1):
            assert system.union(group, k) < full
        if k > 1:
            assert all(system.subset(j, k - 1) <= system.subset(j, k) for j in range(1, s + 1))


def test_set_system_size_limit():
    with pytest.raises(PoolTooLarge):
        build_set_system(17)
    with pytest.raises(PoolTooLarge):
        threshold_setup(13)


def test_s2_orders_and_keys():
    dealer, keys = threshold_setup(2, 0, random.Random(0), d=2)
    assert dealer.orders == [3, 5, 7]
    for j, key in keys.items():
        covered = dealer.set_system.subset(j, 2)
        assert key.key % 2 == 1
        for i, t in enumerate(dealer.orders, 1):
            assert (key.key % t == 0) == (i in covered)


@given(st.lists(st.sampled_from([3, 5, 7, 11, 13, 17, 19, 23]), min_size=2, max_size=6, unique=True), st.data())
@settings(max_examples=60)
def test_derive_key_invariants(orders, data):
    d = data.draw(st.sampled_from([2, 4, 29, 31, 37]))
    covered = data.draw(st.sets(st.integers(1, len(orders)), max_size=len(orders)))
    key = derive_key(orders, covered, d)
    assert key % d == 1
    for i, t in enumerate(orders, 1):
        assert (key % t == 0) == (i in covered)
    assert key % math.prod(orders[i - 1] for i in covered) == 0


@pytest.mark.parametrize("d", [2, 3, 1009])
def test_recovery_iff_enough_parties(d):
    s = 4
    dealer, keys = threshold_setup(s, 0, random.Random(d), d=d)
    rng = random.Random(1)
    for m in range(1, s + 1):
        for size in range(s + 1):
            for coalition in itertools.combinations(range(1, s + 1), size):
                f = encode_message(rng.randrange(d), dealer.msg_subgroup)
                ct = threshold_encrypt(dealer, f, m, rng)
                assert (threshold_decrypt(ct, [keys[j] for j in coalition]) == f) == (size >= m)


def test_s3_m2_exhaustive():
    dealer, keys = threshold_setup(3, 0, random.Random(2))
    f = encode_message(1, dealer.msg_subgroup)
    ct = threshold_encrypt(dealer, f, 2, random.Random(3))
    for size in (1, 2, 3):
        for coalition in itertools.combinations((1, 2, 3), size):
            assert (threshold_decrypt(ct, [keys[j] for j in coalition]) == f) == (size >= 2)


def test_hidden_factor_structure():
    dealer, _ = threshold_setup(3, 0, random.Random(4))
    f = encode_message(1, dealer.msg_subgroup)
    for m in (1, 3):
        ct = threshold_encrypt(dealer, f, m, random.Random(5))
        residue = ct.value * f.inverse()
        present = [i for i, w in enumerate(dealer.subgroups, 1) if not (residue ** (dealer.d * math.prod(
            t for j, t in enumerate(dealer.orders, 1) if j != i))).is_identity()]
        assert present == list(range(1, level_size(3, m) + 1))


def test_virtual_keys_are_inert():
    dealer, keys = threshold_setup(3, 0, random.Random(6), d=3, virtual=3)
    assert len(dealer.virtual_keys) == 3
    assert all(v % 3 == 1 and v not in dealer.orders for v in dealer.virtual_keys)
    f = encode_message(2, dealer.msg_subgroup)
    ct = threshold_encrypt(dealer, f, 3, random.Random(7))
    out = threshold_decrypt(ct, list(keys.values()))
    for v in dealer.virtual_keys:
        out = out**v
    assert out == f


def test_threshold_errors():
    dealer, _ = threshold_setup(3, 0, random.Random(8))
    f = encode_message(1, dealer.msg_subgroup)
    with pytest.raises(ThresholdOutOfRange):
        threshold_encrypt(dealer, f, 0, random.Random(0))
    with pytest.raises(ThresholdOutOfRange):
        threshold_encrypt(dealer, f, 4, random.Random(0))
    with pytest.raises(NotInSubgroup):
        threshold_encrypt(dealer, dealer.subgroups[0].generator, 1, random.Random(0))


def test_larger_threshold_setup():
    dealer, keys = threshold_setup(3, 24, random.Random(9), d=65537)
    f = encode_message(4242, dealer.msg_subgroup)
    ct = threshold_encrypt(dealer, f, 2, random.Random(10))
    assert threshold_decrypt(ct, [keys[3], keys[1]]) == f
    assert threshold_decrypt(ct, [keys[2]]) != f
    assert isinstance(ct.value, GroupElement)
