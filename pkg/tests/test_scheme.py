import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hiddenmult.errors import (
    MessageOutOfRange,
    NotInSubgroup,
    PoolExhausted,
    UnknownParty,
    UnsupportedForV1,
    WrongVariant,
)
from hiddenmult.numtheory import GroupElement, product
from hiddenmult.scheme import (
    Ciphertext,
    SignedDocument,
    Variant,
    base_decrypt,
    base_encrypt,
    base_keys,
    decode_message,
    decrypt,
    encode_message,
    encrypt,
    hidden_product_subgroup,
    join_party,
    leave_party,
    party_step,
    setup_dealer,
    sign_document,
    v1_encrypt,
    v2_encrypt,
    verify_signature,
)
from oracles import order_by_multiplication


def test_desk_v2_setup_p31():
    dealer, keys = setup_dealer(2, 0, Variant.V2, 0, random.Random(0), d=2)
    assert sorted(s.order for s in dealer.hidden_subgroups) == [3, 5]
    assert dealer.modulus == 31 and dealer.msg_subgroup.generator.value == 30
    assert sorted(k.exponent for k in keys.values()) == [3, 5]
    dealer.check_invariants()


def test_desk_v1_minus_single_party():
    dealer, keys = setup_dealer(1, 0, Variant.V1_MINUS, 0, random.Random(0), orders=[5])
    # r' = 2 shares a factor with M = 20, so the smallest admissible prime is 61
    assert dealer.d == 4 and dealer.modulus == 61 and (dealer.modulus - 1) % 20 == 0
    f = encode_message(3, dealer.msg_subgroup)
    assert decrypt(encrypt(dealer, f, [1], random.Random(1)), keys.values()) == f


def test_assignment_covers_s_indices():
    dealer, keys = setup_dealer(3, 2, Variant.V2, 0, random.Random(5))
    assert len(dealer.assignment) == 3 and len(dealer.free_indices) == 2
    assert set(dealer.assignment.values()) | dealer.free_indices == {1, 2, 3, 4, 5}


def test_encode_decode():
    dealer, _ = setup_dealer(2, 0, Variant.V2, 0, random.Random(0), d=2)
    assert encode_message(0, dealer.msg_subgroup).value == 1
    assert encode_message(1, dealer.msg_subgroup).value == 30
    with pytest.raises(MessageOutOfRange):
        encode_message(2, dealer.msg_subgroup)
    with pytest.raises(NotInSubgroup):
        decode_message(GroupElement(3, 31), dealer.msg_subgroup)


@given(st.integers(0, 1008))
@settings(max_examples=40, deadline=None)
def test_decode_inverts_encode(m):
    dealer, _ = setup_dealer(2, 0, Variant.V2, 0, random.Random(1), d=1009)
    assert decode_message(encode_message(m, dealer.msg_subgroup), dealer.msg_subgroup) == m


def test_base_scheme_round_trip():
    dealer, _ = setup_dealer(2, 0, Variant.V2, 0, random.Random(0), d=2)
    hidden = hidden_product_subgroup(dealer.hidden_subgroups)
    assert hidden.order == 15 and order_by_multiplication(hidden.generator.value, 31) == 15
    inverse = base_keys(dealer.d, hidden.order)
    rng = random.Random(2)
    cosets = {x for x in range(1, 31) if pow(x, 15, 31) == 1}
    for _ in range(1000):
        f = encode_message(rng.randrange(2), dealer.msg_subgroup)
        c = base_encrypt(f, hidden, rng)
        assert (c * f.inverse()).value in cosets
        assert base_decrypt(c, hidden.order, inverse) == f
    assert base_encrypt(GroupElement.identity(31), hidden, rng).value in cosets


def test_v1_single_member_coalition_exponent():
    dealer, keys = setup_dealer(2, 0, Variant.V1_MINUS, 0, random.Random(0), orders=[3, 5], d=14)
    assert dealer.modulus == 211
    f = encode_message(1, dealer.msg_subgroup)
    rng = random.Random(4)
    ct = v1_encrypt(dealer, f, [1], random.Random(4))
    v = dealer.subgroup_of(1).random_element(rng)
    other = dealer.subgroup_of(2).order
    assert ct.value == v * f**other
    assert decrypt(ct, [keys[1]]) == f


def test_v1_full_coalition_collapses_exponent():
    for variant in (Variant.V1_MINUS, Variant.V1_PLUS):
        dealer, keys = setup_dealer(3, 0, variant, 0, random.Random(7))
        rng = random.Random(8)
        f = encode_message(1, dealer.msg_subgroup)
        ct = encrypt(dealer, f, [1, 2, 3], random.Random(8))
        v = product((dealer.subgroup_of(p).random_element(rng) for p in [1, 2, 3]), dealer.modulus)
        assert ct.value == v * f
        assert decrypt(ct, keys.values()) == f


def test_v2_steps_commute_and_strip_factors():
    dealer, keys = setup_dealer(2, 0, Variant.V2, 0, random.Random(0), d=2)
    f = encode_message(1, dealer.msg_subgroup)
    ct = encrypt(dealer, f, [1, 2], random.Random(3))
    a = party_step(party_step(ct.value, keys[1]), keys[2])
    b = party_step(party_step(ct.value, keys[2]), keys[1])
    assert a == b == f
    after_one = party_step(ct.value, keys[1])
    t1 = keys[1].exponent
    # the remaining value lies in the coset of f by party 2's subgroup only
    assert dealer.subgroup_of(2).contains(after_one * f.inverse())
    assert t1 % dealer.d == 1


def test_v2_coalition_of_one_and_trivial_message():
    dealer, keys = setup_dealer(3, 0, Variant.V2, 0, random.Random(0))
    rng = random.Random(1)
    one = GroupElement.identity(dealer.modulus)
    assert decrypt(encrypt(dealer, one, [2], rng), [keys[2]]) == one
    f = encode_message(1, dealer.msg_subgroup)
    assert decrypt(encrypt(dealer, f, [2], rng), [keys[2]]) == f


@pytest.mark.parametrize("platform", ["field", "ring"])
@pytest.mark.parametrize("variant", list(Variant))
def test_round_trip_every_coalition(variant, platform):
    dealer, keys = setup_dealer(4, 0, variant, 0, random.Random(3), platform=platform)
    rng = random.Random(4)
    for size in range(1, 5):
        for coalition in itertools.combinations(range(1, 5), size):
            f = encode_message(rng.randrange(dealer.d), dealer.msg_subgroup)
            ct = encrypt(dealer, f, coalition, rng)
            assert decrypt(ct, [keys[p] for p in coalition]) == f
            shuffled = rng.sample(coalition, len(coalition))
            assert decrypt(ct, [keys[p] for p in shuffled]) == f


def test_v2_is_monotone_and_v1_is_not():
    rng = random.Random(11)
    v2, k2 = setup_dealer(4, 0, Variant.V2, 0, rng)
    v1, k1 = setup_dealer(4, 0, Variant.V1_MINUS, 0, rng)
    witnesses = 0
    for coalition in itertools.chain.from_iterable(itertools.combinations(range(1, 5), k) for k in range(1, 4)):
        extra = [p for p in range(1, 5) if p not in coalition]
        for k in range(1, len(extra) + 1):
            for add in itertools.combinations(extra, k):
                f2 = encode_message(1, v2.msg_subgroup)
                assert decrypt(encrypt(v2, f2, coalition, rng), [k2[p] for p in coalition + add]) == f2
                f1 = encode_message(1, v1.msg_subgroup)
                witnesses += decrypt(encrypt(v1, f1, coalition, rng), [k1[p] for p in coalition + add]) != f1
    assert witnesses > 0


def test_large_parameters_round_trip():
    rng = random.Random(12)
    dealer, keys = setup_dealer(3, 1, Variant.V2, 64, rng)
    f = encode_message(12345, dealer.msg_subgroup)
    assert decrypt(encrypt(dealer, f, [1, 3], rng), [keys[3], keys[1]]) == f
    dealer.check_invariants()


def test_variant_guards():
    rng = random.Random(0)
    v1, _ = setup_dealer(2, 0, Variant.V1_PLUS, 0, rng)
    v2, _ = setup_dealer(2, 0, Variant.V2, 0, rng)
    with pytest.raises(WrongVariant):
        v2_encrypt(v1, encode_message(0, v1.msg_subgroup), [1], rng)
    with pytest.raises(WrongVariant):
        v1_encrypt(v2, encode_message(0, v2.msg_subgroup), [1], rng)
    with pytest.raises(UnknownParty):
        encrypt(v2, encode_message(0, v2.msg_subgroup), [9], rng)
    with pytest.raises(ValueError):
        encrypt(v2, encode_message(0, v2.msg_subgroup), [], rng)
    with pytest.raises(ValueError):
        setup_dealer(2, 0, Variant.V2, 0, rng, d=2, orders=[3, 7, 11][:2] + [4])


def test_join_and_leave():
    rng = random.Random(5)
    dealer, keys = setup_dealer(2, 1, Variant.V2, 0, rng)
    free = next(iter(dealer.free_indices))
    key = join_party(dealer, 3)
    assert key.exponent == dealer.hidden_subgroups[free - 1].order
    keys[3] = key
    for coalition in ([1], [2], [1, 2], [3], [1, 2, 3]):
        f = encode_message(1, dealer.msg_subgroup)
        assert decrypt(encrypt(dealer, f, coalition, rng), [keys[p] for p in coalition]) == f
    with pytest.raises(PoolExhausted):
        join_party(dealer, 4)
    leave_party(dealer, 2)
    with pytest.raises(PoolExhausted):
        join_party(dealer, 4)
    with pytest.raises(UnknownParty):
        encrypt(dealer, encode_message(0, dealer.msg_subgroup), [2], rng)
    dealer.check_invariants()


def test_join_refused_for_v1():
    dealer, _ = setup_dealer(2, 1, Variant.V1_MINUS, 0, random.Random(0))
    with pytest.raises(UnsupportedForV1):
        join_party(dealer, 3)


def test_signatures():
    rng = random.Random(6)
    dealer, _ = setup_dealer(4, 0, Variant.V2, 0, rng, d=3)
    sign_keys, verifier = dealer.sign_keys(), dealer.verifier_keys()
    f = encode_message(2, dealer.msg_subgroup)
    sd = sign_document(sign_keys, [1, 3], f, rng)
    assert verify_signature(sd, verifier, dealer.d)
    assert verify_signature(SignedDocument(f, f, ()), verifier, dealer.d)
    for outsider in (2, 4):
        for _ in range(10):
            tamper = dealer.subgroup_of(outsider).random_element(rng)
            forged = SignedDocument(f, sd.signed_value * tamper, sd.coalition)
            assert not verify_signature(forged, verifier, dealer.d)
    assert not verify_signature(SignedDocument(f, sd.signed_value, (1,)), verifier, dealer.d)


def test_signature_tamper_exhaustive_at_desk_scale():
    rng = random.Random(7)
    dealer, _ = setup_dealer(3, 0, Variant.V2, 0, rng, d=2)
    f = encode_message(1, dealer.msg_subgroup)
    sd = sign_document(dealer.sign_keys(), [1, 2], f, rng)
    sub = dealer.subgroup_of(3)
    for e in range(1, sub.order):
        forged = SignedDocument(f, sd.signed_value * sub.generator**e, sd.coalition)
        assert not verify_signature(forged, dealer.verifier_keys(), dealer.d)


def test_signature_needs_v2_parameters():
    dealer, _ = setup_dealer(2, 0, Variant.V1_MINUS, 0, random.Random(0))
    f = encode_message(1, dealer.msg_subgroup)
    sd = sign_document(dealer.sign_keys(), [1], f, random.Random(1))
    with pytest.raises(WrongVariant):
        verify_signature(sd, dealer.verifier_keys(), dealer.d)


def test_ciphertext_is_plain_data():
    ct = Ciphertext(GroupElement(5, 31), (1, 2), "v2")
    assert ct.modulus == 31 and ct.threshold is None
