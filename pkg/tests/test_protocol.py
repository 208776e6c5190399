import random

import pytest

from hiddenmult.protocol import Mode, OrderPolicy, Status, replay_steps, run_decrypt_session, run_sign_session, run_threshold_session
from hiddenmult.scheme import Variant, encode_message, encrypt, party_step, setup_dealer
from hiddenmult.threshold import threshold_setup


@pytest.fixture(scope="module")
def v2():
    return setup_dealer(4, 1, Variant.V2, 0, random.Random(1), d=5)


@pytest.fixture(scope="module")
def v1():
    return setup_dealer(3, 0, Variant.V1_MINUS, 0, random.Random(2))


@pytest.mark.parametrize("mode", list(Mode))
@pytest.mark.parametrize("order", list(OrderPolicy))
def test_decrypt_session_recovers_message(v2, mode, order):
    dealer, keys = v2
    t = run_decrypt_session(dealer, keys, [1, 3, 4], 3, mode=mode, order_policy=order, seed=7)
    assert t.status is Status.COMPLETE and t.message == 3
    assert sorted(t.step_order()) == [1, 3, 4]


def test_step_order_does_not_matter_for_v2(v2):
    dealer, keys = v2
    f = encode_message(2, dealer.msg_subgroup)
    ct = encrypt(dealer, f, [1, 2], random.Random(3))
    a = run_decrypt_session(dealer, keys, [1, 2], 2, ciphertext=ct, seed=1)
    b = run_decrypt_session(dealer, keys, [2, 1], 2, ciphertext=ct, seed=1)
    assert a.step_order() == [1, 2] and b.step_order() == [2, 1]
    assert a.final_value == b.final_value == f.value


def test_v1_intruder_breaks_broadcast_but_not_room(v1):
    dealer, keys = v1
    broadcast = run_decrypt_session(dealer, keys, [1], 1, intruders=[2], seed=3)
    assert broadcast.status is Status.FAILED and 2 in broadcast.step_order()
    room = run_decrypt_session(dealer, keys, [1], 1, intruders=[2], mode="room", seed=3)
    assert room.status is Status.COMPLETE and room.step_order() == [1]
    assert any(e["event"] == "reject" and e["party"] == 2 for e in room.view("server"))


def test_v2_intruder_is_harmless_in_broadcast(v2):
    dealer, keys = v2
    t = run_decrypt_session(dealer, keys, [1], 4, intruders=[2], seed=4)
    assert t.status is Status.COMPLETE and t.message == 4


def test_server_checks_qualification(v2, v1):
    dealer, keys = v2
    f = encode_message(1, dealer.msg_subgroup)
    ct = encrypt(dealer, f, [1, 2, 3], random.Random(5))
    short = run_decrypt_session(dealer, keys, [1, 2], 1, ciphertext=ct, participants=[1, 2], mode="server", seed=5)
    assert short.status is Status.FAILED and not short.step_order()
    extra = run_decrypt_session(dealer, keys, [1, 2, 3, 4], 1, ciphertext=ct, mode="server", seed=5)
    assert extra.status is Status.COMPLETE
    d1, k1 = v1
    f1 = encode_message(1, d1.msg_subgroup)
    ct1 = encrypt(d1, f1, [1], random.Random(6))
    assert run_decrypt_session(d1, k1, [1, 2], 1, ciphertext=ct1, mode="server", seed=6).status is Status.FAILED


def test_server_hides_intermediate_values(v2):
    dealer, keys = v2
    t = run_decrypt_session(dealer, keys, [1, 2], 1, mode="server", seed=8)
    public = t.view("public")
    assert not any(e["event"] in ("step", "ciphertext") for e in public)
    assert [e["event"] for e in public][-1] == "result"
    assert any(e["event"] == "step" for e in t.view("server"))


def test_room_keeps_values_inside(v2):
    dealer, keys = v2
    t = run_decrypt_session(dealer, keys, [2, 3], 1, mode="room", seed=9)
    assert not any("value" in e for e in t.view("public") if e["event"] != "result")
    assert any(e["event"] == "step" for e in t.view("room"))


def test_virtual_padding_in_server_mode(v2):
    dealer, keys = v2
    t = run_decrypt_session(dealer, keys, [1, 2], 2, mode="server", virtual_padding=True, seed=10)
    assert t.status is Status.COMPLETE and t.message == 2
    assert any(p < 0 for p in t.step_order())
    bad = run_decrypt_session(dealer, keys, [1, 2], 2, mode="broadcast", virtual_padding=True, seed=10)
    assert bad.status is Status.FAILED


def test_errors_end_in_failed_transcript(v2):
    dealer, keys = v2
    t = run_decrypt_session(dealer, keys, [9], 1, seed=1)
    assert t.status is Status.FAILED and t.events[-1]["event"] == "error"


def test_same_seed_same_transcript(v2):
    dealer, keys = v2
    runs = [
        run_decrypt_session(dealer, keys, [1, 2, 4], 3, mode="room", order_policy="shuffle", seed=11).to_lines("server")
        for _ in range(2)
    ]
    assert runs[0] == runs[1]
    other = run_decrypt_session(dealer, keys, [1, 2, 4], 3, mode="room", order_policy="shuffle", seed=12)
    assert other.to_lines("server") != runs[0]


def test_replay_reproduces_final_value(v2):
    dealer, keys = v2
    f = encode_message(4, dealer.msg_subgroup)
    ct = encrypt(dealer, f, [1, 2, 3], random.Random(13))
    t = run_decrypt_session(dealer, keys, [1, 2, 3], 4, ciphertext=ct, order_policy="shuffle", seed=13)
    replayed = replay_steps(ct.value, t, lambda pid: lambda c: party_step(c, keys[pid]))
    assert replayed.value == t.final_value


@pytest.mark.parametrize("mode", list(Mode))
def test_threshold_sessions(mode):
    dealer, keys = threshold_setup(3, 0, random.Random(14), d=3)
    ok = run_threshold_session(dealer, keys, [1, 3], 2, 2, mode=mode, seed=1)
    assert ok.status is Status.COMPLETE and ok.message == 2
    short = run_threshold_session(dealer, keys, [2], 2, 2, mode=mode, seed=1)
    assert short.status is Status.FAILED


def test_threshold_virtual_padding():
    dealer, keys = threshold_setup(3, 0, random.Random(15), d=3)
    t = run_threshold_session(dealer, keys, [1, 2, 3], 1, 3, mode="server", virtual_padding=True, seed=2)
    assert t.status is Status.COMPLETE and len(t.step_order()) == 3 + len(dealer.virtual_keys)


def test_sign_session(v2):
    dealer, _ = v2
    f = encode_message(1, dealer.msg_subgroup)
    sd, t = run_sign_session(dealer.sign_keys(), [1, 4], f, seed=3, verifier=(dealer.verifier_keys(), dealer.d))
    assert t.status is Status.COMPLETE and sd.coalition == (1, 4)
    again, _ = run_sign_session(dealer.sign_keys(), [1, 4], f, seed=3)
    assert again == sd
    missing, failed = run_sign_session(dealer.sign_keys(), [1, 7], f, seed=3)
    assert missing is None and failed.status is Status.FAILED
