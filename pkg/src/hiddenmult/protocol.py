"""Deterministic in-process decryption and signing sessions.

A session is driven by a single ``random.Random(seed)``; the same seed and
inputs always yield the same transcript.  Channels are plain Python lists.
The three modes differ only in who may act and who sees which values:

``broadcast``
    everything is public and anyone holding a key can apply a step;
``room``
    invited parties get a one-time token, intermediate values stay in the
    room, outsiders are turned away;
``server``
    parties hand their keys to a trusted server which checks that the
    gathered set is qualified, runs all steps itself and announces only the
    final value.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .errors import HiddenMultError
from .numtheory import GroupElement
from .scheme import (
    Ciphertext,
    DealerSecret,
    PartyDecryptKey,
    PartySignKey,
    SignedDocument,
    Variant,
    decode_message,
    encode_message,
    encrypt,
    party_step,
    sign_step,
    v1_finalize,
    verify_signature,
)
from .threshold import ThresholdDealer, ThresholdKey, threshold_encrypt, threshold_party_step


class Mode(str, enum.Enum):
    BROADCAST = "broadcast"
    PRIVATE_ROOM = "room"
    TRUSTED_SERVER = "server"


class OrderPolicy(str, enum.Enum):
    SEQUENTIAL = "seq"
    SHUFFLED = "shuffle"


class Status(str, enum.Enum):
    OPEN = "open"
    COMPLETE = "complete"
    FAILED = "failed"


PUBLIC, ROOM, SERVER = "public", "room", "server"
_VISIBLE = {PUBLIC: {PUBLIC}, ROOM: {PUBLIC, ROOM}, SERVER: {PUBLIC, ROOM, SERVER}}


@dataclass
class Transcript:
    session_id: str
    kind: str
    mode: Mode
    seed: int
    events: list[dict[str, Any]] = field(default_factory=list)
    status: Status = Status.OPEN
    final_value: int | None = None
    message: int | None = None

    def log(self, event: str, visibility: str = PUBLIC, **data: Any) -> None:
        self.events.append({"n": len(self.events), "event": event, "visibility": visibility, **data})

    def view(self, audience: str = PUBLIC) -> list[dict[str, Any]]:
        return [e for e in self.events if e["visibility"] in _VISIBLE[audience]]

    def step_order(self) -> list[int]:
        return [e["party"] for e in self.events if e["event"] == "step"]

    def to_lines(self, audience: str = PUBLIC) -> str:
        header = {
            "format": 1,
            "kind": "transcript",
            "session": self.session_id,
            "type": self.kind,
            "mode": self.mode.value,
            "seed": self.seed,
        }
        records = [header, *self.view(audience)]
        return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)


def _hex(x: GroupElement | int) -> str:
    return format(int(x), "x")


class _Room:
    """Access control and step execution shared by all session kinds."""

    def __init__(self, transcript: Transcript, rng: random.Random, invited: Sequence[int]):
        self.t = transcript
        self.rng = rng
        self.mode = transcript.mode
        self.tokens: dict[int, str] = {}
        self.inner = {Mode.BROADCAST: PUBLIC, Mode.PRIVATE_ROOM: ROOM, Mode.TRUSTED_SERVER: SERVER}[self.mode]
        for pid in invited:
            if self.mode is not Mode.BROADCAST:
                self.tokens[pid] = format(rng.getrandbits(64), "016x")
            self.t.log("invite", PUBLIC if self.mode is Mode.BROADCAST else SERVER, party=pid)

    def admit(self, participants: Sequence[int], presented: Mapping[int, str | None]) -> list[int]:
        admitted = []
        for pid in participants:
            if self.mode is Mode.BROADCAST or (pid in self.tokens and self.tokens[pid] == presented.get(pid)):
                admitted.append(pid)
                self.t.log("join", PUBLIC if self.mode is Mode.BROADCAST else SERVER, party=pid)
            else:
                self.t.log("reject", SERVER, party=pid)
        return admitted

    def order(self, admitted: list[int], policy: OrderPolicy) -> list[int]:
        admitted = list(admitted)
        if policy is OrderPolicy.SHUFFLED:
            self.rng.shuffle(admitted)
        return admitted

    def run(self, value: GroupElement, sequence: Sequence[tuple[int, Callable]]) -> GroupElement:
        for pid, step in sequence:
            value = step(value)
            self.t.log("step", self.inner, party=pid, value=_hex(value))
        return value


def _session_id(kind: str, seed: int) -> str:
    return f"{kind}-{random.Random(f'{kind}:{seed}').getrandbits(48):012x}"


def _finish(t: Transcript, value: GroupElement, expected: GroupElement | None, msg_subgroup) -> Transcript:
    t.final_value = value.value
    try:
        t.message = decode_message(value, msg_subgroup)
    except HiddenMultError:
        t.message = None
    ok = value == expected if expected is not None else t.message is not None
    t.status = Status.COMPLETE if ok else Status.FAILED
    t.log("result", PUBLIC, value=_hex(value), status=t.status.value, message=t.message)
    return t


def _fail(t: Transcript, exc: Exception) -> Transcript:
    t.status = Status.FAILED
    t.log("error", PUBLIC, error=type(exc).__name__, detail=str(exc))
    return t


def run_decrypt_session(
    dealer: DealerSecret,
    keys: Mapping[int, PartyDecryptKey],
    coalition: Sequence[int],
    message: int | None = None,
    *,
    mode: Mode | str = Mode.BROADCAST,
    order_policy: OrderPolicy | str = OrderPolicy.SEQUENTIAL,
    seed: int = 0,
    ciphertext: Ciphertext | None = None,
    participants: Sequence[int] | None = None,
    intruders: Sequence[int] = (),
    virtual_padding: bool = False,
    check: bool = True,
) -> Transcript:
    """Encrypt (unless ``ciphertext`` is given), let the parties decrypt, record everything.

    ``participants`` defaults to the addressed coalition; ``intruders`` are
    extra key holders who were not invited and try to act anyway.  Scheme
    errors end in a Failed transcript.
    """
    mode, order_policy = Mode(mode), OrderPolicy(order_policy)
    rng = random.Random(seed)
    t = Transcript(_session_id("decrypt", seed), "decrypt", mode, seed)
    try:
        expected = None
        if ciphertext is None:
            f = encode_message(message, dealer.msg_subgroup)
            expected = f if check else None
            ciphertext = encrypt(dealer, f, coalition, rng)
        elif message is not None and check:
            expected = encode_message(message, dealer.msg_subgroup)
        t.log("ciphertext", PUBLIC if mode is Mode.BROADCAST else ROOM,
              value=_hex(ciphertext.value), coalition=list(ciphertext.coalition), variant=ciphertext.variant)

        participants = list(coalition if participants is None else participants)
        room = _Room(t, rng, participants)
        presented = {pid: room.tokens.get(pid) for pid in participants}
        presented.update({pid: None for pid in intruders})
        admitted = room.admit(participants + [p for p in intruders if p not in participants], presented)

        if mode is Mode.TRUSTED_SERVER:
            qualified = set(ciphertext.coalition) <= set(admitted)
            if Variant(ciphertext.variant).is_v1:
                qualified = set(ciphertext.coalition) == set(admitted)
            t.log("qualification", SERVER, qualified=qualified)
            if not qualified:
                t.status = Status.FAILED
                t.log("result", PUBLIC, status=t.status.value, reason="coalition not qualified")
                return t

        sequence = [(pid, (lambda k: lambda c: party_step(c, k))(keys[pid])) for pid in room.order(admitted, order_policy)]
        if virtual_padding:
            if mode is not Mode.TRUSTED_SERVER or dealer.variant.is_v1:
                raise ValueError("virtual participants need server mode and a monotone scheme")
            for idx in sorted(dealer.free_indices):
                vkey = PartyDecryptKey(-idx, dealer.hidden_subgroups[idx - 1].order)
                sequence.append((vkey.party_id, (lambda k: lambda c: party_step(c, k))(vkey)))
        value = room.run(ciphertext.value, sequence)
        value = v1_finalize(value, ciphertext.variant)
        t.log("finalize", SERVER if mode is Mode.TRUSTED_SERVER else room.inner)
        return _finish(t, value, expected, dealer.msg_subgroup)
    except (HiddenMultError, KeyError, ValueError) as exc:
        return _fail(t, exc)


def run_threshold_session(
    dealer: ThresholdDealer,
    keys: Mapping[int, ThresholdKey],
    coalition: Sequence[int],
    message: int | None = None,
    m: int = 1,
    *,
    mode: Mode | str = Mode.BROADCAST,
    order_policy: OrderPolicy | str = OrderPolicy.SEQUENTIAL,
    seed: int = 0,
    ciphertext: Ciphertext | None = None,
    virtual_padding: bool = False,
    check: bool = True,
) -> Transcript:
    mode, order_policy = Mode(mode), OrderPolicy(order_policy)
    rng = random.Random(seed)
    t = Transcript(_session_id("threshold", seed), "threshold", mode, seed)
    try:
        expected = None
        if ciphertext is None:
            f = encode_message(message, dealer.msg_subgroup)
            expected = f if check else None
            ciphertext = threshold_encrypt(dealer, f, m, rng)
        elif message is not None and check:
            expected = encode_message(message, dealer.msg_subgroup)
        t.log("ciphertext", PUBLIC, value=_hex(ciphertext.value), threshold=ciphertext.threshold)

        room = _Room(t, rng, list(coalition))
        admitted = room.admit(list(coalition), dict(room.tokens))
        if mode is Mode.TRUSTED_SERVER:
            qualified = len(admitted) >= ciphertext.threshold
            t.log("qualification", SERVER, qualified=qualified)
            if not qualified:
                t.status = Status.FAILED
                t.log("result", PUBLIC, status=t.status.value, reason="below threshold")
                return t

        sequence = [
            (pid, (lambda k: lambda c: threshold_party_step(c, k))(keys[pid]))
            for pid in room.order(admitted, order_policy)
        ]
        if virtual_padding:
            if mode is not Mode.TRUSTED_SERVER:
                raise ValueError("virtual participants need server mode")
            for i, v in enumerate(dealer.virtual_keys, 1):
                sequence.append((-i, (lambda k: lambda c: threshold_party_step(c, k))(ThresholdKey(-i, v))))
        value = room.run(ciphertext.value, sequence)
        return _finish(t, value, expected, dealer.msg_subgroup)
    except (HiddenMultError, KeyError, ValueError) as exc:
        return _fail(t, exc)


def run_sign_session(
    keys: Mapping[int, PartySignKey],
    coalition: Sequence[int],
    document: GroupElement,
    *,
    seed: int = 0,
    mode: Mode | str = Mode.BROADCAST,
    verifier: tuple[Mapping[int, int], int] | None = None,
) -> tuple[SignedDocument | None, Transcript]:
    """Coalition members multiply the document by their random factors in turn.

    With ``verifier = (orders, d)`` the result is verified and the status
    reflects the verdict; otherwise a finished signing run is Complete.
    """
    mode = Mode(mode)
    rng = random.Random(seed)
    t = Transcript(_session_id("sign", seed), "sign", mode, seed)
    try:
        t.log("document", PUBLIC, value=_hex(document))
        room = _Room(t, rng, list(coalition))
        admitted = room.admit(list(coalition), dict(room.tokens))
        sequence = [(pid, (lambda k: lambda c: sign_step(c, k, rng))(keys[pid])) for pid in admitted]
        value = room.run(document, sequence)
        sd = SignedDocument(document, value, tuple(admitted))
        t.final_value = value.value
        ok = True if verifier is None else verify_signature(sd, verifier[0], verifier[1])
        t.status = Status.COMPLETE if ok else Status.FAILED
        t.log("result", PUBLIC, value=_hex(value), status=t.status.value)
        return sd, t
    except (HiddenMultError, KeyError, ValueError) as exc:
        return None, _fail(t, exc)


def replay_steps(
    start: GroupElement, transcript: Transcript, step_for: Callable[[int], Callable[[GroupElement], GroupElement]]
) -> GroupElement:
    """Re-apply the transcript's steps in recorded order."""
    value = start
    for pid in transcript.step_order():
        value = step_for(pid)(value)
    return value
