"""Hidden-multiplier multi-recipient encryption and coalition signatures.

A dealer owns a platform group with a message subgroup ``F = <f0>`` of order
``d`` and hidden subgroups ``C_i = <u_i>`` of distinct prime orders ``t_i``.
Party keys are the orders ``t_i``.  A ciphertext for coalition ``S`` is a
message multiplied by one random nontrivial element from each ``C_i``,
``i in S``; raising to ``t_i`` strips the ``C_i`` factor.

Variant 1 (``d = t - 1`` or ``d = t + 1`` with ``t`` the product of all
orders) raises ``f`` to ``t / prod_S t_i`` so the coalition ends with
``f**t``.  It is not monotone.  Variant 2 takes ``t_i = 1 (mod d)`` so
every step fixes ``f``; any superset of ``S`` decrypts too.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    DecodeUnsupported,
    FactorizationFailed,
    MessageOutOfRange,
    NotInSubgroup,
    PoolExhausted,
    UnknownParty,
    UnsupportedForV1,
    WrongVariant,
)
from .numtheory import (
    Factorization,
    GroupElement,
    discrete_log,
    factorize,
    miller_rabin,
    mod_inverse,
    product,
    random_prime,
)
from .paramgen import (
    FieldPlatform,
    RingPlatform,
    SubgroupSpec,
    build_field_platform,
    build_ring_platform,
)

DECODE_LIMIT = 2**40


class Variant(str, enum.Enum):
    V1_MINUS = "v1-"
    V1_PLUS = "v1+"
    V2 = "v2"

    @property
    def is_v1(self) -> bool:
        return self is not Variant.V2


@dataclass(frozen=True)
class PartyDecryptKey:
    party_id: int
    exponent: int


@dataclass(frozen=True)
class PartySignKey:
    party_id: int
    generator: GroupElement


@dataclass(frozen=True)
class Ciphertext:
    value: GroupElement
    coalition: tuple[int, ...]
    variant: str
    threshold: int | None = None

    @property
    def modulus(self) -> int:
        return self.value.modulus


@dataclass(frozen=True)
class SignedDocument:
    document: GroupElement
    signed_value: GroupElement
    coalition: tuple[int, ...]


@dataclass
class DealerSecret:
    """Everything the dealer keeps private, plus the key-assignment ledger.

    Subgroup indices are 1-based.  Retired indices are never handed out
    again.  Mutation (join/leave) is single-writer.
    """

    platform: FieldPlatform | RingPlatform
    variant: Variant
    msg_subgroup: SubgroupSpec
    hidden_subgroups: list[SubgroupSpec]
    assignment: dict[int, int] = field(default_factory=dict)
    free_indices: set[int] = field(default_factory=set)
    retired_indices: set[int] = field(default_factory=set)

    @property
    def modulus(self) -> int:
        return self.platform.modulus

    @property
    def d(self) -> int:
        return self.msg_subgroup.order

    @property
    def s_max(self) -> int:
        return len(self.hidden_subgroups)

    @property
    def pool_product(self) -> int:
        """Product of every setup-time order; Variant 1 ties ``d`` to it."""
        return math.prod(sub.order for sub in self.hidden_subgroups)

    def subgroup_of(self, party_id: int) -> SubgroupSpec:
        try:
            return self.hidden_subgroups[self.assignment[party_id] - 1]
        except KeyError:
            raise UnknownParty(party_id) from None

    def decrypt_key(self, party_id: int) -> PartyDecryptKey:
        return PartyDecryptKey(party_id, self.subgroup_of(party_id).order)

    def sign_key(self, party_id: int) -> PartySignKey:
        return PartySignKey(party_id, self.subgroup_of(party_id).generator)

    def decrypt_keys(self) -> dict[int, PartyDecryptKey]:
        return {pid: self.decrypt_key(pid) for pid in sorted(self.assignment)}

    def sign_keys(self) -> dict[int, PartySignKey]:
        return {pid: self.sign_key(pid) for pid in sorted(self.assignment)}

    def verifier_keys(self) -> dict[int, int]:
        return {pid: self.subgroup_of(pid).order for pid in sorted(self.assignment)}

    def check_invariants(self) -> None:
        orders = [sub.order for sub in self.hidden_subgroups]
        assert len(set(orders)) == len(orders)
        assert all(miller_rabin(t) for t in orders) or isinstance(self.platform, RingPlatform)
        assert all(math.gcd(t, self.d) == 1 for t in orders)
        if self.variant is Variant.V2:
            assert all(t % self.d == 1 for t in orders)
        elif self.variant is Variant.V1_MINUS:
            assert self.d == self.pool_product - 1
        else:
            assert self.d == self.pool_product + 1
        indices = list(self.assignment.values())
        assert len(set(indices)) == len(indices)
        everything = set(indices) | self.free_indices | self.retired_indices
        assert everything == set(range(1, self.s_max + 1))
        assert len(everything) == len(indices) + len(self.free_indices) + len(self.retired_indices)


def _primes_in_progression(d: int, count: int, bits: int, rng: random.Random, avoid: set[int]) -> list[int]:
    """Distinct primes ``t = 1 (mod d)``; smallest ones when ``bits == 0``."""
    out: list[int] = []
    if bits <= 0:
        k = 0
        while len(out) < count:
            k += 1
            t = 1 + d * k
            if t not in avoid and miller_rabin(t):
                out.append(t)
        return out
    k_bits = max(bits - d.bit_length(), 2)
    while len(out) < count:
        t = 1 + d * (rng.getrandbits(k_bits) | (1 << (k_bits - 1)))
        if t not in avoid and t not in out and miller_rabin(t):
            out.append(t)
    return out


def _distinct_primes(count: int, bits: int, rng: random.Random) -> list[int]:
    if bits <= 0:
        out, n = [], 3
        while len(out) < count:
            if miller_rabin(n):
                out.append(n)
            n += 2
        return out
    out = []
    while len(out) < count:
        t = random_prime(bits, rng)
        if t != 2 and t not in out:
            out.append(t)
    return out


def _v1_message_order(orders: Sequence[int], variant: Variant) -> tuple[int, Factorization]:
    t = math.prod(orders)
    d = t - 1 if variant is Variant.V1_MINUS else t + 1
    return d, factorize(d)


def setup_dealer(
    s: int,
    s_new: int = 0,
    variant: Variant | str = Variant.V2,
    bit_size: int = 0,
    rng: random.Random | None = None,
    *,
    d: int | None = None,
    orders: Sequence[int] | Sequence[tuple[int, int]] | None = None,
    platform: str = "field",
    d_pair: tuple[int, int] | None = None,
    r_prime_bits: int = 0,
    msg_bits: int = 16,
    jobs: int = 1,
) -> tuple[DealerSecret, dict[int, PartyDecryptKey]]:
    """Build a platform with ``s + s_new`` hidden subgroups and hand keys to parties ``1..s``.

    ``bit_size == 0`` selects desk scale: the smallest admissible primes,
    so platforms stay small enough for brute-force checks.  Otherwise every
    hidden order is a random prime of about ``bit_size`` bits.  For the ring
    platform each key order is a product of two such primes, one living
    modulo each ring prime; the message subgroup sits on the ``p`` side
    unless ``d_pair`` splits it.
    """
    rng = rng if rng is not None else random.Random()
    variant = Variant(variant)
    if s < 1 or s_new < 0:
        raise ValueError("need s >= 1 and s_new >= 0")
    s_max = s + s_new
    ring = platform == "ring"
    if platform not in ("field", "ring"):
        raise ValueError(f"unknown platform {platform!r}")
    width = 2 * s_max if ring else s_max
    if d_pair is not None:
        d = d_pair[0] * d_pair[1]
    known: dict[int, Factorization] = {}

    if variant is Variant.V2:
        if d is None:
            d = 2 if bit_size <= 0 else random_prime(msg_bits, rng)
        if orders is None:
            primes = _primes_in_progression(d, width, bit_size, rng, set())
        else:
            primes = _flatten(orders)
        if any(t % d != 1 for t in primes):
            raise ValueError("Variant 2 needs every order = 1 (mod d)")
        known[d] = factorize(d)
    else:
        for _ in range(1000):
            primes = _flatten(orders) if orders is not None else _distinct_primes(width, bit_size, rng)
            try:
                d_v1, fact_d = _v1_message_order(primes, variant)
                known[d_v1] = fact_d
                break
            except FactorizationFailed:
                if orders is not None:
                    raise
        else:
            raise FactorizationFailed("could not find orders with a factorable message order")
        if d is not None and d != d_v1:
            raise ValueError(f"Variant 1 fixes d = {d_v1}")
        d = d_v1

    if len(set(primes)) != len(primes) or not all(miller_rabin(t) and t > 2 for t in primes):
        raise ValueError("hidden subgroup orders must be distinct odd primes")
    for t in primes:
        known[t] = Factorization(((t, 1),))

    if ring:
        pairs = [(primes[2 * i], primes[2 * i + 1]) for i in range(s_max)]
        dp, dq = d_pair if d_pair is not None else (d, 1)
        for part in (dp, dq):
            known[part] = factorize(part)
        plat, subgroups, msg = build_ring_platform(
            pairs, (dp, dq), rng, r_prime_bits=r_prime_bits, known_factorizations=known, jobs=jobs
        )
    else:
        plat, subgroups, msg = build_field_platform(
            primes, d, rng, r_prime_bits=r_prime_bits, known_factorizations=known, jobs=jobs
        )

    chosen = rng.sample(range(1, s_max + 1), s)
    dealer = DealerSecret(
        platform=plat,
        variant=variant,
        msg_subgroup=msg,
        hidden_subgroups=subgroups,
        assignment={pid: idx for pid, idx in zip(range(1, s + 1), chosen)},
        free_indices=set(range(1, s_max + 1)) - set(chosen),
    )
    return dealer, dealer.decrypt_keys()


def _flatten(orders) -> list[int]:
    out: list[int] = []
    for o in orders:
        out.extend(o if isinstance(o, tuple) else (o,))
    return out


def join_party(dealer: DealerSecret, new_id: int, rng: random.Random | None = None) -> PartyDecryptKey:
    """Give a newcomer an unused subgroup; existing keys are untouched."""
    if dealer.variant.is_v1:
        raise UnsupportedForV1("Variant 1 ties d to the setup-time pool")
    if new_id in dealer.assignment:
        raise ValueError(f"party {new_id} is already in the pool")
    if not dealer.free_indices:
        raise PoolExhausted("no unused subgroup left")
    free = sorted(dealer.free_indices)
    idx = free[0] if rng is None else rng.choice(free)
    dealer.free_indices.remove(idx)
    dealer.assignment[new_id] = idx
    return dealer.decrypt_key(new_id)


def leave_party(dealer: DealerSecret, party_id: int) -> DealerSecret:
    if party_id not in dealer.assignment:
        raise UnknownParty(party_id)
    dealer.retired_indices.add(dealer.assignment.pop(party_id))
    return dealer


def encode_message(m: int, msg_subgroup: SubgroupSpec) -> GroupElement:
    if not 0 <= m < msg_subgroup.order:
        raise MessageOutOfRange(f"message {m} outside [0, {msg_subgroup.order})")
    return msg_subgroup.generator**m


def decode_message(f: GroupElement, msg_subgroup: SubgroupSpec) -> int:
    if not msg_subgroup.contains(f):
        raise NotInSubgroup(f"{f!r} is not in the message subgroup")
    if msg_subgroup.order > DECODE_LIMIT:
        raise DecodeUnsupported("message subgroup too large to decode")
    return discrete_log(f, msg_subgroup.generator, msg_subgroup.order)


def hidden_product_subgroup(subgroups: Iterable[SubgroupSpec]) -> SubgroupSpec:
    """The cyclic product of subgroups with pairwise coprime orders."""
    subgroups = list(subgroups)
    modulus = subgroups[0].modulus
    fact = Factorization(())
    for sub in subgroups:
        fact = fact * sub.order_factorization
    gen = product((sub.generator for sub in subgroups), modulus)
    return SubgroupSpec(gen, math.prod(sub.order for sub in subgroups), fact)


def base_keys(msg_order: int, hidden_order: int) -> int:
    """``l'`` with ``l * l' = 1 (mod k)``."""
    return mod_inverse(hidden_order, msg_order)


def base_encrypt(f: GroupElement, hidden: SubgroupSpec, rng: random.Random) -> GroupElement:
    return hidden.random_element(rng) * f


def base_decrypt(c: GroupElement, hidden_order: int, inverse: int) -> GroupElement:
    return c ** (hidden_order * inverse)


def _check_coalition(dealer: DealerSecret, coalition: Sequence[int]) -> tuple[int, ...]:
    coalition = tuple(coalition)
    if not coalition:
        raise ValueError("coalition must be nonempty")
    if len(set(coalition)) != len(coalition):
        raise ValueError("coalition ids must be distinct")
    for pid in coalition:
        if pid not in dealer.assignment:
            raise UnknownParty(pid)
    return coalition


def _hidden_multipliers(dealer: DealerSecret, coalition: Sequence[int], rng: random.Random) -> GroupElement:
    return product((dealer.subgroup_of(pid).random_element(rng) for pid in coalition), dealer.modulus)


def v1_encrypt(dealer: DealerSecret, f: GroupElement, coalition: Sequence[int], rng: random.Random) -> Ciphertext:
    if not dealer.variant.is_v1:
        raise WrongVariant("dealer is not Variant 1")
    coalition = _check_coalition(dealer, coalition)
    if not dealer.msg_subgroup.contains(f):
        raise NotInSubgroup("message is not in F")
    share = math.prod(dealer.subgroup_of(pid).order for pid in coalition)
    c = _hidden_multipliers(dealer, coalition, rng) * f ** (dealer.pool_product // share)
    return Ciphertext(c, coalition, dealer.variant.value)


def v2_encrypt(dealer: DealerSecret, f: GroupElement, coalition: Sequence[int], rng: random.Random) -> Ciphertext:
    if dealer.variant is not Variant.V2:
        raise WrongVariant("dealer is not Variant 2")
    coalition = _check_coalition(dealer, coalition)
    if not dealer.msg_subgroup.contains(f):
        raise NotInSubgroup("message is not in F")
    return Ciphertext(_hidden_multipliers(dealer, coalition, rng) * f, coalition, dealer.variant.value)


def encrypt(dealer: DealerSecret, f: GroupElement, coalition: Sequence[int], rng: random.Random) -> Ciphertext:
    if dealer.variant.is_v1:
        return v1_encrypt(dealer, f, coalition, rng)
    return v2_encrypt(dealer, f, coalition, rng)


def party_step(c: GroupElement, key: PartyDecryptKey) -> GroupElement:
    return c**key.exponent


def v1_finalize(c_final: GroupElement, variant: Variant | str) -> GroupElement:
    return c_final.inverse() if Variant(variant) is Variant.V1_PLUS else c_final


def decrypt(ct: Ciphertext, keys: Iterable[PartyDecryptKey]) -> GroupElement:
    """Apply every key's step to ``ct`` and finalize."""
    value = ct.value
    for key in keys:
        value = party_step(value, key)
    return v1_finalize(value, ct.variant)


def sign_step(doc_state: GroupElement, key: PartySignKey, rng: random.Random) -> GroupElement:
    """Multiply by a random nontrivial power of the signer's generator.

    The signer does not know the order of its generator, so the exponent is
    drawn below the modulus and redrawn if it lands on the identity.
    """
    while True:
        a = key.generator ** rng.randrange(1, key.generator.modulus)
        if not a.is_identity():
            return doc_state * a


def sign_document(
    keys: Mapping[int, PartySignKey], coalition: Sequence[int], f: GroupElement, rng: random.Random
) -> SignedDocument:
    state = f
    for pid in coalition:
        if pid not in keys:
            raise UnknownParty(pid)
        state = sign_step(state, keys[pid], rng)
    return SignedDocument(f, state, tuple(coalition))


def verify_signature(sd: SignedDocument, verifier_keys: Mapping[int, int], d: int) -> bool:
    """Accept iff ``f_sign ** prod(t_i) == f`` over the claimed coalition.

    Only parameters with every ``t_i = 1 (mod d)`` are supported.
    """
    orders = []
    for pid in sd.coalition:
        if pid not in verifier_keys:
            raise UnknownParty(pid)
        orders.append(verifier_keys[pid])
    if any(t % d != 1 for t in verifier_keys.values()):
        raise WrongVariant("signature verification needs every order = 1 (mod d)")
    if pow(sd.document.value, d, sd.document.modulus) != 1:
        return False
    return sd.signed_value ** math.prod(orders) == sd.document
