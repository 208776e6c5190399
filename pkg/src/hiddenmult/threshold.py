"""Dealer-chosen (m, s)-threshold encryption.

The cover set-system assigns to every party ``j`` and level ``k`` an index
set ``T_j(k)`` within ``{1..l_k}`` such that any ``k`` parties jointly
cover every index and any ``k - 1`` parties miss at least one.  Index ``i``
stands for a subgroup ``W_i`` of prime order ``t_i``.  Party ``j`` holds
``key_j = prod_{i in T_j(s)} t_i * inv``, with ``inv`` inverting that
product modulo the message order ``d``; so the key kills exactly the
``W_i`` the party covers and fixes every message.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NotInSubgroup, PoolTooLarge, ThresholdOutOfRange
from .numtheory import Factorization, GroupElement, factorize, miller_rabin, mod_inverse, product, random_prime
from .paramgen import FieldPlatform, SubgroupSpec, build_field_platform
from .scheme import Ciphertext

MAX_SET_SYSTEM_PARTIES = 16
MAX_THRESHOLD_PARTIES = 12


def level_size(s: int, k: int) -> int:
    """``l_k = 1 + C(s, 1) + ... + C(s, k-1)``."""
    return sum(math.comb(s, j) for j in range(k))


@dataclass(frozen=True)
class ThresholdSetSystem:
    s: int
    levels: tuple[tuple[frozenset[int], ...], ...]  # levels[k-1][j-1] == T_j(k)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(level_size(self.s, k) for k in range(1, self.s + 1))

    def subset(self, party: int, level: int) -> frozenset[int]:
        return self.levels[level - 1][party - 1]

    def union(self, parties: Iterable[int], level: int) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for j in parties:
            out |= self.subset(j, level)
        return out


def build_set_system(s: int) -> ThresholdSetSystem:
    """Cover set-system for ``s`` parties.

    Level 1 gives everyone ``{1}``.  Level ``k`` adds one fresh index per
    ``(k-1)``-subset ``V`` of parties (lexicographic order) and hands it to
    every party outside ``V``.
    """
    if s < 1:
        raise ValueError("need at least one party")
    if s > MAX_SET_SYSTEM_PARTIES:
        raise PoolTooLarge(f"s={s} exceeds {MAX_SET_SYSTEM_PARTIES}")
    current = [{1} for _ in range(s)]
    levels = [tuple(frozenset(t) for t in current)]
    fresh = 1
    for k in range(2, s + 1):
        for excluded in itertools.combinations(range(1, s + 1), k - 1):
            fresh += 1
            for j in range(1, s + 1):
                if j not in excluded:
                    current[j - 1].add(fresh)
        levels.append(tuple(frozenset(t) for t in current))
    return ThresholdSetSystem(s, tuple(levels))


@dataclass(frozen=True)
class ThresholdKey:
    party_id: int
    key: int


@dataclass
class ThresholdDealer:
    platform: FieldPlatform
    set_system: ThresholdSetSystem
    msg_subgroup: SubgroupSpec
    subgroups: list[SubgroupSpec]  # W_1..W_b
    keys: dict[int, ThresholdKey] = field(default_factory=dict)
    virtual_keys: list[int] = field(default_factory=list)

    @property
    def s(self) -> int:
        return self.set_system.s

    @property
    def d(self) -> int:
        return self.msg_subgroup.order

    @property
    def modulus(self) -> int:
        return self.platform.modulus

    @property
    def orders(self) -> list[int]:
        return [w.order for w in self.subgroups]


def derive_key(orders: Sequence[int], covered: Iterable[int], d: int) -> int:
    """Key for a party covering the 1-based indices ``covered``.

    The inverse representative is shifted by multiples of ``d`` until it
    shares no factor with any uncovered order, so the key cannot kill a
    subgroup its holder is not responsible for.
    """
    covered = set(covered)
    t_bar = math.prod(orders[i - 1] for i in covered)
    outside = math.prod(t for i, t in enumerate(orders, 1) if i not in covered)
    inv = mod_inverse(t_bar, d)
    while math.gcd(inv, outside) != 1:
        inv += d
    return t_bar * inv


def _threshold_orders(count: int, d: int, bits: int, rng: random.Random) -> list[int]:
    out: list[int] = []
    if bits <= 0:
        n = 3
        while len(out) < count:
            if d % n and miller_rabin(n):
                out.append(n)
            n += 2
        return out
    while len(out) < count:
        t = random_prime(bits, rng)
        if t != 2 and d % t and t not in out:
            out.append(t)
    return out


def threshold_setup(
    s: int,
    bit_size: int = 0,
    rng: random.Random | None = None,
    *,
    d: int | None = None,
    r_prime_bits: int = 0,
    msg_bits: int = 16,
    virtual: int = 2,
    jobs: int = 1,
) -> tuple[ThresholdDealer, dict[int, ThresholdKey]]:
    """Platform with ``2**s - 1`` prime-order subgroups ``W_i`` and keys for parties ``1..s``.

    ``virtual`` extra dealer-held keys are produced as primes ``= 1 (mod d)``
    outside the order set; they act as inert padding in sessions.
    """
    rng = rng if rng is not None else random.Random()
    if s > MAX_THRESHOLD_PARTIES:
        raise PoolTooLarge(f"s={s} exceeds {MAX_THRESHOLD_PARTIES}")
    system = build_set_system(s)
    b = 2**s - 1
    if d is None:
        d = 2 if bit_size <= 0 else random_prime(msg_bits, rng)
    if d < 2:
        raise ValueError("message order must be >= 2")
    orders = _threshold_orders(b, d, bit_size, rng)
    known: dict[int, Factorization] = {t: Factorization(((t, 1),)) for t in orders}
    known[d] = factorize(d)
    platform, subgroups, msg = build_field_platform(
        orders, d, rng, r_prime_bits=r_prime_bits, known_factorizations=known, jobs=jobs
    )
    keys = {j: ThresholdKey(j, derive_key(orders, system.subset(j, s), d)) for j in range(1, s + 1)}

    virtual_keys: list[int] = []
    k = 0
    while len(virtual_keys) < virtual:
        k += 1
        v = 1 + d * k
        if v not in orders and miller_rabin(v):
            virtual_keys.append(v)

    dealer = ThresholdDealer(platform, system, msg, subgroups, dict(keys), virtual_keys)
    return dealer, keys


def threshold_encrypt(dealer: ThresholdDealer, f: GroupElement, m: int, rng: random.Random) -> Ciphertext:
    """Multiply ``f`` by a nontrivial element of every ``W_i`` with ``i <= l_m``."""
    if not 1 <= m <= dealer.s:
        raise ThresholdOutOfRange(f"threshold {m} outside 1..{dealer.s}")
    if not dealer.msg_subgroup.contains(f):
        raise NotInSubgroup("message is not in F")
    l_m = level_size(dealer.s, m)
    hidden = product((dealer.subgroups[i].random_element(rng) for i in range(l_m)), dealer.modulus)
    return Ciphertext(hidden * f, tuple(range(1, dealer.s + 1)), "threshold", m)


def threshold_party_step(c: GroupElement, key: ThresholdKey) -> GroupElement:
    return c**key.key


def threshold_decrypt(ct: Ciphertext, keys: Iterable[ThresholdKey]) -> GroupElement:
    value = ct.value
    for key in keys:
        value = threshold_party_step(value, key)
    return value
