"""Attacks that succeed once element orders can be computed.

The order oracle is an explicit capability object: it holds a
factorization of the group order that a real attacker would not have.
Each attack refuses to run without one.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import Inconclusive, OracleRequired
from .numtheory import Factorization, GroupElement, element_order_factored, factorize, mod_inverse, random_prime
from .scheme import DealerSecret, Variant, encode_message, encrypt, setup_dealer


class OrderOracle:
    """Exact element orders in a group whose order factorization is known."""

    def __init__(self, group_order: int, factorization: Factorization):
        self.group_order = group_order
        self.factorization = factorization.check(group_order)
        self.calls = 0

    @classmethod
    def for_platform(cls, platform) -> OrderOracle:
        return cls(platform.group_order, platform.order_factorization)

    def __call__(self, x: GroupElement) -> int:
        self.calls += 1
        return element_order_factored(x, self.group_order, self.factorization)

    def prime_divisors(self, order: int) -> set[int]:
        return {p for p in self.factorization.primes if order % p == 0}


def _require(oracle: OrderOracle | None) -> OrderOracle:
    if not isinstance(oracle, OrderOracle):
        raise OracleRequired("this attack needs an order oracle")
    return oracle


def order_oracle_attack(c: GroupElement, e: int, oracle: OrderOracle) -> GroupElement:
    """Recover ``m`` from ``c = m**e`` with a one-time exponent inverting ``e`` modulo ``|c|``."""
    oracle = _require(oracle)
    t = oracle(c)
    return c ** mod_inverse(e, t)


def semantic_distinguisher(c: GroupElement, candidates: Sequence[GroupElement], oracle: OrderOracle) -> int:
    """Index of the candidate that ``c`` hides.

    Stripping the true message leaves only the hidden multiplier, whose
    order shares no prime with any message order.  A wrong guess leaves a
    nontrivial message-subgroup residue behind, and its order does.
    """
    oracle = _require(oracle)
    if len(set(candidates)) < len(candidates):
        raise Inconclusive("candidates are not distinct")
    message_primes: set[int] = set()
    for m in candidates:
        message_primes |= oracle.prime_divisors(oracle(m))
    c_inv = c.inverse()
    passing = [
        i for i, m in enumerate(candidates) if not oracle.prime_divisors(oracle(c_inv * m)) & message_primes
    ]
    if len(passing) != 1:
        raise Inconclusive(f"{len(passing)} candidates survive")
    return passing[0]


@dataclass(frozen=True)
class ToyRSA:
    p: int
    q: int
    e: int

    @property
    def n(self) -> int:
        return self.p * self.q

    @property
    def phi(self) -> int:
        return (self.p - 1) * (self.q - 1)

    def oracle(self) -> OrderOracle:
        return OrderOracle(self.phi, factorize(self.p - 1) * factorize(self.q - 1))


def random_toy_rsa(rng: random.Random, bits: int = 12) -> ToyRSA:
    while True:
        p, q = random_prime(bits, rng), random_prime(bits, rng)
        if p == q or p == 2 or q == 2:
            continue
        phi = (p - 1) * (q - 1)
        e = rng.randrange(3, phi, 2)
        if math.gcd(e, phi) == 1:
            return ToyRSA(p, q, e)


def rsa_order_sweep(trials: int, rng: random.Random, bits: int = 12) -> list[dict]:
    rows = []
    for i in range(trials):
        rsa = random_toy_rsa(rng, bits)
        n = rsa.n
        while True:
            m = rng.randrange(2, n)
            if math.gcd(m, n) == 1:
                break
        c = GroupElement(pow(m, rsa.e, n), n)
        oracle = rsa.oracle()
        recovered = order_oracle_attack(c, rsa.e, oracle)
        rows.append(
            {"trial": i, "n": n, "e": rsa.e, "m": m, "c": c.value, "recovered": recovered.value,
             "success": int(recovered.value == m), "oracle_calls": oracle.calls}
        )
    return rows


def desk_distinguisher_dealer(rng: random.Random) -> DealerSecret:
    """Small Variant 2 dealer with a message subgroup of order 15."""
    dealer, _ = setup_dealer(3, 0, Variant.V2, 0, rng, d=15)
    return dealer


def distinguisher_sweep(trials: int, rng: random.Random, dealer: DealerSecret | None = None) -> list[dict]:
    dealer = dealer or desk_distinguisher_dealer(rng)
    parties = sorted(dealer.assignment)
    rows = []
    for i in range(trials):
        m_true, m_alt = rng.sample(range(dealer.d), 2)
        f = encode_message(m_true, dealer.msg_subgroup)
        alt = encode_message(m_alt, dealer.msg_subgroup)
        coalition = rng.sample(parties, rng.randint(1, len(parties)))
        ct = encrypt(dealer, f, coalition, rng)
        candidates = [f, alt] if rng.random() < 0.5 else [alt, f]
        oracle = OrderOracle.for_platform(dealer.platform)
        try:
            guess = semantic_distinguisher(ct.value, candidates, oracle)
            success = int(candidates[guess] == f)
            verdict = "decided"
        except Inconclusive:
            success, verdict = 0, "inconclusive"
        rows.append(
            {"trial": i, "modulus": dealer.modulus, "coalition": "-".join(map(str, sorted(coalition))),
             "m_true": m_true, "m_alt": m_alt, "verdict": verdict, "success": success,
             "oracle_calls": oracle.calls}
        )
    return rows


def write_csv(rows: Iterable[dict], path: str | Path) -> None:
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
