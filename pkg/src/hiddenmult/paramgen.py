"""Certified primes and platforms with prescribed subgroup orders.

Two ways of producing primes live here:

* ``prime_chain`` grows a sequence of primes where each one carries a
  certificate ``(n, q, r, base)`` with ``n = 1 + r*q``.  The certificate is a
  proof of primality whenever ``r <= 4q + 2``.
* ``find_prime_with_divisor`` searches ``p = 1 + M*r'`` with Miller-Rabin,
  drawing ``r'`` smooth so that the factorization of ``p - 1`` is known.

The platform builders put subgroups of chosen orders inside ``F_p^*`` or
``Z_n^*`` (``n = p*q``).
"""

from __future__ import annotations

import enum
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ModuliNotCoprime, SearchExhausted
from .numtheory import (
    SMALL_PRIMES,
    Factorization,
    GroupElement,
    crt_combine,
    factorize,
    has_exact_order,
    is_prime_trial,
    miller_rabin,
)

SMOOTH_BOUND = 1000
CANDIDATE_BATCH = 32


class CertifyResult(enum.Enum):
    CERTIFIED = "certified"
    BASE_FAILS = "base-fails"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class PrimeCertificate:
    """Claim that ``n = 1 + r*q`` is prime, witnessed by ``base``.

    ``q`` must be an odd prime and ``r`` even.
    """

    n: int
    q: int
    r: int
    base: int

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"n={self.n} must be odd and >= 3")
        if self.r <= 0 or self.r % 2:
            raise ValueError(f"r={self.r} must be even and positive")
        if self.n != 1 + self.r * self.q:
            raise ValueError(f"{self.n} != 1 + {self.r}*{self.q}")
        if self.q % 2 == 0 or not miller_rabin(self.q):
            raise ValueError(f"q={self.q} must be an odd prime")
        if not 1 < self.base < self.n - 1:
            raise ValueError(f"base must lie strictly between 1 and {self.n - 1}")


def base_conditions_hold(n: int, r: int, a: int) -> bool:
    """``a**(n-1) == 1 (mod n)`` and ``gcd(a**r - 1, n) == 1``."""
    if pow(a, n - 1, n) != 1:
        return False
    return math.gcd(pow(a, r, n) - 1, n) == 1


def certify(cert: PrimeCertificate) -> CertifyResult:
    if cert.r > 4 * cert.q + 2:
        return CertifyResult.NOT_APPLICABLE
    if not base_conditions_hold(cert.n, cert.r, cert.base):
        return CertifyResult.BASE_FAILS
    return CertifyResult.CERTIFIED


def count_certifying_bases(n: int, r: int, fact_n: Factorization) -> int:
    """Number of residues ``a mod n`` satisfying both base conditions.

    Uses the structure of ``Z_n^*``: for each prime power ``p^e || n`` the
    residues with ``a**(n-1) == 1`` form a cyclic group of order
    ``g = gcd(n-1, p-1)``, and ``gcd(g, r)`` of those have ``a**r == 1 mod p``.
    The residues -1 and 1 never pass (r is even), so the count over
    ``1 < a < n-1`` is the same.
    """
    count = 1
    for p, _ in fact_n:
        g = math.gcd(n - 1, p - 1)
        count *= g - math.gcd(g, r)
    return count


@dataclass(frozen=True)
class PrimeChain:
    seed: int
    links: tuple[PrimeCertificate, ...] = ()

    @property
    def primes(self) -> list[int]:
        return [self.seed] + [link.n for link in self.links]

    def __len__(self) -> int:
        return len(self.links) + 1

    def verify(self) -> bool:
        """Re-check every link; the seed is checked by trial division."""
        if self.seed % 2 == 0 or not is_prime_trial(self.seed):
            return False
        q = self.seed
        for link in self.links:
            if link.q != q or certify(link) is not CertifyResult.CERTIFIED:
                return False
            q = link.n
        return True


def _has_small_factor(n: int) -> bool:
    return any(n % p == 0 and n != p for p in SMALL_PRIMES)


def next_chain_link(
    q: int,
    rng: random.Random,
    max_r_retries: int = 64,
    max_base_retries: int | None = None,
) -> PrimeCertificate:
    """Find a certified prime ``n = 1 + r*q`` with ``q + 1 <= r <= 4q + 2``.

    Candidates with a factor below 1000 are discarded before they count
    against ``max_r_retries``.  A base failing the Fermat condition proves
    the candidate composite and moves on to a fresh ``r``.
    """
    if max_base_retries is None:
        max_base_retries = 4 * q
    lo, hi = (q + 2) // 2, 2 * q + 1  # r/2 range
    tried = draws = 0
    while tried < max_r_retries:
        draws += 1
        if draws > 1000 * max_r_retries:
            break
        r = 2 * rng.randint(lo, hi)
        n = 1 + r * q
        if _has_small_factor(n):
            continue
        tried += 1
        for _ in range(max_base_retries):
            a = rng.randrange(2, n - 1)
            if pow(a, n - 1, n) != 1:
                break
            if math.gcd(pow(a, r, n) - 1, n) == 1:
                return PrimeCertificate(n, q, r, a)
    raise SearchExhausted(f"no certified prime found above q={q} after {tried} candidates")


def prime_chain(
    q_seed: int,
    target_bits: int,
    rng: random.Random,
    max_r_retries: int = 64,
    max_base_retries: int | None = None,
    link_attempts: int = 8,
) -> PrimeChain:
    """Grow certified primes from ``q_seed`` until one has ``target_bits`` bits.

    A link whose search exhausts its budget is retried with the advanced
    ``rng`` up to ``link_attempts`` times before giving up.
    """
    if q_seed % 2 == 0 or not is_prime_trial(q_seed):
        raise ValueError(f"seed {q_seed} must be an odd prime")
    links: list[PrimeCertificate] = []
    q = q_seed
    while q.bit_length() < target_bits:
        for attempt in range(link_attempts):
            try:
                link = next_chain_link(q, rng, max_r_retries, max_base_retries)
                break
            except SearchExhausted:
                if attempt == link_attempts - 1:
                    raise
        links.append(link)
        q = link.n
    return PrimeChain(q_seed, tuple(links))


def _smooth_cofactor(M: int, bits: int, rng: random.Random, bound: int) -> tuple[int, dict[int, int]]:
    """Random ``r'`` built from primes below ``bound``, coprime to M, with M*r' even."""
    powers: dict[int, int] = {}
    value = 1
    if M % 2:
        powers[2] = 1
        value = 2
    pool = [p for p in SMALL_PRIMES if p < bound and p != 2 and M % p]
    while value.bit_length() < bits:
        p = rng.choice(pool)
        powers[p] = powers.get(p, 0) + 1
        value *= p
    return value, powers


def _smooth_powers(n: int, bound: int) -> dict[int, int] | None:
    powers: dict[int, int] = {}
    for p in SMALL_PRIMES:
        if p >= bound:
            break
        while n % p == 0:
            powers[p] = powers.get(p, 0) + 1
            n //= p
    return powers if n == 1 else None


def _deterministic_cofactors(M: int, bound: int):
    """Admissible ``r' = 1, 2, 3, ...`` in increasing order."""
    k = 0
    while True:
        k += 1
        if (M * k) % 2 or math.gcd(k, M) != 1:
            continue
        powers = _smooth_powers(k, bound)
        if powers is not None:
            yield k, powers


def find_prime_with_divisor(
    M: int,
    r_prime_bits: int,
    rng: random.Random,
    *,
    fact_M: Factorization | None = None,
    smooth_bound: int = SMOOTH_BOUND,
    max_attempts: int = 100_000,
    exclude: Sequence[int] = (),
    jobs: int = 1,
) -> tuple[int, int, Factorization]:
    """Find a probable prime ``p = 1 + M*r'`` with ``p - 1`` fully factored.

    ``r'`` is coprime to ``M`` and a product of primes below ``smooth_bound``.
    With ``r_prime_bits == 0`` the smallest admissible ``r'`` is returned
    (deterministic); otherwise ``r'`` is a random smooth number of about
    ``r_prime_bits`` bits.  Candidates are tested in fixed-size batches, so
    the result for a given ``rng`` state does not depend on ``jobs``.
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    fact_M = (fact_M or factorize(M)).check(M)

    if r_prime_bits <= 0:
        source = _deterministic_cofactors(M, smooth_bound)
        draw = lambda: next(source)  # noqa: E731
    else:
        draw = lambda: _smooth_cofactor(M, r_prime_bits, rng, smooth_bound)  # noqa: E731

    executor = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        attempts = 0
        while attempts < max_attempts:
            batch = [draw() for _ in range(min(CANDIDATE_BATCH, max_attempts - attempts))]
            attempts += len(batch)
            candidates = [1 + M * rp for rp, _ in batch]
            if executor is not None:
                verdicts = list(executor.map(miller_rabin, candidates))
            else:
                verdicts = [miller_rabin(c) for c in candidates]
            for (rp, powers), p, ok in zip(batch, candidates, verdicts):
                if ok and p not in exclude:
                    return p, rp, fact_M * Factorization.from_dict(powers)
    finally:
        if executor is not None:
            executor.shutdown()
    raise SearchExhausted(f"no prime 1 + {M}*r' found in {max_attempts} attempts")


def find_generator(p: int, order_fact: Factorization, rng: random.Random) -> GroupElement:
    """Random generator of ``F_p^*`` given the factorization of ``p - 1``."""
    order_fact.check(p - 1)
    if p == 3:
        return GroupElement(2, 3)
    while True:
        g = rng.randrange(2, p - 1)
        if all(pow(g, (p - 1) // ell, p) != 1 for ell in order_fact.primes):
            return GroupElement(g, p)


@dataclass(frozen=True)
class SubgroupSpec:
    """A cyclic subgroup given by a generator of exact order ``order``."""

    generator: GroupElement
    order: int
    order_factorization: Factorization | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.order_factorization is None:
            object.__setattr__(self, "order_factorization", factorize(self.order))
        self.order_factorization.check(self.order)
        if not has_exact_order(self.generator, self.order, self.order_factorization):
            raise ValueError(f"{self.generator!r} does not have exact order {self.order}")

    @property
    def modulus(self) -> int:
        return self.generator.modulus

    def random_element(self, rng: random.Random) -> GroupElement:
        """``generator**e`` with ``e`` uniform in ``[1, order-1]``."""
        if self.order == 1:
            return self.generator
        return self.generator ** rng.randrange(1, self.order)

    def contains(self, x: GroupElement) -> bool:
        return x.modulus == self.modulus and pow(x.value, self.order, x.modulus) == 1


@dataclass(frozen=True)
class FieldPlatform:
    p: int
    order_factorization: Factorization
    generator: GroupElement

    def __post_init__(self):
        self.order_factorization.check(self.p - 1)
        if not miller_rabin(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.generator.modulus != self.p or not has_exact_order(
            self.generator, self.p - 1, self.order_factorization
        ):
            raise ValueError("generator does not generate F_p^*")

    kind = "field"

    @property
    def modulus(self) -> int:
        return self.p

    @property
    def group_order(self) -> int:
        return self.p - 1


@dataclass(frozen=True)
class RingPlatform:
    n: int
    p: int
    q: int
    fact_p: Factorization
    fact_q: Factorization

    def __post_init__(self):
        if self.p == self.q:
            raise ValueError("ring primes must be distinct")
        if self.n != self.p * self.q:
            raise ValueError("n != p*q")
        for prime, fact in ((self.p, self.fact_p), (self.q, self.fact_q)):
            if not miller_rabin(prime):
                raise ValueError(f"{prime} is not prime")
            fact.check(prime - 1)

    kind = "ring"

    @property
    def modulus(self) -> int:
        return self.n

    @property
    def group_order(self) -> int:
        return (self.p - 1) * (self.q - 1)

    @property
    def order_factorization(self) -> Factorization:
        return self.fact_p * self.fact_q


Platform = FieldPlatform | RingPlatform


def _check_pairwise_coprime(values: Sequence[int]) -> None:
    for i, a in enumerate(values):
        for b in values[i + 1 :]:
            if math.gcd(a, b) != 1:
                raise ModuliNotCoprime(f"orders {a} and {b} are not coprime")


def _product_factorization(values: Sequence[int], known: dict[int, Factorization]) -> Factorization:
    fact = Factorization(())
    for v in values:
        fact = fact * (known.get(v) or factorize(v))
    return fact


def build_field_platform(
    orders: Sequence[int],
    d: int,
    rng: random.Random,
    *,
    r_prime_bits: int = 0,
    known_factorizations: dict[int, Factorization] | None = None,
    jobs: int = 1,
) -> tuple[FieldPlatform, list[SubgroupSpec], SubgroupSpec]:
    """Prime field whose unit group has subgroups of orders ``orders`` and ``d``.

    Returns the platform, one subgroup per entry of ``orders`` (generator
    ``g**((p-1)/t)``) and the message subgroup (generator ``g**((p-1)/d)``).
    """
    orders = list(orders)
    _check_pairwise_coprime(orders + [d])
    known = known_factorizations or {}
    M = d * math.prod(orders)
    fact_M = _product_factorization(orders + [d], known)
    p, _, fact = find_prime_with_divisor(M, r_prime_bits, rng, fact_M=fact_M, jobs=jobs)
    g = find_generator(p, fact, rng)
    platform = FieldPlatform(p, fact, g)

    def sub(order: int) -> SubgroupSpec:
        return SubgroupSpec(g ** ((p - 1) // order), order, known.get(order) or factorize(order))

    return platform, [sub(t) for t in orders], sub(d)


def build_ring_platform(
    order_pairs: Sequence[tuple[int, int]],
    d_pair: tuple[int, int],
    rng: random.Random,
    *,
    r_prime_bits: int = 0,
    known_factorizations: dict[int, Factorization] | None = None,
    jobs: int = 1,
) -> tuple[RingPlatform, list[SubgroupSpec], SubgroupSpec]:
    """Residue ring ``Z_n`` with subgroups of orders ``t_i*s_i`` and ``d_p*d_q``.

    The ``t`` parts and ``d_p`` live modulo ``p``, the ``s`` parts and ``d_q``
    modulo ``q``; each generator is glued together by CRT.
    """
    ts = [t for t, _ in order_pairs]
    ss = [s for _, s in order_pairs]
    d_p, d_q = d_pair
    _check_pairwise_coprime([t * s for t, s in order_pairs] + [d_p * d_q])
    known = known_factorizations or {}

    p_orders = [x for x in ts + [d_p] if x > 1]
    q_orders = [x for x in ss + [d_q] if x > 1]
    M_p, M_q = math.prod(p_orders), math.prod(q_orders)
    # M must be at least 2; fall back to 2 and let r' supply the rest
    p, _, fact_p = find_prime_with_divisor(
        max(M_p, 2), r_prime_bits, rng,
        fact_M=_product_factorization(p_orders, known) if M_p > 1 else Factorization(((2, 1),)),
        jobs=jobs,
    )
    q, _, fact_q = find_prime_with_divisor(
        max(M_q, 2), r_prime_bits, rng,
        fact_M=_product_factorization(q_orders, known) if M_q > 1 else Factorization(((2, 1),)),
        exclude=(p,), jobs=jobs,
    )
    g_p = find_generator(p, fact_p, rng)
    g_q = find_generator(q, fact_q, rng)
    n = p * q
    platform = RingPlatform(n, p, q, fact_p, fact_q)

    def glue(t: int, s: int) -> SubgroupSpec:
        u = pow(g_p.value, (p - 1) // t, p)
        v = pow(g_q.value, (q - 1) // s, q)
        w = crt_combine([(u, p), (v, q)])
        order = t * s
        fact = (known.get(t) or factorize(t)) * (known.get(s) or factorize(s))
        return SubgroupSpec(GroupElement(w, n), order, fact)

    return platform, [glue(t, s) for t, s in order_pairs], glue(d_p, d_q)


def powmod_array(bases: np.ndarray, exp: int, n: int) -> np.ndarray:
    """Vectorized ``bases**exp mod n`` for ``n < 2**31``."""
    if n >= 2**31:
        raise ValueError("powmod_array needs n < 2**31")
    result = np.ones_like(bases, dtype=np.int64)
    b = bases.astype(np.int64) % n
    while exp:
        if exp & 1:
            result = result * b % n
        b = b * b % n
        exp >>= 1
    return result


def count_certifying_bases_brute(n: int, r: int) -> int:
    """Enumerate every ``1 < a < n-1`` and count those passing both conditions."""
    a = np.arange(2, n - 1, dtype=np.int64)
    fermat = powmod_array(a, n - 1, n) == 1
    a = a[fermat]
    residue = (powmod_array(a, r, n) - 1) % n
    return int(np.count_nonzero(np.gcd(residue, n) == 1))
