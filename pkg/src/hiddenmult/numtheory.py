"""Modular arithmetic, primality and element-order primitives.

Everything works on Python's arbitrary precision integers.  The numpy
sieves are only used for bulk tables over small ranges (oracles and
exhaustive sweeps).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    BadGroupOrder,
    FactorizationFailed,
    ModuliNotCoprime,
    ModulusTooLarge,
    NotInSubgroup,
    NotInvertible,
)

BRUTE_ORDER_BOUND = 2**24
MR_ROUNDS = 64

# Deterministic Miller-Rabin: the first 13 primes as bases are exact below this.
_DETERMINISTIC_MR_BOUND = 3_317_044_064_679_887_385_961_981
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def prime_sieve(limit: int) -> np.ndarray:
    """Boolean array ``is_prime[0..limit]``."""
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return is_prime


def smallest_prime_factor_table(limit: int) -> np.ndarray:
    """``spf[n]`` is the least prime dividing n (0 for n < 2)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    return spf


def primes_below(limit: int) -> list[int]:
    return np.flatnonzero(prime_sieve(limit - 1)).tolist() if limit > 2 else []


SMALL_PRIMES: tuple[int, ...] = tuple(primes_below(1000))


def is_prime_trial(n: int) -> bool:
    """Primality by trial division.  Slow; used as an independent oracle."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for k in range(3, math.isqrt(n) + 1, 2):
        if n % k == 0:
            return False
    return True


def miller_rabin(n: int, rounds: int = MR_ROUNDS, rng: random.Random | None = None) -> bool:
    """Return True if ``n`` is a probable prime, False if it is certainly composite.

    Small factors are removed by trial division first.  Below roughly
    3.3e24 the test is deterministic; above that ``rounds`` random bases
    are drawn from ``rng`` (a generator seeded by ``n`` when omitted) and
    the error probability is at most 4**-rounds.
    """
    if n < 2:
        return False
    for p in SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < 1_000_000:
        return True  # no factor below 1000 means no factor below sqrt(n)

    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1

    if n < _DETERMINISTIC_MR_BOUND:
        bases: Iterable[int] = _DETERMINISTIC_BASES
    else:
        rng = rng if rng is not None else random.Random(n)
        bases = (rng.randrange(2, n - 1) for _ in range(rounds))

    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


is_probable_prime = miller_rabin


def random_prime(bits: int, rng: random.Random) -> int:
    if bits < 2:
        raise ValueError("bits must be >= 2")
    if bits == 2:
        return rng.choice((2, 3))
    while True:
        n = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if miller_rabin(n):
            return n


def mod_inverse(a: int, m: int) -> int:
    """Inverse of ``a`` modulo ``m`` in ``[0, m-1]`` (0 only when m == 1)."""
    if math.gcd(a, m) != 1:
        raise NotInvertible(f"{a} has no inverse modulo {m}")
    return pow(a, -1, m)


def crt_combine(residues: Sequence[tuple[int, int]]) -> int:
    """Solve ``x = r_i (mod m_i)`` for pairwise coprime ``m_i``.

    Returns the unique solution in ``[0, prod(m_i))``.
    """
    x, modulus = 0, 1
    for r, m in residues:
        if math.gcd(modulus, m) != 1:
            raise ModuliNotCoprime(f"modulus {m} shares a factor with {modulus}")
        # x + modulus * k = r (mod m)
        k = (r - x) * pow(modulus, -1, m) % m
        x += modulus * k
        modulus *= m
    return x % modulus


@dataclass(frozen=True)
class Factorization:
    """Prime-power decomposition ``prod(p**e)`` with strictly increasing primes."""

    prime_powers: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "prime_powers", tuple((int(p), int(e)) for p, e in self.prime_powers))
        prev = 1
        for p, e in self.prime_powers:
            if p <= prev:
                raise ValueError("primes must be strictly increasing")
            if e < 1:
                raise ValueError(f"exponent of {p} must be >= 1")
            if not miller_rabin(p):
                raise ValueError(f"{p} is not prime")
            prev = p

    @classmethod
    def of(cls, n: int, *, expected: int | None = None) -> Factorization:
        fact = factorize(n)
        if expected is not None and fact.value != expected:
            raise ValueError("factorization does not match")
        return fact

    @classmethod
    def from_dict(cls, powers: dict[int, int]) -> Factorization:
        return cls(tuple(sorted((p, e) for p, e in powers.items() if e)))

    def check(self, n: int) -> Factorization:
        if self.value != n:
            raise ValueError(f"factorization multiplies to {self.value}, not {n}")
        return self

    @property
    def value(self) -> int:
        out = 1
        for p, e in self.prime_powers:
            out *= p**e
        return out

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.prime_powers]

    def as_dict(self) -> dict[int, int]:
        return dict(self.prime_powers)

    def __mul__(self, other: Factorization) -> Factorization:
        merged = self.as_dict()
        for p, e in other.prime_powers:
            merged[p] = merged.get(p, 0) + e
        return Factorization.from_dict(merged)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.prime_powers)


def factorize(n: int, bound: int = 100_000) -> Factorization:
    """Factor ``n`` by trial division up to ``bound``.

    A cofactor left over must be a probable prime, otherwise
    FactorizationFailed is raised.  This is not a general factoring routine.
    """
    if n < 1:
        raise ValueError("n must be positive")
    powers: dict[int, int] = {}
    for p in _trial_primes(bound):
        if p * p > n:
            break
        while n % p == 0:
            powers[p] = powers.get(p, 0) + 1
            n //= p
    if n > 1:
        if not miller_rabin(n):
            raise FactorizationFailed(f"cofactor {n} is composite with no factor below {bound}")
        powers[n] = powers.get(n, 0) + 1
    return Factorization.from_dict(powers)


_trial_cache: dict[int, list[int]] = {}


def _trial_primes(bound: int) -> list[int]:
    if bound not in _trial_cache:
        _trial_cache[bound] = primes_below(bound + 1)
    return _trial_cache[bound]


@dataclass(frozen=True)
class GroupElement:
    """A unit of ``Z/modulus``; the value is stored reduced."""

    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 3:
            raise ValueError("modulus must be >= 3")
        object.__setattr__(self, "value", self.value % self.modulus)
        if math.gcd(self.value, self.modulus) != 1:
            raise NotInvertible(f"{self.value} is not a unit modulo {self.modulus}")

    @classmethod
    def identity(cls, modulus: int) -> GroupElement:
        return cls(1, modulus)

    def is_identity(self) -> bool:
        return self.value == 1

    def _check(self, other: GroupElement) -> None:
        if other.modulus != self.modulus:
            raise ValueError("elements belong to different groups")

    def __mul__(self, other: GroupElement) -> GroupElement:
        self._check(other)
        return GroupElement(self.value * other.value, self.modulus)

    def __pow__(self, exp: int) -> GroupElement:
        return GroupElement(pow(self.value, exp, self.modulus), self.modulus)

    def inverse(self) -> GroupElement:
        return GroupElement(pow(self.value, -1, self.modulus), self.modulus)

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"GroupElement({self.value} mod {self.modulus})"


def mod_pow(base: GroupElement, exp: int) -> GroupElement:
    if exp < 0:
        raise ValueError("exponent must be nonnegative")
    return base**exp


def product(elements: Iterable[GroupElement], modulus: int) -> GroupElement:
    out = GroupElement.identity(modulus)
    for x in elements:
        out = out * x
    return out


def element_order_brute(g: GroupElement, bound: int = BRUTE_ORDER_BOUND) -> int:
    """Order of ``g`` by successive multiplication (oracle for small moduli)."""
    if g.modulus > bound:
        raise ModulusTooLarge(f"modulus {g.modulus} exceeds brute-force bound {bound}")
    x, n, e = g.value, g.modulus, 1
    while x != 1:
        x = x * g.value % n
        e += 1
    return e


def element_order_factored(g: GroupElement, group_order: int, fact: Factorization) -> int:
    """Exact order of ``g`` given a multiple of it and that multiple's factorization."""
    n = g.modulus
    if pow(g.value, group_order, n) != 1:
        raise BadGroupOrder(f"{g!r} ** {group_order} != 1")
    order = group_order
    for p, e in fact:
        order //= p**e
        x = pow(g.value, order, n)
        while x != 1:
            x = pow(x, p, n)
            order *= p
    return order


def has_exact_order(g: GroupElement, order: int, fact: Factorization) -> bool:
    n = g.modulus
    if pow(g.value, order, n) != 1:
        return False
    return all(pow(g.value, order // p, n) != 1 for p in fact.primes)


def discrete_log(target: GroupElement, base: GroupElement, order: int) -> int:
    """Baby-step giant-step: the unique ``x`` in ``[0, order)`` with ``base**x == target``.

    ``order`` must be the exact order of ``base``.
    """
    n = base.modulus
    m = math.isqrt(order - 1) + 1 if order > 1 else 1
    table: dict[int, int] = {}
    x = 1
    for j in range(m):
        table.setdefault(x, j)
        x = x * base.value % n
    giant = pow(base.value, -m, n)
    y = target.value
    for i in range(m + 1):
        j = table.get(y)
        if j is not None and i * m + j < order:
            return i * m + j
        y = y * giant % n
    raise NotInSubgroup(f"{target!r} is not a power of {base!r}")
