"""Slow, obviously-correct reference implementations used as test oracles."""


def order_by_multiplication(g: int, n: int) -> int:
    x, k = g % n, 1
    while x != 1:
        x = x * g % n
        k += 1
    return k


def is_prime_naive(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, int(n**0.5) + 1))


def inverse_by_search(a: int, m: int) -> int | None:
    return next((x for x in range(m) if a * x % m == 1 % m), None)
