"""Build platforms whose group order has a known factorization.

A prime field F_p with p - 1 divisible by chosen orders, and a residue ring
Z_pq where each subgroup order splits across the two primes.
"""

import random

from hiddenmult.numtheory import element_order_brute
from hiddenmult.paramgen import build_field_platform, build_ring_platform, find_prime_with_divisor

rng = random.Random(0)

p, r_prime, fact = find_prime_with_divisor(210, 0, rng)
print(f"smallest prime 1 + 210*r': p = {p}, p - 1 = {fact.as_dict()}")

platform, subs, msg = build_field_platform([3, 5], 14, rng)
print(f"\nfield platform p = {platform.p}, generator {platform.generator.value}")
for name, sub in [("u1", subs[0]), ("u2", subs[1]), ("f0", msg)]:
    print(f"  {name} = {sub.generator.value:3d}  order {sub.order:2d}  brute-force order {element_order_brute(sub.generator)}")

big, subs, msg = build_field_platform([1000003, 1000033], 65537, rng, r_prime_bits=200)
print(f"\n{big.p.bit_length()}-bit field, p - 1 factored into {len(big.order_factorization.primes)} primes")

ring, subs, _ = build_ring_platform([(3, 5)], (1, 1), rng)
w = subs[0].generator
print(f"\nring Z_{ring.modulus} = Z_{ring.p} x Z_{ring.q}: w = {w.value} has order {element_order_brute(w)}")
print(f"  w mod {ring.p} = {w.value % ring.p} (order 3), w mod {ring.q} = {w.value % ring.q} (order 5)")
