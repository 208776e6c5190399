"""Grow a chain of certified primes, each one more than the square of the last.

Every link n = 1 + r*q comes with a base a that proves n prime given that
q is prime, so the whole chain is checked from the seed 3 upward.
"""

import random
import time

from hiddenmult.paramgen import CertifyResult, PrimeCertificate, certify, count_certifying_bases_brute, prime_chain

# A hand-checked link first: 13 = 1 + 4*3 with base 2.
link = PrimeCertificate(13, 3, 4, 2)
print("13 = 1 + 4*3, base 2:", certify(link).value)

# 25 = 1 + 8*3 looks similar, yet no base works.
print("25 = 1 + 8*3, any base:", {certify(PrimeCertificate(25, 3, 8, a)).value for a in range(2, 24)})

# For a prime link almost every base works: all but r of the n-1 residues.
n, q, r = 157, 13, 12
passing = count_certifying_bases_brute(n, r)
print(f"157: {passing} of {n - 3} candidate bases certify ({passing / (n - 3):.3f}; 1 - 1/q = {1 - 1 / q:.3f})")

start = time.perf_counter()
chain = prime_chain(3, 512, random.Random(1))
elapsed = time.perf_counter() - start
print(f"\nchain of {len(chain)} primes in {elapsed * 1000:.1f} ms, re-verified: {chain.verify()}")
for prev, cert in zip(chain.primes, chain.links):
    print(f"  {cert.n.bit_length():4d} bits  r: {cert.r.bit_length():3d} bits  base: {cert.base.bit_length():3d} bits"
          f"  n > q^2: {cert.n > prev * prev}")
assert all(certify(c) is CertifyResult.CERTIFIED for c in chain.links)
