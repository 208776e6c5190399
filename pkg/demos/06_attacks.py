"""What an order oracle buys an attacker.

With element orders available, RSA-style exponentiation is undone with a
one-time exponent, and a hidden-multiplier ciphertext can be matched to
its plaintext.  Without the oracle neither attack runs at all.
"""

import random

from hiddenmult.analysis import ToyRSA, distinguisher_sweep, order_oracle_attack, rsa_order_sweep
from hiddenmult.errors import OracleRequired
from hiddenmult.numtheory import GroupElement

rsa = ToyRSA(7, 11, 7)
c = GroupElement(pow(10, 7, 77), 77)
print(f"toy RSA n=77 e=7: c = {c.value}, recovered m = {order_oracle_attack(c, 7, rsa.oracle()).value}")

rng = random.Random(0)
rows = rsa_order_sweep(100, rng)
print(f"random toy RSA: {sum(r['success'] for r in rows)}/100 recovered")

rows = distinguisher_sweep(100, rng)
print(f"distinguisher on a desk platform: {sum(r['success'] for r in rows)}/100 correct")

try:
    order_oracle_attack(c, 7, None)
except OracleRequired as exc:
    print("without the oracle:", exc)
