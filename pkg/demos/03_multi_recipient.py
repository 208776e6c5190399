"""Encrypt one message for an exact coalition of recipients.

Each party holds the order of its own hidden subgroup.  A ciphertext for a
coalition carries one random element from each member's subgroup; every
member raises the ciphertext to its order to strip its own factor.
"""

import itertools
import random

from hiddenmult.scheme import Variant, decode_message, decrypt, encode_message, encrypt, join_party, setup_dealer

rng = random.Random(42)

for variant in Variant:
    dealer, keys = setup_dealer(4, 0, variant, 0, rng)
    print(f"{variant.value}: p = {dealer.modulus}, message order d = {dealer.d}, "
          f"orders {sorted(k.exponent for k in keys.values())}")
    f = encode_message(1, dealer.msg_subgroup)
    ct = encrypt(dealer, f, [1, 3], rng)
    print(f"  coalition (1, 3) recovers: {decode_message(decrypt(ct, [keys[1], keys[3]]), dealer.msg_subgroup)}")
    extra = [s for k in (1, 2) for s in itertools.combinations((2, 4), k)]
    ok = [decrypt(ct, [keys[1], keys[3]] + [keys[p] for p in add]) == f for add in extra]
    print(f"  supersets that still recover: {sum(ok)}/{len(ok)}")

# Variant 2 keeps working as the pool grows.
dealer, keys = setup_dealer(3, 2, Variant.V2, 64, rng)
keys[10] = join_party(dealer, 10)
f = encode_message(31337, dealer.msg_subgroup)
ct = encrypt(dealer, f, [2, 10], rng)
print(f"\n{dealer.modulus.bit_length()}-bit platform, new party 10 decrypts with party 2:",
      decode_message(decrypt(ct, [keys[10], keys[2]]), dealer.msg_subgroup))
