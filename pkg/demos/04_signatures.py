"""Coalition signatures: each signer multiplies in a random element of its subgroup.

A verifier who knows the orders checks f_sign ** prod(t_i) == f.
"""

import random

from hiddenmult.scheme import SignedDocument, Variant, encode_message, setup_dealer, sign_document, verify_signature

rng = random.Random(7)
dealer, _ = setup_dealer(4, 0, Variant.V2, 0, rng, d=3)
sign_keys, verifier = dealer.sign_keys(), dealer.verifier_keys()

f = encode_message(2, dealer.msg_subgroup)
sd = sign_document(sign_keys, [1, 2, 4], f, rng)
print(f"document {f.value}, signed value {sd.signed_value.value}, coalition {sd.coalition}")
print("honest signature:", verify_signature(sd, verifier, dealer.d))

forged = SignedDocument(f, sd.signed_value * dealer.subgroup_of(3).random_element(rng), sd.coalition)
print("with a factor from party 3 mixed in:", verify_signature(forged, verifier, dealer.d))

claimed = SignedDocument(f, sd.signed_value, (1, 2))
print("claiming a smaller coalition:", verify_signature(claimed, verifier, dealer.d))
