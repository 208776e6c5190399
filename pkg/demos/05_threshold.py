"""Threshold decryption where the sender picks m per message.

Subgroup W_i stands for index i of a cover set-system; any m parties cover
indices 1..l_m together, and any m - 1 of them miss one.
"""

import itertools
import random

from hiddenmult.protocol import run_threshold_session
from hiddenmult.scheme import encode_message
from hiddenmult.threshold import build_set_system, level_size, threshold_decrypt, threshold_encrypt, threshold_setup

system = build_set_system(3)
for k in (1, 2, 3):
    print(f"level {k} (l_k = {level_size(3, k)}):", [sorted(system.subset(j, k)) for j in (1, 2, 3)])

rng = random.Random(3)
dealer, keys = threshold_setup(4, 0, rng, d=5)
print(f"\n4 parties, {len(dealer.subgroups)} subgroups, p = {dealer.modulus}")
f = encode_message(3, dealer.msg_subgroup)
for m in range(1, 5):
    ct = threshold_encrypt(dealer, f, m, rng)
    sizes = {size: all(threshold_decrypt(ct, [keys[j] for j in c]) == f
                       for c in itertools.combinations(range(1, 5), size)) for size in range(1, 5)}
    print(f"  m = {m}: coalition size -> recovers: {sizes}")

t = run_threshold_session(dealer, keys, [2, 4], 3, 2, mode="server", virtual_padding=True, seed=1)
print(f"\nserver session with virtual padding: {t.status.value}, message {t.message}, steps {t.step_order()}")
