"""Acceptance checks shared by ``hiddenmult selftest`` and the test suite.

Each check returns a :class:`CriterionResult`.  ``level="full"`` runs at the
stated sizes and tolerances; ``level="desk"`` shrinks the search ranges so
the whole suite finishes in seconds.
"""

from __future__ import annotations

import contextlib
import hashlib
import io
import itertools
import math
import random
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .analysis import distinguisher_sweep, rsa_order_sweep, semantic_distinguisher
from .errors import OracleRequired
from .numtheory import (
    Factorization,
    GroupElement,
    crt_combine,
    element_order_brute,
    is_prime_trial,
    primes_below,
    smallest_prime_factor_table,
)
from .paramgen import (
    CertifyResult,
    PrimeCertificate,
    SubgroupSpec,
    build_field_platform,
    build_ring_platform,
    certify,
    count_certifying_bases,
    count_certifying_bases_brute,
    prime_chain,
)
from .scheme import Variant, decrypt, encode_message, encrypt, setup_dealer, sign_document, verify_signature
from .threshold import build_set_system, level_size, threshold_decrypt, threshold_encrypt, threshold_setup


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _factor_with_table(n: int, spf: np.ndarray) -> Factorization:
    powers: dict[int, int] = {}
    while n > 1:
        p = int(spf[n])
        powers[p] = powers.get(p, 0) + 1
        n //= p
    return Factorization.from_dict(powers)


def _instances(limit: int, bounded: bool):
    """All ``(b, q, r)`` with ``b = 1 + r*q < limit``, q an odd prime, r even."""
    for q in primes_below(limit // 2 + 1):
        if q == 2:
            continue
        r_max = (limit - 2) // q
        if bounded:
            r_max = min(r_max, 4 * q + 2)
        for r in range(2, r_max + 1, 2):
            yield 1 + r * q, q, r


def check_soundness(level: str = "full") -> tuple[bool, str]:
    limit = 10**6 if level == "full" else 10**5
    brute_limit = 5000 if level == "full" else 1500
    spf = smallest_prime_factor_table(limit)
    instances = composites = brute_checked = 0
    bad: list[tuple[int, int, int]] = []
    for b, q, r in _instances(limit, bounded=True):
        instances += 1
        if spf[b] == b:
            continue
        composites += 1
        count = count_certifying_bases(b, r, _factor_with_table(b, spf))
        if b < brute_limit:
            brute_checked += 1
            if count_certifying_bases_brute(b, r) != count:
                bad.append((b, q, r))
                continue
        if count:
            bad.append((b, q, r))
    detail = f"{instances} instances, {composites} composite, {brute_checked} brute-checked, {len(bad)} certified composites"
    return not bad, detail


def check_divisor_congruence(level: str = "full") -> tuple[bool, str]:
    limit = 10**6 if level == "full" else 10**5
    brute_limit = 3000 if level == "full" else 1000
    spf = smallest_prime_factor_table(limit)
    passing = composites = brute_checked = 0
    bad: list[tuple[int, int, int]] = []
    for b, q, r in _instances(limit, bounded=False):
        fact = _factor_with_table(b, spf)
        count = count_certifying_bases(b, r, fact)
        if b < brute_limit and spf[b] != b:
            brute_checked += 1
            if count_certifying_bases_brute(b, r) != count:
                bad.append((b, q, r))
        if count == 0:
            continue
        passing += 1
        composites += spf[b] != b
        if any((p - 1) % (2 * q) for p in fact.primes):
            bad.append((b, q, r))
    detail = (
        f"{passing} instances with a passing base ({composites} composite), "
        f"{brute_checked} brute-checked, {len(bad)} violations"
    )
    return not bad, detail


def check_base_statistics(level: str = "full") -> tuple[bool, str]:
    rng = random.Random(3)
    wanted = 50 if level == "full" else 10
    primes = [q for q in primes_below(500) if q > 100]
    worst = 1.0
    found = 0
    while found < wanted:
        q = rng.choice(primes)
        r = rng.randrange(2, 4 * q + 3, 2)
        b = 1 + r * q
        if not is_prime_trial(b):
            continue
        if not any(certify(PrimeCertificate(b, q, r, a)) is CertifyResult.CERTIFIED for a in range(2, b - 1)):
            return False, f"prime {b} has no certifying base"
        fraction = count_certifying_bases_brute(b, r) / (b - 3)
        worst = min(worst, fraction)
        found += 1
    return abs(1 - worst) <= 0.02, f"{found} certified primes, lowest passing fraction {worst:.4f}"


def check_prime_chain(level: str = "full") -> tuple[bool, str]:
    start = time.perf_counter()
    chain = prime_chain(3, 256, random.Random(2024))
    elapsed = time.perf_counter() - start
    primes = chain.primes
    squares = all(b > a * a for a, b in zip(primes, primes[1:]))
    ok = chain.verify() and squares and primes[-1].bit_length() >= 256 and elapsed < 60
    return ok, f"{len(chain)} primes, top {primes[-1].bit_length()} bits, verified, built in {elapsed:.2f}s"


def check_subgroup_exactness(level: str = "full") -> tuple[bool, str]:
    rng = random.Random(5)
    small = [q for q in primes_below(30) if q > 2]
    checked = 0
    platforms = 20 if level == "full" else 5
    for _ in range(platforms):
        while True:
            orders = rng.sample(small, rng.randint(2, 3))
            d = rng.choice([2, 3, 4, 9, 15])
            if all(math.gcd(d, t) == 1 for t in orders):
                break
        platform, subs, msg = build_field_platform(orders, d, rng)
        if platform.p >= 2**24:
            return False, f"platform modulus {platform.p} too large"
        for sub in [*subs, msg]:
            checked += 1
            if element_order_brute(sub.generator) != sub.order:
                return False, f"order mismatch for {sub}"
    ring, subs, msg = build_ring_platform([(3, 5)], (1, 1), rng)
    for sub in subs:
        checked += 1
        if element_order_brute(sub.generator) != sub.order:
            return False, f"ring order mismatch for {sub}"
    w = crt_combine([(2, 7), (3, 11)])
    example = SubgroupSpec(GroupElement(w, 77), 15)
    ok = (ring.p, ring.q) == (7, 11) and w == 58 and element_order_brute(example.generator) == 15
    return ok, f"{checked} subgroup orders match brute force; ring example {w} mod 77 has order 15"


def check_round_trips(level: str = "full") -> tuple[bool, str]:
    rng = random.Random(6)
    s = 4
    parties = range(1, s + 1)
    witnesses = 0
    trials = 0
    for variant in (Variant.V1_MINUS, Variant.V1_PLUS, Variant.V2):
        dealer, keys = setup_dealer(s, 0, variant, 0, rng)
        for size in parties:
            for coalition in itertools.combinations(parties, size):
                supersets = [
                    coalition + extra
                    for k in range(1, s - size + 1)
                    for extra in itertools.combinations([p for p in parties if p not in coalition], k)
                ]
                for _ in range(10):
                    f = encode_message(rng.randrange(dealer.d), dealer.msg_subgroup)
                    ct = encrypt(dealer, f, coalition, rng)
                    trials += 1
                    if decrypt(ct, [keys[p] for p in coalition]) != f:
                        return False, f"{variant.value} failed for coalition {coalition}"
                    for sup in supersets:
                        got = decrypt(ct, [keys[p] for p in sup])
                        if variant is Variant.V2 and got != f:
                            return False, f"v2 superset {sup} of {coalition} failed"
                        if variant.is_v1 and got != f:
                            witnesses += 1
    return witnesses > 0, f"{trials} round trips exact, {witnesses} V1 superset failure witnesses"


def check_threshold(level: str = "full") -> tuple[bool, str]:
    rng = random.Random(7)
    s = 4
    start = time.perf_counter()
    cases = 0
    for d in (2, 5):
        dealer, keys = threshold_setup(s, 0, rng, d=d)
        for m in range(1, s + 1):
            for size in range(0, s + 1):
                for coalition in itertools.combinations(range(1, s + 1), size):
                    for _ in range(3):
                        f = encode_message(rng.randrange(d), dealer.msg_subgroup)
                        ct = threshold_encrypt(dealer, f, m, rng)
                        recovered = threshold_decrypt(ct, [keys[j] for j in coalition]) == f
                        cases += 1
                        if recovered != (size >= m):
                            return False, f"m={m} coalition {coalition} recovered={recovered}"
    elapsed = time.perf_counter() - start
    return elapsed < 120, f"{cases} cases, recovery iff |C| >= m, {elapsed:.2f}s"


def check_set_system(level: str = "full") -> tuple[bool, str]:
    checked = 0
    for s in range(1, 7):
        system = build_set_system(s)
        if len(system.union(range(1, s + 1), s)) != 2**s - 1:
            return False, f"s={s}: |T(s)| != 2^s - 1"
        for k in range(1, s + 1):
            l_k = 1 + sum(math.comb(s, j) for j in range(1, k))
            full = frozenset(range(1, l_k + 1))
            if level_size(s, k) != l_k or system.sizes[k - 1] != l_k:
                return False, f"s={s} k={k}: wrong l_k"
            if system.union(range(1, s + 1), k) != full:
                return False, f"s={s} k={k}: level does not span 1..l_k"
            for group in itertools.combinations(range(1, s + 1), k):
                checked += 1
                if system.union(group, k) != full:
                    return False, f"s={s} k={k}: {group} does not cover"
            for group in itertools.combinations(range(1, s + 1), k - 1):
                checked += 1
                if system.union(group, k) == full:
                    return False, f"s={s} k={k}: {group} covers with k-1 parties"
    return True, f"{checked} coalitions checked for s <= 6"


def check_signatures(level: str = "full") -> tuple[bool, str]:
    rng = random.Random(9)
    dealer, _ = setup_dealer(5, 0, Variant.V2, 0, rng, d=3)
    sign_keys = dealer.sign_keys()
    verifier = dealer.verifier_keys()
    parties = sorted(sign_keys)
    accepted = rejected = 0
    for _ in range(100):
        coalition = rng.sample(parties, rng.randint(1, len(parties)))
        f = encode_message(rng.randrange(dealer.d), dealer.msg_subgroup)
        sd = sign_document(sign_keys, coalition, f, rng)
        accepted += verify_signature(sd, verifier, dealer.d)
    for _ in range(100):
        coalition = rng.sample(parties, rng.randint(1, len(parties) - 1))
        outsider = rng.choice([p for p in parties if p not in coalition])
        f = encode_message(rng.randrange(dealer.d), dealer.msg_subgroup)
        sd = sign_document(sign_keys, coalition, f, rng)
        tamper = dealer.subgroup_of(outsider).random_element(rng)
        forged = type(sd)(sd.document, sd.signed_value * tamper, sd.coalition)
        rejected += not verify_signature(forged, verifier, dealer.d)
    return accepted == 100 and rejected == 100, f"{accepted}/100 accepted, {rejected}/100 tampered rejected"


def _hash_tree(root: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(root.rglob("*.json")):
        h.update(path.relative_to(root).as_posix().encode())
        h.update(path.read_bytes())
    return h.hexdigest()


def check_key_reuse(level: str = "full") -> tuple[bool, str]:
    from . import formats

    rng = random.Random(10)
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        dealer, keys = setup_dealer(4, 0, Variant.V2, 0, rng, d=7)
        tdealer, tkeys = threshold_setup(4, 0, rng, d=7)
        binding, tbinding = formats.platform_hash(dealer.platform), formats.platform_hash(tdealer.platform)
        for pid, key in keys.items():
            formats.write(root / "v2" / f"party-{pid}.json", formats.key_record(key, binding))
        for pid, key in tkeys.items():
            formats.write(root / "threshold" / f"party-{pid}.json", formats.key_record(key, tbinding))
        before = _hash_tree(root)
        ok = 0
        for i in range(100):
            f = encode_message(rng.randrange(7), dealer.msg_subgroup if i % 2 == 0 else tdealer.msg_subgroup)
            if i % 2 == 0:
                coalition = rng.sample(range(1, 5), rng.randint(1, 4))
                ct = encrypt(dealer, f, coalition, rng)
                loaded = [formats.key_from_record(formats.read(root / "v2" / f"party-{p}.json"), binding) for p in coalition]
                ok += decrypt(ct, loaded) == f
            else:
                m = rng.randint(1, 4)
                coalition = rng.sample(range(1, 5), rng.randint(m, 4))
                ct = threshold_encrypt(tdealer, f, m, rng)
                loaded = [
                    formats.key_from_record(formats.read(root / "threshold" / f"party-{p}.json"), tbinding)
                    for p in coalition
                ]
                ok += threshold_decrypt(ct, loaded) == f
        after = _hash_tree(root)
    unchanged = before == after and dealer.decrypt_keys() == keys and tdealer.keys == tkeys
    return ok == 100 and unchanged, f"{ok}/100 messages recovered, key files unchanged: {before == after}"


def check_attacks(level: str = "full") -> tuple[bool, str]:
    rng = random.Random(11)
    rsa_rows = rsa_order_sweep(100, rng)
    dist_rows = distinguisher_sweep(100, rng)
    rsa_wins = sum(r["success"] for r in rsa_rows)
    dist_rate = sum(r["success"] for r in dist_rows) / len(dist_rows)
    dealer, _ = setup_dealer(2, 0, Variant.V2, 0, rng, d=15)
    f = encode_message(1, dealer.msg_subgroup)
    ct = encrypt(dealer, f, [1, 2], rng)
    blocked = 0
    for fake in (None, object(), lambda x: 1):
        try:
            semantic_distinguisher(ct.value, [f, encode_message(2, dealer.msg_subgroup)], fake)  # type: ignore[arg-type]
        except OracleRequired:
            blocked += 1
    ok = rsa_wins == 100 and dist_rate == 1.0 and blocked == 3
    return ok, f"rsa-order {rsa_wins}/100, distinguisher rate {dist_rate:.2f}, {blocked}/3 oracle-free calls refused"


DETERMINISM_SCRIPT: list[list[str]] = [
    ["paramgen", "field", "--orders", "3,5", "--d", "14", "--seed", "1"],
    ["paramgen", "ring", "--orders", "3:5,7:11", "--d", "2:1", "--bits", "20", "--seed", "2"],
    ["paramgen", "chain", "--bits", "128", "--seed", "3"],
    ["setup", "--variant", "v2", "--parties", "3", "--reserve", "1", "--seed", "4"],
    ["pool", "join", "--party", "4"],
    ["pool", "leave", "--party", "2"],
    ["encrypt", "--coalition", "1,3", "--message", "1", "--out", "ct.json", "--seed", "5"],
    ["session", "decrypt", "--coalition", "1,3", "--ciphertext", "ct.json", "--mode", "room",
     "--order", "shuffle", "--seed", "6", "--transcript", "decrypt.jsonl"],
    ["session", "sign", "--coalition", "1,4", "--message", "1", "--seed", "7", "--out", "signed.json",
     "--transcript", "sign.jsonl"],
    ["verify-sign", "--doc", "signed.json", "--coalition", "1,4"],
    ["setup", "--variant", "threshold", "--parties", "3", "--seed", "8"],
    ["threshold-encrypt", "--m", "2", "--message", "1", "--out", "tct.json", "--seed", "9"],
    ["session", "threshold", "--coalition", "1,2", "--ciphertext", "tct.json", "--mode", "server",
     "--seed", "10", "--transcript", "threshold.jsonl"],
    ["attack", "rsa-order", "--trials", "20", "--seed", "11", "--out", "rsa.csv"],
    ["attack", "distinguish", "--trials", "20", "--seed", "12", "--out", "dist.csv"],
]


def run_cli_script(root: Path, script: list[list[str]] = DETERMINISM_SCRIPT) -> list[tuple[int, str]]:
    """Run CLI commands inside ``root``; returns ``(exit code, stdout)`` per command."""
    import os

    from .cli import main

    out = []
    cwd = os.getcwd()
    os.chdir(root)
    try:
        for argv in script:
            buf = io.StringIO()
            with contextlib.redirect_stdout(buf):
                code = main(argv)
            out.append((code, buf.getvalue()))
    finally:
        os.chdir(cwd)
    return out


def _snapshot(root: Path) -> dict[str, bytes]:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def check_determinism(level: str = "full") -> tuple[bool, str]:
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        first, second = run_cli_script(Path(a)), run_cli_script(Path(b))
        files_a, files_b = _snapshot(Path(a)), _snapshot(Path(b))
    failed = [argv[0] for argv, (code, _) in zip(DETERMINISM_SCRIPT, first) if code != 0]
    if failed:
        return False, f"commands failed: {failed}"
    same = first == second and files_a == files_b
    return same, f"{len(DETERMINISM_SCRIPT)} commands, {len(files_a)} files, byte-identical: {same}"


CRITERIA: list[tuple[int, str, Callable[[str], tuple[bool, str]]]] = [
    (1, "certificate soundness", check_soundness),
    (2, "divisor congruence", check_divisor_congruence),
    (3, "base-success statistics", check_base_statistics),
    (4, "prime chain", check_prime_chain),
    (5, "subgroup exactness", check_subgroup_exactness),
    (6, "V1/V2 round trips", check_round_trips),
    (7, "threshold scheme", check_threshold),
    (8, "cover set-system", check_set_system),
    (9, "signatures", check_signatures),
    (10, "key reuse", check_key_reuse),
    (11, "attack dichotomy", check_attacks),
    (12, "CLI determinism", check_determinism),
]


def run_criterion(number: int, level: str = "full") -> CriterionResult:
    _, name, fn = CRITERIA[number - 1]
    start = time.perf_counter()
    passed, detail = fn(level)
    return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - start)


def run_all(level: str = "desk") -> list[CriterionResult]:
    return [run_criterion(n, level) for n, _, _ in CRITERIA]
