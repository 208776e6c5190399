"""Command line front end.

Exit codes: 0 success, 2 usage, 3 file format, 4 search exhausted,
5 cryptographic failure (including rejected signatures and failed sessions).
"""

from __future__ import annotations

import argparse
import math
import random
import sys
from pathlib import Path
from typing import Sequence

from . import formats
from .analysis import distinguisher_sweep, rsa_order_sweep, write_csv
from .errors import FormatError, HiddenMultError
from .paramgen import build_field_platform, build_ring_platform, prime_chain
from .protocol import Status, run_decrypt_session, run_sign_session, run_threshold_session
from .scheme import (
    Variant,
    encode_message,
    encrypt,
    join_party,
    leave_party,
    setup_dealer,
    verify_signature,
)
from .threshold import threshold_encrypt, threshold_setup

DEALER_FILE = "dealer.json"
THRESHOLD_FILE = "threshold-dealer.json"


def _ids(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated ids, got {text!r}") from None


def _pairs(text: str) -> list[tuple[int, int]]:
    try:
        return [tuple(int(v) for v in item.split(":")) for item in text.split(",")]  # type: ignore[misc]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected t:s pairs, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hiddenmult", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--dir", type=Path, default=Path("."), help="working directory for dealer and key files")
    # lets --dir appear after the subcommand too
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dir", type=Path, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, **kw) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], **kw)

    p = add("paramgen", help="generate a platform or a certified prime chain")
    p.add_argument("kind", choices=["field", "ring", "chain"])
    p.add_argument("--orders", default="3,5", help="field: t1,t2,...  ring: t1:s1,t2:s2,...")
    p.add_argument("--d", default="2", help="field: d   ring: dp:dq")
    p.add_argument("--bits", type=int, default=0, help="minimum bit length of the prime(s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-prime", type=int, default=3, help="chain: odd prime to start from")
    p.add_argument("--jobs", type=int, default=1)

    p = add("setup", help="create a dealer and per-party key files")
    p.add_argument("--variant", choices=["v1", "v1-", "v1+", "v2", "threshold"], default="v2")
    p.add_argument("--parties", type=int, required=True)
    p.add_argument("--reserve", type=int, default=0)
    p.add_argument("--bits", type=int, default=0, help="bit size of subgroup orders (0 = desk scale)")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--platform", choices=["field", "ring"], default="field")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)

    p = add("pool", help="add or retire a party")
    p.add_argument("action", choices=["join", "leave"])
    p.add_argument("--party", type=int, required=True)

    p = add("encrypt", help="encrypt a message for a coalition")
    p.add_argument("--coalition", type=_ids, required=True)
    p.add_argument("--message", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = add("threshold-encrypt", help="encrypt with a per-message threshold")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--message", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = add("session", help="run a decryption, signing or threshold session")
    p.add_argument("kind", choices=["decrypt", "sign", "threshold"])
    p.add_argument("--mode", choices=["broadcast", "room", "server"], default="broadcast")
    p.add_argument("--order", choices=["seq", "shuffle"], default="seq")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coalition", type=_ids, required=True)
    p.add_argument("--message", type=int, default=None)
    p.add_argument("--ciphertext", type=Path, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--intruders", type=_ids, default=[])
    p.add_argument("--virtual", action="store_true", help="server pads with dealer-held virtual keys")
    p.add_argument("--transcript", type=Path, default=None)
    p.add_argument("--audience", choices=["public", "room", "server"], default="server",
                   help="which events the transcript file shows (default: all)")
    p.add_argument("--out", type=Path, default=None, help="sign: where to write the signed document")

    p = add("verify-sign", help="verify a coalition signature")
    p.add_argument("--doc", type=Path, required=True)
    p.add_argument("--coalition", type=_ids, required=True)

    p = add("attack", help="run an attack sweep and write a CSV report")
    p.add_argument("kind", choices=["rsa-order", "distinguish"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)

    p = add("selftest", help="run the acceptance checks")
    p.add_argument("--level", choices=["desk", "full"], default="desk")
    return parser


# -- helpers ----------------------------------------------------------------


def _load_dealer(root: Path):
    return formats.dealer_from_record(formats.read(root / DEALER_FILE, "dealer"))


def _load_threshold(root: Path):
    return formats.threshold_dealer_from_record(formats.read(root / THRESHOLD_FILE, "threshold-dealer"))


def _key_path(root: Path, pid: int, kind: str = "party") -> Path:
    return root / "keys" / f"{kind}-{pid}.json"


def _load_keys(root: Path, coalition: Sequence[int], binding: str, kind: str = "party", modulus=None):
    keys = {}
    for pid in coalition:
        path = _key_path(root, pid, kind)
        if not path.exists():
            raise FormatError(f"no key file for party {pid}")
        keys[pid] = formats.key_from_record(formats.read(path), binding, modulus)
    return keys


def _write_keys(root: Path, keys: dict, binding: str, kind: str = "party") -> None:
    (root / "keys").mkdir(parents=True, exist_ok=True)
    for pid, key in keys.items():
        formats.write(_key_path(root, pid, kind), formats.key_record(key, binding))


# -- commands ---------------------------------------------------------------


def cmd_paramgen(args) -> int:
    rng = random.Random(args.seed)
    root: Path = args.dir
    root.mkdir(parents=True, exist_ok=True)
    if args.kind == "chain":
        chain = prime_chain(args.seed_prime, args.bits, rng)
        formats.write(root / "chain.json", formats.chain_record(chain))
        print(f"prime chain of length {len(chain)} ending in a {chain.primes[-1].bit_length()}-bit prime")
        return 0
    if args.kind == "field":
        orders, d = _ids(args.orders), int(args.d)
        M = d * math.prod(orders)
        r_bits = max(0, args.bits - M.bit_length())
        platform, subs, msg = build_field_platform(orders, d, rng, r_prime_bits=r_bits, jobs=args.jobs)
        cert = formats._record(
            "lucas-certificate",
            platform=formats.platform_hash(platform),
            p=formats.to_hex(platform.p),
            generator=formats.to_hex(platform.generator.value),
            order_factorization=formats.factorization_to_list(platform.order_factorization),
        )
    else:
        pairs = _pairs(args.orders)
        dp, dq = _pairs(args.d)[0]
        M = max(math.prod(t for t, _ in pairs) * dp, math.prod(s for _, s in pairs) * dq)
        r_bits = max(0, args.bits - M.bit_length())
        platform, subs, msg = build_ring_platform(pairs, (dp, dq), rng, r_prime_bits=r_bits, jobs=args.jobs)
        cert = formats._record(
            "ring-certificate",
            platform=formats.platform_hash(platform),
            p=formats.to_hex(platform.p),
            q=formats.to_hex(platform.q),
            fact_p=formats.factorization_to_list(platform.fact_p),
            fact_q=formats.factorization_to_list(platform.fact_q),
        )
    secret = formats.platform_record(platform, public=False)
    secret["subgroups"] = [formats.subgroup_to_dict(s) for s in subs]
    secret["message"] = formats.subgroup_to_dict(msg)
    formats.write(root / "platform.json", formats.platform_record(platform))
    formats.write(root / "platform-secret.json", secret)
    formats.write(root / "certificate.json", cert)
    print(f"{platform.kind} platform, modulus {platform.modulus.bit_length()} bits")
    return 0


def cmd_setup(args) -> int:
    rng = random.Random(args.seed)
    root: Path = args.dir
    root.mkdir(parents=True, exist_ok=True)
    if args.variant == "threshold":
        dealer, keys = threshold_setup(args.parties, args.bits, rng, d=args.d, jobs=args.jobs)
        binding = formats.platform_hash(dealer.platform)
        formats.write(root / THRESHOLD_FILE, formats.threshold_dealer_record(dealer))
        formats.write(root / "platform.json", formats.platform_record(dealer.platform))
        _write_keys(root, keys, binding, "threshold")
        print(f"threshold dealer for {args.parties} parties, {len(dealer.subgroups)} subgroups")
        return 0
    variant = Variant("v1-" if args.variant == "v1" else args.variant)
    dealer, keys = setup_dealer(
        args.parties, args.reserve, variant, args.bits, rng, d=args.d, platform=args.platform, jobs=args.jobs
    )
    binding = formats.platform_hash(dealer.platform)
    formats.write(root / DEALER_FILE, formats.dealer_record(dealer))
    formats.write(root / "platform.json", formats.platform_record(dealer.platform))
    _write_keys(root, keys, binding)
    _write_keys(root, dealer.sign_keys(), binding, "sign")
    print(f"{variant.value} dealer: {args.parties} parties, {args.reserve} reserved, d={dealer.d}")
    return 0


def cmd_pool(args) -> int:
    dealer = _load_dealer(args.dir)
    binding = formats.platform_hash(dealer.platform)
    if args.action == "join":
        key = join_party(dealer, args.party)
        _write_keys(args.dir, {args.party: key}, binding)
        _write_keys(args.dir, {args.party: dealer.sign_key(args.party)}, binding, "sign")
        print(f"party {args.party} joined")
    else:
        leave_party(dealer, args.party)
        print(f"party {args.party} retired")
    formats.write(args.dir / DEALER_FILE, formats.dealer_record(dealer))
    return 0


def cmd_encrypt(args) -> int:
    dealer = _load_dealer(args.dir)
    f = encode_message(args.message, dealer.msg_subgroup)
    ct = encrypt(dealer, f, args.coalition, random.Random(args.seed))
    formats.write(args.out, formats.ciphertext_record(ct, formats.platform_hash(dealer.platform)))
    print(f"ciphertext for coalition {','.join(map(str, ct.coalition))} written")
    return 0


def cmd_threshold_encrypt(args) -> int:
    dealer = _load_threshold(args.dir)
    f = encode_message(args.message, dealer.msg_subgroup)
    ct = threshold_encrypt(dealer, f, args.m, random.Random(args.seed))
    formats.write(args.out, formats.ciphertext_record(ct, formats.platform_hash(dealer.platform)))
    print(f"threshold-{args.m} ciphertext written")
    return 0


def _emit_transcript(args, transcript) -> int:
    if args.transcript is not None:
        args.transcript.write_text(transcript.to_lines(args.audience))
    print(f"status: {transcript.status.value}")
    if transcript.message is not None:
        print(f"message: {transcript.message}")
    return 0 if transcript.status is Status.COMPLETE else 5


def cmd_session(args) -> int:
    root: Path = args.dir
    if args.message is None and args.ciphertext is None and args.kind != "sign":
        raise FormatError("need --message or --ciphertext")
    if args.kind == "threshold":
        dealer = _load_threshold(root)
        binding = formats.platform_hash(dealer.platform)
        keys = _load_keys(root, args.coalition, binding, "threshold")
        ct = None
        if args.ciphertext is not None:
            ct = formats.ciphertext_from_record(formats.read(args.ciphertext, "ciphertext"), binding, dealer.modulus)
        elif args.m is None:
            raise FormatError("need --m to encrypt a threshold message")
        t = run_threshold_session(
            dealer, keys, args.coalition, args.message, args.m or 1, mode=args.mode, order_policy=args.order,
            seed=args.seed, ciphertext=ct, virtual_padding=args.virtual,
        )
        return _emit_transcript(args, t)

    dealer = _load_dealer(root)
    binding = formats.platform_hash(dealer.platform)
    if args.kind == "sign":
        if args.message is None:
            raise FormatError("need --message as the document to sign")
        keys = _load_keys(root, args.coalition, binding, "sign", dealer.modulus)
        f = encode_message(args.message, dealer.msg_subgroup)
        sd, t = run_sign_session(keys, args.coalition, f, seed=args.seed, mode=args.mode)
        if sd is not None and args.out is not None:
            formats.write(args.out, formats.signed_document_record(sd, binding))
        return _emit_transcript(args, t)

    ct = None
    if args.ciphertext is not None:
        ct = formats.ciphertext_from_record(formats.read(args.ciphertext, "ciphertext"), binding, dealer.modulus)
    keys = _load_keys(root, list(args.coalition) + list(args.intruders), binding)
    t = run_decrypt_session(
        dealer, keys, args.coalition, args.message, mode=args.mode, order_policy=args.order, seed=args.seed,
        ciphertext=ct, intruders=args.intruders, virtual_padding=args.virtual,
    )
    return _emit_transcript(args, t)


def cmd_verify_sign(args) -> int:
    dealer = _load_dealer(args.dir)
    binding = formats.platform_hash(dealer.platform)
    sd = formats.signed_document_from_record(formats.read(args.doc, "signed-document"), binding, dealer.modulus)
    if tuple(args.coalition) != sd.coalition:
        print("REJECT (coalition mismatch)")
        return 5
    ok = verify_signature(sd, dealer.verifier_keys(), dealer.d)
    print("ACCEPT" if ok else "REJECT")
    return 0 if ok else 5


def cmd_attack(args) -> int:
    rng = random.Random(args.seed)
    rows = rsa_order_sweep(args.trials, rng) if args.kind == "rsa-order" else distinguisher_sweep(args.trials, rng)
    out = args.out or args.dir / f"{args.kind}.csv"
    write_csv(rows, out)
    wins = sum(r["success"] for r in rows)
    print(f"{args.kind}: {wins}/{len(rows)} successes")
    return 0


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    results = run_all(args.level)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 5


COMMANDS = {
    "paramgen": cmd_paramgen,
    "setup": cmd_setup,
    "pool": cmd_pool,
    "encrypt": cmd_encrypt,
    "threshold-encrypt": cmd_threshold_encrypt,
    "session": cmd_session,
    "verify-sign": cmd_verify_sign,
    "attack": cmd_attack,
    "selftest": cmd_selftest,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except HiddenMultError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FormatError.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
