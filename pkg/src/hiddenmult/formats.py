"""Canonical JSON records for platforms, keys, ciphertexts and certificates.

Every record is one compact JSON object whose first field is ``format``.
Big integers are lowercase hex strings.  Keys, ciphertexts and signed
documents carry the hash of the public platform they belong to, and
loading them against another platform raises FormatError.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path
from typing import Any

from .errors import FormatError
from .numtheory import Factorization, GroupElement
from .paramgen import FieldPlatform, PrimeCertificate, PrimeChain, RingPlatform, SubgroupSpec
from .scheme import Ciphertext, DealerSecret, PartyDecryptKey, PartySignKey, SignedDocument, Variant
from .threshold import ThresholdDealer, ThresholdKey, ThresholdSetSystem, build_set_system

FORMAT_VERSION = 1


_HEX = re.compile("[0-9a-f]+")


def to_hex(n: int) -> str:
    return format(n, "x")


def from_hex(s: str) -> int:
    if not isinstance(s, str) or not _HEX.fullmatch(s):
        raise FormatError(f"expected lowercase hex, got {s!r}")
    return int(s, 16)


def dumps(record: dict[str, Any]) -> str:
    return json.dumps(record, separators=(",", ":")) + "\n"


def loads(text: str, kind: str | None = None) -> dict[str, Any]:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not JSON: {exc}") from None
    if not isinstance(record, dict) or next(iter(record), None) != "format":
        raise FormatError("record must start with a format field")
    if record["format"] != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {record['format']!r}")
    if kind is not None and record.get("kind") != kind:
        raise FormatError(f"expected a {kind} record, got {record.get('kind')!r}")
    return record


def write(path: str | Path, record: dict[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(record))


def read(path: str | Path, kind: str | None = None) -> dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
    return loads(text, kind)


def _record(kind: str, **fields: Any) -> dict[str, Any]:
    return {"format": FORMAT_VERSION, "kind": kind, **fields}


def platform_hash(platform: FieldPlatform | RingPlatform) -> str:
    """Binding tag computed from public data only."""
    return hashlib.sha256(f"{platform.kind}:{to_hex(platform.modulus)}".encode()).hexdigest()[:32]


def check_binding(record: dict[str, Any], expected: str) -> None:
    if record.get("platform") != expected:
        raise FormatError("record belongs to a different platform")


def _field(record: dict[str, Any], name: str) -> Any:
    try:
        return record[name]
    except KeyError:
        raise FormatError(f"missing field {name!r}") from None


# -- building blocks --------------------------------------------------------


def factorization_to_list(fact: Factorization) -> list[list[Any]]:
    return [[to_hex(p), e] for p, e in fact]


def factorization_from_list(items: list[list[Any]]) -> Factorization:
    try:
        return Factorization(tuple((from_hex(p), int(e)) for p, e in items))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad factorization: {exc}") from None


def platform_to_dict(platform: FieldPlatform | RingPlatform) -> dict[str, Any]:
    if isinstance(platform, FieldPlatform):
        return {
            "type": "field",
            "p": to_hex(platform.p),
            "order_factorization": factorization_to_list(platform.order_factorization),
            "generator": to_hex(platform.generator.value),
        }
    return {
        "type": "ring",
        "n": to_hex(platform.n),
        "p": to_hex(platform.p),
        "q": to_hex(platform.q),
        "fact_p": factorization_to_list(platform.fact_p),
        "fact_q": factorization_to_list(platform.fact_q),
    }


def platform_from_dict(data: dict[str, Any]) -> FieldPlatform | RingPlatform:
    try:
        if data["type"] == "field":
            p = from_hex(data["p"])
            return FieldPlatform(
                p, factorization_from_list(data["order_factorization"]), GroupElement(from_hex(data["generator"]), p)
            )
        if data["type"] == "ring":
            return RingPlatform(
                from_hex(data["n"]),
                from_hex(data["p"]),
                from_hex(data["q"]),
                factorization_from_list(data["fact_p"]),
                factorization_from_list(data["fact_q"]),
            )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad platform: {exc}") from None
    raise FormatError(f"unknown platform type {data.get('type')!r}")


def subgroup_to_dict(sub: SubgroupSpec) -> dict[str, Any]:
    return {
        "generator": to_hex(sub.generator.value),
        "order": to_hex(sub.order),
        "factorization": factorization_to_list(sub.order_factorization),
    }


def subgroup_from_dict(data: dict[str, Any], modulus: int) -> SubgroupSpec:
    try:
        return SubgroupSpec(
            GroupElement(from_hex(data["generator"]), modulus),
            from_hex(data["order"]),
            factorization_from_list(data["factorization"]),
        )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad subgroup: {exc}") from None


# -- records ----------------------------------------------------------------


def platform_record(platform: FieldPlatform | RingPlatform, public: bool = True) -> dict[str, Any]:
    """Public record holds only the modulus; the private one everything."""
    if public:
        return _record("platform", type=platform.kind, modulus=to_hex(platform.modulus),
                       platform=platform_hash(platform))
    return _record("platform-secret", platform=platform_hash(platform), data=platform_to_dict(platform))


def dealer_record(dealer: DealerSecret) -> dict[str, Any]:
    return _record(
        "dealer",
        platform=platform_hash(dealer.platform),
        variant=dealer.variant.value,
        data=platform_to_dict(dealer.platform),
        message=subgroup_to_dict(dealer.msg_subgroup),
        hidden=[subgroup_to_dict(sub) for sub in dealer.hidden_subgroups],
        assignment=[[pid, idx] for pid, idx in sorted(dealer.assignment.items())],
        free=sorted(dealer.free_indices),
        retired=sorted(dealer.retired_indices),
    )


def dealer_from_record(record: dict[str, Any]) -> DealerSecret:
    platform = platform_from_dict(_field(record, "data"))
    check_binding(record, platform_hash(platform))
    m = platform.modulus
    try:
        return DealerSecret(
            platform=platform,
            variant=Variant(record["variant"]),
            msg_subgroup=subgroup_from_dict(record["message"], m),
            hidden_subgroups=[subgroup_from_dict(x, m) for x in record["hidden"]],
            assignment={int(pid): int(idx) for pid, idx in record["assignment"]},
            free_indices=set(record["free"]),
            retired_indices=set(record["retired"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad dealer record: {exc}") from None


def set_system_to_list(system: ThresholdSetSystem) -> list[list[list[int]]]:
    return [[sorted(t) for t in level] for level in system.levels]


def set_system_from_list(levels: list[list[list[int]]]) -> ThresholdSetSystem:
    try:
        parsed = tuple(tuple(frozenset(int(i) for i in t) for t in level) for level in levels)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad set system: {exc}") from None
    return ThresholdSetSystem(len(parsed), parsed)


def threshold_dealer_record(dealer: ThresholdDealer) -> dict[str, Any]:
    return _record(
        "threshold-dealer",
        platform=platform_hash(dealer.platform),
        data=platform_to_dict(dealer.platform),
        message=subgroup_to_dict(dealer.msg_subgroup),
        subgroups=[subgroup_to_dict(w) for w in dealer.subgroups],
        set_system=set_system_to_list(dealer.set_system),
        keys=[[j, to_hex(k.key)] for j, k in sorted(dealer.keys.items())],
        virtual=[to_hex(v) for v in dealer.virtual_keys],
    )


def threshold_dealer_from_record(record: dict[str, Any]) -> ThresholdDealer:
    platform = platform_from_dict(_field(record, "data"))
    check_binding(record, platform_hash(platform))
    m = platform.modulus
    system = set_system_from_list(_field(record, "set_system"))
    if system != build_set_system(system.s):
        raise FormatError("set system does not match the canonical construction")
    try:
        return ThresholdDealer(
            platform=platform,
            set_system=system,
            msg_subgroup=subgroup_from_dict(record["message"], m),
            subgroups=[subgroup_from_dict(x, m) for x in record["subgroups"]],
            keys={int(j): ThresholdKey(int(j), from_hex(k)) for j, k in record["keys"]},
            virtual_keys=[from_hex(v) for v in record["virtual"]],
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad threshold dealer record: {exc}") from None


def key_record(key: PartyDecryptKey | ThresholdKey | PartySignKey, binding: str) -> dict[str, Any]:
    if isinstance(key, PartyDecryptKey):
        return _record("decrypt-key", platform=binding, party=key.party_id, exponent=to_hex(key.exponent))
    if isinstance(key, ThresholdKey):
        return _record("decrypt-key", platform=binding, party=key.party_id, exponent=to_hex(key.key),
                       threshold=True)
    return _record("sign-key", platform=binding, party=key.party_id, generator=to_hex(key.generator.value))


def key_from_record(record: dict[str, Any], binding: str, modulus: int | None = None):
    check_binding(record, binding)
    pid = int(_field(record, "party"))
    if record["kind"] == "decrypt-key":
        exponent = from_hex(_field(record, "exponent"))
        return ThresholdKey(pid, exponent) if record.get("threshold") else PartyDecryptKey(pid, exponent)
    if record["kind"] == "sign-key":
        if modulus is None:
            raise FormatError("sign keys need the platform modulus")
        return PartySignKey(pid, GroupElement(from_hex(_field(record, "generator")), modulus))
    raise FormatError(f"not a key record: {record['kind']!r}")


def ciphertext_record(ct: Ciphertext, binding: str) -> dict[str, Any]:
    return _record(
        "ciphertext",
        platform=binding,
        value=to_hex(ct.value.value),
        coalition=list(ct.coalition),
        variant=ct.variant,
        threshold=ct.threshold,
    )


def ciphertext_from_record(record: dict[str, Any], binding: str, modulus: int) -> Ciphertext:
    check_binding(record, binding)
    try:
        return Ciphertext(
            GroupElement(from_hex(record["value"]), modulus),
            tuple(int(i) for i in record["coalition"]),
            str(record["variant"]),
            record["threshold"],
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad ciphertext: {exc}") from None


def signed_document_record(sd: SignedDocument, binding: str) -> dict[str, Any]:
    return _record(
        "signed-document",
        platform=binding,
        document=to_hex(sd.document.value),
        signed=to_hex(sd.signed_value.value),
        coalition=list(sd.coalition),
    )


def signed_document_from_record(record: dict[str, Any], binding: str, modulus: int) -> SignedDocument:
    check_binding(record, binding)
    try:
        return SignedDocument(
            GroupElement(from_hex(record["document"]), modulus),
            GroupElement(from_hex(record["signed"]), modulus),
            tuple(int(i) for i in record["coalition"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad signed document: {exc}") from None


def chain_record(chain: PrimeChain) -> dict[str, Any]:
    """Certificate chain as ordered ``(n, q, r, base)`` rows for re-verification."""
    return _record(
        "prime-chain",
        seed=to_hex(chain.seed),
        links=[[to_hex(c.n), to_hex(c.q), to_hex(c.r), to_hex(c.base)] for c in chain.links],
    )


def chain_from_record(record: dict[str, Any]) -> PrimeChain:
    try:
        links = tuple(PrimeCertificate(*(from_hex(x) for x in row)) for row in record["links"])
        return PrimeChain(from_hex(record["seed"]), links)
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad prime chain: {exc}") from None
