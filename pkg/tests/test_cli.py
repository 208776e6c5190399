import csv
import json
import subprocess
import sys

import pytest

from hiddenmult import cli, formats
from hiddenmult.acceptance import DETERMINISM_SCRIPT, run_cli_script
from hiddenmult.errors import SearchExhausted


def run(tmp_path, *argv):
    return cli.main(["--dir", str(tmp_path), *argv])


def test_v2_round_trip_prints_message(tmp_path, capsys):
    assert run(tmp_path, "setup", "--variant", "v2", "--parties", "2", "--seed", "3") == 0
    assert run(tmp_path, "encrypt", "--coalition", "1,2", "--message", "1", "--out", str(tmp_path / "ct.json")) == 0
    capsys.readouterr()
    code = run(tmp_path, "session", "decrypt", "--coalition", "1,2", "--ciphertext", str(tmp_path / "ct.json"),
               "--transcript", str(tmp_path / "t.jsonl"))
    out = capsys.readouterr().out
    assert code == 0 and "message: 1" in out
    header = json.loads((tmp_path / "t.jsonl").read_text().splitlines()[0])
    assert header["kind"] == "transcript" and header["format"] == 1


@pytest.mark.parametrize("variant", ["v1", "v1+"])
def test_v1_sessions(tmp_path, capsys, variant):
    assert run(tmp_path, "setup", "--variant", variant, "--parties", "3", "--seed", "1") == 0
    capsys.readouterr()
    code = run(tmp_path, "session", "decrypt", "--coalition", "2,3", "--message", "1", "--mode", "server",
               "--order", "shuffle")
    assert code == 0 and "message: 1" in capsys.readouterr().out
    assert run(tmp_path, "session", "decrypt", "--coalition", "2", "--message", "1", "--intruders", "3") == 5


def test_ring_platform_setup(tmp_path, capsys):
    assert run(tmp_path, "setup", "--parties", "2", "--platform", "ring", "--d", "4", "--seed", "2") == 0
    assert run(tmp_path, "session", "decrypt", "--coalition", "1", "--message", "3", "--mode", "room") == 0
    assert "message: 3" in capsys.readouterr().out


def test_paramgen_outputs(tmp_path):
    assert run(tmp_path, "paramgen", "field", "--orders", "3,5", "--d", "14") == 0
    public = formats.read(tmp_path / "platform.json", "platform")
    assert public["modulus"] == "d3"  # 211
    cert = formats.read(tmp_path / "certificate.json", "lucas-certificate")
    assert cert["p"] == "d3" and cert["platform"] == public["platform"]
    assert run(tmp_path, "paramgen", "ring", "--orders", "3:5", "--d", "1:1") == 0
    assert formats.read(tmp_path / "platform.json")["modulus"] == "4d"  # 77
    assert run(tmp_path, "paramgen", "field", "--orders", "3,5", "--d", "2", "--bits", "64") == 0
    assert int(formats.read(tmp_path / "platform.json")["modulus"], 16).bit_length() >= 64
    assert run(tmp_path, "paramgen", "chain", "--bits", "64") == 0
    chain = formats.chain_from_record(formats.read(tmp_path / "chain.json", "prime-chain"))
    assert chain.verify() and chain.primes[-1].bit_length() >= 64


def test_pool_join_and_leave(tmp_path):
    assert run(tmp_path, "setup", "--parties", "2", "--reserve", "1") == 0
    assert run(tmp_path, "pool", "join", "--party", "7") == 0
    assert (tmp_path / "keys" / "party-7.json").exists()
    assert run(tmp_path, "session", "decrypt", "--coalition", "1,7", "--message", "1") == 0
    assert run(tmp_path, "pool", "join", "--party", "8") == 5
    assert run(tmp_path, "pool", "leave", "--party", "1") == 0
    assert run(tmp_path, "encrypt", "--coalition", "1", "--message", "1", "--out", str(tmp_path / "c.json")) == 5


def test_sign_and_verify(tmp_path, capsys):
    assert run(tmp_path, "setup", "--parties", "3", "--d", "3") == 0
    doc = tmp_path / "signed.json"
    assert run(tmp_path, "session", "sign", "--coalition", "1,3", "--message", "2", "--out", str(doc)) == 0
    capsys.readouterr()
    assert run(tmp_path, "verify-sign", "--doc", str(doc), "--coalition", "1,3") == 0
    assert capsys.readouterr().out.strip() == "ACCEPT"
    assert run(tmp_path, "verify-sign", "--doc", str(doc), "--coalition", "1") == 5
    record = formats.read(doc)
    value = int(record["signed"], 16)
    record["signed"] = formats.to_hex(value * value % int(formats.read(tmp_path / "platform.json")["modulus"], 16))
    formats.write(doc, record)
    assert run(tmp_path, "verify-sign", "--doc", str(doc), "--coalition", "1,3") == 5


def test_threshold_commands(tmp_path, capsys):
    assert run(tmp_path, "setup", "--variant", "threshold", "--parties", "3", "--d", "5") == 0
    ct = tmp_path / "tct.json"
    assert run(tmp_path, "threshold-encrypt", "--m", "2", "--message", "4", "--out", str(ct)) == 0
    capsys.readouterr()
    assert run(tmp_path, "session", "threshold", "--coalition", "2,3", "--ciphertext", str(ct)) == 0
    assert "message: 4" in capsys.readouterr().out
    assert run(tmp_path, "session", "threshold", "--coalition", "2", "--ciphertext", str(ct)) == 5
    assert run(tmp_path, "session", "threshold", "--coalition", "1,2,3", "--message", "1", "--m", "3",
               "--mode", "server", "--virtual") == 0
    assert run(tmp_path, "threshold-encrypt", "--m", "4", "--message", "1", "--out", str(ct)) == 5


def test_attack_reports(tmp_path, capsys):
    out = tmp_path / "rsa.csv"
    assert run(tmp_path, "attack", "rsa-order", "--trials", "10", "--out", str(out)) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 10 and all(r["success"] == "1" for r in rows)
    assert run(tmp_path, "attack", "distinguish", "--trials", "10") == 0
    assert (tmp_path / "distinguish.csv").exists()
    assert "10/10" in capsys.readouterr().out


def test_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["setup", "--bogus"]) == 2
    assert cli.main(["frobnicate"]) == 2
    assert run(tmp_path, "encrypt", "--coalition", "1", "--message", "1", "--out", "x.json") == 3
    (tmp_path / "dealer.json").write_text("{not json")
    assert run(tmp_path, "encrypt", "--coalition", "1", "--message", "1", "--out", "x.json") == 3

    def exhausted(*a, **kw):
        raise SearchExhausted("no luck")

    monkeypatch.setattr(cli, "prime_chain", exhausted)
    assert run(tmp_path, "paramgen", "chain", "--bits", "64") == 4


def test_keys_from_other_platform_refused(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["--dir", str(a), "setup", "--parties", "2", "--seed", "1"]) == 0
    assert cli.main(["--dir", str(b), "setup", "--parties", "2", "--d", "4", "--seed", "1"]) == 0
    (a / "keys" / "party-1.json").write_bytes((b / "keys" / "party-1.json").read_bytes())
    assert cli.main(["--dir", str(a), "session", "decrypt", "--coalition", "1", "--message", "1"]) == 3


def test_message_out_of_range(tmp_path):
    assert run(tmp_path, "setup", "--parties", "2") == 0
    assert run(tmp_path, "encrypt", "--coalition", "1", "--message", "9", "--out", str(tmp_path / "c.json")) == 5


def test_same_seed_same_bytes(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    first, second = run_cli_script(tmp_path / "a"), run_cli_script(tmp_path / "b")
    assert first == second and all(code == 0 for code, _ in first)
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files
    for rel in files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    assert len(DETERMINISM_SCRIPT) >= 15


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hiddenmult", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "selftest" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "hiddenmult", "setup", "--nope"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_selftest_desk_passes(capsys):
    assert cli.main(["selftest", "--level", "desk"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 12 and all(line.startswith("[PASS]") for line in lines)
