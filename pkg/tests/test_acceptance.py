"""Acceptance criteria 1-8, each at its stated scale and tolerance.

Run with ``pytest tests/test_acceptance.py`` (a per-criterion PASS/FAIL
summary is printed at the end) or directly with ``python tests/test_acceptance.py``.
"""
import graphlib
import itertools
import math
import random
import time

import pytest

from deamarket.bench import run_bench
from deamarket.errors import AccessRevoked, AuthenticationError, DeaMarketError
from deamarket.gopprr import ViolationCode, compose, decompose, serialize_graph, validate_graph
from deamarket.hashing import H
from deamarket.mam import Mode
from deamarket.market import Marketplace
from deamarket.merkle import auth_path, merkle_root, verify_path
from deamarket.store import BlobStore, MemoryBlobStore
from deamarket.synth import VEHICLE_METAMODEL, random_graph, synthetic_record
from deamarket.tangle import Bundle, Ledger, Transaction, UniformTips, WeightedWalk, encode_fields, pow
from deamarket.trytes import ALPHABET, bytes_to_trytes, chunk_trytes, trytes_to_bytes
from gopprr_fixtures import VIOLATION_FIXTURES
from oracles import ledger_edges, oracle_decode, oracle_encode, oracle_merkle_root
from test_gopprr import shuffled

pytestmark = pytest.mark.acceptance

DIFFICULTY = 8


def log_uniform_sizes(rng, n, lo, hi):
    sizes = [lo, hi]
    sizes += [int(math.exp(rng.uniform(math.log(lo), math.log(hi)))) for _ in range(n - 2)]
    return sizes


def test_criterion_1_end_to_end_roundtrip(tmp_path, record_property):
    rng = random.Random(1)
    market = Marketplace(Ledger(difficulty=DIFFICULTY, seed=1), BlobStore(tmp_path / "store"))
    sizes = log_uniform_sizes(rng, 100, 1000, 6_000_000)
    start = time.perf_counter()
    ok = 0
    for i, size in enumerate(sizes):
        d = synthetic_record(size, seed=i, asset_id=f"asset-{i}",
                             view=rng.choice(["requirement", "function", "architecture"]))
        pub = market.publish(d, market.open_channel(seed=rng.randbytes(32)))
        assert market.fetch(pub.address).to_bytes() == d.to_bytes()
        key = rng.randbytes(16)
        res = market.publish(d, market.open_channel(Mode.RESTRICTED, key, seed=rng.randbytes(32)))
        got = market.fetch(res.address, Mode.RESTRICTED, channel_root=res.channel_root, side_key=key)
        assert got.to_bytes() == d.to_bytes()
        ok += 1
    elapsed = time.perf_counter() - start
    record_property("detail", f"{ok}/100 records x 2 modes byte-exact, sizes {min(sizes)}..{max(sizes)} B, "
                              f"{elapsed:.0f}s at difficulty {DIFFICULTY}")
    assert elapsed < 300


def test_criterion_2_bench_trends(record_property):
    sizes = (2_900_000, 4_600_000, 5_600_000)
    files = [(f"{s / 1e6:.1f}MB", synthetic_record(s, seed=i).to_bytes()) for i, s in enumerate(sizes)]
    report = run_bench(files, iterations=10, difficulty=DIFFICULTY, seed=2)
    assert not report.errors
    assert len(report.rows) == 3
    proc = [r.processing.mean for r in report.rows]
    att = [r.attaching for r in report.rows]
    # pooled SD over the three equal-size groups
    pooled = math.sqrt(sum(a.sd ** 2 for a in att) / len(att))
    diff = max(abs(a.mean - b.mean) for a, b in itertools.combinations(att, 2))
    record_property("detail", f"processing means {[round(p, 1) for p in proc]} ms; "
                              f"attaching max diff {diff:.3f} ms < pooled sd {pooled:.3f} ms")
    assert proc[0] < proc[1] < proc[2]
    assert diff < pooled


def test_criterion_3_access_control(record_property):
    rng = random.Random(3)
    market = Marketplace(Ledger(difficulty=DIFFICULTY, seed=3), MemoryBlobStore())
    denied = granted = 0
    for i in range(100):
        d = synthetic_record(rng.randint(1000, 20_000), seed=1000 + i, asset_id=f"a{i}")
        key = rng.randbytes(rng.randint(1, 32))
        r = market.publish(d, market.open_channel(Mode.RESTRICTED, key, seed=rng.randbytes(32)))
        for wrong in (None, rng.randbytes(len(key))):
            try:
                market.fetch(r.address, Mode.RESTRICTED, channel_root=r.channel_root, side_key=wrong)
            except AuthenticationError:
                denied += wrong is None
            else:
                pytest.fail("restricted content opened without the side key")
        got = market.fetch(r.address, Mode.RESTRICTED, channel_root=r.channel_root, side_key=key)
        granted += got == d
    assert denied == 100 and granted == 100

    rotations = 0
    for trial in range(10):
        before, after = rng.randint(1, 5), rng.randint(1, 3)
        ch = market.open_channel(Mode.RESTRICTED, b"old", seed=rng.randbytes(32), tree_depth=rng.randint(1, 3))
        sub = market.subscribe(ch.root, Mode.RESTRICTED, b"old")
        sent = [synthetic_record(800, seed=trial * 100 + k, asset_id=f"r{k}") for k in range(before + after)]
        for k, d in enumerate(sent):
            if k == before:
                ch.rotate_key(b"new")
            market.publish(d, ch)
        got = []
        with pytest.raises(AccessRevoked):
            for d in sub:
                got.append(d)
        assert got == sent[:before]
        rotations += 1
    record_property("detail", f"without key denied {denied}/100, with key {granted}/100, "
                              f"{rotations}/10 rotations yield exactly the pre-rotation messages")


def _other_symbol(rng, c):
    return rng.choice(ALPHABET.replace(c, ""))


def _remine(tx: Transaction, payload: str, difficulty: int) -> Transaction:
    fields = encode_fields(tx.trunk, tx.branch, tx.address, tx.tag, tx.bundle_hash,
                           tx.current_index, tx.last_index, tx.timestamp, payload)
    nonce = pow(fields, difficulty)
    return Transaction(H(fields, nonce.to_bytes(8, "big")), tx.trunk, tx.branch, payload, tx.address, tx.tag,
                       tx.bundle_hash, tx.current_index, tx.last_index, tx.timestamp, nonce)


class _InFlightCorruption:
    """A store that skips its own digest check and corrupts what it hands back."""

    def __init__(self, inner, mutate):
        self.inner = inner
        self.mutate = mutate

    def put(self, content):
        return self.inner.put(content)

    def get(self, cid):
        return self.mutate(self.inner.blobs[cid])


def test_criterion_4_nontampering(tmp_path, record_property):
    rng = random.Random(4)
    N = 1000
    ledger = Ledger(difficulty=DIFFICULTY, seed=4)
    mem = MemoryBlobStore()
    market = Marketplace(ledger, mem)
    d = synthetic_record(3000, seed=4)
    r = market.publish(d, market.open_channel(Mode.RESTRICTED, b"key", seed=b"tamper"))
    root, key = r.channel_root, b"key"
    (bundle,) = ledger.get_bundle(r.address)
    escapes = {}

    def attempt(fn):
        try:
            fn()
        except DeaMarketError:
            return 0
        return 1

    # ledger payload, stored in place with its old hash (caught by hash/PoW re-verification)
    n = 0
    for _ in range(N):
        tx = rng.choice(bundle.transactions)
        pos = rng.randrange(len(tx.payload))
        forged = Transaction(**{**tx.__dict__, "payload": tx.payload[:pos] + _other_symbol(rng, tx.payload[pos])
                                + tx.payload[pos + 1:]})
        ledger.transactions[tx.hash] = forged
        n += attempt(lambda: market._open(Bundle(tuple(ledger.transactions[t.hash] for t in bundle.transactions)),
                                          root, key))
        ledger.transactions[tx.hash] = tx
    escapes["ledger payload"] = n

    # ledger payload, re-mined by the attacker so hash and PoW are valid (caught by the signature)
    n = 0
    for _ in range(N):
        idx = rng.randrange(len(bundle.transactions))
        tx = bundle.transactions[idx]
        pos = rng.randrange(len(tx.payload))
        forged = _remine(tx, tx.payload[:pos] + _other_symbol(rng, tx.payload[pos]) + tx.payload[pos + 1:],
                         DIFFICULTY)
        txs = list(bundle.transactions)
        txs[idx] = forged
        n += attempt(lambda: market._open(Bundle(tuple(txs)), root, key))
    escapes["ledger payload (re-mined)"] = n

    # stored blob, in the memory store
    blob = mem.blobs[r.cid]
    n = 0
    for _ in range(N):
        pos = rng.randrange(len(blob))
        mem.blobs[r.cid] = blob[:pos] + bytes([(blob[pos] + rng.randint(1, 255)) % 256]) + blob[pos + 1:]
        n += attempt(lambda: market.fetch(r.address, Mode.RESTRICTED, channel_root=root, side_key=key))
    mem.blobs[r.cid] = blob
    escapes["stored blob"] = n

    # stored blob corrupted after the store's own check (caught by the payload signature)
    n = 0
    for _ in range(N):
        pos = rng.randrange(len(blob))
        sym = _other_symbol(rng, chr(blob[pos]))
        lying = Marketplace(ledger, _InFlightCorruption(mem, lambda b: b[:pos] + sym.encode() + b[pos + 1:]))
        n += attempt(lambda: lying.fetch(r.address, Mode.RESTRICTED, channel_root=root, side_key=key))
    escapes["in-flight blob"] = n

    # on-disk store file
    disk = BlobStore(tmp_path / "store")
    dmarket = Marketplace(ledger, disk)
    r2 = dmarket.publish(d, dmarket.open_channel(seed=b"tamper-disk"))
    path = disk.path_for(r2.cid)
    original = path.read_bytes()
    n = 0
    for _ in range(N):
        pos = rng.randrange(len(original))
        bad = bytearray(original)
        bad[pos] ^= 1 << rng.randrange(8)
        path.write_bytes(bytes(bad))
        n += attempt(lambda: dmarket.fetch(r2.address))
    path.write_bytes(original)
    assert dmarket.fetch(r2.address) == d
    escapes["on-disk file"] = n

    assert market.fetch(r.address, Mode.RESTRICTED, channel_root=root, side_key=key) == d
    record_property("detail", f"{N} corruptions per surface; silent escapes {escapes}")
    assert all(v == 0 for v in escapes.values()), escapes


@pytest.mark.parametrize("strategy", ["uniform", "weighted"])
def test_criterion_5_dag_invariants(strategy, record_property):
    selector = UniformTips() if strategy == "uniform" else WeightedWalk()
    led = Ledger(difficulty=DIFFICULTY, tip_selector=selector, seed=5, latency=4)
    addr = H(b"load")
    confirmed_before: set = {led.genesis}
    monotone = True
    for i in range(1, 10_001):
        led.attach(["A"], addr)
        if i % 100 == 0:
            led.issue_milestone()
            now = {h for h in led.transactions if led.is_confirmed(h)}
            monotone &= confirmed_before <= now
            confirmed_before = now
    assert len(led.milestones) == 100
    ts = graphlib.TopologicalSorter()
    for a, b in ledger_edges(led):
        ts.add(a, b)
    order = list(ts.static_order())
    out_degree_ok = all(
        tx.trunk in led and tx.branch in led for h, tx in led.transactions.items() if h != led.genesis)
    distinct = sum(tx.trunk != tx.branch for h, tx in led.transactions.items() if h != led.genesis)
    pow_ok = all(led.verify_transaction(tx) for tx in led.transactions.values())
    record_property("detail", f"{strategy}: {len(led)} txs acyclic ({len(order)} sorted), out-degree 2 for all "
                              f"({distinct} with distinct parents), monotone over 100 milestones, "
                              f"PoW re-verified; {len(led.tips)} tips")
    assert out_degree_ok and monotone and pow_ok
    assert len(order) == len(led)


def test_criterion_6_codec_oracle(record_property):
    rng = random.Random(6)
    for _ in range(10_000):
        data = rng.randbytes(rng.randint(0, 600))
        text = bytes_to_trytes(data)
        assert text == oracle_encode(data)
        assert trytes_to_bytes(text) == data == oracle_decode(text)
    for v in range(256):
        assert bytes_to_trytes(bytes([v])) == oracle_encode(bytes([v]))
        assert trytes_to_bytes(oracle_encode(bytes([v]))) == bytes([v])
    for n, expect in ((2186, [2186]), (2187, [2187]), (2188, [2187, 1])):
        text = "".join(rng.choice(ALPHABET) for _ in range(n))
        chunks = chunk_trytes(text)
        assert [len(c) for c in chunks] == expect
        assert "".join(chunks) == text
    record_property("detail", "10000 random roundtrips + 256-value sweep match the table oracle; "
                              "chunking at 2186/2187/2188 exact")


def test_criterion_7_merkle_oracle(record_property):
    rng = random.Random(7)
    checked = corrupted = 0
    for depth in range(7):
        for _ in range(5):
            leaves = [rng.randbytes(32) for _ in range(1 << depth)]
            root = merkle_root(leaves)
            assert root == oracle_merkle_root(leaves)
            for i, leaf in enumerate(leaves):
                path = auth_path(leaves, i)
                assert verify_path(leaf, path, i, root)
                checked += 1
                for k in range(len(path)):
                    bad = list(path)
                    b = bytearray(bad[k])
                    b[rng.randrange(32)] ^= 1 << rng.randrange(8)
                    bad[k] = bytes(b)
                    assert not verify_path(leaf, bad, i, root)
                    corrupted += 1
    record_property("detail", f"depths 0-6 match the recursive oracle; {checked} paths verify, "
                              f"{corrupted} corrupted path elements all rejected")


def test_criterion_8_gopprr(record_property):
    seen = set()
    for code, graph in VIOLATION_FIXTURES.items():
        seen |= validate_graph(VEHICLE_METAMODEL, graph).codes
    assert seen == set(ViolationCode)
    rng = random.Random(8)
    for i in range(1000):
        g = random_graph(rng, prefix=f"g{i}-")
        assert validate_graph(VEHICLE_METAMODEL, g).ok
        assert compose(decompose(g)) == g
        assert serialize_graph(shuffled(g, rng)) == serialize_graph(g)
    record_property("detail", f"all {len(ViolationCode)} violation codes produced; 1000 graphs reconstruct "
                              "exactly and serialize permutation-invariantly")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
