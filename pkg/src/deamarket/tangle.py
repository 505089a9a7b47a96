"""A simulated DAG ledger (tangle) with proof-of-work and milestone confirmation.

Every non-genesis transaction approves two earlier transactions (trunk and
branch), selected among the current tips. A simulated coordinator issues
zero-payload milestones; a transaction is confirmed once a milestone reaches
it through trunk/branch edges.
"""
from __future__ import annotations

import hashlib
import math
import random
import struct
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import CapacityError, IntegrityError, NotFoundError, ParseError
from .hashing import DIGEST_SIZE, H, ZERO_DIGEST, from_hex
from .trytes import TRANSACTION_CAPACITY, is_trytes

MAX_TAG = 27
DEFAULT_DIFFICULTY = 8
GENESIS_TAG = "GENESIS"
MILESTONE_TAG = "MILESTONE"
COORDINATOR_ADDRESS = H(b"deamarket-coordinator")
_FILE_HEADER = "# deamarket-ledger v1"

_fields = struct.Struct(">32s32s32s32sIIQ")
_nonce = struct.Struct(">Q")


def encode_fields(trunk, branch, address, tag, bundle_hash, current, last, timestamp, payload) -> bytes:
    """Canonical bytes hashed (with the nonce appended) into a transaction hash."""
    tag_b = tag.encode("ascii")
    payload_b = payload.encode("ascii")
    return b"".join((
        _fields.pack(trunk, branch, address, bundle_hash, current, last, timestamp),
        bytes([len(tag_b)]), tag_b,
        struct.pack(">H", len(payload_b)), payload_b,
    ))


def meets_difficulty(digest: bytes, difficulty: int) -> bool:
    """True if ``digest`` has at least ``difficulty`` leading zero bits."""
    return int.from_bytes(digest, "big") >> (8 * DIGEST_SIZE - difficulty) == 0 if difficulty else True


def pow(fields: bytes, difficulty: int) -> int:
    """Smallest nonce such that ``H(fields || nonce)`` meets the difficulty."""
    if difficulty < 0:
        raise ValueError("difficulty must be >= 0")
    base = hashlib.sha256(fields)
    target = 1 << (8 * DIGEST_SIZE - difficulty)
    pack = _nonce.pack
    nonce = 0
    while True:
        h = base.copy()
        h.update(pack(nonce))
        if int.from_bytes(h.digest(), "big") < target:
            return nonce
        nonce += 1


@dataclass(frozen=True)
class Transaction:
    hash: bytes
    trunk: bytes
    branch: bytes
    payload: str
    address: bytes
    tag: str
    bundle_hash: bytes
    current_index: int
    last_index: int
    timestamp: int
    nonce: int

    def fields(self) -> bytes:
        return encode_fields(self.trunk, self.branch, self.address, self.tag, self.bundle_hash,
                             self.current_index, self.last_index, self.timestamp, self.payload)

    def computed_hash(self) -> bytes:
        return H(self.fields(), _nonce.pack(self.nonce))

    def to_line(self) -> str:
        return "\t".join((
            self.hash.hex(), self.trunk.hex(), self.branch.hex(), self.address.hex(), self.tag,
            self.bundle_hash.hex(), str(self.current_index), str(self.last_index),
            str(self.timestamp), str(self.nonce), self.payload,
        ))

    @classmethod
    def from_line(cls, line: str) -> "Transaction":
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 11:
            raise ValueError(f"expected 11 fields, got {len(parts)}")
        h, trunk, branch, address, tag, bundle, cur, last, ts, nonce, payload = parts
        return cls(
            hash=from_hex(h), trunk=from_hex(trunk), branch=from_hex(branch), payload=payload,
            address=from_hex(address), tag=tag, bundle_hash=from_hex(bundle),
            current_index=int(cur), last_index=int(last), timestamp=int(ts), nonce=int(nonce),
        )


@dataclass(frozen=True)
class Bundle:
    transactions: tuple[Transaction, ...]

    @property
    def bundle_hash(self) -> bytes:
        return self.transactions[0].bundle_hash

    @property
    def address(self) -> bytes:
        return self.transactions[0].address

    @property
    def tag(self) -> str:
        return self.transactions[0].tag

    @property
    def timestamp(self) -> int:
        return self.transactions[0].timestamp

    @property
    def message(self) -> str:
        return "".join(tx.payload for tx in self.transactions)

    def __len__(self):
        return len(self.transactions)


class UniformTips:
    """Pick two distinct tips uniformly at random."""

    def select(self, ledger: "Ledger", rng: random.Random):
        tips = list(ledger._view_tips)
        if len(tips) == 1:
            return tips[0], tips[0]
        a, b = rng.sample(tips, 2)
        return a, b


class WeightedWalk:
    """Random walk from the latest milestone towards the tips, biased by cumulative weight.

    From ``x`` the walk steps to approver ``y`` with probability proportional
    to ``exp(-alpha * (W(x) - W(y)))``.
    """

    def __init__(self, alpha: float = 0.01, retries: int = 10):
        self.alpha = alpha
        self.retries = retries

    def _weights(self, ledger: "Ledger", entry: bytes) -> dict[bytes, int]:
        cone = {entry}
        stack = [entry]
        approvers = ledger._visible_approvers
        while stack:
            for a in approvers(stack.pop()):
                if a not in cone:
                    cone.add(a)
                    stack.append(a)
        # insertion order is a topological order
        ordered = sorted(cone, key=ledger._seq.__getitem__)
        bit = {h: 1 << i for i, h in enumerate(ordered)}
        future: dict[bytes, int] = {}
        for h in reversed(ordered):
            acc = 0
            for a in approvers(h):
                acc |= future[a] | bit[a]
            future[h] = acc
        return {h: 1 + f.bit_count() for h, f in future.items()}

    def _walk(self, ledger, entry, weights, rng) -> bytes:
        x = entry
        while True:
            nxt = ledger._visible_approvers(x)
            if not nxt:
                return x
            if len(nxt) == 1:
                x = nxt[0]
                continue
            top = max(weights[y] for y in nxt)
            probs = [math.exp(self.alpha * (weights[y] - top)) for y in nxt]
            x = rng.choices(nxt, weights=probs)[0]

    def select(self, ledger: "Ledger", rng: random.Random):
        entry = ledger.genesis
        for m in reversed(ledger.milestones):
            if ledger._seq[m] < ledger._visible:
                entry = m
                break
        weights = self._weights(ledger, entry)
        trunk = self._walk(ledger, entry, weights, rng)
        if len(ledger._view_tips) == 1:
            return trunk, trunk
        for _ in range(self.retries):
            branch = self._walk(ledger, entry, weights, rng)
            if branch != trunk:
                return trunk, branch
        # the walk's reachable region has a single tip; fall back to any other tip
        others = [t for t in ledger._view_tips if t != trunk]
        return trunk, rng.choice(others)


def _system_clock() -> int:
    return int(time.time() * 1000)


class Ledger:
    """In-process tangle. Attach is safe to call from several threads.

    ``latency`` models propagation delay: a transaction only becomes visible
    to tip selection once ``latency`` later transactions have been inserted.
    With the default of 0 tip selection sees the live tip set.
    """

    def __init__(self, difficulty: int = DEFAULT_DIFFICULTY, tip_selector=None,
                 clock: Callable[[], int] | None = None, seed=None,
                 milestone_interval: int | None = None, latency: int = 0):
        if difficulty < 0:
            raise ValueError("difficulty must be >= 0")
        if latency < 0:
            raise ValueError("latency must be >= 0")
        self.latency = latency
        self.difficulty = difficulty
        self.tip_selector = tip_selector or UniformTips()
        self.clock = clock or _system_clock
        self.rng = random.Random(seed)
        self.milestone_interval = milestone_interval
        self.transactions: dict[bytes, Transaction] = {}
        self.milestones: list[bytes] = []
        self._lock = threading.RLock()
        self._seq: dict[bytes, int] = {}
        self._approvers: dict[bytes, list[bytes]] = {}
        self._tips: dict[bytes, None] = {}
        self._order: list[bytes] = []
        self._visible = 0
        self._view_tips: dict[bytes, None] = {}
        self._by_address: dict[bytes, list[bytes]] = {}
        self._confirmed: set[bytes] = set()
        self._attaches_since_milestone = 0
        self.genesis = self._make_genesis()

    def _make_genesis(self) -> bytes:
        fields = encode_fields(ZERO_DIGEST, ZERO_DIGEST, ZERO_DIGEST, GENESIS_TAG, ZERO_DIGEST, 0, 0, 0, "")
        nonce = pow(fields, self.difficulty)
        tx = Transaction(H(fields, _nonce.pack(nonce)), ZERO_DIGEST, ZERO_DIGEST, "", ZERO_DIGEST,
                         GENESIS_TAG, ZERO_DIGEST, 0, 0, 0, nonce)
        self._insert(tx, genesis=True)
        self._confirmed.add(tx.hash)
        return tx.hash

    def __len__(self):
        return len(self.transactions)

    def __contains__(self, h):
        return h in self.transactions

    def __eq__(self, other):
        if not isinstance(other, Ledger):
            return NotImplemented
        return (self.difficulty == other.difficulty
                and list(self.transactions.values()) == list(other.transactions.values())
                and self.milestones == other.milestones)

    @property
    def tips(self) -> list[bytes]:
        with self._lock:
            return list(self._tips)

    def approvers(self, h: bytes) -> list[bytes]:
        self._require(h)
        return list(self._approvers[h])

    def _require(self, h: bytes) -> Transaction:
        try:
            return self.transactions[h]
        except KeyError:
            raise NotFoundError(f"unknown transaction {h.hex()}") from None

    def _insert(self, tx: Transaction, genesis: bool = False) -> None:
        h = tx.hash
        if h in self.transactions:
            raise IntegrityError(f"duplicate transaction {h.hex()}")
        if not genesis and (tx.trunk not in self.transactions or tx.branch not in self.transactions):
            raise IntegrityError("transaction approves unknown transactions")
        self.transactions[h] = tx
        self._seq[h] = len(self._seq)
        self._approvers[h] = []
        if not genesis:
            self._approvers[tx.trunk].append(h)
            if tx.branch != tx.trunk:
                self._approvers[tx.branch].append(h)
            self._tips.pop(tx.trunk, None)
            self._tips.pop(tx.branch, None)
        self._tips[h] = None
        self._by_address.setdefault(tx.address, []).append(h)
        self._order.append(h)
        while self._visible < max(1, len(self._order) - self.latency):
            v = self.transactions[self._order[self._visible]]
            self._view_tips.pop(v.trunk, None)
            self._view_tips.pop(v.branch, None)
            self._view_tips[v.hash] = None
            self._visible += 1

    def _visible_approvers(self, h: bytes) -> list[bytes]:
        approvers = self._approvers[h]
        if self._visible == len(self._order):
            return approvers
        seq, limit = self._seq, self._visible
        return [a for a in approvers if seq[a] < limit]

    def select_tips(self, rng: random.Random | None = None):
        with self._lock:
            return self.tip_selector.select(self, rng or self.rng)

    def verify_transaction(self, tx: Transaction) -> bool:
        h = tx.computed_hash()
        return h == tx.hash and meets_difficulty(h, self.difficulty)

    def _build(self, payload, address, tag, bundle_hash, current, last, timestamp) -> Transaction:
        with self._lock:
            trunk, branch = self.select_tips()
        fields = encode_fields(trunk, branch, address, tag, bundle_hash, current, last, timestamp, payload)
        nonce = pow(fields, self.difficulty)
        return Transaction(H(fields, _nonce.pack(nonce)), trunk, branch, payload, address, tag,
                           bundle_hash, current, last, timestamp, nonce)

    def attach(self, payloads: Sequence[str], address: bytes, tag: str = "") -> Bundle:
        """Attach one transaction per payload, all sharing a bundle hash."""
        payloads = list(payloads) or [""]
        if address == COORDINATOR_ADDRESS:
            raise ValueError("the coordinator address is reserved")
        _check_tag(tag)
        for p in payloads:
            if len(p) > TRANSACTION_CAPACITY:
                raise CapacityError(f"payload of {len(p)} trytes exceeds {TRANSACTION_CAPACITY}")
            if not is_trytes(p):
                raise ValueError("payload is not a tryte string")
        timestamp = int(self.clock())
        last = len(payloads) - 1
        with self._lock:
            salt = self.rng.getrandbits(64).to_bytes(8, "big")
        bundle_hash = H(b"bundle", address, tag.encode(), _nonce.pack(timestamp), salt,
                        *(H(p.encode()) for p in payloads))
        txs = []
        for idx, p in enumerate(payloads):
            tx = self._build(p, address, tag, bundle_hash, idx, last, timestamp)
            with self._lock:
                self._insert(tx)
            txs.append(tx)
        with self._lock:
            self._attaches_since_milestone += 1
            if self.milestone_interval and self._attaches_since_milestone >= self.milestone_interval:
                self.issue_milestone()
        return Bundle(tuple(txs))

    def issue_milestone(self) -> bytes:
        """Coordinator step: attach a zero-payload milestone and confirm its past cone."""
        with self._lock:
            timestamp = int(self.clock())
            bundle_hash = H(b"milestone", _nonce.pack(len(self.milestones)), _nonce.pack(timestamp))
            tx = self._build("", COORDINATOR_ADDRESS, MILESTONE_TAG, bundle_hash, 0, 0, timestamp)
            self._insert(tx)
            self._record_milestone(tx.hash)
            self._attaches_since_milestone = 0
            return tx.hash

    def _record_milestone(self, h: bytes) -> None:
        self.milestones.append(h)
        # a confirmed transaction's past is already confirmed, so stop there
        stack = [h]
        while stack:
            x = stack.pop()
            if x in self._confirmed:
                continue
            self._confirmed.add(x)
            tx = self.transactions[x]
            if x != self.genesis:
                stack.append(tx.trunk)
                stack.append(tx.branch)

    def is_confirmed(self, h: bytes) -> bool:
        self._require(h)
        return h in self._confirmed

    def cumulative_weight(self, h: bytes) -> int:
        """1 + number of transactions that directly or indirectly approve ``h``."""
        self._require(h)
        seen = {h}
        stack = [h]
        while stack:
            for a in self._approvers[stack.pop()]:
                if a not in seen:
                    seen.add(a)
                    stack.append(a)
        return len(seen)

    def get_bundle(self, address: bytes) -> list[Bundle]:
        """Complete bundles carrying ``address``, oldest first."""
        with self._lock:
            hashes = list(self._by_address.get(address, ()))
            groups: dict[bytes, dict[int, Transaction]] = {}
            for h in hashes:
                tx = self.transactions[h]
                groups.setdefault(tx.bundle_hash, {}).setdefault(tx.current_index, tx)
        bundles = []
        for members in groups.values():
            last = next(iter(members.values())).last_index
            if sorted(members) == list(range(last + 1)):
                bundles.append(Bundle(tuple(members[i] for i in range(last + 1))))
        return bundles

    def stats(self) -> dict:
        with self._lock:
            n = len(self.transactions)
            return {
                "transactions": n,
                "tips": len(self._tips),
                "milestones": len(self.milestones),
                "confirmed_fraction": len(self._confirmed) / n,
                "difficulty": self.difficulty,
            }

    # -- persistence ---------------------------------------------------------

    def dump_lines(self) -> Iterable[str]:
        yield f"{_FILE_HEADER} difficulty={self.difficulty}"
        with self._lock:
            txs = list(self.transactions.values())
        for tx in txs:
            yield tx.to_line()

    def save(self, path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="ascii") as fh:
            for line in self.dump_lines():
                fh.write(line + "\n")
        tmp.replace(path)

    @classmethod
    def load(cls, path, **kwargs) -> "Ledger":
        with open(path, encoding="ascii") as fh:
            lines = fh.read().splitlines()
        if not lines or not lines[0].startswith(_FILE_HEADER):
            raise ParseError(f"{path}: not a ledger file", 1, 1)
        try:
            difficulty = int(lines[0].split("difficulty=")[1])
        except (IndexError, ValueError):
            raise ParseError(f"{path}: ledger header lacks difficulty", 1, 1) from None
        ledger = cls.__new__(cls)
        Ledger.__init__(ledger, difficulty=difficulty, **kwargs)
        ledger.transactions.clear()
        for table in (ledger._seq, ledger._approvers, ledger._tips, ledger._by_address,
                      ledger._order, ledger._view_tips):
            table.clear()
        ledger._visible = 0
        ledger._confirmed.clear()
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                tx = Transaction.from_line(line)
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}", lineno, 1) from None
            if not ledger.verify_transaction(tx):
                raise IntegrityError(f"{path}:{lineno}: transaction fails hash/PoW verification")
            is_genesis = lineno == 2
            ledger._insert(tx, genesis=is_genesis)
            if is_genesis:
                ledger.genesis = tx.hash
                ledger._confirmed.add(tx.hash)
            elif tx.address == COORDINATOR_ADDRESS and tx.tag == MILESTONE_TAG:
                ledger._record_milestone(tx.hash)
        if len(lines) < 2:
            raise ParseError(f"{path}: ledger has no genesis", 2, 1)
        # resume the coordinator's count: bundles attached since the last milestone
        since = set()
        for h in reversed(ledger._order):
            if h == ledger.genesis or (ledger.milestones and h == ledger.milestones[-1]):
                break
            since.add(ledger.transactions[h].bundle_hash)
        ledger._attaches_since_milestone = len(since)
        return ledger


def _check_tag(tag: str) -> None:
    if len(tag) > MAX_TAG or not is_trytes(tag):
        raise ValueError(f"tag must be at most {MAX_TAG} trytes: {tag!r}")
    if tag in (GENESIS_TAG, MILESTONE_TAG):
        raise ValueError(f"tag {tag!r} is reserved")
