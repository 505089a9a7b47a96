"""Publishing and receiving DEAs through the ledger and the content store.

Publishing a document:

1. encode the document bytes as trytes;
2. mask them on the publisher's channel, giving the encrypted blob and its root;
3. put the blob in the content store, giving a content id;
4. encode ``(content id, root)`` as trytes;
5. mask that pointer on the next leaf of the same channel;
6. attach the masked pointer to the ledger as one bundle;
7. the address is the channel root (public) or its hash (restricted).

Fetching runs the same steps backwards, checking every digest and signature
on the way.
"""
from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .dea import DeaRecord, Dikw
from .errors import (
    AccessRevoked,
    AuthenticationError,
    IntegrityError,
    NotFoundError,
    ParseError,
    PreconditionError,
)
from .hashing import H, check_digest
from .mam import MalformedMessageError, MamChannel, MaskedMessage, Mode, channel_address, mask, unmask
from .store import Cid
from .tangle import Bundle, Ledger
from .trytes import bytes_to_trytes, chunk_trytes, trytes_to_bytes

BACKGROUND_ADDRESS = H(b"deamarket-background-traffic")
_AES_MAGIC = b"AESGCM1"


@dataclass(frozen=True)
class Timings:
    processing_ms: float
    attaching_ms: float
    confirming_ms: float | None = None


@dataclass(frozen=True)
class PublishReceipt:
    address: bytes
    mode: Mode
    cid: Cid
    payload_root: bytes
    channel_root: bytes
    bundle_hash: bytes
    timings: Timings

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.address != channel_address(self.channel_root, self.mode):
            raise ValueError("receipt address does not match its channel root and mode")

    def to_dict(self) -> dict:
        return {
            "address": self.address.hex(),
            "mode": self.mode.value,
            "cid": str(self.cid),
            "payload_root": self.payload_root.hex(),
            "channel_root": self.channel_root.hex(),
            "bundle_hash": self.bundle_hash.hex(),
            "timings": asdict(self.timings),
        }


@dataclass(frozen=True)
class MarketEntry:
    address: bytes
    tags: tuple[str, ...]
    description: str
    mode: Mode
    publisher_id: str
    timestamp: int

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "mode", Mode(self.mode))

    def to_json(self) -> str:
        return json.dumps({
            "address": self.address.hex(), "tags": list(self.tags), "description": self.description,
            "mode": self.mode.value, "publisher_id": self.publisher_id, "timestamp": self.timestamp,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "MarketEntry":
        d = json.loads(line)
        return cls(bytes.fromhex(d["address"]), tuple(d["tags"]), d["description"], d["mode"],
                   d["publisher_id"], d["timestamp"])


class Registry:
    """Off-ledger discovery index, one entry per address (latest announcement wins).

    With a ``path`` every announcement is appended to a JSON-lines file,
    which is replayed on construction.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[bytes, tuple[int, MarketEntry]] = {}
        self._counter = 0
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            for lineno, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), start=1):
                if not line.strip():
                    continue
                try:
                    self._add(MarketEntry.from_json(line))
                except (ValueError, KeyError) as exc:
                    raise ParseError(f"{self.path}: bad registry entry: {exc}", lineno, 1) from None

    def _add(self, entry: MarketEntry):
        self._counter += 1
        self._entries[entry.address] = (self._counter, entry)

    def __len__(self):
        return len(self._entries)

    def entries(self) -> list[MarketEntry]:
        return [e for _, e in sorted(self._entries.values(), key=lambda t: t[0])]

    def announce(self, entry: MarketEntry) -> None:
        with self._lock:
            self._add(entry)
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(entry.to_json() + "\n")

    def search(self, tags: Iterable[str] = (), view: str | None = None, alpha=None) -> list[MarketEntry]:
        """Entries carrying every query tag (and coordinate tags), newest first."""
        wanted = set(tags)
        if view is not None:
            wanted.add(f"view:{view}")
        if alpha is not None:
            wanted.add(f"alpha:{Dikw(alpha).value}")
        with self._lock:
            hits = [(e.timestamp, n, e) for n, e in self._entries.values() if wanted <= set(e.tags)]
        hits.sort(key=lambda t: (t[0], t[1]), reverse=True)
        return [e for _, _, e in hits]


def coordinate_tags(record: DeaRecord) -> list[str]:
    tags = [f"view:{record.view}", f"alpha:{record.alpha.value}", f"system:{record.system_id}",
            f"asset:{record.asset_id}", f"t:{record.t}"]
    if record.stage:
        tags.append(f"stage:{record.stage}")
    return tags


def _pointer_bytes(cid: Cid, root: bytes) -> bytes:
    return json.dumps({"cid": str(cid), "root": root.hex()}, sort_keys=True, separators=(",", ":")).encode()


def _read_pointer(data: bytes) -> tuple[Cid, bytes]:
    try:
        d = json.loads(data)
        return Cid.parse(d["cid"]), check_digest(bytes.fromhex(d["root"]), "root")
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"ledger payload is not a content pointer: {exc}") from None


def _aes_encrypt(key: bytes, data: bytes) -> bytes:
    from cryptography.hazmat.primitives.ciphers.aead import AESGCM

    nonce = H(b"deamarket-aes-nonce", key, data)[:12]
    return _AES_MAGIC + nonce + AESGCM(key).encrypt(nonce, data, None)


def _aes_decrypt(key: bytes | None, data: bytes) -> bytes:
    from cryptography.exceptions import InvalidTag
    from cryptography.hazmat.primitives.ciphers.aead import AESGCM

    if not data.startswith(_AES_MAGIC):
        if key is not None:
            raise PreconditionError("document was not pre-encrypted but an extra key was given")
        return data
    if key is None:
        raise AuthenticationError("document is pre-encrypted; an extra key is required")
    nonce = data[len(_AES_MAGIC):len(_AES_MAGIC) + 12]
    try:
        return AESGCM(key).decrypt(nonce, data[len(_AES_MAGIC) + 12:], None)
    except InvalidTag:
        raise AuthenticationError("extra encryption key does not match") from None


class Marketplace:
    """Ties a ledger node, a content store and an optional discovery registry together."""

    def __init__(self, ledger: Ledger, store, registry: Registry | None = None):
        self.ledger = ledger
        self.store = store
        self.registry = registry

    @staticmethod
    def open_channel(mode=Mode.PUBLIC, side_key: bytes | None = None, seed: bytes | None = None,
                     tree_depth: int = 2) -> MamChannel:
        mode = Mode(mode)
        if mode is Mode.RESTRICTED and not side_key:
            raise PreconditionError("restricted mode requires a side key")
        return MamChannel(seed if seed is not None else os.urandom(32), tree_depth, mode, side_key)

    # -- publishing ------------------------------------------------------------

    def publish(self, dea: DeaRecord, channel: MamChannel, *, tags: Sequence[str] = (),
                description: str | None = None, publisher_id: str = "",
                extra_key: bytes | None = None) -> PublishReceipt:
        entry_tags = list(dict.fromkeys([*dea.tags, *tags, *coordinate_tags(dea)]))
        return self.publish_document(dea.to_bytes(), channel, tags=entry_tags,
                                     description=dea.description if description is None else description,
                                     publisher_id=publisher_id, extra_key=extra_key)

    def publish_document(self, data: bytes, channel: MamChannel, *, tags: Sequence[str] = (),
                         description: str = "", publisher_id: str = "",
                         extra_key: bytes | None = None) -> PublishReceipt:
        if channel.mode is Mode.RESTRICTED and not channel.side_key:
            raise PreconditionError("restricted mode requires a side key")
        if channel.tree_depth < 1:
            raise PreconditionError("publishing needs a channel tree with at least two leaves")
        if channel.remaining < 2:
            # both masks of one publish share a tree so the pointer chain stays followable
            channel.advance_tree()
        start = time.perf_counter()
        if extra_key is not None:
            data = _aes_encrypt(extra_key, data)
        inner = mask(bytes_to_trytes(data), channel)
        cid = self.store.put(inner.to_trytes().encode("ascii"))
        outer = mask(bytes_to_trytes(_pointer_bytes(cid, inner.root)), channel)
        address = channel_address(outer.root, channel.mode)
        processed = time.perf_counter()
        bundle = self.ledger.attach(chunk_trytes(outer.to_trytes()), address, f"DEA9{channel.mode.name}")
        attached = time.perf_counter()
        receipt = PublishReceipt(
            address=address, mode=channel.mode, cid=cid, payload_root=inner.root,
            channel_root=outer.root, bundle_hash=bundle.bundle_hash,
            timings=Timings((processed - start) * 1e3, (attached - processed) * 1e3),
        )
        if self.registry is not None:
            self.registry.announce(MarketEntry(address, tuple(tags), description, channel.mode,
                                               publisher_id, bundle.timestamp))
        return receipt

    def await_confirmation(self, receipt: PublishReceipt, poll_interval_ms: float = 100.0,
                           max_polls: int = 100_000) -> PublishReceipt:
        """Drive background traffic until the receipt's bundle is confirmed.

        Confirming time is simulated: one poll interval per round of traffic.
        """
        hashes = [tx.hash for b in self.ledger.get_bundle(receipt.address)
                  if b.bundle_hash == receipt.bundle_hash for tx in b.transactions]
        if not hashes:
            raise NotFoundError("receipt bundle is not on the ledger")
        polls = 0
        while not all(self.ledger.is_confirmed(h) for h in hashes):
            if polls >= max_polls:
                raise TimeoutError(f"bundle unconfirmed after {max_polls} polls")
            self.ledger.attach([""], BACKGROUND_ADDRESS)
            if not self.ledger.milestone_interval:
                self.ledger.issue_milestone()
            polls += 1
        return replace(receipt, timings=replace(receipt.timings, confirming_ms=polls * poll_interval_ms))

    # -- receiving -------------------------------------------------------------

    def _root_for(self, address: bytes, mode: Mode, channel_root: bytes | None) -> bytes:
        if mode is Mode.PUBLIC:
            if channel_root is not None and channel_root != address:
                raise NotFoundError("public address must equal the channel root")
            return address
        if channel_root is None:
            raise PreconditionError("restricted fetch needs the channel root (the address is its hash)")
        if channel_address(channel_root, mode) != address:
            raise NotFoundError("channel root does not hash to this address")
        return channel_root

    def _open(self, bundle: Bundle, root: bytes, side_key: bytes | None,
              extra_key: bytes | None = None) -> tuple[bytes, bytes]:
        for tx in bundle.transactions:
            if not self.ledger.verify_transaction(tx):
                raise IntegrityError(f"transaction {tx.hash.hex()} fails hash/PoW verification")
        outer = MaskedMessage.from_trytes(bundle.message, root)
        pointer, next_root = unmask(outer, root, side_key)
        cid, payload_root = _read_pointer(trytes_to_bytes(pointer))
        blob = self.store.get(cid)
        try:
            text = blob.decode("ascii")
        except UnicodeDecodeError:
            raise MalformedMessageError("stored blob is not a tryte string") from None
        inner = MaskedMessage.from_trytes(text, payload_root)
        trytes, _ = unmask(inner, payload_root, side_key)
        return _aes_decrypt(extra_key, trytes_to_bytes(trytes)), next_root

    def fetch_document(self, address: bytes, mode=Mode.PUBLIC, *, channel_root: bytes | None = None,
                       side_key: bytes | None = None, bundle_hash: bytes | None = None,
                       extra_key: bytes | None = None) -> bytes:
        mode = Mode(mode)
        root = self._root_for(check_digest(address, "address"), mode, channel_root)
        bundles = self.ledger.get_bundle(address)
        if bundle_hash is not None:
            bundles = [b for b in bundles if b.bundle_hash == bundle_hash]
        if not bundles:
            raise NotFoundError(f"nothing published at {address.hex()}")
        newest = max(enumerate(bundles), key=lambda t: (t[1].timestamp, t[0]))[1]
        return self._open(newest, root, side_key, extra_key)[0]

    def fetch(self, address: bytes, mode=Mode.PUBLIC, **kwargs) -> DeaRecord:
        return DeaRecord.from_bytes(self.fetch_document(address, mode, **kwargs))

    def subscribe(self, channel_root: bytes, mode=Mode.PUBLIC, side_key: bytes | None = None) -> "Subscription":
        return Subscription(self, channel_root, mode, side_key)


class Subscription:
    """Follows a channel across trees, yielding each new DEA once, in channel order.

    Iterating yields what is currently available and then raises
    :class:`AccessRevoked` if the publisher rotated the side key.
    :meth:`poll` returns the same records as a list and only sets
    :attr:`revoked`.
    """

    def __init__(self, market: Marketplace, channel_root: bytes, mode=Mode.PUBLIC,
                 side_key: bytes | None = None):
        self.market = market
        self.root = check_digest(channel_root, "channel root")
        self.mode = Mode(mode)
        self.side_key = side_key
        self.revoked = False
        self._seen: set[bytes] = set()
        self._next_root: bytes | None = None

    def _pending(self, root: bytes) -> list[Bundle]:
        bundles = []
        for b in self.market.ledger.get_bundle(channel_address(root, self.mode)):
            if b.bundle_hash in self._seen:
                continue
            try:
                leaf = MaskedMessage.from_trytes(b.message).leaf_index
            except MalformedMessageError:
                leaf = -1
            bundles.append((leaf, b.timestamp, len(bundles), b))
        return [b for *_, b in sorted(bundles, key=lambda t: t[:3])]

    def _drain(self) -> Iterator[DeaRecord]:
        while not self.revoked:
            for b in self._pending(self.root):
                try:
                    data, next_root = self.market._open(b, self.root, self.side_key)
                except AuthenticationError:
                    if self.mode is Mode.RESTRICTED:
                        self.revoked = True
                        return
                    raise
                self._seen.add(b.bundle_hash)
                self._next_root = next_root
                yield DeaRecord.from_bytes(data)
            nxt = self._next_root
            if nxt is None or nxt == self.root or not self.market.ledger.get_bundle(channel_address(nxt, self.mode)):
                return
            self.root = nxt

    def poll(self) -> list[DeaRecord]:
        return list(self._drain())

    def __iter__(self) -> Iterator[DeaRecord]:
        yield from self._drain()
        if self.revoked:
            raise AccessRevoked("side key no longer opens this channel")
