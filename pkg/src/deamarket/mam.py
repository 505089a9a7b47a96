"""Masked authenticated messaging over Merkle-tree channels.

A channel owns a sequence of Merkle trees derived from a secret seed. Each
leaf is a one-time signing key. Masking a message consumes one leaf:

* the body ``message || next_root`` is combined symbol-wise (mod 27) with a
  keystream derived from ``(root, leaf index, side key)``;
* the masked body is signed with the leaf key, and the signature is masked
  with the following keystream symbols;
* the Merkle authentication path for the leaf travels in clear.

Unmasking recomputes the leaf from the signature and walks the path up to
the root, so a wrong side key or any altered symbol fails loudly.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import ots
from .errors import (
    AuthenticationError,
    MalformedTrytesError,
    NotFoundError,
    ParseError,
    TryteRangeError,
)
from .hashing import DIGEST_SIZE, H, check_digest
from .merkle import auth_path, merkle_root, verify_path
from .trytes import bytes_to_trytes, trytes_to_bytes, trytes_to_values, values_to_trytes

MAX_DEPTH = 16
ROOT_TRYTES = 2 * DIGEST_SIZE
SIGNATURE_TRYTES = 2 * ots.SIGNATURE_SIZE
_MAGIC = b"MAM1"
_header = struct.Struct(">4sBI")
_u32 = struct.Struct(">I")
_u64 = struct.Struct(">Q")


class Mode(str, Enum):
    PUBLIC = "public"
    RESTRICTED = "restricted"


class MalformedMessageError(ParseError):
    """Serialized masked message cannot be split into its fields."""


def _leaf_seed(seed: bytes, tree_index: int, leaf: int) -> bytes:
    return H(b"dea-mam-leaf", _u64.pack(tree_index), _u32.pack(leaf), seed)


@dataclass(eq=False)
class MamChannel:
    """Publisher-side channel state. Single writer: not safe to share."""

    seed: bytes
    tree_depth: int = 2
    mode: Mode = Mode.PUBLIC
    side_key: bytes | None = None
    leaf_index: int = 0
    tree_index: int = 0
    _leaves: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if not 0 <= self.tree_depth <= MAX_DEPTH:
            raise ValueError(f"tree_depth must be in 0..{MAX_DEPTH}")
        if not 0 <= self.leaf_index < (1 << self.tree_depth):
            raise ValueError("leaf_index must be < 2**tree_depth")
        if self.mode is Mode.RESTRICTED and not self.side_key:
            raise ValueError("restricted mode requires a side key")
        if self.mode is Mode.PUBLIC and self.side_key is not None:
            raise ValueError("public mode takes no side key")

    @property
    def leaf_count(self) -> int:
        return 1 << self.tree_depth

    @property
    def root(self) -> bytes:
        return merkle_root(self.leaves(self.tree_index))

    @property
    def next_root(self) -> bytes:
        return merkle_root(self.leaves(self.tree_index + 1))

    @property
    def remaining(self) -> int:
        """Unused leaves left in the current tree."""
        return self.leaf_count - self.leaf_index

    def leaves(self, tree_index: int) -> list[bytes]:
        cached = self._leaves.get(tree_index)
        if cached is None:
            cached = [
                ots.public_leaf(ots.secret_key(_leaf_seed(self.seed, tree_index, i)))
                for i in range(self.leaf_count)
            ]
            # only the current and successor trees are ever needed again
            for old in [k for k in self._leaves if k < self.tree_index]:
                del self._leaves[old]
            self._leaves[tree_index] = cached
        return cached

    def advance_tree(self) -> None:
        """Abandon the rest of the current tree and move to its successor."""
        self.tree_index += 1
        self.leaf_index = 0

    def rotate_key(self, side_key: bytes) -> None:
        """Change the authorization key; the channel address stays the same."""
        if self.mode is not Mode.RESTRICTED:
            raise ValueError("only restricted channels carry a side key")
        if not side_key:
            raise ValueError("side key must be non-empty")
        self.side_key = side_key


@dataclass(frozen=True)
class MaskedMessage:
    payload: str
    root: bytes | None
    auth_path: tuple[bytes, ...]
    leaf_index: int
    # known to the publisher; a receiver learns it from unmask()
    next_root: bytes | None = None

    def to_trytes(self) -> str:
        header = _header.pack(_MAGIC, len(self.auth_path), self.leaf_index)
        return bytes_to_trytes(header + b"".join(self.auth_path)) + self.payload

    @classmethod
    def from_trytes(cls, text: str, root: bytes | None = None) -> "MaskedMessage":
        head_len = 2 * _header.size
        try:
            magic, depth, leaf_index = _header.unpack(trytes_to_bytes(text[:head_len]))
        except (ParseError, struct.error):
            raise MalformedMessageError("masked message header is unreadable") from None
        if magic != _MAGIC or depth > MAX_DEPTH:
            raise MalformedMessageError("not a masked message")
        path_end = head_len + 2 * DIGEST_SIZE * depth
        try:
            raw_path = trytes_to_bytes(text[head_len:path_end])
        except ParseError:
            raise MalformedMessageError("authentication path is unreadable") from None
        if len(raw_path) != DIGEST_SIZE * depth:
            raise MalformedMessageError("masked message is truncated")
        path = tuple(raw_path[i:i + DIGEST_SIZE] for i in range(0, len(raw_path), DIGEST_SIZE))
        return cls(text[path_end:], root, path, leaf_index)


def channel_keys(channel: MamChannel, tree_index: int | None = None):
    """Leaves and root of one of the channel's trees (current tree by default)."""
    if tree_index is None:
        tree_index = channel.tree_index
    leaves = channel.leaves(tree_index)
    return leaves, merkle_root(leaves)


def channel_address(root: bytes, mode) -> bytes:
    """Public: the root itself. Restricted: the hash of the root."""
    root = check_digest(root, "root")
    return root if Mode(mode) is Mode.PUBLIC else H(root)


def keystream(root: bytes, side_key: bytes | None, leaf_index: int, n: int) -> np.ndarray:
    """``n`` uniform tryte values from counter-mode hashing."""
    key = side_key or b""
    base = hashlib.sha256(b"dea-mam-ks" + root + _u32.pack(leaf_index) + _u32.pack(len(key)) + key)
    pack = _u64.pack
    parts = []
    have = 0
    counter = 0
    while have < n:
        blocks = (n - have) * 17 // (16 * DIGEST_SIZE) + 2
        chunks = []
        for c in range(counter, counter + blocks):
            h = base.copy()
            h.update(pack(c))
            chunks.append(h.digest())
        counter += blocks
        raw = np.frombuffer(b"".join(chunks), dtype=np.uint8)
        # 243 = 9 * 27, so rejection keeps the values uniform
        vals = raw[raw < 243] % 27
        parts.append(vals)
        have += vals.size
    return np.concatenate(parts)[:n] if parts else np.zeros(0, dtype=np.uint8)


def _signed_digest(root: bytes, leaf_index: int, masked_body: str) -> bytes:
    return H(b"dea-mam-sig", root, _u32.pack(leaf_index), masked_body.encode("ascii"))


def mask(message: str, channel: MamChannel) -> MaskedMessage:
    """Mask ``message`` with the channel's next unused leaf and advance the channel."""
    if message is None:
        raise ValueError("message must not be None")
    leaves, root = channel_keys(channel)
    next_root = channel.next_root
    i = channel.leaf_index
    body = trytes_to_values(message + bytes_to_trytes(next_root))
    ks = keystream(root, channel.side_key, i, body.size + SIGNATURE_TRYTES)
    masked_body = values_to_trytes((body + ks[:body.size]) % 27)
    sk = ots.secret_key(_leaf_seed(channel.seed, channel.tree_index, i))
    sig = trytes_to_values(bytes_to_trytes(ots.sign(_signed_digest(root, i, masked_body), sk)))
    masked_sig = values_to_trytes((sig + ks[body.size:]) % 27)
    out = MaskedMessage(
        payload=masked_body + masked_sig,
        root=root,
        auth_path=tuple(auth_path(leaves, i)),
        leaf_index=i,
        next_root=next_root,
    )
    if i + 1 == channel.leaf_count:
        channel.advance_tree()
    else:
        channel.leaf_index = i + 1
    return out


def unmask(message: MaskedMessage, root: bytes, side_key: bytes | None = None):
    """Verify and unmask; returns ``(message_trytes, next_root)``."""
    root = check_digest(root, "root")
    if message.root is not None and message.root != root:
        raise NotFoundError("message does not belong to a channel with this root")
    n = len(message.payload)
    if n < SIGNATURE_TRYTES + ROOT_TRYTES:
        raise AuthenticationError("masked payload is too short")
    try:
        vals = trytes_to_values(message.payload)
    except MalformedTrytesError as exc:
        raise AuthenticationError(f"masked payload is corrupt: {exc}") from None
    i = message.leaf_index
    plain = (vals.astype(np.int16) - keystream(root, side_key, i, n)) % 27
    plain = plain.astype(np.uint8)
    body_len = n - SIGNATURE_TRYTES
    try:
        sig = trytes_to_bytes(values_to_trytes(plain[body_len:]))
    except TryteRangeError:
        raise AuthenticationError("signature does not decode: wrong key or tampered payload") from None
    leaf = ots.leaf_from_signature(_signed_digest(root, i, message.payload[:body_len]), sig)
    if not verify_path(leaf, message.auth_path, i, root):
        raise AuthenticationError("signature does not verify against the channel root")
    body = values_to_trytes(plain[:body_len])
    return body[:-ROOT_TRYTES], trytes_to_bytes(body[-ROOT_TRYTES:])
