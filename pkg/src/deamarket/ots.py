"""Winternitz one-time signatures (w=16) over 32-byte digests.

A leaf of a channel's Merkle tree is ``H(public key)``; verification
recomputes the public key from a signature, so only the leaf has to be
authenticated against the tree root.
"""
import struct

from .hashing import DIGEST_SIZE, H

W = 16
MSG_DIGITS = 2 * DIGEST_SIZE  # base-16 digits of a 32-byte digest
CHECKSUM_DIGITS = 3  # max checksum 64 * 15 = 960 < 16**3
CHAINS = MSG_DIGITS + CHECKSUM_DIGITS
SIGNATURE_SIZE = CHAINS * DIGEST_SIZE

_step = struct.Struct(">BB")


def _digits(digest: bytes) -> list[int]:
    digits = []
    for byte in digest:
        digits.append(byte >> 4)
        digits.append(byte & 0x0F)
    checksum = sum(W - 1 - d for d in digits)
    for shift in (8, 4, 0):
        digits.append((checksum >> shift) & 0x0F)
    return digits


def _chain(value: bytes, chain: int, start: int, steps: int) -> bytes:
    for pos in range(start, start + steps):
        value = H(b"\x01", _step.pack(chain, pos), value)
    return value


def secret_key(leaf_seed: bytes) -> list[bytes]:
    return [H(b"\x00", leaf_seed, struct.pack(">B", i)) for i in range(CHAINS)]


def public_leaf(sk: list[bytes]) -> bytes:
    return H(*(_chain(s, i, 0, W - 1) for i, s in enumerate(sk)))


def sign(digest: bytes, sk: list[bytes]) -> bytes:
    return b"".join(_chain(s, i, 0, d) for i, (s, d) in enumerate(zip(sk, _digits(digest))))


def leaf_from_signature(digest: bytes, signature: bytes) -> bytes:
    """Recompute the signer's leaf; it only matches if the signature is genuine."""
    if len(signature) != SIGNATURE_SIZE:
        raise ValueError("signature has wrong length")
    parts = []
    for i, d in enumerate(_digits(digest)):
        piece = signature[i * DIGEST_SIZE:(i + 1) * DIGEST_SIZE]
        parts.append(_chain(piece, i, d, W - 1 - d))
    return H(*parts)
