"""The one hash function used repo-wide (Merkle nodes, addresses, CIDs, PoW)."""
import hashlib

DIGEST_SIZE = 32
ZERO_DIGEST = bytes(DIGEST_SIZE)


def H(*parts: bytes) -> bytes:
    """SHA-256 over the concatenation of ``parts``."""
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.digest()


def check_digest(value: bytes, what: str = "digest") -> bytes:
    if not isinstance(value, (bytes, bytearray)) or len(value) != DIGEST_SIZE:
        raise ValueError(f"{what} must be {DIGEST_SIZE} bytes")
    return bytes(value)


def from_hex(text: str, what: str = "digest") -> bytes:
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise ValueError(f"{what} is not valid hex: {text!r}") from None
    return check_digest(raw, what)
