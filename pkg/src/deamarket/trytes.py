"""Bytes <-> tryte conversion and chunking to transaction capacity.

Each byte ``v`` becomes two symbols, ``v % 27`` followed by ``v // 27``,
drawn from ``9ABCDEFGHIJKLMNOPQRSTUVWXYZ`` (``9`` is zero).
"""
import numpy as np

from .errors import MalformedTrytesError, TryteRangeError

ALPHABET = "9ABCDEFGHIJKLMNOPQRSTUVWXYZ"
TRANSACTION_CAPACITY = 2187

_SYMBOLS = np.frombuffer(ALPHABET.encode("ascii"), dtype=np.uint8)
# ascii code -> tryte value, 255 marks "not a tryte"
_VALUES = np.full(256, 255, dtype=np.uint8)
_VALUES[_SYMBOLS] = np.arange(27, dtype=np.uint8)


def values_to_trytes(values: np.ndarray) -> str:
    """Render an array of tryte values (0..26) as a tryte string."""
    return _SYMBOLS[values].tobytes().decode("ascii")


def trytes_to_values(trytes: str) -> np.ndarray:
    """Tryte string -> uint8 array of values 0..26."""
    try:
        raw = trytes.encode("ascii")
    except UnicodeEncodeError:
        raise MalformedTrytesError("non-ascii symbol in tryte string") from None
    values = _VALUES[np.frombuffer(raw, dtype=np.uint8)]
    if values.size and values.max() == 255:
        pos = int(np.argmax(values == 255))
        raise MalformedTrytesError(f"symbol {trytes[pos]!r} at offset {pos} is not a tryte")
    return values


def is_trytes(text: str) -> bool:
    try:
        trytes_to_values(text)
    except MalformedTrytesError:
        return False
    return True


def bytes_to_trytes(data: bytes) -> str:
    arr = np.frombuffer(bytes(data), dtype=np.uint8)
    out = np.empty(2 * arr.size, dtype=np.uint8)
    out[0::2] = arr % 27
    out[1::2] = arr // 27
    return values_to_trytes(out)


def trytes_to_bytes(trytes: str) -> bytes:
    if len(trytes) % 2:
        raise MalformedTrytesError(f"tryte string has odd length {len(trytes)}")
    values = trytes_to_values(trytes).astype(np.uint16)
    decoded = values[0::2] + 27 * values[1::2]
    if decoded.size and decoded.max() > 255:
        pos = int(np.argmax(decoded > 255))
        raise TryteRangeError(
            f"tryte pair {trytes[2 * pos:2 * pos + 2]!r} at offset {2 * pos} exceeds 255"
        )
    return decoded.astype(np.uint8).tobytes()


def chunk_trytes(trytes: str, capacity: int = TRANSACTION_CAPACITY) -> list[str]:
    """Split into capacity-sized chunks; the empty string yields one empty chunk."""
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    if not trytes:
        return [""]
    return [trytes[i:i + capacity] for i in range(0, len(trytes), capacity)]
