"""Decentralized marketplace for digital engineering artifacts.

Artifacts are GOPPRR models packaged as :class:`DeaRecord` documents,
masked on MAM-style channels, stored by content id and announced on a
simulated tangle ledger.
"""
from .dea import DeaCollection, DeaRecord, Dikw, aggregate, realize_dea
from .errors import (
    AccessRevoked,
    AuthenticationError,
    CapacityError,
    DeaMarketError,
    IntegrityError,
    MalformedTrytesError,
    NotFoundError,
    ParseError,
    PreconditionError,
    RealizationError,
    TryteRangeError,
)
from .hashing import H
from .mam import MamChannel, MaskedMessage, Mode, channel_address, mask, unmask
from .market import MarketEntry, Marketplace, PublishReceipt, Registry, Subscription, Timings
from .store import BlobStore, Cid, MemoryBlobStore
from .tangle import Bundle, Ledger, Transaction, UniformTips, WeightedWalk
from .trytes import bytes_to_trytes, chunk_trytes, trytes_to_bytes

__all__ = [
    "AccessRevoked", "AuthenticationError", "BlobStore", "Bundle", "CapacityError", "Cid", "DeaCollection",
    "DeaMarketError", "DeaRecord", "Dikw", "H", "IntegrityError", "Ledger", "MalformedTrytesError",
    "MamChannel", "MarketEntry", "Marketplace", "MaskedMessage", "MemoryBlobStore", "Mode", "NotFoundError",
    "ParseError", "PreconditionError", "PublishReceipt", "RealizationError", "Registry", "Subscription",
    "Timings", "Transaction", "TryteRangeError", "UniformTips", "WeightedWalk", "aggregate", "bytes_to_trytes",
    "channel_address", "chunk_trytes", "mask", "realize_dea", "trytes_to_bytes", "unmask",
]
__version__ = "0.1.0"
