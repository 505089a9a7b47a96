"""Content-addressed blob store backed by a local directory.

Layout under the store root::

    blobs/<first two hex digits>/<full hex digest>

A blob's content identifier is ``sha256:<hex digest>``. Reads re-hash the
file and refuse to return bytes that no longer match their identifier.
"""
from __future__ import annotations

import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

from .errors import IntegrityError, NotFoundError, ParseError
from .hashing import H, check_digest

STORE_ROOT_ENV = "DEA_STORE_ROOT"
DEFAULT_STORE_ROOT = "dea-store"
SCHEME = "sha256"


@dataclass(frozen=True, order=True)
class Cid:
    digest: bytes
    scheme: str = SCHEME

    def __post_init__(self):
        check_digest(self.digest, "cid digest")
        if self.scheme != SCHEME:
            raise ValueError(f"unsupported cid scheme {self.scheme!r}")

    @classmethod
    def of(cls, content: bytes) -> "Cid":
        return cls(H(content))

    @classmethod
    def parse(cls, text: str) -> "Cid":
        scheme, sep, hexdigest = text.partition(":")
        if not sep or scheme != SCHEME:
            raise ParseError(f"not a content identifier: {text!r}")
        try:
            return cls(bytes.fromhex(hexdigest), scheme)
        except ValueError:
            raise ParseError(f"not a content identifier: {text!r}") from None

    def __str__(self):
        return f"{self.scheme}:{self.digest.hex()}"


def default_root() -> Path:
    return Path(os.environ.get(STORE_ROOT_ENV, DEFAULT_STORE_ROOT))


class BlobStore:
    """Thread-safe directory store. Identical puts race benignly."""

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_root()
        self._blobs = self.root / "blobs"
        self._blobs.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._index: set[Cid] = set()
        for path in self._blobs.glob("*/*"):
            try:
                self._index.add(Cid(bytes.fromhex(path.name)))
            except ValueError:
                continue

    def path_for(self, cid: Cid) -> Path:
        hexdigest = cid.digest.hex()
        return self._blobs / hexdigest[:2] / hexdigest

    def __contains__(self, cid: Cid) -> bool:
        return cid in self._index

    def __len__(self):
        return len(self._index)

    def put(self, content: bytes) -> Cid:
        content = bytes(content)
        cid = Cid.of(content)
        path = self.path_for(cid)
        if cid in self._index and path.exists():
            return cid
        path.parent.mkdir(exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".put-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(content)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        with self._lock:
            self._index.add(cid)
        return cid

    def get(self, cid: Cid) -> bytes:
        path = self.path_for(cid)
        try:
            content = path.read_bytes()
        except FileNotFoundError:
            raise NotFoundError(f"no blob {cid}") from None
        if H(content) != cid.digest:
            raise IntegrityError(f"blob {cid} does not match its digest")
        return content


class MemoryBlobStore:
    """Same contract as BlobStore without touching disk; used for tests and benches."""

    def __init__(self):
        self.blobs: dict[Cid, bytes] = {}
        self._lock = threading.Lock()

    def __contains__(self, cid):
        return cid in self.blobs

    def __len__(self):
        return len(self.blobs)

    def put(self, content: bytes) -> Cid:
        content = bytes(content)
        cid = Cid.of(content)
        with self._lock:
            self.blobs.setdefault(cid, content)
        return cid

    def get(self, cid: Cid) -> bytes:
        try:
            content = self.blobs[cid]
        except KeyError:
            raise NotFoundError(f"no blob {cid}") from None
        if H(content) != cid.digest:
            raise IntegrityError(f"blob {cid} does not match its digest")
        return content
