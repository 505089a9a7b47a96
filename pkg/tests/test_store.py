import hashlib
import os

import pytest
from hypothesis import given, settings, strategies as st

from deamarket.errors import IntegrityError, NotFoundError, ParseError
from deamarket.store import BlobStore, Cid, MemoryBlobStore, default_root


@pytest.fixture(params=["disk", "memory"])
def store(request, tmp_path):
    return BlobStore(tmp_path / "s") if request.param == "disk" else MemoryBlobStore()


def test_put_is_deterministic_and_content_addressed(store):
    a = store.put(b"hello")
    assert store.put(b"hello") == a
    assert a.digest == hashlib.sha256(b"hello").digest()
    assert str(a) == "sha256:" + hashlib.sha256(b"hello").hexdigest()
    assert store.put(b"hellp") != a
    assert store.get(a) == b"hello"
    assert a in store and len(store) == 2


def test_unknown_cid(store):
    with pytest.raises(NotFoundError):
        store.get(Cid.of(b"never"))


def test_large_blob(store):
    data = os.urandom(5_600_000)
    assert store.get(store.put(data)) == data


def test_empty_blob(store):
    assert store.get(store.put(b"")) == b""


def test_disk_corruption_detected(tmp_path):
    s = BlobStore(tmp_path)
    cid = s.put(b"important bytes")
    path = s.path_for(cid)
    assert path.parent.name == cid.digest.hex()[:2]
    raw = bytearray(path.read_bytes())
    raw[3] ^= 0x01
    path.write_bytes(bytes(raw))
    with pytest.raises(IntegrityError):
        s.get(cid)


def test_reopen_sees_existing_blobs(tmp_path):
    cid = BlobStore(tmp_path).put(b"x")
    again = BlobStore(tmp_path)
    assert cid in again and again.get(cid) == b"x"


def test_env_root(monkeypatch, tmp_path):
    monkeypatch.setenv("DEA_STORE_ROOT", str(tmp_path / "envroot"))
    assert default_root() == tmp_path / "envroot"
    BlobStore().put(b"y")
    assert (tmp_path / "envroot" / "blobs").is_dir()


def test_cid_parse():
    c = Cid.of(b"z")
    assert Cid.parse(str(c)) == c
    for bad in ("", "md5:00", "sha256:zz", "sha256:" + "00" * 31, "sha256"):
        with pytest.raises((ParseError, ValueError)):
            Cid.parse(bad)


@settings(max_examples=50)
@given(st.binary(), st.binary())
def test_distinct_content_distinct_cid(a, b):
    assert (Cid.of(a) == Cid.of(b)) == (a == b)
