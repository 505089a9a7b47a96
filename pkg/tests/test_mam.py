import random

import pytest
from hypothesis import given, settings, strategies as st

from deamarket.errors import AuthenticationError, NotFoundError
from deamarket.hashing import H
from deamarket.mam import (
    MalformedMessageError,
    MamChannel,
    MaskedMessage,
    Mode,
    channel_address,
    channel_keys,
    keystream,
    mask,
    unmask,
)
from deamarket.trytes import ALPHABET, bytes_to_trytes


def test_channel_invariants():
    with pytest.raises(ValueError):
        MamChannel(b"s", 2, Mode.RESTRICTED)
    with pytest.raises(ValueError):
        MamChannel(b"s", 2, Mode.PUBLIC, b"key")
    with pytest.raises(ValueError):
        MamChannel(b"s", 2, leaf_index=4)


def test_channel_keys_deterministic():
    a = channel_keys(MamChannel(b"seed", 2))
    b = channel_keys(MamChannel(b"seed", 2))
    assert a == b
    assert channel_keys(MamChannel(b"seed2", 2))[1] != a[1]
    leaves, root = channel_keys(MamChannel(b"seed", 0))
    assert len(leaves) == 1 and root == leaves[0]


def test_addresses():
    r = H(b"root")
    assert channel_address(r, Mode.PUBLIC) == r
    assert channel_address(r, "restricted") == H(r)
    assert channel_address(r, Mode.RESTRICTED) == channel_address(r, Mode.RESTRICTED)


def test_public_roundtrip_needs_only_root():
    ch = MamChannel(b"seed", 2)
    msg = bytes_to_trytes(b"hello world")
    m = mask(msg, ch)
    wire = MaskedMessage.from_trytes(m.to_trytes())
    assert wire.leaf_index == 0 and wire.auth_path == m.auth_path
    out, next_root = unmask(wire, m.root)
    assert out == msg
    assert next_root == channel_keys(ch, 1)[1]


def test_two_masks_same_root_until_rollover():
    ch = MamChannel(b"seed", 1)
    a, b = mask("ABC", ch), mask("DEF", ch)
    assert (a.leaf_index, b.leaf_index) == (0, 1)
    assert a.root == b.root
    c = mask("GHI", ch)
    assert c.root == a.next_root and c.leaf_index == 0
    assert unmask(c, c.root)[0] == "GHI"


def test_restricted_needs_key():
    ch = MamChannel(b"seed", 2, Mode.RESTRICTED, b"k1")
    m = mask("HELLO", ch)
    assert unmask(m, m.root, b"k1")[0] == "HELLO"
    for key in (None, b"k2", b""):
        with pytest.raises(AuthenticationError):
            unmask(m, m.root, key)


def test_wrong_root_is_not_found_or_auth():
    ch = MamChannel(b"seed", 2)
    m = mask("HELLO", ch)
    with pytest.raises(NotFoundError):
        unmask(m, H(b"other"))
    wire = MaskedMessage.from_trytes(m.to_trytes())
    with pytest.raises(AuthenticationError):
        unmask(wire, H(b"other"))


def test_every_flipped_payload_tryte_detected():
    ch = MamChannel(b"seed", 2)
    m = mask(bytes_to_trytes(b"payload"), ch)
    text = m.to_trytes()
    r = random.Random(0)
    for pos in range(len(text)):
        new = r.choice(ALPHABET.replace(text[pos], ""))
        bad = text[:pos] + new + text[pos + 1:]
        with pytest.raises((AuthenticationError, MalformedMessageError)):
            unmask(MaskedMessage.from_trytes(bad), m.root)


def test_key_rotation_keeps_address():
    ch = MamChannel(b"seed", 2, Mode.RESTRICTED, b"old")
    m1 = mask("AAA", ch)
    ch.rotate_key(b"new")
    m2 = mask("BBB", ch)
    assert m1.root == m2.root
    assert unmask(m1, m1.root, b"old")[0] == "AAA"
    with pytest.raises(AuthenticationError):
        unmask(m2, m2.root, b"old")
    assert unmask(m2, m2.root, b"new")[0] == "BBB"
    with pytest.raises(ValueError):
        MamChannel(b"s").rotate_key(b"x")


def test_malformed_header():
    with pytest.raises(MalformedMessageError):
        MaskedMessage.from_trytes("ABCD")
    with pytest.raises(MalformedMessageError):
        MaskedMessage.from_trytes("")


def test_keystream_uniform_and_deterministic():
    ks = keystream(H(b"r"), b"k", 0, 27 * 4000)
    assert ks.min() == 0 and ks.max() == 26
    counts = [int((ks == v).sum()) for v in range(27)]
    assert max(counts) - min(counts) < 600
    assert (keystream(H(b"r"), b"k", 0, 100) == ks[:100]).all()
    assert not (keystream(H(b"r"), b"k", 1, 100) == ks[:100]).all()


@settings(max_examples=25, deadline=None)
@given(st.binary(max_size=300), st.binary(min_size=1, max_size=16))
def test_roundtrip_property(data, key):
    ch = MamChannel(b"prop", 1, Mode.RESTRICTED, key)
    m = mask(bytes_to_trytes(data), ch)
    assert unmask(MaskedMessage.from_trytes(m.to_trytes()), m.root, key)[0] == bytes_to_trytes(data)
