import pytest

from deamarket import ots
from deamarket.hashing import H


def test_sign_verify_and_tamper():
    sk = ots.secret_key(b"seed")
    leaf = ots.public_leaf(sk)
    digest = H(b"message")
    sig = ots.sign(digest, sk)
    assert len(sig) == ots.SIGNATURE_SIZE == 67 * 32
    assert ots.leaf_from_signature(digest, sig) == leaf
    assert ots.leaf_from_signature(H(b"other"), sig) != leaf
    bad = bytearray(sig)
    bad[100] ^= 1
    assert ots.leaf_from_signature(digest, bytes(bad)) != leaf


def test_wrong_length_rejected():
    with pytest.raises(ValueError):
        ots.leaf_from_signature(H(b""), b"\x00" * 10)


def test_seeds_give_distinct_leaves():
    assert ots.public_leaf(ots.secret_key(b"a")) != ots.public_leaf(ots.secret_key(b"b"))
