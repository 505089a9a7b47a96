"""Binary Merkle hash trees: roots and authentication paths.

Parent nodes are ``H(left || right)``. A one-leaf tree's root is the leaf
itself. Leaf counts must be powers of two; nothing is padded.
"""
from typing import Sequence

from .hashing import H


def _check_power_of_two(n: int) -> None:
    if n < 1 or n & (n - 1):
        raise ValueError(f"leaf count must be a power of two >= 1, got {n}")


def tree_levels(leaves: Sequence[bytes]) -> list[list[bytes]]:
    """All levels of the tree, leaves first, root level last."""
    _check_power_of_two(len(leaves))
    levels = [list(leaves)]
    while len(levels[-1]) > 1:
        prev = levels[-1]
        levels.append([H(prev[i], prev[i + 1]) for i in range(0, len(prev), 2)])
    return levels


def merkle_root(leaves: Sequence[bytes]) -> bytes:
    return tree_levels(leaves)[-1][0]


def auth_path(leaves: Sequence[bytes], index: int) -> list[bytes]:
    """Sibling hashes from the leaf level up to (excluding) the root."""
    levels = tree_levels(leaves)
    if not 0 <= index < len(leaves):
        raise IndexError(f"leaf index {index} out of range")
    path = []
    for level in levels[:-1]:
        path.append(level[index ^ 1])
        index >>= 1
    return path


def root_from_path(leaf: bytes, path: Sequence[bytes], index: int) -> bytes:
    node = leaf
    for sibling in path:
        node = H(sibling, node) if index & 1 else H(node, sibling)
        index >>= 1
    return node


def verify_path(leaf: bytes, path: Sequence[bytes], index: int, root: bytes) -> bool:
    if not 0 <= index < (1 << len(path)):
        return False
    return root_from_path(leaf, path, index) == root
