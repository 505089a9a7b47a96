"""Independent reference implementations the library is checked against.

None of these import the code under test's algorithms; they are written
the slow, obvious way.
"""
import hashlib
import itertools

ALPHA = "9ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _build_table():
    # enumerate (high, low) symbol pairs in counting order; no divmod involved
    table = {}
    counter = 0
    for hi, lo in itertools.product(ALPHA, ALPHA):
        if counter > 255:
            break
        table[counter] = lo + hi
        counter += 1
    return table


BYTE_TO_PAIR = _build_table()
PAIR_TO_BYTE = {v: k for k, v in BYTE_TO_PAIR.items()}


def oracle_encode(data: bytes) -> str:
    return "".join(BYTE_TO_PAIR[b] for b in data)


def oracle_decode(text: str) -> bytes:
    return bytes(PAIR_TO_BYTE[text[i:i + 2]] for i in range(0, len(text), 2))


def sha(*parts):
    return hashlib.sha256(b"".join(parts)).digest()


def oracle_merkle_root(leaves):
    """Recursive halving; a single leaf is its own root."""
    if len(leaves) == 1:
        return leaves[0]
    mid = len(leaves) // 2
    return sha(oracle_merkle_root(leaves[:mid]), oracle_merkle_root(leaves[mid:]))


def transitive_closure(vertices, edges):
    """Floyd-Warshall reachability matrix: reach[a][b] iff a path a -> b exists (a != b)."""
    idx = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    reach = [[False] * n for _ in range(n)]
    for a, b in edges:
        reach[idx[a]][idx[b]] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return {(vertices[i], vertices[j]) for i in range(n) for j in range(n) if reach[i][j]}


def ledger_edges(ledger):
    """(approver, approved) pairs of a ledger, genesis self-loops dropped."""
    edges = set()
    for h, tx in ledger.transactions.items():
        if h == ledger.genesis:
            continue
        edges.add((h, tx.trunk))
        edges.add((h, tx.branch))
    return edges
