"""
Subscribing to a channel and losing access after a key rotation
===============================================================
"""
from deamarket import AccessRevoked, Ledger, Marketplace, MemoryBlobStore, Mode
from deamarket.synth import synthetic_record

market = Marketplace(Ledger(difficulty=6, seed=1), MemoryBlobStore())

# A depth-1 tree holds two leaves, so every publish rolls to a new tree and
# the subscriber has to follow the next-root chain.
channel = market.open_channel(Mode.RESTRICTED, b"season-1", seed=b"updates", tree_depth=1)
sub = market.subscribe(channel.root, Mode.RESTRICTED, b"season-1")

for i in range(3):
    market.publish(synthetic_record(2000, seed=i, asset_id=f"rev-{i}"), channel)
print("first poll :", [r.asset_id for r in sub.poll()])
print("second poll:", sub.poll())

# The publisher rotates the key; the channel address does not change.
channel.rotate_key(b"season-2")
market.publish(synthetic_record(2000, seed=9, asset_id="rev-9"), channel)
try:
    for record in sub:
        print("unexpected:", record.asset_id)
except AccessRevoked as exc:
    print("revoked    :", exc)
