"""
A supplier publishes a requirement model, a vehicle maker fetches it
=====================================================================

Walks through one round trip: build a GOPPRR requirement diagram, check it
against the vehicle meta-model, wrap it as a DEA record, publish it in
public and restricted mode, then fetch it back by address.
"""
from deamarket import Ledger, Marketplace, MemoryBlobStore, Mode, Registry, realize_dea
from deamarket.gopprr import Graph, Object, Point, Relationship, Role, validate_graph
from deamarket.synth import VEHICLE_METAMODEL

# A small requirement diagram: one braking requirement, satisfied by a block.
graph = Graph("brakes", "RequirementDiagram", {"name": "Brake system"}, objects=[
    Object("req-stop", "Requirement", {"name": "Stop distance", "text": "100-0 km/h within 36 m",
                                       "priority": 1, "safety_critical": True}),
    Object("blk-ecu", "Block", {"name": "Brake ECU"}, points=[Point("ecu-can", "Port", {"direction": "in"})]),
], relationships=[
    Relationship("sat-1", "Satisfy", [Role("sat-1-from", "satisfier", "blk-ecu"),
                                      Role("sat-1-to", "satisfied", "req-stop")]),
])
print("validation:", validate_graph(VEHICLE_METAMODEL, graph))

# Requirement models sit at the information level of the DIKW ladder.
dea = realize_dea(graph, VEHICLE_METAMODEL, system_id="vehicle-x", asset_id="brakes", t=1,
                  view="requirement", alpha="information", description="brake requirements",
                  tags=["vehicle", "brakes"])
print("document bytes:", len(dea.to_bytes()))

# One in-process node, one store, one registry.
market = Marketplace(Ledger(difficulty=8, seed=0, milestone_interval=3), MemoryBlobStore(), Registry())

# Public mode: anyone holding the address can read it.
public = market.publish(dea, market.open_channel(seed=b"supplier-public"), publisher_id="supplier-a")
print("public address :", public.address.hex())
print("fetched equal  :", market.fetch(public.address) == dea)

# Restricted mode: the address is the hash of the channel root, and the side
# key travels out of band to the vehicle maker only.
channel = market.open_channel(Mode.RESTRICTED, b"shared-with-oem", seed=b"supplier-private")
private = market.publish(dea, channel, tags=["embedded"], publisher_id="supplier-a")
got = market.fetch(private.address, Mode.RESTRICTED, channel_root=private.channel_root,
                   side_key=b"shared-with-oem")
print("restricted ok  :", got == dea)
try:
    market.fetch(private.address, Mode.RESTRICTED, channel_root=private.channel_root)
except Exception as exc:  # noqa: BLE001 - we want to show the error type
    print("without key    :", type(exc).__name__)

# Discovery goes through the registry; coordinates are searchable tags.
for entry in market.registry.search(["embedded"], view="requirement"):
    print("search hit     :", entry.address.hex()[:16], entry.tags)

# Confirmation is simulated: background traffic drives the coordinator.
done = market.await_confirmation(private)
print("timings (ms)   :", done.timings)
