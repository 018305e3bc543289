"""Walk through the relay-node argument on a small zero-error code.

The relay node a receives everything the sinks need, apart from what travels on the edge e.
We check the two halves of the argument numerically: what a learns about
each message, and that some value of W_e leaves enough uncertainty behind
for the broadcast part to carry the reduced rates.
"""
from netcap.fixtures import relay_instances
from netcap.theorem import TheoremInstance, verify_theorem

for inst in relay_instances():
    rep = verify_theorem(TheoremInstance(inst.code, inst.node, inst.edge))
    print(f"{inst.name}: relay {rep.node}, edge {rep.edge}, delta {rep.delta}, n = {rep.n}, eps = {rep.eps:g}")
    for line in rep.mac.per_source:
        print(f"  I(M_{line.source}; inputs of {rep.node}) = {line.mutual_information:.3f} >= {line.lower_bound:.3f}")
    print(f"  chose W_e = {rep.w_e.value}: H = {rep.w_e.entropy:.3f}, average {rep.w_e.average:.3f}")
    print("  reduced rates in the broadcast region:", rep.bc_in_region, "| overall:", "PASS" if rep.passed else "FAIL")
