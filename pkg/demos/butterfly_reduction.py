"""Remove the middle edge of the two-unicast butterfly and watch what survives.

The XOR code on the butterfly delivers one bit to each sink.  Dropping the
bottleneck edge cd (capacity 1) costs at most one unit of rate per source:
the kernel restriction keeps the messages that never touch cd, and the
exhaustive oracle confirms no code on the reduced network does better.
"""
from netcap.fixtures import butterfly_two_unicast
from netcap.network import format_fraction
from netcap.oracle import delta_gap_report
from netcap.perturbation import verify_rate_loss

inst = butterfly_two_unicast()
code = inst.code

print("original rates:", {s: format_fraction(r) for s, r in code.demand.rates.items()})

rep = verify_rate_loss(code, "cd", 1, simulate=True)
for line in rep.per_source:
    print(f"  source {line.source}: {format_fraction(line.original)} -> {format_fraction(line.restricted)}"
          f"  (guaranteed at least {format_fraction(line.bound)})")
print("restricted code re-simulated over", rep.check.tuples, "message tuples:", "ok" if rep.check.ok else "BROKEN")

gap = delta_gap_report(inst.net, inst.demand, "cd", 1, 1, "linear")
print(f"oracle: worst loss over the achievable set is {format_fraction(gap.worst_gap)} (delta = {format_fraction(gap.delta)})")
for entry in gap.entries:
    rate = ", ".join(map(format_fraction, entry.rate))
    kept = ", ".join(map(format_fraction, entry.witness))
    print(f"   ({rate}) on N -> best kept ({kept}), loss {format_fraction(entry.gap)}")
