"""Why the capacity-optimal schedule is fragile, and what resilience costs.

Five parallel two-hop routes with capacities 1, 4, 9, 16, 25.  The plain
capacity optimum puts all airtime on the strongest route; one blocked link
then silences the network.  Hedging across the two strongest routes keeps
400/41 ~ 9.76 flowing through any single failure, at the price of a lower
unblocked rate.  The full trade-off table shows the slide from 25 down to
equalized slivers as the failure budget grows.
"""

import beamsched as bs
from beamsched import Link, Network

caps = [1.0, 4.0, 9.0, 16.0, 25.0]
links = []
for relay, c in enumerate(caps, start=1):
    links += [Link(0, relay, c), Link(relay, 6, c)]
net = Network(5, tuple(links))
paths = bs.enumerate_paths(net).paths

plain = bs.approx_capacity(net, paths)
print(f"approximate capacity: {plain.value:g}")
print("  schedule:", {str(p): round(x, 4) for p, x in zip(plain.paths, plain.fractions) if x > 1e-9})
worst_plain, pattern = bs.min_rate_under_blockage(net, plain.paths, plain.fractions, 1)
print(f"  ...but one blocked link leaves {worst_plain:g} (e.g. {sorted(pattern)})\n")

robust = bs.optimal_worst_case(net, paths, 1)
print(f"worst-case optimum for one failure: {robust.value:.4f}  (= 400/41)")
print("  schedule:", {str(p): round(x, 4) for p, x in zip(robust.paths, robust.fractions) if x > 1e-9})
print("  airtime is inversely proportional to path rate: 25/41 on the 16-path, 16/41 on the 25-path\n")

print("trade-off table (rows: schedule optimized for k* failures; columns: k actual failures)")
entries = bs.tradeoff_curve(net, paths, 3)
table = {(e.schedule_budget, e.blocked_count): e.rate for e in entries}
header = "k* \\ k |" + "".join(f"{k:>9d}" for k in range(4))
print(header)
print("-" * len(header))
for k_star in range(4):
    row = "".join(f"{table[(k_star, k)]:>9.3f}" for k in range(4))
    print(f"{k_star:>6d} |{row}")
