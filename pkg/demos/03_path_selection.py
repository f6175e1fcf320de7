"""The greedy path selector at work, including the case it gets wrong.

On a 4-node network whose unreliable shortcut looks locally attractive,
the label-setting sweep commits to the wrong route into the junction node
and returns a path with half the achievable average rate.  On a generated
25-relay network the iterated selector distills a thousand-plus routes
into a pool, and the average-rate optimum over that pool picks the working
set a rate controller would use.
"""

import beamsched as bs
from beamsched import GenConfig, Link, Network

net = Network(
    3,
    (Link(0, 1, 10.0), Link(0, 2, 10.0), Link(2, 3, 6.0, 0.5), Link(1, 3, 1.0), Link(3, 4, 1.0)),
)
rates = {
    str(p): bs.path_capacity(net, p) * bs.path_success(net, p)
    for p in bs.enumerate_paths(net).paths
}
print("true average rates:", rates)
print("greedy pick:       ", bs.select_best_path(net), "(commits to the 0-2 route into node 3)")
print()

gen = bs.generate_topology(GenConfig(n_relays=25, seed=7))
lam = bs.sample_intensities(gen.network, seed=8)
big = bs.assign_blockage(gen.network, lam, blockage_scale=5e-5)
print(f"generated network: {len(big.links)} links, {gen.path_count} simple paths")
pool = bs.select_paths(big)
print(f"selection pool: {len(pool)} paths (cap is 5N = {5 * big.n_relays})")
selection = bs.build_candidate_paths(big, [None, 300.0, 500.0], 5e-5, min_count=10)
print(f"candidate working set ({len(selection.paths)} paths):")
for p in selection.paths:
    cap = bs.path_capacity(big, p)
    succ = bs.path_success(big, p)
    print(f"  {str(p):<28s} capacity {cap:6.2f}  survival {succ:.3f}")
