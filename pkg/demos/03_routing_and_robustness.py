"""Greedy forwarding on a hyperbolic map, and how it degrades under damage.

Each node forwards to the neighbour closest (hyperbolically) to the
destination. We measure the success ratio p_s and the stretch (greedy hops
over shortest hops), then remove links or hubs while keeping every
coordinate fixed.

    python3 demos/03_routing_and_robustness.py
"""
import numpy as np

from hypermap.embedder import EmbeddedMap, KERNEL_INFERRED
from hypermap.generator import generate_s1, s1_model_for_observed
from hypermap.graph import giant_subgraph
from hypermap.router import betweenness, evaluate_routing, greedy_route, robustness_sweep

n_model, kb = s1_model_for_observed(3000, 6.0, 2.3)
net = generate_s1(n_model, kb, 2.3, 2.5, seed=5)
g = giant_subgraph(net.topology)
idx = g.nodes
# route on the true coordinates, so only the graph's navigability is measured here
truth = EmbeddedMap(net.params, idx, net.kappa[idx], net.theta[idx], np.full(g.n, KERNEL_INFERRED))

one = greedy_route(g, truth, int(idx[0]), int(idx[-1]))
print(f"{idx[0]} -> {idx[-1]}: {one.status} in {one.hops} hops via {one.path}")

rep = evaluate_routing(g, truth, pairs=20_000, rng=np.random.default_rng(0))
print(f"\nbaseline over {rep.pairs_evaluated} pairs: p_s={rep.success_ratio:.3f}, stretch={rep.mean_stretch:.3f}, "
      f"hops {rep.mean_greedy_hops:.2f} greedy vs {rep.mean_shortest_hops:.2f} shortest")
print(f"failures: {rep.loops} loops, {rep.cap_exceeded} over the hop cap ({rep.hop_cap})")

for kind, levels in (("random-links", [0, 0.05, 0.1, 0.2]), ("top-hubs", [0, 1, 5, 20])):
    print(f"\n{kind}")
    for pt in robustness_sweep(g, truth, kind, levels, np.random.default_rng(1), pairs=20_000):
        r = pt.report
        print(f"  level {pt.level:6g}: p_s={r.success_ratio:.3f} stretch={r.mean_stretch:.3f} "
              f"giant={pt.giant_fraction:.3f} skipped={r.pairs_skipped_unreachable}")

# greedy paths lean on the same hubs that shortest paths do
bs = betweenness(g, truth, mode="shortest", pairs=20_000, rng=np.random.default_rng(2))
bg = betweenness(g, truth, mode="greedy", pairs=20_000, rng=np.random.default_rng(2))
top = np.argsort(-bs.values)[:5]
print("\nnode  degree  shortest  greedy")
for i in top:
    print(f"{bs.nodes[i]:5d} {g.degrees[i]:6d}  {bs.values[i]:.3f}    {bg.values[i]:.3f}")
