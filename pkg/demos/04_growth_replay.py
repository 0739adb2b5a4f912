"""Keeping a map up to date as the network grows.

Embedding from scratch every time would move every node. Instead the first
snapshot is embedded once and later snapshots only place newcomers, each
at the likelihood argmax against the nodes already mapped. Old
coordinates never change, which this script checks byte for byte.

    python3 demos/04_growth_replay.py
"""
import numpy as np

from hypermap.embedder import embed_topology
from hypermap.generator import generate_s1, s1_model_for_observed
from hypermap.graph import giant_subgraph
from hypermap.router import growth_replay

n_model, kb = s1_model_for_observed(2500, 6.0, 2.3)
g = giant_subgraph(generate_s1(n_model, kb, 2.3, 2.0, seed=6).topology)

# random birth order, five nested snapshots
order = np.random.default_rng(0).permutation(g.n)
sizes = np.linspace(1500, g.n, 5).round().astype(int)
snaps = [g.nodes[order[:s]] for s in sizes]


def embed(h):
    return embed_topology(h, 2.0, np.random.default_rng(1), gamma=2.3)[0]


steps, final = growth_replay(snaps, g, embed, np.random.default_rng(2), pairs=10_000)
print("step  nodes  new    p_s    stretch")
for s in steps:
    print(f"{s.step:4d} {s.nodes:6d} {s.new_nodes:5d}  {s.report.success_ratio:.3f}  {s.report.mean_stretch:.3f}")

for prev, cur in zip(steps, steps[1:]):
    old = cur.emap.restrict(prev.emap.nodes)
    same = all(getattr(old, a).tobytes() == getattr(prev.emap, a).tobytes() for a in ("kappa", "theta", "r"))
    print(f"step {cur.step}: coordinates of the {prev.nodes} earlier nodes unchanged: {same}")
