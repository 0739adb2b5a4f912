"""Synthetic hyperbolic networks and what their degree statistics look like.

Generates an H2 network and an S1 network, fits the degree exponent and
shows how the observed size and mean degree differ from the model inputs.
Then runs the finite-size solver backwards from the observed numbers.

    python3 demos/01_synthetic_networks.py
"""
import numpy as np

from hypermap.generator import generate_h2, generate_s1, s1_model_for_observed
from hypermap.graph import compute_stats, giant_subgraph
from hypermap.params import solve_finite_size

# H2: nodes on a disc of radius R, links by the Fermi law on hyperbolic distance
net = generate_h2(5000, 5.0, 2.3, 0.5, seed=1)
g = net.topology
deg = g.degrees
print(f"H2 disc radius R = {net.disc_radius:.3f}")
print(f"  isolated nodes: {np.mean(deg == 0):.1%}, mean degree {deg.mean():.2f}")

# hubs sit near the centre: mean degree decays roughly like exp(-r/2)
for lo in range(0, int(net.disc_radius), 3):
    sel = (net.r >= lo) & (net.r < lo + 3)
    if sel.sum() > 20:
        print(f"  r in [{lo:2d}, {lo + 3:2d}): {sel.sum():5d} nodes, mean degree {deg[sel].mean():7.2f}")

# S1: same graphs in a different parametrisation (angle + hidden degree kappa)
n_model, kb = s1_model_for_observed(3000, 5.0, 2.3)
print(f"\nS1 model size for ~3000 observed nodes of mean degree 5: N={n_model}, k_bar={kb:.2f}")
s1 = generate_s1(n_model, kb, 2.3, 2.0, seed=2)
core = giant_subgraph(s1.topology)
st = compute_stats(core)
print(f"  giant component: {st.n_obs} nodes, k_bar_obs={st.k_bar_obs:.2f}, k_max={st.k_max_obs}, "
      f"clustering={st.mean_clustering:.3f}, gamma_hat={st.gamma_hat}")

# going back: the finite-size system recovers model-level N and k_bar from what was observed
fs = solve_finite_size(st.n_obs, st.k_bar_obs, st.k_max_obs, 2.3)
print(f"  finite-size fit: N={fs.n_model:.0f}, k_bar={fs.k_bar:.2f}, kappa0={fs.kappa0:.3f}, "
      f"alpha_fs={fs.alpha_fs:.3f}, P(0)={fs.p_zero:.3f}")
