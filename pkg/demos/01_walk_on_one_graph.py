"""Sample one two-community graph, run the walk exactly and compare with theory.

Run: python3 demos/01_walk_on_one_graph.py
"""
import numpy as np

from nbrwcut import CommunitySpec, DegreeLaw, build_operator, compute_stats, conductance, generate_graph, predict
from nbrwcut.model import sample_degree_sequence, validate_spec
from nbrwcut.walk import default_starts, distance_profile, estimate_tmix

# %% a spec: 5000 vertices per side, degrees 3 or 4, about 30% crossing mass
law = DegreeLaw.uniform(3, 4)
d0 = sample_degree_sequence(law, 5000, seed=1)
d1 = sample_degree_sequence(law, 5000, seed=2)
spec = CommunitySpec(d0, d1, p=2 * round(0.15 * d0.sum() / 2))
report = validate_spec(spec)
print(f"N = {spec.N}, alpha = {spec.alpha:.3f}, c = alpha log N = {report.c:.2f} -> {report.regime_hint}")

# %% the graph and its transition operator
g = generate_graph(spec, seed=7)
op = build_operator(g)
print("conductance of H0:", conductance(g, 0, op), "alpha0 =", spec.alpha0)

# %% exact distance profiles from 32 starts
prof = distance_profile(op, default_starts(g, 32, seed=7), t_max=40)
pred = predict(compute_stats(spec))
print(f"predicted cutoff {pred.cutoff_time:.2f}, window {pred.window:.2f}")
for eps in (0.75, 0.5, 0.25):
    est = estimate_tmix(prof, eps)
    print(f"t_mix({eps}) measured {est.value}, predicted {pred.tmix_prediction(eps):.2f}")

# %% the worst-start distance, step by step
for t in range(0, 20):
    print(t, np.round(prof.aggregate[t], 3))
