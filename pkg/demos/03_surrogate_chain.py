"""The two-state surrogate: occupancy, CLT and how long it tracks the walk.

Run: python3 demos/03_surrogate_chain.py
"""
import numpy as np

from nbrwcut import SurrogateChain, clt_check, generate_graph, spectral_gap, surrogate_occupancy_closed_form
from nbrwcut.harness import realize_spec
from nbrwcut.theory import coupling_budget, coupling_failure_times
from nbrwcut.walk import community_occupancy

cell = {"N": 50_000, "alpha": 0.05, "split": 0.5,
        "degree_law_0": {"3": 0.5, "4": 0.5}, "degree_law_1": {"3": 1 / 3, "4": 1 / 3, "5": 1 / 3}}
spec = realize_spec(cell, seed=3)
chain = SurrogateChain.from_spec(spec)
print("mu_i =", np.round(chain.mu_i, 3), "nu^2 =", round(chain.nu2, 3))
print("spectral gap", spectral_gap(chain).gap, "eigenvalues", spectral_gap(chain).eigenvalues)

# %% community occupancy: graph walk against the closed form
g = generate_graph(spec, seed=3)
curve = community_occupancy(g, None, 40, 10_000, seed=3, start_side=0)
closed = surrogate_occupancy_closed_form(chain, 0, np.arange(41))
for t in range(0, 41, 5):
    print(f"t={t:2d}  walk {curve.freq[t]:.3f} +- {curve.stderr[t]:.3f}  surrogate {closed[t]:.3f}")

# %% normalized sums of log-degrees approach a Gaussian
for t in (500, 1000, 2000):
    res = clt_check(chain, 0, t, 50_000, seed=t)
    print(f"t={t}: Kolmogorov distance {res.distance:.4f} (sampling band {res.band:.4f})")

# %% decoupling times scale like t^2 / N
T = coupling_failure_times(spec, 0, 100, 2000, seed=4)
for t in (10, 30, 70):
    print(f"t={t}: P(T <= t) = {np.mean(T <= t):.3f}, t^2/N = {coupling_budget(spec.N, t):.3f}")
