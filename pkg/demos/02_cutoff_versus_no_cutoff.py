"""Contrast the two regimes through the experiment harness.

With many crossing edges the distance drops over a few steps around
log N / mu. With a handful of crossing edges the walk first mixes inside its
community, then leaks across slowly; t_mix scales like 1 / alpha.

Run: python3 demos/02_cutoff_versus_no_cutoff.py
"""
from nbrwcut.harness import ExperimentPlan, run_plan, scaling_summary

law = {"3": 0.5, "4": 0.5}
template = {"degree_law_0": law, "degree_law_1": law, "split": 0.5}

# %% cutoff side: profile at cutoff + lambda * window
plan = ExperimentPlan.from_dict({
    "kind": "cutoff-profile", "template": template,
    "grid": {"N": [20_000], "alpha": [0.3]}, "seeds_per_cell": 4, "starts": 16,
    "lambdas": [-2, -1, 0, 1, 2],
})
(rec,) = run_plan(plan, master_seed=1)
print("regime:", rec.regime, "c =", round(rec.c, 2))
for row in rec.summary["profile"]:
    print(f"lambda {row['lambda']:+.0f}: mean D {row['mean_tv']:.3f}  normal tail {row['phibar']:.3f}")

# %% no-cutoff side: t_mix(0.25) * alpha is about constant across p
plan = ExperimentPlan.from_dict({
    "kind": "no-cutoff-scaling", "template": template,
    "grid": {"N": [20_000], "p": [4, 8]}, "seeds_per_cell": 2, "starts": 4, "eps": [0.25, 0.45],
})
recs = run_plan(plan, master_seed=2)
for r in recs:
    print(f"p = {r.cell['p']}: median t_mix*alpha {r.summary['median_scaled_tmix']:.3f}, "
          f"t_mix(0.25)/t_mix(0.45) {r.summary['median_cutoff_ratio']:.2f}")
print(scaling_summary(recs))
