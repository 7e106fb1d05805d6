"""Prune derived variables by significance at the heuristic 1/n_var threshold."""

import numpy as np

from treatkit import Frame, design_treatments_n, prepare

rng = np.random.default_rng(7)
n, n_lev = 500, 100
zips = [f"z{i:03d}" for i in range(1, n_lev + 1)]
zipval = rng.uniform(size=n_lev)
s_n, n_n = rng.normal(size=n), rng.normal(size=n)
s_c, n_c = rng.integers(0, n_lev, n), rng.integers(0, n_lev, n)
y = s_n + zipval[s_c] + rng.normal(size=n)
d = Frame.from_dict({"sN": s_n, "nN": n_n, "sC": [zips[i] for i in s_c],
                     "nC": [zips[i] for i in n_c], "y": y})

plan = design_treatments_n(d, ["sN", "nN", "sC", "nC"], "y", seed=7)
n_var = sum(r.code not in ("catP", "catD") for r in plan.score_frame)
threshold = 1 / n_var
for r in plan.score_frame:
    if r.code in ("clean", "catN"):
        verdict = "keep" if r.sig < threshold else "drop"
        print(f"{r.var_name:10s} sig {r.sig:.3g}  {verdict}")

treated = prepare(plan, d, prune_sig=threshold)
print(f"threshold {threshold:.4f}; kept columns: {treated.names}")
