"""Impact-code a 25-level zip variable, then apply the plan to every zip."""

import numpy as np

from treatkit import Frame, design_treatments_n, prepare

rng = np.random.default_rng(42)
zips = [f"z{i:02d}" for i in range(1, 26)]
p = np.r_[np.full(3, 0.8 / 3), np.full(22, 0.2 / 22)]

# small training set, so some zips never show up
n = 100
idx = rng.choice(25, size=n, p=p)
y = (idx + 1) + rng.normal(size=n) + rng.normal(size=n)
d = Frame.from_dict({"zip": [zips[i] for i in idx], "y": y})

omitted = sorted(set(zips) - set(d["zip"].labels()))
print(f"{25 - len(omitted)} zips seen, omitted: {omitted}")

plan = design_treatments_n(d, ["zip"], "y", seed=42)
print(plan.score_frame_csv())

keep = [r.var_name for r in plan.score_frame if r.code in ("lev", "catN")]
treated = prepare(plan, Frame.from_dict({"zip": zips}), var_restriction=keep)
catn = treated["zip_catN"].values
for z, v in zip(zips, catn):
    flag = "  (novel)" if z in omitted else ""
    print(f"{z}  catN {v:+.3f}{flag}")
print("novel zips all zero:", all(catn[zips.index(z)] == 0 for z in omitted))
