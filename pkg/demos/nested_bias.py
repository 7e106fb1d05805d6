"""Naive impact coding overfits; a cross-frame does not.

Two informative and two noise 500-level categoricals feed a logistic model.
Fitting the model on the same rows that built the codes inflates train
accuracy; fitting on out-of-fold codes gives honest estimates.
"""

import numpy as np

from treatkit import Frame, design_treatments_c, mk_cross_frame_c, prepare

rng = np.random.default_rng(2017)
n, n_lev = 3000, 500
names = np.array([f"level{i}" for i in range(1, n_lev + 1)])
cols = {v: names[rng.integers(0, n_lev, n)] for v in ("xBad1", "xBad2", "xGood1", "xGood2")}


def half(v):
    _, code = np.unique(cols[v], return_inverse=True)
    return np.where(code + 1 > n_lev / 2, 1.0, -1.0)


y = (0.2 * rng.normal(size=n) + 0.5 * half("xGood1") + 0.3 * half("xGood2")) > 0
is_test = rng.uniform(size=n) < 0.2
d = Frame.from_dict({**{v: list(c) for v, c in cols.items()}, "y": list(y)})
train, test = d.take(np.flatnonzero(~is_test)), d.take(np.flatnonzero(is_test))
y_train, y_test = y[~is_test].astype(float), y[is_test].astype(float)
vars_ = list(cols)
feats = [v + "_catB" for v in vars_]


def fit_logistic(x, y, iters=50):
    X = np.column_stack([np.ones(len(x)), x])
    beta = np.zeros(X.shape[1])
    for _ in range(iters):
        p = 1 / (1 + np.exp(-(X @ beta)))
        H = X.T @ (X * (p * (1 - p))[:, None])
        beta += np.linalg.lstsq(H, X.T @ (y - p), rcond=None)[0]
    return beta


def accuracy(beta, x, y):
    return np.mean((np.column_stack([np.ones(len(x)), x]) @ beta > 0) == (y > 0.5))


plan = design_treatments_c(train, vars_, "y", True, seed=1)
x_tr, x_te = prepare(plan, train).to_numpy(feats), prepare(plan, test).to_numpy(feats)
b = fit_logistic(x_tr, y_train)
print(f"naive        train {accuracy(b, x_tr, y_train):.3f}  test {accuracy(b, x_te, y_test):.3f}")

cf = mk_cross_frame_c(train, vars_, "y", True, seed=1)
x_tr = cf.cross_frame.to_numpy(feats)
x_te = prepare(cf.treatments, test).to_numpy(feats)
b = fit_logistic(x_tr, y_train)
print(f"cross-frame  train {accuracy(b, x_tr, y_train):.3f}  test {accuracy(b, x_te, y_test):.3f}")
print(cf.eval_sets.summary())
