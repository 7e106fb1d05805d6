import json

import numpy as np
import pytest

from oracle import oracle_logistic_wald, oracle_ols
from simdata import bias_frame, pruning_frame, small_frame, y_indicator
from treatkit import (Controls, DesignError, Frame, SplitError, k_way_cross_validation,
                      load_split_plan, mk_cross_frame_c, mk_cross_frame_n, prepare)
from treatkit import encoders as enc
from treatkit.design import numeric_outcome

VARS = ["sN", "nN", "sC", "nC"]


def _refit(code, col, y, rows):
    sub = col.take(rows)
    if code == "catP":
        return enc.fit_catP(sub, "v")
    if code == "catN":
        return enc.fit_catN(sub, y[rows], "v")
    if code == "catB":
        return enc.fit_catB(sub, y[rows], "v")
    return enc.fit_catD(sub, y[rows], "v")


def test_shape_and_simple_columns_match_prepare():
    f = pruning_frame(1)
    res = mk_cross_frame_n(f, VARS, "y", seed=1)
    cf = res.cross_frame
    assert cf.nrows == f.nrows
    assert cf.names == res.treatments.var_names + ["y"]
    assert res.method == "kwaycrossystratified"
    naive = prepare(res.treatments, f)
    for row in res.treatments.score_frame:
        col = cf[row.var_name].values
        assert np.all(np.isfinite(col))
        if row.code in enc.SIMPLE_CODES:
            assert np.array_equal(col, naive[row.var_name].values)


@pytest.mark.parametrize("task", ["numeric", "binomial"])
def test_exclusion_invariant_by_per_fold_refit(task):
    f = pruning_frame(4)
    if task == "numeric":
        res = mk_cross_frame_n(f, VARS, "y", seed=4)
        y = numeric_outcome(f, "y")
    else:
        f = Frame.from_dict({**{v: f[v] for v in VARS},
                             "y": list(numeric_outcome(f, "y") > 1.0)})
        res = mk_cross_frame_c(f, VARS, "y", True, seed=4)
        y = y_indicator(f)
    for row in res.treatments.score_frame:
        if row.code in enc.SIMPLE_CODES:
            continue
        col = f[row.orig_name]
        got = res.cross_frame[row.var_name].values
        for fold in res.eval_sets.folds:
            assert not set(fold.app.tolist()) & set(fold.train.tolist())
            spec = _refit(row.code, col, y, fold.train)
            np.testing.assert_allclose(got[fold.app], spec.apply(col.take(fold.app)), rtol=0, atol=1e-12)


def test_including_the_row_changes_the_value():
    f = pruning_frame(5)
    y = numeric_outcome(f, "y")
    res = mk_cross_frame_n(f, VARS, "y", seed=5)
    col = f["sC"]
    changed = 0
    rows = res.eval_sets.folds[0].app[:50]
    for r in rows.tolist():
        with_r = _refit("catN", col, y, np.r_[res.eval_sets.folds[0].train, r])
        changed += with_r.apply(col.take([r]))[0] != res.cross_frame["sC_catN"].values[r]
    assert changed == len(rows)


def test_deterministic_given_seed():
    f = pruning_frame(6)
    a = mk_cross_frame_n(f, VARS, "y", seed=9)
    b = mk_cross_frame_n(f, VARS, "y", seed=9, workers=3)
    assert a.cross_frame.equals(b.cross_frame)
    assert a.eval_sets == b.eval_sets
    c = mk_cross_frame_n(f, VARS, "y", seed=10)
    assert not a.cross_frame.equals(c.cross_frame)


def test_fixed_split_plan_is_used():
    f = pruning_frame(2)
    plan = k_way_cross_validation(f.nrows, 4, 0)
    res = mk_cross_frame_n(f, VARS, "y", split_plan=plan, seed=123)
    assert res.method == "kwaycross" and res.eval_sets == plan
    assert mk_cross_frame_n(f, VARS, "y", split_plan=plan, seed=5).cross_frame.equals(res.cross_frame)


def test_small_frame_falls_back_to_one_way():
    res = mk_cross_frame_n(small_frame(), ["x", "z"], "yN")
    assert res.method == "oneway" and len(res.eval_sets.folds) == 5
    resc = mk_cross_frame_c(small_frame(), ["x", "z"], "y", True)
    assert resc.method == "oneway" and resc.cross_frame.names[-1] == "y"
    # leave-one-out catN for row 0: mean(a over rows 1..4) - mean(y over rows 1..4)
    assert res.cross_frame["x_catN"].values[0] == pytest.approx(1.0 - 0.75)


def test_user_split_plan_from_file(tmp_path):
    f = pruning_frame(8)
    n = f.nrows
    folds = [{"train": list(range(0, t)), "app": list(range(t, t + 100))} for t in (100, 200, 300, 400)]
    p = tmp_path / "plan.json"
    p.write_text(json.dumps(folds))
    res = mk_cross_frame_n(f, VARS, "y", split_plan=load_split_plan(p, n))
    assert res.method == "userfunction"
    # the first 100 rows are never scored out of sample and are coded "no level"
    assert np.all(res.cross_frame["sC_catN"].values[:100] == 0)


def test_user_split_function():
    f = pruning_frame(9)
    calls = []

    def splitter(n_rows, n_splits, frame, y):
        calls.append((n_rows, n_splits, frame is f, y.shape))
        idx = np.arange(n_rows)
        return [{"train": idx[idx % n_splits != i].tolist(), "app": idx[idx % n_splits == i].tolist()}
                for i in range(n_splits)]

    res = mk_cross_frame_n(f, VARS, "y", controls=Controls(ncross=4), split_function=splitter)
    assert calls == [(500, 4, True, (500,))]
    assert res.method == "userfunction"

    def leaky(n_rows, n_splits, frame, y):
        return [{"train": [0, 1], "app": [1, 2]}]

    with pytest.raises(SplitError):
        mk_cross_frame_n(f, VARS, "y", split_function=leaky)


def test_errors_propagate():
    with pytest.raises(DesignError):
        mk_cross_frame_n(small_frame(), ["x"], "nope")
    with pytest.raises(DesignError):
        mk_cross_frame_c(small_frame(), ["x"], "y", "maybe")


def test_noise_catN_column_not_significant_downstream():
    hits = 0
    for seed in range(100):
        f = pruning_frame(seed)
        res = mk_cross_frame_n(f, VARS, "y", seed=seed)
        x = res.cross_frame["nC_catN"].values
        hits += oracle_ols(x, numeric_outcome(f, "y"))[3] > 0.05
    print(f"noise catN downstream sig > 0.05 in {hits}/100 runs")
    assert hits >= 95


def test_logistic_on_cross_frame_separates_good_from_bad():
    # xGood2 carries the weaker signal and is not reliably significant in the joint fit
    cols = ["xBad1_catB", "xBad2_catB", "xGood1_catB", "xGood2_catB"]
    bad_quiet = np.zeros(2)
    for seed in range(20):
        f, rgroup = bias_frame(seed)
        train = f.take(np.flatnonzero(rgroup != 2))
        res = mk_cross_frame_c(train, ["xBad1", "xBad2", "xGood1", "xGood2"], "y", True, seed=seed)
        _, p = oracle_logistic_wald(res.cross_frame.to_numpy(cols), y_indicator(train))
        assert p[3] < 0.05 and p[3] < p[1:3].min()
        bad_quiet += p[1:3] > 0.05
    assert np.all(bad_quiet >= 18)
